//! Sparse rational vectors keyed by basis index, kept sorted.

use crate::rational::Rational;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Rational)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec { entries: Vec::new() }
    }

    pub fn unit(i: usize) -> Self {
        SparseVec { entries: vec![(i, Rational::one())] }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut v: Vec<(usize, Rational)> = pairs.into_iter().collect();
        v.sort_by_key(|(i, _)| *i);
        let mut out: Vec<(usize, Rational)> = Vec::with_capacity(v.len());
        for (i, q) in v {
            match out.last_mut() {
                Some((j, p)) if *j == i => *p += &q,
                _ => out.push((i, q)),
            }
        }
        out.retain(|(_, q)| !q.is_zero());
        SparseVec { entries: out }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.entries.iter().map(|(i, q)| (*i, q))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Rational {
        match self.entries.binary_search_by_key(&i, |(j, _)| *j) {
            Ok(p) => self.entries[p].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn leading(&self) -> Option<(usize, &Rational)> {
        self.entries.first().map(|(i, q)| (*i, q))
    }

    pub fn scaled(&self, q: &Rational) -> SparseVec {
        if q.is_zero() {
            return SparseVec::new();
        }
        SparseVec { entries: self.entries.iter().map(|(i, p)| (*i, p * q)).collect() }
    }

    /// `self += q * other`.
    pub fn add_scaled(&mut self, other: &SparseVec, q: &Rational) {
        if q.is_zero() || other.is_empty() {
            return;
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let mut a = std::mem::take(&mut self.entries).into_iter().peekable();
        let mut b = other.entries.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, _)), Some((j, _))) if i < j => out.push(a.next().unwrap()),
                (Some((i, _)), Some((j, _))) if i > j => {
                    let (j, p) = b.next().unwrap();
                    out.push((*j, p * q));
                }
                (Some(_), Some(_)) => {
                    let (i, mut p) = a.next().unwrap();
                    let (_, r) = b.next().unwrap();
                    p.add_mul(r, q);
                    if !p.is_zero() {
                        out.push((i, p));
                    }
                }
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => {
                    let (j, p) = b.next().unwrap();
                    out.push((*j, p * q));
                }
                (None, None) => break,
            }
        }
        self.entries = out;
    }
}
