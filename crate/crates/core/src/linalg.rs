//! Sparse exact row echelon forms and reduction modulo a subspace.

use std::collections::BTreeMap;

use crate::rational::Rational;

/// Sparse vector with ordered keys: the leading key is the smallest.
pub type KeyedVec<K> = BTreeMap<K, Rational>;

/// Subspace spanned by rows in reduced row echelon form. Each row has
/// leading coefficient 1 at its pivot, and every pivot column is zero in
/// every other row.
#[derive(Clone, Debug)]
pub struct SubspaceQ<K: Ord + Clone> {
    rows: BTreeMap<K, KeyedVec<K>>,
}

impl<K: Ord + Clone> Default for SubspaceQ<K> {
    fn default() -> Self {
        SubspaceQ { rows: BTreeMap::new() }
    }
}

fn axpy<K: Ord + Clone>(v: &mut KeyedVec<K>, row: &KeyedVec<K>, q: &Rational) {
    for (k, c) in row {
        let e = v.entry(k.clone()).or_default();
        e.add_mul(c, q);
        if e.is_zero() {
            v.remove(k);
        }
    }
}

impl<K: Ord + Clone> SubspaceQ<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> + '_ {
        self.rows.keys()
    }

    pub fn rows(&self) -> impl Iterator<Item = &KeyedVec<K>> + '_ {
        self.rows.values()
    }

    /// Representative of `v` with zero coordinates at every pivot.
    pub fn reduce(&self, v: &KeyedVec<K>) -> KeyedVec<K> {
        let mut out = v.clone();
        if self.rows.is_empty() {
            return out;
        }
        // Rows are fully reduced, so each pivot is eliminated exactly once.
        let hits: Vec<(K, Rational)> = out
            .iter()
            .filter(|(k, _)| self.rows.contains_key(*k))
            .map(|(k, q)| (k.clone(), q.clone()))
            .collect();
        for (k, q) in hits {
            let row = &self.rows[&k];
            axpy(&mut out, row, &(-q));
        }
        out
    }

    pub fn contains(&self, v: &KeyedVec<K>) -> bool {
        self.reduce(v).is_empty()
    }

    /// Add `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: &KeyedVec<K>) -> bool {
        let r = self.reduce(v);
        let Some((pivot, lead)) = r.iter().next().map(|(k, q)| (k.clone(), q.clone())) else {
            return false;
        };
        let inv = lead.recip();
        let row: KeyedVec<K> = r.into_iter().map(|(k, q)| (k, &q * &inv)).collect();
        for other in self.rows.values_mut() {
            if let Some(q) = other.get(&pivot).cloned() {
                axpy(other, &row, &(-q));
            }
        }
        self.rows.insert(pivot, row);
        true
    }

    pub fn from_generators<'a>(gens: impl IntoIterator<Item = &'a KeyedVec<K>>) -> Self
    where
        K: 'a,
    {
        let mut s = SubspaceQ::new();
        for g in gens {
            s.insert(g);
        }
        s
    }
}

/// Inverse of a square matrix by Gauss-Jordan elimination, or `None` if
/// singular.
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), n, "square matrix");
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let inv = a[col][col].recip();
        for q in a[col].iter_mut() {
            *q = &*q * &inv;
        }
        let pivot = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = -row[col].clone();
            for (q, p) in row.iter_mut().zip(&pivot) {
                q.add_mul(p, &f);
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(pairs: &[(u32, i64)]) -> KeyedVec<u32> {
        pairs.iter().map(|&(k, q)| (k, Rational::from_int(q))).collect()
    }

    #[test]
    fn inverse_of_2x2() {
        let q = |n| Rational::from_int(n);
        let m = vec![vec![q(2), q(1)], vec![q(1), q(1)]];
        let inv = invert(&m).unwrap();
        assert_eq!(inv, vec![vec![q(1), q(-1)], vec![q(-1), q(2)]]);
        assert!(invert(&[vec![q(1), q(2)], vec![q(2), q(4)]]).is_none());
    }

    #[test]
    fn empty_span_is_identity() {
        let s: SubspaceQ<u32> = SubspaceQ::new();
        let t = v(&[(0, 3), (2, 1)]);
        assert_eq!(s.reduce(&t), t);
    }

    #[test]
    fn member_reduces_to_zero() {
        let s = SubspaceQ::from_generators([&v(&[(0, 1), (1, 1)])]);
        assert!(s.contains(&v(&[(0, 2), (1, 2)])));
        let r = s.reduce(&v(&[(0, 1)]));
        assert_eq!(r, v(&[(1, -1)]));
        assert_eq!(s.reduce(&r), r);
    }

    #[test]
    fn rows_stay_reduced() {
        let s = SubspaceQ::from_generators([&v(&[(1, 1), (2, 1)]), &v(&[(0, 1), (1, 1)])]);
        for row in s.rows() {
            let nonpivot_hits = row.keys().filter(|k| s.rows.contains_key(k)).count();
            assert_eq!(nonpivot_hits, 1);
        }
    }
}
