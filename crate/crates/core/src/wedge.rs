//! Exterior powers of a Hall-basis Lie algebra.

use std::collections::BTreeMap;

use smallvec::SmallVec;

use crate::hall::{HallBasis, LieElement};
use crate::rational::Rational;

/// Strictly increasing tuple of basis indices.
pub type Wedge = SmallVec<[u16; 4]>;

/// Sort `idx` in place; returns the permutation sign, or `None` on a repeat.
pub fn sort_with_sign(idx: &mut [u16]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    Some(sign)
}

/// Insert `i` into the sorted wedge `w`, i.e. compute `e_i ^ w`.
pub fn insert_front(i: u16, w: &[u16]) -> Option<(Wedge, i64)> {
    let pos = match w.binary_search(&i) {
        Ok(_) => return None,
        Err(p) => p,
    };
    let mut out: Wedge = SmallVec::with_capacity(w.len() + 1);
    out.extend_from_slice(&w[..pos]);
    out.push(i);
    out.extend_from_slice(&w[pos..]);
    Some((out, if pos % 2 == 0 { 1 } else { -1 }))
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WedgeChain {
    pub(crate) terms: BTreeMap<Wedge, Rational>,
}

impl WedgeChain {
    pub fn new() -> Self {
        WedgeChain { terms: BTreeMap::new() }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Wedge, Rational)>) -> Self {
        let mut c = WedgeChain::new();
        for (w, q) in terms {
            c.add_term(w, &q);
        }
        c
    }

    /// Single wedge of basis indices in any order.
    pub fn basis_wedge(idx: &[usize]) -> Self {
        let mut w: Wedge = idx.iter().map(|&i| i as u16).collect();
        let mut c = WedgeChain::new();
        if let Some(s) = sort_with_sign(&mut w) {
            c.add_term(w, &Rational::from_int(s));
        }
        c
    }

    /// `1 (x) nothing`: the unit of the exterior algebra.
    pub fn unit() -> Self {
        let mut c = WedgeChain::new();
        c.add_term(Wedge::new(), &Rational::one());
        c
    }

    pub fn add_term(&mut self, w: Wedge, q: &Rational) {
        if q.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(q.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += q;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, o: &WedgeChain, q: &Rational) {
        if q.is_zero() {
            return;
        }
        for (w, p) in &o.terms {
            self.add_term(w.clone(), &(p * q));
        }
    }

    pub fn add_assign(&mut self, o: &WedgeChain) {
        self.add_scaled(o, &Rational::one());
    }

    pub fn sub(&self, o: &WedgeChain) -> WedgeChain {
        let mut r = self.clone();
        r.add_scaled(o, &Rational::from_int(-1));
        r
    }

    pub fn scaled(&self, q: &Rational) -> WedgeChain {
        let mut r = WedgeChain::new();
        r.add_scaled(self, q);
        r
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Wedge, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &[u16]) -> Rational {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    /// `self ^ a` for a Lie element `a`.
    pub fn wedge_right(&self, a: &LieElement) -> WedgeChain {
        let mut out = WedgeChain::new();
        for (w, q) in &self.terms {
            for (i, c) in a.iter() {
                let i = i as u16;
                if w.contains(&i) {
                    continue;
                }
                let mut nw: Wedge = w.clone();
                nw.push(i);
                let s = sort_with_sign(&mut nw).expect("distinct");
                out.add_term(nw, &(&(q * c) * &Rational::from_int(s)));
            }
        }
        out
    }

    /// `self ^ other`.
    pub fn wedge(&self, other: &WedgeChain) -> WedgeChain {
        let mut out = WedgeChain::new();
        for (w, q) in &self.terms {
            for (v, p) in &other.terms {
                let mut nw: Wedge = w.clone();
                nw.extend_from_slice(v);
                if let Some(s) = sort_with_sign(&mut nw) {
                    out.add_term(nw, &(&(q * p) * &Rational::from_int(s)));
                }
            }
        }
        out
    }

    /// Keep only terms accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Wedge) -> bool) -> WedgeChain {
        WedgeChain {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| keep(w))
                .map(|(w, q)| (w.clone(), q.clone()))
                .collect(),
        }
    }

    /// Degree of the wedge terms, if homogeneous.
    pub fn wedge_degree(&self) -> Option<usize> {
        self.terms.keys().next().map(|w| w.len())
    }

    pub fn format(&self, b: &HallBasis) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(w, q)| format!("{} * {}", q, format_wedge(b, w)))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub fn format_wedge(b: &HallBasis, w: &[u16]) -> String {
    let parts: Vec<String> = w.iter().map(|&i| b.word_string(i as usize)).collect();
    format!("[{}]", parts.join(" ^ "))
}

/// Wedge product of Lie elements in order.
pub fn wedge_of(elems: &[&LieElement]) -> WedgeChain {
    let mut acc = WedgeChain::unit();
    for e in elems {
        acc = acc.wedge_right(e);
    }
    acc
}

/// Total degree of a basis wedge.
pub fn wedge_weight(b: &HallBasis, w: &[u16]) -> usize {
    w.iter().map(|&i| b.degree(i as usize)).sum()
}

/// Multidegree of a basis wedge.
pub fn wedge_multidegree(b: &HallBasis, w: &[u16]) -> SmallVec<[u8; 8]> {
    let mut m: SmallVec<[u8; 8]> = SmallVec::from_elem(0, b.rank());
    for &i in w {
        for (g, d) in b.multidegree(i as usize).iter().enumerate() {
            m[g] += d;
        }
    }
    m
}

/// Apply a linear map on the Lie algebra (given by images of basis words)
/// to every wedge factor.
pub fn map_wedges(c: &WedgeChain, images: &[LieElement]) -> WedgeChain {
    let mut out = WedgeChain::new();
    for (w, q) in c.iter() {
        let mut acc = WedgeChain::unit();
        for &i in w.iter() {
            acc = acc.wedge_right(&images[i as usize]);
            if acc.is_zero() {
                break;
            }
        }
        out.add_scaled(&acc, q);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_of_sort() {
        let mut w = [2u16, 0, 1];
        assert_eq!(sort_with_sign(&mut w), Some(1));
        let mut w = [1u16, 0];
        assert_eq!(sort_with_sign(&mut w), Some(-1));
        let mut w = [1u16, 1];
        assert_eq!(sort_with_sign(&mut w), None);
    }

    #[test]
    fn insertion_sign() {
        let (w, s) = insert_front(1, &[0, 2]).unwrap();
        assert_eq!(&w[..], &[0, 1, 2]);
        assert_eq!(s, -1);
    }

    #[test]
    fn wedge_antisymmetry() {
        let b = HallBasis::new(3, 1);
        let x = b.generator(0);
        let y = b.generator(1);
        let xy = wedge_of(&[&x, &y]);
        let yx = wedge_of(&[&y, &x]);
        assert_eq!(xy, yx.scaled(&Rational::from_int(-1)));
        assert!(wedge_of(&[&x, &x]).is_zero());
    }
}
