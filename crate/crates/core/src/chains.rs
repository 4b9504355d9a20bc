//! Bar chains of a group, the Koszul complex of a nilpotent Lie algebra,
//! and the subspaces used as quotient targets.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use smallvec::SmallVec;

use crate::hall::HallBasis;
use crate::linalg::{KeyedVec, SubspaceQ};
use crate::nilpotent::{FreeWord, GroupElement, NilpotentGroup};
use crate::rational::Rational;
use crate::wedge::{insert_front, wedge_multidegree, Wedge, WedgeChain};

/// Group operations needed by the bar complex.
pub trait BarGroup {
    type Elem: Clone + Ord;
    fn product(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// The free group on the surface generators; products are reduced words.
#[derive(Clone, Copy, Debug, Default)]
pub struct FreeGroup;

impl BarGroup for FreeGroup {
    type Elem = FreeWord;
    fn product(&self, a: &FreeWord, b: &FreeWord) -> FreeWord {
        a.mul(b)
    }
}

impl BarGroup for NilpotentGroup {
    type Elem = GroupElement;
    fn product(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.mul(a, b)
    }
}

/// Finite rational combination of tuples `(g1 | ... | gn)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarChain<T: Ord> {
    terms: BTreeMap<Vec<T>, Rational>,
}

impl<T: Ord + Clone> Default for BarChain<T> {
    fn default() -> Self {
        BarChain { terms: BTreeMap::new() }
    }
}

impl<T: Ord + Clone> BarChain<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(tuple: Vec<T>, q: Rational) -> Self {
        let mut c = Self::new();
        c.add_term(tuple, &q);
        c
    }

    pub fn add_term(&mut self, tuple: Vec<T>, q: &Rational) {
        if q.is_zero() {
            return;
        }
        let e = self.terms.entry(tuple.clone()).or_default();
        *e += q;
        if e.is_zero() {
            self.terms.remove(&tuple);
        }
    }

    pub fn add_scaled(&mut self, o: &BarChain<T>, q: &Rational) {
        for (t, p) in &o.terms {
            self.add_term(t.clone(), &(p * q));
        }
    }

    pub fn add_assign(&mut self, o: &BarChain<T>) {
        self.add_scaled(o, &Rational::one());
    }

    pub fn sub(&self, o: &BarChain<T>) -> BarChain<T> {
        let mut r = self.clone();
        r.add_scaled(o, &Rational::from_int(-1));
        r
    }

    pub fn scaled(&self, q: &Rational) -> BarChain<T> {
        let mut r = Self::new();
        r.add_scaled(self, q);
        r
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<T>, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Apply `f` to every entry.
    pub fn map_entries<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> BarChain<U> {
        let mut out = BarChain::new();
        for (t, q) in &self.terms {
            out.add_term(t.iter().map(&mut f).collect(), q);
        }
        out
    }
}

/// Boundary of the unnormalized bar complex:
/// `d(g1|...|gn) = (g2|...|gn) + sum_i (-1)^i (...|g_i g_{i+1}|...) + (-1)^n (g1|...|g_{n-1})`.
pub fn bar_boundary<G: BarGroup>(group: &G, c: &BarChain<G::Elem>) -> BarChain<G::Elem> {
    let mut out = BarChain::new();
    for (t, q) in c.iter() {
        let n = t.len();
        if n == 0 {
            continue;
        }
        out.add_term(t[1..].to_vec(), q);
        for i in 0..n - 1 {
            let mut nt = Vec::with_capacity(n - 1);
            nt.extend_from_slice(&t[..i]);
            nt.push(group.product(&t[i], &t[i + 1]));
            nt.extend_from_slice(&t[i + 2..]);
            let sign = if (i + 1) % 2 == 0 { 1 } else { -1 };
            out.add_term(nt, &(q * &Rational::from_int(sign)));
        }
        let sign = if n % 2 == 0 { 1 } else { -1 };
        out.add_term(t[..n - 1].to_vec(), &(q * &Rational::from_int(sign)));
    }
    out
}

/// Koszul boundary of the Chevalley-Eilenberg complex with trivial
/// coefficients: `d(g1^...^gp) = sum_{i<j} (-1)^(i+j) [g_i,g_j] ^ ...`.
pub fn koszul_boundary(b: &HallBasis, c: &WedgeChain) -> WedgeChain {
    let mut out = WedgeChain::new();
    for (w, q) in c.iter() {
        koszul_boundary_term(b, w, q, &mut out);
    }
    out
}

pub(crate) fn koszul_boundary_term(b: &HallBasis, w: &Wedge, q: &Rational, out: &mut WedgeChain) {
    let p = w.len();
    for i in 0..p {
        for j in (i + 1)..p {
            let br = b.bracket_basis(w[i] as usize, w[j] as usize);
            if br.is_empty() {
                continue;
            }
            let rest: Wedge = w
                .iter()
                .enumerate()
                .filter(|(t, _)| *t != i && *t != j)
                .map(|(_, &x)| x)
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            for (t, c) in br.iter() {
                if let Some((nw, s)) = insert_front(t as u16, &rest) {
                    out.add_term(nw, &(&(q * c) * &Rational::from_int(sign * s)));
                }
            }
        }
    }
}

type Multidegree = SmallVec<[u8; 8]>;

/// Subspace of a wedge power, split into multidegree blocks. The Koszul
/// differential preserves multidegree, so images decompose blockwise.
#[derive(Debug, Default)]
pub struct GradedSubspace {
    blocks: HashMap<Multidegree, SubspaceQ<Wedge>>,
}

impl GradedSubspace {
    pub fn dim(&self) -> usize {
        self.blocks.values().map(|s| s.dim()).sum()
    }

    pub fn insert(&mut self, b: &HallBasis, v: &WedgeChain) {
        for (md, part) in split_by_multidegree(b, v) {
            self.blocks.entry(md).or_default().insert(&part);
        }
    }

    /// Canonical representative modulo the subspace.
    pub fn reduce(&self, b: &HallBasis, v: &WedgeChain) -> WedgeChain {
        let mut out = WedgeChain::new();
        for (md, part) in split_by_multidegree(b, v) {
            let r = match self.blocks.get(&md) {
                Some(s) => s.reduce(&part),
                None => part,
            };
            for (w, q) in r {
                out.add_term(w, &q);
            }
        }
        out
    }

    pub fn contains(&self, b: &HallBasis, v: &WedgeChain) -> bool {
        self.reduce(b, v).is_zero()
    }
}

fn split_by_multidegree(b: &HallBasis, v: &WedgeChain) -> HashMap<Multidegree, KeyedVec<Wedge>> {
    let mut parts: HashMap<Multidegree, KeyedVec<Wedge>> = HashMap::new();
    for (w, q) in v.iter() {
        parts
            .entry(wedge_multidegree(b, w))
            .or_default()
            .insert(w.clone(), q.clone());
    }
    parts
}

/// All strictly increasing `p`-tuples of basis indices below `dim`.
pub fn basis_wedges(dim: usize, p: usize) -> Vec<Wedge> {
    let mut out = Vec::new();
    let mut cur: Wedge = SmallVec::new();
    fn rec(start: usize, dim: usize, p: usize, cur: &mut Wedge, out: &mut Vec<Wedge>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            if dim - i < p - cur.len() {
                break;
            }
            cur.push(i as u16);
            rec(i + 1, dim, p, cur, out);
            cur.pop();
        }
    }
    rec(0, dim, p, &mut cur, &mut out);
    out
}

type CacheKey = (Vec<String>, usize, usize);

fn boundary_cache() -> &'static Mutex<HashMap<CacheKey, Arc<OnceLock<Arc<GradedSubspace>>>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<OnceLock<Arc<GradedSubspace>>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `Im d_{p+1}` inside the `p`-th exterior power, computed once per basis.
pub fn image_of_boundary(b: &HallBasis, p: usize) -> Arc<GradedSubspace> {
    let key = (b.names().to_vec(), b.class(), p);
    let cell = {
        let mut cache = boundary_cache().lock().expect("cache lock");
        cache.entry(key).or_default().clone()
    };
    cell.get_or_init(|| Arc::new(compute_image_of_boundary(b, p))).clone()
}

fn compute_image_of_boundary(b: &HallBasis, p: usize) -> GradedSubspace {
    let mut s = GradedSubspace::default();
    for w in basis_wedges(b.dim(), p + 1) {
        let mut out = WedgeChain::new();
        koszul_boundary_term(b, &w, &Rational::one(), &mut out);
        if !out.is_zero() {
            let md = wedge_multidegree(b, &w);
            let part: KeyedVec<Wedge> = out.iter().map(|(w, q)| (w.clone(), q.clone())).collect();
            s.blocks.entry(md).or_default().insert(&part);
        }
    }
    s
}

/// Whether the basis 2-wedge `w` lies in `Gamma_2 ^ Gamma_{k+1}`.
pub fn in_gamma_wedge(b: &HallBasis, k: usize, w: &[u16]) -> bool {
    if w.len() != 2 {
        return false;
    }
    let (d0, d1) = (b.degree(w[0] as usize), b.degree(w[1] as usize));
    (d0 >= 2 && d1 > k) || (d1 >= 2 && d0 > k)
}

/// Basis 2-wedges spanning `Gamma_2 ^ Gamma_{k+1}`.
pub fn gamma_wedge_subspace(b: &HallBasis, k: usize) -> Vec<Wedge> {
    basis_wedges(b.dim(), 2)
        .into_iter()
        .filter(|w| in_gamma_wedge(b, k, w))
        .collect()
}

/// Drop the `Gamma_2 ^ Gamma_{k+1}` coordinates of a 2-chain.
pub fn drop_gamma_wedge(b: &HallBasis, k: usize, c: &WedgeChain) -> WedgeChain {
    c.filtered(|w| !in_gamma_wedge(b, k, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wedge::wedge_of;

    #[test]
    fn koszul_examples() {
        let b = HallBasis::new(3, 2);
        let x = b.generator(0);
        let y = b.generator(1);
        let z = b.generator(2);
        let d2 = koszul_boundary(&b, &wedge_of(&[&x, &y]));
        let xy = b.bracket(&x, &y);
        assert_eq!(d2, wedge_of(&[&xy.neg()]));
        let d3 = koszul_boundary(&b, &wedge_of(&[&x, &y, &z]));
        let xz = b.bracket(&x, &z);
        let yz = b.bracket(&y, &z);
        let mut expected = wedge_of(&[&xy.neg(), &z]);
        expected.add_assign(&wedge_of(&[&xz, &y]));
        expected.add_assign(&wedge_of(&[&yz.neg(), &x]));
        assert_eq!(d3, expected);
    }

    #[test]
    fn abelian_boundary_vanishes() {
        let b = HallBasis::new(3, 1);
        let x = b.generator(0);
        let y = b.generator(1);
        assert!(koszul_boundary(&b, &wedge_of(&[&x, &y])).is_zero());
        assert_eq!(image_of_boundary(&b, 2).dim(), 0);
    }

    #[test]
    fn bar_examples() {
        let g = FreeGroup;
        let a = FreeWord::generator(0);
        let c = FreeWord::generator(1);
        let d = bar_boundary(&g, &BarChain::single(vec![a.clone(), c.clone()], Rational::one()));
        let mut e = BarChain::new();
        e.add_term(vec![c.clone()], &Rational::one());
        e.add_term(vec![a.mul(&c)], &Rational::from_int(-1));
        e.add_term(vec![a.clone()], &Rational::one());
        assert_eq!(d, e);
        assert!(bar_boundary(&g, &BarChain::single(vec![a], Rational::one())).is_zero());
    }

    #[test]
    fn gamma_wedges_rank2_class3() {
        let b = HallBasis::new(2, 3);
        let set = gamma_wedge_subspace(&b, 1);
        let xy = b.find("[x,y]").unwrap() as u16;
        let xxy = b.find("[x,[x,y]]").unwrap() as u16;
        let yxy = b.find("[y,[x,y]]").unwrap() as u16;
        let x = b.find("x").unwrap() as u16;
        assert!(set.iter().any(|w| w[..] == [xy, xxy]));
        assert!(set.iter().any(|w| w[..] == [xy, yxy]));
        assert!(!set.iter().any(|w| w[..] == [x, xy]));
        assert!(set.iter().all(|w| w.iter().any(|&i| b.degree(i as usize) >= 2)));
    }

    #[test]
    fn rank2_class2_image() {
        let b = HallBasis::new(2, 2);
        let s = image_of_boundary(&b, 2);
        let xy = b.find("[x,y]").unwrap();
        for blk in s.blocks.values() {
            for row in blk.rows() {
                assert!(row.keys().all(|w| w.contains(&(xy as u16))));
            }
        }
    }
}
