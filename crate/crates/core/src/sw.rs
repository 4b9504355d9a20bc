//! Canonical chain map from the bar complex of a free nilpotent group to
//! the Koszul complex of its Malcev Lie algebra.
//!
//! The Koszul resolution `U(m) (x) L(m)` is handled in symmetric
//! coordinates: `U(m)` is identified with `S(m)` through the symmetrization
//! map, where multiplication by a Lie element has a closed Bernoulli-number
//! formula. The abelian Koszul homotopy on `S(m) (x) L(m)` is corrected by the
//! perturbation series for `delta = d - d_abelian`.
//!
//! Truncation is by total weight (sum of Hall degrees over both tensor
//! factors). Every operator used here either preserves weight or, for
//! multiplication by group elements, raises it, so terms above the weight of
//! the requested output can be discarded at once.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::ToPrimitive;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::chains::{koszul_boundary_term, BarChain};
use crate::hall::{HallBasis, LieElement};
use crate::nilpotent::{GroupElement, InducedLieMap, NilpotentGroup};
use crate::rational::{bernoulli, factorial, Rational};
use crate::sparse::SparseVec;
use crate::wedge::{insert_front, sort_with_sign, Wedge, WedgeChain};

/// Nondecreasing sequence of basis indices: a monomial of `S(m)` in
/// symmetric coordinates, or of `U(m)` in PBW coordinates.
pub type Mono = SmallVec<[u16; 6]>;

fn mono_insert(m: &[u16], t: u16) -> Mono {
    let pos = m.partition_point(|&x| x <= t);
    let mut out: Mono = SmallVec::with_capacity(m.len() + 1);
    out.extend_from_slice(&m[..pos]);
    out.push(t);
    out.extend_from_slice(&m[pos..]);
    out
}

fn distinct_counts(m: &[u16]) -> SmallVec<[(u16, u32); 6]> {
    let mut out: SmallVec<[(u16, u32); 6]> = SmallVec::new();
    for &x in m {
        match out.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

fn from_counts(counts: &[(u16, u32)]) -> Mono {
    let mut out = Mono::new();
    for &(v, c) in counts {
        for _ in 0..c {
            out.push(v);
        }
    }
    out
}

fn sign(i: usize) -> Rational {
    Rational::from_int(if i.is_multiple_of(2) { 1 } else { -1 })
}

/// Element of `S(m) (x) L(m)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymChain {
    terms: FxHashMap<(Mono, Wedge), Rational>,
}

impl SymChain {
    pub fn new() -> Self {
        Self::default()
    }

    /// `1 (x) 1`.
    pub fn unit() -> Self {
        let mut c = Self::new();
        c.add_term(Mono::new(), Wedge::new(), &Rational::one());
        c
    }

    pub fn single(m: Mono, w: Wedge, q: Rational) -> Self {
        let mut c = Self::new();
        c.add_term(m, w, &q);
        c
    }

    pub fn add_term(&mut self, m: Mono, w: Wedge, q: &Rational) {
        if q.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry((m, w)) {
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

    pub fn add_scaled(&mut self, o: &SymChain, q: &Rational) {
        if q.is_zero() {
            return;
        }
        for ((m, w), p) in &o.terms {
            self.add_term(m.clone(), w.clone(), &(p * q));
        }
    }

    pub fn add_assign(&mut self, o: &SymChain) {
        self.add_scaled(o, &Rational::one());
    }

    pub fn sub(&self, o: &SymChain) -> SymChain {
        let mut r = self.clone();
        r.add_scaled(o, &Rational::from_int(-1));
        r
    }

    pub fn scaled(&self, q: &Rational) -> SymChain {
        let mut r = Self::new();
        r.add_scaled(self, q);
        r
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &Wedge, &Rational)> + '_ {
        self.terms.iter().map(|((m, w), q)| (m, w, q))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[u16], w: &[u16]) -> Rational {
        self.terms
            .get(&(Mono::from_slice(m), Wedge::from_slice(w)))
            .cloned()
            .unwrap_or_default()
    }

    pub fn filtered(&self, mut keep: impl FnMut(&Mono, &Wedge) -> bool) -> SymChain {
        SymChain {
            terms: self
                .terms
                .iter()
                .filter(|((m, w), _)| keep(m, w))
                .map(|(k, q)| (k.clone(), q.clone()))
                .collect(),
        }
    }

    /// Image under `epsilon (x) id`: keep the terms with empty monomial.
    pub fn counit(&self) -> WedgeChain {
        WedgeChain::from_terms(
            self.terms
                .iter()
                .filter(|((m, _), _)| m.is_empty())
                .map(|((_, w), q)| (w.clone(), q.clone())),
        )
    }

    /// Terms in a fixed order.
    pub fn sorted(&self) -> BTreeMap<(Mono, Wedge), Rational> {
        self.terms.iter().map(|(k, q)| (k.clone(), q.clone())).collect()
    }
}

/// Koszul resolution of the trivial module over `U(m)` for one free
/// nilpotent Lie algebra, in symmetric coordinates.
#[derive(Debug)]
pub struct KoszulResolution {
    basis: Arc<HallBasis>,
    /// Coefficients of `x / (1 - e^{-x})`: right multiplication.
    right: Vec<Rational>,
    /// Coefficients of `x / (e^x - 1)`: left multiplication.
    left: Vec<Rational>,
    kernels: Mutex<FxHashMap<(Mono, u16, bool), Arc<Vec<(Mono, Rational)>>>>,
}

impl KoszulResolution {
    pub fn new(basis: Arc<HallBasis>) -> Self {
        let k = basis.class();
        let b = bernoulli(k);
        let left: Vec<Rational> = b
            .iter()
            .enumerate()
            .map(|(j, bj)| bj / &Rational::from_bigint(factorial(j)))
            .collect();
        let mut right = left.clone();
        if right.len() > 1 {
            right[1] = -right[1].clone();
        }
        KoszulResolution { basis, right, left, kernels: Mutex::default() }
    }

    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn mono_weight(&self, m: &[u16]) -> usize {
        m.iter().map(|&i| self.basis.degree(i as usize)).sum()
    }

    pub fn weight(&self, m: &[u16], w: &[u16]) -> usize {
        self.mono_weight(m) + self.mono_weight(w)
    }

    /// Largest total degree of a nonzero `n`-fold wedge of basis words.
    pub fn max_wedge_weight(&self, n: usize) -> usize {
        let mut d: Vec<usize> = (0..self.basis.dim()).map(|i| self.basis.degree(i)).collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        d.iter().take(n).sum()
    }

    /// Terms of `e(m) * e_h` (or `e_h * e(m)`) in symmetric coordinates
    /// with nesting depth at least one, i.e. all but `m e_h`. Memoized.
    fn kernel(&self, m: &[u16], h: u16, left: bool) -> Arc<Vec<(Mono, Rational)>> {
        let key = (Mono::from_slice(m), h, left);
        if let Some(r) = self.kernels.lock().expect("kernel memo").get(&key) {
            return r.clone();
        }
        let coeffs = if left { &self.left } else { &self.right };
        let mut raw = Vec::new();
        if !m.is_empty() {
            let mut counts = distinct_counts(m);
            let start = SparseVec::unit(h as usize);
            self.nest(&mut counts, &start, self.basis.degree(h as usize), 1, 1, coeffs, &mut raw);
        }
        let mut merged: FxHashMap<Mono, Rational> = FxHashMap::default();
        for (mm, q) in raw {
            *merged.entry(mm).or_default() += &q;
        }
        let out: Arc<Vec<(Mono, Rational)>> =
            Arc::new(merged.into_iter().filter(|(_, q)| !q.is_zero()).collect());
        self.kernels.lock().expect("kernel memo").insert(key, out.clone());
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn nest(
        &self,
        counts: &mut SmallVec<[(u16, u32); 6]>,
        cur: &SparseVec,
        deg: usize,
        j: usize,
        mult: i64,
        coeffs: &[Rational],
        out: &mut Vec<(Mono, Rational)>,
    ) {
        let k = self.basis.class();
        if j >= coeffs.len() {
            return;
        }
        for idx in 0..counts.len() {
            let (v, c) = counts[idx];
            if c == 0 {
                continue;
            }
            let dv = self.basis.degree(v as usize);
            if deg + dv > k {
                continue;
            }
            let mut val = SparseVec::new();
            for (t, q) in cur.iter() {
                val.add_scaled(self.basis.bracket_basis(v as usize, t), q);
            }
            if val.is_empty() {
                continue;
            }
            counts[idx].1 -= 1;
            let m = mult * c as i64;
            if !coeffs[j].is_zero() {
                let rest = from_counts(counts);
                let cm = &coeffs[j] * &Rational::from_int(m);
                for (t, q) in val.iter() {
                    out.push((mono_insert(&rest, t as u16), &cm * q));
                }
            }
            self.nest(counts, &val, deg + dv, j + 1, m, coeffs, out);
            counts[idx].1 += 1;
        }
    }

    /// `c * a`, acting on the `S(m)` factor.
    pub fn right_mul(&self, c: &SymChain, a: &LieElement) -> SymChain {
        self.mul(c, a, false)
    }

    /// `a * c`, acting on the `S(m)` factor.
    pub fn left_mul(&self, a: &LieElement, c: &SymChain) -> SymChain {
        self.mul(c, a, true)
    }

    fn mul(&self, c: &SymChain, a: &LieElement, left: bool) -> SymChain {
        let mut out = SymChain::new();
        for (m, w, q) in c.iter() {
            for (t, at) in a.iter() {
                let qa = q * at;
                out.add_term(mono_insert(m, t as u16), w.clone(), &qa);
                for (nm, r) in self.kernel(m, t as u16, left).iter() {
                    out.add_term(nm.clone(), w.clone(), &(&qa * r));
                }
            }
        }
        out
    }

    fn differential(&self, c: &SymChain, abelian_part: bool) -> SymChain {
        let mut out = SymChain::new();
        for (m, w, q) in c.iter() {
            for i in 0..w.len() {
                let mut rest = w.clone();
                rest.remove(i);
                let qs = q * &sign(i);
                if abelian_part {
                    out.add_term(mono_insert(m, w[i]), rest.clone(), &qs);
                }
                for (nm, r) in self.kernel(m, w[i], false).iter() {
                    out.add_term(nm.clone(), rest.clone(), &(&qs * r));
                }
            }
            // Koszul bracket terms `sum_{i<j} (-1)^(i+j) [w_i, w_j] ^ rest`.
            for i in 0..w.len() {
                for j in (i + 1)..w.len() {
                    let br = self.basis.bracket_basis(w[i] as usize, w[j] as usize);
                    if br.is_empty() {
                        continue;
                    }
                    let rest: Wedge = w
                        .iter()
                        .enumerate()
                        .filter(|(t, _)| *t != i && *t != j)
                        .map(|(_, &x)| x)
                        .collect();
                    let qs = q * &sign(i + j);
                    for (t, cb) in br.iter() {
                        if let Some((nw, sg)) = insert_front(t as u16, &rest) {
                            out.add_term(m.clone(), nw, &(&(&qs * cb) * &Rational::from_int(sg)));
                        }
                    }
                }
            }
        }
        out
    }

    /// Differential of the Koszul resolution.
    pub fn boundary(&self, c: &SymChain) -> SymChain {
        self.differential(c, true)
    }

    /// Differential of the abelian Koszul complex on `S(m) (x) L(m)`.
    pub fn abelian_boundary(&self, c: &SymChain) -> SymChain {
        let mut out = SymChain::new();
        for (m, w, q) in c.iter() {
            for i in 0..w.len() {
                let mut rest = w.clone();
                rest.remove(i);
                out.add_term(mono_insert(m, w[i]), rest, &(q * &sign(i)));
            }
        }
        out
    }

    /// `boundary - abelian_boundary`.
    pub fn perturbation(&self, c: &SymChain) -> SymChain {
        self.differential(c, false)
    }

    /// Euler-weighted Koszul homotopy:
    /// `s0(g1...gp (x) w) = 1/(p+q) sum_i g1..^gi..gp (x) gi ^ w`, zero for `p = 0`.
    pub fn abelian_homotopy(&self, c: &SymChain) -> SymChain {
        let mut out = SymChain::new();
        for (m, w, q) in c.iter() {
            let p = m.len();
            if p == 0 {
                continue;
            }
            let qq = q / &Rational::from_int((p + w.len()) as i64);
            let counts = distinct_counts(m);
            for (idx, &(v, mult)) in counts.iter().enumerate() {
                let Some((nw, s)) = insert_front(v, w) else {
                    continue;
                };
                let mut rest = counts.clone();
                rest[idx].1 -= 1;
                out.add_term(
                    from_counts(&rest),
                    nw,
                    &(&qq * &Rational::from_int(s * mult as i64)),
                );
            }
        }
        out
    }

    /// Contracting homotopy `s = s0 sum_m (-delta s0)^m`. The series is
    /// finite: `delta s0` strictly lowers monomial length. Terms are
    /// processed in buckets of decreasing monomial length, so contributions
    /// from different orders of the series merge before being expanded.
    pub fn homotopy(&self, c: &SymChain) -> SymChain {
        let mut out = SymChain::new();
        self.homotopy_into(c, |m, w, q| out.add_term(m.clone(), w.clone(), q));
        out
    }

    /// `epsilon (x) id` applied to `homotopy(c)` without storing the rest.
    pub fn homotopy_counit(&self, c: &SymChain) -> WedgeChain {
        let mut out = WedgeChain::new();
        self.homotopy_into(c, |m, w, q| {
            if m.is_empty() {
                out.add_term(w.clone(), q);
            }
        });
        out
    }

    fn homotopy_into(&self, c: &SymChain, mut emit: impl FnMut(&Mono, &Wedge, &Rational)) {
        let top = c.iter().map(|(m, _, _)| m.len()).max().unwrap_or(0);
        let mut buckets: Vec<SymChain> = vec![SymChain::new(); top + 1];
        for (m, w, q) in c.iter() {
            buckets[m.len()].add_term(m.clone(), w.clone(), q);
        }
        let minus = Rational::from_int(-1);
        for len in (1..=top).rev() {
            let b = std::mem::take(&mut buckets[len]);
            if b.is_zero() {
                continue;
            }
            let u = self.abelian_homotopy(&b);
            drop(b);
            for (m, w, q) in u.iter() {
                emit(m, w, q);
            }
            for (m, w, q) in self.perturbation(&u).iter() {
                buckets[m.len()].add_term(m.clone(), w.clone(), &(q * &minus));
            }
        }
    }

    /// `exp(a) * c`, discarding terms of weight above `budget`.
    pub fn exp_left(&self, a: &LieElement, c: &SymChain, budget: usize) -> SymChain {
        let mut out = c.filtered(|m, w| self.weight(m, w) <= budget);
        let mut term = out.clone();
        let mut n = 1i64;
        loop {
            term = self
                .left_mul(a, &term)
                .filtered(|m, w| self.weight(m, w) <= budget)
                .scaled(&Rational::new(1, n));
            if term.is_zero() {
                break;
            }
            out.add_assign(&term);
            n += 1;
        }
        out
    }

    /// Push a chain on `source` forward along a Lie map into this algebra,
    /// given the images of every source basis word.
    pub fn pushforward(&self, source: &HallBasis, images: &[LieElement], c: &SymChain, budget: usize) -> SymChain {
        let mut out = SymChain::new();
        self.pushforward_into(source, images, c, budget, &Rational::one(), 0, &mut out);
        out
    }

    /// Bitmask of the generators occurring in basis word `t`.
    fn support(&self, t: usize) -> u64 {
        self.basis
            .multidegree(t)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .fold(0, |acc, (g, _)| acc | (1 << g))
    }

    /// `out += scale * pushforward(c)`, keeping only terms whose generator
    /// support contains `required`.
    #[allow(clippy::too_many_arguments)]
    fn pushforward_into(
        &self,
        source: &HallBasis,
        images: &[LieElement],
        c: &SymChain,
        budget: usize,
        scale: &Rational,
        required: u64,
        out: &mut SymChain,
    ) {
        let deg = |t: usize| self.basis.degree(t);
        let support: Vec<u64> = (0..self.basis.dim()).map(|t| self.support(t)).collect();
        for (m, w, q) in c.iter() {
            // Every image factor has weight at least its source degree.
            let floor = |f: &[u16]| -> usize { f.iter().map(|&i| source.degree(i as usize)).sum() };
            let wfloor = floor(w);
            let mut monos: FxHashMap<Mono, (usize, u64, Rational)> = FxHashMap::default();
            monos.insert(Mono::new(), (0, 0, Rational::one()));
            for (pos, &f) in m.iter().enumerate() {
                let rest_floor = floor(&m[pos + 1..]) + wfloor;
                let mut next: FxHashMap<Mono, (usize, u64, Rational)> = FxHashMap::default();
                for (mm, (wt, sp, r)) in &monos {
                    for (t, a) in images[f as usize].iter() {
                        let nw = wt + deg(t);
                        if nw + rest_floor > budget {
                            continue;
                        }
                        let e = next
                            .entry(mono_insert(mm, t as u16))
                            .or_insert((nw, sp | support[t], Rational::zero()));
                        e.2 += &(r * a);
                    }
                }
                next.retain(|_, (_, _, r)| !r.is_zero());
                monos = next;
            }
            if monos.is_empty() {
                continue;
            }
            let mono_min = monos.values().map(|(wt, _, _)| *wt).min().unwrap_or(0);
            let mut wedges: FxHashMap<Wedge, (usize, u64, Rational)> = FxHashMap::default();
            wedges.insert(Wedge::new(), (0, 0, Rational::one()));
            for (pos, &f) in w.iter().enumerate() {
                let rest_floor = floor(&w[pos + 1..]) + mono_min;
                let mut next: FxHashMap<Wedge, (usize, u64, Rational)> = FxHashMap::default();
                for (ww, (wt, sp, r)) in &wedges {
                    for (t, a) in images[f as usize].iter() {
                        let nw = wt + deg(t);
                        if nw + rest_floor > budget {
                            continue;
                        }
                        let mut nwd = ww.clone();
                        nwd.push(t as u16);
                        let Some(s) = sort_with_sign(&mut nwd) else {
                            continue;
                        };
                        let e = next.entry(nwd).or_insert((nw, sp | support[t], Rational::zero()));
                        e.2 += &(&(r * a) * &Rational::from_int(s));
                    }
                }
                next.retain(|_, (_, _, r)| !r.is_zero());
                wedges = next;
            }
            let qs = q * scale;
            for (mm, (mw, msp, r)) in &monos {
                let qr = &qs * r;
                for (ww, (ww_wt, wsp, s)) in &wedges {
                    if mw + ww_wt <= budget && (msp | wsp) & required == required {
                        out.add_term(mm.clone(), ww.clone(), &(&qr * s));
                    }
                }
            }
        }
    }
}

struct Universal {
    basis: Arc<HallBasis>,
    resolution: KoszulResolution,
}

type Slot<T> = Arc<OnceLock<T>>;

fn slot<K: std::hash::Hash + Eq + Clone, T>(map: &Mutex<HashMap<K, Slot<T>>>, key: &K) -> Slot<T> {
    map.lock().expect("cache lock").entry(key.clone()).or_default().clone()
}

fn universal(rank: usize, class: usize) -> Arc<Universal> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Slot<Arc<Universal>>>>> = OnceLock::new();
    let s = slot(CACHE.get_or_init(Default::default), &(rank, class));
    s.get_or_init(|| {
        let basis = HallBasis::new(rank, class);
        let resolution = KoszulResolution::new(basis.clone());
        Arc::new(Universal { basis, resolution })
    })
    .clone()
}

/// Hall basis of the rank-`n` free nilpotent Lie algebra on which the
/// universal chains live.
pub fn universal_basis(n: usize, class: usize) -> Arc<HallBasis> {
    universal(n, class).basis.clone()
}

/// Universal `f_n(x1 | ... | xn)` in `U (x) L^n` of the rank-`n` free
/// nilpotent Lie algebra, correct in all weights up to `budget`.
pub fn universal_chain(n: usize, class: usize, budget: usize) -> Arc<SymChain> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), Slot<Arc<SymChain>>>>> = OnceLock::new();
    let s = slot(CACHE.get_or_init(Default::default), &(n, class, budget));
    s.get_or_init(|| Arc::new(compute_universal_chain(n, class, budget))).clone()
}

fn compute_universal_chain(n: usize, class: usize, budget: usize) -> SymChain {
    if n == 0 {
        return SymChain::unit();
    }
    universal(n, class).resolution.homotopy(&universal_input(n, class, budget, true))
}

/// The chain `f_{n-1}(d(x1 | ... | xn))` to which the homotopy is applied.
///
/// `f_n` vanishes on tuples with an identity entry, so only terms involving
/// every generator survive in the sum; with `prune` the others are dropped
/// from each summand before they are added up.
fn universal_input(n: usize, class: usize, budget: usize, prune: bool) -> SymChain {
    let u = universal(n, class);
    let res = &u.resolution;
    let b = &u.basis;
    let x: Vec<LieElement> = (0..n).map(|i| b.generator(i)).collect();
    if n == 1 {
        return res.exp_left(&x[0], &SymChain::unit(), budget).sub(&SymChain::unit());
    }
    let required: u64 = if prune { (1 << n) - 1 } else { 0 };
    let prev = universal_chain(n - 1, class, budget);
    let src = universal(n - 1, class);
    let group = NilpotentGroup::new(b.clone());
    let mut y = SymChain::new();
    let push = |gens: Vec<LieElement>, scale: Rational, required: u64, out: &mut SymChain| {
        let map = InducedLieMap::new(src.basis.clone(), b.clone(), &gens).expect("generator images");
        res.pushforward_into(&src.basis, map.basis_images(), &prev, budget, &scale, required, out);
    };
    let mut shifted = SymChain::new();
    push(x[1..].to_vec(), Rational::one(), required & !1, &mut shifted);
    let moved = res.exp_left(&x[0], &shifted, budget);
    if prune {
        // The shifted chain never involves the first generator.
        y.add_assign(&moved.sub(&shifted));
    } else {
        y.add_assign(&moved);
    }
    drop(moved);
    for i in 0..n - 1 {
        let mut gens: Vec<LieElement> = Vec::with_capacity(n - 1);
        gens.extend_from_slice(&x[..i]);
        gens.push(group.bch(&x[i], &x[i + 1]));
        gens.extend_from_slice(&x[i + 2..]);
        push(gens, sign(i + 1), required, &mut y);
    }
    push(x[..n - 1].to_vec(), sign(n), required, &mut y);
    y
}

/// Universal `SW_n(x1 | ... | xn)` in `L^n` of the rank-`n` free nilpotent
/// Lie algebra of the given class.
pub fn universal_sw(n: usize, class: usize) -> Arc<WedgeChain> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Slot<Arc<WedgeChain>>>>> = OnceLock::new();
    let s = slot(CACHE.get_or_init(Default::default), &(n, class));
    s.get_or_init(|| {
        if n == 0 {
            return Arc::new(WedgeChain::unit());
        }
        let u = universal(n, class);
        let budget = u.resolution.max_wedge_weight(n);
        Arc::new(u.resolution.homotopy_counit(&universal_input(n, class, budget, true)))
    })
    .clone()
}

/// `SW_n(g1 | ... | gn)` by substituting the logs into the universal value.
pub fn sw(group: &NilpotentGroup, tuple: &[GroupElement]) -> WedgeChain {
    let n = tuple.len();
    if n == 0 {
        return WedgeChain::unit();
    }
    let k = group.class();
    let univ = universal_sw(n, k);
    let logs: Vec<LieElement> = tuple.iter().map(|g| g.log.clone()).collect();
    let map = InducedLieMap::new(universal_basis(n, k), group.basis().clone(), &logs).expect("tuple in group");
    crate::wedge::map_wedges(&univ, map.basis_images())
}

/// Linear extension of `sw` to bar chains.
pub fn sw_chain(group: &NilpotentGroup, c: &BarChain<GroupElement>) -> WedgeChain {
    let mut out = WedgeChain::new();
    for (t, q) in c.iter() {
        out.add_scaled(&sw(group, t), q);
    }
    out
}

/// `SW_n` computed directly in the ambient algebra, memoizing `f_m` on the
/// group-element tuples met during the recursion.
pub struct DirectSw {
    group: Arc<NilpotentGroup>,
    resolution: KoszulResolution,
    memo: BTreeMap<(usize, Vec<GroupElement>), SymChain>,
}

impl DirectSw {
    pub fn new(group: Arc<NilpotentGroup>) -> Self {
        let resolution = KoszulResolution::new(group.basis().clone());
        DirectSw { group, resolution, memo: BTreeMap::new() }
    }

    pub fn resolution(&self) -> &KoszulResolution {
        &self.resolution
    }

    /// `f_n(tuple)` correct in weights up to `budget`.
    pub fn chain(&mut self, tuple: &[GroupElement], budget: usize) -> SymChain {
        let key = (budget, tuple.to_vec());
        if let Some(c) = self.memo.get(&key) {
            return c.clone();
        }
        let n = tuple.len();
        let out = if n == 0 {
            SymChain::unit()
        } else {
            let first = self.chain(&tuple[1..], budget);
            let mut y = self.resolution.exp_left(&tuple[0].log, &first, budget);
            for i in 0..n - 1 {
                let mut t: Vec<GroupElement> = Vec::with_capacity(n - 1);
                t.extend_from_slice(&tuple[..i]);
                t.push(self.group.mul(&tuple[i], &tuple[i + 1]));
                t.extend_from_slice(&tuple[i + 2..]);
                let c = self.chain(&t, budget);
                y.add_scaled(&c, &sign(i + 1));
            }
            let last = self.chain(&tuple[..n - 1], budget);
            y.add_scaled(&last, &sign(n));
            self.resolution.homotopy(&y)
        };
        self.memo.insert(key, out.clone());
        out
    }

    pub fn sw(&mut self, tuple: &[GroupElement]) -> WedgeChain {
        let budget = self.resolution.max_wedge_weight(tuple.len());
        self.chain(tuple, budget).counit()
    }
}

/// Universal enveloping algebra of a free nilpotent Lie algebra in PBW
/// coordinates, with straightening and the symmetrization isomorphism.
#[derive(Debug)]
pub struct Enveloping {
    basis: Arc<HallBasis>,
    straight: Mutex<HashMap<Vec<u16>, Arc<BTreeMap<Mono, Rational>>>>,
    desym: Mutex<HashMap<Mono, Arc<BTreeMap<Mono, Rational>>>>,
}

fn add_into(map: &mut BTreeMap<Mono, Rational>, m: Mono, q: &Rational) {
    if q.is_zero() {
        return;
    }
    let e = map.entry(m.clone()).or_default();
    *e += q;
    if e.is_zero() {
        map.remove(&m);
    }
}

impl Enveloping {
    pub fn new(basis: Arc<HallBasis>) -> Self {
        Enveloping { basis, straight: Mutex::default(), desym: Mutex::default() }
    }

    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    /// PBW normal form of a product of basis words, by rewriting
    /// `b a -> a b + [b, a]` at the first descent.
    pub fn straighten(&self, word: &[u16]) -> Arc<BTreeMap<Mono, Rational>> {
        if let Some(r) = self.straight.lock().expect("memo").get(word) {
            return r.clone();
        }
        let mut out = BTreeMap::new();
        match word.windows(2).position(|p| p[0] > p[1]) {
            None => {
                out.insert(Mono::from_slice(word), Rational::one());
            }
            Some(i) => {
                let mut swapped = word.to_vec();
                swapped.swap(i, i + 1);
                for (m, q) in self.straighten(&swapped).iter() {
                    add_into(&mut out, m.clone(), q);
                }
                let br = self.basis.bracket_basis(word[i] as usize, word[i + 1] as usize);
                for (t, c) in br.iter() {
                    let mut shorter = Vec::with_capacity(word.len() - 1);
                    shorter.extend_from_slice(&word[..i]);
                    shorter.push(t as u16);
                    shorter.extend_from_slice(&word[i + 2..]);
                    for (m, q) in self.straighten(&shorter).iter() {
                        add_into(&mut out, m.clone(), &(q * c));
                    }
                }
            }
        }
        let out = Arc::new(out);
        self.straight.lock().expect("memo").insert(word.to_vec(), out.clone());
        out
    }

    /// Product of two PBW monomials.
    pub fn multiply(&self, a: &[u16], b: &[u16]) -> Arc<BTreeMap<Mono, Rational>> {
        let mut w = a.to_vec();
        w.extend_from_slice(b);
        self.straighten(&w)
    }

    /// Symmetrization `e(g1...gp) = (1/p!) sum_s g_s(1) ... g_s(p)` in PBW form.
    pub fn symmetrize(&self, m: &[u16]) -> BTreeMap<Mono, Rational> {
        let mut arrangements: Vec<Vec<u16>> = Vec::new();
        let mut counts = distinct_counts(m);
        let mut cur = Vec::with_capacity(m.len());
        fn rec(counts: &mut SmallVec<[(u16, u32); 6]>, cur: &mut Vec<u16>, n: usize, out: &mut Vec<Vec<u16>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            for i in 0..counts.len() {
                if counts[i].1 == 0 {
                    continue;
                }
                counts[i].1 -= 1;
                cur.push(counts[i].0);
                rec(counts, cur, n, out);
                cur.pop();
                counts[i].1 += 1;
            }
        }
        rec(&mut counts, &mut cur, m.len(), &mut arrangements);
        let w = Rational::new(1, arrangements.len() as i64);
        let mut out = BTreeMap::new();
        for a in &arrangements {
            for (mm, q) in self.straighten(a).iter() {
                add_into(&mut out, mm.clone(), &(q * &w));
            }
        }
        out
    }

    /// Inverse of `symmetrize`, by induction on length: the symmetrization of
    /// a monomial is the same PBW monomial plus strictly shorter terms.
    pub fn desymmetrize(&self, m: &[u16]) -> Arc<BTreeMap<Mono, Rational>> {
        if let Some(r) = self.desym.lock().expect("memo").get(m) {
            return r.clone();
        }
        let mut out = BTreeMap::new();
        out.insert(Mono::from_slice(m), Rational::one());
        for (mm, q) in self.symmetrize(m) {
            if mm.as_slice() == m {
                continue;
            }
            for (s, r) in self.desymmetrize(&mm).iter() {
                add_into(&mut out, s.clone(), &-(&q * r));
            }
        }
        let out = Arc::new(out);
        self.desym.lock().expect("memo").insert(Mono::from_slice(m), out.clone());
        out
    }

    pub fn from_sym(&self, c: &SymChain) -> UWedgeChain {
        let mut out = UWedgeChain::new();
        for (m, w, q) in c.iter() {
            for (mm, r) in self.symmetrize(m) {
                out.add_term(mm, w.clone(), &(q * &r));
            }
        }
        out
    }

    pub fn to_sym(&self, c: &UWedgeChain) -> SymChain {
        let mut out = SymChain::new();
        for ((m, w), q) in c.iter() {
            for (s, r) in self.desymmetrize(m).iter() {
                out.add_term(s.clone(), w.clone(), &(q * r));
            }
        }
        out
    }

    /// Koszul resolution differential computed with genuine PBW products.
    pub fn boundary(&self, c: &UWedgeChain) -> UWedgeChain {
        let mut out = UWedgeChain::new();
        let mut kb = WedgeChain::new();
        for ((m, w), q) in c.iter() {
            for i in 0..w.len() {
                let mut rest = w.clone();
                rest.remove(i);
                let qs = q * &sign(i);
                for (mm, r) in self.multiply(m, &[w[i]]).iter() {
                    out.add_term(mm.clone(), rest.clone(), &(&qs * r));
                }
            }
            if w.len() >= 2 {
                kb.terms.clear();
                koszul_boundary_term(&self.basis, w, q, &mut kb);
                for (nw, r) in kb.iter() {
                    out.add_term(m.clone(), nw.clone(), r);
                }
            }
        }
        out
    }

    /// The contracting homotopy transported to PBW coordinates.
    pub fn contracting_homotopy(&self, res: &KoszulResolution, c: &UWedgeChain) -> UWedgeChain {
        self.from_sym(&res.homotopy(&self.to_sym(c)))
    }
}

/// Element of `U(m) (x) L(m)` in PBW coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UWedgeChain {
    terms: BTreeMap<(Mono, Wedge), Rational>,
}

impl UWedgeChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, m: Mono, w: Wedge, q: &Rational) {
        if q.is_zero() {
            return;
        }
        let key = (m, w);
        let e = self.terms.entry(key.clone()).or_default();
        *e += q;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_scaled(&mut self, o: &UWedgeChain, q: &Rational) {
        for (k, p) in &o.terms {
            self.add_term(k.0.clone(), k.1.clone(), &(p * q));
        }
    }

    pub fn sub(&self, o: &UWedgeChain) -> UWedgeChain {
        let mut r = self.clone();
        r.add_scaled(o, &Rational::from_int(-1));
        r
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Mono, Wedge), &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest monomial length.
    pub fn max_length(&self) -> usize {
        self.terms.keys().map(|(m, _)| m.len()).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &[u16], w: &[u16]) -> Rational {
        self.terms
            .get(&(Mono::from_slice(m), Wedge::from_slice(w)))
            .cloned()
            .unwrap_or_default()
    }

    pub fn counit(&self) -> WedgeChain {
        WedgeChain::from_terms(
            self.terms
                .iter()
                .filter(|((m, _), _)| m.is_empty())
                .map(|((_, w), q)| (w.clone(), q.clone())),
        )
    }
}

/// `1/n!` as a rational, for the abelian closed form.
pub fn inverse_factorial(n: usize) -> Rational {
    let f = factorial(n);
    match f.to_i64() {
        Some(v) => Rational::new(1, v),
        None => Rational::from_bigint(f).recip(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wedge::wedge_of;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn homotopy_contract_rank2() {
        for k in 1..=3 {
            let b = HallBasis::new(2, k);
            let res = KoszulResolution::new(b.clone());
            let dim = b.dim() as u16;
            let mut seed = 7u64;
            let mut next = || {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (seed >> 33) as u16
            };
            for _ in 0..20 {
                let len = 1 + (next() % 3) as usize;
                let mut m: Mono = (0..len).map(|_| next() % dim).collect();
                m.sort_unstable();
                let p = (next() % 3) as usize;
                let mut w: Wedge = (0..p).map(|_| next() % dim).collect();
                if sort_with_sign(&mut w).is_none() {
                    continue;
                }
                let c = SymChain::single(m, w, Rational::one());
                let lhs = res.boundary(&res.homotopy(&c));
                let lhs = {
                    let mut l = lhs;
                    l.add_assign(&res.homotopy(&res.boundary(&c)));
                    l
                };
                assert_eq!(lhs, c, "class {k}");
            }
        }
    }

    #[test]
    fn boundary_squares_to_zero() {
        let b = HallBasis::new(2, 3);
        let res = KoszulResolution::new(b.clone());
        let c = SymChain::single(Mono::from_slice(&[0, 1, 1]), Wedge::from_slice(&[0, 2, 3]), Rational::one());
        assert!(res.boundary(&res.boundary(&c)).is_zero());
    }

    #[test]
    fn symmetric_coordinates_agree_with_pbw() {
        let b = HallBasis::new(2, 3);
        let res = KoszulResolution::new(b.clone());
        let env = Enveloping::new(b.clone());
        for m in [vec![0u16], vec![0, 1], vec![1, 1, 0], vec![0, 0, 1, 2]] {
            let mut m: Mono = Mono::from_vec(m);
            m.sort_unstable();
            let c = SymChain::single(m, Wedge::from_slice(&[1, 2]), Rational::one());
            let direct = env.from_sym(&res.boundary(&c));
            let via_pbw = env.boundary(&env.from_sym(&c));
            assert_eq!(direct, via_pbw);
        }
    }

    #[test]
    fn straighten_single_swap() {
        let b = HallBasis::new(2, 2);
        let env = Enveloping::new(b.clone());
        let r = env.straighten(&[1, 0]);
        assert_eq!(r.get(&Mono::from_slice(&[0, 1])), Some(&Rational::one()));
        assert_eq!(r.get(&Mono::from_slice(&[2])), Some(&Rational::from_int(-1)));
        let s = env.symmetrize(&[0, 1]);
        assert_eq!(s.get(&Mono::from_slice(&[2])), Some(&q(-1, 2)));
    }

    #[test]
    fn desymmetrize_inverts() {
        let b = HallBasis::new(2, 3);
        let env = Enveloping::new(b.clone());
        for m in [vec![1u16, 0], vec![0, 1, 1], vec![0, 1, 2], vec![1, 1, 1]] {
            let mut m = m;
            m.sort_unstable();
            let mut back: BTreeMap<Mono, Rational> = BTreeMap::new();
            for (s, r) in env.desymmetrize(&m).iter() {
                for (mm, t) in env.symmetrize(s) {
                    add_into(&mut back, mm, &(r * &t));
                }
            }
            let mut expected = BTreeMap::new();
            expected.insert(Mono::from_slice(&m), Rational::one());
            assert_eq!(back, expected);
        }
    }

    #[test]
    fn degree_one_is_log() {
        let g = NilpotentGroup::new(HallBasis::new(2, 3));
        let b = g.basis();
        let a = b.parse_element("x + 2 * y - 1/3 * [x,y] + [x,[x,y]]").unwrap();
        let out = sw(&g, &[g.from_log(a.clone())]);
        assert_eq!(out, wedge_of(&[&a]));
    }

    #[test]
    fn degree_two_class_two() {
        let g = NilpotentGroup::new(HallBasis::new(2, 2));
        let b = g.basis();
        let x = b.generator(0);
        let y = b.generator(1);
        let out = sw(&g, &[g.from_log(x.clone()), g.from_log(y.clone())]);
        let xy = b.bracket(&x, &y);
        let mut expected = wedge_of(&[&x, &y]).scaled(&q(1, 2));
        expected.add_scaled(&wedge_of(&[&x.sub(&y), &xy]), &q(1, 12));
        assert_eq!(out, expected);
    }

    #[test]
    fn abelian_closed_form() {
        let g = NilpotentGroup::new(HallBasis::new(3, 1));
        let b = g.basis();
        let logs: Vec<LieElement> = vec![
            b.parse_element("x + 2 * y").unwrap(),
            b.parse_element("y - z").unwrap(),
            b.parse_element("3 * x + z").unwrap(),
        ];
        let tuple: Vec<GroupElement> = logs.iter().map(|l| g.from_log(l.clone())).collect();
        let refs: Vec<&LieElement> = logs.iter().collect();
        assert_eq!(sw(&g, &tuple), wedge_of(&refs).scaled(&inverse_factorial(3)));
    }

    #[test]
    fn direct_matches_universal() {
        let g = NilpotentGroup::new(HallBasis::new(2, 3));
        let b = g.basis();
        let t = vec![
            g.from_log(b.parse_element("x + [x,y]").unwrap()),
            g.from_log(b.parse_element("y - x").unwrap()),
        ];
        let mut d = DirectSw::new(g.clone());
        assert_eq!(d.sw(&t), sw(&g, &t));
    }

    #[test]
    fn pruning_does_not_change_the_chain() {
        let res = &universal(3, 2).resolution;
        let budget = res.max_wedge_weight(3);
        let a = res.homotopy(&universal_input(3, 2, budget, true));
        let b = res.homotopy(&universal_input(3, 2, budget, false));
        assert_eq!(a, b);
    }

    #[test]
    fn chain_map_degree_three() {
        use crate::chains::{bar_boundary, koszul_boundary};
        let g = NilpotentGroup::new(HallBasis::new(2, 3));
        let b = g.basis();
        let t: Vec<GroupElement> = ["x + [x,y]", "y - 2 * x", "x + y + [y,[x,y]]"]
            .iter()
            .map(|e| g.from_log(b.parse_element(e).unwrap()))
            .collect();
        let c = BarChain::single(t.clone(), Rational::one());
        let lhs = koszul_boundary(b, &sw(&g, &t));
        let rhs = sw_chain(&g, &bar_boundary(&*g, &c));
        assert_eq!(lhs, rhs);
    }
}
