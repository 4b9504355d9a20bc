//! The Morita and Johnson extensions on move sequences: the bar-level sum
//! of T-chains, its Koszul image modulo boundaries, the extended
//! differential, both routes for the Johnson extension and the classical
//! Johnson value of an automorphism.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::automorphism::{act_bar, act_wedges, induced_automorphism, is_identity, surface_group, truncate};
use crate::chains::{bar_boundary, drop_gamma_wedge, image_of_boundary, koszul_boundary, BarChain};
use crate::fatgraph::{FatgraphError, MoveSequence, WhiteheadMove};
use crate::hall::{class_index, HallBasis};
use crate::nilpotent::{FreeWord, GroupElement, InducedLieMap, NilpotentGroup};
use crate::rational::Rational;
use crate::sw::sw_chain;
use crate::wedge::{wedge_of, WedgeChain};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HomError {
    #[error(transparent)]
    Fatgraph(#[from] FatgraphError),
    #[error("automorphism is not trivial modulo Gamma_{0}")]
    NotInFiltration(usize),
    #[error("class must be at least 1")]
    BadClass,
}

/// The surface basis of nilpotency class `k`, in which `pi / Gamma_{k+1}`
/// is coordinatized.
pub fn basis_at(genus: usize, k: usize) -> Arc<HallBasis> {
    HallBasis::surface(genus, k)
}

/// `sum_i T_{W_i}` over the free group.
pub fn morita_free(moves: &[WhiteheadMove]) -> BarChain<FreeWord> {
    let mut out = BarChain::new();
    for mv in moves {
        out.add_assign(&mv.t_chain());
    }
    out
}

/// Entries of a free-level chain reduced into a nilpotent quotient.
pub fn reduce_words(group: &NilpotentGroup, c: &BarChain<FreeWord>) -> BarChain<GroupElement> {
    c.map_entries(|w| group.log_of_word(w))
}

/// `M~_k(S)`: the T-chain sum with entries in `pi / Gamma_{k+1}`.
pub fn morita_chain(seq: &MoveSequence, k: usize) -> Result<BarChain<GroupElement>, HomError> {
    check_class(k)?;
    let moves = seq.evaluate()?;
    let group = surface_group(seq.start.genus, k);
    Ok(reduce_words(&group, &morita_free(&moves)))
}

fn same_basis(a: &HallBasis, b: &HallBasis) -> bool {
    a.names() == b.names() && a.class() == b.class()
}

fn check_class(k: usize) -> Result<(), HomError> {
    if k == 0 {
        Err(HomError::BadClass)
    } else {
        Ok(())
    }
}

/// A Koszul 3-chain in canonical form modulo `Im d_4`.
#[derive(Clone, Debug)]
pub struct ReducedKoszul3 {
    pub k: usize,
    pub basis: Arc<HallBasis>,
    pub chain: WedgeChain,
}

impl ReducedKoszul3 {
    pub fn new(basis: Arc<HallBasis>, raw: &WedgeChain) -> Self {
        let chain = image_of_boundary(&basis, 3).reduce(&basis, raw);
        ReducedKoszul3 { k: basis.class(), basis, chain }
    }

    pub fn is_zero(&self) -> bool {
        self.chain.is_zero()
    }

    pub fn add(&self, o: &ReducedKoszul3) -> ReducedKoszul3 {
        let mut c = self.chain.clone();
        c.add_assign(&o.chain);
        ReducedKoszul3::new(self.basis.clone(), &c)
    }

    pub fn sub(&self, o: &ReducedKoszul3) -> ReducedKoszul3 {
        ReducedKoszul3::new(self.basis.clone(), &self.chain.sub(&o.chain))
    }

    pub fn neg(&self) -> ReducedKoszul3 {
        ReducedKoszul3::new(self.basis.clone(), &self.chain.scaled(&Rational::from_int(-1)))
    }
}

impl PartialEq for ReducedKoszul3 {
    fn eq(&self, o: &Self) -> bool {
        self.k == o.k && same_basis(&self.basis, &o.basis) && self.chain == o.chain
    }
}

impl Eq for ReducedKoszul3 {}

impl fmt::Display for ReducedKoszul3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.chain.format(&self.basis))
    }
}

/// A Koszul 2-chain at class `k+1` with the `Gamma_2 ^ Gamma_{k+1}`
/// coordinates dropped.
#[derive(Clone, Debug)]
pub struct ReducedKoszul2 {
    pub k: usize,
    pub basis: Arc<HallBasis>,
    pub chain: WedgeChain,
}

impl ReducedKoszul2 {
    /// `basis` has class `k + 1`.
    pub fn new(k: usize, basis: Arc<HallBasis>, raw: &WedgeChain) -> Self {
        debug_assert_eq!(basis.class(), k + 1);
        let chain = drop_gamma_wedge(&basis, k, raw);
        ReducedKoszul2 { k, basis, chain }
    }

    pub fn is_zero(&self) -> bool {
        self.chain.is_zero()
    }

    pub fn add(&self, o: &ReducedKoszul2) -> ReducedKoszul2 {
        let mut c = self.chain.clone();
        c.add_assign(&o.chain);
        ReducedKoszul2::new(self.k, self.basis.clone(), &c)
    }

    pub fn sub(&self, o: &ReducedKoszul2) -> ReducedKoszul2 {
        ReducedKoszul2::new(self.k, self.basis.clone(), &self.chain.sub(&o.chain))
    }

    pub fn neg(&self) -> ReducedKoszul2 {
        ReducedKoszul2::new(self.k, self.basis.clone(), &self.chain.scaled(&Rational::from_int(-1)))
    }
}

impl PartialEq for ReducedKoszul2 {
    fn eq(&self, o: &Self) -> bool {
        self.k == o.k && same_basis(&self.basis, &o.basis) && self.chain == o.chain
    }
}

impl Eq for ReducedKoszul2 {}

impl fmt::Display for ReducedKoszul2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.chain.format(&self.basis))
    }
}

/// `sw_3` of the T-chain sum at class `k`, before reduction.
pub fn m_tilde_raw(seq: &MoveSequence, k: usize) -> Result<WedgeChain, HomError> {
    check_class(k)?;
    let group = surface_group(seq.start.genus, k);
    Ok(sw_chain(&group, &morita_chain(seq, k)?))
}

/// `sw_3` of the T-chain sum of explicit moves at class `k`.
pub fn m_tilde_moves(genus: usize, moves: &[WhiteheadMove], k: usize) -> WedgeChain {
    let group = surface_group(genus, k);
    sw_chain(&group, &reduce_words(&group, &morita_free(moves)))
}

/// `m~_k(S)`.
pub fn m_tilde(seq: &MoveSequence, k: usize) -> Result<ReducedKoszul3, HomError> {
    let raw = m_tilde_raw(seq, k)?;
    Ok(ReducedKoszul3::new(basis_at(seq.start.genus, k), &raw))
}

/// Lift a class-`k` chain identically into the class-`k+1` basis, take the
/// Koszul boundary and drop `Gamma_2 ^ Gamma_{k+1}`.
pub fn extended_differential(b: &Arc<HallBasis>, c: &WedgeChain) -> ReducedKoszul2 {
    let k = b.class();
    let up = HallBasis::with_names(b.names().to_vec(), k + 1);
    let lifted = lift(b, &up, c);
    ReducedKoszul2::new(k, up.clone(), &koszul_boundary(&up, &lifted))
}

/// Identity section from a lower-class basis into a higher one.
pub fn lift(from: &HallBasis, to: &HallBasis, c: &WedgeChain) -> WedgeChain {
    WedgeChain::from_terms(c.iter().map(|(w, q)| {
        let nw = w.iter().map(|&i| class_index(from, to, i as usize) as u16).collect();
        (nw, q.clone())
    }))
}

/// Which computation of the Johnson extension to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TauRoute {
    /// Extended differential applied to minus the Morita value.
    Differential,
    /// Per-move bivector `-s sw_2(d(k | h | g))`.
    Bivector,
}

impl TauRoute {
    pub fn name(self) -> &'static str {
        match self {
            TauRoute::Differential => "differential",
            TauRoute::Bivector => "bivector",
        }
    }
}

/// `tau~_k` of explicit moves by the chosen route.
pub fn tau_tilde_moves(genus: usize, moves: &[WhiteheadMove], k: usize, route: TauRoute) -> ReducedKoszul2 {
    match route {
        TauRoute::Differential => {
            let raw = m_tilde_moves(genus, moves, k).scaled(&Rational::from_int(-1));
            extended_differential(&basis_at(genus, k), &raw)
        }
        TauRoute::Bivector => {
            let group = surface_group(genus, k + 1);
            let mut total = WedgeChain::new();
            for mv in moves {
                total.add_assign(&move_bivector(&group, mv));
            }
            ReducedKoszul2::new(k, group.basis().clone(), &total)
        }
    }
}

/// `-s sw_2(d(k | h | g))` for one move, in the group's class.
pub fn move_bivector(group: &NilpotentGroup, mv: &WhiteheadMove) -> WedgeChain {
    let t = reduce_words(group, &mv.t_chain());
    sw_chain(group, &bar_boundary(group, &t)).scaled(&Rational::from_int(-1))
}

/// `tau~_k(S)`.
pub fn tau_tilde(seq: &MoveSequence, k: usize, route: TauRoute) -> Result<ReducedKoszul2, HomError> {
    check_class(k)?;
    let moves = seq.evaluate()?;
    Ok(tau_tilde_moves(seq.start.genus, &moves, k, route))
}

/// An element of `H (x) L_{k+1}(H)`: pairs (generator, Hall word of degree
/// `k+1`) with rational coefficients.
#[derive(Clone, Debug)]
pub struct JohnsonValue {
    pub k: usize,
    pub basis: Arc<HallBasis>,
    pub terms: BTreeMap<(usize, usize), Rational>,
}

impl JohnsonValue {
    pub fn zero(k: usize, basis: Arc<HallBasis>) -> Self {
        JohnsonValue { k, basis, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, h: usize, u: usize, q: &Rational) {
        let e = self.terms.entry((h, u)).or_insert_with(Rational::zero);
        *e = &*e + q;
        if e.is_zero() {
            self.terms.remove(&(h, u));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|q| q.is_integer())
    }
}

impl PartialEq for JohnsonValue {
    fn eq(&self, o: &Self) -> bool {
        self.k == o.k && same_basis(&self.basis, &o.basis) && self.terms == o.terms
    }
}

impl Eq for JohnsonValue {}

impl fmt::Display for JohnsonValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, ((h, u), q)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{q} * [{} (x) {}]", self.basis.word_string(*h), self.basis.word_string(*u))?;
        }
        Ok(())
    }
}

/// `tau_k(f)` for `f` given at class `k+1` and trivial at class `k`:
/// `t(x) = x^-1 f(x)` in degree `k+1`, converted into `H (x) L_{k+1}` by
/// `h -> omega(h, -)` with `omega(x_i, y_i) = 1`.
pub fn classical_tau(f: &InducedLieMap, k: usize) -> Result<JohnsonValue, HomError> {
    check_class(k)?;
    let b = f.source().clone();
    if b.class() != k + 1 {
        return Err(HomError::NotInFiltration(k + 1));
    }
    if !is_identity(&truncate(f, k)) {
        return Err(HomError::NotInFiltration(k + 1));
    }
    let group = NilpotentGroup::new(b.clone());
    let t: Vec<_> = (0..b.rank())
        .map(|i| {
            let x = b.generator(i);
            group.bch(&x.neg(), &f.generator_images()[i]).homogeneous(&b, k + 1)
        })
        .collect();
    let mut out = JohnsonValue::zero(k, b.clone());
    for i in 0..b.rank() / 2 {
        let (x, y) = (2 * i, 2 * i + 1);
        for (u, q) in t[y].iter() {
            out.add_term(x, u, q);
        }
        for (u, q) in t[x].iter() {
            out.add_term(y, u, &-q);
        }
    }
    Ok(out)
}

/// `iota(h (x) u) = h ^ u`, reduced.
pub fn iota(v: &JohnsonValue) -> ReducedKoszul2 {
    let b = &v.basis;
    let mut c = WedgeChain::new();
    for ((h, u), q) in &v.terms {
        let hu = wedge_of(&[&b.generator(*h), &crate::hall::LieElement::basis(b, *u)]);
        c.add_scaled(&hu, q);
    }
    ReducedKoszul2::new(v.k, b.clone(), &c)
}

/// The value `(1/6) h1 ^ h2 ^ h3` in `Lambda^3 H`, `h1, h2, h3` the
/// homology classes of the outer edges `a1, a2, b1` oriented into the
/// quadrilateral.
pub fn k1_closed_form(genus: usize, mv: &WhiteheadMove) -> WedgeChain {
    let group = surface_group(genus, 1);
    let h: Vec<_> = mv.outer[..3].iter().map(|w| group.log_of_word(w).log).collect();
    wedge_of(&[&h[0], &h[1], &h[2]]).scaled(&Rational::new(1, 6))
}

/// The trivector `k ^ h ^ g` of `Lambda^3 H` as the element
/// `k (x) [h,g] + g (x) [k,h] + h (x) [g,k]` of `H (x) L_2(H)`.
pub fn trivector_as_johnson(b2: &Arc<HallBasis>, c: &WedgeChain) -> JohnsonValue {
    let mut out = JohnsonValue::zero(1, b2.clone());
    for (w, q) in c.iter() {
        let [kk, h, g] = [w[0] as usize, w[1] as usize, w[2] as usize];
        let (ke, he, ge) = (b2.generator(kk), b2.generator(h), b2.generator(g));
        for (a, br) in [(kk, b2.bracket(&he, &ge)), (g, b2.bracket(&ke, &he)), (h, b2.bracket(&ge, &ke))] {
            for (u, c) in br.iter() {
                out.add_term(a, u, &(q * c));
            }
        }
    }
    out
}

/// Which extension `crossed_value` evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    Morita,
    MTilde,
    TauTilde,
}

impl Extension {
    /// Nilpotency class of the automorphism acting on values at level `k`.
    pub fn action_class(self, k: usize) -> usize {
        match self {
            Extension::Morita | Extension::MTilde => k,
            Extension::TauTilde => k + 1,
        }
    }
}

/// Value of one of the extensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Bar(BarChain<GroupElement>),
    Koszul3(ReducedKoszul3),
    Koszul2(ReducedKoszul2),
}

impl Value {
    pub fn add(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Bar(a), Value::Bar(b)) => {
                let mut c = a.clone();
                c.add_assign(b);
                Value::Bar(c)
            }
            (Value::Koszul3(a), Value::Koszul3(b)) => Value::Koszul3(a.add(b)),
            (Value::Koszul2(a), Value::Koszul2(b)) => Value::Koszul2(a.add(b)),
            _ => panic!("values of different extensions"),
        }
    }

    pub fn neg(&self) -> Value {
        match self {
            Value::Bar(a) => Value::Bar(a.scaled(&Rational::from_int(-1))),
            Value::Koszul3(a) => Value::Koszul3(a.neg()),
            Value::Koszul2(a) => Value::Koszul2(a.neg()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Bar(a) => a.is_zero(),
            Value::Koszul3(a) => a.is_zero(),
            Value::Koszul2(a) => a.is_zero(),
        }
    }
}

/// The value of `which` on `seq` with the automorphism the sequence induces
/// at the class the value lives in.
pub fn crossed_value(seq: &MoveSequence, k: usize, which: Extension) -> Result<(Value, InducedLieMap), HomError> {
    check_class(k)?;
    let end = seq.end()?;
    let f = induced_automorphism(&seq.start, &end, which.action_class(k))?;
    let v = match which {
        Extension::Morita => Value::Bar(morita_chain(seq, k)?),
        Extension::MTilde => Value::Koszul3(m_tilde(seq, k)?),
        Extension::TauTilde => Value::Koszul2(tau_tilde(seq, k, TauRoute::Differential)?),
    };
    Ok((v, f))
}

/// Entrywise action of an automorphism on a value, re-reduced.
pub fn act(f: &InducedLieMap, v: &Value) -> Value {
    match v {
        Value::Bar(c) => Value::Bar(act_bar(f, c)),
        Value::Koszul3(c) => Value::Koszul3(ReducedKoszul3::new(c.basis.clone(), &act_wedges(f, &c.chain))),
        Value::Koszul2(c) => Value::Koszul2(ReducedKoszul2::new(c.k, c.basis.clone(), &act_wedges(f, &c.chain))),
    }
}

/// Whether every coefficient times `d` is an integer.
pub fn scaled_integral(c: &WedgeChain, d: i64) -> bool {
    let s = Rational::from_int(d);
    c.iter().all(|(_, q)| (q * &s).is_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatgraph::{random_fixture, Resolution};
    use crate::search::pentagon_loops;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn walk(m: &crate::fatgraph::MarkedFatgraph, n: usize, seed: u64) -> MoveSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cur = m.clone();
        let mut steps = Vec::new();
        for _ in 0..n {
            let e = *cur.graph.movable_edges().choose(&mut rng).unwrap();
            let name = cur.graph.edges()[e].name.clone();
            let r = if rand::Rng::gen_bool(&mut rng, 0.5) { Resolution::A } else { Resolution::B };
            cur = crate::fatgraph::apply_move(&cur, &name, r).unwrap().target;
            steps.push((name, r));
        }
        MoveSequence::new(m.clone(), steps)
    }

    #[test]
    fn k1_single_moves_match_closed_forms() {
        let m = random_fixture(2, 6, &mut ChaCha8Rng::seed_from_u64(3));
        let s = walk(&m, 40, 9);
        let moves = s.evaluate().unwrap();
        let b1 = basis_at(2, 1);
        let b2 = basis_at(2, 2);
        let mut types = std::collections::BTreeSet::new();
        for mv in &moves {
            types.insert(mv.type_index);
            let one = std::slice::from_ref(mv);
            let mt = ReducedKoszul3::new(b1.clone(), &m_tilde_moves(2, one, 1));
            let closed = k1_closed_form(2, mv);
            assert_eq!(mt.chain, closed, "type {}", mv.type_index);
            let tau = tau_tilde_moves(2, one, 1, TauRoute::Differential);
            let expect = iota(&trivector_as_johnson(&b2, &closed)).neg();
            assert_eq!(tau, expect);
            assert_eq!(tau_tilde_moves(2, one, 1, TauRoute::Bivector), tau);
        }
        assert!(types.len() >= 6, "{types:?}");
        assert!(moves.iter().any(|mv| !k1_closed_form(2, mv).is_zero()));
    }

    #[test]
    fn pentagons_vanish() {
        let m = random_fixture(2, 7, &mut ChaCha8Rng::seed_from_u64(11));
        for s in pentagon_loops(&m).iter().take(3) {
            for k in 1..=2 {
                assert!(m_tilde(s, k).unwrap().is_zero());
                assert!(tau_tilde(s, k, TauRoute::Differential).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn routes_agree_at_class_two() {
        let m = random_fixture(2, 5, &mut ChaCha8Rng::seed_from_u64(21));
        let s = walk(&m, 6, 2);
        for mv in s.evaluate().unwrap() {
            let one = std::slice::from_ref(&mv);
            assert_eq!(
                tau_tilde_moves(2, one, 2, TauRoute::Differential),
                tau_tilde_moves(2, one, 2, TauRoute::Bivector)
            );
        }
    }

    fn tree_loops(seed: u64) -> (crate::fatgraph::MarkedFatgraph, Vec<MoveSequence>) {
        use crate::search::{LoopPolicy, TreeCycles};
        let m = random_fixture(2, 6, &mut ChaCha8Rng::seed_from_u64(seed));
        let loops = TreeCycles { max_states: 2000, max_loops: 60 }.search(&m, seed, 10);
        (m, loops)
    }

    #[test]
    fn crossed_identity() {
        let (_, loops) = tree_loops(3);
        let (s1, s2) = (&loops[7], &loops[31]);
        let both = s1.then(s2).unwrap();
        for (which, k) in [(Extension::Morita, 1), (Extension::MTilde, 1), (Extension::MTilde, 2), (Extension::TauTilde, 1)] {
            let (v1, f1) = crossed_value(s1, k, which).unwrap();
            assert!(!is_identity(&f1));
            let (v2, _) = crossed_value(s2, k, which).unwrap();
            let (v, _) = crossed_value(&both, k, which).unwrap();
            assert_eq!(v, v1.add(&act(&f1, &v2)), "{which:?} {k}");
        }
    }

    #[test]
    fn base_change() {
        let (m, loops) = tree_loops(5);
        let s = &loops[3];
        let u = walk(&m, 5, 8);
        let moved = u.reversed().unwrap().then(s).unwrap().then(&u).unwrap();
        for (which, k) in [(Extension::Morita, 1), (Extension::MTilde, 1)] {
            let (vs, f) = crossed_value(s, k, which).unwrap();
            assert!(!is_identity(&f) && !u.is_loop().unwrap());
            let vu = match which {
                Extension::Morita => Value::Bar(morita_chain(&u, k).unwrap()),
                _ => Value::Koszul3(m_tilde(&u, k).unwrap()),
            };
            let (v, _) = crossed_value(&moved, k, which).unwrap();
            assert_eq!(v, vu.neg().add(&vs).add(&act(&f, &vu)), "{which:?}");
        }
    }
}
