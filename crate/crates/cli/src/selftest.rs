//! Compact invariant suite behind `ptolemy selftest`.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptolemy_core::automorphism::{induced_automorphism, surface_group};
use ptolemy_core::chains::{bar_boundary, FreeGroup};
use ptolemy_core::fatgraph::{
    apply_move, caterpillar, dual_triangle_chain, random_fixture, z_chain, zeta_chain, MoveSequence, Resolution,
};
use ptolemy_core::hall::HallBasis;
use ptolemy_core::homomorphisms::{
    classical_tau, iota, k1_closed_form, m_tilde, m_tilde_moves, tau_tilde, tau_tilde_moves, trivector_as_johnson,
    ReducedKoszul3, TauRoute,
};
use ptolemy_core::nilpotent::{FreeWord, NilpotentGroup};
use ptolemy_core::rational::Rational;
use ptolemy_core::search::{pentagon_loops, commutativity_loops, torelli_products, LoopPolicy, TreeCycles};
use ptolemy_core::sw::sw;

use crate::{Failure, Outcome};

fn walk(m: &ptolemy_core::fatgraph::MarkedFatgraph, n: usize, rng: &mut ChaCha8Rng) -> MoveSequence {
    let mut cur = m.clone();
    let mut steps = Vec::new();
    for _ in 0..n {
        let e = *cur.graph.movable_edges().choose(rng).expect("a movable edge");
        let name = cur.graph.edges()[e].name.clone();
        let r = if rng.gen_bool(0.5) { Resolution::A } else { Resolution::B };
        cur = apply_move(&cur, &name, r).expect("movable").target;
        steps.push((name, r));
    }
    MoveSequence::new(m.clone(), steps)
}

fn bch_class_two() -> bool {
    let b = HallBasis::new(2, 2);
    let g = NilpotentGroup::new(b.clone());
    let (x, y) = (b.generator(0), b.generator(1));
    let mut want = x.add(&y);
    want.add_scaled(&b.bracket(&x, &y), &Rational::new(1, 2));
    g.bch(&x, &y) == want
}

fn sw_degree_one(rng: &mut ChaCha8Rng) -> bool {
    let g = surface_group(2, 3);
    (0..20).all(|_| {
        let w = FreeWord::from_letters((0..6).map(|_| {
            let l = rng.gen_range(1..=4);
            if rng.gen_bool(0.5) {
                l
            } else {
                -l
            }
        }));
        let e = g.log_of_word(&w);
        sw(&g, std::slice::from_ref(&e)) == ptolemy_core::wedge::wedge_of(&[&e.log])
    })
}

fn fatgraph_boundaries(rng: &mut ChaCha8Rng) -> bool {
    (1..=3).all(|genus| {
        let m = random_fixture(genus, 8, rng);
        let zeta = zeta_chain(genus).scaled(&Rational::from_int(-1));
        let z = z_chain(&m);
        if bar_boundary(&FreeGroup, &z) != zeta || dual_triangle_chain(&m) != z.scaled(&Rational::from_int(-1)) {
            return false;
        }
        walk(&m, 10, rng).evaluate().expect("legal").iter().all(|mv| {
            bar_boundary(&FreeGroup, &mv.t_chain()) == z_chain(&mv.source).sub(&z_chain(&mv.target))
        })
    })
}

fn relations_vanish(rng: &mut ChaCha8Rng) -> bool {
    let m = random_fixture(2, 7, rng);
    let loops: Vec<_> = pentagon_loops(&m).into_iter().take(2).chain(commutativity_loops(&m).into_iter().take(2)).collect();
    !loops.is_empty()
        && loops.iter().all(|s| {
            (1..=2).all(|k| m_tilde(s, k).is_ok_and(|v| v.is_zero()))
                && tau_tilde(s, 1, TauRoute::Differential).is_ok_and(|v| v.is_zero())
        })
}

fn k1_closed_forms(rng: &mut ChaCha8Rng) -> bool {
    let m = random_fixture(2, 6, rng);
    let b1 = HallBasis::surface(2, 1);
    let b2 = HallBasis::surface(2, 2);
    walk(&m, 12, rng).evaluate().expect("legal").iter().all(|mv| {
        let one = std::slice::from_ref(mv);
        let c = k1_closed_form(2, mv);
        let tau = tau_tilde_moves(2, one, 1, TauRoute::Differential);
        ReducedKoszul3::new(b1.clone(), &m_tilde_moves(2, one, 1)).chain == c
            && tau == iota(&trivector_as_johnson(&b2, &c)).neg()
            && tau == tau_tilde_moves(2, one, 1, TauRoute::Bivector)
    })
}

fn johnson_consistency() -> bool {
    let m = random_fixture(2, 6, &mut ChaCha8Rng::seed_from_u64(3));
    let loops = TreeCycles { max_states: 20000, max_loops: 2000 }.search(&m, 3, 12);
    let prods = torelli_products(&loops, 2, 3);
    !prods.is_empty()
        && prods.iter().all(|s| {
            let Ok(end) = s.end() else { return false };
            let Ok(f) = induced_automorphism(&s.start, &end, 2) else { return false };
            let Ok(t) = classical_tau(&f, 1) else { return false };
            tau_tilde(s, 1, TauRoute::Differential).is_ok_and(|v| v == iota(&t))
        })
}

fn zchain_genus_one() -> bool {
    let m = caterpillar(1);
    m.validate(Default::default()).is_valid()
        && bar_boundary(&FreeGroup, &z_chain(&m)) == zeta_chain(1).scaled(&Rational::from_int(-1))
}

pub fn run() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let checks: Vec<(&str, bool)> = vec![
        ("bch class-2 closed form", bch_class_two()),
        ("sw degree 1 equals log", sw_degree_one(&mut rng)),
        ("genus-1 caterpillar is valid", zchain_genus_one()),
        ("boundaries of Z and T", fatgraph_boundaries(&mut rng)),
        ("relation loops vanish", relations_vanish(&mut rng)),
        ("k = 1 closed forms and route agreement", k1_closed_forms(&mut rng)),
        ("iota(tau_1) = tau~_1 on Torelli loops", johnson_consistency()),
    ];
    let mut s = String::new();
    for (name, ok) in &checks {
        let _ = writeln!(s, "{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    let passed = checks.iter().filter(|c| c.1).count();
    let _ = writeln!(s, "{passed}/{} checks passed", checks.len());
    if passed == checks.len() {
        Ok(s)
    } else {
        Err(Failure::Invalid(s))
    }
}
