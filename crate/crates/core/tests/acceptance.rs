//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptolemy_core::automorphism::{induced_automorphism, is_identity, surface_group};
use ptolemy_core::chains::{bar_boundary, drop_gamma_wedge, image_of_boundary, koszul_boundary, BarChain, FreeGroup};
use ptolemy_core::fatgraph::{
    apply_move, dual_triangle_chain, random_fixture, z_chain, zeta_chain, MarkedFatgraph, MoveSequence, Resolution,
};
use ptolemy_core::hall::{HallBasis, LieElement};
use ptolemy_core::homomorphisms::*;
use ptolemy_core::nilpotent::{compute_nk, FreeWord, GroupElement, InducedLieMap, NilpotentGroup};
use ptolemy_core::rational::{common_denominator, Rational};
use ptolemy_core::search::{commutativity_loops, commutator, pentagon_loops, torelli_products, LoopPolicy, TreeCycles};
use ptolemy_core::sw::{inverse_factorial, sw, sw_chain, KoszulResolution, Mono, SymChain};
use ptolemy_core::wedge::{sort_with_sign, wedge_of, Wedge, WedgeChain};

type Check = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn random_word(rng: &mut ChaCha8Rng, rank: usize, len: usize) -> FreeWord {
    FreeWord::from_letters((0..len).map(|_| {
        let l = rng.gen_range(1..=rank as i32);
        if rng.gen_bool(0.5) {
            l
        } else {
            -l
        }
    }))
}

fn random_element(rng: &mut ChaCha8Rng, g: &NilpotentGroup) -> GroupElement {
    let len = rng.gen_range(1..=6);
    g.log_of_word(&random_word(rng, g.basis().rank(), len))
}

fn random_lie(rng: &mut ChaCha8Rng, b: &HallBasis) -> LieElement {
    let mut a = b.zero();
    for i in 0..b.dim() {
        if rng.gen_bool(0.4) {
            a.set(i, Rational::new(rng.gen_range(-3..=3), rng.gen_range(1..=3)));
        }
    }
    a
}

fn walk(m: &MarkedFatgraph, n: usize, rng: &mut ChaCha8Rng) -> MoveSequence {
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

fn c1_bch() -> Check {
    for rank in [2, 4] {
        let b = HallBasis::new(rank, 2);
        let g = NilpotentGroup::new(b.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (x, y) = (random_lie(&mut rng, &b), random_lie(&mut rng, &b));
            let mut want = x.add(&y);
            want.add_scaled(&b.bracket(&x, &y), &q(1, 2));
            ensure(g.bch(&x, &y) == want, || format!("rank {rank}: {} vs {}", b.format(&g.bch(&x, &y)), b.format(&want)))?;
        }
    }
    Ok("rank 2 and 4, 40 random pairs".into())
}

fn c2_sw_degree_one() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..200 {
        let genus = 1 + i % 2;
        let class = 1 + (i / 2) % 4;
        let g = surface_group(genus, class);
        let len = rng.gen_range(1..10);
        let e = g.log_of_word(&random_word(&mut rng, 2 * genus, len));
        ensure(sw(&g, std::slice::from_ref(&e)) == wedge_of(&[&e.log]), || format!("genus {genus} class {class}"))?;
    }
    Ok("200 words".into())
}

fn c3_sw_degree_two() -> Check {
    // SW_2(a | b) = 1/2 a^b + 1/12 (a - b) ^ [a, b] at class 2.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bases = vec![HallBasis::new(2, 2)];
    bases.extend((1..=2).map(|genus| HallBasis::surface(genus, 2)));
    let mut n = 0;
    for b in bases {
        let g = NilpotentGroup::new(b.clone());
        for _ in 0..25 {
            let (x, y) = (random_element(&mut rng, &g), random_element(&mut rng, &g));
            let br = b.bracket(&x.log, &y.log);
            let mut want = wedge_of(&[&x.log, &y.log]).scaled(&q(1, 2));
            want.add_scaled(&wedge_of(&[&x.log.sub(&y.log), &br]), &q(1, 12));
            ensure(sw(&g, &[x, y]) == want, || format!("rank {}", b.rank()))?;
            n += 1;
        }
        let (x, y) = (b.generator(0), b.generator(1));
        let got = sw(&g, &[g.from_log(x.clone()), g.from_log(y.clone())]);
        let ix = b.bracket_index(0, 1).expect("bracket of the first generators");
        ensure(got.coeff(&Wedge::from_slice(&[0, 1])) == q(1, 2), || "1/2 coefficient".into())?;
        ensure(got.coeff(&Wedge::from_slice(&[0, ix as u16])) == q(1, 12), || "+1/12 coefficient".into())?;
        ensure(got.coeff(&Wedge::from_slice(&[1, ix as u16])) == q(-1, 12), || "-1/12 coefficient".into())?;
    }
    Ok(format!("{n} random pairs plus generator coefficients 1/2, 1/12, -1/12"))
}

fn c4_abelian() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 1..=4 {
        for rank in [2, 4] {
            let g = NilpotentGroup::new(HallBasis::new(rank, 1));
            for _ in 0..5 {
                let t: Vec<GroupElement> = (0..n).map(|_| random_element(&mut rng, &g)).collect();
                let logs: Vec<&LieElement> = t.iter().map(|e| &e.log).collect();
                let want = wedge_of(&logs).scaled(&inverse_factorial(n));
                ensure(sw(&g, &t) == want, || format!("n {n} rank {rank}"))?;
            }
        }
    }
    Ok("n <= 4, ranks 2 and 4".into())
}

fn c5_chain_map() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut count = 0;
    for i in 0..100 {
        let n = 1 + i % 4;
        let class = 1 + (i / 4) % 3;
        let rank = 2 + (i / 12) % 3;
        let g = NilpotentGroup::new(HallBasis::new(rank, class));
        let t: Vec<GroupElement> = (0..n).map(|_| random_element(&mut rng, &g)).collect();
        let lhs = koszul_boundary(g.basis(), &sw(&g, &t));
        let rhs = sw_chain(&g, &bar_boundary(&*g, &BarChain::single(t, Rational::one())));
        ensure(lhs == rhs, || format!("n {n} class {class} rank {rank}"))?;
        count += 1;
    }
    Ok(format!("{count} tuples"))
}

fn c6_homotopy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut count = 0;
    while count < 100 {
        let k = 1 + count % 3;
        let b = HallBasis::new(2, k);
        let res = KoszulResolution::new(b.clone());
        let dim = b.dim() as u16;
        let len = rng.gen_range(1..=3);
        let mut m: Mono = (0..len).map(|_| rng.gen_range(0..dim)).collect();
        m.sort_unstable();
        let p = rng.gen_range(0..=2);
        let mut w: Wedge = (0..p).map(|_| rng.gen_range(0..dim)).collect();
        if sort_with_sign(&mut w).is_none() {
            continue;
        }
        let c = SymChain::single(m, w, Rational::one());
        let mut lhs = res.boundary(&res.homotopy(&c));
        lhs.add_assign(&res.homotopy(&res.boundary(&c)));
        ensure(lhs == c, || format!("class {k}"))?;
        count += 1;
    }
    Ok("100 chains".into())
}

fn c7_fatgraph() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut types = BTreeSet::new();
    let mut moves = 0;
    for i in 0..60 {
        let genus = 1 + i % 3;
        let m = random_fixture(genus, 5 + i % 7, &mut rng);
        let z = z_chain(&m);
        ensure(bar_boundary(&FreeGroup, &z) == zeta_chain(genus).scaled(&q(-1, 1)), || "dZ".into())?;
        ensure(dual_triangle_chain(&m) == z.scaled(&q(-1, 1)), || "dual triangles".into())?;
        for mv in walk(&m, 8, &mut rng).evaluate().map_err(|e| e.to_string())? {
            types.insert(mv.type_index);
            let want = z_chain(&mv.source).sub(&z_chain(&mv.target));
            ensure(bar_boundary(&FreeGroup, &mv.t_chain()) == want, || format!("type {}", mv.type_index))?;
            moves += 1;
        }
    }
    ensure(types.len() == 12, || format!("types seen {types:?}"))?;
    Ok(format!("60 fixtures, {moves} moves, all 12 types"))
}

fn c8_relations() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut n = 0;
    for _ in 0..3 {
        let m = random_fixture(2, 8, &mut rng);
        let loops: Vec<MoveSequence> = pentagon_loops(&m).into_iter().chain(commutativity_loops(&m).into_iter().take(4)).collect();
        for s in &loops {
            let moves = s.evaluate().map_err(|e| e.to_string())?;
            let closed = bar_boundary(&FreeGroup, &morita_free(&moves)).is_zero();
            ensure(closed, || "T-chain sum not closed".into())?;
            for k in 1..=3 {
                let b = basis_at(2, k);
                let raw = m_tilde_moves(2, &moves, k);
                ensure(image_of_boundary(&b, 3).contains(&b, &raw), || format!("class {k}"))?;
            }
            n += 1;
        }
    }
    Ok(format!("{n} relation loops, nilpotency classes 1..3"))
}

fn c9_closed_forms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b2 = basis_at(2, 2);
    let g2 = surface_group(2, 2);
    let mut types = BTreeSet::new();
    let mut nonzero = 0;
    for _ in 0..4 {
        let m = random_fixture(2, 10, &mut rng);
        for mv in walk(&m, 30, &mut rng).evaluate().map_err(|e| e.to_string())? {
            types.insert(mv.type_index);
            let one = std::slice::from_ref(&mv);
            let closed = k1_closed_form(2, &mv);
            nonzero += usize::from(!closed.is_zero());
            let mt = m_tilde_moves(2, one, 1);
            ensure(mt == closed, || format!("m~_1 type {}", mv.type_index))?;
            let tau = tau_tilde_moves(2, one, 1, TauRoute::Differential);
            ensure(tau == iota(&trivector_as_johnson(&b2, &closed)).neg(), || "tau~_1 closed form".into())?;
            // sw_2 of the boundary of (k|h|g) at class 2.
            let t = reduce_words(&g2, &BarChain::single(vec![mv.k.clone(), mv.h.clone(), mv.g.clone()], Rational::one()));
            let bi = drop_gamma_wedge(&b2, 1, &sw_chain(&g2, &bar_boundary(&*g2, &t)));
            let [k, h, gg] = [&mv.k, &mv.h, &mv.g].map(|w| g2.log_of_word(w).log.homogeneous(&b2, 1));
            let mut want = wedge_of(&[&h, &b2.bracket(&gg, &k)]);
            want.add_assign(&wedge_of(&[&k, &b2.bracket(&h, &gg)]));
            want.add_assign(&wedge_of(&[&gg, &b2.bracket(&k, &h)]));
            ensure(bi == want.scaled(&q(1, 6)), || "bivector formula".into())?;
        }
    }
    ensure(types.len() == 12 && nonzero > 0, || format!("types {types:?}, nonzero {nonzero}"))?;
    for _ in 0..20 {
        let m = random_fixture(2, 6, &mut rng);
        let len = rng.gen_range(1..12);
        let s = walk(&m, len, &mut rng);
        let mt = m_tilde(&s, 1).map_err(|e| e.to_string())?;
        let tau = tau_tilde(&s, 1, TauRoute::Differential).map_err(|e| e.to_string())?;
        ensure(tau == iota(&trivector_as_johnson(&b2, &mt.chain)).neg(), || "tau~_1 = -m~_1".into())?;
    }
    Ok(format!("all 12 types, {nonzero} nonzero values; 20 sequences with tau~_1 = -m~_1"))
}

fn c10_routes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut n = 0;
    for k in 1..=2 {
        let m = random_fixture(2, 8, &mut rng);
        for mv in walk(&m, 25, &mut rng).evaluate().map_err(|e| e.to_string())? {
            let one = std::slice::from_ref(&mv);
            let a = tau_tilde_moves(2, one, k, TauRoute::Differential);
            let b = tau_tilde_moves(2, one, k, TauRoute::Bivector);
            ensure(a == b, || format!("k {k} type {}", mv.type_index))?;
            n += 1;
        }
    }
    Ok(format!("{n} moves, k = 1 and 2"))
}

fn torelli_fixture() -> Vec<MoveSequence> {
    let m = random_fixture(2, 6, &mut ChaCha8Rng::seed_from_u64(3));
    let loops = TreeCycles { max_states: 20000, max_loops: 2000 }.search(&m, 3, 12);
    torelli_products(&loops, 2, 20)
}

fn c11_johnson() -> Check {
    let tor = torelli_fixture();
    let mut n1 = 0;
    for s in &tor {
        let end = s.end().map_err(|e| e.to_string())?;
        let f = induced_automorphism(&s.start, &end, 2).map_err(|e| e.to_string())?;
        let t = classical_tau(&f, 1).map_err(|e| e.to_string())?;
        ensure(t.is_integral() && !t.is_zero(), || "tau_1 not integral and nonzero".into())?;
        let tt = tau_tilde(s, 1, TauRoute::Differential).map_err(|e| e.to_string())?;
        ensure(iota(&t) == tt, || format!("length {}", s.len()))?;
        n1 += 1;
    }
    ensure(n1 >= 5, || format!("only {n1} Torelli loops"))?;
    let mut n2 = 0;
    for i in 0..tor.len().min(4) {
        for j in i + 1..tor.len().min(4) {
            let c = commutator(&tor[i], &tor[j]).map_err(|e| e.to_string())?;
            let end = c.end().map_err(|e| e.to_string())?;
            let f = induced_automorphism(&c.start, &end, 3).map_err(|e| e.to_string())?;
            if is_identity(&f) {
                continue;
            }
            let t = classical_tau(&f, 2).map_err(|e| e.to_string())?;
            let tt = tau_tilde(&c, 2, TauRoute::Differential).map_err(|e| e.to_string())?;
            ensure(iota(&t) == tt, || "k = 2 commutator".into())?;
            n2 += 1;
        }
    }
    Ok(format!("k = 1 on {n1} loops; k = 2 on {n2} commutators"))
}

fn c12_crossed() -> Check {
    let m = random_fixture(2, 6, &mut ChaCha8Rng::seed_from_u64(12));
    let loops = TreeCycles { max_states: 2000, max_loops: 60 }.search(&m, 12, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut n = 0;
    for _ in 0..6 {
        let s1 = loops.choose(&mut rng).expect("loops");
        let s2 = loops.choose(&mut rng).expect("loops");
        let both = s1.then(s2).map_err(|e| e.to_string())?;
        for which in [Extension::Morita, Extension::MTilde, Extension::TauTilde] {
            let (v1, f1) = crossed_value(s1, 1, which).map_err(|e| e.to_string())?;
            let (v2, _) = crossed_value(s2, 1, which).map_err(|e| e.to_string())?;
            let (v, _) = crossed_value(&both, 1, which).map_err(|e| e.to_string())?;
            ensure(v == v1.add(&act(&f1, &v2)), || format!("crossed {which:?}"))?;
        }
        let len = rng.gen_range(1..6);
        let u = walk(&m, len, &mut rng);
        let moved = u.reversed().and_then(|r| r.then(s1)).and_then(|x| x.then(&u)).map_err(|e| e.to_string())?;
        for which in [Extension::Morita, Extension::MTilde] {
            let (vs, f) = crossed_value(s1, 1, which).map_err(|e| e.to_string())?;
            let vu = match which {
                Extension::Morita => Value::Bar(morita_chain(&u, 1).map_err(|e| e.to_string())?),
                _ => Value::Koszul3(m_tilde(&u, 1).map_err(|e| e.to_string())?),
            };
            let (v, _) = crossed_value(&moved, 1, which).map_err(|e| e.to_string())?;
            ensure(v == vu.neg().add(&vs).add(&act(&f, &vu)), || format!("base change {which:?}"))?;
        }
        n += 1;
    }
    Ok(format!("{n} pairs and base changes"))
}

fn c13_denominators() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for k in 1..=4 {
        let nk = compute_nk(k);
        let g = surface_group(2, k);
        for _ in 0..50 {
            let len = rng.gen_range(1..12);
            let e = g.log_of_word(&random_word(&mut rng, 4, len));
            let d = common_denominator(e.log.coeffs());
            ensure((&nk % &d) == 0.into(), || format!("class {k}: denominator {d} does not divide {nk}"))?;
        }
    }
    let integral = |c: &WedgeChain| scaled_integral(c, 6);
    for _ in 0..20 {
        let m = random_fixture(2, 6, &mut rng);
        let len = rng.gen_range(1..12);
        let s = walk(&m, len, &mut rng);
        let mt = m_tilde(&s, 1).map_err(|e| e.to_string())?;
        let tau = tau_tilde(&s, 1, TauRoute::Differential).map_err(|e| e.to_string())?;
        ensure(integral(&mt.chain) && integral(&tau.chain), || "not in (1/6) lattice".into())?;
    }
    Ok(format!("N_1..N_4 = {}", (1..=4).map(|k| compute_nk(k).to_string()).collect::<Vec<_>>().join(", ")))
}

fn c14_functoriality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..20 {
        let rank = 2 + i % 2;
        let class = 1 + i % 3;
        let b = HallBasis::new(rank, class);
        let g = NilpotentGroup::new(b.clone());
        let images: Vec<LieElement> = (0..rank).map(|_| random_lie(&mut rng, &b)).collect();
        let f = InducedLieMap::new(b.clone(), b.clone(), &images).map_err(|e| e.to_string())?;
        for n in 1..=3 {
            let t: Vec<GroupElement> = (0..n).map(|_| random_element(&mut rng, &g)).collect();
            let ft: Vec<GroupElement> = t.iter().map(|e| f.apply_group(e)).collect();
            let lhs = sw(&g, &ft);
            let rhs = ptolemy_core::automorphism::act_wedges(&f, &sw(&g, &t));
            ensure(lhs == rhs, || format!("endomorphism {i}, n {n}"))?;
        }
    }
    Ok("20 endomorphisms, n <= 3".into())
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "BCH class-2 closed form", c1_bch),
        (2, "SW degree 1 is log", c2_sw_degree_one),
        (3, "SW degree 2 at class 2", c3_sw_degree_two),
        (4, "abelian SW", c4_abelian),
        (5, "chain-map identity", c5_chain_map),
        (6, "contracting homotopy", c6_homotopy),
        (7, "fatgraph boundary identities", c7_fatgraph),
        (8, "groupoid relations vanish", c8_relations),
        (9, "k = 1 closed forms", c9_closed_forms),
        (10, "bivector route agreement", c10_routes),
        (11, "Johnson consistency", c11_johnson),
        (12, "crossed identity and base change", c12_crossed),
        (13, "denominator certificates", c13_denominators),
        (14, "functoriality of sw", c14_functoriality),
    ];
    let results: Vec<(usize, &str, Check, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(i, name, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
                    (i, name, r, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread")).collect()
    });
    let mut failed = 0;
    for (i, name, r, secs) in &results {
        match r {
            Ok(msg) => println!("criterion {i:2} PASS  {name}: {msg} ({secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("criterion {i:2} FAIL  {name}: {msg} ({secs:.1}s)");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
