//! Automorphisms of nilpotent quotients read off a pair of markings on
//! isomorphic fatgraphs, and their action on chains.

use std::sync::Arc;

use crate::chains::BarChain;
use crate::fatgraph::{FatgraphError, MarkedFatgraph};
use crate::hall::{HallBasis, LieElement};
use crate::linalg::invert;
use crate::nilpotent::{FreeWord, GroupElement, InducedLieMap, NilpotentGroup};
use crate::rational::Rational;
use crate::wedge::{map_wedges, WedgeChain};

/// The endomorphism `f` of `pi / Gamma_{class+1}` with
/// `f(w(h)) = w'(phi(h))` for every half-edge, `phi: start -> end` the
/// fatgraph isomorphism. Solved degree by degree: at degree `d` the
/// unknown degree-`d` parts of the generator images enter linearly through
/// the abelianized edge values.
pub fn induced_automorphism(
    start: &MarkedFatgraph,
    end: &MarkedFatgraph,
    class: usize,
) -> Result<InducedLieMap, FatgraphError> {
    let phi = start.graph.isomorphism(&end.graph).ok_or(FatgraphError::NotIsomorphic)?;
    let group = NilpotentGroup::new(HallBasis::surface(start.genus, class));
    let b = group.basis().clone();
    let rank = b.rank();
    let edges = start.graph.edges();
    let src: Vec<LieElement> = edges.iter().map(|e| group.log_of_word(start.marking.value(e.halves[1])).log).collect();
    let tgt: Vec<LieElement> =
        edges.iter().map(|e| group.log_of_word(end.marking.value(phi[e.halves[1]])).log).collect();
    let ab: Vec<Vec<Rational>> = src.iter().map(|l| (0..rank).map(|g| l.coeff(g).clone()).collect()).collect();

    let mut chosen: Vec<usize> = Vec::new();
    let mut span = crate::linalg::SubspaceQ::<usize>::new();
    for (e, row) in ab.iter().enumerate() {
        let v = row.iter().enumerate().filter(|(_, q)| !q.is_zero()).map(|(i, q)| (i, q.clone())).collect();
        if span.insert(&v) {
            chosen.push(e);
        }
    }
    if chosen.len() != rank {
        return Err(FatgraphError::Inconsistent("edge values do not span H".into()));
    }
    let a: Vec<Vec<Rational>> = chosen.iter().map(|&e| ab[e].clone()).collect();
    let a_inv = invert(&a).expect("independent rows");

    let mut images: Vec<LieElement> = vec![b.zero(); rank];
    for d in 1..=class {
        let map = InducedLieMap::new(b.clone(), b.clone(), &images).expect("generator images");
        let rhs: Vec<LieElement> = chosen
            .iter()
            .map(|&e| tgt[e].homogeneous(&b, d).sub(&map.apply(&src[e]).homogeneous(&b, d)))
            .collect();
        for (i, img) in images.iter_mut().enumerate() {
            for (j, r) in rhs.iter().enumerate() {
                img.add_scaled(r, &a_inv[i][j]);
            }
        }
    }
    let map = InducedLieMap::new(b.clone(), b.clone(), &images).expect("generator images");
    for (e, edge) in edges.iter().enumerate() {
        if map.apply(&src[e]) != tgt[e] {
            return Err(FatgraphError::Inconsistent(format!("edge `{}` has no consistent image", edge.name)));
        }
    }
    let lin: Vec<Vec<Rational>> =
        images.iter().map(|l| (0..rank).map(|g| l.coeff(g).clone()).collect()).collect();
    if invert(&lin).is_none() {
        return Err(FatgraphError::Inconsistent("induced map is not invertible".into()));
    }
    let zeta = group.log_of_word(&FreeWord::zeta(start.genus)).log;
    if map.apply(&zeta) != zeta {
        return Err(FatgraphError::Inconsistent("induced map moves zeta".into()));
    }
    Ok(map)
}

/// Whether `f` is the identity.
pub fn is_identity(f: &InducedLieMap) -> bool {
    let b = f.source();
    (0..b.rank()).all(|g| f.generator_images()[g] == b.generator(g))
}

/// `f` with every generator image truncated to degree `class`.
pub fn truncate(f: &InducedLieMap, class: usize) -> InducedLieMap {
    let full = f.source();
    let b = HallBasis::with_names(full.names().to_vec(), class);
    let gens: Vec<LieElement> =
        f.generator_images().iter().map(|l| crate::hall::change_class(full, &b, l)).collect();
    InducedLieMap::new(b.clone(), b, &gens).expect("generator images")
}

/// Group-level generator images `f(x_i)`, `f(y_i)`.
pub fn group_images(f: &InducedLieMap) -> Vec<GroupElement> {
    let g = NilpotentGroup::new(f.source().clone());
    f.generator_images().iter().map(|l| g.from_log(l.clone())).collect()
}

/// Entrywise action on bar chains.
pub fn act_bar(f: &InducedLieMap, c: &BarChain<GroupElement>) -> BarChain<GroupElement> {
    c.map_entries(|g| f.apply_group(g))
}

/// Action on Koszul chains.
pub fn act_wedges(f: &InducedLieMap, c: &WedgeChain) -> WedgeChain {
    map_wedges(c, f.basis_images())
}

/// Shared group for a surface at a given class.
pub fn surface_group(genus: usize, class: usize) -> Arc<NilpotentGroup> {
    NilpotentGroup::new(HallBasis::surface(genus, class))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatgraph::{random_fixture, MoveSequence, Resolution};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_and_back_and_forth_are_identity() {
        let m = random_fixture(2, 6, &mut ChaCha8Rng::seed_from_u64(2));
        assert!(is_identity(&induced_automorphism(&m, &m, 3).unwrap()));
        let e = m.graph.movable_edges()[0];
        let name = m.graph.edges()[e].name.clone();
        let s = MoveSequence::new(m.clone(), vec![(name.clone(), Resolution::A), (name, Resolution::B)]);
        assert!(is_identity(&induced_automorphism(&m, &s.end().unwrap(), 3).unwrap()));
    }

    #[test]
    fn marking_change_is_recovered() {
        // Replace every value by its image under x1 -> x1 y1; the induced map
        // must be that substitution.
        let m = random_fixture(1, 4, &mut ChaCha8Rng::seed_from_u64(4));
        let x = FreeWord::generator(0);
        let y = FreeWord::generator(1);
        let images = [x.mul(&y), y.clone()];
        let mut n = m.clone();
        n.marking = m.marking.map(|w| w.substitute(&images));
        let f = induced_automorphism(&m, &n, 3).unwrap();
        let g = surface_group(1, 3);
        assert_eq!(f.generator_images()[0], g.log_of_word(&x.mul(&y)).log);
        assert_eq!(f.generator_images()[1], g.log_of_word(&y).log);
    }
}
