//! Named, interchangeable implementations looked up by the CLI.

use std::sync::Arc;

use crate::fatgraph::WhiteheadMove;
use crate::homomorphisms::{tau_tilde_moves, ReducedKoszul2, TauRoute};
use crate::nilpotent::{GroupElement, NilpotentGroup};
use crate::search::{LoopPolicy, RandomWalk, Relations, TreeCycles};
use crate::sw::{sw, DirectSw};
use crate::wedge::WedgeChain;

/// A way of evaluating `SW_n` on a tuple.
pub trait SwStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn sw(&self, group: &Arc<NilpotentGroup>, tuple: &[GroupElement]) -> WedgeChain;
}

/// Substitution into the cached universal value.
pub struct UniversalSw;

impl SwStrategy for UniversalSw {
    fn name(&self) -> &'static str {
        "universal"
    }

    fn sw(&self, group: &Arc<NilpotentGroup>, tuple: &[GroupElement]) -> WedgeChain {
        sw(group, tuple)
    }
}

/// Recursion in the ambient algebra.
pub struct DirectSwStrategy;

impl SwStrategy for DirectSwStrategy {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn sw(&self, group: &Arc<NilpotentGroup>, tuple: &[GroupElement]) -> WedgeChain {
        DirectSw::new(group.clone()).sw(tuple)
    }
}

/// A way of computing the Johnson extension of a list of moves.
pub trait TauStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn tau(&self, genus: usize, moves: &[WhiteheadMove], k: usize) -> ReducedKoszul2;
}

impl TauStrategy for TauRoute {
    fn name(&self) -> &'static str {
        TauRoute::name(*self)
    }

    fn tau(&self, genus: usize, moves: &[WhiteheadMove], k: usize) -> ReducedKoszul2 {
        tau_tilde_moves(genus, moves, k, *self)
    }
}

pub struct Registry {
    pub sw: Vec<Box<dyn SwStrategy>>,
    pub tau: Vec<Box<dyn TauStrategy>>,
    pub loops: Vec<Box<dyn LoopPolicy>>,
}

impl Registry {
    pub fn standard() -> Self {
        Registry {
            sw: vec![Box::new(UniversalSw), Box::new(DirectSwStrategy)],
            tau: vec![Box::new(TauRoute::Differential), Box::new(TauRoute::Bivector)],
            loops: vec![Box::new(TreeCycles::default()), Box::new(Relations), Box::new(RandomWalk { walks: 200 })],
        }
    }

    pub fn sw(&self, name: &str) -> Option<&dyn SwStrategy> {
        self.sw.iter().find(|s| s.name() == name).map(|b| b.as_ref())
    }

    pub fn tau(&self, name: &str) -> Option<&dyn TauStrategy> {
        self.tau.iter().find(|s| s.name() == name).map(|b| b.as_ref())
    }

    pub fn loops(&self, name: &str) -> Option<&dyn LoopPolicy> {
        self.loops.iter().find(|s| s.name() == name).map(|b| b.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::surface_group;
    use crate::nilpotent::FreeWord;

    #[test]
    fn sw_strategies_agree() {
        let r = Registry::standard();
        let g = surface_group(1, 3);
        let t: Vec<_> = ["x1 y1", "Y1 X1 X1", "x1 y1 X1"]
            .iter()
            .map(|s| g.log_of_word(&FreeWord::parse_surface(s).unwrap()))
            .collect();
        let a = r.sw("universal").unwrap().sw(&g, &t);
        let b = r.sw("direct").unwrap().sw(&g, &t);
        assert_eq!(a, b);
        assert!(r.tau("bivector").is_some() && r.loops("tree-cycles").is_some() && r.sw("none").is_none());
    }
}
