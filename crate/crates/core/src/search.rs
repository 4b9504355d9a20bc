//! Move sequences returning to the start fatgraph: the relation loops and
//! seeded searches, with filters by the induced automorphism.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automorphism::{induced_automorphism, is_identity};
use crate::fatgraph::{apply_move, FatgraphError, MarkedFatgraph, MoveSequence, PiMarking, Resolution};
use crate::nilpotent::FreeWord;

/// A way of producing return sequences from a start graph.
pub trait LoopPolicy: Send + Sync {
    fn name(&self) -> &'static str;
    fn search(&self, start: &MarkedFatgraph, seed: u64, depth: usize) -> Vec<MoveSequence>;
}

fn name_of(m: &MarkedFatgraph, e: usize) -> String {
    m.graph.edges()[e].name.clone()
}

/// Number of endpoints two internal edges share.
fn shared_ends(m: &MarkedFatgraph, e1: usize, e2: usize) -> usize {
    let g = &m.graph;
    let ends = |e: usize| g.edges()[e].halves.map(|h| g.vertex_of(h));
    let (a, b) = (ends(e1), ends(e2));
    a.iter().filter(|v| b.contains(v)).count()
}

/// `W1 W2 W1^-1 W2^-1` for every pair of movable edges with no common
/// endpoint.
pub fn commutativity_loops(m: &MarkedFatgraph) -> Vec<MoveSequence> {
    let edges = m.graph.movable_edges();
    let mut out = Vec::new();
    for (i, &e1) in edges.iter().enumerate() {
        for &e2 in &edges[i + 1..] {
            if shared_ends(m, e1, e2) != 0 {
                continue;
            }
            let (n1, n2) = (name_of(m, e1), name_of(m, e2));
            out.push(MoveSequence::new(
                m.clone(),
                vec![(n1.clone(), Resolution::A), (n2.clone(), Resolution::A), (n1, Resolution::B), (n2, Resolution::B)],
            ));
        }
    }
    out
}

/// Five alternating flips of two edges with exactly one common endpoint: the pentagon of the three dual triangles.
pub fn pentagon_loops(m: &MarkedFatgraph) -> Vec<MoveSequence> {
    let edges = m.graph.movable_edges();
    let mut out = Vec::new();
    for (i, &e1) in edges.iter().enumerate() {
        for &e2 in &edges[i + 1..] {
            if shared_ends(m, e1, e2) != 1 {
                continue;
            }
            let (n1, n2) = (name_of(m, e1), name_of(m, e2));
            let steps: Vec<(String, Resolution)> =
                (0..5).map(|j| (if j % 2 == 0 { n1.clone() } else { n2.clone() }, Resolution::A)).collect();
            let s = MoveSequence::new(m.clone(), steps);
            if matches!(s.is_loop(), Ok(true)) {
                out.push(s);
            }
        }
    }
    out
}

/// Pentagon and commutativity loops.
pub struct Relations;

impl LoopPolicy for Relations {
    fn name(&self) -> &'static str {
        "relations"
    }

    fn search(&self, start: &MarkedFatgraph, _seed: u64, depth: usize) -> Vec<MoveSequence> {
        let mut out = pentagon_loops(start);
        out.extend(commutativity_loops(start));
        out.retain(|s| s.len() <= depth);
        out
    }
}

/// Breadth-first search over isomorphism classes of underlying graphs.
/// Every flip that closes a cycle in the search tree gives a return
/// sequence: tree path, flip, reversed tree path.
pub struct TreeCycles {
    pub max_states: usize,
    pub max_loops: usize,
}

impl Default for TreeCycles {
    fn default() -> Self {
        TreeCycles { max_states: 4000, max_loops: 400 }
    }
}

struct State {
    graph: MarkedFatgraph,
    path: Vec<(String, Resolution)>,
}

impl LoopPolicy for TreeCycles {
    fn name(&self) -> &'static str {
        "tree-cycles"
    }

    fn search(&self, start: &MarkedFatgraph, seed: u64, depth: usize) -> Vec<MoveSequence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bare = MarkedFatgraph::new(
            start.genus,
            start.graph.clone(),
            PiMarking::from_values(vec![FreeWord::identity(); start.graph.half_edge_count()]),
        );
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut states = vec![State { graph: bare.clone(), path: Vec::new() }];
        index.insert(bare.graph.canonical_form(), 0);
        let mut out = Vec::new();
        let mut head = 0;
        while head < states.len() && out.len() < self.max_loops {
            let mut edges = states[head].graph.graph.movable_edges();
            edges.shuffle(&mut rng);
            for e in edges {
                let x = &states[head];
                let name = name_of(&x.graph, e);
                if x.path.last().is_some_and(|(n, _)| *n == name) {
                    continue;
                }
                let y = apply_move(&x.graph, &name, Resolution::A).expect("movable").target;
                let key = y.graph.canonical_form();
                let mut path = x.path.clone();
                path.push((name, Resolution::A));
                match index.get(&key) {
                    None => {
                        if path.len() <= depth / 2 && states.len() < self.max_states {
                            index.insert(key, states.len());
                            states.push(State { graph: y, path });
                        }
                    }
                    Some(&t) => {
                        if path.len() + states[t].path.len() > depth {
                            continue;
                        }
                        let back = MoveSequence::new(bare.clone(), states[t].path.clone());
                        let Ok(back) = back.reversed() else { continue };
                        let fwd = MoveSequence::new(start.clone(), path);
                        if let Ok(s) = fwd.then(&back) {
                            if cancels(&s) {
                                continue;
                            }
                            out.push(s);
                            if out.len() >= self.max_loops {
                                break;
                            }
                        }
                    }
                }
            }
            head += 1;
        }
        out
    }
}

/// Whether the sequence reduces to nothing by cancelling `W W^-1` pairs.
fn cancels(s: &MoveSequence) -> bool {
    let mut stack: Vec<&(String, Resolution)> = Vec::new();
    for st in &s.steps {
        if stack.last().is_some_and(|top| top.0 == st.0 && top.1 == st.1.reverse()) {
            stack.pop();
        } else {
            stack.push(st);
        }
    }
    stack.is_empty()
}

/// Random walks, recording every return to the start graph.
pub struct RandomWalk {
    pub walks: usize,
}

impl LoopPolicy for RandomWalk {
    fn name(&self) -> &'static str {
        "random-walk"
    }

    fn search(&self, start: &MarkedFatgraph, seed: u64, depth: usize) -> Vec<MoveSequence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let key = start.graph.canonical_form();
        let mut out = Vec::new();
        for _ in 0..self.walks {
            let mut cur = start.clone();
            let mut steps = Vec::new();
            for _ in 0..depth {
                let e = *cur.graph.movable_edges().choose(&mut rng).expect("a movable edge");
                let name = name_of(&cur, e);
                cur = apply_move(&cur, &name, Resolution::A).expect("movable").target;
                steps.push((name, Resolution::A));
                if cur.graph.canonical_form() == key {
                    let s = MoveSequence::new(start.clone(), steps.clone());
                    if !cancels(&s) {
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

/// Sequences whose induced automorphism is trivial at `class`.
pub fn trivial_at(seqs: &[MoveSequence], class: usize) -> Vec<MoveSequence> {
    seqs.iter()
        .filter(|s| {
            s.end()
                .ok()
                .and_then(|end| induced_automorphism(&s.start, &end, class).ok())
                .is_some_and(|f| is_identity(&f))
        })
        .cloned()
        .collect()
}

/// Products `S_i S_j^-1` of loops acting identically on `H`, which are
/// trivial on `H`; products acting trivially at `class` and duplicates by
/// action there are dropped.
pub fn torelli_products(loops: &[MoveSequence], class: usize, max: usize) -> Vec<MoveSequence> {
    let mut by_action: HashMap<Vec<crate::rational::Rational>, Vec<usize>> = HashMap::new();
    for (i, s) in loops.iter().enumerate() {
        let Ok(end) = s.end() else { continue };
        let Ok(f) = induced_automorphism(&s.start, &end, 1) else { continue };
        let key: Vec<_> = f.generator_images().iter().flat_map(|l| l.coeffs().to_vec()).collect();
        by_action.entry(key).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = by_action.into_values().filter(|v| v.len() >= 2).collect();
    groups.sort();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for grp in groups {
        for (a, &i) in grp.iter().enumerate() {
            for &j in &grp[a + 1..] {
                let Ok(inv) = loops[j].reversed() else { continue };
                let Ok(inv) = inv.transported(&loops[i].start) else { continue };
                let Ok(s) = loops[i].then(&inv) else { continue };
                let Ok(end) = s.end() else { continue };
                let Ok(f) = induced_automorphism(&s.start, &end, class) else { continue };
                if is_identity(&f) {
                    continue;
                }
                let key: Vec<_> = f.generator_images().iter().flat_map(|l| l.coeffs().to_vec()).collect();
                if seen.insert(key) {
                    out.push(s);
                    if out.len() >= max {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// `a b a^-1 b^-1` for loops based at isomorphic graphs, each factor
/// transported to where the previous one ends.
pub fn commutator(a: &MoveSequence, b: &MoveSequence) -> Result<MoveSequence, FatgraphError> {
    a.then(b)?.then(&a.reversed()?)?.then(&b.reversed()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatgraph::random_fixture;

    #[test]
    fn relation_loops_are_trivial() {
        let m = random_fixture(2, 7, &mut ChaCha8Rng::seed_from_u64(11));
        let pent = pentagon_loops(&m);
        let comm = commutativity_loops(&m);
        assert!(!pent.is_empty() && !comm.is_empty());
        for s in pent.iter().chain(&comm) {
            let end = s.end().unwrap();
            assert!(is_identity(&induced_automorphism(&m, &end, 3).unwrap()));
        }
        assert!(comm.iter().all(|s| s.end().unwrap() == m));
    }

    #[test]
    fn tree_cycles_return() {
        let m = random_fixture(1, 3, &mut ChaCha8Rng::seed_from_u64(1));
        let loops = TreeCycles::default().search(&m, 5, 10);
        assert!(!loops.is_empty());
        for s in &loops {
            assert!(s.is_loop().unwrap());
            assert!(s.len() <= 10);
        }
    }
}
