//! Bordered fatgraphs: half-edges with a pairing involution and cyclic
//! orders, pi-markings, the chains Z_G and T_W, and Whitehead moves.
//!
//! Conventions. The face walk starts at the external half-edge and steps
//! `d -> sigma(iota(d))`, where `sigma` is the counterclockwise successor at
//! a vertex. The marking value stored at a half-edge is the value of its
//! edge oriented towards that half-edge's vertex, so the vertex relation
//! reads `w(h1) w(h2) ... w(hk) = 1` over the counterclockwise order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::chains::BarChain;
use crate::nilpotent::FreeWord;
use crate::rational::Rational;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FatgraphError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("malformed fatgraph: {0}")]
    Structure(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("fatgraphs are not isomorphic")]
    NotIsomorphic,
    #[error("inconsistent marking equations: {0}")]
    Inconsistent(String),
}

/// The two ways of naming the flipped edge. Under `A` each half-edge keeps
/// the sector ending at its clockwise neighbour; under `B` the half-edges
/// trade places. `B` undoes `A` exactly and conversely.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resolution {
    A,
    B,
}

impl Resolution {
    pub fn reverse(self) -> Resolution {
        match self {
            Resolution::A => Resolution::B,
            Resolution::B => Resolution::A,
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resolution::A => "A",
            Resolution::B => "B",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    /// Half-edges; an edge's `+` direction points towards `halves[1]`.
    pub halves: [usize; 2],
}

/// Ribbon graph with one univalent external vertex, stored as vertex 0.
#[derive(Clone, Debug)]
pub struct Fatgraph {
    names: Vec<String>,
    iota: Vec<usize>,
    vertex_of: Vec<usize>,
    slot: Vec<usize>,
    vertices: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    edge_of: Vec<usize>,
    external: usize,
}

/// Equality of labelled graphs; vertex lists may differ by rotation.
impl PartialEq for Fatgraph {
    fn eq(&self, o: &Fatgraph) -> bool {
        self.names == o.names
            && self.iota == o.iota
            && self.edges == o.edges
            && self.external == o.external
            && self.vertices.len() == o.vertices.len()
            && (0..self.names.len()).all(|h| self.sigma(h) == o.sigma(h))
    }
}

impl Eq for Fatgraph {}

impl Fatgraph {
    /// Build from edges `(name, half, half)`, the external half-edge and the
    /// counterclockwise orders at the internal vertices.
    pub fn from_parts(
        edges: &[(String, String, String)],
        external: &str,
        vertices: &[Vec<String>],
    ) -> Result<Fatgraph, FatgraphError> {
        let err = |m: String| FatgraphError::Structure(m);
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut names = Vec::new();
        let mut iota = Vec::new();
        let mut edge_list = Vec::new();
        let mut edge_names: HashMap<&str, ()> = HashMap::new();
        for (e, (name, h0, h1)) in edges.iter().enumerate() {
            if edge_names.insert(name.as_str(), ()).is_some() {
                return Err(err(format!("duplicate edge `{name}`")));
            }
            let mut ids = [0; 2];
            for (k, h) in [h0, h1].into_iter().enumerate() {
                if index.contains_key(h) {
                    return Err(err(format!("duplicate half-edge `{h}`")));
                }
                ids[k] = names.len();
                index.insert(h.clone(), names.len());
                names.push(h.clone());
            }
            iota.push(ids[1]);
            iota.push(ids[0]);
            edge_list.push(Edge { name: name.clone(), halves: ids });
            debug_assert_eq!(edge_list.len(), e + 1);
        }
        let n = names.len();
        let ext = *index
            .get(external)
            .ok_or_else(|| err(format!("unknown external half-edge `{external}`")))?;
        let mut vlist = vec![vec![ext]];
        for v in vertices {
            let mut ids = Vec::with_capacity(v.len());
            for h in v {
                ids.push(*index.get(h).ok_or_else(|| err(format!("unknown half-edge `{h}`")))?);
            }
            if ids.is_empty() {
                return Err(err("empty vertex".into()));
            }
            vlist.push(ids);
        }
        let mut seen = vec![false; n];
        for v in &vlist {
            for &h in v {
                if seen[h] {
                    return Err(err(format!("half-edge `{}` placed twice", names[h])));
                }
                seen[h] = true;
            }
        }
        if let Some(h) = seen.iter().position(|s| !s) {
            return Err(err(format!("half-edge `{}` belongs to no vertex", names[h])));
        }
        Ok(Fatgraph::assemble(names, iota, vlist, edge_list, ext))
    }

    fn assemble(
        names: Vec<String>,
        iota: Vec<usize>,
        vertices: Vec<Vec<usize>>,
        edges: Vec<Edge>,
        external: usize,
    ) -> Fatgraph {
        let n = names.len();
        let mut vertex_of = vec![0; n];
        let mut slot = vec![0; n];
        for (v, hs) in vertices.iter().enumerate() {
            for (i, &h) in hs.iter().enumerate() {
                vertex_of[h] = v;
                slot[h] = i;
            }
        }
        let mut edge_of = vec![0; n];
        for (e, edge) in edges.iter().enumerate() {
            edge_of[edge.halves[0]] = e;
            edge_of[edge.halves[1]] = e;
        }
        Fatgraph { names, iota, vertex_of, slot, vertices, edges, edge_of, external }
    }

    pub fn half_edge_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn edge_of(&self, h: usize) -> usize {
        self.edge_of[h]
    }

    pub fn half_edge(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, h: usize) -> &str {
        &self.names[h]
    }

    pub fn iota(&self, h: usize) -> usize {
        self.iota[h]
    }

    /// Counterclockwise successor at the vertex of `h`.
    pub fn sigma(&self, h: usize) -> usize {
        let v = &self.vertices[self.vertex_of[h]];
        v[(self.slot[h] + 1) % v.len()]
    }

    pub fn external(&self) -> usize {
        self.external
    }

    /// The internal half-edge of the external edge.
    pub fn root(&self) -> usize {
        self.iota[self.external]
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex_of[h]
    }

    /// Internal vertices are `1..vertex_count()`; vertex 0 is external.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, v: usize) -> &[usize] {
        &self.vertices[v]
    }

    pub fn internal_vertex_count(&self) -> usize {
        self.vertices.len() - 1
    }

    /// `(1 - V + E) / 2`, counting the external vertex.
    pub fn genus(&self) -> Option<usize> {
        let chi = 1 + self.edges.len() as i64 - self.vertices.len() as i64;
        (chi >= 0 && chi % 2 == 0).then_some(chi as usize / 2)
    }

    pub fn is_trivalent(&self) -> bool {
        self.vertices[1..].iter().all(|v| v.len() == 3)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &h in &self.vertices[v] {
                let w = self.vertex_of[self.iota[h]];
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Number of boundary cycles.
    pub fn face_count(&self) -> usize {
        let n = self.names.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut d = start;
            while !seen[d] {
                seen[d] = true;
                d = self.sigma(self.iota[d]);
            }
        }
        count
    }

    /// The face walk from the external half-edge, one entry per passage.
    pub fn traversal(&self) -> Vec<usize> {
        let mut out = vec![self.external];
        let mut d = self.sigma(self.iota[self.external]);
        while d != self.external {
            out.push(d);
            d = self.sigma(self.iota[d]);
        }
        out
    }

    /// Step of the walk at which each half-edge is left.
    fn positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.names.len()];
        for (i, d) in self.traversal().into_iter().enumerate() {
            pos[d] = i;
        }
        pos
    }

    /// Head half-edge of each edge under the orientation of its first
    /// passage by the face walk.
    pub fn preferred_orientation(&self) -> Vec<usize> {
        let mut head = vec![usize::MAX; self.edges.len()];
        for d in self.traversal() {
            let e = self.edge_of[d];
            if head[e] == usize::MAX {
                head[e] = self.iota[d];
            }
        }
        head
    }

    /// Traversal labelling of the pairing; equal for isomorphic graphs
    /// (isomorphisms must fix the external vertex and the cyclic orders).
    pub fn canonical_form(&self) -> Vec<usize> {
        let t = self.traversal();
        let mut label = vec![usize::MAX; self.names.len()];
        for (i, &d) in t.iter().enumerate() {
            label[d] = i;
        }
        t.iter().map(|&d| label[self.iota[d]]).collect()
    }

    /// The unique isomorphism `self -> other` on half-edges, if any.
    pub fn isomorphism(&self, other: &Fatgraph) -> Option<Vec<usize>> {
        if self.names.len() != other.names.len() || self.canonical_form() != other.canonical_form() {
            return None;
        }
        let (t, u) = (self.traversal(), other.traversal());
        if t.len() != self.names.len() {
            return None;
        }
        let mut phi = vec![0; t.len()];
        for (a, b) in t.into_iter().zip(u) {
            phi[a] = b;
        }
        Some(phi)
    }

    /// Internal edges with two distinct trivalent endpoints.
    pub fn movable_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.check_movable(e).is_ok()).collect()
    }

    fn check_movable(&self, e: usize) -> Result<(usize, usize), FatgraphError> {
        let [a, b] = self.edges[e].halves;
        let (u, v) = (self.vertex_of[a], self.vertex_of[b]);
        let name = &self.edges[e].name;
        if u == 0 || v == 0 {
            return Err(FatgraphError::IllegalMove(format!("`{name}` is the external edge")));
        }
        if u == v {
            return Err(FatgraphError::IllegalMove(format!("`{name}` is a loop")));
        }
        if self.vertices[u].len() != 3 || self.vertices[v].len() != 3 {
            return Err(FatgraphError::IllegalMove(format!("`{name}` has a non-trivalent endpoint")));
        }
        Ok((a, b))
    }
}

/// Marking values indexed by half-edge, each oriented towards the vertex of
/// its half-edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiMarking {
    values: Vec<FreeWord>,
}

impl PiMarking {
    pub fn from_values(values: Vec<FreeWord>) -> Self {
        PiMarking { values }
    }

    pub fn value(&self, h: usize) -> &FreeWord {
        &self.values[h]
    }

    pub fn values(&self) -> &[FreeWord] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(&FreeWord) -> FreeWord) -> PiMarking {
        PiMarking { values: self.values.iter().map(f).collect() }
    }
}

/// Abelianized marking; only ever built from a `PiMarking`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HMarking {
    values: Vec<Vec<i64>>,
}

impl HMarking {
    pub fn from_pi(m: &PiMarking, rank: usize) -> Self {
        HMarking { values: m.values.iter().map(|w| w.abelianize(rank)).collect() }
    }

    pub fn value(&self, h: usize) -> &[i64] {
        &self.values[h]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedFatgraph {
    pub genus: usize,
    pub graph: Fatgraph,
    pub marking: PiMarking,
}

/// How the generation property of a marking is certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GenCheck {
    /// Stallings folding: the values generate the free group.
    #[default]
    Pi,
    /// Smith form: the abelianized values span `Z^{2g}`.
    H,
}

impl fmt::Display for GenCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenCheck::Pi => "pi",
            GenCheck::H => "h",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Problem {
    Disconnected,
    FaceCount(usize),
    EulerCharacteristic,
    GenusMismatch { declared: usize, computed: usize },
    NotTrivalent { vertex: String },
    InverseMismatch { edge: String },
    VertexRelation { vertex: String },
    LetterOutOfRange { edge: String },
    Generation(GenCheck),
    Zeta { found: FreeWord },
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Disconnected => write!(f, "graph is disconnected"),
            Problem::FaceCount(n) => write!(f, "{n} boundary cycles, expected 1"),
            Problem::EulerCharacteristic => write!(f, "1 - V + E is not a nonnegative even number"),
            Problem::GenusMismatch { declared, computed } => {
                write!(f, "declared genus {declared}, computed {computed}")
            }
            Problem::NotTrivalent { vertex } => write!(f, "vertex ({vertex}) is not trivalent"),
            Problem::InverseMismatch { edge } => write!(f, "edge {edge}: opposite values are not inverse"),
            Problem::VertexRelation { vertex } => write!(f, "vertex ({vertex}): relation fails"),
            Problem::LetterOutOfRange { edge } => write!(f, "edge {edge}: letter outside the surface group"),
            Problem::Generation(GenCheck::Pi) => write!(f, "values do not generate pi (folding)"),
            Problem::Generation(GenCheck::H) => write!(f, "values do not span H (Smith form)"),
            Problem::Zeta { found } => write!(f, "external edge carries `{}`, not zeta", word_string(found)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub genus: Option<usize>,
    pub internal_vertices: usize,
    pub edges: usize,
    pub trivalent: bool,
    pub gen_check: GenCheck,
    pub problems: Vec<Problem>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.genus {
            Some(g) => writeln!(f, "genus = {g}")?,
            None => writeln!(f, "genus = ?")?,
        }
        writeln!(f, "internal vertices = {}", self.internal_vertices)?;
        writeln!(f, "edges = {}", self.edges)?;
        writeln!(f, "trivalent = {}", self.trivalent)?;
        writeln!(f, "generation check = {}", self.gen_check)?;
        for p in &self.problems {
            writeln!(f, "error: {p}")?;
        }
        write!(f, "status = {}", if self.is_valid() { "OK" } else { "FAILED" })
    }
}

fn vertex_label(g: &Fatgraph, v: usize) -> String {
    g.vertex(v).iter().map(|&h| g.name(h)).collect::<Vec<_>>().join(" ")
}

/// Surface-syntax rendering with `1` for the identity.
pub fn word_string(w: &FreeWord) -> String {
    if w.is_empty() {
        "1".into()
    } else {
        w.to_surface_string()
    }
}

fn parse_word(s: &str) -> Result<FreeWord, String> {
    let s = s.trim();
    if s == "1" {
        return Ok(FreeWord::identity());
    }
    FreeWord::parse_surface(s).map_err(|e| e.to_string())
}

impl MarkedFatgraph {
    pub fn new(genus: usize, graph: Fatgraph, marking: PiMarking) -> Self {
        MarkedFatgraph { genus, graph, marking }
    }

    pub fn rank(&self) -> usize {
        2 * self.genus
    }

    /// Value of edge `e` in its `+` direction.
    pub fn edge_value(&self, e: usize) -> &FreeWord {
        self.marking.value(self.graph.edges[e].halves[1])
    }

    pub fn h_marking(&self) -> HMarking {
        HMarking::from_pi(&self.marking, self.rank())
    }

    pub fn validate(&self, mode: GenCheck) -> ValidationReport {
        let g = &self.graph;
        let mut problems = Vec::new();
        if !g.is_connected() {
            problems.push(Problem::Disconnected);
        }
        let faces = g.face_count();
        if faces != 1 {
            problems.push(Problem::FaceCount(faces));
        }
        let genus = g.genus();
        match genus {
            None => problems.push(Problem::EulerCharacteristic),
            Some(c) if c != self.genus => {
                problems.push(Problem::GenusMismatch { declared: self.genus, computed: c })
            }
            _ => {}
        }
        for v in 1..g.vertex_count() {
            if g.vertex(v).len() != 3 {
                problems.push(Problem::NotTrivalent { vertex: vertex_label(g, v) });
            }
        }
        let rank = self.rank();
        for e in &g.edges {
            let [a, b] = e.halves;
            let (wa, wb) = (self.marking.value(a), self.marking.value(b));
            if !wa.mul(wb).is_empty() {
                problems.push(Problem::InverseMismatch { edge: e.name.clone() });
            }
            if wb.support_rank() > rank || wa.support_rank() > rank {
                problems.push(Problem::LetterOutOfRange { edge: e.name.clone() });
            }
        }
        for v in 1..g.vertex_count() {
            let mut w = FreeWord::identity();
            for &h in g.vertex(v) {
                w = w.mul(self.marking.value(h));
            }
            if !w.is_empty() {
                problems.push(Problem::VertexRelation { vertex: vertex_label(g, v) });
            }
        }
        let values: Vec<FreeWord> = (0..g.edges.len()).map(|e| self.edge_value(e).clone()).collect();
        let generates = match mode {
            GenCheck::Pi => folds_to_rose(&values, rank),
            GenCheck::H => spans_lattice(&values, rank),
        };
        if !generates {
            problems.push(Problem::Generation(mode));
        }
        let z = self.marking.value(g.root());
        if *z != FreeWord::zeta(self.genus) {
            problems.push(Problem::Zeta { found: z.clone() });
        }
        ValidationReport {
            genus,
            internal_vertices: g.internal_vertex_count(),
            edges: g.edges.len(),
            trivalent: g.is_trivalent(),
            gen_check: mode,
            problems,
        }
    }

    /// `f(w(h)) = w'(phi(h))` for all half-edges, `phi` the isomorphism
    /// of underlying graphs.
    pub fn same_marking(&self, other: &MarkedFatgraph) -> bool {
        match self.graph.isomorphism(&other.graph) {
            Some(phi) => (0..phi.len()).all(|h| self.marking.value(h) == other.marking.value(phi[h])),
            None => false,
        }
    }

    pub fn parse(text: &str) -> Result<MarkedFatgraph, FatgraphError> {
        let perr = |line: usize, column: usize, message: String| FatgraphError::Parse { line, column, message };
        let mut genus = None;
        let mut edges = Vec::new();
        let mut external = None;
        let mut vertices = Vec::new();
        let mut marks: Vec<(usize, usize, String, bool, FreeWord)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("");
            let toks = tokens(body);
            let Some(&(col, key)) = toks.first() else { continue };
            let args = &toks[1..];
            match key {
                "genus" => {
                    let [(c, v)] = args else {
                        return Err(perr(line, col, "expected `genus N`".into()));
                    };
                    genus = Some(v.parse::<usize>().map_err(|_| perr(line, *c, format!("bad genus `{v}`")))?);
                }
                "edge" => {
                    let [(_, n), (_, a), (_, b)] = args else {
                        return Err(perr(line, col, "expected `edge NAME HALF HALF`".into()));
                    };
                    edges.push((n.to_string(), a.to_string(), b.to_string()));
                }
                "external" => {
                    let [(_, h)] = args else {
                        return Err(perr(line, col, "expected `external HALF`".into()));
                    };
                    external = Some(h.to_string());
                }
                "vertex" => {
                    if args.is_empty() {
                        return Err(perr(line, col, "empty vertex".into()));
                    }
                    vertices.push(args.iter().map(|(_, h)| h.to_string()).collect::<Vec<_>>());
                }
                "mark" => {
                    if args.len() < 3 {
                        return Err(perr(line, col, "expected `mark EDGE +|- WORD`".into()));
                    }
                    let (dc, dir) = args[1];
                    let plus = match dir {
                        "+" => true,
                        "-" => false,
                        _ => return Err(perr(line, dc, format!("bad direction `{dir}`"))),
                    };
                    let wc = args[2].0;
                    let text = &body[wc - 1..];
                    let w = parse_word(text).map_err(|m| perr(line, wc, m))?;
                    marks.push((line, args[0].0, args[0].1.to_string(), plus, w));
                }
                other => return Err(perr(line, col, format!("unknown keyword `{other}`"))),
            }
        }
        let genus = genus.ok_or_else(|| perr(0, 0, "missing `genus`".into()))?;
        let external = external.ok_or_else(|| perr(0, 0, "missing `external`".into()))?;
        let graph = Fatgraph::from_parts(&edges, &external, &vertices)?;
        let mut values: Vec<Option<FreeWord>> = vec![None; graph.half_edge_count()];
        for (line, col, name, plus, w) in marks {
            let e = graph.edge(&name).ok_or_else(|| perr(line, col, format!("unknown edge `{name}`")))?;
            let [a, b] = graph.edges[e].halves;
            if values[b].is_some() {
                return Err(perr(line, col, format!("edge `{name}` marked twice")));
            }
            let w = if plus { w } else { w.inverse() };
            values[a] = Some(w.inverse());
            values[b] = Some(w);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(h, v)| {
                v.ok_or_else(|| perr(0, 0, format!("edge `{}` is unmarked", graph.edges[graph.edge_of(h)].name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MarkedFatgraph { genus, graph, marking: PiMarking { values } })
    }

    /// File rendering; `parse` inverts it.
    pub fn to_file_string(&self) -> String {
        let g = &self.graph;
        let mut s = format!("genus {}\n", self.genus);
        for e in &g.edges {
            s += &format!("edge {} {} {}\n", e.name, g.name(e.halves[0]), g.name(e.halves[1]));
        }
        s += &format!("external {}\n", g.name(g.external));
        for v in 1..g.vertex_count() {
            s += &format!("vertex {}\n", vertex_label(g, v));
        }
        let mut order: Vec<usize> = (0..g.edges.len()).collect();
        order.sort_by(|&a, &b| g.edges[a].name.cmp(&g.edges[b].name));
        for e in order {
            s += &format!("mark {} + {}\n", g.edges[e].name, word_string(self.edge_value(e)));
        }
        s
    }
}

/// Whitespace-separated tokens with their 1-based byte columns.
fn tokens(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((st + 1, &s[st..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((st + 1, &s[st..]));
    }
    out
}

/// Stallings folding of the wedge of loops spelling `words`; the subgroup
/// is everything iff the folded graph is the rose on all `rank` letters.
pub fn folds_to_rose(words: &[FreeWord], rank: usize) -> bool {
    let mut adj: Vec<Vec<(i32, usize)>> = vec![Vec::new()];
    for w in words {
        let letters = w.letters();
        if letters.is_empty() {
            continue;
        }
        let mut cur = 0;
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() {
                0
            } else {
                adj.push(Vec::new());
                adj.len() - 1
            };
            adj[cur].push((l, next));
            adj[next].push((-l, cur));
            cur = next;
        }
    }
    let n = adj.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut queue: Vec<usize> = (0..n).collect();
    while let Some(v) = queue.pop() {
        let v = find(&mut parent, v);
        let mut by_label: BTreeMap<i32, usize> = BTreeMap::new();
        let mut merges = Vec::new();
        let edges = std::mem::take(&mut adj[v]);
        let mut kept = Vec::new();
        for (l, t) in edges {
            let t = find(&mut parent, t);
            match by_label.get(&l) {
                Some(&u) if u == t => {}
                Some(&u) => merges.push((u, t)),
                None => {
                    by_label.insert(l, t);
                    kept.push((l, t));
                }
            }
        }
        adj[v] = kept;
        for (a, b) in merges {
            let (a, b) = (find(&mut parent, a), find(&mut parent, b));
            if a == b {
                continue;
            }
            parent[b] = a;
            let moved = std::mem::take(&mut adj[b]);
            adj[a].extend(moved);
            queue.push(a);
            // Edges into `b` are found through `find` on the next visit.
            queue.push(find(&mut parent, v));
        }
    }
    let reps: Vec<usize> = (0..n).filter(|&v| find(&mut parent, v) == v).collect();
    if reps.len() != 1 {
        return false;
    }
    let root = reps[0];
    (1..=rank as i32).all(|g| adj[root].iter().any(|&(l, _)| l == g))
}

/// Whether the exponent-sum vectors of `words` span `Z^rank`.
pub fn spans_lattice(words: &[FreeWord], rank: usize) -> bool {
    let mut rows: Vec<Vec<BigInt>> = words
        .iter()
        .map(|w| w.abelianize(rank).into_iter().map(BigInt::from).collect())
        .collect();
    // Hermite reduction column by column; the lattice is Z^rank iff every
    // pivot is a unit.
    let mut top = 0;
    for col in 0..rank {
        loop {
            let mut best: Option<usize> = None;
            for r in top..rows.len() {
                if !rows[r][col].is_zero()
                    && best.is_none_or(|b| rows[r][col].abs() < rows[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(p) = best else { return false };
            rows.swap(top, p);
            let mut done = true;
            for r in top + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let q = &rows[r][col] / &rows[top][col];
                let pivot = rows[top].clone();
                for (x, y) in rows[r].iter_mut().zip(&pivot) {
                    *x -= &q * y;
                }
                if !rows[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[top][col].abs() != BigInt::from(1) {
            return false;
        }
        top += 1;
    }
    true
}

/// Sector `(h, sigma h)` is entered at the step that leaves by `sigma h`.
fn potentials(marking: &PiMarking, ccw: &[usize]) -> Vec<FreeWord> {
    // Corner i is the sector (ccw[i], ccw[i+1]); crossing ccw[i+1]
    // counterclockwise from corner i to corner i+1 reads w(ccw[i+1]).
    let mut out = vec![FreeWord::identity()];
    for i in 1..ccw.len() {
        let next = out[i - 1].mul(marking.value(ccw[i]));
        out.push(next);
    }
    out
}

/// Corners sorted from source to sink of the dual edge orientation. A dual
/// side runs from the later-visited corner to the earlier one, so this is
/// the reverse of the visiting order.
fn source_to_sink<const N: usize>(time: &[usize; N]) -> [usize; N] {
    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by_key(|&i| std::cmp::Reverse(time[i]));
    order
}

/// `Z_G`: one term per internal vertex, read off the preferred orientation.
pub fn z_chain(m: &MarkedFatgraph) -> BarChain<FreeWord> {
    let g = &m.graph;
    let head = g.preferred_orientation();
    let w = |h: usize| m.marking.value(h).clone();
    let mut out = BarChain::new();
    for v in 1..g.vertex_count() {
        let hs = g.vertex(v);
        assert_eq!(hs.len(), 3, "z_chain needs a trivalent graph");
        let inward: Vec<bool> = hs.iter().map(|&h| head[g.edge_of(h)] == h).collect();
        let n_in = inward.iter().filter(|&&b| b).count();
        match n_in {
            1 => {
                let i = inward.iter().position(|&b| b).unwrap();
                let (a, b) = (hs[(i + 1) % 3], hs[(i + 2) % 3]);
                out.add_term(vec![w(b).inverse(), w(a).inverse()], &Rational::one());
            }
            2 => {
                let o = inward.iter().position(|&b| !b).unwrap();
                let (a, b) = (hs[(o + 1) % 3], hs[(o + 2) % 3]);
                out.add_term(vec![w(a), w(b)], &Rational::from_int(-1));
            }
            _ => panic!("vertex ({}) has no source-sink ordering", vertex_label(g, v)),
        }
    }
    out
}

/// `Z_G` recomputed on the dual triangles. Each dual side is oriented by the
/// preferred orientation of its edge, which orders the corners from source
/// to sink; the sign is `+1` iff that order is counterclockwise. Equals
/// `-Z_G`.
pub fn dual_triangle_chain(m: &MarkedFatgraph) -> BarChain<FreeWord> {
    let g = &m.graph;
    let pos = g.positions();
    let mut out = BarChain::new();
    for v in 1..g.vertex_count() {
        let hs = g.vertex(v);
        assert_eq!(hs.len(), 3, "dual triangles need a trivalent graph");
        let p = potentials(&m.marking, hs);
        let time: [usize; 3] = std::array::from_fn(|i| pos[hs[(i + 1) % 3]]);
        let order = source_to_sink(&time);
        let ccw = (order[1] + 3 - order[0]) % 3 == 1;
        let gij = |i: usize, j: usize| p[order[i]].inverse().mul(&p[order[j]]);
        let sign = if ccw { 1 } else { -1 };
        out.add_term(vec![gij(0, 1), gij(1, 2)], &Rational::from_int(sign));
    }
    out
}

/// Counterclockwise order of traversal labels around the transition vertex,
/// read from the corner labelled 0, one row per move type pair.
pub const PATTERNS: [[usize; 4]; 6] =
    [[0, 2, 1, 3], [0, 3, 1, 2], [0, 1, 2, 3], [0, 3, 2, 1], [0, 1, 3, 2], [0, 2, 3, 1]];

/// Sign of the forward move of each pattern row.
pub const FORWARD_SIGNS: [i64; 6] = [1, -1, -1, 1, 1, -1];

/// `S_TABLE[row][t]`: sign of `T_W` for pattern `row`, `t = 1` iff the
/// source edge's dual diagonal ends at corner 0. Certified by the boundary
/// identity `d T_W = Z_G - Z_G'`.
pub const S_TABLE: [[i64; 2]; 6] = [[1, -1], [-1, 1], [-1, 1], [1, -1], [1, -1], [-1, 1]];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhiteheadMove {
    pub edge: String,
    pub resolution: Resolution,
    pub source: MarkedFatgraph,
    pub target: MarkedFatgraph,
    /// Pattern row and whether the source diagonal touches corner 0.
    pub pattern: usize,
    pub touches_zero: bool,
    /// Type in `1..=12`: `2 row + 1` when `s` is the forward sign of the row.
    pub type_index: usize,
    pub s: i64,
    pub k: FreeWord,
    pub h: FreeWord,
    pub g: FreeWord,
    /// Values of the outer edges `a1, a2, b1, b2`, oriented into the
    /// quadrilateral, in counterclockwise order.
    pub outer: [FreeWord; 4],
}

impl WhiteheadMove {
    /// `T_W = s (k | h | g)`.
    pub fn t_chain(&self) -> BarChain<FreeWord> {
        BarChain::single(vec![self.k.clone(), self.h.clone(), self.g.clone()], Rational::from_int(self.s))
    }

    /// The move undoing this one.
    pub fn reverse(&self) -> WhiteheadMove {
        apply_move(&self.target, &self.edge, self.resolution.reverse()).expect("reverse of a legal move")
    }
}

/// Local data of a move on edge `e = (a, b)` with `u = (a, a1, a2)` and
/// `v = (b, b1, b2)` counterclockwise. The transition vertex has
/// counterclockwise order `(a1, a2, b1, b2)` and corners
/// `(a1,a2), (a2,b1), (b1,b2), (b2,a1)`.
struct Local {
    a: usize,
    b: usize,
    a1: usize,
    a2: usize,
    b1: usize,
    b2: usize,
}

fn local(g: &Fatgraph, e: usize) -> Result<Local, FatgraphError> {
    let (a, b) = g.check_movable(e)?;
    let (a1, b1) = (g.sigma(a), g.sigma(b));
    Ok(Local { a, b, a1, a2: g.sigma(a1), b1, b2: g.sigma(b1) })
}

/// Pattern row, diagonal flag, labels `(k, h, g)` and the corner order.
fn classify(m: &MarkedFatgraph, l: &Local) -> (usize, bool, [FreeWord; 3]) {
    let pos = m.graph.positions();
    let time = [pos[l.a2], pos[l.a], pos[l.b2], pos[l.b]];
    let by_time = source_to_sink(&time);
    let mut label = [0usize; 4];
    for (lab, &c) in by_time.iter().enumerate() {
        label[c] = lab;
    }
    let c0 = by_time[0];
    let pattern: [usize; 4] = std::array::from_fn(|j| label[(c0 + j) % 4]);
    let row = PATTERNS.iter().position(|p| *p == pattern).expect("a cyclic order of four labels");
    let touches_zero = c0 % 2 == 1;
    let p = potentials(&m.marking, &[l.a1, l.a2, l.b1, l.b2]);
    let gij = |i: usize, j: usize| p[by_time[i]].inverse().mul(&p[by_time[j]]);
    (row, touches_zero, [gij(0, 1), gij(1, 2), gij(2, 3)])
}

/// Flip the edge named `edge`, transporting the marking.
pub fn apply_move(m: &MarkedFatgraph, edge: &str, r: Resolution) -> Result<WhiteheadMove, FatgraphError> {
    let g = &m.graph;
    let e = g.edge(edge).ok_or_else(|| FatgraphError::IllegalMove(format!("unknown edge `{edge}`")))?;
    let l = local(g, e)?;
    let (row, touches_zero, [k, h, gg]) = classify(m, &l);
    let target = flip(m, &l, r);
    let s = S_TABLE[row][touches_zero as usize];
    let type_index = 2 * row + if s == FORWARD_SIGNS[row] { 1 } else { 2 };
    Ok(WhiteheadMove {
        edge: edge.to_string(),
        resolution: r,
        source: m.clone(),
        target,
        pattern: row,
        touches_zero,
        type_index,
        s,
        k,
        h,
        g: gg,
        outer: [l.a1, l.a2, l.b1, l.b2].map(|x| m.marking.value(x).clone()),
    })
}

fn flip(m: &MarkedFatgraph, l: &Local, r: Resolution) -> MarkedFatgraph {
    let g = &m.graph;
    let (u, v) = (g.vertex_of[l.a], g.vertex_of[l.b]);
    // Under A half-edge a joins (a2, b1); under B half-edge b does.
    let (p, q) = match r {
        Resolution::A => (l.a, l.b),
        Resolution::B => (l.b, l.a),
    };
    let mut vertices = g.vertices.clone();
    vertices[u] = vec![p, l.a2, l.b1];
    vertices[v] = vec![q, l.b2, l.a1];
    let mut values = m.marking.values.clone();
    let wp = m.marking.value(l.a2).mul(m.marking.value(l.b1)).inverse();
    values[q] = wp.inverse();
    values[p] = wp;
    let graph = Fatgraph::assemble(g.names.clone(), g.iota.clone(), vertices, g.edges.clone(), g.external);
    MarkedFatgraph { genus: m.genus, graph, marking: PiMarking { values } }
}

/// Moves named on a start graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveSequence {
    pub start: MarkedFatgraph,
    pub steps: Vec<(String, Resolution)>,
}

impl MoveSequence {
    pub fn new(start: MarkedFatgraph, steps: Vec<(String, Resolution)>) -> Self {
        MoveSequence { start, steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn evaluate(&self) -> Result<Vec<WhiteheadMove>, FatgraphError> {
        let mut cur = self.start.clone();
        let mut out = Vec::with_capacity(self.steps.len());
        for (e, r) in &self.steps {
            let mv = apply_move(&cur, e, *r)?;
            cur = mv.target.clone();
            out.push(mv);
        }
        Ok(out)
    }

    pub fn end(&self) -> Result<MarkedFatgraph, FatgraphError> {
        let mut cur = self.start.clone();
        for (e, r) in &self.steps {
            cur = apply_move(&cur, e, *r)?.target;
        }
        Ok(cur)
    }

    /// Whether the end graph is isomorphic to the start graph.
    pub fn is_loop(&self) -> Result<bool, FatgraphError> {
        Ok(self.end()?.graph.isomorphism(&self.start.graph).is_some())
    }

    /// The inverse sequence, starting at this one's end.
    pub fn reversed(&self) -> Result<MoveSequence, FatgraphError> {
        let steps = self.steps.iter().rev().map(|(e, r)| (e.clone(), r.reverse())).collect();
        Ok(MoveSequence { start: self.end()?, steps })
    }

    /// The same moves replayed from `start`, whose graph must be isomorphic
    /// to this sequence's start graph.
    pub fn transported(&self, start: &MarkedFatgraph) -> Result<MoveSequence, FatgraphError> {
        let phi = self.start.graph.isomorphism(&start.graph).ok_or(FatgraphError::NotIsomorphic)?;
        let g = &self.start.graph;
        let steps = self
            .steps
            .iter()
            .map(|(e, r)| {
                let idx = g.edge(e).ok_or_else(|| FatgraphError::IllegalMove(format!("unknown edge `{e}`")))?;
                let image = start.graph.edge_of(phi[g.edges[idx].halves[0]]);
                Ok((start.graph.edges[image].name.clone(), *r))
            })
            .collect::<Result<Vec<_>, FatgraphError>>()?;
        Ok(MoveSequence { start: start.clone(), steps })
    }

    /// `self` followed by `other` replayed from `self`'s end.
    pub fn then(&self, other: &MoveSequence) -> Result<MoveSequence, FatgraphError> {
        let tail = other.transported(&self.end()?)?;
        let mut steps = self.steps.clone();
        steps.extend(tail.steps);
        Ok(MoveSequence { start: self.start.clone(), steps })
    }

    /// Lines `edge-name A|B`.
    pub fn parse_steps(text: &str) -> Result<Vec<(String, Resolution)>, FatgraphError> {
        let mut out = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("");
            let toks = tokens(body);
            if toks.is_empty() {
                continue;
            }
            let [(_, e), (c, r)] = toks[..] else {
                return Err(FatgraphError::Parse {
                    line: ln + 1,
                    column: toks[0].0,
                    message: "expected `EDGE A|B`".into(),
                });
            };
            let r = match r {
                "A" => Resolution::A,
                "B" => Resolution::B,
                _ => {
                    return Err(FatgraphError::Parse {
                        line: ln + 1,
                        column: c,
                        message: format!("bad resolution `{r}`"),
                    })
                }
            };
            out.push((e.to_string(), r));
        }
        Ok(out)
    }

    pub fn steps_string(&self) -> String {
        self.steps.iter().map(|(e, r)| format!("{e} {r}\n")).collect()
    }
}

/// Bar chain `(zeta)`.
pub fn zeta_chain(genus: usize) -> BarChain<FreeWord> {
    BarChain::single(vec![FreeWord::zeta(genus)], Rational::one())
}

struct Builder {
    names: Vec<String>,
    iota: Vec<usize>,
    edges: Vec<Edge>,
    values: Vec<FreeWord>,
}

impl Builder {
    /// New edge with `+` value `w`; returns `(tail half, head half)`.
    fn edge(&mut self, w: FreeWord) -> (usize, usize) {
        let (t, h) = (self.names.len(), self.names.len() + 1);
        self.names.push(format!("h{t}"));
        self.names.push(format!("h{h}"));
        self.iota.push(h);
        self.iota.push(t);
        self.edges.push(Edge { name: format!("e{}", self.edges.len()), halves: [t, h] });
        self.values.push(w.inverse());
        self.values.push(w);
        (t, h)
    }
}

/// Trivalent genus-`g` graph: a rose on one vertex of valence `4g + 1`
/// split into a caterpillar.
pub fn caterpillar(genus: usize) -> MarkedFatgraph {
    assert!(genus >= 1);
    let mut b = Builder { names: Vec::new(), iota: Vec::new(), edges: Vec::new(), values: Vec::new() };
    let (ext, root) = b.edge(FreeWord::zeta(genus));
    let mut big = vec![root];
    // Petal block i spells [a, b] with (a, b) = (y_j, x_j), j = g - i, so the
    // vertex relation reads zeta * zeta^-1.
    for i in 0..genus {
        let j = genus - 1 - i;
        let (pa, qa) = b.edge(FreeWord::generator(2 * j + 1));
        let (pb, qb) = b.edge(FreeWord::generator(2 * j));
        big.extend([qa, qb, pa, pb]);
    }
    let mut vertices = vec![vec![ext]];
    while big.len() > 3 {
        let (c0, c1) = (big[0], big[1]);
        let w = b.values[c0].mul(&b.values[c1]);
        let (t, h) = b.edge(w);
        vertices.push(vec![c0, c1, t]);
        let mut rest = vec![h];
        rest.extend_from_slice(&big[2..]);
        big = rest;
    }
    vertices.push(big);
    let graph = Fatgraph::assemble(b.names, b.iota, vertices, b.edges, ext);
    MarkedFatgraph { genus, graph, marking: PiMarking { values: b.values } }
}

/// `caterpillar(genus)` scrambled by `steps` random moves.
pub fn random_fixture(genus: usize, steps: usize, rng: &mut impl Rng) -> MarkedFatgraph {
    let mut m = caterpillar(genus);
    for _ in 0..steps {
        let e = *m.graph.movable_edges().choose(rng).expect("a movable edge");
        let r = if rng.gen_bool(0.5) { Resolution::A } else { Resolution::B };
        let name = m.graph.edges[e].name.clone();
        m = apply_move(&m, &name, r).expect("movable").target;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{bar_boundary, FreeGroup};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn caterpillars_are_valid() {
        for genus in 1..=3 {
            let m = caterpillar(genus);
            let r = m.validate(GenCheck::Pi);
            assert!(r.is_valid(), "{r}");
            assert_eq!(r.internal_vertices, 4 * genus - 1);
            assert_eq!(r.edges, 6 * genus - 1);
        }
    }

    #[test]
    fn z_boundary_is_minus_zeta() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for genus in 1..=3 {
            for steps in [0, 3, 10] {
                let m = random_fixture(genus, steps, &mut rng);
                let z = z_chain(&m);
                assert_eq!(bar_boundary(&FreeGroup, &z), zeta_chain(genus).scaled(&Rational::from_int(-1)));
                assert_eq!(dual_triangle_chain(&m), z.scaled(&Rational::from_int(-1)));
            }
        }
    }

    #[test]
    fn move_boundary_identity_all_types() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut types = std::collections::BTreeSet::new();
        for _ in 0..60 {
            let genus = rng.gen_range(1..=3);
            let m = random_fixture(genus, 6, &mut rng);
            for e in m.graph.movable_edges() {
                let name = m.graph.edges()[e].name.clone();
                for r in [Resolution::A, Resolution::B] {
                    let mv = apply_move(&m, &name, r).unwrap();
                    assert!(mv.target.validate(GenCheck::Pi).is_valid());
                    let lhs = bar_boundary(&FreeGroup, &mv.t_chain());
                    assert_eq!(lhs, z_chain(&m).sub(&z_chain(&mv.target)), "type {}", mv.type_index);
                    types.insert(mv.type_index);
                    let back = mv.reverse();
                    assert_eq!(back.target, m);
                    assert_eq!(back.s, -mv.s);
                    assert_eq!((&back.k, &back.h, &back.g), (&mv.k, &mv.h, &mv.g));
                    assert_eq!(back.type_index + mv.type_index, 4 * mv.pattern + 3);
                }
            }
        }
        assert_eq!(types.len(), 12);
    }

    #[test]
    fn forward_moves_avoid_corner_zero() {
        for (row, signs) in S_TABLE.iter().enumerate() {
            assert_eq!(signs[0], FORWARD_SIGNS[row]);
            assert_eq!(signs[1], -FORWARD_SIGNS[row]);
        }
    }

    #[test]
    fn resolutions_name_the_same_flip() {
        let m = random_fixture(2, 5, &mut ChaCha8Rng::seed_from_u64(3));
        for e in m.graph.movable_edges() {
            let name = m.graph.edges()[e].name.clone();
            let a = apply_move(&m, &name, Resolution::A).unwrap();
            let b = apply_move(&m, &name, Resolution::B).unwrap();
            assert!(a.target.same_marking(&b.target));
            assert_eq!(a.t_chain(), b.t_chain());
            let aa = apply_move(&a.target, &name, Resolution::A).unwrap();
            assert!(aa.target.same_marking(&m));
        }
    }

    #[test]
    fn file_round_trip() {
        let m = random_fixture(2, 8, &mut ChaCha8Rng::seed_from_u64(5));
        let text = m.to_file_string();
        let back = MarkedFatgraph::parse(&text).unwrap();
        assert_eq!(back.to_file_string(), text);
        assert!(back.same_marking(&m));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = MarkedFatgraph::parse("genus 1\nedge e0 a\n").unwrap_err();
        assert_eq!(e, FatgraphError::Parse { line: 2, column: 1, message: "expected `edge NAME HALF HALF`".into() });
        let e = MarkedFatgraph::parse("genus 1\nmark e0 * x1\n").unwrap_err();
        assert!(matches!(e, FatgraphError::Parse { line: 2, column: 9, .. }));
    }

    #[test]
    fn folding_and_lattice() {
        let x = FreeWord::generator(0);
        let y = FreeWord::generator(1);
        assert!(folds_to_rose(&[x.clone(), y.clone()], 2));
        assert!(folds_to_rose(&[x.mul(&y), y.clone()], 2));
        assert!(!folds_to_rose(std::slice::from_ref(&x), 2));
        // x^2 and y span a proper subgroup; the commutator is H-invisible.
        assert!(!folds_to_rose(&[x.mul(&x), y.clone()], 2));
        assert!(!spans_lattice(&[x.mul(&x), y.clone()], 2));
        let xyx = x.mul(&y).mul(&x.inverse());
        assert!(spans_lattice(&[xyx.clone(), x.clone()], 2));
        assert!(folds_to_rose(&[xyx, x.clone()], 2));
        assert!(!folds_to_rose(&[x.mul(&y).mul(&x), y.mul(&x).mul(&y)], 2));
    }

    #[test]
    fn preferred_orientation_covers_every_edge() {
        let m = random_fixture(2, 10, &mut ChaCha8Rng::seed_from_u64(9));
        let head = m.graph.preferred_orientation();
        assert_eq!(head[m.graph.edge_of(m.graph.external())], m.graph.root());
        let mut passes = vec![0; m.graph.edges().len()];
        for d in m.graph.traversal() {
            passes[m.graph.edge_of(d)] += 1;
        }
        assert!(passes.iter().all(|&p| p == 2));
    }
}
