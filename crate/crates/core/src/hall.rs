//! Hall bases of free nilpotent Lie algebras over the rationals.
//!
//! Basis words are ordered by degree and then lexicographically on their
//! leaf sequence. A bracket `[a, b]` is a basis word when `a < b` and either
//! `b` is a generator or `b = [c, d]` with `c <= a`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::rational::Rational;
use crate::sparse::SparseVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HallWord {
    Gen(usize),
    Bracket(usize, usize),
}

#[derive(Debug)]
pub struct HallBasis {
    rank: usize,
    class: usize,
    names: Vec<String>,
    words: Vec<HallWord>,
    degree: Vec<usize>,
    multidegree: Vec<Vec<u8>>,
    leaves: Vec<Vec<usize>>,
    layer_start: Vec<usize>,
    lookup: HashMap<(usize, usize), usize>,
    table: Vec<Vec<SparseVec>>,
}

/// Generator names for a rank-`n` basis: `x, y, z, w` up to rank 4 and
/// `z1, z2, ...` beyond.
pub fn default_names(n: usize) -> Vec<String> {
    const SHORT: [&str; 4] = ["x", "y", "z", "w"];
    if n <= 4 {
        SHORT[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("z{i}")).collect()
    }
}

/// Generator names `x1, y1, ..., xg, yg` for the surface group basis.
pub fn surface_names(genus: usize) -> Vec<String> {
    (1..=genus)
        .flat_map(|i| [format!("x{i}"), format!("y{i}")])
        .collect()
}

/// Witt's formula for the dimension of the degree-`d` part of the free Lie
/// algebra on `n` generators.
pub fn witt_dimension(n: usize, d: usize) -> usize {
    fn mobius(mut m: usize) -> i64 {
        let mut result = 1;
        let mut p = 2;
        while p * p <= m {
            if m.is_multiple_of(p) {
                m /= p;
                if m.is_multiple_of(p) {
                    return 0;
                }
                result = -result;
            }
            p += 1;
        }
        if m > 1 {
            result = -result;
        }
        result
    }
    let mut sum: i128 = 0;
    for e in 1..=d {
        if d.is_multiple_of(e) {
            sum += mobius(e) as i128 * (n as i128).pow((d / e) as u32);
        }
    }
    (sum / d as i128) as usize
}

impl HallBasis {
    pub fn new(rank: usize, class: usize) -> Arc<Self> {
        Self::with_names(default_names(rank), class)
    }

    pub fn surface(genus: usize, class: usize) -> Arc<Self> {
        Self::with_names(surface_names(genus), class)
    }

    pub fn with_names(names: Vec<String>, class: usize) -> Arc<Self> {
        let rank = names.len();
        assert!(rank >= 1 && class >= 1, "rank and class must be positive");
        let mut words = Vec::new();
        let mut degree = Vec::new();
        let mut leaves: Vec<Vec<usize>> = Vec::new();
        let mut layer_start = vec![0, 0];
        for g in 0..rank {
            words.push(HallWord::Gen(g));
            degree.push(1);
            leaves.push(vec![g]);
        }
        for d in 2..=class {
            layer_start.push(words.len());
            let mut layer: Vec<(Vec<usize>, usize, usize)> = Vec::new();
            for a in 0..words.len() {
                for b in (a + 1)..words.len() {
                    if degree[a] + degree[b] != d {
                        continue;
                    }
                    let ok = match words[b] {
                        HallWord::Gen(_) => true,
                        HallWord::Bracket(c, _) => c <= a,
                    };
                    if ok {
                        let mut l = leaves[a].clone();
                        l.extend_from_slice(&leaves[b]);
                        layer.push((l, a, b));
                    }
                }
            }
            layer.sort();
            for (l, a, b) in layer {
                words.push(HallWord::Bracket(a, b));
                degree.push(d);
                leaves.push(l);
            }
        }
        layer_start.push(words.len());
        let multidegree = leaves
            .iter()
            .map(|l| {
                let mut m = vec![0u8; rank];
                for &g in l {
                    m[g] += 1;
                }
                m
            })
            .collect();
        let mut lookup = HashMap::new();
        for (i, w) in words.iter().enumerate() {
            if let HallWord::Bracket(a, b) = w {
                lookup.insert((*a, *b), i);
            }
        }
        let dim = words.len();
        let mut basis = HallBasis {
            rank,
            class,
            names,
            words,
            degree,
            multidegree,
            leaves,
            layer_start,
            lookup,
            table: Vec::new(),
        };
        let mut memo: HashMap<(usize, usize), SparseVec> = HashMap::new();
        let mut table = vec![vec![SparseVec::new(); dim]; dim];
        for (i, row) in table.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = basis.rewrite(i, j, &mut memo);
            }
        }
        basis.table = table;
        Arc::new(basis)
    }

    fn rewrite(&self, i: usize, j: usize, memo: &mut HashMap<(usize, usize), SparseVec>) -> SparseVec {
        if i == j || self.degree[i] + self.degree[j] > self.class {
            return SparseVec::new();
        }
        if let Some(v) = memo.get(&(i, j)) {
            return v.clone();
        }
        let result = if i > j {
            self.rewrite(j, i, memo).scaled(&Rational::from_int(-1))
        } else {
            match self.words[j] {
                HallWord::Gen(_) => SparseVec::unit(self.lookup[&(i, j)]),
                HallWord::Bracket(c, _) if c <= i => SparseVec::unit(self.lookup[&(i, j)]),
                HallWord::Bracket(c, d) => {
                    // [i,[c,d]] = [[i,c],d] + [c,[i,d]]
                    let ic = self.rewrite(i, c, memo);
                    let id = self.rewrite(i, d, memo);
                    let mut out = SparseVec::new();
                    for (t, q) in ic.iter() {
                        out.add_scaled(&self.rewrite(t, d, memo), q);
                    }
                    for (t, q) in id.iter() {
                        out.add_scaled(&self.rewrite(c, t, memo), q);
                    }
                    out
                }
            }
        };
        memo.insert((i, j), result.clone());
        result
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn word(&self, i: usize) -> HallWord {
        self.words[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degree[i]
    }

    pub fn multidegree(&self, i: usize) -> &[u8] {
        &self.multidegree[i]
    }

    pub fn leaves(&self, i: usize) -> &[usize] {
        &self.leaves[i]
    }

    /// Indices of the basis words of degree `d`.
    pub fn layer(&self, d: usize) -> std::ops::Range<usize> {
        if d == 0 || d > self.class {
            return 0..0;
        }
        self.layer_start[d]..self.layer_start[d + 1]
    }

    /// Index of the bracket word `[a, b]` if it is a basis word.
    pub fn bracket_index(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&(a, b)).copied()
    }

    /// Bracket of two basis words in Hall normal form.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &SparseVec {
        &self.table[i][j]
    }

    /// Index of the word printed as `s`, e.g. `[x1,[x1,y1]]`.
    pub fn find(&self, s: &str) -> Option<usize> {
        (0..self.dim()).find(|&i| self.word_string(i) == s)
    }

    pub fn word_string(&self, i: usize) -> String {
        match self.words[i] {
            HallWord::Gen(g) => self.names[g].clone(),
            HallWord::Bracket(a, b) => format!("[{},{}]", self.word_string(a), self.word_string(b)),
        }
    }

    pub fn generator(&self, g: usize) -> LieElement {
        LieElement::basis(self, g)
    }

    pub fn zero(&self) -> LieElement {
        LieElement::zero(self.dim())
    }

    pub fn bracket(&self, a: &LieElement, b: &LieElement) -> LieElement {
        assert_eq!(a.dim(), self.dim(), "element not in this basis");
        assert_eq!(b.dim(), self.dim(), "element not in this basis");
        let mut out = LieElement::zero(self.dim());
        let bn: Vec<(usize, &Rational)> = b.iter().collect();
        for (i, p) in a.iter() {
            for &(j, q) in &bn {
                if self.degree[i] + self.degree[j] > self.class {
                    continue;
                }
                let pq = p * q;
                for (t, c) in self.table[i][j].iter() {
                    out.c[t].add_mul(c, &pq);
                }
            }
        }
        out
    }

    /// Bracket returning an error on mismatched ambient dimensions.
    pub fn try_bracket(&self, a: &LieElement, b: &LieElement) -> Result<LieElement, crate::AlgebraError> {
        if a.dim() != self.dim() || b.dim() != self.dim() {
            return Err(crate::AlgebraError::MismatchedBasis);
        }
        Ok(self.bracket(a, b))
    }

    /// Right-nested bracket `[a1,[a2,[...,[a_{n-1},a_n]]]]`.
    pub fn nested(&self, args: &[&LieElement]) -> LieElement {
        let (last, rest) = args.split_last().expect("nonempty bracket");
        let mut acc = (*last).clone();
        for a in rest.iter().rev() {
            acc = self.bracket(a, &acc);
        }
        acc
    }

    /// Evaluate basis word `i` on images of the generators.
    pub fn evaluate_word(&self, i: usize, images: &[LieElement], target: &HallBasis) -> LieElement {
        match self.words[i] {
            HallWord::Gen(g) => images[g].clone(),
            HallWord::Bracket(a, b) => {
                let x = self.evaluate_word(a, images, target);
                let y = self.evaluate_word(b, images, target);
                target.bracket(&x, &y)
            }
        }
    }

    pub fn format(&self, a: &LieElement) -> String {
        let terms: Vec<String> = a
            .iter()
            .map(|(i, q)| format!("{} * {}", q, self.word_string(i)))
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }

    /// Parse a linear combination such as `x + 1/2 * [x,y]`.
    pub fn parse_element(&self, s: &str) -> Result<LieElement, String> {
        let mut out = self.zero();
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(out);
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut depth = 0i32;
        let mut cur = String::new();
        let mut neg = false;
        for ch in s.chars() {
            match ch {
                '[' => {
                    depth += 1;
                    cur.push(ch)
                }
                ']' => {
                    depth -= 1;
                    cur.push(ch)
                }
                '+' | '-' if depth == 0 && !cur.trim().is_empty() && !cur.trim_end().ends_with('*') => {
                    terms.push((neg, cur.clone()));
                    cur.clear();
                    neg = ch == '-';
                }
                '-' if depth == 0 && cur.trim().is_empty() => neg = !neg,
                '+' if depth == 0 && cur.trim().is_empty() => {}
                _ => cur.push(ch),
            }
        }
        terms.push((neg, cur));
        for (neg, t) in terms {
            let t = t.trim();
            let (coef, word) = match t.split_once('*') {
                Some((c, w)) => (
                    c.trim().parse::<Rational>().map_err(|e| e.to_string())?,
                    w.trim(),
                ),
                None => (Rational::one(), t),
            };
            let w = word.replace(' ', "");
            let idx = self.find(&w).ok_or_else(|| format!("unknown Hall word `{w}`"))?;
            let coef = if neg { -coef } else { coef };
            out.c[idx] += &coef;
        }
        Ok(out)
    }
}

/// Element of a free nilpotent Lie algebra, dense in Hall coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LieElement {
    pub(crate) c: Vec<Rational>,
}

impl LieElement {
    pub fn zero(dim: usize) -> Self {
        LieElement { c: vec![Rational::zero(); dim] }
    }

    pub fn basis(b: &HallBasis, i: usize) -> Self {
        let mut e = Self::zero(b.dim());
        e.c[i] = Rational::one();
        e
    }

    pub fn from_sparse(dim: usize, v: &SparseVec) -> Self {
        let mut e = Self::zero(dim);
        for (i, q) in v.iter() {
            e.c[i] = q.clone();
        }
        e
    }

    pub fn to_sparse(&self) -> SparseVec {
        SparseVec::from_pairs(self.iter().map(|(i, q)| (i, q.clone())))
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn coeff(&self, i: usize) -> &Rational {
        &self.c[i]
    }

    pub fn set(&mut self, i: usize, q: Rational) {
        self.c[i] = q;
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|q| q.is_zero())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.c.iter().enumerate().filter(|(_, q)| !q.is_zero())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn add(&self, o: &LieElement) -> LieElement {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn sub(&self, o: &LieElement) -> LieElement {
        let mut r = self.clone();
        r.add_scaled(o, &Rational::from_int(-1));
        r
    }

    pub fn add_assign(&mut self, o: &LieElement) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }

    pub fn add_scaled(&mut self, o: &LieElement, q: &Rational) {
        if q.is_zero() {
            return;
        }
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            if !b.is_zero() {
                a.add_mul(b, q);
            }
        }
    }

    pub fn scaled(&self, q: &Rational) -> LieElement {
        LieElement { c: self.c.iter().map(|a| a * q).collect() }
    }

    pub fn neg(&self) -> LieElement {
        self.scaled(&Rational::from_int(-1))
    }

    /// Part of the element in degree exactly `d`.
    pub fn homogeneous(&self, b: &HallBasis, d: usize) -> LieElement {
        let mut e = LieElement::zero(self.dim());
        for i in b.layer(d) {
            e.c[i] = self.c[i].clone();
        }
        e
    }

    /// Part of the element in degrees at most `d`.
    pub fn truncated(&self, b: &HallBasis, d: usize) -> LieElement {
        let mut e = self.clone();
        for (i, q) in e.c.iter_mut().enumerate() {
            if b.degree(i) > d {
                *q = Rational::zero();
            }
        }
        e
    }

    /// Smallest degree with a nonzero coefficient.
    pub fn min_degree(&self, b: &HallBasis) -> Option<usize> {
        self.iter().map(|(i, _)| b.degree(i)).min()
    }
}

/// Reinterpret an element of `from` in `to`, where the two bases share
/// generator count and `to` is the larger (or smaller) truncation. Words of
/// degree above the target class are dropped.
pub fn change_class(from: &HallBasis, to: &HallBasis, a: &LieElement) -> LieElement {
    assert_eq!(from.rank(), to.rank(), "rank mismatch");
    let mut out = to.zero();
    for (i, q) in a.iter() {
        if from.degree(i) <= to.class() {
            out.c[class_index(from, to, i)] = q.clone();
        }
    }
    out
}

/// Index in `to` of basis word `i` of `from` (same rank, degree within range).
pub fn class_index(from: &HallBasis, to: &HallBasis, i: usize) -> usize {
    // Layers of lower degree are identical prefixes across classes.
    debug_assert!(from.degree(i) <= to.class());
    i
}

impl fmt::Display for HallWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HallWord::Gen(g) => write!(f, "g{g}"),
            HallWord::Bracket(a, b) => write!(f, "[#{a},#{b}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank2_class3_order() {
        let b = HallBasis::new(2, 3);
        let s: Vec<String> = (0..b.dim()).map(|i| b.word_string(i)).collect();
        assert_eq!(s, ["x", "y", "[x,y]", "[x,[x,y]]", "[y,[x,y]]"]);
    }

    #[test]
    fn rank3_degree3_layer() {
        let b = HallBasis::new(3, 3);
        let s: Vec<String> = b.layer(3).map(|i| b.word_string(i)).collect();
        assert_eq!(
            s,
            [
                "[x,[x,y]]",
                "[x,[x,z]]",
                "[y,[x,y]]",
                "[y,[x,z]]",
                "[y,[y,z]]",
                "[z,[x,y]]",
                "[z,[x,z]]",
                "[z,[y,z]]"
            ]
        );
        let s2: Vec<String> = b.layer(2).map(|i| b.word_string(i)).collect();
        assert_eq!(s2, ["[x,y]", "[x,z]", "[y,z]"]);
    }

    #[test]
    fn rank1_is_abelian() {
        let b = HallBasis::new(1, 5);
        assert_eq!(b.dim(), 1);
    }

    #[test]
    fn witt_counts() {
        for n in 1..=4 {
            for k in 1..=4 {
                let b = HallBasis::new(n, k);
                for d in 1..=k {
                    assert_eq!(b.layer(d).len(), witt_dimension(n, d), "n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn antisymmetry_basics() {
        let b = HallBasis::new(2, 2);
        let x = b.generator(0);
        let y = b.generator(1);
        assert!(b.bracket(&x, &x).is_zero());
        assert_eq!(b.bracket(&y, &x), b.bracket(&x, &y).neg());
    }

    #[test]
    fn parse_roundtrip() {
        let b = HallBasis::new(2, 3);
        let e = b.parse_element("x - 1/2 * [x,y] + 1/12 * [y,[x,y]]").unwrap();
        assert_eq!(b.format(&e), "1 * x + -1/2 * [x,y] + 1/12 * [y,[x,y]]");
        assert_eq!(b.parse_element(&b.format(&e)).unwrap(), e);
    }
}
