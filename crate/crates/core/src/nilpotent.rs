//! Free nilpotent groups in Malcev coordinates: words, the truncated
//! Baker-Campbell-Hausdorff product and induced endomorphisms.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::hall::{HallBasis, LieElement};
use crate::rational::{factorial, Rational};
use crate::AlgebraError;

/// Freely reduced word; letter `+(g+1)` is generator `g`, `-(g+1)` its inverse.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord(Vec<i32>);

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn generator(g: usize) -> Self {
        FreeWord(vec![g as i32 + 1])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = i32>) -> Self {
        let mut w = FreeWord::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    fn push(&mut self, l: i32) {
        assert!(l != 0, "zero letter");
        if self.0.last() == Some(&-l) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &FreeWord) -> FreeWord {
        let mut w = self.clone();
        for &l in &o.0 {
            w.push(l);
        }
        w
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| -l).collect())
    }

    /// `[a, b] = a b a^-1 b^-1`.
    pub fn commutator(a: &FreeWord, b: &FreeWord) -> FreeWord {
        a.mul(b).mul(&a.inverse()).mul(&b.inverse())
    }

    /// Substitute `images[g]` for generator `g`.
    pub fn substitute(&self, images: &[FreeWord]) -> FreeWord {
        let mut w = FreeWord::identity();
        for &l in &self.0 {
            let img = &images[(l.unsigned_abs() - 1) as usize];
            if l > 0 {
                w = w.mul(img);
            } else {
                w = w.mul(&img.inverse());
            }
        }
        w
    }

    /// Exponent sums per generator.
    pub fn abelianize(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for &l in &self.0 {
            let g = (l.unsigned_abs() - 1) as usize;
            v[g] += if l > 0 { 1 } else { -1 };
        }
        v
    }

    /// Largest generator index used, plus one.
    pub fn support_rank(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Parse surface-group syntax `x1 y1 X1 Y1`; `x1^-1` also denotes `X1`.
    pub fn parse_surface(s: &str) -> Result<FreeWord, AlgebraError> {
        let mut w = FreeWord::identity();
        for tok in s.split_whitespace() {
            w.push(parse_surface_letter(tok)?);
        }
        Ok(w)
    }

    /// Surface-group rendering `x1 y1 X1 Y1`; the identity renders empty.
    pub fn to_surface_string(&self) -> String {
        self.0
            .iter()
            .map(|&l| {
                let g = (l.unsigned_abs() - 1) as usize;
                let (c, i) = if g.is_multiple_of(2) { ('x', g / 2 + 1) } else { ('y', g / 2 + 1) };
                let c = if l < 0 { c.to_ascii_uppercase() } else { c };
                format!("{c}{i}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// `zeta = [x1,y1] ... [xg,yg]`.
    pub fn zeta(genus: usize) -> FreeWord {
        let mut w = FreeWord::identity();
        for i in 0..genus {
            let x = FreeWord::generator(2 * i);
            let y = FreeWord::generator(2 * i + 1);
            w = w.mul(&FreeWord::commutator(&x, &y));
        }
        w
    }
}

fn parse_surface_letter(tok: &str) -> Result<i32, AlgebraError> {
    if let Some(base) = tok.strip_suffix("^-1") {
        return parse_surface_letter(base).map(|l| -l);
    }
    let bad = || AlgebraError::BadToken(tok.to_string());
    let mut chars = tok.chars();
    let c = chars.next().ok_or_else(bad)?;
    let idx: usize = chars.as_str().parse().map_err(|_| bad())?;
    if idx == 0 {
        return Err(bad());
    }
    let (base, inv) = match c {
        'x' => (2 * (idx - 1), false),
        'X' => (2 * (idx - 1), true),
        'y' => (2 * (idx - 1) + 1, false),
        'Y' => (2 * (idx - 1) + 1, true),
        _ => return Err(bad()),
    };
    let l = base as i32 + 1;
    Ok(if inv { -l } else { l })
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_surface_string())
    }
}

/// Two-variable Dynkin data: words in {u, v} with their coefficients.
#[derive(Debug)]
struct DynkinTable {
    /// (word as bits, length, coefficient); bit i is the i-th letter, 1 = v.
    terms: Vec<(u32, usize, Rational)>,
}

fn dynkin_table(k: usize) -> DynkinTable {
    let mut terms = Vec::new();
    for n in 1..=k {
        for bits in 0u32..(1 << n) {
            let word: Vec<u8> = (0..n).map(|i| ((bits >> i) & 1) as u8).collect();
            if n >= 2 && word[n - 1] == word[n - 2] {
                continue;
            }
            let c = dynkin_word_coefficient(&word);
            if !c.is_zero() {
                terms.push((bits, n, c));
            }
        }
    }
    DynkinTable { terms }
}

/// Coefficient of the right-nested bracket of `word` in Dynkin's formula:
/// the sum over block decompositions u^p1 v^q1 ... u^pl v^ql of
/// (-1)^(l-1) / (l * n * prod p_i! q_i!).
fn dynkin_word_coefficient(word: &[u8]) -> Rational {
    fn rec(word: &[u8], pos: usize, blocks: usize, denom: &BigInt, acc: &mut Rational, n: usize) {
        if pos == word.len() {
            let l = blocks as i64;
            let sign = if blocks % 2 == 1 { 1 } else { -1 };
            let d = denom * BigInt::from(l) * BigInt::from(n);
            *acc += &(Rational::from_int(sign) / Rational::from_bigint(d));
            return;
        }
        let mut run_u = 0;
        while pos + run_u < word.len() && word[pos + run_u] == 0 {
            run_u += 1;
        }
        for p in 0..=run_u {
            let mut run_v = 0;
            if p == run_u {
                while pos + p + run_v < word.len() && word[pos + p + run_v] == 1 {
                    run_v += 1;
                }
            }
            for q in 0..=run_v {
                if p + q == 0 {
                    continue;
                }
                let d = denom * factorial(p) * factorial(q);
                rec(word, pos + p + q, blocks + 1, &d, acc, n);
            }
        }
    }
    let mut acc = Rational::zero();
    rec(word, 0, 0, &BigInt::one(), &mut acc, word.len());
    acc
}

/// Arithmetic context for one free nilpotent group `F_n / Gamma_{k+1}`.
#[derive(Debug)]
pub struct NilpotentGroup {
    basis: Arc<HallBasis>,
    dynkin: DynkinTable,
}

impl NilpotentGroup {
    pub fn new(basis: Arc<HallBasis>) -> Arc<Self> {
        let dynkin = dynkin_table(basis.class());
        Arc::new(NilpotentGroup { basis, dynkin })
    }

    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn class(&self) -> usize {
        self.basis.class()
    }

    /// `log(exp(a) exp(b))` truncated at the class.
    pub fn bch(&self, a: &LieElement, b: &LieElement) -> LieElement {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let k = self.class();
        let basis = &self.basis;
        // values[n][bits] = right-nested bracket of the length-n word.
        let mut values: Vec<Vec<Option<LieElement>>> = vec![Vec::new(); k + 1];
        values[1] = vec![Some(a.clone()), Some(b.clone())];
        for n in 2..=k {
            let mut layer = vec![None; 1 << n];
            for (bits, slot) in layer.iter_mut().enumerate() {
                let first = bits & 1;
                let rest = bits >> 1;
                if let Some(Some(tail)) = values[n - 1].get(rest) {
                    if n == 2 && first == rest {
                        continue;
                    }
                    let head = if first == 0 { a } else { b };
                    let v = basis.bracket(head, tail);
                    if !v.is_zero() {
                        *slot = Some(v);
                    }
                }
            }
            values[n] = layer;
        }
        let mut out = basis.zero();
        for (bits, n, c) in &self.dynkin.terms {
            if let Some(Some(v)) = values[*n].get(*bits as usize) {
                out.add_scaled(v, c);
            }
        }
        out
    }

    /// Left fold of `bch`.
    pub fn bch_multi(&self, args: &[LieElement]) -> Result<LieElement, AlgebraError> {
        let (first, rest) = args.split_first().ok_or(AlgebraError::EmptyProduct)?;
        Ok(rest.iter().fold(first.clone(), |acc, x| self.bch(&acc, x)))
    }

    /// Direct multivariable Dynkin evaluation, kept as an independent check
    /// of the fold.
    pub fn bch_multi_dynkin(&self, args: &[LieElement]) -> LieElement {
        let k = self.class();
        let r = args.len();
        let mut out = self.basis.zero();
        // Enumerate sequences of columns; each column is a nonzero exponent
        // vector over the r arguments, of total size |P| <= k.
        fn columns(r: usize, budget: usize) -> Vec<Vec<usize>> {
            let mut res = Vec::new();
            fn rec(r: usize, i: usize, left: usize, cur: &mut Vec<usize>, res: &mut Vec<Vec<usize>>) {
                if i == r {
                    if cur.iter().sum::<usize>() > 0 {
                        res.push(cur.clone());
                    }
                    return;
                }
                for p in 0..=left {
                    cur.push(p);
                    rec(r, i + 1, left - p, cur, res);
                    cur.pop();
                }
            }
            rec(r, 0, budget, &mut Vec::new(), &mut res);
            res
        }
        let cols = columns(r, k);
        let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
        while let Some((seq, size)) = stack.pop() {
            if !seq.is_empty() {
                let l = seq.len();
                let mut word: Vec<usize> = Vec::new();
                let mut denom = BigInt::from(l) * BigInt::from(size);
                for &c in &seq {
                    for (i, &p) in cols[c].iter().enumerate() {
                        denom *= factorial(p);
                        word.extend(std::iter::repeat_n(i, p));
                    }
                }
                let refs: Vec<&LieElement> = word.iter().map(|&i| &args[i]).collect();
                let v = self.basis.nested(&refs);
                let sign = if l % 2 == 1 { 1 } else { -1 };
                out.add_scaled(&v, &(Rational::from_int(sign) / Rational::from_bigint(denom)));
            }
            for (ci, c) in cols.iter().enumerate() {
                let s: usize = c.iter().sum();
                if size + s <= k {
                    let mut next = seq.clone();
                    next.push(ci);
                    stack.push((next, size + s));
                }
            }
        }
        out
    }

    /// Malcev logarithm of a word in the generators of this group.
    pub fn log_of_word(&self, w: &FreeWord) -> GroupElement {
        let mut acc = self.basis.zero();
        let letters = w.letters();
        let mut i = 0;
        while i < letters.len() {
            let l = letters[i];
            let mut m = 0i64;
            while i < letters.len() && letters[i] == l {
                m += 1;
                i += 1;
            }
            let g = (l.unsigned_abs() - 1) as usize;
            assert!(g < self.basis.rank(), "generator outside the group");
            let sign = if l > 0 { m } else { -m };
            let z = self.basis.generator(g).scaled(&Rational::from_int(sign));
            acc = self.bch(&acc, &z);
        }
        GroupElement { log: acc }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { log: self.basis.zero() }
    }

    pub fn from_log(&self, log: LieElement) -> GroupElement {
        assert_eq!(log.dim(), self.basis.dim());
        GroupElement { log }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement { log: self.bch(&a.log, &b.log) }
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        GroupElement { log: a.log.neg() }
    }

    pub fn commutator(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let ab = self.mul(a, b);
        let abi = self.mul(&ab, &self.inverse(a));
        self.mul(&abi, &self.inverse(b))
    }
}

/// Element of a free nilpotent group, stored by its logarithm.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub log: LieElement,
}

/// Least common multiple of the Dynkin denominators l * |P| * prod p_ij!
/// over all terms with |P| <= k.
pub fn compute_nk(k: usize) -> BigInt {
    fn partitions(n: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            cur.push(p);
            partitions(n - p, p, cur, out);
            cur.pop();
        }
    }
    let mut acc = BigInt::one();
    for n in 1..=k {
        let mut parts = Vec::new();
        partitions(n, n, &mut Vec::new(), &mut parts);
        for lam in parts {
            let fact: BigInt = lam.iter().map(|&p| factorial(p)).product();
            for l in 1..=lam.len() {
                let d = BigInt::from(l) * BigInt::from(n) * &fact;
                acc = acc.lcm(&d);
            }
        }
    }
    acc
}

/// Lie algebra homomorphism between free nilpotent Lie algebras, determined
/// by the images of the source generators.
#[derive(Clone, Debug)]
pub struct InducedLieMap {
    source: Arc<HallBasis>,
    target: Arc<HallBasis>,
    images: Vec<LieElement>,
}

impl InducedLieMap {
    pub fn new(
        source: Arc<HallBasis>,
        target: Arc<HallBasis>,
        generator_images: &[LieElement],
    ) -> Result<Self, AlgebraError> {
        if generator_images.len() != source.rank() {
            return Err(AlgebraError::Arity {
                expected: source.rank(),
                found: generator_images.len(),
            });
        }
        if generator_images.iter().any(|e| e.dim() != target.dim()) {
            return Err(AlgebraError::MismatchedBasis);
        }
        let mut images: Vec<LieElement> = Vec::with_capacity(source.dim());
        for i in 0..source.dim() {
            let img = match source.word(i) {
                crate::hall::HallWord::Gen(g) => generator_images[g].clone(),
                crate::hall::HallWord::Bracket(a, b) => target.bracket(&images[a], &images[b]),
            };
            images.push(img);
        }
        Ok(InducedLieMap { source, target, images })
    }

    pub fn identity(basis: Arc<HallBasis>) -> Self {
        let gens: Vec<LieElement> = (0..basis.rank()).map(|g| basis.generator(g)).collect();
        Self::new(basis.clone(), basis, &gens).expect("identity map")
    }

    pub fn source(&self) -> &Arc<HallBasis> {
        &self.source
    }

    pub fn target(&self) -> &Arc<HallBasis> {
        &self.target
    }

    /// Images of all source basis words.
    pub fn basis_images(&self) -> &[LieElement] {
        &self.images
    }

    pub fn generator_images(&self) -> &[LieElement] {
        &self.images[..self.source.rank()]
    }

    pub fn apply(&self, a: &LieElement) -> LieElement {
        let mut out = self.target.zero();
        for (i, q) in a.iter() {
            out.add_scaled(&self.images[i], q);
        }
        out
    }

    pub fn apply_group(&self, g: &GroupElement) -> GroupElement {
        GroupElement { log: self.apply(&g.log) }
    }

    /// `self o other`.
    pub fn compose(&self, other: &InducedLieMap) -> InducedLieMap {
        let gens: Vec<LieElement> = other.generator_images().iter().map(|e| self.apply(e)).collect();
        InducedLieMap::new(other.source.clone(), self.target.clone(), &gens).expect("composable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class2_closed_form() {
        let g = NilpotentGroup::new(HallBasis::new(2, 2));
        let b = g.basis();
        let x = b.generator(0);
        let y = b.generator(1);
        let expected = b.parse_element("x + y + 1/2 * [x,y]").unwrap();
        assert_eq!(g.bch(&x, &y), expected);
    }

    #[test]
    fn class3_cross_check() {
        let g = NilpotentGroup::new(HallBasis::new(2, 3));
        let b = g.basis();
        let x = b.generator(0);
        let y = b.generator(1);
        let lhs = y.sub(&g.bch(&x, &y)).add(&x);
        let rhs = b.parse_element("-1/2 * [x,y] - 1/12 * [x,[x,y]] + 1/12 * [y,[x,y]]").unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_cancels() {
        let g = NilpotentGroup::new(HallBasis::new(2, 4));
        let b = g.basis();
        let u = b.parse_element("x + 2 * [x,y]").unwrap();
        assert!(g.bch(&u, &u.neg()).is_zero());
    }

    #[test]
    fn fold_examples() {
        let g = NilpotentGroup::new(HallBasis::new(2, 2));
        let b = g.basis();
        let x = b.generator(0);
        let y = b.generator(1);
        assert_eq!(g.bch_multi(std::slice::from_ref(&x)).unwrap(), x);
        assert_eq!(g.bch_multi(&[x.clone(), b.zero(), y.clone()]).unwrap(), g.bch(&x, &y));
        let r = g.bch_multi(&[x.clone(), y.clone(), x.neg()]).unwrap();
        assert_eq!(r, b.parse_element("y + [x,y]").unwrap());
        assert!(g.bch_multi(&[]).is_err());
    }

    #[test]
    fn words() {
        let g = NilpotentGroup::new(HallBasis::new(2, 2));
        let w = FreeWord::from_letters([1, 2, -1, -2]);
        assert_eq!(g.log_of_word(&w).log, g.basis().parse_element("[x,y]").unwrap());
        assert!(g.log_of_word(&FreeWord::identity()).log.is_zero());
        let sq = FreeWord::from_letters([1, 1]);
        assert_eq!(g.log_of_word(&sq).log, g.basis().generator(0).scaled(&Rational::from_int(2)));
    }

    #[test]
    fn nk_small() {
        assert_eq!(compute_nk(1), BigInt::from(1));
        assert_eq!(compute_nk(2), BigInt::from(4));
    }

    #[test]
    fn surface_syntax() {
        let w = FreeWord::parse_surface("x1 y1 X1 Y1").unwrap();
        assert_eq!(w, FreeWord::zeta(1));
        assert_eq!(w.to_surface_string(), "x1 y1 X1 Y1");
        assert!(FreeWord::parse_surface("q1").is_err());
        assert_eq!(FreeWord::parse_surface("x1 X1").unwrap(), FreeWord::identity());
        assert_eq!(FreeWord::parse_surface("y2^-1").unwrap(), FreeWord::parse_surface("Y2").unwrap());
    }
}
