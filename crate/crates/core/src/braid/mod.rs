//! Words in the Artin generators `σ_1, ..., σ_{n-1}` and the permutations
//! they induce.
//!
//! Permutation convention: start from the list `[1, 2, ..., n]` of strand
//! labels by position and apply each letter `σ_i` in order as the swap of
//! positions `i` and `i + 1`. The final list is the image, so
//! `σ2 σ1 σ2 σ1` on three strands gives `[2, 3, 1]`.

mod render;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use render::{render, render_ascii, render_svg, render_tikz, tikz_tokens, RenderFormat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BraidError {
    #[error("generator index {index} out of range for {n} strands")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("letter sign must be +1 or -1, got {0}")]
    BadSign(i64),
    #[error("a braid needs at least one strand")]
    NoStrands,
    #[error("relation does not match at position {0}")]
    PatternMismatch(usize),
    #[error("cannot parse letter '{0}'")]
    BadLetter(String),
    #[error("words on {0} and {1} strands cannot be combined")]
    StrandMismatch(usize, usize),
}

/// `σ_index^sign`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: usize,
    pub sign: i8,
}

impl Letter {
    pub fn pos(index: usize) -> Self {
        Self { index, sign: 1 }
    }

    pub fn neg(index: usize) -> Self {
        Self { index, sign: -1 }
    }

    pub fn inverse(self) -> Self {
        Self {
            index: self.index,
            sign: -self.sign,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign > 0 {
            write!(f, "s{}", self.index)
        } else {
            write!(f, "s{}^-1", self.index)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidWord {
    n: usize,
    letters: Vec<Letter>,
}

impl BraidWord {
    pub fn new(n: usize, letters: Vec<Letter>) -> Result<Self, BraidError> {
        if n == 0 {
            return Err(BraidError::NoStrands);
        }
        for l in &letters {
            if l.index == 0 || l.index >= n {
                return Err(BraidError::IndexOutOfRange { index: l.index, n });
            }
            if l.sign != 1 && l.sign != -1 {
                return Err(BraidError::BadSign(l.sign as i64));
            }
        }
        Ok(Self { n, letters })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "a braid needs at least one strand");
        Self {
            n,
            letters: Vec::new(),
        }
    }

    /// Word from `(index, sign)` pairs in crossing order.
    pub fn from_crossings(
        n: usize,
        crossings: impl IntoIterator<Item = (usize, i8)>,
    ) -> Result<Self, BraidError> {
        Self::new(
            n,
            crossings
                .into_iter()
                .map(|(index, sign)| Letter { index, sign })
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Self) -> Result<Self, BraidError> {
        if self.n != other.n {
            return Err(BraidError::StrandMismatch(self.n, other.n));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Self { n: self.n, letters })
    }

    /// Cancels adjacent `σ_i σ_i^-1` and `σ_i^-1 σ_i` until none remain.
    pub fn free_reduce(&self) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self {
            n: self.n,
            letters: out,
        }
    }

    pub fn invert(&self) -> Self {
        Self {
            n: self.n,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| l.sign as i64).sum()
    }

    pub fn permutation(&self) -> Permutation {
        let mut image: Vec<usize> = (1..=self.n).collect();
        for l in &self.letters {
            image.swap(l.index - 1, l.index);
        }
        Permutation { image }
    }

    /// Applies one defining relation at `pos`.
    ///
    /// `Braid` rewrites `σ_i^e σ_{i+1}^e σ_i^e` to `σ_{i+1}^e σ_i^e σ_{i+1}^e`
    /// (forward) or back; `Commute` swaps two letters whose indices differ by
    /// at least 2, in either direction.
    pub fn relation_move(
        &self,
        pos: usize,
        kind: RelationKind,
        dir: Direction,
    ) -> Result<Self, BraidError> {
        let w = &self.letters;
        let mut out = w.clone();
        match kind {
            RelationKind::Braid => {
                let [a, b, c] = match w.get(pos..pos + 3) {
                    Some(&[a, b, c]) => [a, b, c],
                    _ => return Err(BraidError::PatternMismatch(pos)),
                };
                let same_sign = a.sign == b.sign && b.sign == c.sign;
                let shape = match dir {
                    Direction::Forward => b.index == a.index + 1,
                    Direction::Backward => a.index == b.index + 1,
                };
                if !(same_sign && a.index == c.index && shape) {
                    return Err(BraidError::PatternMismatch(pos));
                }
                out[pos] = b;
                out[pos + 1] = a;
                out[pos + 2] = b;
            }
            RelationKind::Commute => {
                let (a, b) = match w.get(pos..pos + 2) {
                    Some(&[a, b]) => (a, b),
                    _ => return Err(BraidError::PatternMismatch(pos)),
                };
                if a.index.abs_diff(b.index) < 2 {
                    return Err(BraidError::PatternMismatch(pos));
                }
                out.swap(pos, pos + 1);
            }
        }
        Ok(Self {
            n: self.n,
            letters: out,
        })
    }

    /// Every `(pos, kind, dir)` at which [`BraidWord::relation_move`] applies.
    pub fn applicable_moves(&self) -> Vec<(usize, RelationKind, Direction)> {
        let mut out = Vec::new();
        for pos in 0..self.letters.len() {
            for kind in [RelationKind::Braid, RelationKind::Commute] {
                for dir in [Direction::Forward, Direction::Backward] {
                    if kind == RelationKind::Commute && dir == Direction::Backward {
                        continue;
                    }
                    if self.relation_move(pos, kind, dir).is_ok() {
                        out.push((pos, kind, dir));
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> WordJson {
        WordJson {
            n: self.n,
            letters: self
                .letters
                .iter()
                .map(|l| [l.index as i64, l.sign as i64])
                .collect(),
        }
    }

    pub fn from_json(json: &WordJson) -> Result<Self, BraidError> {
        let mut letters = Vec::with_capacity(json.letters.len());
        for &[index, sign] in &json.letters {
            if sign != 1 && sign != -1 {
                return Err(BraidError::BadSign(sign));
            }
            if index < 1 {
                return Err(BraidError::IndexOutOfRange {
                    index: 0,
                    n: json.n,
                });
            }
            letters.push(Letter {
                index: index as usize,
                sign: sign as i8,
            });
        }
        Self::new(json.n, letters)
    }

    /// Parses the compact text form, e.g. `"s2 s1^-1"`, on `n` strands.
    /// `""` and `"1"` denote the identity.
    pub fn parse(n: usize, text: &str) -> Result<Self, BraidError> {
        let letters = parse_letters(text)?;
        Self::new(n, letters)
    }
}

fn parse_letters(text: &str) -> Result<Vec<Letter>, BraidError> {
    let text = text.trim();
    if text.is_empty() || text == "1" {
        return Ok(Vec::new());
    }
    text.split_whitespace()
        .map(|tok| {
            let bad = || BraidError::BadLetter(tok.to_string());
            let body = tok.strip_prefix('s').ok_or_else(bad)?;
            let (num, sign) = match body.split_once('^') {
                Some((num, "-1")) => (num, -1),
                Some((num, "1")) => (num, 1),
                Some(_) => return Err(bad()),
                None => (body, 1),
            };
            let index: usize = num.parse().map_err(|_| bad())?;
            Ok(Letter { index, sign })
        })
        .collect()
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for BraidWord {
    type Err = BraidError;

    /// Parses the text form with the strand count taken as one more than the
    /// largest index (at least 1). Use [`BraidWord::parse`] to fix `n`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = parse_letters(s)?;
        let n = letters.iter().map(|l| l.index + 1).max().unwrap_or(1);
        Self::new(n, letters)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordJson {
    pub n: usize,
    pub letters: Vec<[i64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Braid,
    Commute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

/// A permutation of `{1, ..., n}` stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Option<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &x in &image {
            if x == 0 || x > n || seen[x - 1] {
                return None;
            }
            seen[x - 1] = true;
        }
        Some(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (1..=n).collect(),
        }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    /// `p ↦ image[p]` on 1-based points.
    pub fn apply(&self, p: usize) -> usize {
        self.image[p - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(k, &x)| x == k + 1)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (k, &x) in self.image.iter().enumerate() {
            inv[x - 1] = k + 1;
        }
        Self { image: inv }
    }

    /// `self` followed by `other`: `p ↦ other(self(p))`.
    pub fn then(&self, other: &Self) -> Self {
        Self {
            image: self.image.iter().map(|&x| other.apply(x)).collect(),
        }
    }

    /// Cycle lengths in decreasing order, fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                p = self.image[p] - 1;
                len += 1;
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// Order of the permutation as a group element.
    pub fn order(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycle_type()
            .into_iter()
            .fold(1, |acc, l| acc / gcd(acc, l as u64) * l as u64)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.image.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", items.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(n: usize, text: &str) -> BraidWord {
        BraidWord::parse(n, text).unwrap()
    }

    #[test]
    fn from_crossings_examples() {
        let word = BraidWord::from_crossings(3, [(2, 1), (1, 1), (2, 1), (1, 1)]).unwrap();
        assert_eq!(word.to_string(), "s2 s1 s2 s1");
        assert!(BraidWord::from_crossings(3, []).unwrap().is_empty());
        assert_eq!(BraidWord::from_crossings(2, [(1, 1)]).unwrap().to_string(), "s1");
        assert_eq!(
            BraidWord::from_crossings(3, [(3, 1)]),
            Err(BraidError::IndexOutOfRange { index: 3, n: 3 })
        );
    }

    #[test]
    fn free_reduce_examples() {
        assert!(w(2, "s1 s1^-1").free_reduce().is_empty());
        let r = w(7, "s5 s5^-1 s6 s4").free_reduce();
        assert_eq!(r.to_string(), "s6 s4");
        let x = w(3, "s2 s1 s2 s1");
        assert_eq!(x.free_reduce(), x);
        assert!(w(4, "s1 s2 s3 s3^-1 s2^-1 s1^-1").free_reduce().is_empty());
    }

    #[test]
    fn permutation_examples() {
        assert_eq!(w(3, "s2 s1 s2 s1").permutation().image(), &[2, 3, 1]);
        assert!(BraidWord::identity(4).permutation().is_identity());
        let p = w(3, "s2^-1 s1^-1 s2^-1 s1^-1").permutation();
        assert_eq!(p.cycle_type(), vec![3]);
    }

    #[test]
    fn exponent_sum_examples() {
        assert_eq!(w(3, "s2 s1 s2 s1").exponent_sum(), 4);
        assert_eq!(w(2, "s1 s1^-1").exponent_sum(), 0);
        assert_eq!(w(3, "s2^-1 s1^-1 s2^-1 s1^-1").exponent_sum(), -4);
    }

    #[test]
    fn relation_move_examples() {
        let b = w(3, "s1 s2 s1")
            .relation_move(0, RelationKind::Braid, Direction::Forward)
            .unwrap();
        assert_eq!(b.to_string(), "s2 s1 s2");
        let back = b.relation_move(0, RelationKind::Braid, Direction::Backward).unwrap();
        assert_eq!(back.to_string(), "s1 s2 s1");
        let c = w(4, "s1 s3")
            .relation_move(0, RelationKind::Commute, Direction::Forward)
            .unwrap();
        assert_eq!(c.to_string(), "s3 s1");
        assert_eq!(
            w(3, "s1 s2").relation_move(0, RelationKind::Braid, Direction::Forward),
            Err(BraidError::PatternMismatch(0))
        );
        assert!(w(3, "s1 s2^-1 s1")
            .relation_move(0, RelationKind::Braid, Direction::Forward)
            .is_err());
        let neg = w(3, "s1^-1 s2^-1 s1^-1")
            .relation_move(0, RelationKind::Braid, Direction::Forward)
            .unwrap();
        assert_eq!(neg.to_string(), "s2^-1 s1^-1 s2^-1");
    }

    #[test]
    fn invert_examples() {
        assert_eq!(w(3, "s2 s1").invert().to_string(), "s1^-1 s2^-1");
        assert!(BraidWord::identity(3).invert().is_empty());
        // g s5 s5 g^-1
        let g = w(7, "s3 s4 s6^-1");
        let core = w(7, "s5 s5");
        let b1 = g.concat(&core).unwrap().concat(&g.invert()).unwrap();
        assert_eq!(b1.to_string(), "s3 s4 s6^-1 s5 s5 s6 s4^-1 s3^-1");
    }

    #[test]
    fn text_and_json() {
        let x = w(5, "s3^-1 s4");
        assert_eq!(x.letters(), &[Letter::neg(3), Letter::pos(4)]);
        assert_eq!(serde_json::to_string(&x.to_json()).unwrap(), r#"{"n":5,"letters":[[3,-1],[4,1]]}"#);
        let back = BraidWord::from_json(&serde_json::from_str(r#"{"n":5,"letters":[[3,-1],[4,1]]}"#).unwrap()).unwrap();
        assert_eq!(back, x);
        assert_eq!("s2 s1".parse::<BraidWord>().unwrap().n(), 3);
        assert!(matches!(BraidWord::parse(3, "x2"), Err(BraidError::BadLetter(_))));
        assert!(matches!(BraidWord::parse(3, "s2^-2"), Err(BraidError::BadLetter(_))));
        assert_eq!(BraidWord::identity(3).to_string(), "1");
        assert!(BraidWord::parse(3, "1").unwrap().is_empty());
    }

    fn random_word(rng: &mut ChaCha8Rng) -> BraidWord {
        let n = rng.gen_range(2..=8);
        let len = rng.gen_range(0..30);
        let letters = (0..len)
            .map(|_| Letter {
                index: rng.gen_range(1..n),
                sign: if rng.gen_bool(0.5) { 1 } else { -1 },
            })
            .collect();
        BraidWord::new(n, letters).unwrap()
    }

    #[test]
    fn algebraic_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let x = random_word(&mut rng);
            let r = x.free_reduce();
            assert_eq!(r.free_reduce(), r);
            assert!(r.len() <= x.len());
            assert_eq!(r.permutation(), x.permutation());
            assert_eq!(r.exponent_sum(), x.exponent_sum());
            assert_eq!(x.invert().invert(), x);
            assert_eq!(x.invert().permutation(), x.permutation().inverse());
            assert!(x.concat(&x.invert()).unwrap().free_reduce().is_empty());
            let mut y = x.clone();
            for _ in 0..20 {
                let moves = y.applicable_moves();
                if moves.is_empty() {
                    break;
                }
                let (pos, kind, dir) = moves[rng.gen_range(0..moves.len())];
                y = y.relation_move(pos, kind, dir).unwrap();
                assert_eq!(y.permutation(), x.permutation());
                assert_eq!(y.exponent_sum(), x.exponent_sum());
            }
        }
    }

    #[test]
    fn permutation_algebra() {
        let p = Permutation::new(vec![2, 3, 1]).unwrap();
        assert_eq!(p.order(), 3);
        assert_eq!(p.then(&p.inverse()), Permutation::identity(3));
        assert!(Permutation::new(vec![1, 1]).is_none());
        assert_eq!(Permutation::new(vec![2, 1, 4, 3]).unwrap().cycle_type(), vec![2, 2]);
        assert_eq!(p.to_string(), "[2,3,1]");
    }
}
