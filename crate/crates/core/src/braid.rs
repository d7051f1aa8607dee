//! Braid words in the Artin generators `b1..b(n-1)` and their action on the
//! free group of the punctured plane.
//!
//! The action is right conjugation: a braid `b` sends a loop `x` to
//! `b^-1 * x * b`. For a single generator,
//!
//! ```text
//! b_i:  x_i -> x_i * x_{i+1} * x_i^-1,   x_{i+1} -> x_i,   x_j -> x_j
//! ```
//!
//! and for a concatenation `u * v` the action is `act(v) ∘ act(u)`: letters
//! are substituted left to right, each one into the images produced by the
//! letters before it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clusters::Cluster;
use crate::error::{Error, Result};
use crate::freegroup::{parse_letters, render_letters, FreeAutomorphism, FreeWord, Letter};

/// A word in the braid group on `strands` strands. Letters reuse
/// [`Letter`]; `index` k stands for the generator crossing strands k, k+1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<Letter>,
}

impl BraidWord {
    pub fn identity(strands: usize) -> Self {
        BraidWord { strands, letters: Vec::new() }
    }

    pub fn new(strands: usize, letters: Vec<Letter>) -> Result<Self> {
        if strands < 2 {
            return Err(Error::MalformedInput(format!("a braid needs at least 2 strands, got {strands}")));
        }
        if let Some(l) = letters.iter().find(|l| l.index == 0 || l.index >= strands) {
            return Err(Error::IndexOutOfRange { index: l.index, rank: strands - 1 });
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn generator(strands: usize, k: usize) -> Result<Self> {
        BraidWord::new(strands, vec![Letter::gen(k)])
    }

    pub fn strands(&self) -> usize {
        self.strands
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

    pub fn push(&mut self, l: Letter) {
        assert!(l.index >= 1 && l.index < self.strands, "braid letter out of range");
        self.letters.push(l);
    }

    pub fn concat(&self, other: &BraidWord) -> Result<Self> {
        if self.strands != other.strands {
            return Err(Error::DimensionMismatch { expected: self.strands, found: other.strands });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { strands: self.strands, letters })
    }

    pub fn inverse(&self) -> Self {
        BraidWord {
            strands: self.strands,
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    pub fn pow(&self, n: usize) -> Self {
        BraidWord { strands: self.strands, letters: self.letters.repeat(n) }
    }

    /// Permutation induced on strand positions: `perm[k]` is the starting
    /// position of the strand that ends at position `k` (0-based).
    pub fn permutation(&self) -> Vec<usize> {
        let mut at: Vec<usize> = (0..self.strands).collect();
        for l in &self.letters {
            at.swap(l.index - 1, l.index);
        }
        at
    }

    pub fn is_pure(&self) -> bool {
        self.permutation().iter().enumerate().all(|(i, &s)| i == s)
    }

    /// Cancels adjacent `b_k * b_k^-1` pairs. Does not apply braid relations.
    pub fn freely_reduced(&self) -> Self {
        BraidWord {
            strands: self.strands,
            letters: FreeWord::from_letters(self.letters.iter().copied()).letters().to_vec(),
        }
    }

    pub fn parse(s: &str, strands: usize) -> Result<Self> {
        BraidWord::new(strands, parse_letters(s, "b")?)
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_letters(&self.letters, "b"))
    }
}

impl Serialize for BraidWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            strands: usize,
            word: &'a str,
        }
        Repr { strands: self.strands, word: &self.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BraidWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            strands: usize,
            word: String,
        }
        let r = Repr::deserialize(d)?;
        BraidWord::parse(&r.word, r.strands).map_err(serde::de::Error::custom)
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match parse_letters(s, "b")?.as_slice() {
            [l] => Ok(*l),
            _ => Err(Error::MalformedInput(format!("expected a single braid letter, got {s:?}"))),
        }
    }
}

/// Replaces every image `w` by `act(letter)(w)`.
fn substitute(images: &mut [FreeWord], letter: Letter) {
    let k = letter.index;
    let xk = FreeWord::generator(k);
    let xk1 = FreeWord::generator(k + 1);
    let (img_k, img_k1) = if letter.inverse {
        // inverse of the rule: x_k -> x_{k+1}, x_{k+1} -> x_{k+1}^-1 x_k x_{k+1}
        (xk1.clone(), xk.conjugate_by(&xk1.inverse()))
    } else {
        (xk1.conjugate_by(&xk), xk.clone())
    };
    let mut step = FreeAutomorphism::identity(images.len());
    step = FreeAutomorphism::new(
        step.images()
            .iter()
            .enumerate()
            .map(|(i, w)| match i + 1 {
                j if j == k => img_k.clone(),
                j if j == k + 1 => img_k1.clone(),
                _ => w.clone(),
            })
            .collect(),
    )
    .expect("braid step images stay in range");
    for w in images.iter_mut() {
        *w = step.apply_unchecked(w);
    }
}

/// The automorphism of the free group of rank `rank` induced by `b`.
pub fn braid_action(b: &BraidWord, rank: usize) -> Result<FreeAutomorphism> {
    if b.strands != rank {
        return Err(Error::DimensionMismatch { expected: rank, found: b.strands });
    }
    let mut images: Vec<FreeWord> = (1..=rank).map(FreeWord::generator).collect();
    for &l in &b.letters {
        substitute(&mut images, l);
    }
    FreeAutomorphism::new(images)
}

/// `(b_m * ... * b_{m+l-2})^l`: the full twist of the strands of an interval
/// cluster, which realizes its Dehn twist.
pub fn lambda_braid(c: &Cluster, strands: usize) -> Result<BraidWord> {
    if c.len < 2 || c.start == 0 || c.start + c.len - 1 > strands {
        return Err(Error::IntervalOutOfRange { start: c.start, len: c.len, rank: strands });
    }
    let sweep: Vec<Letter> = (c.start..c.start + c.len - 1).map(Letter::gen).collect();
    BraidWord::new(strands, sweep.repeat(c.len))
}

/// The puncture loop `x_i` as a pure braid on `d + 1` strands:
/// `(b_d ... b_{i+1}) * b_i^2 * (b_d ... b_{i+1})^-1`.
pub fn puncture_loop_braid(i: usize, d: usize) -> Result<BraidWord> {
    if i == 0 || i > d {
        return Err(Error::IndexOutOfRange { index: i, rank: d });
    }
    let prefix: Vec<Letter> = (i + 1..=d).rev().map(Letter::gen).collect();
    let mut letters = prefix.clone();
    letters.push(Letter::gen(i));
    letters.push(Letter::gen(i));
    letters.extend(prefix.iter().rev().map(|l| l.inverted()));
    BraidWord::new(d + 1, letters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FreeWord {
        s.parse().unwrap()
    }

    fn b(s: &str, n: usize) -> BraidWord {
        BraidWord::parse(s, n).unwrap()
    }

    #[test]
    fn single_generator_action() {
        let a = braid_action(&b("b1", 2), 2).unwrap();
        assert_eq!(a.images(), &[w("x1*x2*x1^-1"), w("x1")]);
        let inv = braid_action(&b("b1^-1", 2), 2).unwrap();
        assert!(a.compose(&inv).unwrap().is_identity());
        assert!(inv.compose(&a).unwrap().is_identity());
    }

    #[test]
    fn empty_braid_is_identity() {
        assert!(braid_action(&BraidWord::identity(4), 4).unwrap().is_identity());
    }

    #[test]
    fn adjacent_generators_do_not_commute() {
        let a = braid_action(&b("b1*b2", 3), 3).unwrap();
        let c = braid_action(&b("b2*b1", 3), 3).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sweep_shifts_and_wraps() {
        // b1*b2 conjugates x1 to (x1 x2) x3 (x1 x2)^-1 and shifts x2, x3 down.
        let a = braid_action(&b("b1*b2", 3), 3).unwrap();
        assert_eq!(a.images(), &[w("x1*x2*x3*x2^-1*x1^-1"), w("x1"), w("x2")]);
    }

    #[test]
    fn dimension_checks() {
        assert_eq!(
            braid_action(&b("b1", 2), 3),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(BraidWord::parse("b3", 3).is_err());
        assert!(BraidWord::new(1, vec![]).is_err());
    }

    #[test]
    fn lambda_words() {
        let c = |start, len| Cluster { start, len, depth: 1 };
        assert_eq!(lambda_braid(&c(1, 2), 2).unwrap().to_string(), "b1*b1");
        assert_eq!(lambda_braid(&c(1, 3), 4).unwrap().to_string(), "b1*b2*b1*b2*b1*b2");
        assert_eq!(lambda_braid(&c(2, 2), 4).unwrap().to_string(), "b2*b2");
        assert!(lambda_braid(&c(3, 3), 4).is_err());
        assert!(lambda_braid(&c(1, 1), 4).is_err());
    }

    #[test]
    fn puncture_loops() {
        assert_eq!(puncture_loop_braid(3, 3).unwrap().to_string(), "b3*b3");
        assert_eq!(puncture_loop_braid(1, 2).unwrap().to_string(), "b2*b1*b1*b2^-1");
        assert_eq!(puncture_loop_braid(2, 3).unwrap().to_string(), "b3*b2*b2*b3^-1");
        assert!(puncture_loop_braid(0, 3).is_err());
        assert!(puncture_loop_braid(4, 3).is_err());
        for d in 2..6 {
            for i in 1..=d {
                assert!(puncture_loop_braid(i, d).unwrap().is_pure());
            }
        }
    }

    /// In B_{d+1}, conjugating the puncture-loop braids by b_j (j < d) must
    /// reproduce the generator rule, read through the faithful action on
    /// F_{d+1}.
    #[test]
    fn puncture_loops_conjugate_like_generators() {
        for d in 2..=5 {
            let loops: Vec<BraidWord> = (1..=d).map(|i| puncture_loop_braid(i, d).unwrap()).collect();
            let word_to_braid = |fw: &FreeWord| -> BraidWord {
                let mut out = BraidWord::identity(d + 1);
                for l in fw.letters() {
                    let piece = &loops[l.index - 1];
                    let piece = if l.inverse { piece.inverse() } else { piece.clone() };
                    out = out.concat(&piece).unwrap();
                }
                out
            };
            for j in 1..d {
                let rule = braid_action(&BraidWord::generator(d, j).unwrap(), d).unwrap();
                let bj = BraidWord::generator(d + 1, j).unwrap();
                for i in 1..=d {
                    let lhs = bj.inverse().concat(&loops[i - 1]).unwrap().concat(&bj).unwrap();
                    let rhs = word_to_braid(rule.image(i));
                    assert_eq!(
                        braid_action(&lhs, d + 1).unwrap(),
                        braid_action(&rhs, d + 1).unwrap(),
                        "d={d} j={j} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn permutation_of_swaps() {
        let w = b("b1*b2", 3);
        assert_eq!(w.permutation(), vec![1, 2, 0]);
        assert!(!w.is_pure());
        assert!(b("b1*b1", 3).is_pure());
    }

    #[test]
    fn serde_shape() {
        let w = b("b1*b2^-1", 3);
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"strands":3,"word":"b1*b2^-1"}"#);
        assert_eq!(serde_json::from_str::<BraidWord>(&s).unwrap(), w);
    }
}
