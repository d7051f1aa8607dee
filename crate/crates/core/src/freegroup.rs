//! Reduced words in the free group on `x1..xd` and automorphisms given by the
//! images of the generators.
//!
//! Generator indices are 1-based throughout, matching the textual syntax
//! `x1*x2^-1*x1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A generator or its inverse. Ordered by index, then positive before
/// inverse; this is the order used for lexicographic tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn gen(index: usize) -> Self {
        Letter { index, inverse: false }
    }

    pub fn inv(index: usize) -> Self {
        Letter { index, inverse: true }
    }

    pub fn inverted(self) -> Self {
        Letter { index: self.index, inverse: !self.inverse }
    }

    fn cancels(self, other: Letter) -> bool {
        self.index == other.index && self.inverse != other.inverse
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord {
    letters: Vec<Letter>,
}

fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if out.last().is_some_and(|&last| last.cancels(l)) {
        out.pop();
    } else {
        out.push(l);
    }
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord::default()
    }

    pub fn generator(index: usize) -> Self {
        FreeWord { letters: vec![Letter::gen(index)] }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out = Vec::new();
        for l in letters {
            push_reduced(&mut out, l);
        }
        FreeWord { letters: out }
    }

    /// Reduces `raw` after checking every index lies in `1..=rank`.
    pub fn reduce(raw: &[Letter], rank: usize) -> Result<Self> {
        if let Some(l) = raw.iter().find(|l| l.index == 0 || l.index > rank) {
            return Err(Error::IndexOutOfRange { index: l.index, rank });
        }
        Ok(FreeWord::from_letters(raw.iter().copied()))
    }

    /// Positive word `x_start * x_{start+1} * ... * x_{start+len-1}`.
    pub fn product_range(start: usize, len: usize) -> Self {
        FreeWord { letters: (start..start + len).map(Letter::gen).collect() }
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

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest generator index used, 0 for the identity.
    pub fn max_index(&self) -> usize {
        self.letters.iter().map(|l| l.index).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        FreeWord { letters: self.letters.iter().rev().map(|l| l.inverted()).collect() }
    }

    pub fn mul(&self, other: &FreeWord) -> Self {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut out, l);
        }
        FreeWord { letters: out }
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `g * self * g^-1`.
    pub fn conjugate_by(&self, g: &FreeWord) -> Self {
        g.mul(self).mul(&g.inverse())
    }

    /// Splits a conjugate of a single letter as `c * y * c^-1`. In a reduced
    /// word this decomposition is literal, so it is unique when it exists.
    pub fn conjugate_core(&self) -> Option<(FreeWord, Letter)> {
        let n = self.letters.len();
        if n.is_multiple_of(2) {
            return None;
        }
        let k = n / 2;
        for j in 0..k {
            if self.letters[n - 1 - j] != self.letters[j].inverted() {
                return None;
            }
        }
        Some((FreeWord { letters: self.letters[..k].to_vec() }, self.letters[k]))
    }

    /// Formats with a custom generator prefix, e.g. `"x"` or `"b"`.
    pub fn render(&self, prefix: &str) -> String {
        render_letters(&self.letters, prefix)
    }

    /// Parses `x1*x2^-1*x3^2`; `1` or the empty string is the identity.
    pub fn parse_with(s: &str, prefix: &str) -> Result<Self> {
        Ok(FreeWord::from_letters(parse_letters(s, prefix)?))
    }
}

pub(crate) fn render_letters(letters: &[Letter], prefix: &str) -> String {
    if letters.is_empty() {
        return "1".to_string();
    }
    letters
        .iter()
        .map(|l| {
            if l.inverse {
                format!("{prefix}{}^-1", l.index)
            } else {
                format!("{prefix}{}", l.index)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

pub(crate) fn parse_letters(s: &str, prefix: &str) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    let bad = || Error::MalformedInput(format!("cannot parse word {s:?}"));
    let mut out = Vec::new();
    for factor in s.split('*') {
        let factor = factor.trim();
        let rest = factor.strip_prefix(prefix).ok_or_else(bad)?;
        let (idx, exp) = match rest.split_once('^') {
            Some((i, e)) => (i, e.trim().parse::<i64>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let index: usize = idx.trim().parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        let letter = if exp < 0 { Letter::inv(index) } else { Letter::gen(index) };
        out.extend(std::iter::repeat_n(letter, exp.unsigned_abs() as usize));
    }
    Ok(out)
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

impl FromStr for FreeWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FreeWord::parse_with(s, "x")
    }
}

impl Serialize for FreeWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FreeWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An endomorphism of the free group of rank `rank`, given by the images of
/// the generators. Everything this crate builds is an automorphism.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeAutomorphism {
    rank: usize,
    images: Vec<FreeWord>,
}

impl FreeAutomorphism {
    pub fn identity(rank: usize) -> Self {
        FreeAutomorphism { rank, images: (1..=rank).map(FreeWord::generator).collect() }
    }

    pub fn new(images: Vec<FreeWord>) -> Result<Self> {
        let rank = images.len();
        for w in &images {
            let m = w.max_index();
            if m > rank {
                return Err(Error::IndexOutOfRange { index: m, rank });
            }
        }
        Ok(FreeAutomorphism { rank, images })
    }

    /// `x_i -> g * x_i * g^-1` for every generator.
    pub fn inner(g: &FreeWord, rank: usize) -> Result<Self> {
        if g.max_index() > rank {
            return Err(Error::IndexOutOfRange { index: g.max_index(), rank });
        }
        Ok(FreeAutomorphism {
            rank,
            images: (1..=rank).map(|i| FreeWord::generator(i).conjugate_by(g)).collect(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    /// Image of `x_index` (1-based).
    pub fn image(&self, index: usize) -> &FreeWord {
        &self.images[index - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, w)| *w == FreeWord::generator(i + 1))
    }

    /// Length of the longest image.
    pub fn max_image_len(&self) -> usize {
        self.images.iter().map(FreeWord::len).max().unwrap_or(0)
    }

    pub(crate) fn apply_unchecked(&self, w: &FreeWord) -> FreeWord {
        let mut out = Vec::new();
        for l in w.letters() {
            let img = &self.images[l.index - 1];
            if l.inverse {
                for &m in img.letters.iter().rev() {
                    push_reduced(&mut out, m.inverted());
                }
            } else {
                for &m in &img.letters {
                    push_reduced(&mut out, m);
                }
            }
        }
        FreeWord { letters: out }
    }

    /// Substitutes the images into `w` and reduces.
    pub fn apply(&self, w: &FreeWord) -> Result<FreeWord> {
        if w.max_index() > self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: w.max_index() });
        }
        Ok(self.apply_unchecked(w))
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &FreeAutomorphism) -> Result<Self> {
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: other.rank });
        }
        Ok(FreeAutomorphism {
            rank: self.rank,
            images: other.images.iter().map(|w| self.apply_unchecked(w)).collect(),
        })
    }

    /// Finds the shortest `g` (ties broken lexicographically) with
    /// `self(x_i) = g * other(x_i) * g^-1` for every generator.
    ///
    /// Both automorphisms must send each generator to a conjugate of a
    /// generator. Matching the first generator pins `g` to a coset
    /// `c_a * x_k^t * c_b^-1` of the cyclic centralizer of the core letter;
    /// the exponent `t` is bounded by the word lengths involved.
    pub fn is_inner_shift(&self, other: &FreeAutomorphism) -> Result<Option<FreeWord>> {
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, found: other.rank });
        }
        let cores = |a: &FreeAutomorphism| -> Result<Vec<(FreeWord, Letter)>> {
            a.images
                .iter()
                .enumerate()
                .map(|(i, w)| w.conjugate_core().ok_or(Error::UnsupportedForm { generator: i + 1 }))
                .collect()
        };
        let self_cores = cores(self)?;
        let other_cores = cores(other)?;
        if self_cores.iter().zip(&other_cores).any(|(a, b)| a.1 != b.1) {
            return Ok(None);
        }
        let (ca, core) = &self_cores[0];
        let (cb, _) = &other_cores[0];
        let centralizer = FreeWord::generator(core.index);
        let bound = (self.max_image_len() + other.max_image_len() + 2) as i64;
        let mut best: Option<FreeWord> = None;
        for t in -bound..=bound {
            let g = ca.mul(&centralizer.pow(t)).mul(&cb.inverse());
            let fits = (0..self.rank).all(|i| self.images[i] == other.images[i].conjugate_by(&g));
            if fits {
                let better = match &best {
                    None => true,
                    Some(b) => (g.len(), &g) < (b.len(), b),
                };
                if better {
                    best = Some(g);
                }
            }
        }
        Ok(best)
    }
}

impl fmt::Display for FreeAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "x{} -> {}", i + 1, w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> FreeWord {
        s.parse().unwrap()
    }

    fn auto(images: &[&str]) -> FreeAutomorphism {
        FreeAutomorphism::new(images.iter().map(|s| w(s)).collect()).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let raw = [Letter::gen(1), Letter::inv(1)];
        assert!(FreeWord::reduce(&raw, 2).unwrap().is_identity());
        let raw = [Letter::gen(1), Letter::gen(2), Letter::inv(2), Letter::gen(1)];
        assert_eq!(FreeWord::reduce(&raw, 2).unwrap(), w("x1*x1"));
        let raw = [Letter::gen(2), Letter::gen(1), Letter::inv(1), Letter::inv(2), Letter::gen(3)];
        assert_eq!(FreeWord::reduce(&raw, 3).unwrap(), w("x3"));
        assert_eq!(
            FreeWord::reduce(&[Letter::gen(4)], 3),
            Err(Error::IndexOutOfRange { index: 4, rank: 3 })
        );
    }

    #[test]
    fn syntax_round_trip() {
        assert_eq!(w("x1*x2^-1*x1").to_string(), "x1*x2^-1*x1");
        assert_eq!(w("x1^3").to_string(), "x1*x1*x1");
        assert_eq!(w("1").to_string(), "1");
        assert_eq!(w("x2^-2").to_string(), "x2^-1*x2^-1");
        assert!("y1".parse::<FreeWord>().is_err());
        assert!("x0".parse::<FreeWord>().is_err());
    }

    #[test]
    fn apply_examples() {
        let id = FreeAutomorphism::identity(3);
        assert_eq!(id.apply(&w("x3*x1^-1")).unwrap(), w("x3*x1^-1"));

        let a = auto(&["x1*x2*x1^-1", "x2"]);
        assert_eq!(a.apply(&w("x1*x2")).unwrap(), w("x1*x2*x1^-1*x2"));
        assert_eq!(a.apply(&w("x3")), Err(Error::DimensionMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn inner_composition() {
        let g = FreeAutomorphism::inner(&w("x1"), 3).unwrap();
        let h = FreeAutomorphism::inner(&w("x2"), 3).unwrap();
        let gh = FreeAutomorphism::inner(&w("x1*x2"), 3).unwrap();
        assert_eq!(g.compose(&h).unwrap(), gh);
        let a = auto(&["x2", "x1", "x3"]);
        assert_eq!(a.compose(&FreeAutomorphism::identity(3)).unwrap(), a);
        assert!(a.compose(&FreeAutomorphism::identity(2)).is_err());
    }

    #[test]
    fn conjugate_core_split() {
        let (c, y) = w("x1*x2*x3*x2^-1*x1^-1").conjugate_core().unwrap();
        assert_eq!(c, w("x1*x2"));
        assert_eq!(y, Letter::gen(3));
        assert!(w("x1*x2").conjugate_core().is_none());
        assert!(w("x1*x2*x1").conjugate_core().is_none());
        assert_eq!(w("x2^-1").conjugate_core(), Some((FreeWord::identity(), Letter::inv(2))));
    }

    #[test]
    fn inner_shift_examples() {
        let b = auto(&["x2*x1*x2^-1", "x2", "x1*x3*x1^-1"]);
        assert_eq!(b.is_inner_shift(&b).unwrap(), Some(FreeWord::identity()));

        let g = w("x1*x2");
        let a = FreeAutomorphism::inner(&g, 3).unwrap().compose(&b).unwrap();
        assert_eq!(a.is_inner_shift(&b).unwrap(), Some(g));

        let b = FreeAutomorphism::identity(2);
        let a = auto(&["x2*x1*x2^-1", "x2"]);
        assert_eq!(a.is_inner_shift(&b).unwrap(), Some(w("x2")));
        let a = auto(&["x2*x1*x2^-1", "x1*x2*x1^-1"]);
        assert_eq!(a.is_inner_shift(&b).unwrap(), None);

        let weird = auto(&["x1*x2", "x2"]);
        assert_eq!(
            weird.is_inner_shift(&b),
            Err(Error::UnsupportedForm { generator: 1 })
        );
    }

    fn all_words(rank: usize, max_len: usize) -> Vec<FreeWord> {
        let mut out = vec![FreeWord::identity()];
        let mut frontier = vec![FreeWord::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for u in &frontier {
                for i in 1..=rank {
                    for l in [Letter::gen(i), Letter::inv(i)] {
                        if u.letters().last().is_some_and(|&x| x.cancels(l)) {
                            continue;
                        }
                        let mut v = u.clone();
                        v.letters.push(l);
                        next.push(v);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    fn letter_of_rank(rank: usize) -> impl Strategy<Value = Letter> {
        (1usize..=rank, any::<bool>()).prop_map(|(index, inverse)| Letter { index, inverse })
    }

    fn letter() -> impl Strategy<Value = Letter> {
        letter_of_rank(3)
    }

    fn word_of_rank(rank: usize, max: usize) -> impl Strategy<Value = FreeWord> {
        prop::collection::vec(letter_of_rank(rank), 0..max).prop_map(FreeWord::from_letters)
    }

    fn word(max: usize) -> impl Strategy<Value = FreeWord> {
        word_of_rank(3, max)
    }

    /// Automorphisms of the form x_i -> c_i * x_{pi(i)} * c_i^-1 are general
    /// enough for the conjugator search.
    fn conj_form(rank: usize, conj_len: usize) -> impl Strategy<Value = FreeAutomorphism> {
        prop::collection::vec(word_of_rank(rank, conj_len + 1), rank).prop_map(move |cs| {
            let images = cs
                .iter()
                .enumerate()
                .map(|(i, c)| FreeWord::generator(i + 1).conjugate_by(c))
                .collect();
            FreeAutomorphism::new(images).unwrap()
        })
    }

    proptest! {
        #[test]
        fn reduce_idempotent(raw in prop::collection::vec(letter(), 0..20)) {
            let once = FreeWord::from_letters(raw.clone());
            prop_assert!(once.len() <= raw.len());
            prop_assert_eq!(FreeWord::from_letters(once.letters().to_vec()), once.clone());
            prop_assert!(once.letters().windows(2).all(|p| !p[0].cancels(p[1])));
        }

        #[test]
        fn apply_respects_composition(
            a in prop::collection::vec(word(4), 3),
            b in prop::collection::vec(word(4), 3),
            x in word(6),
        ) {
            let a = FreeAutomorphism::new(a).unwrap();
            let b = FreeAutomorphism::new(b).unwrap();
            let ab = a.compose(&b).unwrap();
            prop_assert_eq!(ab.apply(&x).unwrap(), a.apply(&b.apply(&x).unwrap()).unwrap());
        }

        #[test]
        fn inner_shift_recovers_conjugator(b in conj_form(3, 2), g in word(4)) {
            let a = FreeAutomorphism::inner(&g, 3).unwrap().compose(&b).unwrap();
            let found = a.is_inner_shift(&b).unwrap();
            prop_assert_eq!(found, Some(g));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn absent_shift_confirmed_by_enumeration(a in conj_form(2, 1), b in conj_form(2, 1)) {
            if a.is_inner_shift(&b).unwrap().is_none() {
                let bound = a.max_image_len() + b.max_image_len()
                    + a.max_image_len().max(b.max_image_len());
                for g in all_words(2, bound) {
                    let fits = (1..=2).all(|i| *a.image(i) == b.image(i).conjugate_by(&g));
                    prop_assert!(!fits, "missed conjugator {}", g);
                }
            }
        }
    }
}
