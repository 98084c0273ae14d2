//! Permutations in one-line notation and their elementary symmetries.
//!
//! A [`Permutation`] is a rearrangement of `1..=n` stored in one-line
//! notation: the entry at position `i` is the image of `i`. Positions and
//! values are both 1-based, matching the usual combinatorial convention.
//! Entries are `u8`, so `n <= 255` structurally; whole-of-`S_n` enumeration
//! is capped separately (default 12).

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default upper bound on `n` for operations that touch all of `S_n`.
pub const DEFAULT_ENUMERATION_CAP: u8 = 12;

const FACTORIALS: [u64; 21] = [
    1,
    1,
    2,
    6,
    24,
    120,
    720,
    5_040,
    40_320,
    362_880,
    3_628_800,
    39_916_800,
    479_001_600,
    6_227_020_800,
    87_178_291_200,
    1_307_674_368_000,
    20_922_789_888_000,
    355_687_428_096_000,
    6_402_373_705_728_000,
    121_645_100_408_832_000,
    2_432_902_008_176_640_000,
];

/// `n!` as a `u64`. Panics for `n > 20`.
pub fn factorial(n: u8) -> u64 {
    FACTORIALS[n as usize]
}

/// A permutation of `{1, ..., n}` in one-line notation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    entries: Vec<u8>,
}

impl Permutation {
    /// Builds a permutation from its one-line entries, validating that they
    /// are exactly a rearrangement of `1..=n` with `n >= 1`.
    pub fn from_one_line(entries: impl Into<Vec<u8>>) -> Result<Self> {
        let entries = entries.into();
        let n = entries.len();
        if n == 0 {
            return Err(Error::InvalidInput("a permutation needs at least one entry".into()));
        }
        if n > u8::MAX as usize {
            return Err(Error::InvalidInput(format!("length {n} exceeds the entry width of 255")));
        }
        let mut seen = [false; 256];
        for &e in &entries {
            if e == 0 || e as usize > n {
                return Err(Error::InvalidInput(format!(
                    "entry {e} is outside 1..={n}"
                )));
            }
            if seen[e as usize] {
                return Err(Error::InvalidInput(format!("entry {e} repeats")));
            }
            seen[e as usize] = true;
        }
        Ok(Self { entries })
    }

    /// The identity permutation `1 2 ... n`. Panics if `n == 0`.
    pub fn identity(n: u8) -> Self {
        assert!(n >= 1, "the identity permutation needs n >= 1");
        Self { entries: (1..=n).collect() }
    }

    /// Standardization: the unique permutation whose entries compare pairwise
    /// like the entries of `word`. The word must be nonempty and duplicate-free.
    pub fn standardize(word: &[i64]) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::InvalidInput("cannot standardize an empty word".into()));
        }
        if word.len() > u8::MAX as usize {
            return Err(Error::InvalidInput(format!(
                "length {} exceeds the entry width of 255",
                word.len()
            )));
        }
        let mut order: Vec<usize> = (0..word.len()).collect();
        order.sort_by_key(|&i| word[i]);
        let mut entries = vec![0u8; word.len()];
        for (rank, &i) in order.iter().enumerate() {
            if rank > 0 && word[order[rank - 1]] == word[i] {
                return Err(Error::InvalidInput(format!("duplicate entry {}", word[i])));
            }
            entries[i] = (rank + 1) as u8;
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    /// One-line entries, position 1 first.
    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    /// The entry at 1-based position `pos`. Panics if out of range.
    pub fn entry(&self, pos: usize) -> u8 {
        self.entries[pos - 1]
    }

    /// The 1-based position of `value`. Panics if `value` is not present.
    pub fn position_of(&self, value: u8) -> usize {
        self.entries.iter().position(|&e| e == value).expect("value present") + 1
    }

    /// Reversal: entry `i` of the result is entry `n + 1 - i` of `self`.
    pub fn reverse(&self) -> Self {
        Self { entries: self.entries.iter().rev().copied().collect() }
    }

    /// Complement: each entry `e` becomes `n - e + 1`.
    /// (Some sources call this the conjugate.)
    pub fn complement(&self) -> Self {
        let n = self.entries.len() as u8;
        Self { entries: self.entries.iter().map(|&e| n - e + 1).collect() }
    }

    /// Group inverse: the result maps each value back to its position.
    pub fn inverse(&self) -> Self {
        let mut entries = vec![0u8; self.entries.len()];
        for (i, &e) in self.entries.iter().enumerate() {
            entries[e as usize - 1] = (i + 1) as u8;
        }
        Self { entries }
    }

    /// Signed position of `j` relative to the maximum entry `n`, after `a`
    /// iterate applications: `(-1)^a * (pos(j) - pos(n))`, positions 1-based.
    /// The entry `n` itself always sits at relative index 0.
    pub fn relative_index(&self, j: u8, a: u64) -> Result<RelativeIndex> {
        let n = self.entries.len() as u8;
        if j == 0 || j > n {
            return Err(Error::InvalidInput(format!("entry {j} is outside 1..={n}")));
        }
        let pos_j = self.position_of(j) as i32;
        let pos_n = self.position_of(n) as i32;
        let sign = if a % 2 == 0 { 1 } else { -1 };
        Ok(RelativeIndex { value: sign * (pos_j - pos_n), iterate_parity: (a % 2) as u8 })
    }

    /// Lexicographic rank in `S_n`, 0-based. Panics for `n > 20`.
    pub fn rank(&self) -> u64 {
        let n = self.entries.len();
        assert!(n <= 20, "rank only fits in u64 for n <= 20");
        let mut rank = 0u64;
        for i in 0..n {
            let smaller_later = self.entries[i + 1..]
                .iter()
                .filter(|&&e| e < self.entries[i])
                .count() as u64;
            rank += smaller_later * factorial((n - 1 - i) as u8);
        }
        rank
    }

    /// Inverse of [`rank`](Self::rank) under the default enumeration cap.
    pub fn unrank(n: u8, rank: u64) -> Result<Self> {
        Self::unrank_capped(n, rank, DEFAULT_ENUMERATION_CAP)
    }

    /// Inverse of [`rank`](Self::rank): the permutation of `S_n` at the given
    /// lexicographic rank, using the factorial number system.
    pub fn unrank_capped(n: u8, rank: u64, cap: u8) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if n > cap {
            return Err(Error::Capacity { n, cap });
        }
        if rank >= factorial(n) {
            return Err(Error::InvalidInput(format!(
                "rank {rank} is outside 0..{}",
                factorial(n)
            )));
        }
        let mut remaining: Vec<u8> = (1..=n).collect();
        let mut entries = Vec::with_capacity(n as usize);
        let mut rank = rank;
        for i in (0..n as usize).rev() {
            let f = factorial(i as u8);
            let idx = (rank / f) as usize;
            rank %= f;
            entries.push(remaining.remove(idx));
        }
        Ok(Self { entries })
    }

    /// Compact text: digits run together when every entry is a single digit,
    /// comma-separated otherwise. Used inside pattern and machine-spec text.
    pub(crate) fn compact_text(&self) -> String {
        if self.entries.iter().all(|&e| e <= 9) {
            self.entries.iter().map(|e| e.to_string()).collect()
        } else {
            self.entries
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

/// Advances `entries` to the lexicographically next permutation in place.
/// Returns `false` (leaving the slice untouched) from the last permutation.
pub(crate) fn next_lex_in_place(entries: &mut [u8]) -> bool {
    let n = entries.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| entries[i] < entries[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| entries[j] > entries[i]).unwrap();
    entries.swap(i, j);
    entries[i + 1..].reverse();
    true
}

/// Signed position of an entry relative to the maximum, with the iterate
/// parity that fixed the sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelativeIndex {
    pub value: i32,
    /// `a mod 2` for the iterate count `a` the sign was computed with.
    pub iterate_parity: u8,
}

/// Lexicographic iterator over all of `S_n`.
pub struct SnIter {
    next: Option<Vec<u8>>,
}

impl Iterator for SnIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut advanced = current.clone();
        if next_lex_in_place(&mut advanced) {
            self.next = Some(advanced);
        }
        Some(Permutation { entries: current })
    }
}

/// All `n!` permutations of `S_n` in lexicographic order, under the default cap.
pub fn enumerate_sn(n: u8) -> Result<SnIter> {
    enumerate_sn_capped(n, DEFAULT_ENUMERATION_CAP)
}

/// All `n!` permutations of `S_n` in lexicographic order, under an explicit cap.
pub fn enumerate_sn_capped(n: u8, cap: u8) -> Result<SnIter> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if n > cap {
        return Err(Error::Capacity { n, cap });
    }
    Ok(SnIter { next: Some((1..=n).collect()) })
}

impl fmt::Display for Permutation {
    /// Space-separated one-line notation, e.g. `4 6 8 5 11 7 2 9 10 3 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts space- or comma-separated entries (`"4 6 8"`, `"4,6,8"`), or a
    /// run of single digits for `n <= 9` (`"468"` is `(4, 6, 8)`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty permutation text".into()));
        }
        let entries: Vec<u8> = if s.contains(|c: char| c == ',' || c.is_whitespace()) {
            s.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<u8>()
                        .map_err(|_| Error::Parse(format!("`{t}` is not an entry in 1..=255")))
                })
                .collect::<Result<_>>()?
        } else if s.len() > 1 && s.bytes().all(|b| b.is_ascii_digit()) {
            s.bytes().map(|b| b - b'0').collect()
        } else {
            vec![s
                .parse::<u8>()
                .map_err(|_| Error::Parse(format!("`{s}` is not an entry in 1..=255")))?]
        };
        Permutation::from_one_line(entries).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<u8>::deserialize(deserializer)?;
        Permutation::from_one_line(entries).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(Permutation::standardize(&[4, 9, 2]).unwrap(), p("231"));
        assert_eq!(Permutation::standardize(&[1, 2, 3]).unwrap(), p("123"));
        assert_eq!(Permutation::standardize(&[3, 6, 5]).unwrap(), p("132"));
        assert_eq!(Permutation::standardize(&[-7, 0, -9]).unwrap(), p("231"));
    }

    #[test]
    fn standardize_rejects_duplicates_and_empty() {
        assert!(matches!(Permutation::standardize(&[3, 3]), Err(Error::InvalidInput(_))));
        assert!(matches!(Permutation::standardize(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn from_one_line_validates() {
        assert!(Permutation::from_one_line(vec![2, 1, 3]).is_ok());
        assert!(Permutation::from_one_line(vec![]).is_err());
        assert!(Permutation::from_one_line(vec![1, 1]).is_err());
        assert!(Permutation::from_one_line(vec![1, 3]).is_err());
        assert!(Permutation::from_one_line(vec![0]).is_err());
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(p("123").reverse(), p("321"));
        assert_eq!(p("231").reverse(), p("132"));
        assert_eq!(p("132").complement(), p("312"));
        assert_eq!(p("231").complement(), p("213"));
        assert_eq!(p("123").inverse(), p("123"));
        assert_eq!(p("312").inverse(), p("231"));
    }

    #[test]
    fn relative_index_examples() {
        let q = p("24135");
        assert_eq!(q.relative_index(5, 0).unwrap().value, 0);
        assert_eq!(q.relative_index(5, 7).unwrap().value, 0);
        assert_eq!(q.relative_index(3, 0).unwrap().value, -1);
        assert_eq!(q.relative_index(3, 1).unwrap().value, 1);
        assert_eq!(q.relative_index(3, 1).unwrap().iterate_parity, 1);
        assert!(q.relative_index(6, 0).is_err());
        assert!(q.relative_index(0, 0).is_err());
    }

    #[test]
    fn lex_enumeration_of_s3() {
        let all: Vec<String> = enumerate_sn(3).unwrap().map(|q| q.to_string()).collect();
        assert_eq!(all, ["1 2 3", "1 3 2", "2 1 3", "2 3 1", "3 1 2", "3 2 1"]);
        assert_eq!(enumerate_sn(4).unwrap().count(), 24);
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(enumerate_sn(13), Err(Error::Capacity { n: 13, cap: 12 })));
        assert!(enumerate_sn_capped(13, 13).is_ok());
        assert!(matches!(Permutation::unrank(13, 0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn rank_and_unrank_examples() {
        assert_eq!(Permutation::identity(7).rank(), 0);
        assert_eq!(p("321").rank(), 5);
        assert_eq!(Permutation::unrank(3, 5).unwrap(), p("321"));
        assert!(Permutation::unrank(3, 6).is_err());
        for (r, q) in enumerate_sn(5).unwrap().enumerate() {
            assert_eq!(q.rank(), r as u64);
            assert_eq!(Permutation::unrank(5, r as u64).unwrap(), q);
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(p("4 6 8 5 11 7 2 9 10 3 1").len(), 11);
        assert_eq!(p("4,6,8,5,11,7,2,9,10,3,1"), p("4 6 8 5 11 7 2 9 10 3 1"));
        assert_eq!(p("231").entries(), &[2, 3, 1]);
        assert_eq!(p("1").entries(), &[1]);
        assert!("".parse::<Permutation>().is_err());
        assert!("2 2".parse::<Permutation>().is_err());
        assert!("12 x".parse::<Permutation>().is_err());
    }

    #[test]
    fn display_roundtrip() {
        let q = p("4 6 8 5 11 7 2 9 10 3 1");
        assert_eq!(q.to_string().parse::<Permutation>().unwrap(), q);
    }

    #[test]
    fn serde_roundtrip_and_validation() {
        let q = p("24135");
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "[2,4,1,3,5]");
        assert_eq!(serde_json::from_str::<Permutation>(&json).unwrap(), q);
        assert!(serde_json::from_str::<Permutation>("[1,1]").is_err());
    }
}
