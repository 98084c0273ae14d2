//! Classical and consecutive pattern containment, occurrence enumeration,
//! and avoidance-class enumeration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::perm::{enumerate_sn_capped, Permutation, DEFAULT_ENUMERATION_CAP};

/// How a pattern may occur in a host permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Any subsequence in the same relative order as the pattern.
    Classical,
    /// A subsequence occupying contiguous positions.
    Consecutive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Classical => write!(f, "classical"),
            Mode::Consecutive => write!(f, "consecutive"),
        }
    }
}

/// A pattern: a permutation of length at least 2 plus a containment mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    perm: Permutation,
    mode: Mode,
}

impl Pattern {
    pub fn new(perm: Permutation, mode: Mode) -> Result<Self> {
        if perm.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a pattern needs length >= 2, got {}",
                perm.len()
            )));
        }
        Ok(Self { perm, mode })
    }

    pub fn classical(perm: Permutation) -> Result<Self> {
        Self::new(perm, Mode::Classical)
    }

    pub fn consecutive(perm: Permutation) -> Result<Self> {
        Self::new(perm, Mode::Consecutive)
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 2 by construction
    }
}

impl fmt::Display for Pattern {
    /// `c:231` for consecutive, `p:231` for classical (plain).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.mode {
            Mode::Classical => 'p',
            Mode::Consecutive => 'c',
        };
        write!(f, "{prefix}:{}", self.perm.compact_text())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// Accepts `c:<perm>` (consecutive), `p:<perm>` (classical), or a bare
    /// permutation, which defaults to consecutive.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (mode, rest) = match s.split_once(':') {
            Some(("c", rest)) => (Mode::Consecutive, rest),
            Some(("p", rest)) => (Mode::Classical, rest),
            Some((other, _)) => {
                return Err(Error::Parse(format!(
                    "unknown pattern mode `{other}` (expected `c` or `p`)"
                )))
            }
            None => (Mode::Consecutive, s),
        };
        let perm: Permutation = rest.parse()?;
        Pattern::new(perm, mode).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// The positions (1-based, strictly increasing) of one pattern occurrence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Occurrence {
    positions: Vec<u8>,
}

impl Occurrence {
    pub fn positions(&self) -> &[u8] {
        &self.positions
    }
}

/// The window starting at `start` is order-isomorphic to `pat`.
fn window_matches(host: &[u8], start: usize, pat: &[u8]) -> bool {
    let k = pat.len();
    for i in 0..k {
        for j in i + 1..k {
            if (host[start + i] < host[start + j]) != (pat[i] < pat[j]) {
                return false;
            }
        }
    }
    true
}

pub(crate) fn contains_consecutive_slice(host: &[u8], pat: &[u8]) -> bool {
    let (n, k) = (host.len(), pat.len());
    if k > n {
        return false;
    }
    (0..=n - k).any(|start| window_matches(host, start, pat))
}

/// Backtracking over candidate positions; each extension is pruned by the
/// pairwise value relations the pattern demands so far.
fn classical_backtrack(
    host: &[u8],
    pat: &[u8],
    chosen: &mut Vec<u8>,
    out: &mut Option<&mut Vec<Occurrence>>,
) -> bool {
    let (n, k) = (host.len(), pat.len());
    let depth = chosen.len();
    if depth == k {
        if let Some(list) = out.as_deref_mut() {
            list.push(Occurrence { positions: chosen.clone() });
            return false; // keep searching for every occurrence
        }
        return true;
    }
    let lo = chosen.last().map_or(0, |&p| p as usize); // next 0-based candidate
    for pos in lo..=n - (k - depth) {
        let v = host[pos];
        let consistent = (0..depth).all(|i| {
            (host[chosen[i] as usize - 1] < v) == (pat[i] < pat[depth])
        });
        if consistent {
            chosen.push((pos + 1) as u8);
            if classical_backtrack(host, pat, chosen, out) {
                chosen.pop();
                return true;
            }
            chosen.pop();
        }
    }
    false
}

pub(crate) fn contains_classical_slice(host: &[u8], pat: &[u8]) -> bool {
    if pat.len() > host.len() {
        return false;
    }
    classical_backtrack(host, pat, &mut Vec::with_capacity(pat.len()), &mut None)
}

/// Does `host` contain at least one occurrence of `p` under its mode?
pub fn contains(host: &Permutation, p: &Pattern) -> bool {
    match p.mode() {
        Mode::Consecutive => contains_consecutive_slice(host.entries(), p.perm().entries()),
        Mode::Classical => contains_classical_slice(host.entries(), p.perm().entries()),
    }
}

/// Every occurrence of `p` in `host`, sorted lexicographically by positions.
pub fn occurrences(host: &Permutation, p: &Pattern) -> Vec<Occurrence> {
    let (h, pat) = (host.entries(), p.perm().entries());
    let k = pat.len();
    if k > h.len() {
        return Vec::new();
    }
    match p.mode() {
        Mode::Consecutive => (0..=h.len() - k)
            .filter(|&start| window_matches(h, start, pat))
            .map(|start| Occurrence {
                positions: ((start + 1) as u8..=(start + k) as u8).collect(),
            })
            .collect(),
        Mode::Classical => {
            let mut list = Vec::new();
            classical_backtrack(h, pat, &mut Vec::with_capacity(k), &mut Some(&mut list));
            // backtracking explores positions in increasing order, so the
            // list is already lexicographic
            list
        }
    }
}

/// `host` avoids every pattern in `ps` (vacuously true for an empty set).
pub fn avoids_all<'a>(host: &Permutation, ps: impl IntoIterator<Item = &'a Pattern>) -> bool {
    ps.into_iter().all(|p| !contains(host, p))
}

/// Members of `S_n` avoiding every pattern in `ps`, in lexicographic order,
/// under the default enumeration cap.
pub fn enumerate_av(n: u8, ps: &[Pattern]) -> Result<Vec<Permutation>> {
    enumerate_av_capped(n, ps, DEFAULT_ENUMERATION_CAP)
}

/// Members of `S_n` avoiding every pattern in `ps`, in lexicographic order.
pub fn enumerate_av_capped(n: u8, ps: &[Pattern], cap: u8) -> Result<Vec<Permutation>> {
    Ok(enumerate_sn_capped(n, cap)?
        .filter(|q| avoids_all(q, ps))
        .collect())
}
