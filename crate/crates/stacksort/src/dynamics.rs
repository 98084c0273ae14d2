//! Orbits and periodic points of the consecutive-pattern-avoiding passes,
//! sorting-time statistics, and the exhaustive verification suites.
//!
//! Verification suites sweep `S_n` in contiguous lexicographic rank ranges;
//! ranges are processed independently and merged in rank order, so reports
//! are identical for every worker count.

use std::collections::BTreeSet;

use serde_json::json;

use crate::error::{Error, Result};
use crate::machine::consecutive_run_into;
use crate::patterns::{
    avoids_all, contains_consecutive_slice, enumerate_av_capped, Mode, Pattern,
};
use crate::perm::{factorial, next_lex_in_place, Permutation, DEFAULT_ENUMERATION_CAP};

/// First repeated state in an orbit: `iterates[start + length] == iterates[start]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub start: usize,
    pub length: usize,
}

/// An orbit under repeated applications of `sc:σ`.
#[derive(Clone, Debug)]
pub struct OrbitResult {
    /// Iterates starting at the initial permutation; when a cycle was found,
    /// the list ends with the first repeated state.
    pub iterates: Vec<Permutation>,
    /// `None` when `max_iter` ran out before any state repeated.
    pub cycle: Option<Cycle>,
    /// Smallest `t` whose iterate avoids every target pattern, if a target
    /// was given and was hit within the computed iterates.
    pub hit_time: Option<usize>,
}

impl OrbitResult {
    pub fn truncated(&self) -> bool {
        self.cycle.is_none()
    }
}

/// Iterates `sc:σ` from `start` until a state repeats or `max_iter`
/// applications have been made. `max_iter` must be at least 1.
pub fn orbit(
    start: &Permutation,
    sigma: &Permutation,
    target: Option<&[Pattern]>,
    max_iter: usize,
) -> Result<OrbitResult> {
    if sigma.len() < 2 {
        return Err(Error::InvalidInput("orbit needs a pattern of length >= 2".into()));
    }
    assert!(max_iter >= 1, "orbit needs max_iter >= 1");
    let mut iterates = vec![start.clone()];
    let mut hit_time = None;
    if let Some(tgt) = target {
        if avoids_all(start, tgt) {
            hit_time = Some(0);
        }
    }
    let mut cycle = None;
    let mut stack = Vec::with_capacity(start.len());
    let mut out = Vec::with_capacity(start.len());
    for t in 1..=max_iter {
        consecutive_run_into(
            iterates.last().unwrap().entries(),
            &[sigma.entries()],
            &mut stack,
            &mut out,
        );
        let next = Permutation::from_one_line(out.clone()).expect("machine output");
        if let Some(pos) = iterates.iter().position(|q| q == &next) {
            iterates.push(next);
            cycle = Some(Cycle { start: pos, length: t - pos });
            break;
        }
        if hit_time.is_none() {
            if let Some(tgt) = target {
                if avoids_all(&next, tgt) {
                    hit_time = Some(t);
                }
            }
        }
        iterates.push(next);
    }
    Ok(OrbitResult { iterates, cycle, hit_time })
}

/// Pre-period and period of the orbit of `start` under the multi-pattern
/// pass; runs until a state repeats, which the finite state space guarantees.
fn cycle_of(
    start: &[u8],
    pats: &[&[u8]],
    states: &mut Vec<Vec<u8>>,
    cur: &mut Vec<u8>,
    stack: &mut Vec<u8>,
    out: &mut Vec<u8>,
) -> (usize, usize) {
    states.clear();
    states.push(start.to_vec());
    cur.clear();
    cur.extend_from_slice(start);
    loop {
        consecutive_run_into(cur, pats, stack, out);
        if let Some(pos) = states.iter().position(|s| s == out) {
            return (pos, states.len() - pos);
        }
        states.push(out.clone());
        std::mem::swap(cur, out);
    }
}

/// Does `p` recur in its own orbit under `sc:σ`?
///
/// Backed by the periodic-point characterization only for `|σ| >= 3`;
/// shorter patterns are allowed but the result is exploratory.
pub fn is_periodic(p: &Permutation, sigma: &Permutation) -> Result<bool> {
    Ok(period(p, sigma)?.is_some())
}

/// The period of `p` under `sc:σ` when `p` is periodic, `None` otherwise.
pub fn period(p: &Permutation, sigma: &Permutation) -> Result<Option<usize>> {
    if sigma.len() < 2 {
        return Err(Error::InvalidInput("period needs a pattern of length >= 2".into()));
    }
    let (mut states, mut cur, mut stack, mut out) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (start, length) = cycle_of(
        p.entries(),
        &[sigma.entries()],
        &mut states,
        &mut cur,
        &mut stack,
        &mut out,
    );
    Ok((start == 0).then_some(length))
}

/// The count of entries strictly between the values 1 and 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DStat {
    pub value: u32,
}

/// Entries strictly between the positions of 1 and 2; needs `n >= 2`.
pub fn d_stat(p: &Permutation) -> Result<DStat> {
    if p.len() < 2 {
        return Err(Error::InvalidInput("the 1-2 gap statistic needs n >= 2".into()));
    }
    let pos1 = p.position_of(1) as i32;
    let pos2 = p.position_of(2) as i32;
    Ok(DStat { value: ((pos1 - pos2).abs() - 1) as u32 })
}

/// Deletes the entry 1 and normalizes the rest down by one; needs `n >= 2`.
pub fn delete_one(p: &Permutation) -> Result<Permutation> {
    if p.len() < 2 {
        return Err(Error::InvalidInput("cannot delete from a singleton".into()));
    }
    let entries: Vec<u8> = p.entries().iter().filter(|&&e| e != 1).map(|&e| e - 1).collect();
    Ok(Permutation::from_one_line(entries).expect("deletion preserves distinctness"))
}

/// Iteration cap used by [`time_to_avoider`]: the quadratic sorting-time
/// bound plus slack.
pub fn default_time_cap(n: usize) -> u32 {
    let n = n as i64;
    ((n - 1).max(0) * (n - 2).max(0)) as u32 + 2
}

/// Minimal `t >= 0` with `sc:σ^t(p)` avoiding both σ and its reverse
/// consecutively, under the default iteration cap. Needs `|σ| >= 3`, which
/// guarantees termination.
pub fn time_to_avoider(p: &Permutation, sigma: &Permutation) -> Result<u32> {
    time_to_avoider_with_cap(p, sigma, default_time_cap(p.len()))
}

/// [`time_to_avoider`] with an explicit iteration cap; exceeding the cap is
/// a loud error, never a silent truncation.
pub fn time_to_avoider_with_cap(p: &Permutation, sigma: &Permutation, cap: u32) -> Result<u32> {
    if sigma.len() < 3 {
        return Err(Error::InvalidInput(
            "sorting-time operations need a pattern of length >= 3".into(),
        ));
    }
    let rev_sigma: Vec<u8> = sigma.entries().iter().rev().copied().collect();
    let mut cur = p.entries().to_vec();
    let mut stack = Vec::with_capacity(p.len());
    let mut out = Vec::with_capacity(p.len());
    match time_steps(&mut cur, sigma.entries(), &rev_sigma, cap, &mut stack, &mut out) {
        Some(t) => Ok(t),
        None => Err(Error::BoundViolation {
            perm: p.to_string(),
            sigma: sigma.to_string(),
            cap,
        }),
    }
}

/// Core sorting-time loop over raw entries; `cur` is clobbered.
/// Returns `None` when the cap is exhausted before an avoider is reached.
pub(crate) fn time_steps(
    cur: &mut Vec<u8>,
    sigma: &[u8],
    rev_sigma: &[u8],
    cap: u32,
    stack: &mut Vec<u8>,
    out: &mut Vec<u8>,
) -> Option<u32> {
    for t in 0..=cap {
        if !contains_consecutive_slice(cur, sigma) && !contains_consecutive_slice(cur, rev_sigma) {
            return Some(t);
        }
        if t == cap {
            break;
        }
        consecutive_run_into(cur, &[sigma], stack, out);
        std::mem::swap(cur, out);
    }
    None
}

/// Splits `[0, n!)` into `workers` contiguous rank ranges, scans them on
/// scoped threads, and returns the per-range results in rank order.
fn par_rank_scan<T, F>(n: u8, workers: usize, scan: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    let fact = factorial(n);
    let workers = (workers.max(1) as u64).min(fact) as usize;
    if workers == 1 {
        return Ok(vec![scan(0, fact)?]);
    }
    let base = fact / workers as u64;
    let extra = fact % workers as u64;
    let mut ranges = Vec::with_capacity(workers);
    let mut start = 0;
    for w in 0..workers as u64 {
        let len = base + u64::from(w < extra);
        ranges.push((start, start + len));
        start += len;
    }
    let scan = &scan;
    std::thread::scope(|s| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|(a, b)| s.spawn(move || scan(a, b)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("verification worker panicked"))
            .collect()
    })
}

/// Calls `visit` with the entries of every permutation of rank `a..b` in `S_n`.
fn scan_ranks(n: u8, a: u64, b: u64, mut visit: impl FnMut(&[u8]) -> Result<()>) -> Result<()> {
    if a >= b {
        return Ok(());
    }
    let mut entries = Permutation::unrank_capped(n, a, n)?.entries().to_vec();
    for _ in a..b {
        visit(&entries)?;
        if !next_lex_in_place(&mut entries) {
            break;
        }
    }
    Ok(())
}

/// A verification report: on failure, `violations` lists the counterexamples.
/// Serializes as `{check, n, sigma, pass, violations, stats}`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Report {
    pub check: String,
    pub n: u8,
    pub sigma: Option<String>,
    pub pass: bool,
    pub violations: Vec<serde_json::Value>,
    pub stats: serde_json::Map<String, serde_json::Value>,
}

fn ensure_verification_sigma(sigma: &Permutation) -> Result<()> {
    if sigma.len() < 3 {
        return Err(Error::InvalidInput(
            "the periodic-point characterization needs a pattern of length >= 3".into(),
        ));
    }
    Ok(())
}

fn ensure_cap(n: u8) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Capacity { n, cap: DEFAULT_ENUMERATION_CAP });
    }
    Ok(())
}

/// Checks that the periodic points of `sc:σ` on `S_n` are exactly the
/// permutations avoiding both σ and its reverse consecutively, and that
/// every periodic point has period 2 (period 1 for `n = 1`).
pub fn verify_theorem_1(n: u8, sigma: &Permutation) -> Result<Report> {
    verify_theorem_1_with(n, sigma, 1)
}

pub fn verify_theorem_1_with(n: u8, sigma: &Permutation, workers: usize) -> Result<Report> {
    ensure_verification_sigma(sigma)?;
    ensure_cap(n)?;
    let expected_period = if n == 1 { 1 } else { 2 };

    struct Chunk {
        periodic: Vec<Permutation>,
        wrong_period: Vec<(Permutation, usize)>,
    }
    let chunks = par_rank_scan(n, workers, |a, b| {
        let mut chunk = Chunk { periodic: Vec::new(), wrong_period: Vec::new() };
        let (mut states, mut cur, mut stack, mut out) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        scan_ranks(n, a, b, |entries| {
            let (start, length) = cycle_of(
                entries,
                &[sigma.entries()],
                &mut states,
                &mut cur,
                &mut stack,
                &mut out,
            );
            if start == 0 {
                let p = Permutation::from_one_line(entries.to_vec()).expect("scanned perm");
                if length != expected_period {
                    chunk.wrong_period.push((p.clone(), length));
                }
                chunk.periodic.push(p);
            }
            Ok(())
        })?;
        Ok(chunk)
    })?;

    let mut periodic: Vec<Permutation> = Vec::new();
    let mut violations: Vec<serde_json::Value> = Vec::new();
    for chunk in chunks {
        periodic.extend(chunk.periodic);
        for (p, len) in chunk.wrong_period {
            violations.push(json!({ "kind": "wrong_period", "perm": p, "period": len }));
        }
    }

    let sigma_pattern = Pattern::consecutive(sigma.clone())?;
    let sigma_text = sigma_pattern.to_string();
    let avoiders = enumerate_av_capped(
        n,
        &[sigma_pattern, Pattern::consecutive(sigma.reverse())?],
        DEFAULT_ENUMERATION_CAP,
    )?;

    // both lists are in lexicographic order, so a single merge finds the diffs
    let periodic_set: BTreeSet<&Permutation> = periodic.iter().collect();
    let avoider_set: BTreeSet<&Permutation> = avoiders.iter().collect();
    for p in periodic_set.difference(&avoider_set) {
        violations.push(json!({ "kind": "periodic_outside_avoidance_class", "perm": p }));
    }
    for p in avoider_set.difference(&periodic_set) {
        violations.push(json!({ "kind": "avoider_not_periodic", "perm": p }));
    }

    let mut stats = serde_json::Map::new();
    stats.insert("periodic_count".into(), json!(periodic.len()));
    stats.insert("avoider_count".into(), json!(avoiders.len()));
    stats.insert("expected_period".into(), json!(expected_period));
    stats.insert("checked".into(), json!(factorial(n)));
    Ok(Report {
        check: "theorem1".into(),
        n,
        sigma: Some(sigma_text),
        pass: violations.is_empty(),
        violations,
        stats,
    })
}

const SIGMA_231: [u8; 3] = [2, 3, 1];

/// Checks that two applications of `sc:231` strictly shrink the 1-2 gap
/// statistic whenever it is positive.
pub fn verify_d_decrease(n: u8) -> Result<Report> {
    verify_d_decrease_with(n, 1)
}

pub fn verify_d_decrease_with(n: u8, workers: usize) -> Result<Report> {
    ensure_cap(n)?;
    let gap = |entries: &[u8]| -> u32 {
        let pos1 = entries.iter().position(|&e| e == 1).unwrap() as i32;
        let pos2 = entries.iter().position(|&e| e == 2).unwrap() as i32;
        ((pos1 - pos2).abs() - 1) as u32
    };
    let chunks = par_rank_scan(n, workers, |a, b| {
        let mut violations = Vec::new();
        let mut positive = 0u64;
        if n >= 2 {
            let (mut stack, mut out, mut mid) = (Vec::new(), Vec::new(), Vec::new());
            scan_ranks(n, a, b, |entries| {
                let before = gap(entries);
                if before > 0 {
                    positive += 1;
                    consecutive_run_into(entries, &[&SIGMA_231], &mut stack, &mut mid);
                    consecutive_run_into(&mid, &[&SIGMA_231], &mut stack, &mut out);
                    let after = gap(&out);
                    if after >= before {
                        violations.push(json!({
                            "kind": "gap_did_not_shrink",
                            "perm": entries,
                            "before": before,
                            "after": after,
                        }));
                    }
                }
                Ok(())
            })?;
        }
        Ok((violations, positive))
    })?;
    let mut violations = Vec::new();
    let mut positive = 0u64;
    for (v, c) in chunks {
        violations.extend(v);
        positive += c;
    }
    let mut stats = serde_json::Map::new();
    stats.insert("checked".into(), json!(factorial(n)));
    stats.insert("positive_gap_count".into(), json!(positive));
    Ok(Report {
        check: "d_decrease".into(),
        n,
        sigma: Some("c:231".into()),
        pass: violations.is_empty(),
        violations,
        stats,
    })
}

/// Checks that when 1 and 2 are adjacent, deleting the 1 commutes with
/// `sc:231` and the pair stays adjacent in the output.
pub fn verify_claim_adjacent12(n: u8) -> Result<Report> {
    verify_claim_adjacent12_with(n, 1)
}

pub fn verify_claim_adjacent12_with(n: u8, workers: usize) -> Result<Report> {
    ensure_cap(n)?;
    let chunks = par_rank_scan(n, workers, |a, b| {
        let mut violations = Vec::new();
        let mut qualifying = 0u64;
        if n >= 2 {
            let (mut stack, mut out, mut out_deleted) = (Vec::new(), Vec::new(), Vec::new());
            scan_ranks(n, a, b, |entries| {
                let pos1 = entries.iter().position(|&e| e == 1).unwrap() as i32;
                let pos2 = entries.iter().position(|&e| e == 2).unwrap() as i32;
                if (pos1 - pos2).abs() != 1 {
                    return Ok(());
                }
                qualifying += 1;
                let deleted: Vec<u8> =
                    entries.iter().filter(|&&e| e != 1).map(|&e| e - 1).collect();
                consecutive_run_into(&deleted, &[&SIGMA_231], &mut stack, &mut out_deleted);
                consecutive_run_into(entries, &[&SIGMA_231], &mut stack, &mut out);
                let out_then_deleted: Vec<u8> =
                    out.iter().filter(|&&e| e != 1).map(|&e| e - 1).collect();
                let opos1 = out.iter().position(|&e| e == 1).unwrap() as i32;
                let opos2 = out.iter().position(|&e| e == 2).unwrap() as i32;
                if out_deleted != out_then_deleted || (opos1 - opos2).abs() != 1 {
                    violations.push(json!({
                        "kind": "deletion_does_not_commute",
                        "perm": entries,
                        "sorted_then_deleted": out_then_deleted,
                        "deleted_then_sorted": out_deleted,
                        "adjacent_after": (opos1 - opos2).abs() == 1,
                    }));
                }
                Ok(())
            })?;
        }
        Ok((violations, qualifying))
    })?;
    let mut violations = Vec::new();
    let mut qualifying = 0u64;
    for (v, c) in chunks {
        violations.extend(v);
        qualifying += c;
    }
    let mut stats = serde_json::Map::new();
    stats.insert("checked".into(), json!(factorial(n)));
    stats.insert("qualifying_count".into(), json!(qualifying));
    Ok(Report {
        check: "claim_adjacent12".into(),
        n,
        sigma: Some("c:231".into()),
        pass: violations.is_empty(),
        violations,
        stats,
    })
}

/// Maximum of [`time_to_avoider`] over all of `S_n`, with every witness
/// attaining it.
pub fn max_sort_time(n: u8, sigma: &Permutation) -> Result<(u32, Vec<Permutation>)> {
    max_sort_time_with(n, sigma, 1)
}

pub fn max_sort_time_with(
    n: u8,
    sigma: &Permutation,
    workers: usize,
) -> Result<(u32, Vec<Permutation>)> {
    ensure_verification_sigma(sigma)?;
    ensure_cap(n)?;
    let cap = default_time_cap(n as usize);
    let rev_sigma: Vec<u8> = sigma.entries().iter().rev().copied().collect();
    let chunks = par_rank_scan(n, workers, |a, b| {
        let mut best = 0u32;
        let mut witnesses: Vec<Permutation> = Vec::new();
        let (mut cur, mut stack, mut out) = (Vec::new(), Vec::new(), Vec::new());
        scan_ranks(n, a, b, |entries| {
            cur.clear();
            cur.extend_from_slice(entries);
            let t = time_steps(&mut cur, sigma.entries(), &rev_sigma, cap, &mut stack, &mut out)
                .ok_or_else(|| Error::BoundViolation {
                    perm: Permutation::from_one_line(entries.to_vec()).unwrap().to_string(),
                    sigma: sigma.to_string(),
                    cap,
                })?;
            if t > best {
                best = t;
                witnesses.clear();
            }
            if t == best {
                witnesses.push(Permutation::from_one_line(entries.to_vec()).expect("scanned perm"));
            }
            Ok(())
        })?;
        Ok((best, witnesses))
    })?;
    let mut best = 0u32;
    let mut witnesses = Vec::new();
    for (chunk_best, chunk_witnesses) in chunks {
        if chunk_best > best {
            best = chunk_best;
            witnesses.clear();
        }
        if chunk_best == best {
            witnesses.extend(chunk_witnesses);
        }
    }
    Ok((best, witnesses))
}

/// Checks the quadratic sorting-time bound `(n-1)(n-2)` for `sc:231` over `S_n`.
pub fn verify_bound(n: u8) -> Result<Report> {
    verify_bound_with(n, 1)
}

pub fn verify_bound_with(n: u8, workers: usize) -> Result<Report> {
    ensure_cap(n)?;
    let n_i = n as i64;
    let bound = ((n_i - 1).max(0) * (n_i - 2).max(0)) as u32;
    let cap = bound + 2;
    let rev_sigma: [u8; 3] = [1, 3, 2];
    let chunks = par_rank_scan(n, workers, |a, b| {
        let mut violations = Vec::new();
        let mut max_observed = 0u32;
        let (mut cur, mut stack, mut out) = (Vec::new(), Vec::new(), Vec::new());
        scan_ranks(n, a, b, |entries| {
            cur.clear();
            cur.extend_from_slice(entries);
            let t = time_steps(&mut cur, &SIGMA_231, &rev_sigma, cap, &mut stack, &mut out);
            match t {
                Some(t) if t <= bound => max_observed = max_observed.max(t),
                Some(t) => {
                    max_observed = max_observed.max(t);
                    violations.push(json!({
                        "kind": "over_bound", "perm": entries, "steps": t, "bound": bound,
                    }));
                }
                None => violations.push(json!({
                    "kind": "cap_exceeded", "perm": entries, "cap": cap,
                })),
            }
            Ok(())
        })?;
        Ok((violations, max_observed))
    })?;
    let mut violations = Vec::new();
    let mut max_observed = 0u32;
    for (v, m) in chunks {
        violations.extend(v);
        max_observed = max_observed.max(m);
    }
    let mut stats = serde_json::Map::new();
    stats.insert("checked".into(), json!(factorial(n)));
    stats.insert("bound".into(), json!(bound));
    stats.insert("max_observed".into(), json!(max_observed));
    Ok(Report {
        check: "bound".into(),
        n,
        sigma: Some("c:231".into()),
        pass: violations.is_empty(),
        violations,
        stats,
    })
}

/// Exploratory census of the periodic points of the multi-pattern pass
/// `scb:B`: lists them with their periods next to the candidate set
/// avoiding `B` and its reverses, plus the symmetric difference. Nothing is
/// asserted; `pass` is always true.
pub fn census_multi(n: u8, patterns: &[Pattern]) -> Result<Report> {
    census_multi_with(n, patterns, 1)
}

pub fn census_multi_with(n: u8, patterns: &[Pattern], workers: usize) -> Result<Report> {
    ensure_cap(n)?;
    if patterns.is_empty() {
        return Err(Error::InvalidInput("the census needs at least one pattern".into()));
    }
    if patterns.iter().any(|p| p.mode() != Mode::Consecutive) {
        return Err(Error::InvalidInput("the census takes consecutive patterns only".into()));
    }
    let pats: Vec<&[u8]> = patterns.iter().map(|p| p.perm().entries()).collect();
    let chunks = par_rank_scan(n, workers, |a, b| {
        let mut periodic: Vec<(Permutation, usize)> = Vec::new();
        let (mut states, mut cur, mut stack, mut out) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        scan_ranks(n, a, b, |entries| {
            let (start, length) =
                cycle_of(entries, &pats, &mut states, &mut cur, &mut stack, &mut out);
            if start == 0 {
                periodic.push((
                    Permutation::from_one_line(entries.to_vec()).expect("scanned perm"),
                    length,
                ));
            }
            Ok(())
        })?;
        Ok(periodic)
    })?;
    let periodic: Vec<(Permutation, usize)> = chunks.into_iter().flatten().collect();

    // candidate set: avoid every pattern in B and every reverse
    let mut candidate_patterns: Vec<Pattern> = Vec::new();
    let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
    for p in patterns {
        for q in [p.perm().clone(), p.perm().reverse()] {
            if seen.insert(q.entries().to_vec()) {
                candidate_patterns.push(Pattern::consecutive(q)?);
            }
        }
    }
    let candidates = enumerate_av_capped(n, &candidate_patterns, DEFAULT_ENUMERATION_CAP)?;

    let periodic_set: BTreeSet<&Permutation> = periodic.iter().map(|(p, _)| p).collect();
    let candidate_set: BTreeSet<&Permutation> = candidates.iter().collect();
    let periodic_only: Vec<&&Permutation> =
        periodic_set.difference(&candidate_set).collect();
    let candidate_only: Vec<&&Permutation> =
        candidate_set.difference(&periodic_set).collect();

    let mut stats = serde_json::Map::new();
    stats.insert(
        "patterns".into(),
        json!(patterns.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
    );
    stats.insert(
        "periodic".into(),
        json!(periodic
            .iter()
            .map(|(p, len)| json!({ "perm": p, "period": len }))
            .collect::<Vec<_>>()),
    );
    stats.insert("candidates".into(), json!(candidates));
    stats.insert("periodic_not_candidate".into(), json!(periodic_only));
    stats.insert("candidate_not_periodic".into(), json!(candidate_only));
    stats.insert("periodic_count".into(), json!(periodic.len()));
    stats.insert("candidate_count".into(), json!(candidates.len()));
    stats.insert(
        "sym_diff_count".into(),
        json!(periodic_only.len() + candidate_only.len()),
    );
    Ok(Report {
        check: "census_multi".into(),
        n,
        sigma: None,
        pass: true,
        violations: Vec::new(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn pat(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    #[test]
    fn orbit_of_avoider_is_a_two_cycle() {
        let r = orbit(&p("321"), &p("231"), None, 100).unwrap();
        assert_eq!(r.cycle, Some(Cycle { start: 0, length: 2 }));
        assert_eq!(r.iterates, [p("321"), p("123"), p("321")]);
        assert!(!r.truncated());
    }

    #[test]
    fn orbit_of_non_avoider() {
        let target = [pat("c:231"), pat("c:132")];
        let r = orbit(&p("132"), &p("231"), Some(&target), 100).unwrap();
        assert_eq!(r.cycle, Some(Cycle { start: 1, length: 2 }));
        assert_eq!(r.hit_time, Some(1));
        assert_eq!(r.iterates[1], p("321"));
    }

    #[test]
    fn orbit_truncation_is_flagged() {
        let r = orbit(&p("132"), &p("231"), None, 1).unwrap();
        assert!(r.truncated());
        assert_eq!(r.iterates.len(), 2);
    }

    #[test]
    fn orbit_hit_time_zero_for_identity() {
        let target = [pat("c:231"), pat("c:132")];
        let r = orbit(&Permutation::identity(5), &p("231"), Some(&target), 10).unwrap();
        assert_eq!(r.hit_time, Some(0));
    }

    #[test]
    fn periodicity_examples() {
        assert!(is_periodic(&p("213"), &p("231")).unwrap());
        assert!(!is_periodic(&p("132"), &p("231")).unwrap());
        assert_eq!(period(&p("321"), &p("231")).unwrap(), Some(2));
        assert_eq!(period(&p("132"), &p("231")).unwrap(), None);
        assert_eq!(period(&p("1"), &p("231")).unwrap(), Some(1));
    }

    #[test]
    fn d_stat_examples() {
        assert_eq!(d_stat(&p("143652")).unwrap().value, 4);
        assert_eq!(d_stat(&Permutation::identity(9)).unwrap().value, 0);
        assert_eq!(d_stat(&p("213")).unwrap().value, 0); // 1 and 2 adjacent
        assert_eq!(d_stat(&p("231")).unwrap().value, 1);
        assert!(d_stat(&p("1")).is_err());
    }

    #[test]
    fn delete_one_examples() {
        assert_eq!(delete_one(&p("2134")).unwrap(), p("123"));
        assert_eq!(delete_one(&p("4123")).unwrap(), p("312"));
        assert_eq!(delete_one(&p("21")).unwrap(), p("1"));
        assert!(delete_one(&p("1")).is_err());
    }

    #[test]
    fn time_to_avoider_examples() {
        assert_eq!(time_to_avoider(&Permutation::identity(8), &p("231")).unwrap(), 0);
        assert_eq!(time_to_avoider(&p("132"), &p("231")).unwrap(), 1);
        assert!(matches!(
            time_to_avoider(&p("12"), &p("21")),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn overriding_the_cap_downward_trips_loudly() {
        let witness = p("4 6 8 5 11 7 2 9 10 3 1");
        let err = time_to_avoider_with_cap(&witness, &p("231"), 3).unwrap_err();
        assert!(matches!(err, Error::BoundViolation { cap: 3, .. }));
        assert_eq!(time_to_avoider(&witness, &p("231")).unwrap(), 19);
    }

    #[test]
    fn max_sort_time_small() {
        let (best, witnesses) = max_sort_time(3, &p("231")).unwrap();
        assert_eq!(best, 2);
        assert_eq!(witnesses, [p("231")]);
        let (best, _) = max_sort_time(4, &p("231")).unwrap();
        assert_eq!(best, 4);
        assert!(matches!(max_sort_time(3, &p("21")), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn theorem_1_small() {
        let r = verify_theorem_1(3, &p("231")).unwrap();
        assert!(r.pass, "{:?}", r.violations);
        assert_eq!(r.stats["periodic_count"], 4);
        assert_eq!(r.stats["avoider_count"], 4);

        let r = verify_theorem_1(1, &p("231")).unwrap();
        assert!(r.pass);
        assert_eq!(r.stats["expected_period"], 1);

        assert!(verify_theorem_1(5, &p("21")).is_err());
        assert!(matches!(verify_theorem_1(13, &p("231")), Err(Error::Capacity { .. })));
    }

    #[test]
    fn theorem_1_worker_counts_agree() {
        let base = verify_theorem_1_with(5, &p("123"), 1).unwrap();
        for workers in [2, 3, 8] {
            let other = verify_theorem_1_with(5, &p("123"), workers).unwrap();
            assert_eq!(base.pass, other.pass);
            assert_eq!(base.stats, other.stats);
            assert_eq!(base.violations, other.violations);
        }
    }

    #[test]
    fn d_decrease_small() {
        for n in [2, 4, 6] {
            let r = verify_d_decrease(n).unwrap();
            assert!(r.pass, "n={n}: {:?}", r.violations);
        }
        assert_eq!(verify_d_decrease(2).unwrap().stats["positive_gap_count"], 0);
    }

    #[test]
    fn claim_adjacent12_small() {
        for n in [2, 3, 4, 6] {
            let r = verify_claim_adjacent12(n).unwrap();
            assert!(r.pass, "n={n}: {:?}", r.violations);
        }
    }

    #[test]
    fn bound_small() {
        let r = verify_bound(3).unwrap();
        assert!(r.pass);
        assert_eq!(r.stats["max_observed"], 2);
        assert_eq!(r.stats["bound"], 2);
        let r = verify_bound(5).unwrap();
        assert!(r.pass);
        assert_eq!(r.stats["max_observed"], 6);
        assert_eq!(r.stats["bound"], 12);
    }

    #[test]
    fn census_multi_examples() {
        // a single pattern reduces to the characterized case: no difference
        let r = census_multi(4, &[pat("c:231")]).unwrap();
        assert!(r.pass);
        assert_eq!(r.stats["sym_diff_count"], 0);
        assert_eq!(r.stats["periodic_count"], 8);

        // length-2 patterns run fine, output is data only
        let r = census_multi(3, &[pat("c:21")]).unwrap();
        assert_eq!(r.stats["candidate_count"], 0);

        let r = census_multi(5, &[pat("c:231"), pat("c:321")]).unwrap();
        assert_eq!(r.stats["periodic_count"], 40);
        assert_eq!(r.stats["candidate_count"], 0);

        assert!(census_multi(4, &[pat("p:231")]).is_err());
        assert!(census_multi(4, &[]).is_err());
    }
}
