//! Exhaustive and sampled search over `S_n` for extremal sorting times.
//!
//! The exhaustive search walks lexicographic ranks `[0, n!)` in fixed-size
//! chunks on a grid anchored at rank 0. Workers pull chunks from a shared
//! counter and scan them independently; a single aggregator merges chunk
//! results in rank order, so the outcome is a pure function of `(n, σ)` —
//! independent of worker count and of where a previous run was killed.
//!
//! Persistence:
//! * records file — JSON Lines, one [`SearchRecord`] per line, appended the
//!   moment a record enters the running best set (a crash between a record
//!   append and the following checkpoint write can repeat lines on resume;
//!   every line independently passes [`verify_record`]);
//! * checkpoint file — a single JSON document holding a [`SearchCheckpoint`],
//!   rewritten atomically (write-new then rename) after each merged chunk.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{default_time_cap, time_steps, time_to_avoider};
use crate::error::{Error, Result};
use crate::patterns::{Mode, Pattern};
use crate::perm::{factorial, next_lex_in_place, Permutation};

/// Hard upper bound on `n` for the exhaustive search.
pub const SEARCH_HARD_CAP: u8 = 12;

/// Default rank-chunk size for work partitioning and checkpoint granularity.
pub const DEFAULT_CHUNK_SIZE: u64 = 100_000;

/// Default cap on retained argmax witnesses.
pub const DEFAULT_WITNESS_LIMIT: usize = 100;

/// One witness row: re-verifiable in isolation via [`verify_record`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub n: u8,
    /// Pattern text, e.g. `c:231`.
    pub sigma: String,
    pub perm: Permutation,
    /// Sorting time of `perm` under `sc:σ`.
    pub steps: u32,
    /// Monotonic sequence number in discovery (merge) order.
    pub discovered_at: u64,
}

/// Resumable search state: everything before `next_rank` has been scanned
/// and `best` holds the maxima found there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCheckpoint {
    pub n: u8,
    pub sigma: String,
    pub next_rank: u64,
    pub best: Vec<SearchRecord>,
}

/// Knobs for [`exhaustive_search`].
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub workers: usize,
    pub chunk_size: u64,
    pub witness_limit: usize,
    pub checkpoint_path: Option<PathBuf>,
    pub records_path: Option<PathBuf>,
    /// Process at most this many chunks, then stop with a valid checkpoint
    /// (resumable batching; also how tests exercise kill/resume).
    pub max_chunks: Option<u64>,
    /// Override for the per-permutation iteration cap.
    pub max_iter: Option<u32>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            chunk_size: DEFAULT_CHUNK_SIZE,
            witness_limit: DEFAULT_WITNESS_LIMIT,
            checkpoint_path: None,
            records_path: None,
            max_chunks: None,
            max_iter: None,
        }
    }
}

/// Result of one [`exhaustive_search`] run (possibly a partial batch).
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best_steps: u32,
    pub witnesses: Vec<SearchRecord>,
    pub checkpoint: SearchCheckpoint,
    /// Whether every rank in `[0, n!)` has been scanned.
    pub complete: bool,
}

fn sigma_text(sigma: &Permutation) -> Result<String> {
    Ok(Pattern::consecutive(sigma.clone())?.to_string())
}

fn ensure_search_sigma(sigma: &Permutation) -> Result<()> {
    if sigma.len() < 3 {
        return Err(Error::InvalidInput(
            "sorting-time search needs a pattern of length >= 3".into(),
        ));
    }
    Ok(())
}

/// The sorting-time record for a single permutation.
pub fn measure(perm: &Permutation, sigma: &Permutation) -> Result<SearchRecord> {
    ensure_search_sigma(sigma)?;
    Ok(SearchRecord {
        n: perm.len() as u8,
        sigma: sigma_text(sigma)?,
        perm: perm.clone(),
        steps: time_to_avoider(perm, sigma)?,
        discovered_at: 0,
    })
}

/// Recomputes the sorting time of a record from scratch and compares.
pub fn verify_record(record: &SearchRecord) -> bool {
    if record.n as usize != record.perm.len() {
        return false;
    }
    let Ok(pattern) = record.sigma.parse::<Pattern>() else {
        return false;
    };
    if pattern.mode() != Mode::Consecutive {
        return false;
    }
    matches!(time_to_avoider(&record.perm, pattern.perm()), Ok(t) if t == record.steps)
}

/// Per-chunk scan result (witnesses keep the smallest ranks at the chunk max).
struct ChunkResult {
    max: u32,
    witnesses: Vec<(u64, Vec<u8>)>,
    end_rank: u64,
}

struct SearchCtx {
    n: u8,
    fact: u64,
    sigma: Vec<u8>,
    rev_sigma: Vec<u8>,
    cap: u32,
    chunk_size: u64,
    resume_start: u64,
    witness_limit: usize,
}

fn scan_chunk(ctx: &SearchCtx, unit: u64) -> Result<ChunkResult> {
    let lo = (unit * ctx.chunk_size).max(ctx.resume_start);
    let hi = ((unit + 1) * ctx.chunk_size).min(ctx.fact);
    let mut best = 0u32;
    let mut witnesses: Vec<(u64, Vec<u8>)> = Vec::new();
    let mut entries = Permutation::unrank_capped(ctx.n, lo, ctx.n)?.entries().to_vec();
    let (mut cur, mut stack, mut out) = (Vec::new(), Vec::new(), Vec::new());
    for rank in lo..hi {
        cur.clear();
        cur.extend_from_slice(&entries);
        let t = time_steps(&mut cur, &ctx.sigma, &ctx.rev_sigma, ctx.cap, &mut stack, &mut out)
            .ok_or_else(|| Error::BoundViolation {
                perm: entries.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "),
                sigma: ctx
                    .sigma
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
                cap: ctx.cap,
            })?;
        if t > best {
            best = t;
            witnesses.clear();
        }
        if t == best && witnesses.len() < ctx.witness_limit {
            witnesses.push((rank, entries.clone()));
        }
        if !next_lex_in_place(&mut entries) {
            break;
        }
    }
    Ok(ChunkResult { max: best, witnesses, end_rank: hi })
}

fn write_checkpoint_atomic(path: &Path, checkpoint: &SearchCheckpoint) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, serde_json::to_vec_pretty(checkpoint)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_checkpoint(path: &Path, n: u8, sigma_text: &str, fact: u64) -> Result<Option<SearchCheckpoint>> {
    let bytes = match fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let checkpoint: SearchCheckpoint = serde_json::from_slice(&bytes)
        .map_err(|e| Error::CorruptCheckpoint(format!("{}: {e}", path.display())))?;
    if checkpoint.n != n || checkpoint.sigma != sigma_text {
        return Err(Error::CorruptCheckpoint(format!(
            "checkpoint is for n={} sigma={}, not n={n} sigma={sigma_text}",
            checkpoint.n, checkpoint.sigma
        )));
    }
    if checkpoint.next_rank > fact {
        return Err(Error::CorruptCheckpoint(format!(
            "next_rank {} is past {}! = {fact}",
            checkpoint.next_rank, n
        )));
    }
    let steps: Vec<u32> = checkpoint.best.iter().map(|r| r.steps).collect();
    if steps.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::CorruptCheckpoint("best records disagree on steps".into()));
    }
    for record in &checkpoint.best {
        if !verify_record(record) {
            return Err(Error::CorruptCheckpoint(format!(
                "record for {} fails re-verification",
                record.perm
            )));
        }
    }
    Ok(Some(checkpoint))
}

/// Scans every rank of `S_n` (resuming from a checkpoint when one exists)
/// for the maximum sorting time under `sc:σ`, keeping all argmax witnesses
/// up to the configured limit.
pub fn exhaustive_search(
    n: u8,
    sigma: &Permutation,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    ensure_search_sigma(sigma)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if n > SEARCH_HARD_CAP {
        return Err(Error::Capacity { n, cap: SEARCH_HARD_CAP });
    }
    if opts.chunk_size == 0 || opts.witness_limit == 0 {
        return Err(Error::InvalidInput("chunk_size and witness_limit must be positive".into()));
    }
    let sigma_text = sigma_text(sigma)?;
    let fact = factorial(n);

    let mut checkpoint = match &opts.checkpoint_path {
        Some(path) => load_checkpoint(path, n, &sigma_text, fact)?,
        None => None,
    }
    .unwrap_or(SearchCheckpoint { n, sigma: sigma_text.clone(), next_rank: 0, best: Vec::new() });

    let mut best_steps = checkpoint.best.first().map_or(0, |r| r.steps);
    let mut next_seq = checkpoint.best.iter().map(|r| r.discovered_at + 1).max().unwrap_or(0);

    if checkpoint.next_rank == fact {
        return Ok(SearchOutcome {
            best_steps,
            witnesses: checkpoint.best.clone(),
            checkpoint,
            complete: true,
        });
    }

    let mut records_file: Option<File> = match &opts.records_path {
        Some(path) => Some(OpenOptions::new().create(true).append(true).open(path)?),
        None => None,
    };

    let ctx = SearchCtx {
        n,
        fact,
        sigma: sigma.entries().to_vec(),
        rev_sigma: sigma.entries().iter().rev().copied().collect(),
        cap: opts.max_iter.unwrap_or_else(|| default_time_cap(n as usize)),
        chunk_size: opts.chunk_size,
        resume_start: checkpoint.next_rank,
        witness_limit: opts.witness_limit,
    };
    let first_unit = checkpoint.next_rank / opts.chunk_size;
    let total_units = fact.div_ceil(opts.chunk_size);
    let end_unit = match opts.max_chunks {
        Some(budget) => total_units.min(first_unit + budget),
        None => total_units,
    };
    let workers = opts.workers.max(1);

    let next_unit = AtomicU64::new(first_unit);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(u64, Result<ChunkResult>)>();

    let merged: Result<()> = std::thread::scope(|s| {
        for _ in 0..workers {
            let tx = tx.clone();
            let ctx = &ctx;
            let next_unit = &next_unit;
            let abort = &abort;
            s.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let unit = next_unit.fetch_add(1, Ordering::Relaxed);
                if unit >= end_unit {
                    break;
                }
                if tx.send((unit, scan_chunk(ctx, unit))).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<u64, ChunkResult> = BTreeMap::new();
        let mut frontier = first_unit;
        for (unit, result) in rx.iter() {
            let chunk = match result {
                Ok(chunk) => chunk,
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    return Err(e);
                }
            };
            pending.insert(unit, chunk);
            while let Some(chunk) = pending.remove(&frontier) {
                if chunk.max > best_steps {
                    best_steps = chunk.max;
                    checkpoint.best.clear();
                }
                if chunk.max == best_steps {
                    for (_rank, entries) in chunk.witnesses {
                        if checkpoint.best.len() >= opts.witness_limit {
                            break;
                        }
                        let record = SearchRecord {
                            n,
                            sigma: sigma_text.clone(),
                            perm: Permutation::from_one_line(entries).expect("scanned perm"),
                            steps: chunk.max,
                            discovered_at: next_seq,
                        };
                        next_seq += 1;
                        if let Some(file) = records_file.as_mut() {
                            serde_json::to_writer(&mut *file, &record)?;
                            writeln!(file)?;
                        }
                        checkpoint.best.push(record);
                    }
                }
                checkpoint.next_rank = chunk.end_rank;
                if let Some(path) = &opts.checkpoint_path {
                    write_checkpoint_atomic(path, &checkpoint)?;
                }
                frontier += 1;
            }
        }
        Ok(())
    });
    merged?;

    Ok(SearchOutcome {
        best_steps,
        witnesses: checkpoint.best.clone(),
        complete: checkpoint.next_rank == fact,
        checkpoint,
    })
}

/// Seeded random search: examines `sample_count` distinct permutations drawn
/// uniformly from `S_n` and returns the best record found (ties keep the
/// earliest). Deterministic given the seed.
pub fn sampled_search(
    n: u8,
    sigma: &Permutation,
    sample_count: u64,
    seed: u64,
) -> Result<Option<SearchRecord>> {
    sampled_search_with_candidates(n, sigma, sample_count, seed, &[])
}

/// [`sampled_search`] that first evaluates caller-supplied structured
/// candidates (counterexample hunting usually mixes both).
pub fn sampled_search_with_candidates(
    n: u8,
    sigma: &Permutation,
    sample_count: u64,
    seed: u64,
    candidates: &[Permutation],
) -> Result<Option<SearchRecord>> {
    ensure_search_sigma(sigma)?;
    if n == 0 || n > 20 {
        return Err(Error::InvalidInput("sampled search needs 1 <= n <= 20".into()));
    }
    if let Some(bad) = candidates.iter().find(|c| c.len() != n as usize) {
        return Err(Error::InvalidInput(format!(
            "candidate {bad} has length {}, expected {n}",
            bad.len()
        )));
    }
    let sigma_text = sigma_text(sigma)?;
    let fact = factorial(n);
    let cap = default_time_cap(n as usize);
    let rev_sigma: Vec<u8> = sigma.entries().iter().rev().copied().collect();
    let (mut cur, mut stack, mut out) = (Vec::new(), Vec::new(), Vec::new());
    let mut examined: HashSet<u64> = HashSet::new();
    let mut best: Option<SearchRecord> = None;
    let mut seq = 0u64;

    let mut consider = |entries: &[u8],
                        rank: u64,
                        examined: &mut HashSet<u64>,
                        best: &mut Option<SearchRecord>,
                        seq: &mut u64|
     -> Result<()> {
        if !examined.insert(rank) {
            return Ok(());
        }
        cur.clear();
        cur.extend_from_slice(entries);
        let steps = time_steps(&mut cur, sigma.entries(), &rev_sigma, cap, &mut stack, &mut out)
            .ok_or_else(|| Error::BoundViolation {
                perm: Permutation::from_one_line(entries.to_vec()).unwrap().to_string(),
                sigma: sigma.to_string(),
                cap,
            })?;
        if best.as_ref().is_none_or(|b| steps > b.steps) {
            *best = Some(SearchRecord {
                n,
                sigma: sigma_text.clone(),
                perm: Permutation::from_one_line(entries.to_vec()).expect("valid perm"),
                steps,
                discovered_at: *seq,
            });
        }
        *seq += 1;
        Ok(())
    };

    for candidate in candidates {
        consider(candidate.entries(), candidate.rank(), &mut examined, &mut best, &mut seq)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = 0u64;
    let target = sample_count.min(fact);
    while drawn < target && (examined.len() as u64) < fact {
        let rank = rng.random_range(0..fact);
        if examined.contains(&rank) {
            continue;
        }
        let perm = Permutation::unrank_capped(n, rank, n)?;
        consider(perm.entries(), rank, &mut examined, &mut best, &mut seq)?;
        drawn += 1;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn exhaustive_small_max() {
        let out = exhaustive_search(6, &p("231"), &SearchOptions::default()).unwrap();
        assert!(out.complete);
        assert_eq!(out.best_steps, 8);
        assert_eq!(out.witnesses.len(), 1);
        assert_eq!(out.witnesses[0].perm, p("645231"));
        assert!(verify_record(&out.witnesses[0]));
        assert_eq!(out.checkpoint.next_rank, 720);
    }

    #[test]
    fn exhaustive_rejects_bad_input() {
        assert!(matches!(
            exhaustive_search(13, &p("231"), &SearchOptions::default()),
            Err(Error::Capacity { cap: 12, .. })
        ));
        assert!(exhaustive_search(4, &p("21"), &SearchOptions::default()).is_err());
    }

    #[test]
    fn worker_counts_agree() {
        let base = exhaustive_search(
            5,
            &p("231"),
            &SearchOptions { chunk_size: 7, ..SearchOptions::default() },
        )
        .unwrap();
        for workers in [2, 4, 8] {
            let opts = SearchOptions { workers, chunk_size: 7, ..SearchOptions::default() };
            let other = exhaustive_search(5, &p("231"), &opts).unwrap();
            assert_eq!(base.best_steps, other.best_steps);
            assert_eq!(base.witnesses, other.witnesses);
        }
        // the argmax content is chunking-independent too; only the
        // discovery sequence numbers track the emission history
        let coarse = exhaustive_search(5, &p("231"), &SearchOptions::default()).unwrap();
        assert_eq!(coarse.best_steps, base.best_steps);
        let content =
            |w: &[SearchRecord]| w.iter().map(|r| (r.perm.clone(), r.steps)).collect::<Vec<_>>();
        assert_eq!(content(&coarse.witnesses), content(&base.witnesses));
    }

    #[test]
    fn checkpoint_resume_matches_uninterrupted() {
        let dir = tempfile::tempdir().unwrap();
        let ckpt = dir.path().join("search.ckpt");
        let straight = exhaustive_search(
            5,
            &p("231"),
            &SearchOptions { chunk_size: 10, ..SearchOptions::default() },
        )
        .unwrap();

        let batch = SearchOptions {
            chunk_size: 10,
            max_chunks: Some(3),
            checkpoint_path: Some(ckpt.clone()),
            ..SearchOptions::default()
        };
        let partial = exhaustive_search(5, &p("231"), &batch).unwrap();
        assert!(!partial.complete);
        assert_eq!(partial.checkpoint.next_rank, 30);

        let resume = SearchOptions {
            chunk_size: 10,
            checkpoint_path: Some(ckpt.clone()),
            ..SearchOptions::default()
        };
        let resumed = exhaustive_search(5, &p("231"), &resume).unwrap();
        assert!(resumed.complete);
        assert_eq!(resumed.best_steps, straight.best_steps);
        assert_eq!(resumed.witnesses, straight.witnesses);
    }

    #[test]
    fn corrupt_checkpoint_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let ckpt = dir.path().join("search.ckpt");
        fs::write(&ckpt, b"{ not json").unwrap();
        let opts = SearchOptions {
            checkpoint_path: Some(ckpt.clone()),
            ..SearchOptions::default()
        };
        assert!(matches!(
            exhaustive_search(4, &p("231"), &opts),
            Err(Error::CorruptCheckpoint(_))
        ));

        // a tampered record is also refused
        let mut out = exhaustive_search(4, &p("231"), &SearchOptions::default()).unwrap();
        out.checkpoint.best[0].steps += 1;
        fs::write(&ckpt, serde_json::to_vec(&out.checkpoint).unwrap()).unwrap();
        assert!(matches!(
            exhaustive_search(4, &p("231"), &opts),
            Err(Error::CorruptCheckpoint(_))
        ));
    }

    #[test]
    fn records_file_lines_all_verify() {
        let dir = tempfile::tempdir().unwrap();
        let records = dir.path().join("records.jsonl");
        let opts = SearchOptions {
            records_path: Some(records.clone()),
            ..SearchOptions::default()
        };
        exhaustive_search(5, &p("231"), &opts).unwrap();
        let text = fs::read_to_string(&records).unwrap();
        let mut count = 0;
        for line in text.lines() {
            let record: SearchRecord = serde_json::from_str(line).unwrap();
            assert!(verify_record(&record));
            count += 1;
        }
        assert!(count > 0);
    }

    #[test]
    fn sampled_search_finds_small_max() {
        // six distinct draws exhaust S_3, so the max of 2 must be found
        let best = sampled_search(3, &p("231"), 6, 12345).unwrap().unwrap();
        assert_eq!(best.steps, 2);
        assert_eq!(best.perm, p("231"));
        assert_eq!(sampled_search(3, &p("231"), 0, 1).unwrap(), None);
    }

    #[test]
    fn sampled_search_is_deterministic() {
        let a = sampled_search(7, &p("231"), 64, 99).unwrap();
        let b = sampled_search(7, &p("231"), 64, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn candidates_are_examined() {
        let witness = p("4 6 8 5 11 7 2 9 10 3 1");
        let best =
            sampled_search_with_candidates(11, &p("231"), 0, 7, std::slice::from_ref(&witness))
                .unwrap()
                .unwrap();
        assert_eq!(best.steps, 19);
        assert_eq!(best.perm, witness);
        assert!(verify_record(&best));
    }

    #[test]
    fn verify_record_detects_tampering() {
        let mut record = measure(&p("132"), &p("231")).unwrap();
        assert!(verify_record(&record));
        record.steps += 1;
        assert!(!verify_record(&record));
    }
}
