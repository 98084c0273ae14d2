//! `stacksort` — stack-sorting machines, orbits, verification sweeps, and
//! extremal search from the command line.
//!
//! Exit codes: 0 success/pass, 1 verification failure or runtime error,
//! 2 usage or parse error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use stacksort::dynamics::{
    census_multi_with, default_time_cap, orbit, verify_bound_with, verify_claim_adjacent12_with,
    verify_d_decrease_with, verify_theorem_1_with, OrbitResult, Report,
};
use stacksort::machine::{run, Action, MachineSpec, SortTrace};
use stacksort::patterns::Pattern;
use stacksort::perm::Permutation;
use stacksort::search::{
    exhaustive_search, sampled_search_with_candidates, verify_record, SearchOptions, SearchOutcome,
    SearchRecord, DEFAULT_CHUNK_SIZE, DEFAULT_WITNESS_LIMIT,
};
use stacksort::Error;

#[derive(Parser)]
#[command(
    name = "stacksort",
    version,
    about = "Stack-sorting maps with pattern-avoiding stacks: sort, trace, orbits, verification, search"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one machine pass and print the output permutation.
    Sort {
        /// Input permutation, e.g. "1 4 3 6 5 2" or "143652".
        #[arg(long)]
        perm: String,
        /// Machine: west, s:<perm>, sc:<perm>, or scb:<perm>+<perm>+…
        #[arg(long)]
        map: String,
    },
    /// Apply one machine pass and print the full event trace.
    Trace {
        #[arg(long)]
        perm: String,
        #[arg(long)]
        map: String,
    },
    /// Iterate sc:<sigma> until the orbit closes, reporting the time to
    /// reach the class avoiding sigma and its reverse consecutively.
    Orbit {
        #[arg(long)]
        perm: String,
        /// Pattern for the consecutive-avoiding pass, e.g. 231.
        #[arg(long)]
        sigma: String,
        /// Iteration cap (default: (n-1)(n-2)+4).
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Run a verification suite; exits 1 if any violation is found.
    Verify {
        /// One of: theorem1, bound, ddecrease, claim12, census, records.
        suite: String,
        #[arg(long)]
        n: Option<u8>,
        /// Pattern for theorem1, e.g. 231.
        #[arg(long)]
        sigma: Option<String>,
        /// Comma-separated consecutive patterns for census, e.g. 231,321.
        #[arg(long)]
        patterns: Option<String>,
        /// Records file for the records suite.
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Exhaustive (default) or seeded random search for extremal sorting times.
    Search {
        #[arg(long)]
        n: u8,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        workers: Option<usize>,
        /// Checkpoint file (searched runs resume from it).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// JSONL records file, appended as maxima are discovered.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk_size: u64,
        /// Stop after this many chunks (the checkpoint stays resumable).
        #[arg(long)]
        max_chunks: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_WITNESS_LIMIT)]
        witness_limit: usize,
        /// Override the per-permutation iteration cap.
        #[arg(long)]
        max_iter: Option<u32>,
        /// Random mode: examine this many distinct sampled permutations.
        #[arg(long, requires = "seed")]
        sample: Option<u64>,
        /// Seed for --sample (randomness is never implicit).
        #[arg(long)]
        seed: Option<u64>,
        /// Extra structured candidates to evaluate alongside the sample.
        #[arg(long = "include", value_name = "PERM")]
        include: Vec<String>,
    },
    /// Count the permutations of S_n avoiding the given patterns.
    Count {
        #[arg(long)]
        n: u8,
        /// Comma-separated patterns: c:231 (consecutive), p:231 (classical),
        /// bare 231 defaults to consecutive.
        #[arg(long)]
        patterns: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_)
                | Error::InvalidInput(_)
                | Error::Capacity { .. }
                | Error::CorruptCheckpoint(_) => ExitCode::from(2),
                Error::BoundViolation { .. } | Error::Io(_) | Error::Json(_) => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Sort { perm, map } => cmd_sort(perm, map, cli.format),
        Command::Trace { perm, map } => cmd_trace(perm, map, cli.format),
        Command::Orbit { perm, sigma, max_iter } => cmd_orbit(perm, sigma, *max_iter, cli.format),
        Command::Verify { suite, n, sigma, patterns, path, workers } => {
            cmd_verify(suite, *n, sigma.as_deref(), patterns.as_deref(), path.as_deref(), *workers, cli.format)
        }
        Command::Search {
            n,
            sigma,
            workers,
            checkpoint,
            records,
            chunk_size,
            max_chunks,
            witness_limit,
            max_iter,
            sample,
            seed,
            include,
        } => {
            let sigma: Permutation = sigma.parse()?;
            if let Some(sample) = sample {
                let candidates: Vec<Permutation> =
                    include.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
                cmd_search_sampled(*n, &sigma, *sample, seed.expect("clap requires"), &candidates, cli.format)
            } else {
                let opts = SearchOptions {
                    workers: workers.unwrap_or_else(default_workers),
                    chunk_size: *chunk_size,
                    witness_limit: *witness_limit,
                    checkpoint_path: checkpoint.clone(),
                    records_path: records.clone(),
                    max_chunks: *max_chunks,
                    max_iter: *max_iter,
                };
                cmd_search_exhaustive(*n, &sigma, &opts, cli.format)
            }
        }
        Command::Count { n, patterns } => cmd_count(*n, patterns, cli.format),
    }
}

/// Worker count: flag beats STACKSORT_WORKERS beats the machine's parallelism.
fn default_workers() -> usize {
    std::env::var("STACKSORT_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn cmd_sort(perm: &str, map: &str, format: Format) -> Result<ExitCode, Error> {
    let input: Permutation = perm.parse()?;
    let spec: MachineSpec = map.parse()?;
    let output = stacksort::run_output(&input, &spec);
    match format {
        Format::Human => println!("{output}"),
        Format::Json => println!(
            "{}",
            json!({ "input": input, "map": spec.to_string(), "output": output })
        ),
        Format::Csv => {
            println!("input,map,output");
            println!("{input},{},{output}", spec);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_trace(perm: &str, map: &str, format: Format) -> Result<ExitCode, Error> {
    let input: Permutation = perm.parse()?;
    let spec: MachineSpec = map.parse()?;
    let trace = run(&input, &spec);
    match format {
        Format::Human => print_trace_human(&trace),
        Format::Json => println!("{}", trace.to_json()),
        Format::Csv => {
            println!("step,action,value");
            for e in &trace.events {
                println!("{},{},{}", e.step, e.action.as_str(), e.value);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_trace_human(trace: &SortTrace) {
    println!("input:  {}", trace.input);
    println!("spec:   {}", trace.spec);
    let mut pop_index = 0;
    for e in &trace.events {
        match e.action {
            Action::Push => println!("step {:>3}  push {}", e.step, e.value),
            Action::Pop => {
                let record = &trace.pops[pop_index];
                pop_index += 1;
                let snapshot: Vec<String> =
                    record.snapshot.iter().map(|v| v.to_string()).collect();
                println!(
                    "step {:>3}  pop  {}   [{}]  f: {}",
                    e.step,
                    e.value,
                    record.class.as_str(),
                    snapshot.join(" ")
                );
            }
        }
    }
    println!("output: {}", trace.output);
}

fn cmd_orbit(
    perm: &str,
    sigma: &str,
    max_iter: Option<usize>,
    format: Format,
) -> Result<ExitCode, Error> {
    let start: Permutation = perm.parse()?;
    let sigma: Permutation = sigma.parse()?;
    if sigma.len() < 2 {
        return Err(Error::InvalidInput("orbit needs a pattern of length >= 2".into()));
    }
    let target = [
        Pattern::consecutive(sigma.clone())?,
        Pattern::consecutive(sigma.reverse())?,
    ];
    let max_iter = max_iter.unwrap_or(default_time_cap(start.len()) as usize + 2).max(1);
    let result = orbit(&start, &sigma, Some(&target), max_iter)?;
    match format {
        Format::Human => print_orbit_human(&result),
        Format::Json => {
            let (cycle_start, cycle_length) = match result.cycle {
                Some(c) => (json!(c.start), json!(c.length)),
                None => (json!(null), json!(null)),
            };
            println!(
                "{}",
                json!({
                    "start": result.iterates[0],
                    "sigma": format!("c:{}", sigma_compact(&sigma)),
                    "iterates": result.iterates,
                    "cycle_start": cycle_start,
                    "cycle_length": cycle_length,
                    "hit_time": result.hit_time,
                    "truncated": result.truncated(),
                })
            );
        }
        Format::Csv => {
            println!("t,perm");
            for (t, q) in result.iterates.iter().enumerate() {
                println!("{t},{q}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sigma_compact(sigma: &Permutation) -> String {
    Pattern::consecutive(sigma.clone())
        .map(|p| p.to_string().split_off(2))
        .unwrap_or_else(|_| sigma.to_string())
}

fn print_orbit_human(result: &OrbitResult) {
    for (t, q) in result.iterates.iter().enumerate() {
        if t == 0 {
            println!("   {t:>3}: {q}");
        } else {
            println!("-> {t:>3}: {q}");
        }
    }
    match result.cycle {
        Some(c) => println!("cycle: start {} length {}", c.start, c.length),
        None => println!("cycle: not reached (truncated)"),
    }
    match result.hit_time {
        Some(t) => println!("hit_time: {t}"),
        None => println!("hit_time: not reached"),
    }
}

fn cmd_verify(
    suite: &str,
    n: Option<u8>,
    sigma: Option<&str>,
    patterns: Option<&str>,
    path: Option<&std::path::Path>,
    workers: Option<usize>,
    format: Format,
) -> Result<ExitCode, Error> {
    let workers = workers.unwrap_or_else(default_workers);
    let need_n = || n.ok_or_else(|| Error::InvalidInput(format!("suite {suite} needs --n")));
    let report = match suite {
        "theorem1" => {
            let sigma: Permutation = sigma
                .ok_or_else(|| Error::InvalidInput("theorem1 needs --sigma".into()))?
                .parse()?;
            verify_theorem_1_with(need_n()?, &sigma, workers)?
        }
        "bound" => verify_bound_with(need_n()?, workers)?,
        "ddecrease" => verify_d_decrease_with(need_n()?, workers)?,
        "claim12" => verify_claim_adjacent12_with(need_n()?, workers)?,
        "census" => {
            let patterns = patterns
                .ok_or_else(|| Error::InvalidInput("census needs --patterns".into()))?;
            let patterns = parse_patterns(patterns)?;
            census_multi_with(need_n()?, &patterns, workers)?
        }
        "records" => {
            let path =
                path.ok_or_else(|| Error::InvalidInput("records needs --path".into()))?;
            verify_records_file(path)?
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown suite `{other}` (expected theorem1, bound, ddecrease, claim12, census, or records)"
            )))
        }
    };
    print_report(&report, format)?;
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Re-verifies every record line of a JSONL file.
fn verify_records_file(path: &std::path::Path) -> Result<Report, Error> {
    let text = fs::read_to_string(path)?;
    let mut violations = Vec::new();
    let mut count = 0u64;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        count += 1;
        match serde_json::from_str::<SearchRecord>(line) {
            Ok(record) if verify_record(&record) => {}
            Ok(record) => violations.push(json!({
                "kind": "steps_mismatch",
                "line": idx + 1,
                "perm": record.perm,
                "claimed_steps": record.steps,
            })),
            Err(e) => violations.push(json!({
                "kind": "unparseable_line",
                "line": idx + 1,
                "error": e.to_string(),
            })),
        }
    }
    let mut stats = serde_json::Map::new();
    stats.insert("records".into(), json!(count));
    Ok(Report {
        check: "records".into(),
        n: 0,
        sigma: None,
        pass: violations.is_empty(),
        violations,
        stats,
    })
}

fn print_report(report: &Report, format: Format) -> Result<(), Error> {
    match format {
        Format::Human => {
            let sigma = report.sigma.as_deref().unwrap_or("-");
            println!(
                "{} n={} sigma={}: {}",
                report.check,
                report.n,
                sigma,
                if report.pass { "PASS" } else { "FAIL" }
            );
            for (key, value) in &report.stats {
                println!("  {key}: {value}");
            }
            for v in &report.violations {
                println!("  violation: {v}");
            }
        }
        Format::Json => println!("{}", serde_json::to_string(report)?),
        Format::Csv => {
            println!("check,n,sigma,pass,violations");
            println!(
                "{},{},{},{},{}",
                report.check,
                report.n,
                report.sigma.as_deref().unwrap_or(""),
                report.pass,
                report.violations.len()
            );
        }
    }
    Ok(())
}

fn parse_patterns(text: &str) -> Result<Vec<Pattern>, Error> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Pattern::from_str)
        .collect()
}

fn cmd_search_exhaustive(
    n: u8,
    sigma: &Permutation,
    opts: &SearchOptions,
    format: Format,
) -> Result<ExitCode, Error> {
    let outcome = exhaustive_search(n, sigma, opts)?;
    print_search_outcome(n, sigma, &outcome, format);
    Ok(ExitCode::SUCCESS)
}

fn print_search_outcome(n: u8, sigma: &Permutation, outcome: &SearchOutcome, format: Format) {
    match format {
        Format::Human => {
            println!("n {n} sigma c:{}", sigma_compact(sigma));
            println!("best_steps {}", outcome.best_steps);
            println!("complete {}", outcome.complete);
            println!("next_rank {}", outcome.checkpoint.next_rank);
            println!("witnesses {}", outcome.witnesses.len());
            for record in &outcome.witnesses {
                println!(
                    "  {} (steps {}, discovered_at {})",
                    record.perm, record.steps, record.discovered_at
                );
            }
        }
        Format::Json => println!(
            "{}",
            json!({
                "n": n,
                "sigma": format!("c:{}", sigma_compact(sigma)),
                "best_steps": outcome.best_steps,
                "complete": outcome.complete,
                "next_rank": outcome.checkpoint.next_rank,
                "witnesses": outcome.witnesses,
            })
        ),
        Format::Csv => {
            println!("n,sigma,steps,perm,discovered_at");
            for record in &outcome.witnesses {
                println!(
                    "{},{},{},{},{}",
                    record.n, record.sigma, record.steps, record.perm, record.discovered_at
                );
            }
        }
    }
}

fn cmd_search_sampled(
    n: u8,
    sigma: &Permutation,
    sample: u64,
    seed: u64,
    candidates: &[Permutation],
    format: Format,
) -> Result<ExitCode, Error> {
    let best = sampled_search_with_candidates(n, sigma, sample, seed, candidates)?;
    match format {
        Format::Human => match &best {
            Some(record) => {
                println!("n {n} sigma c:{}", sigma_compact(sigma));
                println!("best_steps {}", record.steps);
                println!("witness {} (discovered_at {})", record.perm, record.discovered_at);
            }
            None => println!("no samples examined"),
        },
        Format::Json => println!(
            "{}",
            json!({
                "n": n,
                "sigma": format!("c:{}", sigma_compact(sigma)),
                "sample": sample,
                "seed": seed,
                "best": best,
            })
        ),
        Format::Csv => {
            println!("n,sigma,steps,perm,discovered_at");
            if let Some(record) = &best {
                println!(
                    "{},{},{},{},{}",
                    record.n, record.sigma, record.steps, record.perm, record.discovered_at
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_count(n: u8, patterns: &str, format: Format) -> Result<ExitCode, Error> {
    let patterns = parse_patterns(patterns)?;
    let avoiders = stacksort::enumerate_av(n, &patterns)?;
    let texts: Vec<String> = patterns.iter().map(|p| p.to_string()).collect();
    match format {
        Format::Human => println!("{}", avoiders.len()),
        Format::Json => println!(
            "{}",
            json!({ "n": n, "patterns": texts, "count": avoiders.len() })
        ),
        Format::Csv => {
            println!("n,patterns,count");
            println!("{n},{},{}", texts.join("+"), avoiders.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}
