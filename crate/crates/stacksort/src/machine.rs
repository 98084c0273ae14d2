//! The stack-sorting machines and their event traces.
//!
//! Each machine makes one deterministic pass over the input: it pushes the
//! next input entry whenever that is legal and pops the stack otherwise;
//! once the input is exhausted it drains the stack. Legality is always
//! judged on the *hypothetical post-push stack read from top to bottom*:
//!
//! * `west`    — push only onto a larger entry (equivalent to `sc:21` and `s:21`);
//! * `s:σ`     — the whole stack must classically avoid σ;
//! * `sc:σ`    — the top `k` entries must not form a consecutive occurrence
//!   of σ; entries deeper than `k` can never be part of a new occurrence, so
//!   only the top window is examined, and a stack shorter than `k` never
//!   blocks a push;
//! * `scb:B`   — as `sc:σ` for every σ in the set `B`.

use std::fmt;
use std::str::FromStr;

use serde_json::json;

use crate::error::{Error, Result};
use crate::patterns::{contains_classical_slice, Pattern};
use crate::perm::Permutation;

/// Which machine a [`MachineSpec`] selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MachineKind {
    West,
    Classical,
    Consecutive,
    ConsecutiveMulti,
}

/// A machine selection: the kind plus its forbidden pattern(s).
///
/// `west` carries no pattern, `s:σ`/`sc:σ` carry exactly one of the matching
/// mode, and `scb:…` carries one or more consecutive patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineSpec {
    kind: MachineKind,
    patterns: Vec<Pattern>,
}

impl MachineSpec {
    pub fn west() -> Self {
        Self { kind: MachineKind::West, patterns: Vec::new() }
    }

    pub fn classical(sigma: Permutation) -> Result<Self> {
        Ok(Self { kind: MachineKind::Classical, patterns: vec![Pattern::classical(sigma)?] })
    }

    pub fn consecutive(sigma: Permutation) -> Result<Self> {
        Ok(Self { kind: MachineKind::Consecutive, patterns: vec![Pattern::consecutive(sigma)?] })
    }

    pub fn consecutive_multi(sigmas: Vec<Permutation>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::InvalidInput("scb needs at least one pattern".into()));
        }
        let patterns = sigmas
            .into_iter()
            .map(Pattern::consecutive)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind: MachineKind::ConsecutiveMulti, patterns })
    }

    pub fn kind(&self) -> MachineKind {
        self.kind
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }
}

impl fmt::Display for MachineSpec {
    /// The one-token grammar: `west`, `s:<perm>`, `sc:<perm>`, `scb:<perm>+<perm>+…`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MachineKind::West => write!(f, "west"),
            MachineKind::Classical => write!(f, "s:{}", self.patterns[0].perm().compact_text()),
            MachineKind::Consecutive => write!(f, "sc:{}", self.patterns[0].perm().compact_text()),
            MachineKind::ConsecutiveMulti => {
                write!(f, "scb:")?;
                for (i, p) in self.patterns.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{}", p.perm().compact_text())?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for MachineSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "west" {
            return Ok(MachineSpec::west());
        }
        let Some((tag, rest)) = s.split_once(':') else {
            return Err(Error::Parse(format!(
                "`{s}` is not a machine spec (expected west, s:<perm>, sc:<perm>, or scb:<perm>+…)"
            )));
        };
        match tag {
            "s" => MachineSpec::classical(rest.parse()?),
            "sc" => MachineSpec::consecutive(rest.parse()?),
            "scb" => {
                let sigmas = rest
                    .split('+')
                    .map(|t| t.parse::<Permutation>())
                    .collect::<Result<Vec<_>>>()?;
                MachineSpec::consecutive_multi(sigmas)
            }
            other => Err(Error::Parse(format!("unknown machine kind `{other}`"))),
        }
        .map_err(|e| match e {
            Error::Parse(_) => e,
            other => Error::Parse(other.to_string()),
        })
    }
}

/// Pushing `next` on `stack` would complete a consecutive occurrence of `pat`
/// in the top window (stack given bottom-to-top, window read top-to-bottom).
fn consecutive_window_blocks(stack: &[u8], next: u8, pat: &[u8]) -> bool {
    let k = pat.len();
    let depth = stack.len();
    if depth + 1 < k {
        return false;
    }
    // after the push, the window top-to-bottom is next, stack[d-1], stack[d-2], ...
    let at = |i: usize| if i == 0 { next } else { stack[depth - i] };
    for i in 0..k {
        for j in i + 1..k {
            if (at(i) < at(j)) != (pat[i] < pat[j]) {
                return false;
            }
        }
    }
    true
}

fn classical_push_legal(stack: &[u8], next: u8, pat: &[u8], scratch: &mut Vec<u8>) -> bool {
    scratch.clear();
    scratch.push(next);
    scratch.extend(stack.iter().rev().copied());
    !contains_classical_slice(scratch, pat)
}

/// May `next` be pushed onto `stack` (bottom-to-top) under `spec`?
///
/// The stack entries and `next` are assumed distinct.
pub fn step_legal_push(stack: &[u8], next: u8, spec: &MachineSpec) -> bool {
    match spec.kind {
        MachineKind::West => stack.last().is_none_or(|&top| next < top),
        MachineKind::Classical => {
            classical_push_legal(stack, next, spec.patterns[0].perm().entries(), &mut Vec::new())
        }
        MachineKind::Consecutive | MachineKind::ConsecutiveMulti => !spec
            .patterns
            .iter()
            .any(|p| consecutive_window_blocks(stack, next, p.perm().entries())),
    }
}

/// Push or pop event in a machine pass. Steps are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u32,
    pub action: Action,
    pub value: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Push,
    Pop,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Push => "push",
            Action::Pop => "pop",
        }
    }
}

/// Was an entry popped before or after the input's final entry entered the stack?
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PopClass {
    Pre,
    Post,
}

impl PopClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PopClass::Pre => "pre",
            PopClass::Post => "post",
        }
    }
}

/// One pop, with its classification and the snapshot taken just before it:
/// the stack read bottom-to-top followed by the unread input suffix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PopRecord {
    pub value: u8,
    pub class: PopClass,
    pub snapshot: Vec<u8>,
}

/// The full event log of one machine pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortTrace {
    pub input: Permutation,
    pub spec: MachineSpec,
    pub output: Permutation,
    pub events: Vec<TraceEvent>,
    /// Pop records in pop order (so their `value`s spell the output).
    pub pops: Vec<PopRecord>,
}

impl SortTrace {
    /// Values popped before the final input entry entered the stack, in pop order.
    pub fn pre_popped(&self) -> Vec<u8> {
        self.pops
            .iter()
            .filter(|p| p.class == PopClass::Pre)
            .map(|p| p.value)
            .collect()
    }

    pub fn pop_class(&self, value: u8) -> Option<PopClass> {
        self.pops.iter().find(|p| p.value == value).map(|p| p.class)
    }

    /// The snapshot recorded just before `value` was popped.
    pub fn pop_snapshot(&self, value: u8) -> Option<&[u8]> {
        self.pops
            .iter()
            .find(|p| p.value == value)
            .map(|p| p.snapshot.as_slice())
    }

    /// The stable JSON form: `{input, spec, events, pop_class, f_snapshots, output}`
    /// with `pop_class` and `f_snapshots` keyed by entry value in pop order.
    pub fn to_json(&self) -> serde_json::Value {
        let events: Vec<serde_json::Value> = self
            .events
            .iter()
            .map(|e| json!({ "step": e.step, "action": e.action.as_str(), "value": e.value }))
            .collect();
        let mut pop_class = serde_json::Map::new();
        let mut f_snapshots = serde_json::Map::new();
        for p in &self.pops {
            pop_class.insert(p.value.to_string(), json!(p.class.as_str()));
            f_snapshots.insert(p.value.to_string(), json!(p.snapshot));
        }
        json!({
            "input": self.input,
            "spec": self.spec.to_string(),
            "events": events,
            "pop_class": pop_class,
            "f_snapshots": f_snapshots,
            "output": self.output,
        })
    }
}

/// Runs one machine pass and records the full trace.
pub fn run(input: &Permutation, spec: &MachineSpec) -> SortTrace {
    let entries = input.entries();
    let n = entries.len();
    let mut stack = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(2 * n);
    let mut pops = Vec::with_capacity(n);
    let mut i = 0;
    let mut step = 0u32;
    let mut final_entered = false;
    while out.len() < n {
        step += 1;
        if i < n && step_legal_push(&stack, entries[i], spec) {
            stack.push(entries[i]);
            events.push(TraceEvent { step, action: Action::Push, value: entries[i] });
            if i == n - 1 {
                final_entered = true;
            }
            i += 1;
        } else {
            // a forced pop: the stack is nonempty here because an empty stack
            // never blocks a push
            let value = *stack.last().unwrap();
            let mut snapshot = Vec::with_capacity(stack.len() + (n - i));
            snapshot.extend_from_slice(&stack);
            snapshot.extend_from_slice(&entries[i..]);
            stack.pop();
            events.push(TraceEvent { step, action: Action::Pop, value });
            pops.push(PopRecord {
                value,
                class: if final_entered { PopClass::Post } else { PopClass::Pre },
                snapshot,
            });
            out.push(value);
        }
    }
    SortTrace {
        input: input.clone(),
        spec: spec.clone(),
        output: Permutation::from_one_line(out).expect("a machine pass permutes its input"),
        events,
        pops,
    }
}

/// Runs one machine pass without recording a trace.
pub fn run_output(input: &Permutation, spec: &MachineSpec) -> Permutation {
    let mut stack = Vec::with_capacity(input.len());
    let mut out = Vec::with_capacity(input.len());
    run_output_into(input.entries(), spec, &mut stack, &mut out);
    Permutation::from_one_line(std::mem::take(&mut out)).expect("a machine pass permutes its input")
}

/// Trace-free pass into caller-supplied buffers; the hot path for orbit
/// iteration and search.
pub(crate) fn run_output_into(
    input: &[u8],
    spec: &MachineSpec,
    stack: &mut Vec<u8>,
    out: &mut Vec<u8>,
) {
    match spec.kind {
        MachineKind::West => {
            stack.clear();
            out.clear();
            let n = input.len();
            let mut i = 0;
            while out.len() < n {
                if i < n && stack.last().is_none_or(|&top| input[i] < top) {
                    stack.push(input[i]);
                    i += 1;
                } else {
                    out.push(stack.pop().unwrap());
                }
            }
        }
        MachineKind::Consecutive => {
            sc_into(input, spec.patterns[0].perm().entries(), stack, out)
        }
        MachineKind::ConsecutiveMulti => {
            let pats: Vec<&[u8]> = spec.patterns.iter().map(|p| p.perm().entries()).collect();
            consecutive_run_into(input, &pats, stack, out);
        }
        MachineKind::Classical => {
            stack.clear();
            out.clear();
            let pat = spec.patterns[0].perm().entries();
            let mut scratch = Vec::with_capacity(input.len());
            let n = input.len();
            let mut i = 0;
            while out.len() < n {
                if i < n && classical_push_legal(stack, input[i], pat, &mut scratch) {
                    stack.push(input[i]);
                    i += 1;
                } else {
                    out.push(stack.pop().unwrap());
                }
            }
        }
    }
}

pub(crate) fn consecutive_run_into(
    input: &[u8],
    pats: &[&[u8]],
    stack: &mut Vec<u8>,
    out: &mut Vec<u8>,
) {
    stack.clear();
    out.clear();
    let n = input.len();
    let mut i = 0;
    while out.len() < n {
        if i < n && !pats.iter().any(|p| consecutive_window_blocks(stack, input[i], p)) {
            stack.push(input[i]);
            i += 1;
        } else {
            out.push(stack.pop().unwrap());
        }
    }
}

/// One `sc:σ` pass into caller-supplied buffers.
pub(crate) fn sc_into(input: &[u8], sigma: &[u8], stack: &mut Vec<u8>, out: &mut Vec<u8>) {
    consecutive_run_into(input, &[sigma], stack, out);
}

/// The consecutive-pattern-avoiding pass `sc:σ` as a single map application.
/// Requires `|σ| >= 2`.
pub fn sc(input: &Permutation, sigma: &Permutation) -> Result<Permutation> {
    if sigma.len() < 2 {
        return Err(Error::InvalidInput("sc needs a pattern of length >= 2".into()));
    }
    let mut stack = Vec::with_capacity(input.len());
    let mut out = Vec::with_capacity(input.len());
    sc_into(input.entries(), sigma.entries(), &mut stack, &mut out);
    Ok(Permutation::from_one_line(out).expect("a machine pass permutes its input"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn spec(s: &str) -> MachineSpec {
        s.parse().unwrap()
    }

    #[test]
    fn spec_text_roundtrip() {
        for s in ["west", "s:231", "sc:231", "scb:231+321", "sc:1234"] {
            assert_eq!(spec(s).to_string(), s);
        }
        assert!("sc:1".parse::<MachineSpec>().is_err());
        assert!("scb:".parse::<MachineSpec>().is_err());
        assert!("nope:21".parse::<MachineSpec>().is_err());
        assert!("plain".parse::<MachineSpec>().is_err());
    }

    #[test]
    fn step_legal_push_examples() {
        let sc231 = spec("sc:231");
        // top three after pushing 5 onto (1,3,6) would read 5,6,3 — a 231
        assert!(!step_legal_push(&[1, 3, 6], 5, &sc231));
        // 5,3,1 reads as 321, allowed
        assert!(step_legal_push(&[1, 3], 5, &sc231));
        assert!(step_legal_push(&[], 5, &sc231));
        assert!(step_legal_push(&[], 9, &spec("west")));
        assert!(step_legal_push(&[7], 3, &spec("west")));
        assert!(!step_legal_push(&[3], 7, &spec("west")));
        // a stack shorter than k never blocks
        assert!(step_legal_push(&[2], 1, &spec("sc:1234")));
    }

    #[test]
    fn run_examples() {
        assert_eq!(run(&p("143652"), &spec("west")).output, p("134256"));
        assert_eq!(run(&p("143652"), &spec("s:231")).output, p("465321"));

        let t = run(&p("143652"), &spec("sc:231"));
        assert_eq!(t.output, p("462531"));
        assert_eq!(t.pop_snapshot(6).unwrap(), &[1, 3, 6, 5, 2]);
        assert_eq!(t.pre_popped(), vec![4, 6]);
        assert_eq!(t.pop_class(2), Some(PopClass::Post));
    }

    #[test]
    fn sc_examples() {
        assert_eq!(sc(&p("321"), &p("231")).unwrap(), p("123"));
        assert_eq!(sc(&Permutation::identity(6), &p("231")).unwrap(), p("654321"));
        assert_eq!(
            sc(&p("11,1,3,10,9,2,7,5,8,6,4"), &p("231")).unwrap(),
            p("10,7,8,4,6,5,2,9,3,1,11")
        );
        assert_eq!(sc(&p("12"), &p("231")).unwrap(), p("21"));
        assert!(sc(&p("12"), &p("1")).is_err());
    }

    #[test]
    fn traceless_matches_traced() {
        for q in crate::perm::enumerate_sn(6).unwrap() {
            for s in ["west", "sc:231", "sc:132", "s:231", "scb:231+321", "sc:1234"] {
                let m = spec(s);
                assert_eq!(run(&q, &m).output, run_output(&q, &m), "{q} under {s}");
            }
        }
    }

    #[test]
    fn trace_shape_for_singleton() {
        let t = run(&p("1"), &spec("sc:231"));
        assert_eq!(t.events.len(), 2);
        assert_eq!(t.events[0].action, Action::Push);
        assert_eq!(t.events[1].action, Action::Pop);
        assert_eq!(t.pops[0].class, PopClass::Post);
        assert_eq!(t.output, p("1"));
    }

    #[test]
    fn trace_json_shape() {
        let t = run(&p("143652"), &spec("sc:231"));
        let v = t.to_json();
        assert_eq!(v["spec"], "sc:231");
        assert_eq!(v["f_snapshots"]["6"], serde_json::json!([1, 3, 6, 5, 2]));
        assert_eq!(v["pop_class"]["4"], "pre");
        assert_eq!(v["pop_class"]["5"], "post");
        assert_eq!(v["output"], serde_json::json!([4, 6, 2, 5, 3, 1]));
        assert_eq!(v["events"][0], serde_json::json!({"step": 1, "action": "push", "value": 1}));
    }
}
