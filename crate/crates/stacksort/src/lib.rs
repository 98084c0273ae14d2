//! Stack-sorting maps with pattern-avoiding stacks.
//!
//! The classic deterministic stack pass pushes each input entry unless that
//! is illegal and pops otherwise. This crate implements the whole family of
//! legality rules — the original "never push a larger entry onto a smaller
//! one" machine, stacks that must avoid a pattern classically, stacks that
//! must avoid one or many patterns consecutively — together with full event
//! traces, orbit and periodic-point analysis, exhaustive verification
//! sweeps over `S_n`, and a checkpointed parallel search for permutations
//! with extremal sorting time.
//!
//! Everything is deterministic: machines are pure functions, verification
//! reports are identical for every worker count, and the sampled search is
//! a pure function of its seed.

pub mod dynamics;
mod error;
pub mod machine;
pub mod patterns;
pub mod perm;
pub mod search;

pub use error::{Error, Result};
pub use machine::{run, run_output, sc, MachineKind, MachineSpec, SortTrace};
pub use patterns::{avoids_all, contains, enumerate_av, occurrences, Mode, Pattern};
pub use perm::{enumerate_sn, factorial, Permutation, RelativeIndex, DEFAULT_ENUMERATION_CAP};
