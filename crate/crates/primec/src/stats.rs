//! Run statistics and execution traces.
//!
//! [`RunStats`] is the flat summary a run prints as JSON or a bench CSV row.
//! [`Trace`] records what happened inside a run in enough detail for tests
//! to check invariants: every shrink pass, every cover iteration, and the
//! solver call totals per phase.

use serde::Serialize;

use crate::enumerate::Mode;
use crate::shrink::Strategy;

/// Which decision order a shrink pass solved under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    /// Seed order.
    Forward,
    /// Seed order reversed.
    Backward,
    /// Even seed positions, used on the first half of an interval split.
    Left,
    /// Odd seed positions, used on the second half of an interval split.
    Right,
    /// A fresh shuffle of the current core.
    Random,
}

/// One solver call made while shrinking, with the core size before and
/// after it took effect.
#[derive(Debug, Clone, Serialize)]
pub struct ShrinkPass {
    pub order: OrderKind,
    /// Core size going in.
    pub before: usize,
    /// Core size after this pass (unchanged if the call was satisfiable).
    pub after: usize,
    /// Whether the call came back satisfiable. Interval probes may; full
    /// passes must not.
    pub sat: bool,
}

/// One full shrink of a seed down to a core.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ShrinkCall {
    pub seed_len: usize,
    pub final_len: usize,
    pub passes: Vec<ShrinkPass>,
}

/// One iteration of cover construction: model found, core shrunk from it,
/// running size of the cover after adding the core's negation.
#[derive(Debug, Clone, Serialize)]
pub struct CoverIteration {
    pub model_len: usize,
    pub core_len: usize,
    pub cover_literals: usize,
}

/// Everything a run did, phase by phase.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Trace {
    pub shrink_calls: Vec<ShrinkCall>,
    pub cover_iterations: Vec<CoverIteration>,
    pub phase1_solver_calls: u64,
    pub phase2_solver_calls: u64,
    /// Minimal models enumerated in phase two, one per prime.
    pub enum_models: u64,
}

impl Trace {
    /// Total solver passes spent shrinking, across all cover iterations.
    pub fn total_shrink_passes(&self) -> usize {
        self.shrink_calls.iter().map(|c| c.passes.len()).sum()
    }
}

/// Flat per-run summary. Serialized as the `run` command's JSON stats and
/// as one row of the bench CSV.
#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub mode: Mode,
    /// Input label: a file path, or empty when compiled from memory.
    pub input: String,
    pub vars: usize,
    pub cover_clauses: usize,
    pub cover_literals: usize,
    pub primes: usize,
    pub solver_calls: u64,
    pub shrink_passes: usize,
    pub phase1_ms: u64,
    pub phase2_ms: u64,
    /// Cover literals over the literal count of a smallest prime cover,
    /// when the latter is cheap enough to compute.
    pub cost: Option<f64>,
    pub seed: u64,
    pub strategy: Strategy,
    pub iterations: u32,
}
