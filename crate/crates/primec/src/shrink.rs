//! Core shrinking: turning a seed assignment that contradicts the clauses
//! into a smaller contradicting subset, by re-solving under permutations of
//! the assumption order.
//!
//! The solver decides assumptions strictly in list order, so different
//! orders steer conflict analysis towards different failed-assumption sets.
//! The multi-order strategy exploits four deterministic permutations of the
//! seed; the random strategy shuffles instead. Neither guarantees a minimum
//! or even minimal core, only `result ⊆ seed` with the contradiction intact.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cnf::Lit;
use crate::sat::{Solver, SolveResult};
use crate::stats::{OrderKind, ShrinkCall, ShrinkPass};
use crate::Error;

/// How cores are shrunk between finding a countermodel and adding its
/// negation to the cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Ordered passes: forward, an interval split, then alternating
    /// backward/forward iterations.
    MultiOrder,
    /// Seeded random shuffles of the assumption order.
    Random,
    /// No shrinking; the seed is used as-is.
    None,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::MultiOrder => "multi-order",
            Strategy::Random => "random",
            Strategy::None => "none",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Strategy, String> {
        match s {
            "multi-order" => Ok(Strategy::MultiOrder),
            "random" => Ok(Strategy::Random),
            "none" => Ok(Strategy::None),
            _ => Err(format!(
                "unknown strategy `{s}` (multi-order|random|none)"
            )),
        }
    }
}

/// Knobs for [`shrink`].
#[derive(Debug, Clone, Copy)]
pub struct ShrinkConfig {
    pub strategy: Strategy,
    /// Iterative passes after the basic phase (multi-order), or shuffle
    /// count (random).
    pub bound: u32,
    pub seed: u64,
    /// Whether the multi-order basic phase tries the interval split.
    pub interval: bool,
}

impl Default for ShrinkConfig {
    fn default() -> ShrinkConfig {
        ShrinkConfig {
            strategy: Strategy::MultiOrder,
            bound: 1,
            seed: 0,
            interval: true,
        }
    }
}

/// The four assumption orders derived from a seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderFamily {
    pub forward: Vec<Lit>,
    pub backward: Vec<Lit>,
    /// Seed elements at even positions, relative order kept.
    pub left: Vec<Lit>,
    /// Seed elements at odd positions, relative order kept.
    pub right: Vec<Lit>,
}

/// Builds the order family of a non-empty seed. The first element goes to
/// the left half, the second to the right, alternating.
pub fn make_orders(pi: &[Lit]) -> OrderFamily {
    assert!(!pi.is_empty(), "order family of an empty seed");
    let halves = split_alternating(pi);
    OrderFamily {
        forward: pi.to_vec(),
        backward: pi.iter().rev().copied().collect(),
        left: halves.0,
        right: halves.1,
    }
}

fn split_alternating(core: &[Lit]) -> (Vec<Lit>, Vec<Lit>) {
    let left = core.iter().step_by(2).copied().collect();
    let right = core.iter().skip(1).step_by(2).copied().collect();
    (left, right)
}

/// One solve under a fixed assumption order, recorded as a pass. Returns
/// the failed assumptions on unsat, `None` on sat.
fn ordered_solve(
    solver: &mut Solver,
    order: &[Lit],
    kind: OrderKind,
    current: usize,
    call: &mut ShrinkCall,
) -> Option<Vec<Lit>> {
    match solver.solve(order) {
        SolveResult::Sat(_) => {
            call.passes.push(ShrinkPass {
                order: kind,
                before: current,
                after: current,
                sat: true,
            });
            None
        }
        SolveResult::Unsat(failed) => {
            debug_assert!(failed.iter().all(|l| order.contains(l)));
            call.passes.push(ShrinkPass {
                order: kind,
                before: current,
                after: failed.len(),
                sat: false,
            });
            Some(failed)
        }
    }
}

/// Multi-order shrinking. Basic phase: one forward solve, then an interval
/// split of the surviving core. Iterative phase: up to `cfg.bound` more
/// solves alternating backward and forward orders, stopping early once a
/// pass leaves the core size unchanged. The seed must contradict the
/// clauses; the result is a subset of it, in the assumption order of the
/// last unsat solve.
pub fn over_approximate(
    solver: &mut Solver,
    pi: &[Lit],
    cfg: &ShrinkConfig,
    call: &mut ShrinkCall,
) -> Result<Vec<Lit>, Error> {
    if pi.is_empty() {
        return match ordered_solve(solver, &[], OrderKind::Forward, 0, call) {
            Some(_) => Ok(Vec::new()),
            None => Err(Error::Contract(
                "empty seed needs contradictory clauses".to_string(),
            )),
        };
    }

    // basic phase
    let orders = make_orders(pi);
    let mut core = match ordered_solve(solver, &orders.forward, OrderKind::Forward, pi.len(), call)
    {
        Some(failed) => failed,
        None => {
            return Err(Error::Contract(
                "seed is satisfiable with the clauses".to_string(),
            ))
        }
    };
    if cfg.interval && core.len() > 1 {
        let (left, right) = split_alternating(&core);
        core = interval(solver, core, &left, &right, call);
    }

    // iterative phase: backward first, forward only right after a backward
    for pass in 0..cfg.bound {
        let in_seed_order = restrict_to(pi, &core);
        let (order, kind): (Vec<Lit>, OrderKind) = if pass % 2 == 0 {
            (in_seed_order.iter().rev().copied().collect(), OrderKind::Backward)
        } else {
            (in_seed_order, OrderKind::Forward)
        };
        let before = core.len();
        core = match ordered_solve(solver, &order, kind, before, call) {
            Some(failed) => failed,
            None => {
                return Err(Error::Contract(
                    "core became satisfiable during iteration".to_string(),
                ))
            }
        };
        if core.len() == before {
            break;
        }
    }
    Ok(core)
}

/// `base` filtered down to the elements of `core`, keeping `base`'s order.
fn restrict_to(base: &[Lit], core: &[Lit]) -> Vec<Lit> {
    let keep: HashSet<Lit> = core.iter().copied().collect();
    base.iter().filter(|l| keep.contains(l)).copied().collect()
}

/// Interval splitting: probe each half of the core; whichever half is
/// already contradictory replaces the core, recursively. If both halves are
/// satisfiable the core is returned unchanged.
pub fn interval(
    solver: &mut Solver,
    pi_p: Vec<Lit>,
    dl: &[Lit],
    dr: &[Lit],
    call: &mut ShrinkCall,
) -> Vec<Lit> {
    if pi_p.len() <= 1 {
        return pi_p;
    }
    if let Some(core) = ordered_solve(solver, dl, OrderKind::Left, pi_p.len(), call) {
        let (left, right) = split_alternating(&core);
        return interval(solver, core, &left, &right, call);
    }
    if let Some(core) = ordered_solve(solver, dr, OrderKind::Right, pi_p.len(), call) {
        let (left, right) = split_alternating(&core);
        return interval(solver, core, &left, &right, call);
    }
    pi_p
}

/// Random-order shrinking: `iterations` seeded shuffles of the current
/// core, each followed by a solve whose failed assumptions become the new
/// core. Decision polarities are also randomized while this runs.
pub fn random_shrink(
    solver: &mut Solver,
    pi: &[Lit],
    iterations: u32,
    seed: u64,
    call: &mut ShrinkCall,
) -> Result<Vec<Lit>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    solver.set_random_polarity(Some(rng.gen()));
    let mut core = pi.to_vec();
    for _ in 0..iterations {
        let mut order = core.clone();
        order.shuffle(&mut rng);
        core = match ordered_solve(solver, &order, OrderKind::Random, core.len(), call) {
            Some(failed) => failed,
            None => {
                solver.set_random_polarity(None);
                return Err(Error::Contract(
                    "core became satisfiable during random shrinking".to_string(),
                ));
            }
        };
    }
    solver.set_random_polarity(None);
    Ok(core)
}

/// Strategy dispatch. `solver` must hold the clauses the seed contradicts.
pub fn shrink(
    solver: &mut Solver,
    pi: &[Lit],
    cfg: &ShrinkConfig,
    call: &mut ShrinkCall,
) -> Result<Vec<Lit>, Error> {
    call.seed_len = pi.len();
    let core = match cfg.strategy {
        Strategy::MultiOrder => over_approximate(solver, pi, cfg, call)?,
        Strategy::Random => random_shrink(solver, pi, cfg.bound, cfg.seed, call)?,
        Strategy::None => pi.to_vec(),
    };
    call.final_len = core.len();
    Ok(core)
}
