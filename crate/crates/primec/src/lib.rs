//! Compilation of non-clausal Boolean formulas into their complete sets of
//! prime implicants or prime implicates.
//!
//! The pipeline has two phases. Phase one ([`cover::compile_cover`]) walks the
//! models of the negated formula and, for each one, shrinks it against a CNF
//! encoding of the formula into a small unsatisfiable core; the negation of
//! that core is a clause implied by the formula. The accumulated clause set is
//! an over-approximate cover: logically equivalent to the input, but its
//! clauses need not be prime. Phase two ([`enumerate::compile_all_implicants`])
//! maps the cover through a dual-rail encoding and enumerates its
//! subset-minimal models, which correspond one-to-one with the prime
//! implicants of the input. Prime implicates come from running the same
//! pipeline on the negated formula and negating the resulting terms.
//!
//! Core shrinking leans on how a CDCL solver treats assumptions: the same
//! assumption set presented in different orders yields different failed
//! subsets, so [`shrink::over_approximate`] probes a small family of orders
//! derived from the model instead of paying for a minimal core.
//!
//! The `primec` binary fronts the pipeline; see [`cli`]. Ground truth for
//! small instances lives in [`oracle`].

pub mod cli;
pub mod cnf;
pub mod cover;
pub mod enumerate;
pub mod formula;
pub mod oracle;
pub mod sat;
pub mod shrink;
pub mod stats;

#[cfg(doctest)]
mod book;

/// Crate-wide error type.
///
/// `Contract` and `Check` indicate bugs (a violated internal precondition or
/// an oracle mismatch); everything else is an input or environment problem.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Parse(#[from] formula::ParseError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error("oracle budget exceeded: {0}")]
    OracleBudget(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("output does not match the oracle: {0}")]
    Check(String),
    #[error("time budget exhausted")]
    Timeout,
}

impl Error {
    /// Process exit code the error maps to: 1 for input/environment problems,
    /// 2 for internal contract violations and oracle mismatches.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Contract(_) | Error::Check(_) => 2,
            _ => 1,
        }
    }
}
