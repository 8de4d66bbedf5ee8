//! Solvers for clearing and epsilon-approximate clearing recovery vectors.
//!
//! * [`iterate_f`]: damped fixed-point iteration of the update map.
//! * [`map_big_g`], [`map_g`], [`solve_eps_approx`]: the auxiliary maps with
//!   an inflated solvency threshold and a restart search for almost fixed points.
//! * [`enumerate_patterns`]: case analysis over solvency patterns with
//!   rigorous interval propagation, able to certify that no clearing vector exists.
//! * [`forward_eval`]: topological evaluation of feed-forward networks.

mod approx;
mod expr;
mod forward;
mod iterate;
mod patterns;

pub use approx::{find_g_almost_fixed_point, map_big_g, map_g, solve_eps_approx, ApproxBudget};
pub use forward::forward_eval;
pub use iterate::iterate_f;
pub use patterns::{enumerate_patterns, enumerate_patterns_with, PatternOptions, DEFAULT_PATTERN_CAP};

use serde::Serialize;

use crate::network::RecoveryVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    /// A vector was found and independently re-checked.
    Found,
    /// The search gave up; nothing is claimed about existence.
    NotFound,
    /// Every solvency pattern was refuted: no clearing vector exists.
    Infeasible,
    /// Some patterns could be neither solved nor refuted.
    Undecided,
}

/// Which banks a pattern asserts solvent (`true`) or in default (`false`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SolvencyPattern {
    pub solvent: Vec<bool>,
}

impl SolvencyPattern {
    pub fn solvent_banks(&self) -> Vec<usize> {
        (0..self.solvent.len()).filter(|&i| self.solvent[i]).collect()
    }

    /// Whether the branch of the update map taken at `r` is this pattern,
    /// judged on exact comparisons of assets and liabilities.
    pub fn matches(&self, assets: &[f64], liabilities: &[f64]) -> bool {
        self.solvent
            .iter()
            .zip(assets.iter().zip(liabilities))
            .all(|(&s, (&a, &l))| s == (a >= l))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PatternOutcome {
    Solution(RecoveryVector),
    Contradicted,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternVerdict {
    pub pattern: SolvencyPattern,
    pub outcome: PatternOutcome,
    /// Boxes examined by branch and prune.
    pub boxes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub status: Status,
    pub r: Option<RecoveryVector>,
    /// `||F(r) - r||_inf` for exact solvers, or `||f(r) - r||_inf` for the
    /// approximate search. For failed searches, the best value seen.
    pub residual: f64,
    pub iterations: usize,
    pub pattern_verdicts: Option<Vec<PatternVerdict>>,
    /// Banks whose solvency was left open by the global pre-pass; patterns
    /// range over these.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_banks: Option<Vec<usize>>,
}

impl SolveReport {
    pub(crate) fn not_found(residual: f64, iterations: usize) -> Self {
        SolveReport {
            status: Status::NotFound,
            r: None,
            residual,
            iterations,
            pattern_verdicts: None,
            free_banks: None,
        }
    }

    pub(crate) fn found(r: RecoveryVector, residual: f64, iterations: usize) -> Self {
        SolveReport {
            status: Status::Found,
            r: Some(r),
            residual,
            iterations,
            pattern_verdicts: None,
            free_banks: None,
        }
    }

    pub fn is_found(&self) -> bool {
        self.status == Status::Found
    }
}
