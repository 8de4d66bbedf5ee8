//! Clearing recovery rates for financial networks with debt contracts and
//! credit default swaps, together with gadget constructions, the reduction
//! from PURE-CIRCUIT, and polynomial-feasibility pipelines built on them.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod constants;
pub mod error;
pub mod fixtures;
pub mod gadgets;
pub mod io;
pub mod interval;
pub mod network;
pub mod poly;
pub mod reductions;
pub mod solver;

pub use error::{Error, Result};
pub use network::{Bank, Cds, Debt, FinancialNetwork, RecoveryVector};
