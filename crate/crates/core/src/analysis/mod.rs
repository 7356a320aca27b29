//! Stability bounds, steady-state excess MSE and operation counts.

mod bounds;
pub mod complexity;
mod emse;

pub use bounds::{mu_q_bound, mu_w_bound, StepBound};
pub use complexity::{op_counts, Algorithm, OpCounts, OpTally, Phase, PhaseCount};
pub use emse::{simulated_emse, theoretical_emse, to_db, MomentAccumulator, MomentEstimates};
