//! Exact solvers: a dense two-phase simplex and a min-cost flow.

mod flow;
mod simplex;

pub use flow::{min_cost_flow, FlowArc, FlowSolution};
pub use simplex::{Constraint, LinearProgram, LpOutcome, Relation};
