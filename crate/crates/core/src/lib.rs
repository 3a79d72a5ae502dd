//! Approximate Nash equilibria of finite n-person games by geometrical
//! regret matching.
//!
//! Each player's mixed strategy is pulled toward its regret vector,
//! `s' = (s + r*lambda) / (1 + r*|lambda|)`, and all players move
//! simultaneously. The crate provides the update map and its variants,
//! an iteration engine that tracks the best profile seen, contraction
//! diagnostics on the resulting sequences, a support-enumeration oracle for
//! small bimatrix games, sweep and basin harnesses, and projections of
//! trajectories for plotting.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod game;
pub mod games;
pub mod io;
pub mod iteration;
pub mod matching;
pub mod metrics;
pub mod oracle;
pub mod projection;

pub use error::{Error, Result};
pub use game::{
    expected_payoff, regret_report, regret_vector, vertex_payoffs, Game, MixedStrategy, PlayerRegret, RegretReport,
    StrategyProfile,
};
pub use iteration::{run, step, IterationTrace, RunConfig};
pub use matching::{convex_update, psi_update, psi_update_general, Alpha, Rate, Target, UpdateRule};
pub use metrics::{metric_trace, MetricKind, MetricTrace};
pub use oracle::{support_enumeration, EquilibriumSet};
