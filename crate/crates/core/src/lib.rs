//! Temporal network creation games where agents buy edges and choose their
//! time labels.
//!
//! - [`graph`]: temporal graphs and strict/non-strict reachability
//! - [`game`]: strategies, realization, label costs, penalties, agent cost
//! - [`equilibrium`]: best responses, Nash verification, dynamics, optima, scans
//! - [`constructions`]: generators for known equilibria
//! - [`io`]: JSON and DOT formats

pub mod constructions;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod graph;
pub mod io;

/// Exact rational used for every cost.
pub type Rational = num_rational::Ratio<i64>;

pub use error::{Error, Result};
pub use game::{
    CostBreakdown, KPolicy, LabelCost, Penalty, Purchase, Strategy, StrategyProfile, Variant,
};
pub use graph::{Label, ReachMode, TemporalGraph, VertexId};
