//! Simulation and analysis toolkit for spatial preferred attachment (SPA)
//! random graphs on the unit torus.
//!
//! A SPA graph grows one vertex per step: the new vertex lands uniformly at
//! random in `[0,1)^m` and links, independently with probability `p`, to
//! every older vertex whose sphere of influence contains it. The sphere of
//! influence of a vertex has volume `(A1*indeg + A2)/t`, capped at 1, so
//! high-degree vertices keep attracting links while everyone else shrinks.
//!
//! The crate provides:
//! - a deterministic generator with two engines (a naive scan and a layered
//!   spatial grid) that produce bit-identical graphs,
//! - closed-form predictions for degree growth, degree distribution,
//!   co-citation counts and the edge-length distribution (`theory`),
//! - measurement routines that compare a generated graph against those
//!   predictions (`analysis`),
//! - a line-oriented graph file format plus CSV emitters (`format`), tied
//!   together by the `spa` command-line binary.

pub mod analysis;
pub mod format;
pub mod generate;
pub mod grid;
pub mod model;
pub mod rng;
pub mod theory;
pub mod torus;

pub use generate::{generate, generate_naive, Engine, GenOptions, SnapshotSpec};
pub use model::{ModelParams, SpaGraph};
pub use theory::TheoryContext;
pub use torus::{Norm, TorusMetric, TorusPoint};

use std::fmt;

/// Errors shared by the model, theory and analysis layers.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaError {
    /// An argument violated an operation's precondition.
    InvalidArgument(String),
    /// Model parameters violate a constraint of the process itself.
    Constraint(String),
}

impl fmt::Display for SpaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaError::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            SpaError::Constraint(msg) => write!(f, "constraint violation: {msg}"),
        }
    }
}

impl std::error::Error for SpaError {}

pub type Result<T> = std::result::Result<T, SpaError>;
