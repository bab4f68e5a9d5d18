//! Sparse precision-matrix estimation for Gaussian graphical models with
//! elastic-net penalties, together with the simulation and network-analysis
//! tooling built around the estimators.

pub mod analysis;
pub mod cr;
pub mod enet;
pub mod error;
pub mod estimator;
pub mod gelnet;
pub mod metrics;
pub mod model;
pub mod netgen;
pub mod prewhiten;
pub mod select;
pub mod two_stage;

pub use error::{GgmError, Result};
pub use model::{
    edge_set_of, is_positive_definite, partial_correlation, Dataset, EdgeSet, EstimationResult, PenaltyParams,
    ResultSummary, SymMatrix, ZERO_TOL,
};
