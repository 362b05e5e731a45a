//! Subspace clustering with data augmentation: self-expressive solvers,
//! augmentation strategies, label propagation, spectral clustering and
//! evaluation utilities. Data matrices hold one sample per column.

pub mod augment;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod semisupervised;
pub mod spectral;
pub mod synth;
pub mod unsupervised;

pub(crate) mod admm;
pub(crate) mod linalg;

pub use error::{Error, Result};
pub use model::{
    AugmentedDictionary, CoefficientMatrix, DataMatrix, LabelState, Neighborhood, Regularizer, SolveReport,
    SolverConfig,
};
