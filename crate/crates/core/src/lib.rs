//! Means of symmetric positive definite matrices under the Bures–Wasserstein
//! geometry: geodesics, the weighted barycenter, the Karcher mean, Loewner
//! bounds, and a Lie–Trotter limit harness.

pub mod barycenter;
pub mod eigen;
pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod lie_trotter;
pub mod linalg;
pub mod problem;
pub mod spd;
pub mod suite;

pub use barycenter::{MeanProblem, SolverConfig, SolverResult, WeightVector};
pub use eigen::EigenDecomposition;
pub use error::{Error, Result};
pub use linalg::{congruence, loewner_geq, LoewnerVerdict, Matrix, SymMatrix};
pub use spd::{apply_spectral, exp_of_sym, SpdMatrix, SpectralFn};
