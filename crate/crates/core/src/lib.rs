//! Squeezing of a nanomechanical mirror in an optical cavity driven by a laser
//! and fed with broadband squeezed vacuum.
//!
//! The pipeline: [`params::derive_params`] turns physical inputs into coupling
//! constants, [`steadystate::solve_steady_state`] finds the (possibly
//! multistable) mean fields, [`stability`] checks each branch with the
//! Routh-Hurwitz conditions and an eigenvalue cross-check, and
//! [`spectrum::variance_qp`] integrates the fluctuation spectra to give the
//! interaction-picture position and momentum variances. [`sweep`] scans and
//! minimizes those over one parameter.
//!
//! Kernels are generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`.

pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod figures;
pub mod minimize;
pub mod params;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;
pub mod stability;
pub mod steadystate;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Real;
pub use spectrum::CothModel;
pub use steadystate::BranchPolicy;

pub type Params = params::SystemParams<f64>;
pub type Derived = params::DerivedParams<f64>;
pub type Branch = steadystate::SteadyBranch<f64>;
pub type Verdict = stability::StabilityVerdict<f64>;
pub type Drift = stability::DriftMatrix<f64>;
pub type Variance = spectrum::VarianceResult<f64>;
pub type Spec = sweep::SweepSpec<f64>;
pub type Record = sweep::SweepRecord<f64>;

pub type Params32 = params::SystemParams<f32>;
pub type Derived32 = params::DerivedParams<f32>;
pub type Branch32 = steadystate::SteadyBranch<f32>;
pub type Variance32 = spectrum::VarianceResult<f32>;
