//! Empirical RKHS operators: construction, spectral decomposition, and
//! estimators for kernel covariance, embedding, and transfer operators.
//!
//! An empirical operator is a finite-rank map between two reproducing-kernel
//! Hilbert spaces, written S = Ψ B Φᵀ for feature matrices Ψ, Φ over data
//! sets and a coefficient matrix B. Everything here works in coefficient
//! space: Gram and cross-Gram matrices mediate all inner products, and no
//! feature-space object is ever materialized.

// Force the BLAS/LAPACK backend to be linked.
extern crate blas_src;

pub mod data;
pub mod decomp;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod kernel;
pub mod linalg;
pub mod operator;
pub mod report;
pub mod rkhs;

pub use data::DataSet;
pub use decomp::{
    EigPair, EigResult, KernelQr, SvdResult, SvdTriplet, DEFAULT_TRUNCATION_THRESHOLD,
};
pub use dynamics::{DoubleGyreParams, IntegratorConfig, Rectangle};
pub use error::{Error, Result};
pub use estimators::{Regularizer, DEFAULT_CCA_EPSILON, DEFAULT_TRANSFER_EPSILON};
pub use experiments::{DecomposeOptions, EstimatorKind, MercerReference, Mode, Route};
pub use kernel::Kernel;
pub use operator::EmpiricalOperator;
pub use report::ExperimentReport;
pub use rkhs::{ComplexRkhsFunction, FeatureMatrix, GramMatrix, RkhsFunction};
