//! Feature matrices, Gram matrices, and RKHS functions.
//!
//! A [`FeatureMatrix`] binds a dataset to a kernel and stands for the formal
//! array Φ = [φ(x₁), …, φ(x_m)] of feature-space elements. Nothing
//! feature-space-valued is ever materialized: every quantity the crate
//! computes is mediated by Gram and cross-Gram matrices over such bases.

use std::sync::Arc;

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// A dataset bound to a kernel, representing the formal feature matrix
/// Φ = [φ(x₁), …, φ(x_m)].
///
/// The feature-space elements are assumed linearly independent; this is not
/// checked eagerly, but downstream Cholesky factorizations detect violations
/// and report the offending pivot. Cloning is cheap (the dataset is shared).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Arc<DataSet>,
    kernel: Kernel,
}

impl FeatureMatrix {
    pub fn new(data: DataSet, kernel: Kernel) -> Self {
        Self {
            data: Arc::new(data),
            kernel,
        }
    }

    /// Number of basis elements m.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Dimension of the underlying observation space.
    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn data(&self) -> &DataSet {
        &self.data
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.data.point(i)
    }

    fn check_same_kernel(&self, other: &FeatureMatrix, context: &'static str) -> Result<()> {
        if self.kernel != other.kernel {
            return Err(Error::KernelMismatch(context));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context,
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// The Gram matrix G with Gᵢⱼ = k(xᵢ, xⱼ). The upper triangle is
    /// computed and mirrored, so the result is exactly symmetric.
    pub fn gram(&self) -> GramMatrix {
        let m = self.len();
        let mut g = Array2::zeros((m, m));
        for i in 0..m {
            let xi = self.point(i);
            for j in i..m {
                let v = self.kernel.eval_unchecked(xi, self.point(j));
                g[[i, j]] = v;
                g[[j, i]] = v;
            }
        }
        GramMatrix { entries: g }
    }

    /// The cross-Gram matrix between two bases over the same kernel:
    /// entry (i,j) = k(xᵢ, x′ⱼ) with xᵢ from `self` and x′ⱼ from `other`.
    /// Satisfies `cross_gram(a,b) == cross_gram(b,a).t()` exactly, because
    /// every supported kernel evaluates bitwise-symmetrically.
    pub fn cross_gram(&self, other: &FeatureMatrix) -> Result<Array2<f64>> {
        self.check_same_kernel(other, "cross-Gram bases")?;
        let (m, mp) = (self.len(), other.len());
        let mut g = Array2::zeros((m, mp));
        for i in 0..m {
            let xi = self.point(i);
            for j in 0..mp {
                g[[i, j]] = self.kernel.eval_unchecked(xi, other.point(j));
            }
        }
        Ok(g)
    }
}

/// Symmetric positive semi-definite kernel matrix of a [`FeatureMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Array2<f64>,
}

impl GramMatrix {
    /// Wraps an externally assembled symmetric matrix (primarily for tests
    /// and for regularized combinations built from existing Grams).
    pub fn from_entries(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                context: "Gram matrix entries",
                left: entries.nrows(),
                right: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    /// Side length m.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Largest diagonal entry; the scale reference for jitter and
    /// regularization choices.
    pub fn max_diag(&self) -> f64 {
        self.entries.diag().iter().cloned().fold(0.0f64, f64::max)
    }

    /// Mean diagonal entry.
    pub fn mean_diag(&self) -> f64 {
        self.entries.diag().mean().unwrap_or(0.0)
    }
}

/// A function f = Σᵢ cᵢ k(xᵢ, ·) in the RKHS spanned by a feature basis.
#[derive(Debug, Clone)]
pub struct RkhsFunction {
    basis: FeatureMatrix,
    coefficients: Array1<f64>,
}

impl RkhsFunction {
    pub fn new(basis: FeatureMatrix, coefficients: Array1<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                context: "RKHS function coefficients",
                left: basis.len(),
                right: coefficients.len(),
            });
        }
        Ok(Self { basis, coefficients })
    }

    /// The point evaluation functional δ_x = k(x, ·): basis {x}, coefficient 1.
    pub fn point_evaluator(x: &[f64], kernel: Kernel) -> Result<Self> {
        let data = DataSet::from_rows(&[x.to_vec()])?;
        Ok(Self {
            basis: FeatureMatrix::new(data, kernel),
            coefficients: arr1(&[1.0]),
        })
    }

    pub fn basis(&self) -> &FeatureMatrix {
        &self.basis
    }

    pub fn coefficients(&self) -> &Array1<f64> {
        &self.coefficients
    }

    /// f(x) = Σᵢ cᵢ k(xᵢ, x).
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                context: "function evaluation point",
                left: self.basis.dim(),
                right: x.len(),
            });
        }
        let mut acc = 0.0;
        for (i, &c) in self.coefficients.iter().enumerate() {
            acc += c * self.basis.kernel().eval_unchecked(self.basis.point(i), x);
        }
        Ok(acc)
    }

    /// Evaluates f at every point of a dataset.
    pub fn evaluate_on(&self, points: &DataSet) -> Result<Vec<f64>> {
        if points.dim() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                context: "function evaluation dataset",
                left: self.basis.dim(),
                right: points.dim(),
            });
        }
        (0..points.len()).map(|i| self.evaluate(points.point(i))).collect()
    }

    /// ⟨f, g⟩ = c_fᵀ · cross_gram(basis_f, basis_g) · c_g. The bases may
    /// differ as long as the kernel is shared.
    pub fn inner_product(&self, other: &RkhsFunction) -> Result<f64> {
        let cg = self.basis.cross_gram(&other.basis)?;
        Ok(self.coefficients.dot(&cg.dot(&other.coefficients)))
    }

    /// cᵀ G c; non-negative up to factorization round-off.
    pub fn squared_norm(&self) -> f64 {
        let g = self.basis.gram();
        self.coefficients.dot(&g.entries.dot(&self.coefficients))
    }

    /// RKHS norm, with round-off-negative squared norms clamped to zero.
    pub fn norm(&self) -> f64 {
        self.squared_norm().max(0.0).sqrt()
    }

    /// Rescales the coefficients in place.
    pub fn scale(&mut self, factor: f64) {
        self.coefficients.mapv_inplace(|c| c * factor);
    }
}

/// An RKHS function with complex coefficients over a real feature basis,
/// as produced by eigendecompositions with complex spectra. Conjugate-pair
/// eigenfunctions share a basis and have conjugate coefficient vectors.
#[derive(Debug, Clone)]
pub struct ComplexRkhsFunction {
    basis: FeatureMatrix,
    coefficients: Array1<Complex64>,
}

impl ComplexRkhsFunction {
    pub fn new(basis: FeatureMatrix, coefficients: Array1<Complex64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                context: "RKHS function coefficients",
                left: basis.len(),
                right: coefficients.len(),
            });
        }
        Ok(Self { basis, coefficients })
    }

    pub fn from_real(f: &RkhsFunction) -> Self {
        Self {
            basis: f.basis.clone(),
            coefficients: f.coefficients.mapv(|c| Complex64::new(c, 0.0)),
        }
    }

    pub fn basis(&self) -> &FeatureMatrix {
        &self.basis
    }

    pub fn coefficients(&self) -> &Array1<Complex64> {
        &self.coefficients
    }

    /// True when every coefficient is exactly real.
    pub fn is_real(&self) -> bool {
        self.coefficients.iter().all(|c| c.im == 0.0)
    }

    /// The real part as a real RKHS function.
    pub fn real_part(&self) -> RkhsFunction {
        RkhsFunction {
            basis: self.basis.clone(),
            coefficients: self.coefficients.mapv(|c| c.re),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                context: "function evaluation point",
                left: self.basis.dim(),
                right: x.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &c) in self.coefficients.iter().enumerate() {
            acc += c * self.basis.kernel().eval_unchecked(self.basis.point(i), x);
        }
        Ok(acc)
    }

    /// Squared RKHS norm c† G c (real by symmetry of G).
    pub fn squared_norm(&self) -> f64 {
        let g = self.basis.gram();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.coefficients.len() {
            for j in 0..self.coefficients.len() {
                acc += self.coefficients[i].conj() * g.entries[[i, j]] * self.coefficients[j];
            }
        }
        acc.re
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().max(0.0).sqrt()
    }

    /// Rescales the coefficients in place by a real factor.
    pub fn scale(&mut self, factor: f64) {
        self.coefficients.mapv_inplace(|c| c * factor);
    }
}
