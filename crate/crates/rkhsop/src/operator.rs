//! Empirical RKHS operators S = Ψ B Φᵀ and their coefficient-level algebra.
//!
//! An operator maps the RKHS of its input basis Φ into the RKHS of its
//! output basis Ψ. All of its algebra — application, adjoints, composition,
//! Hilbert–Schmidt inner products — reduces to matrix algebra over the
//! middle matrix B mediated by Gram and cross-Gram matrices; feature-space
//! objects are never materialized.

use ndarray::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rkhs::{FeatureMatrix, RkhsFunction};

/// An operator S = Ψ B Φᵀ from the RKHS of Φ (m elements) to the RKHS of
/// Ψ (n elements), represented by its n×m middle matrix B.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalOperator {
    out_basis: FeatureMatrix,
    in_basis: FeatureMatrix,
    b: Array2<f64>,
}

impl EmpiricalOperator {
    pub fn new(out_basis: FeatureMatrix, in_basis: FeatureMatrix, b: Array2<f64>) -> Result<Self> {
        if b.nrows() != out_basis.len() {
            return Err(Error::DimensionMismatch {
                context: "operator middle matrix rows vs output basis",
                left: out_basis.len(),
                right: b.nrows(),
            });
        }
        if b.ncols() != in_basis.len() {
            return Err(Error::DimensionMismatch {
                context: "operator middle matrix columns vs input basis",
                left: in_basis.len(),
                right: b.ncols(),
            });
        }
        Ok(Self {
            out_basis,
            in_basis,
            b,
        })
    }

    /// Output basis Ψ.
    pub fn out_basis(&self) -> &FeatureMatrix {
        &self.out_basis
    }

    /// Input basis Φ.
    pub fn in_basis(&self) -> &FeatureMatrix {
        &self.in_basis
    }

    /// Middle matrix B.
    pub fn b(&self) -> &Array2<f64> {
        &self.b
    }

    /// S v = Ψ · B · cross_gram(Φ, basis_v) · c_v. The argument may live on
    /// a different basis than Φ as long as the kernel matches.
    pub fn apply(&self, v: &RkhsFunction) -> Result<RkhsFunction> {
        let cg = self.in_basis.cross_gram(v.basis())?;
        let coeffs = self.b.dot(&cg.dot(v.coefficients()));
        RkhsFunction::new(self.out_basis.clone(), coeffs)
    }

    /// S* = Φ Bᵀ Ψᵀ: bases swapped, middle matrix transposed.
    pub fn adjoint(&self) -> EmpiricalOperator {
        EmpiricalOperator {
            out_basis: self.in_basis.clone(),
            in_basis: self.out_basis.clone(),
            b: self.b.t().to_owned(),
        }
    }

    /// S₂ ∘ S₁ = Ψ₂ · (B₂ · cross_gram(Φ₂, Ψ₁) · B₁) · Φ₁ᵀ. The bases at the
    /// junction may differ as long as they share a kernel.
    pub fn compose(&self, first: &EmpiricalOperator) -> Result<EmpiricalOperator> {
        let junction = self.in_basis.cross_gram(&first.out_basis)?;
        let b = self.b.dot(&junction.dot(&first.b));
        Ok(EmpiricalOperator {
            out_basis: self.out_basis.clone(),
            in_basis: first.in_basis.clone(),
            b,
        })
    }

    /// M = Bᵀ G_Ψ B, the Gram matrix of the operator's columns in the output
    /// RKHS; the middle matrix of S*S over the input basis. Exactly symmetric.
    pub fn composition_gram(&self) -> Array2<f64> {
        let g_psi = self.out_basis.gram();
        let t = g_psi.entries().dot(&self.b);
        let mut m = self.b.t().dot(&t);
        // The product is symmetric up to round-off; enforce it exactly.
        for i in 0..m.nrows() {
            for j in 0..i {
                let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
                m[[i, j]] = avg;
                m[[j, i]] = avg;
            }
        }
        m
    }

    /// Hilbert–Schmidt inner product ⟨S₁, S₂⟩ = tr(S₁* S₂)
    /// = tr(B₁ᵀ · G_{Ψ₁Ψ₂} · B₂ · G_{Φ₂Φ₁}). Symmetric and bilinear.
    pub fn hs_inner(&self, other: &EmpiricalOperator) -> Result<f64> {
        let g_out = self.out_basis.cross_gram(&other.out_basis)?;
        let g_in = self.in_basis.cross_gram(&other.in_basis)?;
        // tr(AᵀC) with A = G_{Ψ₁Ψ₂}ᵀ B₁ and C = B₂ G_{Φ₂Φ₁}ᵀ reduces to an
        // elementwise sum; both factors are m₁×m₂.
        let a = self.b.t().dot(&g_out).reversed_axes();
        let c = other.b.dot(&g_in.t());
        Ok((&a * &c).sum())
    }

    /// ‖S‖_HS = ⟨S,S⟩^{1/2}, with round-off negatives clamped.
    pub fn hs_norm(&self) -> Result<f64> {
        Ok(self.hs_inner(self)?.max(0.0).sqrt())
    }

    /// ‖S₁ − S₂‖_HS, expanded by bilinearity so the operators need not share
    /// bases.
    pub fn hs_distance(&self, other: &EmpiricalOperator) -> Result<f64> {
        let d2 = self.hs_inner(self)? - 2.0 * self.hs_inner(other)? + other.hs_inner(other)?;
        Ok(d2.max(0.0).sqrt())
    }

    /// Upper bound on the operator norm: with the matrix SVD B = W Σ Zᵀ,
    /// returns Σᵢ σᵢ · (wᵢᵀ G_Ψ wᵢ)^{1/2} · (zᵢᵀ G_Φ zᵢ)^{1/2}. Tight for
    /// rank-one operators.
    pub fn norm_bound(&self) -> Result<f64> {
        let svd = linalg::svd(&self.b)?;
        let g_psi = self.out_basis.gram();
        let g_phi = self.in_basis.gram();
        let gw = g_psi.entries().dot(&svd.u);
        let zg = svd.vt.dot(g_phi.entries());
        let mut bound = 0.0;
        for (i, &sigma) in svd.s.iter().enumerate() {
            let wgw = svd.u.column(i).dot(&gw.column(i)).max(0.0);
            let zgz = zg.row(i).dot(&svd.vt.row(i)).max(0.0);
            bound += sigma * wgw.sqrt() * zgz.sqrt();
        }
        Ok(bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataSet;
    use crate::kernel::Kernel;
    use approx::assert_relative_eq;

    fn basis(points: &[Vec<f64>], kernel: Kernel) -> FeatureMatrix {
        FeatureMatrix::new(DataSet::from_rows(points).unwrap(), kernel)
    }

    /// Rank-one S = ψ ⊗ φ with ‖ψ‖ = 3, ‖φ‖ = 2 over the linear kernel.
    fn rank_one_fixture() -> EmpiricalOperator {
        let psi = basis(&[vec![3.0, 0.0]], Kernel::linear());
        let phi = basis(&[vec![0.0, 2.0]], Kernel::linear());
        EmpiricalOperator::new(psi, phi, arr2(&[[1.0]])).unwrap()
    }

    #[test]
    fn apply_single_point_hand_value() {
        // B = [[1]], k(x,x) = 4, v = φ(x) → coefficients B·G·c = [4].
        let phi = basis(&[vec![2.0, 0.0]], Kernel::linear());
        let psi = basis(&[vec![1.0, 1.0]], Kernel::linear());
        let s = EmpiricalOperator::new(psi, phi.clone(), arr2(&[[1.0]])).unwrap();
        let v = RkhsFunction::new(phi, arr1(&[1.0])).unwrap();
        let sv = s.apply(&v).unwrap();
        assert_eq!(sv.coefficients(), &arr1(&[4.0]));
    }

    #[test]
    fn apply_zero_function_and_zero_operator() {
        let kernel = Kernel::gaussian(1.0, false).unwrap();
        let phi = basis(&[vec![0.0], vec![1.0]], kernel.clone());
        let psi = basis(&[vec![0.5]], kernel.clone());
        let s = EmpiricalOperator::new(psi.clone(), phi.clone(), arr2(&[[0.3, -0.7]])).unwrap();
        let zero = RkhsFunction::new(phi.clone(), arr1(&[0.0, 0.0])).unwrap();
        assert_eq!(s.apply(&zero).unwrap().coefficients(), &arr1(&[0.0]));

        let s0 = EmpiricalOperator::new(psi, phi.clone(), arr2(&[[0.0, 0.0]])).unwrap();
        let v = RkhsFunction::new(phi, arr1(&[1.5, -2.5])).unwrap();
        assert_eq!(s0.apply(&v).unwrap().coefficients(), &arr1(&[0.0]));
    }

    #[test]
    fn adjoint_transposes_and_swaps() {
        let kernel = Kernel::linear();
        let psi = basis(&[vec![1.0, 0.0], vec![0.0, 1.0]], kernel.clone());
        let phi = basis(&[vec![1.0, 1.0], vec![2.0, 0.0]], kernel);
        let s =
            EmpiricalOperator::new(psi.clone(), phi.clone(), arr2(&[[1.0, 2.0], [3.0, 4.0]]))
                .unwrap();
        let adj = s.adjoint();
        assert_eq!(adj.b(), &arr2(&[[1.0, 3.0], [2.0, 4.0]]));
        assert_eq!(adj.out_basis(), &phi);
        assert_eq!(adj.in_basis(), &psi);
        assert_eq!(adj.adjoint(), s, "adjoint is an involution");
    }

    #[test]
    fn adjoint_of_symmetric_operator_is_identity_on_fields() {
        let phi = basis(&[vec![0.1], vec![0.9]], Kernel::gaussian(1.0, false).unwrap());
        let s = EmpiricalOperator::new(phi.clone(), phi, arr2(&[[1.0, 2.0], [2.0, 5.0]]))
            .unwrap();
        assert_eq!(s.adjoint(), s);
    }

    #[test]
    fn compose_realizes_sts_middle_matrix() {
        let kernel = Kernel::polynomial(2, 1.0).unwrap();
        let psi = basis(&[vec![1.0, 0.0], vec![0.0, 1.0]], kernel.clone());
        let phi = basis(&[vec![0.5, 0.5], vec![-0.5, 1.0]], kernel);
        let b = arr2(&[[1.0, -2.0], [0.5, 3.0]]);
        let s = EmpiricalOperator::new(psi.clone(), phi, b.clone()).unwrap();
        let sts = s.adjoint().compose(&s).unwrap();
        let expected = b.t().dot(psi.gram().entries()).dot(&b);
        let diff = (sts.b() - &expected).mapv(f64::abs).sum();
        assert!(diff < 1e-12);
    }

    #[test]
    fn compose_scalar_hand_value() {
        let phi = basis(&[vec![2.0, 0.0]], Kernel::linear());
        let s1 = EmpiricalOperator::new(phi.clone(), phi.clone(), arr2(&[[1.0]])).unwrap();
        let s2 = s1.clone();
        let c = s2.compose(&s1).unwrap();
        assert_eq!(c.b(), &arr2(&[[4.0]]));
    }

    #[test]
    fn composition_gram_identity_conjugation() {
        let phi = basis(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            Kernel::polynomial(2, 1.0).unwrap(),
        );
        let s = EmpiricalOperator::new(phi.clone(), phi.clone(), Array2::eye(2)).unwrap();
        assert_eq!(&s.composition_gram(), phi.gram().entries());
    }

    #[test]
    fn composition_gram_scalar_and_zero() {
        let psi = basis(&[vec![3.0, 0.0]], Kernel::linear());
        let phi = basis(&[vec![1.0, 0.0]], Kernel::linear());
        let s = EmpiricalOperator::new(psi.clone(), phi.clone(), arr2(&[[2.0]])).unwrap();
        assert_eq!(s.composition_gram(), arr2(&[[36.0]]));
        let s0 = EmpiricalOperator::new(psi, phi, arr2(&[[0.0]])).unwrap();
        assert_eq!(s0.composition_gram(), arr2(&[[0.0]]));
    }

    #[test]
    fn hs_inner_rank_one_hand_value() {
        let s = rank_one_fixture();
        assert_eq!(s.hs_inner(&s).unwrap(), 36.0);
        assert_eq!(s.hs_norm().unwrap(), 6.0);
    }

    #[test]
    fn hs_inner_is_symmetric() {
        let kernel = Kernel::gaussian(0.7, false).unwrap();
        let psi = basis(&[vec![0.1], vec![0.8]], kernel.clone());
        let phi = basis(&[vec![-0.3], vec![0.4], vec![1.2]], kernel.clone());
        let psi2 = basis(&[vec![0.2], vec![0.5]], kernel.clone());
        let phi2 = basis(&[vec![0.0], vec![0.9], vec![-1.1]], kernel);
        let s1 = EmpiricalOperator::new(psi, phi, arr2(&[[1.0, 0.2, -0.5], [0.3, 2.0, 0.7]]))
            .unwrap();
        let s2 = EmpiricalOperator::new(psi2, phi2, arr2(&[[0.4, -1.0, 0.6], [1.5, 0.1, -0.2]]))
            .unwrap();
        let a = s1.hs_inner(&s2).unwrap();
        let b = s2.hs_inner(&s1).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        let zero = EmpiricalOperator::new(
            s2.out_basis().clone(),
            s2.in_basis().clone(),
            Array2::zeros((2, 3)),
        )
        .unwrap();
        assert_eq!(s1.hs_inner(&zero).unwrap(), 0.0);
    }

    #[test]
    fn hs_distance_of_operator_from_itself_is_zero() {
        let s = rank_one_fixture();
        assert_eq!(s.hs_distance(&s).unwrap(), 0.0);
    }

    #[test]
    fn norm_bound_rank_one_is_tight() {
        let s = rank_one_fixture();
        assert_relative_eq!(s.norm_bound().unwrap(), 6.0, max_relative = 1e-14);
    }

    #[test]
    fn norm_bound_zero_operator() {
        let psi = basis(&[vec![3.0, 0.0]], Kernel::linear());
        let phi = basis(&[vec![0.0, 2.0]], Kernel::linear());
        let s = EmpiricalOperator::new(psi, phi, arr2(&[[0.0]])).unwrap();
        assert_eq!(s.norm_bound().unwrap(), 0.0);
    }

    #[test]
    fn adjoint_moves_inner_products() {
        // ⟨S v, u⟩ = ⟨v, S* u⟩ on a generic instance.
        let kernel = Kernel::gaussian(0.9, false).unwrap();
        let phi = basis(&[vec![0.0, 0.1], vec![0.7, -0.2]], kernel.clone());
        let psi = basis(&[vec![0.3, 0.3], vec![-0.6, 0.5]], kernel.clone());
        let s = EmpiricalOperator::new(psi.clone(), phi.clone(), arr2(&[[0.8, -0.1], [0.4, 1.2]]))
            .unwrap();
        let v = RkhsFunction::new(
            basis(&[vec![0.25, 0.0], vec![0.5, 0.5]], kernel.clone()),
            arr1(&[1.0, -0.7]),
        )
        .unwrap();
        let u = RkhsFunction::new(basis(&[vec![-0.1, 0.6]], kernel), arr1(&[0.9])).unwrap();
        let lhs = s.apply(&v).unwrap().inner_product(&u).unwrap();
        let rhs = v.inner_product(&s.adjoint().apply(&u).unwrap()).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
    }

    #[test]
    fn mismatched_middle_matrix_rejected() {
        let psi = basis(&[vec![1.0]], Kernel::linear());
        let phi = basis(&[vec![2.0]], Kernel::linear());
        assert!(matches!(
            EmpiricalOperator::new(psi, phi, Array2::zeros((2, 1))),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
