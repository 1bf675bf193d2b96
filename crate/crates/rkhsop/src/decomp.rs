//! Spectral decompositions of empirical RKHS operators.
//!
//! Three interchangeable routes compute the operator SVD:
//!
//! * [`svd_via_qr`] — orthonormalize both bases with the kernel QR
//!   factorization and take a dense matrix SVD of the transformed middle
//!   matrix. Requires strictly positive-definite Grams.
//! * [`svd_via_aux`] — solve the auxiliary problem `M G_Φ w = λ w` with
//!   `M = Bᵀ G_Ψ B` in a symmetrized form; robust to ill-conditioned Grams.
//! * [`svd_via_block`] — eigendecompose the block matrix
//!   `[[0, B G_Φ], [Bᵀ G_Ψ, 0]]`, whose positive spectrum carries the
//!   singular values and both singular-vector families at once.
//!
//! Eigendecompositions come in a QR route ([`eig_via_qr`], symmetric
//! problems over a shared basis) and two auxiliary-matrix routes
//! ([`eig_via_aux`], [`eig_via_aux_alt`]) that allow distinct bases and
//! complex spectra. [`truncate`], [`pseudoinverse`], and [`lstsq_apply`]
//! consume SVD results.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::EmpiricalOperator;
use crate::rkhs::{ComplexRkhsFunction, FeatureMatrix, RkhsFunction};

/// Default relative retention threshold: singular values (or eigenvalue
/// magnitudes) at or below `threshold × leading value` are discarded,
/// separating an operator's natural rank deficiency from genuine spectrum.
pub const DEFAULT_TRUNCATION_THRESHOLD: f64 = 1e-10;

/// Singular values closer than this (relative to the larger of the pair)
/// are treated as one degenerate cluster: the associated singular functions
/// are only determined up to rotations, so Gram–Schmidt re-orthonormalization
/// is applied inside the cluster and cross-route comparisons must use the
/// spanned subspaces rather than individual functions.
pub const CLUSTER_REL_TOL: f64 = 1e-6;

/// Relative noise floor for eigenvalues of the auxiliary SVD problem:
/// values in `[−floor, 0]` with `floor = 1e-10 × λ_max` are clamped to zero
/// and anything below is reported as a broken PSD structure. The same floor
/// bounds the route's resolution from above: positive eigenvalues inside the
/// noise band are equally indistinguishable from zero, so singular values
/// are never retained below `√floor = 10⁻⁵ × σ₁` no matter how small the
/// requested threshold. (The squared spectrum amplifies eigensolver noise:
/// a null eigenvalue computed as ε·λ_max would otherwise surface as a
/// spurious singular value √ε·σ₁, far above machine precision.)
const AUX_EIG_NOISE_FLOOR: f64 = 1e-10;

/// Relative symmetry tolerance for the QR eigendecomposition route.
const QR_EIG_SYMMETRY_TOL: f64 = 1e-8;

/// Exact-symmetry detection threshold for auxiliary eigenproblem matrices:
/// below this relative asymmetry the symmetric solver is used, guaranteeing
/// an exactly real spectrum.
const AUX_SYMMETRY_DETECT_TOL: f64 = 1e-12;

/// Relative tolerance for the block route's ± spectrum mirror check.
const BLOCK_PAIRING_TOL: f64 = 1e-8;

/// Kernel QR factorization of a feature basis: the Cholesky factor R of
/// G = RᵀR together with its inverse. The family Φ̃ = Φ R⁻¹ is orthonormal
/// in the RKHS.
#[derive(Debug, Clone)]
pub struct KernelQr {
    basis: FeatureMatrix,
    r: Array2<f64>,
    r_inv: Array2<f64>,
}

impl KernelQr {
    pub fn basis(&self) -> &FeatureMatrix {
        &self.basis
    }

    /// Upper-triangular factor with strictly positive diagonal.
    pub fn r(&self) -> &Array2<f64> {
        &self.r
    }

    /// Inverse factor, computed by triangular back-substitution.
    pub fn r_inv(&self) -> &Array2<f64> {
        &self.r_inv
    }
}

/// Computes the kernel QR factorization. Strict: a Gram matrix that is not
/// numerically positive definite fails with the index of the first bad
/// pivot, identifying the first basis element that is linearly dependent
/// on its predecessors.
pub fn kernel_qr(basis: &FeatureMatrix) -> Result<KernelQr> {
    if basis.is_empty() {
        return Err(Error::EmptyInput("kernel QR of an empty basis"));
    }
    let g = basis.gram();
    let r = linalg::cholesky_upper(g.entries())?;
    let r_inv = linalg::invert_upper_triangular(&r)?;
    Ok(KernelQr {
        basis: basis.clone(),
        r,
        r_inv,
    })
}

/// The middle matrix of S expressed over the orthonormalized bases:
/// B̃ = R_Ψ B R_Φᵀ, so that S = Ψ̃ B̃ Φ̃ᵀ with Ψ̃ = Ψ R_Ψ⁻¹ and Φ̃ = Φ R_Φ⁻¹.
/// Because Ψ̃ and Φ̃ are orthonormal, the singular values of the matrix B̃
/// are exactly the singular values of the operator S.
pub fn orthonormalized_b(s: &EmpiricalOperator) -> Result<Array2<f64>> {
    let qr_out = kernel_qr(s.out_basis())?;
    let qr_in = kernel_qr(s.in_basis())?;
    Ok(orthonormalized_b_from(s, &qr_out, &qr_in))
}

fn orthonormalized_b_from(
    s: &EmpiricalOperator,
    qr_out: &KernelQr,
    qr_in: &KernelQr,
) -> Array2<f64> {
    let mut bt = s.b().clone();
    linalg::trmm_upper_left(qr_out.r(), &mut bt, false);
    linalg::trmm_upper_right(qr_in.r(), &mut bt, true);
    bt
}

/// One singular triplet (σ, u, v) with unit-RKHS-norm singular functions.
#[derive(Debug, Clone)]
pub struct SvdTriplet {
    pub sigma: f64,
    pub u: RkhsFunction,
    pub v: RkhsFunction,
}

/// An operator SVD: triplets in non-increasing σ order, u over the output
/// RKHS and v over the input RKHS, all with unit RKHS norm.
#[derive(Debug, Clone)]
pub struct SvdResult {
    triplets: Vec<SvdTriplet>,
    threshold: f64,
}

impl SvdResult {
    pub fn triplets(&self) -> &[SvdTriplet] {
        &self.triplets
    }

    /// The relative retention threshold the decomposition was computed with.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.triplets.iter().map(|t| t.sigma).collect()
    }

    /// Index ranges of degenerate clusters (runs of σ within
    /// [`CLUSTER_REL_TOL`] of their neighbors). Singleton runs are included.
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        cluster_ranges(&self.singular_values())
    }
}

/// One eigenpair (λ, f); λ may be complex for non-symmetric problems, in
/// which case conjugate pairs appear adjacently.
#[derive(Debug, Clone)]
pub struct EigPair {
    pub value: Complex64,
    pub function: ComplexRkhsFunction,
}

/// An operator eigendecomposition: pairs ordered by |λ| non-increasing.
#[derive(Debug, Clone)]
pub struct EigResult {
    pairs: Vec<EigPair>,
    symmetric: bool,
}

impl EigResult {
    pub fn pairs(&self) -> &[EigPair] {
        &self.pairs
    }

    /// True when the problem was detected as symmetric; all eigenvalues are
    /// then exactly real.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

fn cluster_ranges(sigmas: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..=sigmas.len() {
        let chained = i < sigmas.len() && {
            let scale = sigmas[i - 1].abs().max(sigmas[i].abs());
            (sigmas[i - 1] - sigmas[i]).abs() <= CLUSTER_REL_TOL * scale
        };
        if !chained {
            ranges.push(start..i);
            start = i;
        }
    }
    ranges
}

/// SVD through the kernel QR route: a dense matrix SVD of B̃ = R_Ψ B R_Φᵀ.
/// The triplet coefficients are R_Ψ⁻¹ũᵢ and R_Φ⁻¹ṽᵢ, which makes the
/// singular functions orthonormal in their RKHSs by construction. Triplets
/// with σ ≤ threshold·σ₁ are discarded. Requires both Grams to pass the
/// strict Cholesky factorization.
pub fn svd_via_qr(s: &EmpiricalOperator, threshold: f64) -> Result<SvdResult> {
    let qr_out = kernel_qr(s.out_basis())?;
    let qr_in = kernel_qr(s.in_basis())?;
    let bt = orthonormalized_b_from(s, &qr_out, &qr_in);
    let svd = linalg::svd(&bt)?;

    let sigma1 = svd.s.first().copied().unwrap_or(0.0);
    if sigma1 <= 0.0 {
        return Ok(SvdResult {
            triplets: Vec::new(),
            threshold,
        });
    }
    let keep = svd.s.iter().take_while(|&&sig| sig > threshold * sigma1).count();

    // Map the matrix singular vectors back to RKHS coefficients in bulk.
    let u_sel = svd.u.slice(s![.., ..keep]);
    let u_coeffs = qr_out.r_inv().dot(&u_sel);
    let v_sel = svd.vt.slice(s![..keep, ..]).t().to_owned();
    let v_coeffs = qr_in.r_inv().dot(&v_sel);

    let mut triplets = Vec::with_capacity(keep);
    for i in 0..keep {
        triplets.push(SvdTriplet {
            sigma: svd.s[i],
            u: RkhsFunction::new(s.out_basis().clone(), u_coeffs.column(i).to_owned())?,
            v: RkhsFunction::new(s.in_basis().clone(), v_coeffs.column(i).to_owned())?,
        });
    }
    Ok(SvdResult { triplets, threshold })
}

/// Eigendecomposition through the kernel QR route. Requires the operator to
/// map a basis into itself (identical input and output bases) and the
/// orthonormalized middle matrix B̃ = R B Rᵀ to be symmetric; the result is
/// then exactly real, with eigenfunctions Φ̃ṽᵢ of unit RKHS norm.
pub fn eig_via_qr(s: &EmpiricalOperator, threshold: f64) -> Result<EigResult> {
    if s.out_basis() != s.in_basis() {
        return Err(Error::UnsupportedProblem(
            "eigendecomposition via kernel QR requires the same basis on both sides; \
             use eig_via_aux for operators over distinct bases"
                .into(),
        ));
    }
    let qr = kernel_qr(s.in_basis())?;
    let mut bt = s.b().clone();
    linalg::trmm_upper_left(qr.r(), &mut bt, false);
    linalg::trmm_upper_right(qr.r(), &mut bt, true);

    let (asym, amax) = asymmetry(&bt);
    if asym > QR_EIG_SYMMETRY_TOL * amax {
        return Err(Error::UnsupportedProblem(format!(
            "orthonormalized middle matrix is not symmetric \
             (relative asymmetry {:.3e}); use eig_via_aux for non-symmetric problems",
            asym / amax
        )));
    }
    symmetrize(&mut bt);
    let eig = linalg::sym_eig(bt)?;

    // Order by |λ| descending and retain above the relative threshold.
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()));
    let lam_max = eig.values[order[0]].abs();
    if lam_max <= 0.0 {
        return Ok(EigResult {
            pairs: Vec::new(),
            symmetric: true,
        });
    }
    order.retain(|&i| eig.values[i].abs() > threshold * lam_max);

    let mut pairs = Vec::with_capacity(order.len());
    for &i in &order {
        let coeffs = qr.r_inv().dot(&eig.vectors_rows.row(i));
        let complex = coeffs.mapv(|c| Complex64::new(c, 0.0));
        pairs.push(EigPair {
            value: Complex64::new(eig.values[i], 0.0),
            function: ComplexRkhsFunction::new(s.in_basis().clone(), complex)?,
        });
    }
    Ok(EigResult {
        pairs,
        symmetric: true,
    })
}

fn asymmetry(a: &Array2<f64>) -> (f64, f64) {
    let n = a.nrows();
    let mut asym = 0.0f64;
    let mut amax = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            amax = amax.max(a[[i, j]].abs());
            if j > i {
                asym = asym.max((a[[i, j]] - a[[j, i]]).abs());
            }
        }
    }
    (asym, amax.max(f64::MIN_POSITIVE))
}

fn symmetrize(a: &mut Array2<f64>) {
    for i in 0..a.nrows() {
        for j in 0..i {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = avg;
            a[[j, i]] = avg;
        }
    }
}

/// Shared implementation of the two auxiliary eigendecomposition routes.
/// `aux` is the m×m auxiliary matrix; `coeff_of` maps an eigenvector w of
/// `aux` to RKHS coefficients over the operator's output basis.
fn eig_from_aux_matrix(
    out_basis: &FeatureMatrix,
    aux: Array2<f64>,
    threshold: f64,
    coeff_of: impl Fn(ArrayView1<Complex64>) -> Array1<Complex64>,
) -> Result<EigResult> {
    let (asym, amax) = asymmetry(&aux);
    let symmetric = asym <= AUX_SYMMETRY_DETECT_TOL * amax;

    // Candidate pairs (λ, w) in the solver's order; the symmetric solver
    // guarantees an exactly real spectrum and real vectors.
    let mut candidates: Vec<(Complex64, Array1<Complex64>)> = if symmetric {
        let mut a = aux;
        symmetrize(&mut a);
        let eig = linalg::sym_eig(a)?;
        (0..eig.values.len())
            .map(|i| {
                (
                    Complex64::new(eig.values[i], 0.0),
                    eig.vectors_rows.row(i).mapv(|c| Complex64::new(c, 0.0)),
                )
            })
            .collect()
    } else {
        linalg::general_eig(&aux)?
            .into_iter()
            .map(|p| (p.value, Array1::from_vec(p.vector)))
            .collect()
    };

    // Order by |λ| non-increasing; the sort is stable, so adjacent
    // conjugate pairs from the general solver stay adjacent.
    candidates.sort_by(|a, b| b.0.norm_sqr().total_cmp(&a.0.norm_sqr()));
    let lam_max = candidates.first().map(|c| c.0.norm()).unwrap_or(0.0);
    if lam_max <= 0.0 {
        return Ok(EigResult {
            pairs: Vec::new(),
            symmetric,
        });
    }
    candidates.retain(|c| c.0.norm() > threshold * lam_max);

    // Normalize eigenfunctions to unit RKHS norm. A real scaling preserves
    // conjugate pairing.
    let g_out = out_basis.gram();
    let mut pairs = Vec::with_capacity(candidates.len());
    for (value, w) in candidates {
        let coeffs = coeff_of(w.view());
        let mut f = ComplexRkhsFunction::new(out_basis.clone(), coeffs)?;
        let nrm_sq = complex_quadratic_form(g_out.entries(), f.coefficients());
        if nrm_sq > 0.0 {
            f.scale(1.0 / nrm_sq.sqrt());
        }
        pairs.push(EigPair { value, function: f });
    }
    Ok(EigResult { pairs, symmetric })
}

/// w† G w for real symmetric G, computed through two real matrix-vector
/// products.
fn complex_quadratic_form(g: &Array2<f64>, w: &Array1<Complex64>) -> f64 {
    let re = w.mapv(|z| z.re);
    let im = w.mapv(|z| z.im);
    let gre = g.dot(&re);
    let gim = g.dot(&im);
    re.dot(&gre) + im.dot(&gim)
}

/// Eigendecomposition through the auxiliary matrix B·cross_gram(Φ,Υ), for
/// an operator S = Υ B Φᵀ whose bases share a kernel and have equal size.
/// Each eigenpair (λ, w) of the auxiliary matrix yields the eigenfunction
/// Υw, normalized to unit RKHS norm; pairs with |λ| ≤ threshold·max|λ| are
/// discarded and complex conjugate pairs are preserved. A symmetric
/// auxiliary matrix (e.g. from a covariance operator) is detected and routed
/// to the symmetric solver, making the result exactly real.
pub fn eig_via_aux(s: &EmpiricalOperator, threshold: f64) -> Result<EigResult> {
    if s.out_basis().len() != s.in_basis().len() {
        return Err(Error::DimensionMismatch {
            context: "auxiliary eigenproblem bases",
            left: s.out_basis().len(),
            right: s.in_basis().len(),
        });
    }
    let cg = s.in_basis().cross_gram(s.out_basis())?;
    let aux = s.b().dot(&cg);
    eig_from_aux_matrix(s.out_basis(), aux, threshold, |w| w.to_owned())
}

/// The alternative auxiliary eigenproblem: cross_gram(Φ,Υ)·B instead of
/// B·cross_gram(Φ,Υ). Both matrices share their nonzero spectrum; here the
/// eigenfunction for a pair (λ, w) is Υ(Bw), normalized.
pub fn eig_via_aux_alt(s: &EmpiricalOperator, threshold: f64) -> Result<EigResult> {
    if s.out_basis().len() != s.in_basis().len() {
        return Err(Error::DimensionMismatch {
            context: "auxiliary eigenproblem bases",
            left: s.out_basis().len(),
            right: s.in_basis().len(),
        });
    }
    let cg = s.in_basis().cross_gram(s.out_basis())?;
    let aux = cg.dot(s.b());
    let b = s.b().clone();
    eig_from_aux_matrix(s.out_basis(), aux, threshold, move |w| {
        let re = w.mapv(|z| z.re);
        let im = w.mapv(|z| z.im);
        let bre = b.dot(&re);
        let bim = b.dot(&im);
        Array1::from_shape_fn(bre.len(), |i| Complex64::new(bre[i], bim[i]))
    })
}

/// SVD through the auxiliary problem M G_Φ w = λ w with M = Bᵀ G_Ψ B.
///
/// The product of two symmetric PSD matrices is solved in symmetrized form:
/// with the Cholesky factorization G_Φ = RᵀR, the symmetric matrix
/// R M Rᵀ q = λ q has the same spectrum, guaranteeing real non-negative λ
/// and orthogonal q; then w = R⁻¹q. The factorization tolerates numerically
/// semi-definite Grams through an escalating diagonal jitter. Right singular
/// functions are vᵢ = (wᵢᵀG_Φwᵢ)^{-1/2} Φwᵢ, left ones uᵢ = σᵢ⁻¹ S vᵢ with
/// σᵢ = √λᵢ. Eigenvalues in [−10⁻¹⁰·λ_max, 0] are clamped to zero; anything
/// more negative is reported as a broken PSD structure. Gram–Schmidt
/// re-orthonormalization is applied within degenerate clusters.
///
/// Because this route works on the squared spectrum, its resolution is
/// limited to σ > 10⁻⁵·σ₁ (the square root of the eigenvalue noise floor);
/// thresholds below that are honored by the QR route but not here.
pub fn svd_via_aux(s: &EmpiricalOperator, threshold: f64) -> Result<SvdResult> {
    let m = s.in_basis().len();
    let big_m = s.composition_gram();
    let g_phi = s.in_basis().gram();
    let (r, _jitter) = linalg::cholesky_upper_jittered(g_phi.entries())?;

    // A = R M Rᵀ, exactly symmetrized.
    let mut a = big_m;
    linalg::trmm_upper_left(&r, &mut a, false);
    linalg::trmm_upper_right(&r, &mut a, true);
    symmetrize(&mut a);
    let eig = linalg::sym_eig(a)?;

    // Validate the spectrum against the PSD structure and collect σ in
    // non-increasing order (dsyevd returns ascending values).
    let lam_max = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let floor = AUX_EIG_NOISE_FLOOR * lam_max;
    let mut sigmas = Vec::with_capacity(m);
    let mut indices = Vec::with_capacity(m);
    for idx in (0..m).rev() {
        let lam = eig.values[idx];
        if lam < -floor {
            return Err(Error::IndefiniteSpectrum {
                value: lam,
                floor: -floor,
            });
        }
        sigmas.push(lam.max(0.0).sqrt());
        indices.push(idx);
    }
    let sigma1 = sigmas.first().copied().unwrap_or(0.0);
    if sigma1 <= 0.0 {
        return Ok(SvdResult {
            triplets: Vec::new(),
            threshold,
        });
    }
    // Retention cut: the caller's threshold, but never below the route's own
    // resolution — eigenvalues inside the PSD noise band are zero for all
    // practical purposes and would otherwise leak in as √noise-sized σ.
    let cut = (threshold.max(AUX_EIG_NOISE_FLOOR.sqrt())) * sigma1;
    let keep = sigmas.iter().take_while(|&&sig| sig > cut).count();
    sigmas.truncate(keep);
    indices.truncate(keep);

    // W = R⁻¹ Q for the retained eigenvectors.
    let mut w = Array2::zeros((m, keep));
    for (col, &idx) in indices.iter().enumerate() {
        w.column_mut(col).assign(&eig.vectors_rows.row(idx));
    }
    drop(eig);
    linalg::trsm_upper_left(&r, &mut w, false);
    drop(r);

    // Degenerate clusters: re-orthonormalize the w columns in the G_Φ
    // metric so the singular functions inside a cluster are orthogonal.
    for range in cluster_ranges(&sigmas) {
        if range.len() < 2 {
            continue;
        }
        for i in range.clone() {
            for j in range.start..i {
                let gwj = g_phi.entries().dot(&w.column(j));
                let proj = w.column(i).dot(&gwj);
                let wj = w.column(j).to_owned();
                w.column_mut(i).zip_mut_with(&wj, |wi, &wjv| *wi -= proj * wjv);
            }
            let gwi = g_phi.entries().dot(&w.column(i));
            let nrm = w.column(i).dot(&gwi).max(0.0).sqrt();
            if nrm > 0.0 {
                w.column_mut(i).mapv_inplace(|x| x / nrm);
            }
        }
    }

    // Normalize v by the literal wᵀ G_Φ w (the exact RKHS norm of Φw, which
    // under jitter deviates slightly from 1) and build u = σ⁻¹ S v through
    // the same Gram product.
    let mut t = g_phi.entries().dot(&w);
    for col in 0..keep {
        let nrm_sq = w.column(col).dot(&t.column(col)).max(0.0);
        if nrm_sq > 0.0 {
            let inv = 1.0 / nrm_sq.sqrt();
            w.column_mut(col).mapv_inplace(|x| x * inv);
            t.column_mut(col).mapv_inplace(|x| x * inv);
        }
    }
    let bt = s.b().dot(&t);

    let mut triplets = Vec::with_capacity(keep);
    for (i, &sigma) in sigmas.iter().enumerate().take(keep) {
        let u_coeffs = bt.column(i).mapv(|x| x / sigma);
        triplets.push(SvdTriplet {
            sigma,
            u: RkhsFunction::new(s.out_basis().clone(), u_coeffs)?,
            v: RkhsFunction::new(s.in_basis().clone(), w.column(i).to_owned())?,
        });
    }
    Ok(SvdResult { triplets, threshold })
}

/// SVD through the block-operator route: the eigenpairs of the
/// (n+m)×(n+m) matrix `[[0, B G_Φ], [Bᵀ G_Ψ, 0]]`. Every strictly positive
/// eigenvalue σ with eigenvector (w, z) yields the triplet
/// (σ, Ψw normalized, Φz normalized); the negative eigenvalues must mirror
/// the positive ones and serve as a consistency check.
pub fn svd_via_block(s: &EmpiricalOperator, threshold: f64) -> Result<SvdResult> {
    let n = s.out_basis().len();
    let m = s.in_basis().len();
    let g_phi = s.in_basis().gram();
    let g_psi = s.out_basis().gram();
    let bg_phi = s.b().dot(g_phi.entries());
    let btg_psi = s.b().t().dot(g_psi.entries());

    let mut block = Array2::zeros((n + m, n + m));
    block.slice_mut(s![..n, n..]).assign(&bg_phi);
    block.slice_mut(s![n.., ..n]).assign(&btg_psi);
    drop(bg_phi);
    drop(btg_psi);

    let pairs = linalg::general_eig(&block)?;
    let abs_max = pairs.iter().map(|p| p.value.norm()).fold(0.0f64, f64::max);
    if abs_max <= 0.0 {
        return Ok(SvdResult {
            triplets: Vec::new(),
            threshold,
        });
    }

    // The block matrix has a real spectrum (it is a product of symmetric
    // matrices in disguise); imaginary parts beyond round-off mean the
    // ± mirror structure is broken.
    let im_tol = AUX_EIG_NOISE_FLOOR * abs_max;
    let mut positives: Vec<(f64, Array1<f64>, Array1<f64>)> = Vec::new();
    let mut negatives: Vec<f64> = Vec::new();
    for p in &pairs {
        if p.value.im.abs() > im_tol {
            return Err(Error::SpectrumPairing(format!(
                "block matrix eigenvalue {:.6e}{:+.6e}i has a non-real part \
                 beyond round-off",
                p.value.re, p.value.im
            )));
        }
        let lam = p.value.re;
        if lam > 0.0 {
            let w = Array1::from_shape_fn(n, |i| p.vector[i].re);
            let z = Array1::from_shape_fn(m, |i| p.vector[n + i].re);
            positives.push((lam, w, z));
        } else if lam < 0.0 {
            negatives.push(-lam);
        }
    }

    positives.sort_by(|a, b| b.0.total_cmp(&a.0));
    negatives.sort_by(|a, b| b.total_cmp(a));
    let sigma1 = positives.first().map(|p| p.0).unwrap_or(0.0);
    if sigma1 <= 0.0 {
        return Ok(SvdResult {
            triplets: Vec::new(),
            threshold,
        });
    }
    positives.retain(|p| p.0 > threshold * sigma1);
    negatives.retain(|&v| v > threshold * sigma1);

    if positives.len() != negatives.len() {
        return Err(Error::SpectrumPairing(format!(
            "{} positive but {} negative eigenvalues above the retention \
             threshold",
            positives.len(),
            negatives.len()
        )));
    }
    let pair_tol = BLOCK_PAIRING_TOL * sigma1;
    for (p, nv) in positives.iter().zip(&negatives) {
        if (p.0 - nv).abs() > pair_tol {
            return Err(Error::SpectrumPairing(format!(
                "positive eigenvalue {:.12e} has mirror {:.12e} \
                 (difference beyond {:.1e})",
                p.0, -nv, pair_tol
            )));
        }
    }

    let mut triplets = Vec::with_capacity(positives.len());
    for (sigma, w, z) in positives {
        let mut u = RkhsFunction::new(s.out_basis().clone(), w)?;
        let u_nrm_sq = u
            .coefficients()
            .dot(&g_psi.entries().dot(u.coefficients()))
            .max(0.0);
        if u_nrm_sq > 0.0 {
            u.scale(1.0 / u_nrm_sq.sqrt());
        }
        let mut v = RkhsFunction::new(s.in_basis().clone(), z)?;
        let v_nrm_sq = v
            .coefficients()
            .dot(&g_phi.entries().dot(v.coefficients()))
            .max(0.0);
        if v_nrm_sq > 0.0 {
            v.scale(1.0 / v_nrm_sq.sqrt());
        }
        triplets.push(SvdTriplet { sigma, u, v });
    }
    Ok(SvdResult { triplets, threshold })
}

/// The best rank-k approximation S_k = Σ_{i≤k} σᵢ uᵢ ⊗ vᵢ over the same
/// bases, with middle matrix B_k = Σ_{i≤k} σᵢ aᵢ bᵢᵀ built from the
/// coefficient vectors of the singular functions.
pub fn truncate(s: &EmpiricalOperator, svd: &SvdResult, k: usize) -> Result<EmpiricalOperator> {
    if k > svd.len() {
        return Err(Error::OutOfRange {
            context: "truncation rank",
            value: k,
            limit: svd.len(),
        });
    }
    let n = s.out_basis().len();
    let m = s.in_basis().len();
    let mut bk = Array2::zeros((n, m));
    for t in &svd.triplets[..k] {
        let a = t.u.coefficients();
        let b = t.v.coefficients();
        for i in 0..n {
            let sa = t.sigma * a[i];
            for j in 0..m {
                bk[[i, j]] += sa * b[j];
            }
        }
    }
    EmpiricalOperator::new(s.out_basis().clone(), s.in_basis().clone(), bk)
}

/// The Moore–Penrose pseudoinverse S⁺ = Σᵢ σᵢ⁻¹ vᵢ ⊗ uᵢ, an operator from
/// the output RKHS back to the input RKHS. Triplets with σ ≤ threshold·σ₁
/// are excluded from the sum.
pub fn pseudoinverse(svd: &SvdResult, threshold: f64) -> Result<EmpiricalOperator> {
    let first = svd
        .triplets
        .first()
        .ok_or(Error::EmptyDecomposition("pseudoinverse of an empty SVD"))?;
    let sigma1 = first.sigma;
    let retained: Vec<&SvdTriplet> = svd
        .triplets
        .iter()
        .take_while(|t| t.sigma > threshold * sigma1)
        .collect();
    if retained.is_empty() {
        return Err(Error::EmptyDecomposition(
            "pseudoinverse with no retained singular values",
        ));
    }
    let out_basis = first.v.basis().clone();
    let in_basis = first.u.basis().clone();
    let (m, n) = (out_basis.len(), in_basis.len());
    let mut bp = Array2::zeros((m, n));
    for t in &retained {
        let a = t.u.coefficients();
        let b = t.v.coefficients();
        for i in 0..m {
            let sb = b[i] / t.sigma;
            for j in 0..n {
                bp[[i, j]] += sb * a[j];
            }
        }
    }
    EmpiricalOperator::new(out_basis, in_basis, bp)
}

/// Minimum-norm least-squares solve: A⁺y = Σᵢ σᵢ⁻¹ ⟨uᵢ, y⟩ vᵢ for a
/// function y over the output kernel.
pub fn lstsq_apply(svd: &SvdResult, y: &RkhsFunction, threshold: f64) -> Result<RkhsFunction> {
    let first = svd
        .triplets
        .first()
        .ok_or(Error::EmptyDecomposition("least-squares with an empty SVD"))?;
    let sigma1 = first.sigma;
    // ⟨uᵢ, y⟩ for all i at once through one cross-Gram product.
    let cg = first.u.basis().cross_gram(y.basis())?;
    let t = cg.dot(y.coefficients());
    let mut coeffs = Array1::zeros(first.v.basis().len());
    for trip in svd
        .triplets
        .iter()
        .take_while(|trip| trip.sigma > threshold * sigma1)
    {
        let weight = trip.u.coefficients().dot(&t) / trip.sigma;
        coeffs.scaled_add(weight, trip.v.coefficients());
    }
    RkhsFunction::new(first.v.basis().clone(), coeffs)
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

    /// Rank-one S with k(x,x) = 4 (input), l(y,y) = 9 (output), B = [[1]]:
    /// the singular value is σ = 6.
    fn rank_one() -> EmpiricalOperator {
        let psi = basis(&[vec![3.0, 0.0]], Kernel::linear());
        let phi = basis(&[vec![0.0, 2.0]], Kernel::linear());
        EmpiricalOperator::new(psi, phi, arr2(&[[1.0]])).unwrap()
    }

    /// A well-conditioned 4×3 Gaussian-kernel operator with fixed entries.
    fn random_4x3() -> EmpiricalOperator {
        let kernel = Kernel::gaussian(0.8, false).unwrap();
        let psi = basis(
            &[vec![0.0, 0.1], vec![0.9, -0.3], vec![-0.6, 0.5], vec![0.4, 1.1]],
            kernel.clone(),
        );
        let phi = basis(
            &[vec![0.2, 0.0], vec![-0.8, 0.6], vec![1.0, 0.9]],
            kernel,
        );
        let b = arr2(&[
            [0.7, -0.2, 0.4],
            [0.1, 1.3, -0.5],
            [-0.9, 0.3, 0.8],
            [0.2, -0.6, 1.1],
        ]);
        EmpiricalOperator::new(psi, phi, b).unwrap()
    }

    #[test]
    fn kernel_qr_identity_gram() {
        let phi = basis(&[vec![1.0, 0.0], vec![0.0, 1.0]], Kernel::linear());
        let qr = kernel_qr(&phi).unwrap();
        assert_eq!(qr.r(), &Array2::eye(2));
        assert_eq!(qr.r_inv(), &Array2::eye(2));
    }

    #[test]
    fn kernel_qr_hand_cholesky() {
        // Points chosen so the Gaussian Gram is [[1, 0.5], [0.5, 1]]:
        // R = [[1, 0.5], [0, √0.75]].
        let d = (2.0 * std::f64::consts::LN_2).sqrt();
        let phi = basis(&[vec![0.0], vec![d]], Kernel::gaussian(1.0, false).unwrap());
        let qr = kernel_qr(&phi).unwrap();
        assert_relative_eq!(qr.r()[[0, 0]], 1.0, max_relative = 1e-14);
        assert_relative_eq!(qr.r()[[0, 1]], 0.5, max_relative = 1e-14);
        assert_relative_eq!(qr.r()[[1, 1]], 0.75f64.sqrt(), max_relative = 1e-14);
        // Orthonormalization invariant: (R⁻¹)ᵀ G R⁻¹ = I.
        let g = phi.gram();
        let eye = qr.r_inv().t().dot(g.entries()).dot(qr.r_inv());
        assert_relative_eq!(eye[[0, 0]], 1.0, epsilon = 1e-10);
        assert_relative_eq!(eye[[1, 1]], 1.0, epsilon = 1e-10);
        assert!(eye[[0, 1]].abs() < 1e-10);
    }

    #[test]
    fn kernel_qr_duplicate_point_fails_at_pivot_two() {
        let phi = basis(
            &[vec![0.5, 0.5], vec![0.5, 0.5]],
            Kernel::gaussian(1.0, false).unwrap(),
        );
        match kernel_qr(&phi) {
            Err(Error::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 2),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn orthonormalized_b_identity_grams() {
        let psi = basis(&[vec![1.0, 0.0], vec![0.0, 1.0]], Kernel::linear());
        let phi = psi.clone();
        let b = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let s = EmpiricalOperator::new(psi, phi, b.clone()).unwrap();
        assert_eq!(orthonormalized_b(&s).unwrap(), b);
    }

    #[test]
    fn orthonormalized_b_rank_one_scaling() {
        // R_Ψ = [3], R_Φ = [2], B = [1] → B̃ = [[6]], matching σ(S) = 6.
        let s = rank_one();
        let bt = orthonormalized_b(&s).unwrap();
        assert_relative_eq!(bt[[0, 0]], 6.0, max_relative = 1e-14);
    }

    #[test]
    fn orthonormalized_b_zero() {
        let psi = basis(&[vec![3.0, 0.0]], Kernel::linear());
        let phi = basis(&[vec![0.0, 2.0]], Kernel::linear());
        let s = EmpiricalOperator::new(psi, phi, arr2(&[[0.0]])).unwrap();
        assert_eq!(orthonormalized_b(&s).unwrap(), arr2(&[[0.0]]));
    }

    #[test]
    fn svd_qr_rank_one() {
        let svd = svd_via_qr(&rank_one(), 1e-10).unwrap();
        assert_eq!(svd.len(), 1);
        let t = &svd.triplets()[0];
        assert_relative_eq!(t.sigma, 6.0, max_relative = 1e-14);
        assert_relative_eq!(t.u.norm(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(t.v.norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn svd_qr_zero_operator_is_empty() {
        let psi = basis(&[vec![3.0, 0.0]], Kernel::linear());
        let phi = basis(&[vec![0.0, 2.0]], Kernel::linear());
        let s = EmpiricalOperator::new(psi, phi, arr2(&[[0.0]])).unwrap();
        assert!(svd_via_qr(&s, 1e-10).unwrap().is_empty());
        assert!(svd_via_aux(&s, 1e-10).unwrap().is_empty());
        assert!(svd_via_block(&s, 1e-10).unwrap().is_empty());
    }

    #[test]
    fn svd_aux_rank_one() {
        let svd = svd_via_aux(&rank_one(), 1e-10).unwrap();
        assert_eq!(svd.len(), 1);
        assert_relative_eq!(svd.triplets()[0].sigma, 6.0, max_relative = 1e-12);
        assert_relative_eq!(svd.triplets()[0].v.norm(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(svd.triplets()[0].u.norm(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn svd_block_rank_one() {
        // Auxiliary block matrix [[0, 4], [9, 0]] has eigenvalues ±6.
        let svd = svd_via_block(&rank_one(), 1e-10).unwrap();
        assert_eq!(svd.len(), 1);
        assert_relative_eq!(svd.triplets()[0].sigma, 6.0, max_relative = 1e-12);
    }

    #[test]
    fn routes_agree_on_random_instance() {
        let s = random_4x3();
        let qr = svd_via_qr(&s, 1e-10).unwrap();
        let aux = svd_via_aux(&s, 1e-10).unwrap();
        let block = svd_via_block(&s, 1e-10).unwrap();
        assert_eq!(qr.len(), 3);
        assert_eq!(aux.len(), 3);
        assert_eq!(block.len(), 3);
        for i in 0..3 {
            let sq = qr.triplets()[i].sigma;
            assert_relative_eq!(aux.triplets()[i].sigma, sq, max_relative = 1e-8);
            assert_relative_eq!(block.triplets()[i].sigma, sq, max_relative = 1e-8);
        }
        // Singular functions agree up to sign (spectrum is non-degenerate).
        for i in 0..3 {
            for (a, b) in [
                (&qr.triplets()[i].u, &aux.triplets()[i].u),
                (&qr.triplets()[i].v, &aux.triplets()[i].v),
                (&qr.triplets()[i].u, &block.triplets()[i].u),
                (&qr.triplets()[i].v, &block.triplets()[i].v),
            ] {
                let overlap = a.inner_product(b).unwrap().abs();
                assert_relative_eq!(overlap, 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn svd_functions_are_orthonormal() {
        let s = random_4x3();
        for svd in [
            svd_via_qr(&s, 1e-10).unwrap(),
            svd_via_aux(&s, 1e-10).unwrap(),
            svd_via_block(&s, 1e-10).unwrap(),
        ] {
            for i in 0..svd.len() {
                for j in 0..svd.len() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    let uu = svd.triplets()[i].u.inner_product(&svd.triplets()[j].u).unwrap();
                    let vv = svd.triplets()[i].v.inner_product(&svd.triplets()[j].v).unwrap();
                    assert_relative_eq!(uu, expect, epsilon = 1e-8);
                    assert_relative_eq!(vv, expect, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn svd_triplets_satisfy_operator_action() {
        // apply(S, vᵢ) = σᵢ uᵢ for every route.
        let s = random_4x3();
        for svd in [
            svd_via_qr(&s, 1e-10).unwrap(),
            svd_via_aux(&s, 1e-10).unwrap(),
            svd_via_block(&s, 1e-10).unwrap(),
        ] {
            for t in svd.triplets() {
                let sv = s.apply(&t.v).unwrap();
                let diff: f64 = sv
                    .coefficients()
                    .iter()
                    .zip(t.u.coefficients())
                    .map(|(&a, &b)| (a - t.sigma * b).abs())
                    .sum();
                assert!(diff < 1e-8, "S v deviates from σ u by {diff}");
            }
        }
    }

    #[test]
    fn eig_qr_identity_problem() {
        // B = G⁻¹ makes B̃ = I: all eigenvalues 1.
        let phi = basis(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            Kernel::polynomial(2, 1.0).unwrap(),
        );
        let g_inv = linalg::sym_inverse_spd(phi.gram().entries()).unwrap();
        let s = EmpiricalOperator::new(phi.clone(), phi, g_inv).unwrap();
        let eig = eig_via_qr(&s, 1e-10).unwrap();
        assert!(eig.is_symmetric());
        assert_eq!(eig.len(), 2);
        for p in eig.pairs() {
            assert_relative_eq!(p.value.re, 1.0, max_relative = 1e-12);
            assert_eq!(p.value.im, 0.0);
        }
    }

    #[test]
    fn eig_qr_matches_bg_spectrum() {
        // B = I, G = [[4,1],[1,4]] → eigenvalues of B G are {5, 3}.
        let phi = basis(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            Kernel::polynomial(2, 1.0).unwrap(),
        );
        let s = EmpiricalOperator::new(phi.clone(), phi, Array2::eye(2)).unwrap();
        let eig = eig_via_qr(&s, 1e-10).unwrap();
        assert_eq!(eig.len(), 2);
        assert_relative_eq!(eig.pairs()[0].value.re, 5.0, max_relative = 1e-12);
        assert_relative_eq!(eig.pairs()[1].value.re, 3.0, max_relative = 1e-12);
        // Eigenfunctions have unit RKHS norm.
        for p in eig.pairs() {
            assert_relative_eq!(p.function.norm(), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn eig_qr_zero_operator_is_empty() {
        let phi = basis(&[vec![1.0, 0.0], vec![0.0, 1.0]], Kernel::linear());
        let s = EmpiricalOperator::new(phi.clone(), phi, Array2::zeros((2, 2))).unwrap();
        assert!(eig_via_qr(&s, 1e-10).unwrap().is_empty());
    }

    #[test]
    fn eig_qr_rejects_distinct_bases() {
        let phi = basis(&[vec![1.0, 0.0]], Kernel::linear());
        let psi = basis(&[vec![0.0, 1.0]], Kernel::linear());
        let s = EmpiricalOperator::new(psi, phi, arr2(&[[1.0]])).unwrap();
        assert!(matches!(
            eig_via_qr(&s, 1e-10),
            Err(Error::UnsupportedProblem(_))
        ));
    }

    #[test]
    fn eig_qr_rejects_nonsymmetric_middle() {
        let phi = basis(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            Kernel::polynomial(2, 1.0).unwrap(),
        );
        let s = EmpiricalOperator::new(phi.clone(), phi, arr2(&[[0.0, 1.0], [0.0, 0.0]]))
            .unwrap();
        match eig_via_qr(&s, 1e-10) {
            Err(Error::UnsupportedProblem(msg)) => {
                assert!(msg.contains("eig_via_aux"), "message should redirect: {msg}")
            }
            other => panic!("expected redirect to eig_via_aux, got {other:?}"),
        }
    }

    #[test]
    fn eig_aux_hand_spectrum() {
        // Υ = Φ, B = I, G = [[4,1],[1,4]] → eigenvalues {5, 3}; the λ=5
        // eigenvector (1,1)/√2 maps to Φ(1,1)ᵀ normalized: coefficients
        // (1,1)/√10 since (1,1) G (1,1)ᵀ = 10.
        let phi = basis(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            Kernel::polynomial(2, 1.0).unwrap(),
        );
        let s = EmpiricalOperator::new(phi.clone(), phi, Array2::eye(2)).unwrap();
        let eig = eig_via_aux(&s, 1e-10).unwrap();
        assert!(eig.is_symmetric(), "B·G is exactly symmetric here");
        assert_eq!(eig.len(), 2);
        assert_relative_eq!(eig.pairs()[0].value.re, 5.0, max_relative = 1e-12);
        assert_relative_eq!(eig.pairs()[1].value.re, 3.0, max_relative = 1e-12);
        let c = eig.pairs()[0].function.coefficients();
        let expected = 1.0 / 10.0f64.sqrt();
        assert_relative_eq!(c[0].re.abs(), expected, max_relative = 1e-12);
        assert_relative_eq!(c[1].re.abs(), expected, max_relative = 1e-12);
        assert_relative_eq!(eig.pairs()[0].function.norm(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn eig_aux_inverse_gram_gives_unit_spectrum() {
        let phi = basis(
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            Kernel::polynomial(2, 1.0).unwrap(),
        );
        let g_inv = linalg::sym_inverse_spd(phi.gram().entries()).unwrap();
        let s = EmpiricalOperator::new(phi.clone(), phi, g_inv).unwrap();
        let eig = eig_via_aux(&s, 1e-10).unwrap();
        assert_eq!(eig.len(), 2);
        for p in eig.pairs() {
            assert_relative_eq!(p.value.re, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn eig_aux_verifies_eigen_equation() {
        // apply(S, f) = λ f for a non-symmetric middle matrix with distinct
        // bases over a shared kernel.
        let kernel = Kernel::gaussian(0.9, false).unwrap();
        let ups = basis(&[vec![0.1], vec![0.7], vec![-0.4]], kernel.clone());
        let phi = basis(&[vec![0.0], vec![0.5], vec![1.0]], kernel);
        let b = arr2(&[[0.6, 0.2, -0.1], [0.0, 1.1, 0.4], [0.3, -0.5, 0.9]]);
        let s = EmpiricalOperator::new(ups.clone(), phi, b).unwrap();
        let eig = eig_via_aux(&s, 1e-10).unwrap();
        assert!(!eig.is_empty());
        for p in eig.pairs() {
            // Split the complex eigenfunction into real/imaginary parts and
            // verify S f = λ f coefficientwise through real applications.
            let re = p.function.real_part();
            let im_coeffs = p.function.coefficients().mapv(|z| z.im);
            let im = RkhsFunction::new(ups.clone(), im_coeffs).unwrap();
            let s_re = s.apply(&re).unwrap();
            let s_im = s.apply(&im).unwrap();
            for i in 0..ups.len() {
                let got = Complex64::new(s_re.coefficients()[i], s_im.coefficients()[i]);
                let want = p.value * p.function.coefficients()[i];
                assert!(
                    (got - want).norm() <= 1e-8 * p.value.norm().max(1.0),
                    "eigen equation violated: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn eig_aux_alt_matches_aux_spectrum() {
        let kernel = Kernel::gaussian(0.9, false).unwrap();
        let ups = basis(&[vec![0.1], vec![0.7], vec![-0.4]], kernel.clone());
        let phi = basis(&[vec![0.0], vec![0.5], vec![1.0]], kernel);
        let b = arr2(&[[0.6, 0.2, -0.1], [0.0, 1.1, 0.4], [0.3, -0.5, 0.9]]);
        let s = EmpiricalOperator::new(ups, phi, b).unwrap();
        let a = eig_via_aux(&s, 1e-10).unwrap();
        let alt = eig_via_aux_alt(&s, 1e-10).unwrap();
        assert_eq!(a.len(), alt.len());
        for (pa, pb) in a.pairs().iter().zip(alt.pairs()) {
            assert!((pa.value - pb.value).norm() <= 1e-8 * pa.value.norm().max(1.0));
        }
        // The alternative route also satisfies the eigen equation.
        for p in alt.pairs() {
            assert_relative_eq!(p.function.norm(), 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn eig_aux_alt_zero_b_is_empty() {
        let phi = basis(&[vec![0.0], vec![0.5]], Kernel::gaussian(1.0, false).unwrap());
        let s = EmpiricalOperator::new(phi.clone(), phi, Array2::zeros((2, 2))).unwrap();
        assert!(eig_via_aux_alt(&s, 1e-10).unwrap().is_empty());
        assert!(eig_via_aux(&s, 1e-10).unwrap().is_empty());
    }

    #[test]
    fn eig_sigma_squared_consistency() {
        // σᵢ(S)² equal the nonzero eigenvalues of S*S.
        let s = random_4x3();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let sts = s.adjoint().compose(&s).unwrap();
        let eig = eig_via_aux(&sts, 1e-10).unwrap();
        assert!(eig.len() >= svd.len());
        for (t, p) in svd.triplets().iter().zip(eig.pairs()) {
            assert_relative_eq!(t.sigma * t.sigma, p.value.re, max_relative = 1e-8);
            assert!(p.value.im.abs() <= 1e-10);
        }
    }

    #[test]
    fn degenerate_cluster_functions_are_orthogonal() {
        // An operator with an exactly repeated singular value: identity B
        // over an orthonormal two-point basis plus a third distinct point.
        let kernel = Kernel::linear();
        let phi = basis(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], kernel);
        let s = EmpiricalOperator::new(phi.clone(), phi, Array2::eye(2)).unwrap();
        let svd = svd_via_aux(&s, 1e-10).unwrap();
        assert_eq!(svd.len(), 2);
        assert_relative_eq!(svd.triplets()[0].sigma, 1.0, max_relative = 1e-10);
        assert_relative_eq!(svd.triplets()[1].sigma, 1.0, max_relative = 1e-10);
        assert_eq!(svd.clusters(), vec![0..2]);
        let cross = svd.triplets()[0].v.inner_product(&svd.triplets()[1].v).unwrap();
        assert!(cross.abs() < 1e-10, "cluster Gram–Schmidt failed: {cross}");
    }

    #[test]
    fn truncate_full_rank_reconstructs() {
        let s = random_4x3();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let sk = truncate(&s, &svd, svd.len()).unwrap();
        // The middle matrices agree to round-off; the HS distance carries
        // √ε noise from cancellation in its bilinear expansion.
        assert!((s.b() - sk.b()).mapv(f64::abs).sum() < 1e-12);
        assert!(s.hs_distance(&sk).unwrap() < 1e-6);
    }

    #[test]
    fn truncate_rank_one_exact() {
        let s = rank_one();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let sk = truncate(&s, &svd, 1).unwrap();
        assert!(s.hs_distance(&sk).unwrap() < 1e-12);
    }

    #[test]
    fn truncate_error_is_tail_energy() {
        let s = random_4x3();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let sk = truncate(&s, &svd, 1).unwrap();
        let expected = (svd.triplets()[1].sigma.powi(2) + svd.triplets()[2].sigma.powi(2)).sqrt();
        assert_relative_eq!(s.hs_distance(&sk).unwrap(), expected, max_relative = 1e-8);
    }

    #[test]
    fn truncate_rank_out_of_range() {
        let s = rank_one();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        assert!(matches!(
            truncate(&s, &svd, 5),
            Err(Error::OutOfRange { limit: 1, .. })
        ));
    }

    #[test]
    fn pseudoinverse_rank_one() {
        let s = rank_one();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let pinv = pseudoinverse(&svd, 1e-10).unwrap();
        let psvd = svd_via_qr(&pinv, 1e-10).unwrap();
        assert_eq!(psvd.len(), 1);
        assert_relative_eq!(psvd.triplets()[0].sigma, 1.0 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn pseudoinverse_moore_penrose_axioms() {
        let s = random_4x3();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let pinv = pseudoinverse(&svd, 1e-10).unwrap();
        // HS distances between near-identical operators bottom out at √ε
        // of the norm scale (cancellation in the bilinear expansion).
        let s_ps_s = s.compose(&pinv).unwrap().compose(&s).unwrap();
        assert!(
            s.hs_distance(&s_ps_s).unwrap() <= 1e-6 * s.hs_norm().unwrap(),
            "S S⁺ S must reproduce S"
        );
        let ps_s_ps = pinv.compose(&s).unwrap().compose(&pinv).unwrap();
        assert!(
            pinv.hs_distance(&ps_s_ps).unwrap() <= 1e-6 * pinv.hs_norm().unwrap(),
            "S⁺ S S⁺ must reproduce S⁺"
        );
    }

    #[test]
    fn pseudoinverse_empty_svd_is_error() {
        let svd = SvdResult {
            triplets: Vec::new(),
            threshold: 1e-10,
        };
        assert!(matches!(
            pseudoinverse(&svd, 1e-10),
            Err(Error::EmptyDecomposition(_))
        ));
    }

    #[test]
    fn lstsq_singular_direction() {
        // y = uᵢ ⇒ A⁺y = σᵢ⁻¹ vᵢ.
        let s = random_4x3();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let t0 = &svd.triplets()[0];
        let x = lstsq_apply(&svd, &t0.u, 1e-10).unwrap();
        for (a, b) in x.coefficients().iter().zip(t0.v.coefficients()) {
            assert_relative_eq!(*a, b / t0.sigma, epsilon = 1e-10);
        }
    }

    #[test]
    fn lstsq_orthogonal_target_gives_zero() {
        // Linear kernel: y over a point orthogonal to Ψ's single point is
        // orthogonal to every uᵢ.
        let s = rank_one();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let y = RkhsFunction::new(basis(&[vec![0.0, 5.0]], Kernel::linear()), arr1(&[1.0]))
            .unwrap();
        let x = lstsq_apply(&svd, &y, 1e-10).unwrap();
        assert!(x.coefficients().iter().all(|&c| c.abs() < 1e-14));
    }

    #[test]
    fn lstsq_round_trip() {
        // y = S v for v in the row space is solved back to v.
        let s = random_4x3();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        let mut coeffs = Array1::zeros(3);
        coeffs.scaled_add(1.0, svd.triplets()[0].v.coefficients());
        coeffs.scaled_add(2.0, svd.triplets()[1].v.coefficients());
        let v = RkhsFunction::new(s.in_basis().clone(), coeffs).unwrap();
        let y = s.apply(&v).unwrap();
        let x = lstsq_apply(&svd, &y, 1e-10).unwrap();
        let diff: f64 = x
            .coefficients()
            .iter()
            .zip(v.coefficients())
            .map(|(&a, &b)| (a - b).abs())
            .sum();
        assert!(diff < 1e-8, "round trip deviates by {diff}");
    }

    #[test]
    fn norm_bound_dominates_leading_singular_value() {
        let s = random_4x3();
        let svd = svd_via_qr(&s, 1e-10).unwrap();
        assert!(s.norm_bound().unwrap() >= svd.triplets()[0].sigma - 1e-10);
    }
}
