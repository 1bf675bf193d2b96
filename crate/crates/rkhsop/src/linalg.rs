//! Thin wrappers over the system LAPACK/CBLAS (OpenBLAS) routines the crate
//! needs: Cholesky, symmetric and general eigensolvers, SVD, triangular and
//! general solves, and symmetric rank-k updates.
//!
//! Layout convention: all public functions take and return row-major
//! `ndarray` arrays. LAPACK is column-major, so symmetric inputs are passed
//! as-is (transposition is a no-op on them) while general matrices are
//! explicitly transposed into scratch buffers. Each wrapper documents the
//! orientation of its outputs.

use ndarray::prelude::*;
use num_complex::Complex64;

use crate::error::{Error, Result};

// ===== FFI declarations =====

// CBLAS enum values (from cblas.h).
const CBLAS_ROW_MAJOR: i32 = 101;
const CBLAS_NO_TRANS: i32 = 111;
const CBLAS_TRANS: i32 = 112;
const CBLAS_UPPER: i32 = 121;
const CBLAS_NON_UNIT: i32 = 131;
const CBLAS_LEFT: i32 = 141;
const CBLAS_RIGHT: i32 = 142;

extern "C" {
    fn dpotrf_(uplo: *const u8, n: *const i32, a: *mut f64, lda: *const i32, info: *mut i32);
    fn dpotri_(uplo: *const u8, n: *const i32, a: *mut f64, lda: *const i32, info: *mut i32);
    fn dtrtri_(
        uplo: *const u8,
        diag: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        info: *mut i32,
    );
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
    fn dgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        wr: *mut f64,
        wi: *mut f64,
        vl: *mut f64,
        ldvl: *const i32,
        vr: *mut f64,
        ldvr: *const i32,
        work: *mut f64,
        lwork: *const i32,
        info: *mut i32,
    );
    fn dgesdd_(
        jobz: *const u8,
        m: *const i32,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        s: *mut f64,
        u: *mut f64,
        ldu: *const i32,
        vt: *mut f64,
        ldvt: *const i32,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        info: *mut i32,
    );
    fn dgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut f64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut f64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn cblas_dtrmm(
        order: i32,
        side: i32,
        uplo: i32,
        trans_a: i32,
        diag: i32,
        m: i32,
        n: i32,
        alpha: f64,
        a: *const f64,
        lda: i32,
        b: *mut f64,
        ldb: i32,
    );
    fn cblas_dtrsm(
        order: i32,
        side: i32,
        uplo: i32,
        trans_a: i32,
        diag: i32,
        m: i32,
        n: i32,
        alpha: f64,
        a: *const f64,
        lda: i32,
        b: *mut f64,
        ldb: i32,
    );
    fn cblas_dsyrk(
        order: i32,
        uplo: i32,
        trans: i32,
        n: i32,
        k: i32,
        alpha: f64,
        a: *const f64,
        lda: i32,
        beta: f64,
        c: *mut f64,
        ldc: i32,
    );
}

// ===== helpers =====

fn as_mut_slice(a: &mut Array2<f64>) -> &mut [f64] {
    a.as_slice_mut()
        .expect("matrix must be contiguous row-major")
}

fn square_dim(a: &Array2<f64>, context: &'static str) -> Result<i32> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            left: a.nrows(),
            right: a.ncols(),
        });
    }
    Ok(a.nrows() as i32)
}

/// Column-major copy of a row-major matrix, as a flat buffer.
fn to_column_major(a: &Array2<f64>) -> Vec<f64> {
    let (m, n) = a.dim();
    let mut buf = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            buf[j * m + i] = a[[i, j]];
        }
    }
    buf
}

// ===== Cholesky =====

/// Cholesky factorization G = RᵀR of a symmetric positive-definite matrix.
/// Returns the upper-triangular factor R with strictly positive diagonal.
/// On failure reports the 1-based index of the first non-positive pivot.
pub fn cholesky_upper(g: &Array2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(g, "cholesky input")?;
    let mut a = g.clone();
    let mut info = 0i32;
    // Fortran reads our row-major buffer as the transpose; for a symmetric
    // input that is the same matrix. Factoring its lower triangle stores Lᶠ
    // column-major, which this buffer exposes row-major as R = (Lᶠ)ᵀ.
    unsafe {
        dpotrf_(b"L".as_ptr(), &n, as_mut_slice(&mut a).as_mut_ptr(), &n, &mut info);
    }
    if info < 0 {
        return Err(Error::LapackFailure { driver: "dpotrf", info });
    }
    if info > 0 {
        return Err(Error::NotPositiveDefinite { pivot: info as usize });
    }
    // Zero the strictly lower triangle (unreferenced input remnants).
    for i in 1..n as usize {
        for j in 0..i {
            a[[i, j]] = 0.0;
        }
    }
    Ok(a)
}

/// Cholesky with escalating diagonal jitter for matrices that are positive
/// definite in exact arithmetic but numerically semi-definite. Attempts the
/// plain factorization first, then adds jitter 10⁻¹⁰·(max diagonal),
/// escalating twice by 10² before giving up. Returns the factor R (upper,
/// G + jitter·I = RᵀR) and the jitter that was applied (0.0 if none).
pub fn cholesky_upper_jittered(g: &Array2<f64>) -> Result<(Array2<f64>, f64)> {
    match cholesky_upper(g) {
        Ok(r) => return Ok((r, 0.0)),
        Err(Error::NotPositiveDefinite { .. }) => {}
        Err(e) => return Err(e),
    }
    let max_diag = g.diag().iter().cloned().fold(0.0f64, f64::max);
    let mut jitter = 1e-10 * max_diag;
    let mut last_pivot = 0;
    for _ in 0..3 {
        let mut shifted = g.clone();
        for v in shifted.diag_mut() {
            *v += jitter;
        }
        match cholesky_upper(&shifted) {
            Ok(r) => return Ok((r, jitter)),
            Err(Error::NotPositiveDefinite { pivot }) => last_pivot = pivot,
            Err(e) => return Err(e),
        }
        jitter *= 100.0;
    }
    Err(Error::NotPositiveDefinite { pivot: last_pivot })
}

/// Inverse of an upper-triangular matrix with nonzero diagonal.
pub fn invert_upper_triangular(r: &Array2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(r, "triangular inverse input")?;
    let mut a = r.clone();
    let mut info = 0i32;
    // Row-major upper triangle is Fortran's lower triangle of the transpose;
    // inverting that lower matrix yields R⁻¹ back in the row-major upper.
    unsafe {
        dtrtri_(
            b"L".as_ptr(),
            b"N".as_ptr(),
            &n,
            as_mut_slice(&mut a).as_mut_ptr(),
            &n,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dtrtri", info });
    }
    Ok(a)
}

/// Inverse of a symmetric positive-definite matrix via Cholesky. The result
/// is exactly symmetric (one triangle computed, then mirrored).
pub fn sym_inverse_spd(g: &Array2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(g, "symmetric inverse input")?;
    let mut a = g.clone();
    let mut info = 0i32;
    unsafe {
        dpotrf_(b"L".as_ptr(), &n, as_mut_slice(&mut a).as_mut_ptr(), &n, &mut info);
    }
    if info > 0 {
        return Err(Error::NotPositiveDefinite { pivot: info as usize });
    }
    if info < 0 {
        return Err(Error::LapackFailure { driver: "dpotrf", info });
    }
    unsafe {
        dpotri_(b"L".as_ptr(), &n, as_mut_slice(&mut a).as_mut_ptr(), &n, &mut info);
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dpotri", info });
    }
    // dpotri filled the row-major upper triangle; mirror it down.
    let n = n as usize;
    for i in 1..n {
        for j in 0..i {
            a[[i, j]] = a[[j, i]];
        }
    }
    Ok(a)
}

// ===== symmetric eigendecomposition =====

/// Eigendecomposition of a symmetric matrix.
pub struct SymEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Eigenvectors stored as rows: `vectors_rows.row(j)` pairs with
    /// `values[j]`. The rows are orthonormal.
    pub vectors_rows: Array2<f64>,
}

/// Symmetric eigendecomposition via the divide-and-conquer driver. Consumes
/// the input matrix; only its lower-left triangle (row-major) is referenced,
/// so a symmetric matrix may be passed without cleanup.
pub fn sym_eig(mut a: Array2<f64>) -> Result<SymEig> {
    let n = square_dim(&a, "symmetric eigensolver input")?;
    let mut w = vec![0.0f64; n as usize];
    let (mut info, minus_one) = (0i32, -1i32);
    let (mut wkopt, mut iwkopt) = ([0.0f64], [0i32]);
    unsafe {
        dsyevd_(
            b"V".as_ptr(),
            b"U".as_ptr(),
            &n,
            as_mut_slice(&mut a).as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            wkopt.as_mut_ptr(),
            &minus_one,
            iwkopt.as_mut_ptr(),
            &minus_one,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dsyevd", info });
    }
    let lwork = wkopt[0] as i32;
    let liwork = iwkopt[0];
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    // UPLO='U' makes Fortran read the upper triangle of the transposed view,
    // i.e. our row-major lower triangle. Eigenvectors come back in Fortran
    // columns, which this buffer exposes as rows.
    unsafe {
        dsyevd_(
            b"V".as_ptr(),
            b"U".as_ptr(),
            &n,
            as_mut_slice(&mut a).as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dsyevd", info });
    }
    Ok(SymEig {
        values: w,
        vectors_rows: a,
    })
}

// ===== general (nonsymmetric) eigendecomposition =====

/// One eigenpair of a general real matrix.
pub struct GeneralEigPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

/// Eigendecomposition of a general real square matrix. Complex conjugate
/// pairs appear adjacently, positive imaginary part first, exactly as the
/// LAPACK driver emits them. Eigenvectors have unit Euclidean norm.
pub fn general_eig(a: &Array2<f64>) -> Result<Vec<GeneralEigPair>> {
    let n_i = square_dim(a, "general eigensolver input")?;
    let n = n_i as usize;
    let mut buf = to_column_major(a);
    let mut wr = vec![0.0f64; n];
    let mut wi = vec![0.0f64; n];
    let mut vr = vec![0.0f64; n * n];
    let mut vl = [0.0f64; 1];
    let (mut info, minus_one, one) = (0i32, -1i32, 1i32);
    let mut wkopt = [0.0f64];
    unsafe {
        dgeev_(
            b"N".as_ptr(),
            b"V".as_ptr(),
            &n_i,
            buf.as_mut_ptr(),
            &n_i,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            vl.as_mut_ptr(),
            &one,
            vr.as_mut_ptr(),
            &n_i,
            wkopt.as_mut_ptr(),
            &minus_one,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dgeev", info });
    }
    let lwork = wkopt[0] as i32;
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        dgeev_(
            b"N".as_ptr(),
            b"V".as_ptr(),
            &n_i,
            buf.as_mut_ptr(),
            &n_i,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            vl.as_mut_ptr(),
            &one,
            vr.as_mut_ptr(),
            &n_i,
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dgeev", info });
    }

    // Unpack the real-storage scheme: a conjugate pair (λ, λ̄) with Im λ > 0
    // occupies columns j (real part) and j+1 (imaginary part).
    let mut pairs = Vec::with_capacity(n);
    let col = |j: usize| &vr[j * n..(j + 1) * n];
    let mut j = 0;
    while j < n {
        if wi[j] == 0.0 {
            pairs.push(GeneralEigPair {
                value: Complex64::new(wr[j], 0.0),
                vector: col(j).iter().map(|&re| Complex64::new(re, 0.0)).collect(),
            });
            j += 1;
        } else {
            let re = col(j);
            let im = col(j + 1);
            let vector: Vec<Complex64> = re
                .iter()
                .zip(im)
                .map(|(&r, &i)| Complex64::new(r, i))
                .collect();
            let conj: Vec<Complex64> = vector.iter().map(|z| z.conj()).collect();
            pairs.push(GeneralEigPair {
                value: Complex64::new(wr[j], wi[j]),
                vector,
            });
            pairs.push(GeneralEigPair {
                value: Complex64::new(wr[j + 1], wi[j + 1]),
                vector: conj,
            });
            j += 2;
        }
    }
    Ok(pairs)
}

// ===== singular value decomposition =====

/// Economy-size SVD A = U·diag(s)·Vᵀ of a general real matrix.
pub struct Svd {
    /// m×k matrix of left singular vectors (columns), k = min(m,n).
    pub u: Array2<f64>,
    /// Singular values, non-increasing.
    pub s: Vec<f64>,
    /// k×n matrix of right singular vectors (rows).
    pub vt: Array2<f64>,
}

/// Divide-and-conquer SVD.
pub fn svd(a: &Array2<f64>) -> Result<Svd> {
    let (m, n) = a.dim();
    let k = m.min(n);
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    let mut buf = to_column_major(a);
    let mut s = vec![0.0f64; k];
    let mut u = vec![0.0f64; m * k];
    let mut vt = vec![0.0f64; k * n];
    let mut iwork = vec![0i32; 8 * k];
    let (mut info, minus_one) = (0i32, -1i32);
    let mut wkopt = [0.0f64];
    unsafe {
        dgesdd_(
            b"S".as_ptr(),
            &mi,
            &ni,
            buf.as_mut_ptr(),
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr(),
            &mi,
            vt.as_mut_ptr(),
            &ki,
            wkopt.as_mut_ptr(),
            &minus_one,
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dgesdd", info });
    }
    let lwork = wkopt[0] as i32;
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        dgesdd_(
            b"S".as_ptr(),
            &mi,
            &ni,
            buf.as_mut_ptr(),
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr(),
            &mi,
            vt.as_mut_ptr(),
            &ki,
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dgesdd", info });
    }
    let u_arr = Array2::from_shape_fn((m, k), |(i, j)| u[j * m + i]);
    let vt_arr = Array2::from_shape_fn((k, n), |(i, j)| vt[j * k + i]);
    Ok(Svd {
        u: u_arr,
        s,
        vt: vt_arr,
    })
}

// ===== linear solves =====

/// Solves A·X = B for general square A via LU with partial pivoting.
pub fn solve_general(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let n_i = square_dim(a, "general solve input")?;
    let n = n_i as usize;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "general solve right-hand side",
            left: n,
            right: b.nrows(),
        });
    }
    let nrhs = b.ncols();
    let mut a_buf = to_column_major(a);
    let mut b_buf = to_column_major(b);
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    let nrhs_i = nrhs as i32;
    unsafe {
        dgesv_(
            &n_i,
            &nrhs_i,
            a_buf.as_mut_ptr(),
            &n_i,
            ipiv.as_mut_ptr(),
            b_buf.as_mut_ptr(),
            &n_i,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::LapackFailure { driver: "dgesv", info });
    }
    Ok(Array2::from_shape_fn((n, nrhs), |(i, j)| b_buf[j * n + i]))
}

/// In-place triangular multiply with an upper-triangular factor R:
/// B ← R·B (`transpose = false`) or B ← Rᵀ·B (`transpose = true`).
pub fn trmm_upper_left(r: &Array2<f64>, b: &mut Array2<f64>, transpose: bool) {
    let n = r.nrows() as i32;
    let ncols = b.ncols() as i32;
    let trans = if transpose { CBLAS_TRANS } else { CBLAS_NO_TRANS };
    unsafe {
        cblas_dtrmm(
            CBLAS_ROW_MAJOR,
            CBLAS_LEFT,
            CBLAS_UPPER,
            trans,
            CBLAS_NON_UNIT,
            n,
            ncols,
            1.0,
            r.as_slice().expect("contiguous").as_ptr(),
            n,
            as_mut_slice(b).as_mut_ptr(),
            ncols,
        );
    }
}

/// In-place triangular multiply from the right:
/// B ← B·R (`transpose = false`) or B ← B·Rᵀ (`transpose = true`).
pub fn trmm_upper_right(r: &Array2<f64>, b: &mut Array2<f64>, transpose: bool) {
    let n = r.nrows() as i32;
    let nrows = b.nrows() as i32;
    let trans = if transpose { CBLAS_TRANS } else { CBLAS_NO_TRANS };
    unsafe {
        cblas_dtrmm(
            CBLAS_ROW_MAJOR,
            CBLAS_RIGHT,
            CBLAS_UPPER,
            trans,
            CBLAS_NON_UNIT,
            nrows,
            n,
            1.0,
            r.as_slice().expect("contiguous").as_ptr(),
            n,
            as_mut_slice(b).as_mut_ptr(),
            n,
        );
    }
}

/// In-place triangular solve with an upper-triangular factor R:
/// B ← R⁻¹·B (`transpose = false`) or B ← R⁻ᵀ·B (`transpose = true`).
pub fn trsm_upper_left(r: &Array2<f64>, b: &mut Array2<f64>, transpose: bool) {
    let n = r.nrows() as i32;
    let ncols = b.ncols() as i32;
    let trans = if transpose { CBLAS_TRANS } else { CBLAS_NO_TRANS };
    unsafe {
        cblas_dtrsm(
            CBLAS_ROW_MAJOR,
            CBLAS_LEFT,
            CBLAS_UPPER,
            trans,
            CBLAS_NON_UNIT,
            n,
            ncols,
            1.0,
            r.as_slice().expect("contiguous").as_ptr(),
            n,
            as_mut_slice(b).as_mut_ptr(),
            ncols,
        );
    }
}

/// Symmetric product AᵀA of a rectangular matrix, computed with a rank-k
/// update (half the flops of a general product) and mirrored to full storage.
pub fn syrk_ata(a: &Array2<f64>) -> Array2<f64> {
    let (k, n) = a.dim();
    let mut c = Array2::zeros((n, n));
    unsafe {
        cblas_dsyrk(
            CBLAS_ROW_MAJOR,
            CBLAS_UPPER,
            CBLAS_TRANS,
            n as i32,
            k as i32,
            1.0,
            a.as_slice().expect("contiguous").as_ptr(),
            n as i32,
            0.0,
            as_mut_slice(&mut c).as_mut_ptr(),
            n as i32,
        );
    }
    for i in 1..n {
        for j in 0..i {
            c[[i, j]] = c[[j, i]];
        }
    }
    c
}
