//! The benchmark experiments shipped with the crate — Mercer spectrum
//! recovery, Gaussian-mixture cross-covariance SVD, coherent-set analysis of
//! the double gyre flow — plus a generic decomposition entry point for CSV
//! data. Every run writes an [`ExperimentReport`] carrying all parameters
//! needed to reproduce its numbers bitwise; [`rerun`] replays a report.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::DataSet;
use crate::decomp::{self, DEFAULT_TRUNCATION_THRESHOLD};
use crate::dynamics::{self, DoubleGyreParams, IntegratorConfig, Rectangle, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::estimators::{self, Regularizer};
use crate::kernel::Kernel;
use crate::operator::EmpiricalOperator;
use crate::report::ExperimentReport;
use crate::rkhs::RkhsFunction;

/// Points per axis in the Mercer eigenfunction grid evaluation.
const MERCER_GRID: usize = 50;
/// Half-width of the square sampling domain for the Mercer experiment.
const MERCER_HALF_WIDTH: f64 = 2.0;
/// Leading eigenfunctions the Mercer report stores and grid-evaluates.
const MERCER_FUNCTIONS: usize = 6;
/// Points in the 1-D evaluation grid for cross-covariance singular functions.
const CROSSCOV_GRID: usize = 401;
/// Leading singular-function pairs the cross-covariance report evaluates.
const CROSSCOV_FUNCTIONS: usize = 2;
/// Leading right singular functions the double gyre report evaluates.
const DOUBLEGYRE_FUNCTIONS: usize = 3;

/// The closed-form spectrum of the integral operator of the kernel
/// k(x, x′) = (1 + xᵀx′)² on [−2, 2]² under the uniform probability measure:
/// six nonzero eigenvalues with polynomial eigenfunctions normalized to unit
/// L² norm. The rest of the spectrum is zero because the kernel's feature
/// space has dimension six.
#[derive(Debug, Clone)]
pub struct MercerReference {
    eigenvalues: [f64; 6],
    constants: [f64; 6],
    shifts: [f64; 2],
}

impl MercerReference {
    pub fn new() -> Self {
        let root = 60841.0_f64.sqrt();
        let eigenvalues = [
            (269.0 + root) / 90.0,
            32.0 / 9.0,
            8.0 / 3.0,
            8.0 / 3.0,
            64.0 / 45.0,
            (269.0 - root) / 90.0,
        ];
        // Per-coordinate moments of the uniform distribution on [−2, 2].
        let m2 = 4.0 / 3.0;
        let m4 = 16.0 / 5.0;
        // ‖a + x₁² + x₂²‖² = a² + 4a·m₂ + 2m₄ + 2m₂² for the radial pair.
        let radial = |a: f64| a * a + 4.0 * a * m2 + 2.0 * m4 + 2.0 * m2 * m2;
        let shifts = [(-179.0 + root) / 120.0, (-179.0 - root) / 120.0];
        let constants = [
            radial(shifts[0]).sqrt().recip(),
            (m2 * m2).sqrt().recip(),
            m2.sqrt().recip(),
            m2.sqrt().recip(),
            (2.0 * m4 - 2.0 * m2 * m2).sqrt().recip(),
            radial(shifts[1]).sqrt().recip(),
        ];
        MercerReference {
            eigenvalues,
            constants,
            shifts,
        }
    }

    /// The six nonzero eigenvalues in decreasing order (λ₃ = λ₄).
    pub fn eigenvalues(&self) -> &[f64; 6] {
        &self.eigenvalues
    }

    /// Evaluates the i-th analytic eigenfunction (0-based, i < 6) at a point.
    /// The pair {e₃, e₄} spans the degenerate eigenspace of λ₃ = λ₄; any
    /// rotation of it is an equally valid eigenbasis.
    pub fn evaluate(&self, i: usize, x: &[f64]) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        let c = self.constants[i];
        match i {
            0 => c * (self.shifts[0] + x1 * x1 + x2 * x2),
            1 => c * x1 * x2,
            2 => c * x1,
            3 => c * x2,
            4 => c * (x1 * x1 - x2 * x2),
            5 => c * (self.shifts[1] + x1 * x1 + x2 * x2),
            _ => panic!("the reference has exactly six eigenfunctions"),
        }
    }
}

impl Default for MercerReference {
    fn default() -> Self {
        Self::new()
    }
}

/// Runs the Mercer spectrum experiment: draws `m` uniform samples from
/// [−2, 2]², eigendecomposes the empirical covariance operator of the
/// degree-2 polynomial kernel through the auxiliary-matrix route, and writes
/// the report to `out_path`.
///
/// The report stores every retained eigenvalue, the unit-RKHS-norm and
/// unit-L²-norm coefficient vectors of the leading eigenfunctions (the L²
/// version rescales by λᵢ^{-1/2}), and a 50×50 midpoint-grid evaluation of
/// the L²-normalized ones, ready to compare against [`MercerReference`].
pub fn run_mercer(m: usize, seed: u64, out_path: &Path) -> Result<ExperimentReport> {
    if m < 10 {
        return Err(Error::OutOfRange {
            context: "mercer sample count below the minimum",
            value: m,
            limit: 10,
        });
    }
    let domain = Rectangle::centered_square(MERCER_HALF_WIDTH)?;
    let kernel = Kernel::polynomial(2, 1.0)?;
    let x = dynamics::sample_uniform(&domain, m, seed)?;
    let op = estimators::covariance(&x, &kernel)?;
    let eig = decomp::eig_via_aux(&op, DEFAULT_TRUNCATION_THRESHOLD)?;

    let mut report = ExperimentReport::new("mercer");
    report.set_param("kernel", &kernel);
    report.set_param("m", m);
    report.set_param("seed", seed);
    report.set_param("rng", RNG_ALGORITHM);
    report.set_param_f64("half_width", MERCER_HALF_WIDTH);
    report.set_param_f64("threshold", DEFAULT_TRUNCATION_THRESHOLD);
    report.set_param("grid", format!("{MERCER_GRID},{MERCER_GRID}"));

    // The covariance operator is self-adjoint and PSD, so the retained
    // spectrum is real.
    let eigenvalues: Vec<f64> = eig.pairs().iter().map(|p| p.value.re).collect();
    report.set_scalars("eigenvalues", &eigenvalues);
    report.set_scalars("analytic eigenvalues", MercerReference::new().eigenvalues());

    let grid = dynamics::grid_midpoints(MERCER_GRID, MERCER_GRID, &domain)?;
    for (i, pair) in eig.pairs().iter().take(MERCER_FUNCTIONS).enumerate() {
        let n = i + 1;
        let rkhs_normalized = pair.function.real_part();
        let mut l2_normalized = rkhs_normalized.clone();
        l2_normalized.scale(pair.value.re.sqrt().recip());
        report.set_array(&format!("rkhs coefficients {n}"), coeff_rows(&rkhs_normalized));
        report.set_array(&format!("l2 coefficients {n}"), coeff_rows(&l2_normalized));
        report.set_array(&format!("grid e {n}"), grid_rows(&l2_normalized, &grid)?);
    }
    report.write(out_path)?;
    Ok(report)
}

/// Runs the Gaussian-mixture cross-covariance experiment: draws `m` paired
/// samples from the two-component mixture with component deviation `rho`,
/// decomposes the empirical cross-covariance operator under the normalized
/// Gaussian kernel through the auxiliary-matrix route, and writes the report.
///
/// The report stores the retained singular values, coefficient vectors of the
/// top singular-function pairs, and their evaluations on a uniform 1-D grid
/// over [−2, 2].
pub fn run_crosscov(
    m: usize,
    rho: f64,
    bandwidth: f64,
    seed: u64,
    out_path: &Path,
) -> Result<ExperimentReport> {
    if m < 10 {
        return Err(Error::OutOfRange {
            context: "crosscov sample count below the minimum",
            value: m,
            limit: 10,
        });
    }
    let kernel = Kernel::gaussian(bandwidth, true)?;
    let (x, y) = dynamics::sample_mixture(m, rho, seed)?;
    let op = estimators::cross_covariance(&x, &y, &kernel, &kernel)?;
    let svd = decomp::svd_via_aux(&op, DEFAULT_TRUNCATION_THRESHOLD)?;

    let mut report = ExperimentReport::new("crosscov");
    report.set_param("kernel", &kernel);
    report.set_param("m", m);
    report.set_param_f64("rho", rho);
    report.set_param_f64("bandwidth", bandwidth);
    report.set_param("seed", seed);
    report.set_param("rng", RNG_ALGORITHM);
    report.set_param_f64("threshold", DEFAULT_TRUNCATION_THRESHOLD);
    report.set_param("grid_points", CROSSCOV_GRID);

    report.set_scalars("singular values", &svd.singular_values());
    let grid = line_grid(-2.0, 2.0, CROSSCOV_GRID)?;
    for (i, triplet) in svd.triplets().iter().take(CROSSCOV_FUNCTIONS).enumerate() {
        let n = i + 1;
        report.set_array(&format!("left coefficients {n}"), coeff_rows(&triplet.u));
        report.set_array(&format!("right coefficients {n}"), coeff_rows(&triplet.v));
        report.set_array(&format!("grid u {n}"), grid_rows(&triplet.u, &grid)?);
        report.set_array(&format!("grid v {n}"), grid_rows(&triplet.v, &grid)?);
    }
    report.write(out_path)?;
    Ok(report)
}

/// Runs the double gyre coherent-set experiment: seeds an `nx`×`ny` midpoint
/// grid on [0, 2]×[0, 1], integrates every point through the flow for lag
/// `tau`, builds the regularized kernel CCA operator between initial and
/// final configurations under the Gaussian kernel, decomposes it through the
/// auxiliary-matrix route, and writes the report.
///
/// The report stores the retained singular values, coefficient vectors of the
/// top right singular functions, and their evaluations on the seeding grid
/// (level sets of those functions mark the coherent sets at time 0).
pub fn run_doublegyre(
    nx: usize,
    ny: usize,
    tau: f64,
    bandwidth: f64,
    epsilon: f64,
    out_path: &Path,
) -> Result<ExperimentReport> {
    if nx < 10 {
        return Err(Error::OutOfRange {
            context: "double gyre grid columns below the minimum",
            value: nx,
            limit: 10,
        });
    }
    if ny < 5 {
        return Err(Error::OutOfRange {
            context: "double gyre grid rows below the minimum",
            value: ny,
            limit: 5,
        });
    }
    let domain = Rectangle::double_gyre();
    let kernel = Kernel::gaussian(bandwidth, false)?;
    let reg = Regularizer::new(epsilon)?;
    let params = DoubleGyreParams::default();
    let integrator = IntegratorConfig::default();
    let x = dynamics::grid_midpoints(nx, ny, &domain)?;
    let y = dynamics::flow_map_dataset(&x, tau, &params, &integrator)?;
    let op = estimators::cca_operator(&x, &y, &kernel, &kernel, reg)?;
    let svd = decomp::svd_via_aux(&op, DEFAULT_TRUNCATION_THRESHOLD)?;

    let mut report = ExperimentReport::new("doublegyre");
    report.set_param("kernel", &kernel);
    report.set_param("nx", nx);
    report.set_param("ny", ny);
    report.set_param_f64("tau", tau);
    report.set_param_f64("bandwidth", bandwidth);
    report.set_param_f64("epsilon", epsilon);
    report.set_param_f64("threshold", DEFAULT_TRUNCATION_THRESHOLD);
    report.set_param_f64("amplitude", params.amplitude);
    report.set_param_f64("delta", params.delta);
    report.set_param_f64("omega", params.omega);
    report.set_param_f64("rel_tol", integrator.rel_tol);
    report.set_param_f64("abs_tol", integrator.abs_tol);

    report.set_scalars("singular values", &svd.singular_values());
    for (i, triplet) in svd.triplets().iter().take(DOUBLEGYRE_FUNCTIONS).enumerate() {
        let n = i + 1;
        report.set_array(&format!("right coefficients {n}"), coeff_rows(&triplet.v));
        report.set_array(&format!("grid v {n}"), grid_rows(&triplet.v, &x)?);
    }
    report.write(out_path)?;
    Ok(report)
}

/// What a decomposition run extracts from the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Eig,
    Svd,
}

/// Which numerical route carries the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Qr,
    Aux,
    Block,
}

/// The estimator applied to the CSV data before decomposing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Covariance,
    CrossCovariance,
    Cme,
    Koopman,
    PerronFrobenius,
    Cca,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Eig => "eig",
            Mode::Svd => "svd",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eig" => Ok(Mode::Eig),
            "svd" => Ok(Mode::Svd),
            _ => Err(Error::UnsupportedProblem(format!(
                "unknown mode `{s}`; expected `eig` or `svd`"
            ))),
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Qr => "qr",
            Route::Aux => "aux",
            Route::Block => "block",
        })
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qr" => Ok(Route::Qr),
            "aux" => Ok(Route::Aux),
            "block" => Ok(Route::Block),
            _ => Err(Error::UnsupportedProblem(format!(
                "unknown route `{s}`; expected `qr`, `aux`, or `block`"
            ))),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Covariance => "covariance",
            EstimatorKind::CrossCovariance => "cross-covariance",
            EstimatorKind::Cme => "cme",
            EstimatorKind::Koopman => "koopman",
            EstimatorKind::PerronFrobenius => "perron-frobenius",
            EstimatorKind::Cca => "cca",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "covariance" => Ok(EstimatorKind::Covariance),
            "cross-covariance" => Ok(EstimatorKind::CrossCovariance),
            "cme" => Ok(EstimatorKind::Cme),
            "koopman" => Ok(EstimatorKind::Koopman),
            "perron-frobenius" => Ok(EstimatorKind::PerronFrobenius),
            "cca" => Ok(EstimatorKind::Cca),
            _ => Err(Error::UnsupportedProblem(format!(
                "unknown estimator `{s}`; expected `covariance`, `cross-covariance`, \
                 `cme`, `koopman`, `perron-frobenius`, or `cca`"
            ))),
        }
    }
}

/// Configuration for [`decompose_csv`].
#[derive(Debug, Clone)]
pub struct DecomposeOptions {
    /// CSV file of input observations (header `x1,...,xd`).
    pub x_path: PathBuf,
    /// CSV file of paired output observations (header `y1,...,yd'`),
    /// required by every estimator except [`EstimatorKind::Covariance`].
    pub y_path: Option<PathBuf>,
    /// Kernel on the input space.
    pub kernel: Kernel,
    /// Kernel on the output space; defaults to `kernel`. Single-kernel
    /// estimators (koopman, perron-frobenius) reject an explicit value.
    pub out_kernel: Option<Kernel>,
    /// Defaults to covariance without y data and cross-covariance with it.
    pub estimator: Option<EstimatorKind>,
    pub mode: Mode,
    pub route: Route,
    /// Regularization for the estimators that invert Gram matrices; the
    /// moment estimators (covariance, cross-covariance) ignore it.
    pub epsilon: Regularizer,
    /// Relative spectral truncation threshold.
    pub threshold: f64,
    /// Caps how many singular/eigen function coefficient vectors the report
    /// stores. The full retained value list is always written.
    pub rank: Option<usize>,
}

/// Builds the selected estimator from CSV data, decomposes it through the
/// selected route, and writes the report to `out_path`.
pub fn decompose_csv(options: &DecomposeOptions, out_path: &Path) -> Result<ExperimentReport> {
    let x = DataSet::read_csv(&options.x_path, 'x')?;
    let y = match &options.y_path {
        Some(path) => Some(DataSet::read_csv(path, 'y')?),
        None => None,
    };
    let estimator = options.estimator.unwrap_or(if y.is_some() {
        EstimatorKind::CrossCovariance
    } else {
        EstimatorKind::Covariance
    });
    let op = build_estimator(&x, y.as_ref(), estimator, options)?;

    let mut report = ExperimentReport::new("decompose");
    report.set_param("x_path", options.x_path.display());
    if let Some(path) = &options.y_path {
        report.set_param("y_path", path.display());
    }
    report.set_param("kernel", &options.kernel);
    if let Some(kernel) = &options.out_kernel {
        report.set_param("out_kernel", kernel);
    }
    report.set_param("estimator", estimator);
    report.set_param("mode", options.mode);
    report.set_param("route", options.route);
    report.set_param_f64("epsilon", options.epsilon.epsilon());
    report.set_param_f64("threshold", options.threshold);
    if let Some(rank) = options.rank {
        report.set_param("rank", rank);
    }
    let cap = options.rank.unwrap_or(usize::MAX);

    match options.mode {
        Mode::Svd => {
            let svd = match options.route {
                Route::Qr => decomp::svd_via_qr(&op, options.threshold)?,
                Route::Aux => decomp::svd_via_aux(&op, options.threshold)?,
                Route::Block => decomp::svd_via_block(&op, options.threshold)?,
            };
            report.set_scalars("singular values", &svd.singular_values());
            for (i, triplet) in svd.triplets().iter().take(cap).enumerate() {
                let n = i + 1;
                report.set_array(&format!("left coefficients {n}"), coeff_rows(&triplet.u));
                report.set_array(&format!("right coefficients {n}"), coeff_rows(&triplet.v));
            }
        }
        Mode::Eig => {
            let eig = match options.route {
                Route::Qr => decomp::eig_via_qr(&op, options.threshold)?,
                Route::Aux => decomp::eig_via_aux(&op, options.threshold)?,
                Route::Block => {
                    return Err(Error::UnsupportedProblem(
                        "eigendecomposition has no block route; use `qr` or `aux`".into(),
                    ))
                }
            };
            let values: Vec<Vec<f64>> = eig
                .eigenvalues()
                .iter()
                .map(|v| vec![v.re, v.im])
                .collect();
            report.set_array("eigenvalues", values);
            for (i, pair) in eig.pairs().iter().take(cap).enumerate() {
                let rows: Vec<Vec<f64>> = pair
                    .function
                    .coefficients()
                    .iter()
                    .map(|c| vec![c.re, c.im])
                    .collect();
                report.set_array(&format!("eigenfunction coefficients {}", i + 1), rows);
            }
        }
    }
    report.write(out_path)?;
    Ok(report)
}

fn build_estimator(
    x: &DataSet,
    y: Option<&DataSet>,
    estimator: EstimatorKind,
    options: &DecomposeOptions,
) -> Result<EmpiricalOperator> {
    let k = &options.kernel;
    let reg = options.epsilon;
    match estimator {
        EstimatorKind::Covariance => {
            if y.is_some() {
                return Err(Error::UnsupportedProblem(
                    "the covariance estimator takes a single data set; \
                     drop the y file or pick a paired estimator"
                        .into(),
                ));
            }
            reject_out_kernel(options, estimator)?;
            estimators::covariance(x, k)
        }
        EstimatorKind::CrossCovariance => {
            let y = require_y(y, estimator)?;
            estimators::cross_covariance(x, y, k, &out_kernel_or_default(options))
        }
        EstimatorKind::Cme => {
            let y = require_y(y, estimator)?;
            estimators::cme(x, y, k, &out_kernel_or_default(options), reg)
        }
        EstimatorKind::Koopman => {
            let y = require_y(y, estimator)?;
            reject_out_kernel(options, estimator)?;
            estimators::koopman(x, y, k, reg)
        }
        EstimatorKind::PerronFrobenius => {
            let y = require_y(y, estimator)?;
            reject_out_kernel(options, estimator)?;
            estimators::perron_frobenius(x, y, k, reg)
        }
        EstimatorKind::Cca => {
            let y = require_y(y, estimator)?;
            estimators::cca_operator(x, y, k, &out_kernel_or_default(options), reg)
        }
    }
}

fn require_y(y: Option<&DataSet>, estimator: EstimatorKind) -> Result<&DataSet> {
    y.ok_or_else(|| {
        Error::UnsupportedProblem(format!(
            "the {estimator} estimator needs paired output data (a y file)"
        ))
    })
}

fn reject_out_kernel(options: &DecomposeOptions, estimator: EstimatorKind) -> Result<()> {
    if options.out_kernel.is_some() {
        return Err(Error::UnsupportedProblem(format!(
            "the {estimator} estimator uses one kernel; an output kernel does not apply"
        )));
    }
    Ok(())
}

fn out_kernel_or_default(options: &DecomposeOptions) -> Kernel {
    options
        .out_kernel
        .clone()
        .unwrap_or_else(|| options.kernel.clone())
}

/// Re-runs the experiment a report describes, writing the fresh report to
/// `out_path`. Reports carry the complete parameter set of their run, so the
/// replay reproduces the original numbers bitwise.
pub fn rerun(report: &ExperimentReport, out_path: &Path) -> Result<ExperimentReport> {
    match report.experiment() {
        "mercer" => run_mercer(
            report.param_usize("m")?,
            report.param_u64("seed")?,
            out_path,
        ),
        "crosscov" => run_crosscov(
            report.param_usize("m")?,
            report.param_f64("rho")?,
            report.param_f64("bandwidth")?,
            report.param_u64("seed")?,
            out_path,
        ),
        "doublegyre" => run_doublegyre(
            report.param_usize("nx")?,
            report.param_usize("ny")?,
            report.param_f64("tau")?,
            report.param_f64("bandwidth")?,
            report.param_f64("epsilon")?,
            out_path,
        ),
        "decompose" => {
            let options = DecomposeOptions {
                x_path: PathBuf::from(required(report, "x_path")?),
                y_path: report.param("y_path").map(PathBuf::from),
                kernel: required(report, "kernel")?.parse()?,
                out_kernel: report.param("out_kernel").map(str::parse).transpose()?,
                estimator: report.param("estimator").map(str::parse).transpose()?,
                mode: required(report, "mode")?.parse()?,
                route: required(report, "route")?.parse()?,
                epsilon: Regularizer::new(report.param_f64("epsilon")?)?,
                threshold: report.param_f64("threshold")?,
                rank: match report.param("rank") {
                    Some(_) => Some(report.param_usize("rank")?),
                    None => None,
                },
            };
            decompose_csv(&options, out_path)
        }
        other => Err(Error::ReportFormat {
            line: 0,
            message: format!("unknown experiment `{other}`"),
        }),
    }
}

fn required<'a>(report: &'a ExperimentReport, key: &str) -> Result<&'a str> {
    report.param(key).ok_or_else(|| Error::ReportFormat {
        line: 0,
        message: format!("missing parameter `{key}`"),
    })
}

fn coeff_rows(f: &RkhsFunction) -> Vec<Vec<f64>> {
    f.coefficients().iter().map(|&c| vec![c]).collect()
}

/// Rows [coordinates..., value] of an RKHS function evaluated on a data set.
fn grid_rows(f: &RkhsFunction, points: &DataSet) -> Result<Vec<Vec<f64>>> {
    let values = f.evaluate_on(points)?;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row = points.point(i).to_vec();
            row.push(v);
            row
        })
        .collect())
}

/// An evenly spaced 1-D evaluation grid including both endpoints.
fn line_grid(a: f64, b: f64, n: usize) -> Result<DataSet> {
    let step = (b - a) / (n - 1) as f64;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![a + step * i as f64]).collect();
    DataSet::from_rows(&rows)
}
