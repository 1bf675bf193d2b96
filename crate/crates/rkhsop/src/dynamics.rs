//! Data generation for the experiments: the periodically driven double gyre
//! velocity field, an adaptive Dormand–Prince 5(4) integrator, flow-map
//! datasets over a time lag, and seeded grid/random sampling.

use ndarray::Array2;
use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::data::DataSet;
use crate::error::{Error, Result};

/// Identifier of the random number generator behind all sampling here,
/// recorded in experiment reports so seeds are portable across
/// implementations.
pub const RNG_ALGORITHM: &str = "chacha20";

/// Parameters of the periodically driven double gyre flow on [0,2]×[0,1]:
/// amplitude A, perturbation δ, and angular driving frequency ω. The flow
/// has zero normal velocity on all four domain edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleGyreParams {
    pub amplitude: f64,
    pub delta: f64,
    pub omega: f64,
}

impl Default for DoubleGyreParams {
    fn default() -> Self {
        DoubleGyreParams {
            amplitude: 0.25,
            delta: 0.25,
            omega: 2.0 * std::f64::consts::PI,
        }
    }
}

/// The double gyre velocity at position `x = (x₁, x₂)` and time `t`:
///
/// ẋ₁ = −πA sin(πf(x₁,t)) cos(πx₂)
/// ẋ₂ =  πA cos(πf(x₁,t)) sin(πx₂) ∂f/∂x₁(x₁,t)
///
/// with f(y,t) = δ sin(ωt)·y² + (1 − 2δ sin(ωt))·y.
pub fn double_gyre_field(x: &[f64], t: f64, p: &DoubleGyreParams) -> [f64; 2] {
    use std::f64::consts::PI;
    let s = p.delta * (p.omega * t).sin();
    let f = s * x[0] * x[0] + (1.0 - 2.0 * s) * x[0];
    let df = 2.0 * s * x[0] + (1.0 - 2.0 * s);
    [
        -PI * p.amplitude * (PI * f).sin() * (PI * x[1]).cos(),
        PI * p.amplitude * (PI * f).cos() * (PI * x[1]).sin() * df,
    ]
}

/// Adaptive integrator configuration: relative/absolute tolerances, the
/// first trial step, and the step budget per trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-8,
            initial_step: 1e-3,
            max_steps: 100_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order weights; the last stage is evaluated at the new point (FSAL).
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates ẋ = field(x, t) from (t0, x0) to t1 with the Dormand–Prince
/// 5(4) embedded pair and the standard PI step-size controller. `field`
/// writes the derivative of `x` at time `t` into its output slice.
pub fn rk45_integrate<F>(
    field: F,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64], f64, &mut [f64]),
{
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(cfg.rel_tol) || !positive(cfg.abs_tol) || !positive(cfg.initial_step) {
        return Err(Error::Integration(
            "integrator tolerances and initial step must be positive".into(),
        ));
    }
    if t1 < t0 {
        return Err(Error::Integration(format!(
            "backward integration requested: t1 = {t1} < t0 = {t0}"
        )));
    }
    let n = x0.len();
    let mut y = x0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }

    // PI controller constants (β = 0.04) with growth/shrink clamps.
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const SAFE: f64 = 0.9;
    const FACC1: f64 = 5.0; // max shrink per step: h/5
    const FACC2: f64 = 0.1; // max growth per step: 10h

    let mut t = t0;
    let mut h = cfg.initial_step.min(t1 - t0);
    let mut facold = 1e-4f64;
    let mut k = vec![vec![0.0f64; n]; 7];
    let mut y_stage = vec![0.0f64; n];
    let mut y_new = vec![0.0f64; n];
    field(&y, t, &mut k[0]);

    for _ in 0..cfg.max_steps {
        if h < f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::Integration(format!(
                "step size underflow at t = {t:.6e} (h = {h:.3e})"
            )));
        }
        let last = h >= t1 - t;
        if last {
            h = t1 - t;
        }

        // Stages 2..=6.
        for (stage, coeffs) in [
            (1, &A2[..]),
            (2, &A3[..]),
            (3, &A4[..]),
            (4, &A5[..]),
            (5, &A6[..]),
        ] {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &a) in coeffs.iter().enumerate() {
                    acc += a * k[j][i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            field(&y_stage, t + C[stage] * h, &mut k[stage]);
        }
        // Fifth-order solution, then the FSAL stage at the new point.
        for i in 0..n {
            let mut acc = 0.0;
            for (j, &a) in A7.iter().enumerate() {
                acc += a * k[j][i];
            }
            y_new[i] = y[i] + h * acc;
        }
        field(&y_new, t + h, &mut k[6]);

        // Scaled RMS error of the embedded difference.
        let mut err = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, &c) in E.iter().enumerate() {
                e += c * k[j][i];
            }
            let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = h * e / sk;
            err += r * r;
        }
        err = (err / n as f64).sqrt();

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Lund stabilization: the factor uses the previous accepted
            // step's error before facold is updated.
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
            facold = err.max(1e-4);
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            if last || t >= t1 {
                return Ok(y);
            }
            h /= fac;
        } else {
            h /= (fac11 / SAFE).min(FACC1);
        }
    }
    Err(Error::Integration(format!(
        "no convergence within {} steps (t reached {t:.6e} of {t1:.6e})",
        cfg.max_steps
    )))
}

/// An axis-aligned rectangle, the sampling domain for grids and uniform
/// draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rectangle {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        if !(xmin < xmax && ymin < ymax) {
            return Err(Error::UnsupportedProblem(format!(
                "degenerate rectangle [{xmin}, {xmax}] × [{ymin}, {ymax}]"
            )));
        }
        Ok(Rectangle { xmin, xmax, ymin, ymax })
    }

    /// The double gyre domain [0,2] × [0,1].
    pub fn double_gyre() -> Self {
        Rectangle { xmin: 0.0, xmax: 2.0, ymin: 0.0, ymax: 1.0 }
    }

    /// The square [−h,h]².
    pub fn centered_square(half_width: f64) -> Result<Self> {
        Rectangle::new(-half_width, half_width, -half_width, half_width)
    }

    pub fn contains(&self, x: &[f64], margin: f64) -> bool {
        x[0] >= self.xmin - margin
            && x[0] <= self.xmax + margin
            && x[1] >= self.ymin - margin
            && x[1] <= self.ymax + margin
    }
}

/// The nx·ny centers of a regular nx×ny box discretization of the domain,
/// ordered row-major with x varying fastest.
pub fn grid_midpoints(nx: usize, ny: usize, domain: &Rectangle) -> Result<DataSet> {
    if nx == 0 || ny == 0 {
        return Err(Error::EmptyInput("grid with a zero-box dimension"));
    }
    let dx = (domain.xmax - domain.xmin) / nx as f64;
    let dy = (domain.ymax - domain.ymin) / ny as f64;
    let mut points = Array2::zeros((nx * ny, 2));
    for iy in 0..ny {
        for ix in 0..nx {
            let row = iy * nx + ix;
            points[[row, 0]] = domain.xmin + (ix as f64 + 0.5) * dx;
            points[[row, 1]] = domain.ymin + (iy as f64 + 0.5) * dy;
        }
    }
    DataSet::new(points)
}

/// Applies the double gyre flow map over lag τ to every point of `x`,
/// returning images paired row-for-row with the inputs.
pub fn flow_map_dataset(
    x: &DataSet,
    tau: f64,
    p: &DoubleGyreParams,
    cfg: &IntegratorConfig,
) -> Result<DataSet> {
    let mut images = Array2::zeros((x.len(), x.dim()));
    let field = |y: &[f64], t: f64, out: &mut [f64]| {
        let v = double_gyre_field(y, t, p);
        out.copy_from_slice(&v);
    };
    for i in 0..x.len() {
        let end = rk45_integrate(field, x.point(i), 0.0, tau, cfg)
            .map_err(|e| Error::Integration(format!("flow map row {i}: {e}")))?;
        for (j, &v) in end.iter().enumerate() {
            images[[i, j]] = v;
        }
    }
    DataSet::new(images)
}

/// m points drawn i.i.d. from the uniform distribution on the rectangle;
/// deterministic for a fixed seed.
pub fn sample_uniform(domain: &Rectangle, m: usize, seed: u64) -> Result<DataSet> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ux = Uniform::new(domain.xmin, domain.xmax);
    let uy = Uniform::new(domain.ymin, domain.ymax);
    let mut points = Array2::zeros((m, 2));
    for i in 0..m {
        points[[i, 0]] = rng.sample(ux);
        points[[i, 1]] = rng.sample(uy);
    }
    DataSet::new(points)
}

/// m paired scalar samples (xᵢ, yᵢ) of the two-component Gaussian mixture
/// ½(p₁(x)p₂(y) + p₂(x)p₁(y)) with p₁ = N(+1, ρ²) and p₂ = N(−1, ρ²):
/// a fair coin picks the component, then x and y are drawn from the two
/// opposite-mean normals. Deterministic for a fixed seed.
pub fn sample_mixture(m: usize, rho: f64, seed: u64) -> Result<(DataSet, DataSet)> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::UnsupportedProblem(format!(
            "mixture component width must be positive, got {rho}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let plus = Normal::new(1.0, rho).expect("validated width");
    let minus = Normal::new(-1.0, rho).expect("validated width");
    let mut xs = Array2::zeros((m, 1));
    let mut ys = Array2::zeros((m, 1));
    for i in 0..m {
        let first = rng.gen_bool(0.5);
        let (dx, dy) = if first { (&plus, &minus) } else { (&minus, &plus) };
        xs[[i, 0]] = dx.sample(&mut rng);
        ys[[i, 0]] = dy.sample(&mut rng);
    }
    Ok((DataSet::new(xs)?, DataSet::new(ys)?))
}
