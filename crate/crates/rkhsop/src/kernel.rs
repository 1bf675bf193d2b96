//! Kernel functions and their parameterization.
//!
//! A kernel is a symmetric positive-definite function on pairs of points.
//! Three families are provided:
//!
//! * `gaussian` — k(x,x′) = exp(−‖x−x′‖² / (2σ²)), optionally multiplied by
//!   the density prefactor (2πσ²)^(−d/2) ("normalized"),
//! * `polynomial` — k(x,x′) = (c + xᵀx′)^p,
//! * `linear` — k(x,x′) = xᵀx′.
//!
//! Kernels can be round-tripped through a compact specification string shared
//! with the command line: `gaussian:bw=<float>[:normalized]`,
//! `poly:degree=<int>:offset=<float>`, `linear`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A positive-definite kernel function.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// Radial Gaussian kernel with length-scale `bandwidth`. With
    /// `normalized`, the value is scaled by (2π·bandwidth²)^(−d/2), making a
    /// unit-mass density out of each kernel section.
    Gaussian { bandwidth: f64, normalized: bool },
    /// Inhomogeneous polynomial kernel (offset + xᵀx′)^degree.
    Polynomial { degree: u32, offset: f64 },
    /// Plain inner product xᵀx′.
    Linear,
}

impl Kernel {
    /// Gaussian kernel; `bandwidth` must be positive and finite.
    pub fn gaussian(bandwidth: f64, normalized: bool) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidKernelParameter(format!(
                "gaussian bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(Kernel::Gaussian {
            bandwidth,
            normalized,
        })
    }

    /// Polynomial kernel; `degree` ≥ 1 and `offset` ≥ 0.
    pub fn polynomial(degree: u32, offset: f64) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidKernelParameter(
                "polynomial degree must be at least 1".into(),
            ));
        }
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(Error::InvalidKernelParameter(format!(
                "polynomial offset must be non-negative and finite, got {offset}"
            )));
        }
        Ok(Kernel::Polynomial { degree, offset })
    }

    /// Linear kernel.
    pub fn linear() -> Self {
        Kernel::Linear
    }

    /// Evaluates k(x, x′). The two points must have equal dimension.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                context: "kernel evaluation",
                left: x.len(),
                right: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Evaluates k(x, x′) without the dimension check; used by Gram assembly
    /// loops after the dimensions have been validated once.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Gaussian {
                bandwidth,
                normalized,
            } => {
                let mut d2 = 0.0;
                for (a, b) in x.iter().zip(y) {
                    let d = a - b;
                    d2 += d * d;
                }
                let v = (-d2 / (2.0 * bandwidth * bandwidth)).exp();
                if normalized {
                    v * normalization_factor(bandwidth, x.len())
                } else {
                    v
                }
            }
            Kernel::Polynomial { degree, offset } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (offset + dot).powi(degree as i32)
            }
            Kernel::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

/// The density prefactor (2πσ²)^(−d/2) of the normalized Gaussian kernel.
fn normalization_factor(bandwidth: f64, dim: usize) -> f64 {
    (2.0 * std::f64::consts::PI * bandwidth * bandwidth).powf(-(dim as f64) / 2.0)
}

impl fmt::Display for Kernel {
    /// Formats the kernel as its specification string. The output parses back
    /// to an equal kernel, which experiment reports rely on.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Kernel::Gaussian {
                bandwidth,
                normalized,
            } => {
                write!(f, "gaussian:bw={bandwidth}")?;
                if normalized {
                    write!(f, ":normalized")?;
                }
                Ok(())
            }
            Kernel::Polynomial { degree, offset } => {
                write!(f, "poly:degree={degree}:offset={offset}")
            }
            Kernel::Linear => write!(f, "linear"),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = || Error::KernelParse(s.to_string());
        let mut parts = s.split(':');
        match parts.next().ok_or_else(parse_err)? {
            "linear" => {
                if parts.next().is_some() {
                    return Err(parse_err());
                }
                Ok(Kernel::Linear)
            }
            "gaussian" => {
                let bw_part = parts.next().ok_or_else(parse_err)?;
                let bw_str = bw_part.strip_prefix("bw=").ok_or_else(parse_err)?;
                let bandwidth: f64 = bw_str.parse().map_err(|_| parse_err())?;
                let normalized = match parts.next() {
                    None => false,
                    Some("normalized") => true,
                    Some(_) => return Err(parse_err()),
                };
                if parts.next().is_some() {
                    return Err(parse_err());
                }
                Kernel::gaussian(bandwidth, normalized)
            }
            "poly" => {
                let deg_part = parts.next().ok_or_else(parse_err)?;
                let deg_str = deg_part.strip_prefix("degree=").ok_or_else(parse_err)?;
                let degree: u32 = deg_str.parse().map_err(|_| parse_err())?;
                let off_part = parts.next().ok_or_else(parse_err)?;
                let off_str = off_part.strip_prefix("offset=").ok_or_else(parse_err)?;
                let offset: f64 = off_str.parse().map_err(|_| parse_err())?;
                if parts.next().is_some() {
                    return Err(parse_err());
                }
                Kernel::polynomial(degree, offset)
            }
            _ => Err(parse_err()),
        }
    }
}
