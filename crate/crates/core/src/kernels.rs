//! Centrally symmetric kernels `K(p, x) = g(‖p − x‖)` normalized to a maximum of 1.
//!
//! Each family carries its Lipschitz constant `L`, its ε-critical radius `r(ε)`
//! (the smallest radius beyond which `g` stays below ε) and the exponent `k`
//! of its simple-computability class, which the sampling module uses to pick
//! a sample-size formula.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian,
    Laplace,
    Epanechnikov,
    Triangle,
    Quartic,
    Triweight,
    TruncatedGaussian,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 7] = [
        KernelFamily::Gaussian,
        KernelFamily::Laplace,
        KernelFamily::Epanechnikov,
        KernelFamily::Triangle,
        KernelFamily::Quartic,
        KernelFamily::Triweight,
        KernelFamily::TruncatedGaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Laplace => "laplace",
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::Triangle => "triangle",
            KernelFamily::Quartic => "quartic",
            KernelFamily::Triweight => "triweight",
            KernelFamily::TruncatedGaussian => "truncated_gaussian",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        KernelFamily::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::UnknownKernel(s.to_string()))
    }
}

pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_TRUNC_TAU: f64 = 0.1;

/// A kernel family together with its bandwidth and (for the truncated
/// Gaussian) its truncation level. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    sigma: f64,
    trunc_tau: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            family: KernelFamily::Gaussian,
            sigma: DEFAULT_SIGMA,
            trunc_tau: DEFAULT_TRUNC_TAU,
        }
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, sigma: f64) -> Result<Self> {
        Self::with_trunc_tau(family, sigma, DEFAULT_TRUNC_TAU)
    }

    pub fn with_trunc_tau(family: KernelFamily, sigma: f64, trunc_tau: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::OutOfRange {
                name: "sigma",
                value: sigma,
                range: "(0, ∞)",
            });
        }
        check_open_unit("trunc_tau", trunc_tau)?;
        Ok(KernelSpec {
            family,
            sigma,
            trunc_tau,
        })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, sigma)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn trunc_tau(&self) -> f64 {
        self.trunc_tau
    }

    /// Radial profile `g(dist)`, clamped to `[0, 1]`.
    #[inline]
    pub fn profile(&self, dist: f64) -> f64 {
        let u = dist / self.sigma;
        let v = match self.family {
            KernelFamily::Gaussian => (-u * u).exp(),
            KernelFamily::Laplace => (-u).exp(),
            KernelFamily::Epanechnikov => 1.0 - u * u,
            KernelFamily::Triangle => 1.0 - u,
            KernelFamily::Quartic => {
                let t = (1.0 - u * u).max(0.0);
                t * t
            }
            KernelFamily::Triweight => {
                let t = (1.0 - u * u).max(0.0);
                t * t * t
            }
            KernelFamily::TruncatedGaussian => {
                ((-u * u).exp() - self.trunc_tau) / (1.0 - self.trunc_tau)
            }
        };
        v.clamp(0.0, 1.0)
    }

    /// Same as [`profile`](Self::profile) but from a squared distance; avoids
    /// the square root for the Gaussian families.
    #[inline]
    pub fn profile_sq(&self, dist2: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-dist2 / (self.sigma * self.sigma)).exp().clamp(0.0, 1.0),
            KernelFamily::TruncatedGaussian => {
                let g = (-dist2 / (self.sigma * self.sigma)).exp();
                ((g - self.trunc_tau) / (1.0 - self.trunc_tau)).clamp(0.0, 1.0)
            }
            KernelFamily::Epanechnikov => (1.0 - dist2 / (self.sigma * self.sigma)).clamp(0.0, 1.0),
            _ => self.profile(dist2.sqrt()),
        }
    }

    /// Kernel value without dimension or finiteness checks.
    #[inline]
    pub fn eval_unchecked(&self, p: &[f64], x: &[f64]) -> f64 {
        self.profile_sq(sq_dist(p, x))
    }

    pub fn eval(&self, p: &[f64], x: &[f64]) -> Result<f64> {
        if p.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                got: x.len(),
            });
        }
        if !p.iter().chain(x).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("kernel argument"));
        }
        Ok(self.eval_unchecked(p, x))
    }

    pub fn lipschitz(&self) -> f64 {
        let s = self.sigma;
        match self.family {
            KernelFamily::Gaussian => (2.0 / std::f64::consts::E).sqrt() / s,
            KernelFamily::Laplace | KernelFamily::Triangle => 1.0 / s,
            KernelFamily::Epanechnikov => 2.0 / s,
            KernelFamily::Quartic => 8.0 / (3.0 * 3f64.sqrt() * s),
            KernelFamily::Triweight => 96.0 / (25.0 * 5f64.sqrt() * s),
            // The 1/(1 − τ) rescaling multiplies the Gaussian slope.
            KernelFamily::TruncatedGaussian => {
                (2.0 / std::f64::consts::E).sqrt() / (s * (1.0 - self.trunc_tau))
            }
        }
    }

    pub fn critical_radius(&self, eps: f64) -> Result<f64> {
        check_open_unit("eps", eps)?;
        let s = self.sigma;
        Ok(match self.family {
            KernelFamily::Gaussian => s * (1.0 / eps).ln().sqrt(),
            KernelFamily::Laplace => s * (1.0 / eps).ln(),
            KernelFamily::Epanechnikov => s * (1.0 - eps).sqrt(),
            KernelFamily::Triangle => s * (1.0 - eps),
            KernelFamily::Quartic => s * (1.0 - eps.sqrt()).sqrt(),
            KernelFamily::Triweight => s * (1.0 - eps.cbrt()).sqrt(),
            KernelFamily::TruncatedGaussian => {
                let t = self.trunc_tau;
                s * (1.0 / (t + (1.0 - t) * eps)).ln().sqrt()
            }
        })
    }

    /// Exponent `k` of the simple-computability class (Laplace: super-level sets only).
    pub fn k(&self) -> u32 {
        match self.family {
            KernelFamily::Laplace => 3,
            _ => 2,
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        matches!(self.family, KernelFamily::Gaussian | KernelFamily::Laplace)
    }

    pub fn is_simply_computable(&self) -> bool {
        !matches!(self.family, KernelFamily::Laplace)
    }

    /// Membership of `x` in the semi-super-level set `{x : |K(p,x) − K(q,x)| ≥ tau}`.
    pub fn semi_level_member(&self, p: &[f64], q: &[f64], tau: f64, x: &[f64]) -> Result<bool> {
        if !(tau > 0.0) {
            return Err(Error::OutOfRange {
                name: "tau",
                value: tau,
                range: "(0, ∞)",
            });
        }
        let kp = self.eval(p, x)?;
        let kq = self.eval(q, x)?;
        Ok((kp - kq).abs() >= tau)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(σ={})", self.family, self.sigma)?;
        if self.family == KernelFamily::TruncatedGaussian {
            write!(f, "[τ={}]", self.trunc_tau)?;
        }
        Ok(())
    }
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}
