//! Sample sizes for ε-cover-samples and ε-KDE-samples, and the random draw.
//!
//! The asymptotic bounds hide their constants, which are exposed here as
//! `c_vc` and `c_rec`. All logarithms are natural.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::kernels::KernelSpec;
use crate::signatures::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Vc,
    #[serde(alias = "pd")]
    PositiveDefinite,
    Recursive,
}

impl fmt::Display for SampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMode::Vc => "vc",
            SampleMode::PositiveDefinite => "pd",
            SampleMode::Recursive => "recursive",
        })
    }
}

impl FromStr for SampleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vc" => Ok(SampleMode::Vc),
            "pd" | "positive_definite" | "positive-definite" => Ok(SampleMode::PositiveDefinite),
            "recursive" | "rec" => Ok(SampleMode::Recursive),
            other => Err(Error::InvalidParameter(format!(
                "unknown sample mode `{other}`; valid modes: vc, pd, recursive"
            ))),
        }
    }
}

pub const DEFAULT_C_VC: f64 = 0.5;
pub const DEFAULT_C_REC: f64 = 1.0;
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeConfig {
    pub mode: SampleMode,
    pub c_vc: f64,
    pub c_rec: f64,
    pub delta: f64,
}

impl SampleSizeConfig {
    /// Positive-definite mode where the kernel allows it, VC mode otherwise.
    pub fn for_kernel(spec: &KernelSpec) -> Self {
        let mode = if spec.is_positive_definite() {
            SampleMode::PositiveDefinite
        } else {
            SampleMode::Vc
        };
        SampleSizeConfig {
            mode,
            c_vc: DEFAULT_C_VC,
            c_rec: DEFAULT_C_REC,
            delta: DEFAULT_DELTA,
        }
    }

    pub fn with_mode(mut self, mode: SampleMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("delta", self.delta)?;
        for (name, v) in [("c_vc", self.c_vc), ("c_rec", self.c_rec)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(0, ∞)",
                });
            }
        }
        Ok(())
    }
}

fn ceil_count(v: f64) -> Result<usize> {
    if !v.is_finite() || v >= usize::MAX as f64 {
        return Err(Error::InvalidParameter(format!("sample size {v:e} is not representable")));
    }
    Ok((v.ceil() as usize).max(1))
}

/// Size of a random ε-cover-sample of a `d`-dimensional set.
pub fn cover_sample_size(spec: &KernelSpec, eps: f64, cfg: &SampleSizeConfig, d: usize) -> Result<usize> {
    check_open_unit("eps", eps)?;
    cfg.validate()?;
    let ln_inv_delta = (1.0 / cfg.delta).ln();
    match cfg.mode {
        SampleMode::Vc => {
            let dk = (d as f64).powi(spec.k() as i32);
            ceil_count(cfg.c_vc * (dk + ln_inv_delta) / (eps * eps))
        }
        SampleMode::PositiveDefinite => {
            if !spec.is_positive_definite() {
                return Err(Error::NotPositiveDefinite("positive-definite sample size"));
            }
            let v = ln_inv_delta / (49.0 * eps * eps);
            Ok(v.floor() as usize + 1)
        }
        SampleMode::Recursive => recursive_size(spec, eps, cfg),
    }
}

fn recursive_size(spec: &KernelSpec, eps: f64, cfg: &SampleSizeConfig) -> Result<usize> {
    let l = spec.lipschitz();
    let r = spec.critical_radius(eps)?;
    recursive_size_formula(l, r, spec.k(), eps, cfg.delta, cfg.c_rec)
}

/// `⌈C·L^{2k} r^{2k} ln^k(Lr/(εδ)) / ε^{2+2k}⌉` from explicit constants.
pub fn recursive_size_formula(l: f64, r: f64, k: u32, eps: f64, delta: f64, c: f64) -> Result<usize> {
    check_open_unit("eps", eps)?;
    check_open_unit("delta", delta)?;
    let k = k as i32;
    let lr = l * r;
    let log_term = (lr / (eps * delta)).ln().max(0.0);
    ceil_count(c * lr.powi(2 * k) * log_term.powi(k) / eps.powi(2 + 2 * k))
}

/// Size of a random ε-KDE-sample; same form as the recursive cover-sample bound.
pub fn kde_sample_size(spec: &KernelSpec, eps: f64, cfg: &SampleSizeConfig) -> Result<usize> {
    check_open_unit("eps", eps)?;
    cfg.validate()?;
    recursive_size(spec, eps, cfg)
}

/// `size` i.i.d. uniform draws with replacement; `x` itself when `size ≥ n`.
pub fn draw_sample(x: &PointSet, size: usize, seed: u64) -> Result<PointSet> {
    if x.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if size == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    if size >= x.len() {
        return Ok(x.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx: Vec<usize> = (0..size).map(|_| rng.random_range(0..x.len())).collect();
    x.select(&idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;

    fn pd(delta: f64) -> SampleSizeConfig {
        SampleSizeConfig::for_kernel(&KernelSpec::default()).with_delta(delta)
    }

    #[test]
    fn positive_definite_examples() {
        let g = KernelSpec::default();
        assert_eq!(cover_sample_size(&g, 0.1, &pd(0.01), 5).unwrap(), 10);
        assert_eq!(cover_sample_size(&g, 0.05, &pd(0.1), 5).unwrap(), 19);
        assert_eq!(cover_sample_size(&g, 0.2, &pd(0.1), 5).unwrap(), 2);
        let tri = KernelSpec::new(KernelFamily::Triangle, 1.0).unwrap();
        assert!(matches!(
            cover_sample_size(&tri, 0.1, &pd(0.1), 2),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn vc_formula() {
        let tri = KernelSpec::new(KernelFamily::Triangle, 1.0).unwrap();
        let cfg = SampleSizeConfig::for_kernel(&tri);
        assert_eq!(cfg.mode, SampleMode::Vc);
        // 0.5·(9 + ln 10)/0.01 = 565.13
        assert_eq!(cover_sample_size(&tri, 0.1, &cfg, 3).unwrap(), 566);
        assert!(cover_sample_size(&tri, 0.1, &cfg.with_delta(1.0), 3).is_err());
        assert!(cover_sample_size(&tri, 1.0, &cfg, 3).is_err());
    }

    #[test]
    fn recursive_formula_example() {
        let want = (1e6 * 100f64.ln().powi(2)).ceil() as usize;
        assert_eq!(recursive_size_formula(1.0, 1.0, 2, 0.1, 0.1, 1.0).unwrap(), want);
        assert!(recursive_size_formula(1.0, 1.0, 2, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn kde_size_monotone_in_eps() {
        for fam in KernelFamily::ALL {
            let spec = KernelSpec::new(fam, 1.0).unwrap();
            let cfg = SampleSizeConfig::for_kernel(&spec);
            let a = kde_sample_size(&spec, 0.1, &cfg).unwrap();
            let b = kde_sample_size(&spec, 0.2, &cfg).unwrap();
            assert!(a >= b, "{fam}: {a} < {b}");
        }
    }

    #[test]
    fn draw_sample_contract() {
        let x = PointSet::from_flat((0..10).map(f64::from).collect(), 1).unwrap();
        assert_eq!(draw_sample(&x, 10, 1).unwrap(), x);
        assert_eq!(draw_sample(&x, 50, 1).unwrap().id(), x.id());
        let a = draw_sample(&x, 4, 42).unwrap();
        let b = draw_sample(&x, 4, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|p| (0.0..10.0).contains(&p[0])));
        let one = PointSet::from_flat(vec![7.5, -1.0], 2).unwrap();
        assert_eq!(draw_sample(&one, 1, 0).unwrap().to_rows(), vec![vec![7.5, -1.0]]);
        assert!(draw_sample(&x, 0, 0).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("pd".parse::<SampleMode>().unwrap(), SampleMode::PositiveDefinite);
        assert_eq!("VC".parse::<SampleMode>().unwrap(), SampleMode::Vc);
        assert!("exact".parse::<SampleMode>().is_err());
    }
}
