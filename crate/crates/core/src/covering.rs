//! Metric nets of critical balls and ε-covers of a kernel range space.
//!
//! The lattice construction covers every critical ball `B(x_i, r(ε))` with an
//! axis-aligned grid of spacing `2τ/√d`, `τ = ε/L`, so that every point of the
//! ball lies within `τ` of a grid point and hence within `ε` in `d_Δ`. Points
//! outside all balls are handled by a single far point.
//!
//! The grid grows like `(r√d/τ)^d`, so for moderate dimension a sampled
//! greedy `d_Δ`-net is offered as well; its soundness is certified
//! empirically by the oracle module rather than by construction.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::signatures::{ddelta_bounded, signature_values, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Lattice,
    SampledNet,
    FarPointOnly,
    Pipeline,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverMeta {
    pub epsilon: f64,
    pub kernel: KernelSpec,
    pub seed: Option<u64>,
    pub ambient_dim: usize,
    pub construction: Construction,
}

/// A finite query set plus (normally) the far point `q_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub queries: Vec<Vec<f64>>,
    pub far_point: Option<Vec<f64>>,
    pub meta: CoverMeta,
}

impl Cover {
    /// Number of query points, counting the far point if present.
    pub fn size(&self) -> usize {
        self.queries.len() + usize::from(self.far_point.is_some())
    }

    /// Queries followed by the far point.
    pub fn all_points(&self) -> impl Iterator<Item = &[f64]> {
        self.queries
            .iter()
            .map(Vec::as_slice)
            .chain(self.far_point.as_deref())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.meta.ambient_dim;
        for q in self.all_points() {
            if q.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: q.len(),
                });
            }
            if !q.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("cover point"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CoverFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CoverFile = serde_json::from_str(text)?;
        let cover = file.into_cover()?;
        cover.validate()?;
        Ok(cover)
    }
}

#[derive(Serialize, Deserialize)]
struct CoverFile {
    epsilon: f64,
    kernel: KernelFamily,
    sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trunc_tau: Option<f64>,
    ambient_dim: usize,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default = "custom")]
    construction: Construction,
    far_point: Option<Vec<f64>>,
    queries: Vec<Vec<f64>>,
}

fn custom() -> Construction {
    Construction::Custom
}

impl From<&Cover> for CoverFile {
    fn from(c: &Cover) -> Self {
        let k = c.meta.kernel;
        CoverFile {
            epsilon: c.meta.epsilon,
            kernel: k.family(),
            sigma: k.sigma(),
            trunc_tau: (k.family() == KernelFamily::TruncatedGaussian).then(|| k.trunc_tau()),
            ambient_dim: c.meta.ambient_dim,
            seed: c.meta.seed,
            construction: c.meta.construction,
            far_point: c.far_point.clone(),
            queries: c.queries.clone(),
        }
    }
}

impl CoverFile {
    fn into_cover(self) -> Result<Cover> {
        let kernel = match self.trunc_tau {
            Some(t) => KernelSpec::with_trunc_tau(self.kernel, self.sigma, t)?,
            None => KernelSpec::new(self.kernel, self.sigma)?,
        };
        Ok(Cover {
            queries: self.queries,
            far_point: self.far_point,
            meta: CoverMeta {
                epsilon: self.epsilon,
                kernel,
                seed: self.seed,
                ambient_dim: self.ambient_dim,
                construction: self.construction,
            },
        })
    }
}

/// Lattice points of spacing `h` anchored at `origin` lying strictly inside
/// the ball `B(center, radius)`, as integer index vectors in lexicographic order.
fn lattice_in_ball(origin: &[f64], h: f64, center: &[f64], radius: f64) -> Vec<Vec<i64>> {
    let d = center.len();
    let r2 = radius * radius;
    let mut out = Vec::new();
    let mut idx = vec![0i64; d];
    fn rec(
        k: usize,
        acc: f64,
        origin: &[f64],
        h: f64,
        center: &[f64],
        r2: f64,
        idx: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if k == center.len() {
            if acc < r2 {
                out.push(idx.clone());
            }
            return;
        }
        let rem = (r2 - acc).max(0.0).sqrt();
        let lo = ((center[k] - rem - origin[k]) / h).ceil() as i64;
        let hi = ((center[k] + rem - origin[k]) / h).floor() as i64;
        for i in lo..=hi {
            let c = origin[k] + i as f64 * h - center[k];
            let a = acc + c * c;
            if a < r2 {
                idx[k] = i;
                rec(k + 1, a, origin, h, center, r2, idx, out);
            }
        }
    }
    rec(0, 0.0, origin, h, center, r2, &mut idx, &mut out);
    out
}

fn lattice_point(origin: &[f64], h: f64, idx: &[i64]) -> Vec<f64> {
    origin.iter().zip(idx).map(|(o, &i)| o + i as f64 * h).collect()
}

/// Lattice of spacing `2·tau/√d` through `center`, restricted to the open ball
/// of radius `radius + tau`. Every point of `B(center, radius)` is within
/// `tau` of some returned point.
pub fn ball_net(center: &[f64], radius: f64, tau: f64) -> Result<Vec<Vec<f64>>> {
    if !(radius > 0.0) || !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ball_net needs radius > 0 and tau > 0 (got {radius}, {tau})"
        )));
    }
    if center.is_empty() || !center.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("ball_net center"));
    }
    let h = 2.0 * tau / (center.len() as f64).sqrt();
    Ok(lattice_in_ball(center, h, center, radius + tau)
        .iter()
        .map(|i| lattice_point(center, h, i))
        .collect())
}

/// A point farther than `r(eps)` from every point of `x`: the largest first
/// coordinate plus `2·r(eps)` on axis 1, zeros elsewhere.
pub fn far_point(spec: &KernelSpec, x: &PointSet, eps: f64) -> Result<Vec<f64>> {
    let r = spec.critical_radius(eps)?;
    Ok(far_point_at(x, r))
}

fn far_point_at(x: &PointSet, r: f64) -> Vec<f64> {
    let max0 = x.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut q = vec![0.0; x.dim()];
    q[0] = max0 + 2.0 * r;
    q
}

fn ln_unit_ball_volume(d: usize) -> f64 {
    // ln(π^{d/2} / Γ(d/2 + 1))
    let half = d as f64 / 2.0;
    let ln_gamma = if d.is_multiple_of(2) {
        (1..=d / 2).map(|j| (j as f64).ln()).sum::<f64>()
    } else {
        0.5 * std::f64::consts::PI.ln() + (1..=d.div_ceil(2)).map(|j| (j as f64 - 0.5).ln()).sum::<f64>()
    };
    half * std::f64::consts::PI.ln() - ln_gamma
}

/// Rough number of lattice points the naive cover would enumerate.
pub fn lattice_size_estimate(spec: &KernelSpec, x: &PointSet, eps: f64) -> Result<f64> {
    let r = spec.critical_radius(eps)?;
    let tau = eps / spec.lipschitz();
    let d = x.dim() as f64;
    let h = 2.0 * tau / d.sqrt();
    let big_r = r + tau;
    let ln_vol = ln_unit_ball_volume(x.dim()) + d * big_r.ln() - d * h.ln();
    let ln_box = d * (2.0 * big_r / h + 1.0).ln();
    Ok(x.len() as f64 * ln_vol.min(ln_box).exp().max(1.0))
}

fn far_only(spec: &KernelSpec, x: &PointSet, eps: f64) -> Result<Cover> {
    Ok(Cover {
        queries: Vec::new(),
        far_point: Some(far_point(spec, x, 0.5)?),
        meta: CoverMeta {
            epsilon: eps,
            kernel: *spec,
            seed: None,
            ambient_dim: x.dim(),
            construction: Construction::FarPointOnly,
        },
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "(0, 1)",
        })
    }
}

/// The grid cover: union of `ball_net(x_i, r(ε), ε/L)` over `x`, on one
/// global lattice anchored at the bounding-box minimum, plus the far point.
pub fn naive_cover(spec: &KernelSpec, x: &PointSet, eps: f64) -> Result<Cover> {
    naive_cover_budgeted(spec, x, eps, None)
}

/// As [`naive_cover`], refusing up front when the size estimate exceeds `budget`.
pub fn naive_cover_budgeted(
    spec: &KernelSpec,
    x: &PointSet,
    eps: f64,
    budget: Option<usize>,
) -> Result<Cover> {
    check_eps(eps)?;
    if eps >= 1.0 {
        return far_only(spec, x, eps);
    }
    if let Some(budget) = budget {
        let estimate = lattice_size_estimate(spec, x, eps)?;
        if estimate > budget as f64 {
            return Err(Error::LatticeTooLarge { estimate, budget });
        }
    }
    let r = spec.critical_radius(eps)?;
    let tau = eps / spec.lipschitz();
    let h = 2.0 * tau / (x.dim() as f64).sqrt();
    let (origin, _) = x.bounding_box();

    let per_ball: Vec<Vec<Vec<i64>>> = (0..x.len())
        .into_par_iter()
        .map(|i| lattice_in_ball(&origin, h, x.point(i), r + tau))
        .collect();

    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut queries = Vec::new();
    for ball in per_ball {
        for idx in ball {
            if !seen.contains(&idx) {
                queries.push(lattice_point(&origin, h, &idx));
                seen.insert(idx);
            }
        }
    }
    Ok(Cover {
        queries,
        far_point: Some(far_point_at(x, r)),
        meta: CoverMeta {
            epsilon: eps,
            kernel: *spec,
            seed: None,
            ambient_dim: x.dim(),
            construction: Construction::Lattice,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetStrategy {
    Lattice,
    Sampled,
    /// Lattice when its size estimate fits the budget, sampled otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub strategy: NetStrategy,
    pub lattice_budget: usize,
    pub candidates: usize,
    /// Greedy separation of the sampled net as a fraction of ε.
    pub radius_factor: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            strategy: NetStrategy::Auto,
            lattice_budget: 200_000,
            candidates: 20_000,
            radius_factor: 0.5,
        }
    }
}

/// ε-cover of `(x, K)` by the configured strategy.
pub fn build_net_cover(spec: &KernelSpec, x: &PointSet, eps: f64, cfg: &NetConfig, seed: u64) -> Result<Cover> {
    check_eps(eps)?;
    if eps >= 1.0 {
        return far_only(spec, x, eps);
    }
    match cfg.strategy {
        NetStrategy::Lattice => naive_cover_budgeted(spec, x, eps, Some(cfg.lattice_budget)),
        NetStrategy::Sampled => sampled_net_cover(spec, x, eps, cfg, seed),
        NetStrategy::Auto => match naive_cover_budgeted(spec, x, eps, Some(cfg.lattice_budget)) {
            Err(Error::LatticeTooLarge { estimate, .. }) => {
                log::info!("lattice estimate {estimate:.3e} over budget; using sampled net");
                sampled_net_cover(spec, x, eps, cfg, seed)
            }
            other => other,
        },
    }
}

/// Candidate queries: the points of `x`, points in their critical balls and
/// jittered points on segments between pairs.
fn net_candidates(x: &PointSet, r: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = x.len();
    let d = x.dim();
    let mut out: Vec<Vec<f64>> = x.to_rows();
    let extra = count.saturating_sub(n);
    let n_seg = if n >= 2 { extra * 3 / 10 } else { 0 };
    let n_ball = extra - n_seg;
    let mut dir = vec![0.0; d];
    for j in 0..n_ball {
        let c = x.point(j % n);
        unit_direction(&mut dir, rng);
        let t = r * rng.random::<f64>();
        out.push(c.iter().zip(&dir).map(|(a, u)| a + t * u).collect());
    }
    let jitter = 0.25 * r / (d as f64).sqrt();
    for _ in 0..n_seg {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let lam: f64 = rng.random();
        let (a, b) = (x.point(i), x.point(j));
        out.push(
            a.iter()
                .zip(b)
                .map(|(u, v)| {
                    let z: f64 = StandardNormal.sample(rng);
                    (1.0 - lam) * u + lam * v + jitter * z
                })
                .collect(),
        );
    }
    out
}

pub(crate) fn unit_direction(dir: &mut [f64], rng: &mut ChaCha8Rng) {
    loop {
        let mut norm2 = 0.0;
        for v in dir.iter_mut() {
            *v = StandardNormal.sample(rng);
            norm2 += *v * *v;
        }
        if norm2 > 1e-24 {
            let inv = 1.0 / norm2.sqrt();
            dir.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

/// Greedy `d_Δ`-net over sampled candidates at separation `radius_factor·ε`.
/// Candidates already within that distance of the far point are dropped.
pub fn sampled_net_cover(spec: &KernelSpec, x: &PointSet, eps: f64, cfg: &NetConfig, seed: u64) -> Result<Cover> {
    check_eps(eps)?;
    if !(cfg.radius_factor > 0.0 && cfg.radius_factor <= 1.0) {
        return Err(Error::OutOfRange {
            name: "radius_factor",
            value: cfg.radius_factor,
            range: "(0, 1]",
        });
    }
    let r = spec.critical_radius(eps)?;
    let far = far_point_at(x, r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates = net_candidates(x, r, cfg.candidates.max(x.len()), &mut rng);
    let sigs: Vec<Vec<f64>> = candidates
        .par_iter()
        .map(|c| signature_values(spec, x, c))
        .collect();
    let far_sig = signature_values(spec, x, &far);
    let rho = cfg.radius_factor * eps;

    let mut chosen: Vec<usize> = Vec::new();
    for (i, s) in sigs.iter().enumerate() {
        if ddelta_bounded(s, &far_sig, rho) <= rho {
            continue;
        }
        let covered = chosen
            .par_iter()
            .any(|&j| ddelta_bounded(s, &sigs[j], rho) <= rho);
        if !covered {
            chosen.push(i);
        }
    }
    let mut candidates = candidates;
    let queries = chosen.iter().map(|&i| std::mem::take(&mut candidates[i])).collect();
    Ok(Cover {
        queries,
        far_point: Some(far),
        meta: CoverMeta {
            epsilon: eps,
            kernel: *spec,
            seed: Some(seed),
            ambient_dim: x.dim(),
            construction: Construction::SampledNet,
        },
    })
}
