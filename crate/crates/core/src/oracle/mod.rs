//! Brute-force checks of the cover, cover-sample, KDE-sample and terminal
//! embedding definitions.
//!
//! The definitions quantify over all of `ℝ^d`; the oracles replace that with
//! Monte Carlo queries. 80% of queries are uniform in the union of the
//! ε-critical balls around `X` (where signatures vary), 20% are volume-uniform
//! in shells of radius `[r, 2r]` around data points but outside the union.
//! Trial `t` uses its own ChaCha stream, so reports are identical for a given
//! seed regardless of thread count.

mod rademacher;
mod shatter;

pub use rademacher::empirical_rademacher;
pub use shatter::{shatter_search_1d, shatter_search_1d_at, ShatterWitness};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::{unit_direction, Cover};
use crate::error::{Error, Result};
use crate::kernels::{sq_dist, KernelSpec};
use crate::signatures::{ddelta_bounded, ddelta_values, kde_unchecked, signature_values, PointSet};
use crate::terminal_jl::TerminalEmbedding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    None,
    Point(Vec<f64>),
    Pair(Vec<f64>, Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_error: f64,
    pub worst_witness: Witness,
    pub trials: usize,
    pub threshold: f64,
    pub passed: bool,
    pub seed: u64,
    pub query_distribution: String,
}

impl VerificationReport {
    fn new(max_error: f64, worst_witness: Witness, trials: usize, threshold: f64, seed: u64) -> Self {
        VerificationReport {
            max_error,
            worst_witness,
            trials,
            threshold,
            passed: max_error <= threshold,
            seed,
            query_distribution: QUERY_DISTRIBUTION.to_string(),
        }
    }
}

const QUERY_DISTRIBUTION: &str =
    "80% uniform in the union of critical balls, 20% volume-uniform shells [r, 2r] outside the union";

/// Draws verification queries around a point set.
#[derive(Debug, Clone)]
pub struct QuerySampler<'a> {
    x: &'a PointSet,
    r: f64,
}

const SHELL_ATTEMPTS: usize = 1000;

impl<'a> QuerySampler<'a> {
    /// Critical balls at level `eps`; levels at or above 1 fall back to 1/2.
    pub fn new(spec: &KernelSpec, x: &'a PointSet, eps: f64) -> Result<Self> {
        let level = if eps < 1.0 { eps } else { 0.5 };
        Ok(QuerySampler {
            x,
            r: spec.critical_radius(level)?,
        })
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    fn around(&self, center: &[f64], rho: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut dir = vec![0.0; center.len()];
        unit_direction(&mut dir, rng);
        center.iter().zip(&dir).map(|(c, u)| c + rho * u).collect()
    }

    /// Uniform in the union of the balls: uniform in a random ball `i`,
    /// accepted when no ball `j < i` contains it.
    pub fn inside(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = self.x.dim() as f64;
        let r2 = self.r * self.r;
        loop {
            let i = rng.random_range(0..self.x.len());
            let rho = self.r * rng.random::<f64>().powf(1.0 / d);
            let p = self.around(self.x.point(i), rho, rng);
            if self.x.iter().take(i).all(|xj| sq_dist(&p, xj) > r2) {
                return p;
            }
        }
    }

    /// Volume-uniform in the shell `r ≤ ‖p − x_i‖ ≤ 2r` of a random data point,
    /// rejected while inside the union.
    pub fn outside(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let d = self.x.dim() as f64;
        let r2 = self.r * self.r;
        let mut p = Vec::new();
        for _ in 0..SHELL_ATTEMPTS {
            let c = self.x.point(rng.random_range(0..self.x.len()));
            let u: f64 = rng.random();
            // ρ^d uniform in [r^d, (2r)^d], computed in log space.
            let ln_scale = if d * std::f64::consts::LN_2 < 700.0 {
                (1.0 + u * (2f64.powf(d) - 1.0)).ln()
            } else {
                u.max(f64::MIN_POSITIVE).ln() + d * std::f64::consts::LN_2
            };
            let rho = self.r * (ln_scale / d).exp();
            p = self.around(c, rho, rng);
            if self.x.iter().all(|xi| sq_dist(&p, xi) > r2) {
                return p;
            }
        }
        p
    }

    /// Query number `trial`: every fifth is a shell query.
    pub fn query(&self, trial: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        if trial % 5 == 4 {
            self.outside(rng)
        } else {
            self.inside(rng)
        }
    }
}

pub(crate) fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn worst<T: Send>(items: impl ParallelIterator<Item = (usize, f64, T)>) -> Option<(usize, f64, T)> {
    items.reduce_with(|a, b| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    })
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(Error::InvalidParameter("trials must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Largest over sampled queries `p` of `min_{q ∈ Q ∪ {q_∞}} d_Δ(R_p, R_q)`.
pub fn verify_cover(
    spec: &KernelSpec,
    x: &PointSet,
    cover: &Cover,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_trials(trials)?;
    if cover.size() == 0 {
        return Err(Error::InvalidParameter("cover is empty".into()));
    }
    if cover.meta.ambient_dim != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: cover.meta.ambient_dim,
        });
    }
    cover.validate()?;
    let sampler = QuerySampler::new(spec, x, eps)?;
    let q_sigs: Vec<Vec<f64>> = cover
        .all_points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|q| signature_values(spec, x, q))
        .collect();
    let found = worst((0..trials).into_par_iter().map(|t| {
        let mut rng = trial_rng(seed, t);
        let p = sampler.query(t, &mut rng);
        let rp = signature_values(spec, x, &p);
        let mut best = f64::INFINITY;
        for qs in &q_sigs {
            best = best.min(ddelta_bounded(&rp, qs, best));
            if best == 0.0 {
                break;
            }
        }
        (t, best, p)
    }))
    .expect("trials ≥ 1");
    Ok(VerificationReport::new(found.1, Witness::Point(found.2), trials, eps, seed))
}

/// Exhaustive variant over caller-supplied queries.
pub fn cover_error_on(spec: &KernelSpec, x: &PointSet, cover: &Cover, queries: &[Vec<f64>]) -> Result<(f64, usize)> {
    cover.validate()?;
    let q_sigs: Vec<Vec<f64>> = cover.all_points().map(|q| signature_values(spec, x, q)).collect();
    let res = worst(queries.par_iter().enumerate().map(|(i, p)| {
        let rp = signature_values(spec, x, p);
        let best = q_sigs
            .iter()
            .map(|qs| ddelta_values(&rp, qs))
            .fold(f64::INFINITY, f64::min);
        (i, best, ())
    }));
    Ok(res.map(|(i, e, _)| (e, i)).unwrap_or((0.0, 0)))
}

fn check_subset_dims(x: &PointSet, s: &PointSet) -> Result<()> {
    if x.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: s.dim(),
        });
    }
    Ok(())
}

/// Largest over sampled pairs of `|d_Δ^X(R_p, R_q) − d_Δ^S(R_p, R_q)|`.
pub fn verify_cover_sample(
    spec: &KernelSpec,
    x: &PointSet,
    s: &PointSet,
    eps: f64,
    pair_trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_trials(pair_trials)?;
    check_subset_dims(x, s)?;
    let sampler = QuerySampler::new(spec, x, eps)?;
    let found = worst((0..pair_trials).into_par_iter().map(|t| {
        let mut rng = trial_rng(seed, t);
        let p = sampler.query(t, &mut rng);
        let q = sampler.query(t + 1, &mut rng);
        let dx = ddelta_values(&signature_values(spec, x, &p), &signature_values(spec, x, &q));
        let ds = ddelta_values(&signature_values(spec, s, &p), &signature_values(spec, s, &q));
        (t, (dx - ds).abs(), (p, q))
    }))
    .expect("trials ≥ 1");
    let (p, q) = found.2;
    Ok(VerificationReport::new(found.1, Witness::Pair(p, q), pair_trials, eps, seed))
}

/// Largest over sampled queries of `|kde_X(q) − kde_S(q)|`, against `(1 + c)·ε`.
pub fn verify_kde_sample(
    spec: &KernelSpec,
    x: &PointSet,
    s: &PointSet,
    eps: f64,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_trials(trials)?;
    check_subset_dims(x, s)?;
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::OutOfRange {
            name: "c",
            value: c,
            range: "[0, ∞)",
        });
    }
    let sampler = QuerySampler::new(spec, x, eps)?;
    let found = worst((0..trials).into_par_iter().map(|t| {
        let mut rng = trial_rng(seed, t);
        let q = sampler.query(t, &mut rng);
        let err = (kde_unchecked(spec, x, &q) - kde_unchecked(spec, s, &q)).abs();
        (t, err, q)
    }))
    .expect("trials ≥ 1");
    Ok(VerificationReport::new(
        found.1,
        Witness::Point(found.2),
        trials,
        (1.0 + c) * eps,
        seed,
    ))
}

/// Distortion of outer queries against every anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalReport {
    pub queries: usize,
    pub embedded: usize,
    pub infeasible: usize,
    pub pairs: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Largest `1 − ‖f(q) − f(x)‖/‖q − x‖` below zero slack.
    pub lower_violation: f64,
    /// Largest `‖f(q) − f(x)‖/‖q − x‖ − (1 + ε′)`.
    pub upper_excess: f64,
    /// Largest relative error of the nearest-anchor distance.
    pub nearest_rel_error: f64,
    pub worst_witness: Witness,
    pub eps_prime: f64,
    pub slack: f64,
    pub passed: bool,
}

pub fn verify_terminal(emb: &TerminalEmbedding, queries: &[Vec<f64>], eps_prime: f64, slack: f64) -> Result<TerminalReport> {
    let anchors = emb.anchors();
    for q in queries {
        anchors.check_point(q)?;
    }
    let images: Vec<Vec<f64>> = (0..anchors.len()).map(|i| emb.anchor_image(i)).collect();
    struct Acc {
        embedded: usize,
        infeasible: usize,
        pairs: usize,
        min_ratio: (f64, usize),
        max_ratio: (f64, usize),
        nearest: f64,
    }
    let per: Vec<Result<Option<Acc>>> = queries
        .par_iter()
        .enumerate()
        .map(|(qi, q)| {
            let (nn, d2) = emb.nearest_anchor(q);
            if d2 == 0.0 {
                return Ok(None);
            }
            let out = match emb.embed_detailed(q) {
                Ok(o) => o,
                Err(Error::Infeasible { .. }) => {
                    return Ok(Some(Acc {
                        embedded: 0,
                        infeasible: 1,
                        pairs: 0,
                        min_ratio: (f64::INFINITY, qi),
                        max_ratio: (f64::NEG_INFINITY, qi),
                        nearest: 0.0,
                    }))
                }
                Err(e) => return Err(e),
            };
            let mut acc = Acc {
                embedded: 1,
                infeasible: 0,
                pairs: 0,
                min_ratio: (f64::INFINITY, qi),
                max_ratio: (f64::NEG_INFINITY, qi),
                nearest: 0.0,
            };
            for (i, x) in anchors.iter().enumerate() {
                let orig = sq_dist(q, x).sqrt();
                let emb_d = sq_dist(&out.image, &images[i]).sqrt();
                let ratio = emb_d / orig;
                if i == nn {
                    acc.nearest = (ratio - 1.0).abs();
                }
                acc.pairs += 1;
                acc.min_ratio.0 = acc.min_ratio.0.min(ratio);
                acc.max_ratio.0 = acc.max_ratio.0.max(ratio);
            }
            Ok(Some(acc))
        })
        .collect();
    let mut total = Acc {
        embedded: 0,
        infeasible: 0,
        pairs: 0,
        min_ratio: (f64::INFINITY, 0),
        max_ratio: (f64::NEG_INFINITY, 0),
        nearest: 0.0,
    };
    let mut considered = 0;
    for r in per {
        let Some(a) = r? else { continue };
        considered += 1;
        total.embedded += a.embedded;
        total.infeasible += a.infeasible;
        total.pairs += a.pairs;
        if a.min_ratio.0 < total.min_ratio.0 {
            total.min_ratio = a.min_ratio;
        }
        if a.max_ratio.0 > total.max_ratio.0 {
            total.max_ratio = a.max_ratio;
        }
        total.nearest = total.nearest.max(a.nearest);
    }
    let lower_violation = (1.0 - total.min_ratio.0).max(0.0);
    let upper_excess = (total.max_ratio.0 - (1.0 + eps_prime)).max(0.0);
    let witness_idx = if lower_violation >= upper_excess {
        total.min_ratio.1
    } else {
        total.max_ratio.1
    };
    let worst_witness = if considered == 0 {
        Witness::None
    } else {
        Witness::Point(queries[witness_idx].clone())
    };
    let passed = total.infeasible == 0 && lower_violation <= slack && upper_excess <= slack;
    Ok(TerminalReport {
        queries: considered,
        embedded: total.embedded,
        infeasible: total.infeasible,
        pairs: total.pairs,
        min_ratio: total.min_ratio.0,
        max_ratio: total.max_ratio.0,
        lower_violation,
        upper_excess,
        nearest_rel_error: total.nearest,
        worst_witness,
        eps_prime,
        slack,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{far_point, naive_cover, Construction, CoverMeta};
    use crate::kernels::KernelFamily;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::from_flat(xs.to_vec(), 1).unwrap()
    }

    fn cover_of(spec: &KernelSpec, x: &PointSet, queries: Vec<Vec<f64>>, far: Option<Vec<f64>>, eps: f64) -> Cover {
        Cover {
            queries,
            far_point: far,
            meta: CoverMeta {
                epsilon: eps,
                kernel: *spec,
                seed: None,
                ambient_dim: x.dim(),
                construction: Construction::Custom,
            },
        }
    }


    #[test]
    fn inside_is_uniform_on_the_union() {
        let g = KernelSpec::default();
        let x = PointSet::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let sampler = QuerySampler::new(&g, &x, 0.5).unwrap();
        let r = sampler.radius();
        let mut rng = trial_rng(1, 0);
        let trials = 40_000;
        let mut overlap = 0;
        for _ in 0..trials {
            let p = sampler.inside(&mut rng)[0];
            assert!(p >= -r && p <= 1.0 + r);
            if p >= 1.0 - r && p <= r {
                overlap += 1;
            }
        }
        let want = (2.0 * r - 1.0) / (1.0 + 2.0 * r);
        let got = overlap as f64 / trials as f64;
        assert!((got - want).abs() < 0.01, "{got} vs {want}");
    }
    #[test]
    fn data_plus_far_point_passes_at_one() {
        let g = KernelSpec::default();
        let x = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.5], vec![-1.0, 2.0]]).unwrap();
        let far = far_point(&g, &x, 0.5).unwrap();
        let c = cover_of(&g, &x, x.to_rows(), Some(far), 1.0);
        let rep = verify_cover(&g, &x, &c, 1.0, 2000, 1).unwrap();
        assert!(rep.passed);
    }

    #[test]
    fn naive_cover_passes_one_dim() {
        let tri = KernelSpec::new(KernelFamily::Triangle, 1.0).unwrap();
        let x = line(&[0.0]);
        let c = naive_cover(&tri, &x, 0.5).unwrap();
        let grid: Vec<Vec<f64>> = (-3000..=3000).map(|k| vec![k as f64 * 1e-3]).collect();
        let (err, _) = cover_error_on(&tri, &x, &c, &grid).unwrap();
        assert!(err <= 0.5, "{err}");
        assert!(verify_cover(&tri, &x, &c, 0.5, 5000, 3).unwrap().passed);
    }

    #[test]
    fn far_point_alone_fails_near_data() {
        let g = KernelSpec::default();
        let x = line(&[0.0]);
        let far = far_point(&g, &x, 0.1).unwrap();
        let c = cover_of(&g, &x, vec![], Some(far), 0.1);
        let rep = verify_cover(&g, &x, &c, 0.1, 1000, 2).unwrap();
        assert!(!rep.passed);
        assert!(rep.max_error > 0.9);
        match rep.worst_witness {
            Witness::Point(p) => assert!(p[0].abs() < 0.3, "{p:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let g = KernelSpec::default();
        let x = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let c = naive_cover(&g, &x, 0.4).unwrap();
        let a = verify_cover(&g, &x, &c, 0.4, 500, 9).unwrap();
        let b = verify_cover(&g, &x, &c, 0.4, 500, 9).unwrap();
        assert_eq!(a, b);
        let s = x.select(&[0]).unwrap();
        assert_eq!(
            verify_cover_sample(&g, &x, &s, 0.4, 300, 4).unwrap(),
            verify_cover_sample(&g, &x, &s, 0.4, 300, 4).unwrap()
        );
    }

    #[test]
    fn identical_sample_has_zero_error() {
        let g = KernelSpec::default();
        let x = PointSet::from_rows(&[vec![0.0, 0.3], vec![1.0, -1.0], vec![2.0, 0.0]]).unwrap();
        let rep = verify_cover_sample(&g, &x, &x.clone(), 0.1, 500, 1).unwrap();
        assert_eq!(rep.max_error, 0.0);
        let rep = verify_kde_sample(&g, &x, &x.clone(), 0.1, 0.1, 500, 1).unwrap();
        assert_eq!(rep.max_error, 0.0);
        assert!((rep.threshold - 0.11).abs() < 1e-15);
    }

    #[test]
    fn far_outlier_sample_fails_kde() {
        let g = KernelSpec::default();
        let mut rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.05, 0.0]).collect();
        rows.push(vec![50.0, 50.0]);
        let x = PointSet::from_rows(&rows).unwrap();
        let s = PointSet::from_rows(&[vec![50.0, 50.0]]).unwrap();
        let rep = verify_kde_sample(&g, &x, &s, 0.2, 0.1, 1000, 5).unwrap();
        assert!(!rep.passed);
    }

    #[test]
    fn sampler_regions() {
        let g = KernelSpec::default();
        let x = PointSet::from_rows(&[vec![0.0, 0.0, 0.0], vec![3.0, 0.0, 0.0]]).unwrap();
        let s = QuerySampler::new(&g, &x, 0.2).unwrap();
        let r2 = s.radius().powi(2);
        let mut rng = trial_rng(1, 0);
        for _ in 0..500 {
            let p = s.inside(&mut rng);
            assert!(x.iter().any(|xi| sq_dist(&p, xi) <= r2 * (1.0 + 1e-12)));
            let p = s.outside(&mut rng);
            assert!(x.iter().all(|xi| sq_dist(&p, xi) > r2));
            assert!(x.iter().any(|xi| sq_dist(&p, xi) <= 4.0 * r2 * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn empty_cover_rejected() {
        let g = KernelSpec::default();
        let x = line(&[0.0]);
        let c = cover_of(&g, &x, vec![], None, 0.1);
        assert!(verify_cover(&g, &x, &c, 0.1, 10, 0).is_err());
    }
}
