//! Terminal dimensionality reduction.
//!
//! Anchors `s ∈ S` map to `(Πs, 0)`. An outer point `q` with nearest anchor
//! `x_NN` and offset `u = q − x_NN` maps to `(Πx_NN + z, √(‖u‖² − ‖z‖²))`,
//! where `z` minimizes `‖z‖² + 2⟨Πu, z⟩` over the ball `‖z‖ ≤ ‖u‖` intersected
//! with one slab per anchor `x`:
//!
//! ```text
//! |⟨z, Π(x − x_NN)⟩ − ⟨u, x − x_NN⟩| ≤ ε′ ‖u‖ ‖x − x_NN‖
//! ```
//!
//! The objective equals `‖z + Πu‖² − ‖Πu‖²`, so `z` is the projection of
//! `−Πu` onto that convex set, computed with Dykstra's algorithm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::kernels::sq_dist;
use crate::signatures::PointSet;

pub const DEFAULT_C_JL: f64 = 8.0;

/// `min(d, ⌈c_jl · ln n / ε′²⌉)`.
pub fn jl_dim(n: usize, eps_prime: f64, d: usize, c_jl: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("jl_dim needs n ≥ 2 (got {n})")));
    }
    check_open_unit("eps_prime", eps_prime)?;
    if !(c_jl.is_finite() && c_jl > 0.0) {
        return Err(Error::OutOfRange {
            name: "c_jl",
            value: c_jl,
            range: "(0, ∞)",
        });
    }
    let m = (c_jl * (n as f64).ln() / (eps_prime * eps_prime)).ceil();
    Ok((m.max(1.0) as usize).min(d.max(1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    /// I.i.d. `N(0, 1/m)` entries.
    Gaussian,
    /// Random orthonormal rows scaled by `√(d/m)`.
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub feas_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 5000,
            feas_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub c_jl: f64,
    pub projection: ProjectionKind,
    pub solver: SolverConfig,
    /// Fresh projections tried after an infeasible solve.
    pub retries: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            c_jl: DEFAULT_C_JL,
            projection: ProjectionKind::Gaussian,
            solver: SolverConfig::default(),
            retries: 3,
        }
    }
}

/// Seed for the `attempt`-th projection drawn from `seed`.
pub fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone)]
pub struct TerminalEmbedding {
    proj: Vec<f64>,
    m: usize,
    d: usize,
    anchors: PointSet,
    anchor_proj: Vec<Vec<f64>>,
    eps_prime: f64,
    seed: u64,
    cfg: EmbeddingConfig,
}

/// Result of embedding one point, with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedOutcome {
    pub image: Vec<f64>,
    pub nearest: usize,
    pub sweeps: usize,
    pub violation: f64,
}

pub fn build_embedding(s: &PointSet, eps_prime: f64, seed: u64, cfg: &EmbeddingConfig) -> Result<TerminalEmbedding> {
    let d = s.dim();
    let m = jl_dim(s.len().max(2), eps_prime, d, cfg.c_jl)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut proj: Vec<f64> = (0..m * d).map(|_| StandardNormal.sample(&mut rng)).collect();
    // At m = d a Gaussian draw is not an ε′-JL map; a rotation is exact.
    let kind = if m == d { ProjectionKind::Orthogonal } else { cfg.projection };
    match kind {
        ProjectionKind::Gaussian => {
            let scale = 1.0 / (m as f64).sqrt();
            proj.iter_mut().for_each(|v| *v *= scale);
        }
        ProjectionKind::Orthogonal => {
            orthonormalize_rows(&mut proj, m, d);
            let scale = (d as f64 / m as f64).sqrt();
            proj.iter_mut().for_each(|v| *v *= scale);
        }
    }
    let mut emb = TerminalEmbedding {
        proj,
        m,
        d,
        anchors: s.clone(),
        anchor_proj: Vec::new(),
        eps_prime,
        seed,
        cfg: *cfg,
    };
    emb.anchor_proj = s.iter().map(|x| emb.project(x)).collect();
    Ok(emb)
}

/// Modified Gram–Schmidt on the rows of an `m×d` matrix, `m ≤ d`.
fn orthonormalize_rows(a: &mut [f64], m: usize, d: usize) {
    for i in 0..m {
        for _ in 0..2 {
            for j in 0..i {
                let (head, tail) = a.split_at_mut(i * d);
                let rj = &head[j * d..(j + 1) * d];
                let ri = &mut tail[..d];
                let c: f64 = ri.iter().zip(rj).map(|(x, y)| x * y).sum();
                ri.iter_mut().zip(rj).for_each(|(x, y)| *x -= c * y);
            }
        }
        let row = &mut a[i * d..(i + 1) * d];
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        row.iter_mut().for_each(|v| *v /= norm);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl TerminalEmbedding {
    pub fn input_dim(&self) -> usize {
        self.d
    }

    /// Target dimension `m` of the projection; images live in `ℝ^{m+1}`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn output_dim(&self) -> usize {
        self.m + 1
    }

    pub fn anchors(&self) -> &PointSet {
        &self.anchors
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps_prime
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.cfg
    }

    /// Row-major `m×d` projection matrix.
    pub fn projection(&self) -> &[f64] {
        &self.proj
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.proj.chunks_exact(self.d).map(|row| dot(row, x)).collect()
    }

    pub fn anchor_image(&self, i: usize) -> Vec<f64> {
        let mut v = self.anchor_proj[i].clone();
        v.push(0.0);
        v
    }

    /// `f(S)` as a point set in `ℝ^{m+1}`.
    pub fn anchor_images(&self) -> Result<PointSet> {
        let rows: Vec<Vec<f64>> = (0..self.anchors.len()).map(|i| self.anchor_image(i)).collect();
        PointSet::from_rows(&rows)
    }

    /// Index of the nearest anchor; ties go to the lowest index.
    pub fn nearest_anchor(&self, q: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, s) in self.anchors.iter().enumerate() {
            let d2 = sq_dist(q, s);
            if d2 < best.1 {
                best = (i, d2);
            }
        }
        best
    }

    pub fn embed(&self, q: &[f64]) -> Result<Vec<f64>> {
        Ok(self.embed_detailed(q)?.image)
    }

    pub fn embed_detailed(&self, q: &[f64]) -> Result<EmbedOutcome> {
        self.anchors.check_point(q)?;
        let (nn, d2) = self.nearest_anchor(q);
        if d2 == 0.0 {
            return Ok(EmbedOutcome {
                image: self.anchor_image(nn),
                nearest: nn,
                sweeps: 0,
                violation: 0.0,
            });
        }
        let xnn = self.anchors.point(nn);
        let u: Vec<f64> = q.iter().zip(xnn).map(|(a, b)| a - b).collect();
        let nu = norm(&u);
        let pu = self.project(&u);

        let mut slabs = Vec::with_capacity(self.anchors.len());
        for (j, x) in self.anchors.iter().enumerate() {
            if j == nn {
                continue;
            }
            let w: Vec<f64> = x.iter().zip(xnn).map(|(a, b)| a - b).collect();
            let nw = norm(&w);
            if nw == 0.0 {
                continue;
            }
            let a: Vec<f64> = self.anchor_proj[j]
                .iter()
                .zip(&self.anchor_proj[nn])
                .map(|(p, r)| p - r)
                .collect();
            let b = dot(&u, &w);
            let half = self.eps_prime * nu * nw;
            slabs.push(Slab {
                a2: dot(&a, &a),
                a,
                lo: b - half,
                hi: b + half,
                scale: nu * nw,
            });
        }

        let y0: Vec<f64> = pu.iter().map(|v| -v).collect();
        let mut sol = dykstra(&y0, &slabs, nu, &self.cfg.solver);
        if sol.violation > self.cfg.solver.feas_tol {
            let mut anchor = pu.clone();
            project_ball(&mut anchor, nu);
            polish(&mut sol, &anchor, &slabs, self.cfg.solver.feas_tol);
        }
        if sol.violation > self.cfg.solver.feas_tol {
            return Err(Error::Infeasible {
                worst_violation: sol.violation,
                iterations: sol.sweeps,
            });
        }
        let z = sol.z;
        let last = (nu * nu - dot(&z, &z)).max(0.0).sqrt();
        let mut image: Vec<f64> = self.anchor_proj[nn].iter().zip(&z).map(|(p, v)| p + v).collect();
        image.push(last);
        Ok(EmbedOutcome {
            image,
            nearest: nn,
            sweeps: sol.sweeps,
            violation: sol.violation,
        })
    }

    /// Embeds many points in parallel; fails on the first infeasible solve.
    pub fn embed_all(&self, queries: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        queries.par_iter().map(|q| self.embed(q)).collect()
    }
}

struct Slab {
    a: Vec<f64>,
    a2: f64,
    lo: f64,
    hi: f64,
    scale: f64,
}

struct Solution {
    z: Vec<f64>,
    sweeps: usize,
    violation: f64,
}

/// Relative violation of the slab constraints by `z`; the ball is handled
/// exactly by the final projection of every sweep.
fn slab_violation(z: &[f64], slabs: &[Slab]) -> f64 {
    slabs
        .iter()
        .map(|s| {
            let t = dot(&s.a, z);
            let excess = (t - s.hi).max(s.lo - t).max(0.0);
            if s.a2 == 0.0 && excess > 0.0 {
                f64::INFINITY
            } else {
                excess / s.scale
            }
        })
        .fold(0.0, f64::max)
}

fn project_ball(y: &mut [f64], radius: f64) {
    let n = norm(y);
    if n > radius {
        let f = radius / n;
        y.iter_mut().for_each(|v| *v *= f);
    }
}

fn dykstra(y0: &[f64], slabs: &[Slab], radius: f64, cfg: &SolverConfig) -> Solution {
    let mut x = y0.to_vec();
    project_ball(&mut x, radius);
    let mut violation = slab_violation(&x, slabs);
    if violation == 0.0 || !violation.is_finite() {
        return Solution { z: x, sweeps: 0, violation };
    }
    let mut x = y0.to_vec();
    let mut c = vec![0.0; slabs.len()];
    let mut p_ball = vec![0.0; x.len()];
    let mut prev = x.clone();
    let mut y = vec![0.0; x.len()];
    let step_tol = 1e-3 * cfg.feas_tol * radius;
    let mut sweeps = 0;
    while sweeps < cfg.max_iters {
        sweeps += 1;
        for (s, cj) in slabs.iter().zip(c.iter_mut()) {
            if s.a2 == 0.0 {
                continue;
            }
            let t = dot(&s.a, &x) + *cj * s.a2;
            let shift = if t > s.hi {
                (s.hi - t) / s.a2
            } else if t < s.lo {
                (s.lo - t) / s.a2
            } else {
                0.0
            };
            let coef = *cj + shift;
            if coef != 0.0 {
                x.iter_mut().zip(&s.a).for_each(|(v, a)| *v += coef * a);
            }
            *cj = -shift;
        }
        for ((yi, xi), pi) in y.iter_mut().zip(&x).zip(&p_ball) {
            *yi = xi + pi;
        }
        x.copy_from_slice(&y);
        project_ball(&mut x, radius);
        for ((pi, yi), xi) in p_ball.iter_mut().zip(&y).zip(&x) {
            *pi = yi - xi;
        }
        let moved = sq_dist(&x, &prev).sqrt();
        prev.copy_from_slice(&x);
        if sweeps % 8 == 0 || moved <= step_tol {
            violation = slab_violation(&x, slabs);
            if violation <= cfg.feas_tol && moved <= step_tol {
                break;
            }
        }
    }
    violation = slab_violation(&x, slabs);
    Solution { z: x, sweeps, violation }
}

/// Moves an unconverged iterate toward a known feasible point just far
/// enough to meet the tolerance. The feasible set is convex, so bisection
/// on the blend weight suffices.
fn polish(sol: &mut Solution, feasible: &[f64], slabs: &[Slab], tol: f64) {
    if slab_violation(feasible, slabs) > tol {
        return;
    }
    let blend = |t: f64| -> Vec<f64> { sol.z.iter().zip(feasible).map(|(a, b)| a + t * (b - a)).collect() };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if slab_violation(&blend(mid), slabs) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    sol.z = blend(hi);
    sol.violation = slab_violation(&sol.z, slabs);
}
