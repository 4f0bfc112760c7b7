//! Lower-bound witnesses for the Gaussian kernel cover size.
//!
//! Spheres `S_k` of radius `r_k` around the simplex vertices `e_k` meet in
//! exactly two points when the radii are close to each other. Choosing
//! `r_i² = ln(1/(iε))` makes each sphere a level set `K(e_k, ·) = iε` of the
//! Gaussian kernel, so the intersection points ("corners") of a grid of such
//! spheres have signatures `(i_1 ε, …, i_d ε)` against `{e_1, …, e_d}` and
//! are pairwise separated in `d_Δ` by `ε·Σ|i_k − j_k|/d`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSystem {
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    /// Some `r_k < 1`.
    pub radius_below_one: bool,
    /// Some `|r_k² − r²| ≥ 1/d` for the reference radius.
    pub radii_spread: bool,
}

impl HypothesisFlags {
    pub fn any(&self) -> bool {
        self.radius_below_one || self.radii_spread
    }
}

impl SphereSystem {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidParameter("sphere system needs d ≥ 1".into()));
        }
        if !radii.iter().all(|r| r.is_finite() && *r > 0.0) {
            return Err(Error::InvalidParameter("sphere radii must be positive and finite".into()));
        }
        Ok(SphereSystem { radii })
    }

    pub fn dim(&self) -> usize {
        self.radii.len()
    }

    /// Hypothesis check against a reference radius `r`.
    pub fn flags(&self, r: f64) -> HypothesisFlags {
        let d = self.dim() as f64;
        HypothesisFlags {
            radius_below_one: self.radii.iter().any(|&rk| rk < 1.0),
            radii_spread: self.radii.iter().any(|&rk| (rk * rk - r * r).abs() >= 1.0 / d),
        }
    }

    /// Coefficients `(a, b, c)` of `p(y) = a y² + b y + c`, whose roots are
    /// the squared norms of the intersection points.
    pub fn quadratic(&self) -> (f64, f64, f64) {
        let d = self.dim() as f64;
        let s1: f64 = self.radii.iter().map(|r| 1.0 - r * r).sum();
        let s2: f64 = self.radii.iter().map(|r| (1.0 - r * r).powi(2)).sum();
        (d / 4.0, 0.5 * s1 - 1.0, 0.25 * s2)
    }

    /// `4(b² − 4ac)` of [`quadratic`](Self::quadratic).
    pub fn four_delta(&self) -> f64 {
        let (a, b, c) = self.quadratic();
        4.0 * (b * b - 4.0 * a * c)
    }

    /// `‖B‖₁² + 4 + 4‖B‖₁ − d‖B‖₂²` with `B_k = r_k² − 1`; equals
    /// [`four_delta`](Self::four_delta) whenever every `r_k ≥ 1`.
    pub fn four_delta_norm_form(&self) -> f64 {
        let d = self.dim() as f64;
        let b1: f64 = self.radii.iter().map(|r| (r * r - 1.0).abs()).sum();
        let b2: f64 = self.radii.iter().map(|r| (r * r - 1.0).powi(2)).sum();
        b1 * b1 + 4.0 + 4.0 * b1 - d * b2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    /// Squared norms `y₁ < y₂` of the two points.
    pub roots: [f64; 2],
    pub points: [Vec<f64>; 2],
    pub four_delta: f64,
    pub flags: HypothesisFlags,
}

impl Intersection {
    /// Largest `|‖x − e_k‖ − r_k|` over both points and all spheres.
    pub fn max_residual(&self, sys: &SphereSystem) -> f64 {
        self.points
            .iter()
            .map(|x| sphere_residual(x, &sys.radii))
            .fold(0.0, f64::max)
    }
}

/// Largest `|‖x − e_k‖ − r_k|` over `k`.
pub fn sphere_residual(x: &[f64], radii: &[f64]) -> f64 {
    let n2: f64 = x.iter().map(|v| v * v).sum();
    radii
        .iter()
        .enumerate()
        .map(|(k, rk)| {
            let dk2 = n2 - 2.0 * x[k] + 1.0;
            (dk2.max(0.0).sqrt() - rk).abs()
        })
        .fold(0.0, f64::max)
}

/// The two points of `∩_k S_k`, with `x_k = ½(1 + y − r_k²)` for each root `y`.
/// Hypothesis violations are reported in the flags (reference radius 1).
pub fn sphere_intersection(sys: &SphereSystem) -> Result<Intersection> {
    let (a, b, c) = sys.quadratic();
    let four_delta = sys.four_delta();
    let disc = b * b - 4.0 * a * c;
    if !(disc > 0.0) {
        return Err(Error::NoIntersection { four_delta });
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
    let (mut y1, mut y2) = (q / a, c / q);
    if y1 > y2 {
        std::mem::swap(&mut y1, &mut y2);
    }
    let scale = 1.0 + y2.abs();
    if y1 < -1e-12 * scale {
        return Err(Error::NegativeRoot(y1));
    }
    let y1 = y1.max(0.0);
    let point = |y: f64| -> Vec<f64> { sys.radii.iter().map(|r| 0.5 * (1.0 + y - r * r)).collect() };
    Ok(Intersection {
        roots: [y1, y2],
        points: [point(y1), point(y2)],
        four_delta,
        flags: sys.flags(1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    /// Level indices `(i_1, …, i_d)`: corner lies on `K(e_k, ·) = i_k ε`.
    pub index: Vec<u64>,
    pub point: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessGrid {
    pub eps: f64,
    pub dim: usize,
    pub indices: Vec<u64>,
    /// `r_i = √ln(1/(iε))` for each admissible `i`.
    pub radii: Vec<f64>,
    pub corners: Vec<Corner>,
}

impl WitnessGrid {
    /// Number of grid cells between consecutive spheres on every axis.
    pub fn cell_count(&self) -> u64 {
        (self.indices.len() as u64).saturating_sub(1).pow(self.dim as u32)
    }
}

pub const MAX_CORNERS: usize = 1_000_000;

/// Admissible integers `i ∈ [⌈1/((e + 1/d)ε)⌉, ⌊1/(eε)⌋]`.
pub fn admissible_indices(eps: f64, d: usize) -> Result<Vec<u64>> {
    check_open_unit("eps", eps)?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let e = std::f64::consts::E;
    let lo = 1.0 / ((e + 1.0 / d as f64) * eps);
    let hi = 1.0 / (e * eps);
    let (a, b) = (lo.ceil(), hi.floor());
    if a > b {
        return Err(Error::EmptyIndexInterval { lo, hi });
    }
    Ok((a as u64..=b as u64).collect())
}

pub fn witness_grid(eps: f64, d: usize) -> Result<WitnessGrid> {
    let indices = admissible_indices(eps, d)?;
    let radii: Vec<f64> = indices
        .iter()
        .map(|&i| (1.0 / (i as f64 * eps)).ln().sqrt())
        .collect();
    let count = (indices.len() as f64).powi(d as i32);
    if count > MAX_CORNERS as f64 {
        return Err(Error::InvalidParameter(format!(
            "witness grid would have {count:.3e} corners (limit {MAX_CORNERS})"
        )));
    }
    let mut corners = Vec::with_capacity(count as usize);
    let mut choice = vec![0usize; d];
    loop {
        let sys = SphereSystem::new(choice.iter().map(|&c| radii[c]).collect())?;
        let inter = sphere_intersection(&sys)?;
        let point = inter.points[1].clone();
        corners.push(Corner {
            index: choice.iter().map(|&c| indices[c]).collect(),
            residual: sphere_residual(&point, &sys.radii),
            point,
        });
        // Odometer over the last axis first, giving lexicographic order.
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(WitnessGrid {
                    eps,
                    dim: d,
                    indices,
                    radii,
                    corners,
                });
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < radii.len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

/// `ε·Σ|i_k − j_k|/d`.
pub fn corner_distance(grid: &WitnessGrid, a: usize, b: usize) -> f64 {
    grid.eps * index_l1(&grid.corners[a].index, &grid.corners[b].index) as f64 / grid.dim as f64
}

fn index_l1(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingCertificate {
    pub separation: f64,
    pub size: usize,
    /// Indices into the grid's corners, in selection order.
    pub witnesses: Vec<usize>,
    pub corner_count: usize,
    pub cell_count: u64,
}

/// Greedy packing of corners pairwise more than `separation` apart in `d_Δ`,
/// scanned in lexicographic corner order. Distances use the exact index law.
pub fn packing_certificate(grid: &WitnessGrid, separation: f64) -> PackingCertificate {
    // Σ|Δi| must exceed this to be separated.
    let need = separation * grid.dim as f64 / grid.eps;
    let mut witnesses: Vec<usize> = Vec::new();
    for (i, c) in grid.corners.iter().enumerate() {
        let apart = witnesses
            .iter()
            .all(|&j| index_l1(&c.index, &grid.corners[j].index) as f64 > need + 1e-9);
        if apart {
            witnesses.push(i);
        }
    }
    PackingCertificate {
        separation,
        size: witnesses.len(),
        witnesses,
        corner_count: grid.corners.len(),
        cell_count: grid.cell_count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinatorialBound {
    pub m: f64,
    pub log2_m: f64,
    /// `true` when `d ≤ 1/ε` (the `M = 2^d` case).
    pub small_dim: bool,
    /// The bound is stated for `ε < 0.3`.
    pub in_hypothesis: bool,
}

/// `2^d` when `d ≤ 1/ε`, else `2^{(1 − ε log₂(e/ε)) d}`.
pub fn combinatorial_bound(eps: f64, d: usize) -> Result<CombinatorialBound> {
    check_open_unit("eps", eps)?;
    let df = d as f64;
    let small_dim = df <= 1.0 / eps;
    let log2_m = if small_dim {
        df
    } else {
        (1.0 - eps * (std::f64::consts::E / eps).log2()) * df
    };
    let in_hypothesis = eps < 0.3;
    if !in_hypothesis {
        log::warn!("combinatorial bound is stated for eps < 0.3 (got {eps})");
    }
    Ok(CombinatorialBound {
        m: log2_m.exp2(),
        log2_m,
        small_dim,
        in_hypothesis,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingCount {
    pub d: usize,
    pub k: usize,
    #[serde(with = "decimal")]
    pub count: BigUint,
    /// `(e/ε)^{εd}`.
    pub bound: f64,
    pub within_bound: bool,
}

impl HammingCount {
    pub fn count_f64(&self) -> f64 {
        self.count.to_f64().unwrap_or(f64::INFINITY)
    }
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// Exact `Σ_{i=0}^{⌊εd⌋} C(d, i)`.
pub fn hamming_count(d: usize, eps: f64) -> Result<HammingCount> {
    check_open_unit("eps", eps)?;
    let k = ((eps * d as f64) + 1e-9).floor() as usize;
    let k = k.min(d);
    let mut term = BigUint::one();
    let mut count = BigUint::one();
    for i in 1..=k {
        term = term * BigUint::from(d - i + 1) / BigUint::from(i);
        count += &term;
    }
    let bound = (std::f64::consts::E / eps).powf(eps * d as f64);
    let within_bound = count.to_f64().is_some_and(|c| c <= bound * (1.0 + 1e-12));
    Ok(HammingCount {
        d,
        k,
        count,
        bound,
        within_bound,
    })
}

/// `x ↦ (x, ‖x‖²)`.
pub fn veronese_lift(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    out.push(x.iter().map(|v| v * v).sum());
    out
}
