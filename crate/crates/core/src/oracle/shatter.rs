//! Grid search for semi-super-level sets `R_{p,q,τ} = {x : |K(p,x) − K(q,x)| ≥ τ}`
//! realizing a labeling of a small 1-D point set.
//!
//! A miss means "not found at this resolution", never a proof that the
//! labeling cannot be realized.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

pub const MAX_POINTS: usize = 6;
pub const DEFAULT_RESOLUTION: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShatterWitness {
    pub p: f64,
    pub q: f64,
    pub tau: f64,
}

/// Search at the default resolution over a range padded by `2·r(10⁻³)`.
pub fn shatter_search_1d(spec: &KernelSpec, points: &[f64], labels: &[bool]) -> Result<Option<ShatterWitness>> {
    shatter_search_1d_at(spec, points, labels, DEFAULT_RESOLUTION)
}

pub fn shatter_search_1d_at(
    spec: &KernelSpec,
    points: &[f64],
    labels: &[bool],
    resolution: f64,
) -> Result<Option<ShatterWitness>> {
    if points.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: labels.len(),
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if points.len() > MAX_POINTS {
        return Err(Error::InvalidParameter(format!(
            "grid search supports at most {MAX_POINTS} points (got {})",
            points.len()
        )));
    }
    if !points.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("shatter points"));
    }
    if !(resolution > 0.0) {
        return Err(Error::OutOfRange {
            name: "resolution",
            value: resolution,
            range: "(0, ∞)",
        });
    }
    let lo = points.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if labels.iter().all(|l| !l) {
        return Ok(Some(ShatterWitness { p: lo, q: lo, tau: 0.5 }));
    }
    let pad = 2.0 * spec.critical_radius(1e-3)?;
    let start = lo - pad;
    let steps = ((hi + pad - start) / resolution).ceil() as usize + 1;
    let grid: Vec<f64> = (0..steps).map(|i| start + i as f64 * resolution).collect();
    let k = points.len();
    let table: Vec<f64> = grid
        .iter()
        .flat_map(|&g| points.iter().map(move |&x| spec.profile((g - x).abs())))
        .collect();

    let realize = |a: usize, b: usize| -> Option<f64> {
        let ka = &table[a * k..(a + 1) * k];
        let kb = &table[b * k..(b + 1) * k];
        let mut min_pos = f64::INFINITY;
        let mut max_neg: f64 = 0.0;
        for j in 0..k {
            let v = (ka[j] - kb[j]).abs();
            if labels[j] {
                min_pos = min_pos.min(v);
            } else {
                max_neg = max_neg.max(v);
            }
        }
        (min_pos > 0.0 && min_pos > max_neg).then_some(min_pos)
    };

    let found = (0..steps).into_par_iter().find_map_first(|a| {
        (a..steps).find_map(|b| realize(a, b).map(|tau| (a, b, tau)))
    });
    Ok(found.map(|(a, b, tau)| ShatterWitness {
        p: grid[a],
        q: grid[b],
        tau,
    }))
}
