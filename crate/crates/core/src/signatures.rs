//! Point sets, signature vectors `R_p ∈ [0,1]^n` and the `d_Δ` pseudometric.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// `n` points in `ℝ^d`, stored row-major in one contiguous buffer.
///
/// Each set receives a process-unique id at construction; clones share it,
/// so signatures computed against a clone stay comparable with the original.
#[derive(Debug, Clone)]
pub struct PointSet {
    data: Vec<f64>,
    dim: usize,
    id: u64,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data == other.data
    }
}

impl PointSet {
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("point dimension must be at least 1".into()));
        }
        if data.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("point set"));
        }
        Ok(PointSet {
            data,
            dim,
            id: fresh_id(),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyPointSet)?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    /// Subset by row index; the result is a new set with its own id.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Self::from_flat(data, self.dim)
    }

    /// Per-coordinate minimum and maximum.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for (k, &v) in p.iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        (lo, hi)
    }

    pub(crate) fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("query point"));
        }
        Ok(())
    }
}

/// Kernel values of one query against every point of a set.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    values: Vec<f64>,
    owner: u64,
}

impl Signature {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn owner(&self) -> u64 {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn signature(spec: &KernelSpec, x: &PointSet, p: &[f64]) -> Result<Signature> {
    x.check_point(p)?;
    Ok(Signature {
        values: signature_values(spec, x, p),
        owner: x.id(),
    })
}

/// Unchecked signature as a plain vector; callers guarantee dimensions.
pub fn signature_values(spec: &KernelSpec, x: &PointSet, p: &[f64]) -> Vec<f64> {
    x.iter().map(|xi| spec.eval_unchecked(p, xi)).collect()
}

/// Signatures of many queries, computed in parallel.
pub fn signature_matrix(spec: &KernelSpec, x: &PointSet, queries: &[Vec<f64>]) -> Result<Vec<Signature>> {
    for q in queries {
        x.check_point(q)?;
    }
    Ok(queries
        .par_iter()
        .map(|q| Signature {
            values: signature_values(spec, x, q),
            owner: x.id(),
        })
        .collect())
}

pub fn ddelta(w: &Signature, w2: &Signature) -> Result<f64> {
    if w.owner != w2.owner {
        return Err(Error::OwnerMismatch(w.owner, w2.owner));
    }
    if w.len() != w2.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: w2.len(),
        });
    }
    Ok(ddelta_values(&w.values, &w2.values))
}

/// `(1/n)·Σ|a_i − b_i|` with compensated summation, so that equal-mean
/// differences cancel exactly on inputs such as duplicated points.
pub fn ddelta_values(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let s = neumaier_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()));
    (s / a.len() as f64).clamp(0.0, 1.0)
}

/// `d_Δ` with early exit once the running sum provably exceeds `bound`.
/// Returns a value `> bound` (not necessarily exact) in that case.
pub fn ddelta_bounded(a: &[f64], b: &[f64], bound: f64) -> f64 {
    let n = a.len() as f64;
    let limit = bound * n;
    let mut s = 0.0;
    for (chunk_a, chunk_b) in a.chunks(64).zip(b.chunks(64)) {
        s += chunk_a.iter().zip(chunk_b).map(|(x, y)| (x - y).abs()).sum::<f64>();
        if s > limit * (1.0 + 1e-12) + 1e-300 {
            return s / n;
        }
    }
    ddelta_values(a, b)
}

pub fn kde(spec: &KernelSpec, x: &PointSet, p: &[f64]) -> Result<f64> {
    x.check_point(p)?;
    Ok(kde_unchecked(spec, x, p))
}

pub fn kde_unchecked(spec: &KernelSpec, x: &PointSet, p: &[f64]) -> f64 {
    let s = neumaier_sum(x.iter().map(|xi| spec.eval_unchecked(p, xi)));
    (s / x.len() as f64).clamp(0.0, 1.0)
}

pub(crate) fn neumaier_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
