//! Monte Carlo estimate of the empirical Rademacher complexity of
//! `{x ↦ |K(p,x) − K(q,x)|}` over a finite family of `(p, q)` pairs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::signatures::PointSet;

use super::trial_rng;

/// `E_σ[max_{(p,q)} (1/m) Σ σ_i |K(p,s_i) − K(q,s_i)|]` averaged over
/// `n_sigma` sign vectors. A lower estimate of the supremum over all pairs.
pub fn empirical_rademacher(
    spec: &KernelSpec,
    s: &PointSet,
    n_sigma: usize,
    candidate_pairs: &[(Vec<f64>, Vec<f64>)],
    seed: u64,
) -> Result<f64> {
    if n_sigma == 0 {
        return Err(Error::InvalidParameter("n_sigma must be at least 1".into()));
    }
    if candidate_pairs.is_empty() {
        return Err(Error::InvalidParameter("no candidate pairs".into()));
    }
    for (p, q) in candidate_pairs {
        s.check_point(p)?;
        s.check_point(q)?;
    }
    let m = s.len();
    let table: Vec<Vec<f64>> = candidate_pairs
        .iter()
        .map(|(p, q)| {
            s.iter()
                .map(|x| (spec.eval_unchecked(p, x) - spec.eval_unchecked(q, x)).abs())
                .collect()
        })
        .collect();
    let mut rng = trial_rng(seed, 0);
    let mut sigma = vec![0.0; m];
    let mut total = 0.0;
    for _ in 0..n_sigma {
        sigma
            .iter_mut()
            .for_each(|v| *v = if rng.random::<bool>() { 1.0 } else { -1.0 });
        let best = table
            .iter()
            .map(|f| f.iter().zip(&sigma).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        total += best / m as f64;
    }
    Ok(total / n_sigma as f64)
}
