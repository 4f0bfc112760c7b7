//! Dimension-reduced cover construction.
//!
//! 1. draw an ε/4-cover-sample `S` of `X`;
//! 2. build a terminal embedding `f` of `S` with `ε′ = ε/(16·L·r(ε/16))`;
//! 3. take the anchor images `f(S) ⊂ ℝ^{m+1}`;
//! 4. cover `(f(S), K)` at level ε/8 by `Q`;
//! 5. pull `Q` back to `ℝ^d` by matching it against an ε/8-cover `Q_S` of `S`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::{build_net_cover, Construction, Cover, CoverMeta, NetConfig};
use crate::error::{check_open_unit, Error, Result};
use crate::kernels::KernelSpec;
use crate::sampling::{cover_sample_size, draw_sample, SampleSizeConfig};
use crate::signatures::{ddelta_values, signature_values, PointSet};
use crate::terminal_jl::{attempt_seed, build_embedding, EmbeddingConfig, TerminalEmbedding};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub sample: SampleSizeConfig,
    pub embedding: EmbeddingConfig,
    pub net: NetConfig,
}

impl PipelineConfig {
    pub fn for_kernel(spec: &KernelSpec) -> Self {
        PipelineConfig {
            sample: SampleSizeConfig::for_kernel(spec),
            embedding: EmbeddingConfig::default(),
            net: NetConfig::default(),
        }
    }
}

/// Intermediate sizes of one run. Cover sizes count the far point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub n: usize,
    pub d: usize,
    pub sample_size: usize,
    pub m: usize,
    pub eps_prime: f64,
    pub q_s_size: usize,
    pub q_size: usize,
    pub q_prime_size: usize,
    pub warnings: usize,
    pub attempts: usize,
    pub embedding_seed: u64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub cover: Cover,
    pub report: PipelineReport,
    pub sample: PointSet,
    pub embedding: TerminalEmbedding,
    /// The ε/8-cover of the embedded anchors.
    pub reduced_cover: Cover,
}

#[derive(Debug, Clone)]
pub struct PullBack {
    pub cover: Cover,
    pub q_s_size: usize,
    pub warnings: usize,
    /// `matches[k]` is the index into `Q.all_points()` consumed by the k-th
    /// selected point (far point first), or `None` for a warning.
    pub matches: Vec<Option<usize>>,
}

/// Distortion parameter coupling the terminal embedding to the cover level.
pub fn coupled_eps_prime(spec: &KernelSpec, eps: f64) -> Result<f64> {
    check_open_unit("eps", eps)?;
    let r = spec.critical_radius(eps / 16.0)?;
    let e = eps / (16.0 * spec.lipschitz() * r);
    check_open_unit("eps_prime", e)?;
    Ok(e)
}

const SALT_EMBED: u64 = 0x5EED_0001;
const SALT_REDUCED: u64 = 0x5EED_0002;
const SALT_AMBIENT: u64 = 0x5EED_0003;

pub fn build_cover(spec: &KernelSpec, x: &PointSet, eps: f64, cfg: &PipelineConfig, seed: u64) -> Result<PipelineOutput> {
    let start = Instant::now();
    check_open_unit("eps", eps)?;
    let size = cover_sample_size(spec, eps / 4.0, &cfg.sample, x.dim())?;
    let s = draw_sample(x, size, seed)?;
    let eps_prime = coupled_eps_prime(spec, eps)?;

    let mut last_err = None;
    for attempt in 0..=cfg.embedding.retries {
        let emb_seed = attempt_seed(seed ^ SALT_EMBED, attempt);
        let emb = build_embedding(&s, eps_prime, emb_seed, &cfg.embedding)?;
        let s_img = emb.anchor_images()?;
        let q = build_net_cover(spec, &s_img, eps / 8.0, &cfg.net, seed ^ SALT_REDUCED)?;
        match pull_back(spec, &s, &emb, &q, eps, &cfg.net, seed ^ SALT_AMBIENT) {
            Ok(pb) => {
                if pb.warnings > 0 {
                    log::warn!("{} cover points had no match in the reduced cover", pb.warnings);
                }
                let mut cover = pb.cover;
                cover.meta.seed = Some(seed);
                let report = PipelineReport {
                    n: x.len(),
                    d: x.dim(),
                    sample_size: s.len(),
                    m: emb.m(),
                    eps_prime,
                    q_s_size: pb.q_s_size,
                    q_size: q.size(),
                    q_prime_size: cover.size(),
                    warnings: pb.warnings,
                    attempts: attempt + 1,
                    embedding_seed: emb_seed,
                    wall_time_secs: start.elapsed().as_secs_f64(),
                };
                return Ok(PipelineOutput {
                    cover,
                    report,
                    sample: s,
                    embedding: emb,
                    reduced_cover: q,
                });
            }
            Err(e @ Error::Infeasible { .. }) => {
                log::info!("embedding attempt {} infeasible: {e}", attempt + 1);
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Turns an ε/8-cover `q` of `(f(S), K)` into an ε-cover of the ambient space
/// with at most `|q|` points (plus one per unmatched candidate, counted as a
/// warning).
pub fn pull_back(
    spec: &KernelSpec,
    s: &PointSet,
    emb: &TerminalEmbedding,
    q: &Cover,
    eps: f64,
    net: &NetConfig,
    seed: u64,
) -> Result<PullBack> {
    if q.meta.ambient_dim != emb.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.output_dim(),
            got: q.meta.ambient_dim,
        });
    }
    let level = eps / 8.0;
    let q_s = build_net_cover(spec, s, level, net, seed)?;

    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(q_s.size());
    candidates.extend(q_s.far_point.iter().cloned());
    candidates.extend(q_s.queries.iter().cloned());
    let has_far = q_s.far_point.is_some();

    let s_img = emb.anchor_images()?;
    let embedded = emb.embed_all(&candidates)?;
    let cand_sigs: Vec<Vec<f64>> = embedded
        .par_iter()
        .map(|p| signature_values(spec, &s_img, p))
        .collect();
    let q_points: Vec<&[f64]> = q.all_points().collect();
    let q_sigs: Vec<Vec<f64>> = q_points
        .par_iter()
        .map(|p| signature_values(spec, &s_img, p))
        .collect();

    let mut q_alive = vec![true; q_sigs.len()];
    let mut cand_alive = vec![true; candidates.len()];
    let mut selected = Vec::new();
    let mut matches = Vec::new();
    let mut warnings = 0;

    for i in 0..candidates.len() {
        if !cand_alive[i] {
            continue;
        }
        let best = q_sigs
            .par_iter()
            .enumerate()
            .filter(|(j, _)| q_alive[*j])
            .map(|(j, sig)| (ddelta_values(&cand_sigs[i], sig), j))
            .filter(|(dd, _)| *dd <= level)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        selected.push(i);
        match best {
            Some((_, j)) => {
                q_alive[j] = false;
                matches.push(Some(j));
                let qs = &q_sigs[j];
                let covered: Vec<usize> = (i + 1..candidates.len())
                    .into_par_iter()
                    .filter(|&k| cand_alive[k] && ddelta_values(&cand_sigs[k], qs) <= level)
                    .collect();
                for k in covered {
                    cand_alive[k] = false;
                }
            }
            None => {
                warnings += 1;
                matches.push(None);
            }
        }
    }

    let mut far_point = None;
    let mut queries = Vec::with_capacity(selected.len());
    for i in selected {
        if has_far && i == 0 {
            far_point = Some(candidates[0].clone());
        } else {
            queries.push(std::mem::take(&mut candidates[i]));
        }
    }
    let cover = Cover {
        queries,
        far_point,
        meta: CoverMeta {
            epsilon: eps,
            kernel: *spec,
            seed: Some(seed),
            ambient_dim: s.dim(),
            construction: Construction::Pipeline,
        },
    };
    Ok(PullBack {
        cover,
        q_s_size: q_s.size(),
        warnings,
        matches,
    })
}
