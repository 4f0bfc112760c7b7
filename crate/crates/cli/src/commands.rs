use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use kcover::covering::{build_net_cover, naive_cover_budgeted};
use kcover::io::{read_points, write_points};
use kcover::lowerbound::{combinatorial_bound, hamming_count, packing_certificate, witness_grid};
use kcover::oracle::{verify_cover, verify_cover_sample, verify_terminal};
use kcover::pipeline::{build_cover, PipelineConfig};
use kcover::sampling::{cover_sample_size, draw_sample};
use kcover::terminal_jl::{attempt_seed, build_embedding};
use kcover::{Cover, Error, PointSet};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{BoundArgs, BuildArgs, EmbedArgs, LowerboundArgs, Method, SampleArgs, VerifyArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a, T: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub threads: usize,
    pub args: &'a T,
}

impl<'a, T: Serialize> RunConfig<'a, T> {
    pub fn new(command: &'static str, args: &'a T) -> Self {
        RunConfig {
            command,
            version: env!("CARGO_PKG_VERSION"),
            threads: rayon::current_num_threads(),
            args,
        }
    }
}

fn emit<T: Serialize>(path: Option<&Path>, config: &RunConfig<T>, body: Value) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let mut report = json!({ "config": config });
    if let (Value::Object(dst), Value::Object(src)) = (&mut report, body) {
        dst.extend(src);
    }
    fs::write(path, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load(path: &Path) -> Result<PointSet> {
    read_points(path).with_context(|| format!("reading {}", path.display()))
}

pub fn build(a: &BuildArgs) -> Result<Status> {
    let start = Instant::now();
    let spec = a.kernel.spec()?;
    let x = load(&a.input)?;
    let net = a.net.config();
    let (cover, details) = match a.method {
        Method::Pipeline => {
            let cfg = PipelineConfig {
                sample: a.sample.config(&spec),
                embedding: a.embedding.config(),
                net,
            };
            let out = build_cover(&spec, &x, a.eps, &cfg, a.seed)?;
            (out.cover, serde_json::to_value(&out.report)?)
        }
        Method::Net => (build_net_cover(&spec, &x, a.eps, &net, a.seed)?, json!({})),
        Method::Naive => (naive_cover_budgeted(&spec, &x, a.eps, Some(a.net.lattice_budget))?, json!({})),
    };
    fs::write(&a.output, cover.to_json()?).with_context(|| format!("writing {}", a.output.display()))?;
    println!("cover of {} points written to {}", cover.size(), a.output.display());
    let body = json!({
        "n": x.len(),
        "d": x.dim(),
        "cover_size": cover.size(),
        "pipeline": details,
        "wall_time_secs": start.elapsed().as_secs_f64(),
    });
    emit(a.report.as_deref(), &RunConfig::new("build", a), body)?;
    Ok(Status::Pass)
}

pub fn verify(a: &VerifyArgs) -> Result<Status> {
    let start = Instant::now();
    let text = fs::read_to_string(&a.cover).with_context(|| format!("reading {}", a.cover.display()))?;
    let cover = Cover::from_json(&text).with_context(|| format!("parsing {}", a.cover.display()))?;
    let x = load(&a.input)?;
    let eps = a.eps.unwrap_or(cover.meta.epsilon);
    let rep = verify_cover(&cover.meta.kernel, &x, &cover, eps, a.trials, a.seed)?;
    let status = if rep.passed { Status::Pass } else { Status::Fail };
    match status {
        Status::Pass => println!("PASS: max error {:.6} ≤ {eps} over {} queries", rep.max_error, rep.trials),
        Status::Fail => println!(
            "FAIL: max error {:.6} > {eps}; worst witness {}",
            rep.max_error,
            serde_json::to_string(&rep.worst_witness)?
        ),
    }
    let body = json!({
        "cover_size": cover.size(),
        "verification": rep,
        "wall_time_secs": start.elapsed().as_secs_f64(),
    });
    emit(a.report.as_deref(), &RunConfig::new("verify", a), body)?;
    Ok(status)
}

pub fn sample(a: &SampleArgs) -> Result<Status> {
    let start = Instant::now();
    let spec = a.kernel.spec()?;
    let x = load(&a.input)?;
    let cfg = a.sample.config(&spec);
    let size = cover_sample_size(&spec, a.eps, &cfg, x.dim())?;
    let s = draw_sample(&x, size, a.seed)?;
    write_points(&a.output, &s)?;
    println!("sample of {} points (formula size {size}) written to {}", s.len(), a.output.display());
    let mut status = Status::Pass;
    let mut check = Value::Null;
    if a.trials > 0 {
        let rep = verify_cover_sample(&spec, &x, &s, a.eps, a.trials, a.seed)?;
        if !rep.passed {
            status = Status::Fail;
        }
        println!(
            "{}: max pair error {:.6} vs {}",
            if rep.passed { "PASS" } else { "FAIL" },
            rep.max_error,
            a.eps
        );
        check = serde_json::to_value(&rep)?;
    }
    let body = json!({
        "n": x.len(),
        "d": x.dim(),
        "sample_config": cfg,
        "formula_size": size,
        "sample_size": s.len(),
        "verification": check,
        "wall_time_secs": start.elapsed().as_secs_f64(),
    });
    emit(a.report.as_deref(), &RunConfig::new("sample", a), body)?;
    Ok(status)
}

pub fn embed(a: &EmbedArgs) -> Result<Status> {
    let start = Instant::now();
    let anchors = load(&a.anchors)?;
    let queries = a.queries.as_deref().map(load).transpose()?;
    let cfg = a.embedding.config();
    let rows = queries.as_ref().map(|q| q.to_rows()).unwrap_or_default();
    let mut attempt = 0;
    let (emb, images) = loop {
        let emb = build_embedding(&anchors, a.eps_prime, attempt_seed(a.seed, attempt), &cfg)?;
        match emb.embed_all(&rows) {
            Ok(images) => break (emb, images),
            Err(Error::Infeasible { .. }) if attempt < cfg.retries => attempt += 1,
            Err(e) => return Err(e.into()),
        }
    };
    if let (Some(path), false) = (&a.output, images.is_empty()) {
        write_points(path, &PointSet::from_rows(&images)?)?;
    }
    println!(
        "embedding {} → {} dimensions (m = {}), {} queries mapped",
        emb.input_dim(),
        emb.output_dim(),
        emb.m(),
        images.len()
    );
    let mut status = Status::Pass;
    let mut check = Value::Null;
    if !rows.is_empty() {
        let rep = verify_terminal(&emb, &rows, a.eps_prime, a.slack)?;
        println!(
            "distortion range [{:.6}, {:.6}], nearest-anchor error {:.2e}",
            rep.min_ratio, rep.max_ratio, rep.nearest_rel_error
        );
        if a.check && !rep.passed {
            status = Status::Fail;
        }
        check = serde_json::to_value(&rep)?;
    }
    let body = json!({
        "anchors": anchors.len(),
        "input_dim": emb.input_dim(),
        "m": emb.m(),
        "output_dim": emb.output_dim(),
        "embedding_seed": emb.seed(),
        "attempts": attempt + 1,
        "embedding_config": cfg,
        "distortion": check,
        "wall_time_secs": start.elapsed().as_secs_f64(),
    });
    emit(a.report.as_deref(), &RunConfig::new("embed", a), body)?;
    Ok(status)
}

pub fn lowerbound(a: &LowerboundArgs) -> Result<Status> {
    let start = Instant::now();
    let grid = witness_grid(a.eps, a.dim)?;
    let cert = packing_certificate(&grid, a.eps);
    let residual = grid.corners.iter().map(|c| c.residual).fold(0.0, f64::max);
    println!(
        "packing of {} witnesses ({} corners, {} cells, max residual {residual:.2e})",
        cert.size, cert.corner_count, cert.cell_count
    );
    let witnesses: Vec<&Vec<u64>> = cert.witnesses.iter().map(|&i| &grid.corners[i].index).collect();
    let body = json!({
        "indices": grid.indices,
        "radii": grid.radii,
        "corner_count": cert.corner_count,
        "cell_count": cert.cell_count,
        "max_residual": residual,
        "packing_size": cert.size,
        "witnesses": witnesses,
        "wall_time_secs": start.elapsed().as_secs_f64(),
    });
    emit(a.report.as_deref(), &RunConfig::new("lowerbound", a), body)?;
    Ok(Status::Pass)
}

pub fn bound(a: &BoundArgs) -> Result<Status> {
    let b = combinatorial_bound(a.eps, a.dim)?;
    let h = hamming_count(a.dim, a.eps)?;
    let ratio = 2f64.powi(a.dim as i32) / h.count.to_f64().unwrap_or(f64::INFINITY);
    println!("M={}", b.m);
    println!("log2(M)={}", b.log2_m);
    println!("N={}", h.count);
    println!("2^d/N={ratio}");
    let body = json!({
        "bound": b,
        "hamming": h,
        "ratio": ratio,
    });
    emit(a.report.as_deref(), &RunConfig::new("bound", a), body)?;
    Ok(Status::Pass)
}
