use std::fs;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use kcover::covering::{build_net_cover, naive_cover_budgeted};
use kcover::kernels::{KernelFamily, KernelSpec};
use kcover::oracle::verify_cover;
use kcover::pipeline::{build_cover, PipelineConfig};
use kcover::{NetConfig, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::args::{BenchArgs, Method};
use crate::commands::{RunConfig, Status};

fn default_kernel() -> String {
    "gaussian".into()
}
fn default_sigma() -> f64 {
    1.0
}
fn default_method() -> String {
    "pipeline".into()
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_trials() -> usize {
    2000
}

/// Grid description read from TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub eps: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Row {
    n: usize,
    d: usize,
    eps: f64,
    seed: u64,
    method: String,
    cover_size: usize,
    sample_size: Option<usize>,
    m: Option<usize>,
    warnings: Option<usize>,
    max_error: f64,
    passed: bool,
    build_secs: f64,
    verify_secs: f64,
}

/// Points uniform in `[0, 1]^d`.
fn unit_cube(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(PointSet::from_flat((0..n * d).map(|_| rng.random::<f64>()).collect(), d)?)
}

pub fn run(a: &BenchArgs) -> Result<Status> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let cfg: BenchConfig = toml::from_str(&text).with_context(|| format!("parsing {}", a.config.display()))?;
    let family: KernelFamily = cfg.kernel.parse()?;
    let spec = KernelSpec::new(family, cfg.sigma)?;
    let Ok(method) = Method::from_str(&cfg.method, true) else {
        bail!("unknown method {:?} (expected pipeline, net or naive)", cfg.method);
    };
    log::info!("bench config {}", serde_json::to_string(&RunConfig::new("bench", &cfg))?);

    let mut out = csv::Writer::from_path(&a.output).with_context(|| format!("writing {}", a.output.display()))?;
    let net = NetConfig::default();
    for &n in &cfg.n {
        for &d in &cfg.d {
            for &eps in &cfg.eps {
                for &seed in &cfg.seeds {
                    let x = unit_cube(n, d, seed)?;
                    let start = Instant::now();
                    let (cover, report) = match method {
                        Method::Pipeline => {
                            let o = build_cover(&spec, &x, eps, &PipelineConfig::for_kernel(&spec), seed)?;
                            (o.cover, Some(o.report))
                        }
                        Method::Net => (build_net_cover(&spec, &x, eps, &net, seed)?, None),
                        Method::Naive => (naive_cover_budgeted(&spec, &x, eps, Some(net.lattice_budget))?, None),
                    };
                    let build_secs = start.elapsed().as_secs_f64();
                    let start = Instant::now();
                    let rep = verify_cover(&spec, &x, &cover, eps, cfg.trials, seed)?;
                    let row = Row {
                        n,
                        d,
                        eps,
                        seed,
                        method: cfg.method.to_lowercase(),
                        cover_size: cover.size(),
                        sample_size: report.as_ref().map(|r| r.sample_size),
                        m: report.as_ref().map(|r| r.m),
                        warnings: report.as_ref().map(|r| r.warnings),
                        max_error: rep.max_error,
                        passed: rep.passed,
                        build_secs,
                        verify_secs: start.elapsed().as_secs_f64(),
                    };
                    log::info!("n={n} d={d} eps={eps} seed={seed}: |Q|={} err={:.4}", row.cover_size, row.max_error);
                    out.serialize(row)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(Status::Pass)
}
