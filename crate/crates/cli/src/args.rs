use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcover::kernels::{KernelFamily, KernelSpec};
use kcover::sampling::{SampleMode, SampleSizeConfig};
use kcover::terminal_jl::{EmbeddingConfig, ProjectionKind};
use kcover::{NetConfig, NetStrategy};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "cover", version, about = "Covers, cover-samples and terminal embeddings for kernel range spaces")]
pub struct Cli {
    /// Worker threads (default: logical cores). COVER_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Build an ε-cover of a point set.
    Build(BuildArgs),
    /// Monte Carlo check that a cover is an ε-cover.
    Verify(VerifyArgs),
    /// Draw an ε-cover-sample and optionally check it.
    Sample(SampleArgs),
    /// Build a terminal embedding of anchors and map queries through it.
    Embed(EmbedArgs),
    /// Witness-grid packing certificate for the Gaussian kernel.
    Lowerbound(LowerboundArgs),
    /// Combinatorial lower-bound calculator.
    Bound(BoundArgs),
    /// Sweep an (n, d, ε) grid from a TOML file and write one CSV row per run.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    /// gaussian, laplace, epanechnikov, triangle, quartic, triweight, truncated-gaussian
    #[arg(long, default_value = "gaussian")]
    pub kernel: KernelFamily,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Truncation level of the truncated Gaussian.
    #[arg(long, default_value_t = 0.1)]
    pub trunc_tau: f64,
}

impl KernelArgs {
    pub fn spec(&self) -> kcover::Result<KernelSpec> {
        KernelSpec::with_trunc_tau(self.kernel, self.sigma, self.trunc_tau)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Sample, embed, cover in the reduced space, pull back.
    Pipeline,
    /// Net cover directly in the input space.
    Net,
    /// Lattice cover in the input space.
    Naive,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    Gaussian,
    Orthogonal,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Lattice,
    Sampled,
    Auto,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleSizeArgs {
    /// vc, pd or recursive (default: pd for positive-definite kernels, vc otherwise).
    #[arg(long)]
    pub mode: Option<SampleMode>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub c_vc: Option<f64>,
    #[arg(long)]
    pub c_rec: Option<f64>,
}

impl SampleSizeArgs {
    pub fn config(&self, spec: &KernelSpec) -> SampleSizeConfig {
        let mut cfg = SampleSizeConfig::for_kernel(spec);
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        if let Some(c) = self.c_vc {
            cfg.c_vc = c;
        }
        if let Some(c) = self.c_rec {
            cfg.c_rec = c;
        }
        cfg
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbeddingArgs {
    #[arg(long)]
    pub c_jl: Option<f64>,
    #[arg(long, value_enum)]
    pub projection: Option<Projection>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub feas_tol: Option<f64>,
    /// Fresh projections tried after an infeasible solve.
    #[arg(long)]
    pub retries: Option<usize>,
}

impl EmbeddingArgs {
    pub fn config(&self) -> EmbeddingConfig {
        let mut cfg = EmbeddingConfig::default();
        if let Some(c) = self.c_jl {
            cfg.c_jl = c;
        }
        if let Some(p) = self.projection {
            cfg.projection = match p {
                Projection::Gaussian => ProjectionKind::Gaussian,
                Projection::Orthogonal => ProjectionKind::Orthogonal,
            };
        }
        if let Some(n) = self.max_iters {
            cfg.solver.max_iters = n;
        }
        if let Some(t) = self.feas_tol {
            cfg.solver.feas_tol = t;
        }
        if let Some(r) = self.retries {
            cfg.retries = r;
        }
        cfg
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NetArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub net: Strategy,
    /// Largest lattice cover attempted before falling back to a sampled net.
    #[arg(long, default_value_t = 200_000)]
    pub lattice_budget: usize,
    #[arg(long, default_value_t = 20_000)]
    pub candidates: usize,
}

impl NetArgs {
    pub fn config(&self) -> NetConfig {
        NetConfig {
            strategy: match self.net {
                Strategy::Lattice => NetStrategy::Lattice,
                Strategy::Sampled => NetStrategy::Sampled,
                Strategy::Auto => NetStrategy::Auto,
            },
            lattice_budget: self.lattice_budget,
            candidates: self.candidates,
            ..NetConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildArgs {
    /// Point set (CSV, or JSON array of rows).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "pipeline")]
    pub method: Method,
    /// Cover file (JSON).
    #[arg(long, visible_alias = "out")]
    pub output: PathBuf,
    /// Report file (JSON); printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub sample: SampleSizeArgs,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    pub net: NetArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub cover: PathBuf,
    /// Threshold (default: the cover's ε).
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample file (CSV or JSON by extension).
    #[arg(long)]
    pub output: PathBuf,
    /// Query pairs for the cover-sample check; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub sample: SampleSizeArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedArgs {
    #[arg(long)]
    pub anchors: PathBuf,
    /// Points to embed; their images go to --output.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long)]
    pub eps_prime: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Exit 2 when some distortion falls outside [1, 1 + ε′].
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub slack: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LowerboundArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// TOML grid description.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV results.
    #[arg(long)]
    pub output: PathBuf,
}
