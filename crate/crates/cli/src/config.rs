// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};
use wavepacket::{Prototypes, SystemParams};

/// Everything a command needs, read from one JSON object. Missing keys take
/// their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: SystemParams,
    pub prototype: String,
    /// Nodes per axis of the coverage grid.
    pub grid_resolution: usize,
    /// Gram pruning threshold.
    pub threshold: f64,
    pub output_dir: PathBuf,
    /// Worker threads; `null` means available parallelism.
    pub threads: Option<usize>,
    pub seed: u64,
    pub triangle_trials: u64,
    /// Decay exponent for the summability check.
    pub summability_exponent: f64,
    pub cg_max_iterations: usize,
    pub cg_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SystemParams::default(),
            prototype: "gaussian".into(),
            grid_resolution: 256,
            threshold: wavepacket::gram::DEFAULT_THRESHOLD,
            output_dir: PathBuf::from("out"),
            threads: None,
            seed: 0,
            triangle_trials: 100_000,
            summability_exponent: 6.0,
            cg_max_iterations: 200,
            cg_tolerance: 1e-5,
        }
    }
}

/// Flags that override individual config keys.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Accepts `inf`.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Accepts `inf`.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub j_max: Option<u32>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub k_radius: Option<u32>,
    #[arg(long, global = true)]
    pub prototype: Option<String>,
    #[arg(long, global = true)]
    pub grid_resolution: Option<usize>,
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Output directory.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub triangle_trials: Option<u64>,
    #[arg(long, global = true)]
    pub cg_max_iterations: Option<usize>,
    #[arg(long, global = true)]
    pub cg_tolerance: Option<f64>,
}

macro_rules! apply {
    ($target:expr, $src:expr, $($field:ident),*) => {
        $(if let Some(v) = $src.$field.clone() { $target.$field = v; })*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Config file (or defaults) with flag overrides applied, validated.
    pub fn resolve(o: &Overrides) -> anyhow::Result<Self> {
        let mut c = match &o.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        apply!(c.params, o, alpha, beta, s, p, q, epsilon, j_max, delta, k_radius);
        apply!(c, o, prototype, grid_resolution, threshold, seed, triangle_trials, cg_max_iterations, cg_tolerance);
        if let Some(dir) = &o.out {
            c.output_dir = dir.clone();
        }
        if o.threads.is_some() {
            c.threads = o.threads;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.params.validate()?;
        self.prototypes()?;
        if self.grid_resolution < 64 {
            bail!("grid_resolution must be at least 64, got {}", self.grid_resolution);
        }
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            bail!("threshold must be finite and non-negative, got {}", self.threshold);
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        if !(self.summability_exponent > 5.0) {
            bail!("summability_exponent must exceed 5, got {}", self.summability_exponent);
        }
        if !(self.cg_tolerance > 0.0) || self.cg_max_iterations == 0 {
            bail!("CG needs a positive tolerance and iteration cap");
        }
        Ok(())
    }

    pub fn prototypes(&self) -> anyhow::Result<Prototypes> {
        Ok(Prototypes::from_label(&self.prototype)?)
    }

    /// Runs `f` on a pool with the configured thread count.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            b = b.num_threads(n);
        }
        Ok(b.build()?.install(f))
    }
}
