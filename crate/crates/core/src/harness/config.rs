use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::synthetic::{gaussian_blobs, two_moons, BlobsSpec, MoonsSpec};
use crate::dataset::{
    load_dataset, normalize_views, DatasetFiles, MaskProtocol, MultiViewDataset, NormalizationMode,
};
use crate::error::{Error, Result};
use crate::graph::Sigma;
use crate::solver::{Ablation, AlphaInit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Files(DatasetFiles),
    Blobs(BlobsSpec),
    Moons(MoonsSpec),
}

impl DataSource {
    /// Loads or generates the dataset and applies the normalization.
    pub fn materialize(&self, mode: NormalizationMode) -> Result<MultiViewDataset> {
        let ds = match self {
            DataSource::Files(files) => load_dataset(files)?,
            DataSource::Blobs(spec) => gaussian_blobs(spec)?,
            DataSource::Moons(spec) => two_moons(spec)?,
        };
        normalize_views(&ds, mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanProtocol {
    RandomMissing,
    PairedSample,
    /// Use the dataset's own availability; rates and repeats only replicate it.
    Given,
}

impl PlanProtocol {
    pub fn mask_protocol(self) -> Option<MaskProtocol> {
        match self {
            PlanProtocol::RandomMissing => Some(MaskProtocol::RandomMissing),
            PlanProtocol::PairedSample => Some(MaskProtocol::PairedSample),
            PlanProtocol::Given => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlanProtocol::RandomMissing => "random-missing",
            PlanProtocol::PairedSample => "paired-sample",
            PlanProtocol::Given => "given",
        }
    }

    pub fn default_rates(self) -> Vec<f64> {
        match self {
            PlanProtocol::RandomMissing => vec![0.1, 0.3, 0.5],
            PlanProtocol::PairedSample => vec![0.3, 0.5, 0.7],
            PlanProtocol::Given => vec![0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPlan {
    pub protocol: PlanProtocol,
    /// Missing rates (random-missing) or paired fractions (paired-sample).
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub repeats: usize,
}

fn one() -> usize {
    1
}

impl MaskPlan {
    pub fn resolved_rates(&self) -> Vec<f64> {
        self.rates
            .clone()
            .unwrap_or_else(|| self.protocol.default_rates())
    }
}

impl Default for MaskPlan {
    fn default() -> Self {
        Self {
            protocol: PlanProtocol::RandomMissing,
            rates: None,
            repeats: 1,
        }
    }
}

/// Parameter grid. Every combination of `lambda x beta x r x k` is a grid
/// point; `gamma` and `sigma` are shared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "default_lambdas")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_betas")]
    pub beta: Vec<f64>,
    #[serde(default = "default_rs")]
    pub r: Vec<f64>,
    #[serde(default = "default_ks")]
    pub k: Vec<usize>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub sigma: Sigma,
}

fn default_lambdas() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

fn default_betas() -> Vec<f64> {
    vec![1e-4, 1e-3, 1e-2]
}

fn default_rs() -> Vec<f64> {
    vec![2.0, 3.0, 5.0]
}

fn default_ks() -> Vec<usize> {
    vec![5]
}

fn default_gamma() -> f64 {
    1.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lambda: default_lambdas(),
            beta: default_betas(),
            r: default_rs(),
            k: default_ks(),
            gamma: default_gamma(),
            sigma: Sigma::Auto,
        }
    }
}

impl GridSpec {
    /// The full candidate sets used for per-dataset tuning:
    /// `lambda in 10^[-7, 5]`, `beta in 10^[-8, 5]`, `r in {2,3,5,...,15}`.
    pub fn full_candidates(k: Vec<usize>) -> Self {
        Self {
            lambda: (-7..=5).map(|x| 10f64.powi(x)).collect(),
            beta: (-8..=5).map(|x| 10f64.powi(x)).collect(),
            r: vec![2.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0],
            k,
            gamma: 1.0,
            sigma: Sigma::Auto,
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len() * self.beta.len() * self.r.len() * self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in `lambda`-major order.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(self.len());
        for &lambda in &self.lambda {
            for &beta in &self.beta {
                for &r in &self.r {
                    for &k in &self.k {
                        out.push(GridPoint {
                            index: out.len(),
                            lambda,
                            beta,
                            r,
                            k,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    pub lambda: f64,
    pub beta: f64,
    pub r: f64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Latent dimension; defaults to the number of label classes.
    #[serde(default)]
    pub c: Option<usize>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub alpha_init: AlphaInit,
    #[serde(default)]
    pub ablation: Ablation,
}

fn default_max_iter() -> usize {
    300
}

fn default_tol() -> f64 {
    1e-6
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            c: None,
            max_iter: default_max_iter(),
            tol: default_tol(),
            alpha_init: AlphaInit::Uniform,
            ablation: Ablation::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSettings {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_kmeans_iter")]
    pub max_iter: usize,
}

fn default_restarts() -> usize {
    20
}

fn default_kmeans_iter() -> usize {
    300
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self {
            restarts: default_restarts(),
            max_iter: default_kmeans_iter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DataSource,
    #[serde(default)]
    pub normalization: NormalizationMode,
    #[serde(default)]
    pub mask: MaskPlan,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub metrics: MetricSettings,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; `None` uses all cores.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Also write `trace_<run id>.csv` for every trial.
    #[serde(default)]
    pub write_traces: bool,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig(
                "every grid axis needs at least one value".into(),
            ));
        }
        if self.mask.repeats == 0 {
            return Err(Error::InvalidConfig(
                "mask repeats must be at least 1".into(),
            ));
        }
        let rates = self.mask.resolved_rates();
        if rates.is_empty() {
            return Err(Error::InvalidConfig("mask rates must be non-empty".into()));
        }
        if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidConfig(format!(
                "mask rate {r} outside [0, 1]"
            )));
        }
        if self.grid.k.contains(&0) {
            return Err(Error::InvalidConfig("k values must be positive".into()));
        }
        if self.metrics.restarts == 0 {
            return Err(Error::InvalidConfig(
                "k-means restarts must be at least 1".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}
