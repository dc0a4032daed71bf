//! Experiment sweeps: for every grid point, mask rate and repeat, draw a
//! mask, build indicators and graphs, fit, cluster and score. Trials run on a
//! bounded worker pool; results are written in (variant, grid, rate, repeat)
//! order so output files are reproducible.

mod config;
mod output;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{apply_mask, MaskSpec, MultiViewDataset};
use crate::error::{Error, Result};
use crate::graph::{build_fused_graphs, GraphParams};
use crate::metrics::{evaluate, KMeansOptions};
use crate::seed::derive;
use crate::solver::{fit, write_trace_csv, SolverConfig, SolverState};

pub use config::{
    DataSource, ExperimentConfig, GridPoint, GridSpec, MaskPlan, MetricSettings, PlanProtocol,
    SolverSettings,
};
pub use output::{write_aggregate_csv, write_manifest, write_trials_csv};

const MASK_TAG: u64 = 0x4D41_534B;
const KMEANS_TAG: u64 = 0x4B4D_4541;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationKind {
    Weight,
    Sparsity,
    Graph,
}

impl AblationKind {
    pub fn label(self) -> &'static str {
        match self {
            AblationKind::Weight => "wo-weight",
            AblationKind::Sparsity => "wo-sparsity",
            AblationKind::Graph => "wo-graph",
        }
    }
}

/// Which model a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Full,
    Without(AblationKind),
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Without(kind) => kind.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub run_id: String,
    pub variant: String,
    pub grid_index: usize,
    pub protocol: String,
    pub rate: f64,
    pub repeat: usize,
    pub mask_seed: u64,
    pub trial_seed: u64,
    pub lambda: f64,
    pub beta: f64,
    pub r: f64,
    pub k: usize,
    pub gamma: f64,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub purity: Option<f64>,
    pub iterations: Option<usize>,
    pub final_objective: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

impl TrialRecord {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Population standard deviation; zero for a single value, NaN when empty.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Aggregate over the repeats of one (variant, grid point, rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub variant: String,
    pub grid_index: usize,
    pub protocol: String,
    pub rate: f64,
    pub lambda: f64,
    pub beta: f64,
    pub r: f64,
    pub k: usize,
    pub gamma: f64,
    pub trials: Vec<TrialRecord>,
    pub failed: usize,
    pub acc: MeanStd,
    pub nmi: MeanStd,
    pub purity: MeanStd,
    pub iterations_mean: f64,
    pub wall_seconds: f64,
}

impl RunRecord {
    fn from_trials(trials: Vec<TrialRecord>) -> Self {
        let first = &trials[0];
        let ok: Vec<&TrialRecord> = trials.iter().filter(|t| t.succeeded()).collect();
        let pick =
            |f: fn(&TrialRecord) -> Option<f64>| ok.iter().filter_map(|t| f(t)).collect::<Vec<_>>();
        let iterations: Vec<f64> = ok
            .iter()
            .filter_map(|t| t.iterations.map(|i| i as f64))
            .collect();
        Self {
            run_id: format!("{}-g{}-rate{}", first.variant, first.grid_index, first.rate),
            variant: first.variant.clone(),
            grid_index: first.grid_index,
            protocol: first.protocol.clone(),
            rate: first.rate,
            lambda: first.lambda,
            beta: first.beta,
            r: first.r,
            k: first.k,
            gamma: first.gamma,
            failed: trials.len() - ok.len(),
            acc: MeanStd::of(&pick(|t| t.acc)),
            nmi: MeanStd::of(&pick(|t| t.nmi)),
            purity: MeanStd::of(&pick(|t| t.purity)),
            iterations_mean: MeanStd::of(&iterations).mean,
            wall_seconds: trials.iter().map(|t| t.seconds).sum(),
            trials,
        }
    }
}

/// Everything needed to run one trial of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct TrialKey {
    pub variant: Variant,
    pub point: GridPoint,
    pub rate: f64,
    pub repeat: usize,
}

pub struct Sweep {
    cfg: ExperimentConfig,
    full: MultiViewDataset,
    labels: Vec<usize>,
    c: usize,
}

impl Sweep {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let full = cfg.dataset.materialize(cfg.normalization)?;
        let labels = full
            .labels()
            .ok_or_else(|| Error::InvalidConfig("scoring needs ground-truth labels".into()))?
            .to_vec();
        let c = match cfg.solver.c {
            Some(c) => c,
            None => full.n_classes().unwrap_or(0),
        };
        if c == 0 {
            return Err(Error::InvalidConfig(
                "could not determine the number of clusters".into(),
            ));
        }
        if cfg.mask.protocol == PlanProtocol::Given || full.is_complete() {
            Ok(Self {
                cfg,
                full,
                labels,
                c,
            })
        } else {
            Err(Error::InvalidConfig(
                "masking protocols need complete views; use protocol \"given\" for pre-masked data"
                    .into(),
            ))
        }
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn dataset(&self) -> &MultiViewDataset {
        &self.full
    }

    pub fn clusters(&self) -> usize {
        self.c
    }

    pub fn mask_seed(&self, rate: f64, repeat: usize) -> u64 {
        derive(&[
            self.cfg.master_seed,
            MASK_TAG,
            rate.to_bits(),
            repeat as u64,
        ])
    }

    pub fn trial_seed(&self, grid_index: usize, rate: f64, repeat: usize) -> u64 {
        derive(&[
            self.cfg.master_seed,
            grid_index as u64,
            rate.to_bits(),
            repeat as u64,
        ])
    }

    pub fn masked(&self, rate: f64, repeat: usize) -> Result<MultiViewDataset> {
        match self.cfg.mask.protocol.mask_protocol() {
            None => Ok(self.full.clone()),
            Some(protocol) => {
                let spec = MaskSpec::new(protocol, rate, self.mask_seed(rate, repeat))?;
                apply_mask(&self.full, &spec)
            }
        }
    }

    pub fn solver_config(&self, key: &TrialKey) -> SolverConfig {
        let mut ablation = self.cfg.solver.ablation;
        match key.variant {
            Variant::Full => {}
            Variant::Without(AblationKind::Weight) => ablation.weight_on = false,
            Variant::Without(AblationKind::Sparsity) => ablation.sparsity_on = false,
            Variant::Without(AblationKind::Graph) => ablation.graph_on = false,
        }
        SolverConfig {
            lambda: key.point.lambda,
            beta: key.point.beta,
            r: key.point.r,
            c: self.c,
            max_iter: self.cfg.solver.max_iter,
            tol: self.cfg.solver.tol,
            seed: self.trial_seed(key.point.index, key.rate, key.repeat),
            ablation,
            alpha_init: self.cfg.solver.alpha_init,
        }
    }

    /// Mask, graphs, fit, k-means and scores for one trial.
    pub fn run_trial(
        &self,
        key: &TrialKey,
    ) -> Result<(crate::metrics::ClusteringResult, SolverState)> {
        let ds = self.masked(key.rate, key.repeat)?;
        let indicators = ds.indicators()?;
        let solver_cfg = self.solver_config(key);
        let graph_params = GraphParams {
            k: key.point.k,
            sigma: self.cfg.grid.sigma,
            gamma: if solver_cfg.ablation.graph_on {
                self.cfg.grid.gamma
            } else {
                0.0
            },
        };
        let graphs = build_fused_graphs(&ds, &graph_params)?;
        let state = fit(&ds, &graphs, &indicators, &solver_cfg)?;
        let opts = KMeansOptions {
            restarts: self.cfg.metrics.restarts,
            max_iter: self.cfg.metrics.max_iter,
        };
        let scores = evaluate(
            state.q.view(),
            &self.labels,
            self.c,
            &opts,
            solver_cfg.seed ^ KMEANS_TAG,
        )?;
        Ok((scores, state))
    }

    fn record(&self, key: &TrialKey) -> (TrialRecord, Option<SolverState>) {
        let start = Instant::now();
        let outcome = self.run_trial(key);
        let seconds = start.elapsed().as_secs_f64();
        let variant = key.variant.label().to_string();
        let mut rec = TrialRecord {
            run_id: format!(
                "{}-g{}-rate{}-rep{}",
                variant, key.point.index, key.rate, key.repeat
            ),
            variant,
            grid_index: key.point.index,
            protocol: self.cfg.mask.protocol.name().to_string(),
            rate: key.rate,
            repeat: key.repeat,
            mask_seed: self.mask_seed(key.rate, key.repeat),
            trial_seed: self.trial_seed(key.point.index, key.rate, key.repeat),
            lambda: key.point.lambda,
            beta: key.point.beta,
            r: key.point.r,
            k: key.point.k,
            gamma: self.cfg.grid.gamma,
            acc: None,
            nmi: None,
            purity: None,
            iterations: None,
            final_objective: None,
            error: None,
            seconds,
        };
        match outcome {
            Ok((scores, state)) => {
                rec.acc = Some(scores.acc);
                rec.nmi = Some(scores.nmi);
                rec.purity = Some(scores.purity);
                rec.iterations = Some(state.iterations());
                rec.final_objective = state.trace.last().map(|t| t.objective);
                (rec, Some(state))
            }
            Err(e) => {
                rec.error = Some(e.to_string());
                (rec, None)
            }
        }
    }

    pub fn keys(&self, variants: &[Variant]) -> Vec<TrialKey> {
        let points = self.cfg.grid.points();
        let rates = self.cfg.mask.resolved_rates();
        let mut keys = Vec::new();
        for &variant in variants {
            for &point in &points {
                for &rate in &rates {
                    for repeat in 0..self.cfg.mask.repeats {
                        keys.push(TrialKey {
                            variant,
                            point,
                            rate,
                            repeat,
                        });
                    }
                }
            }
        }
        keys
    }

    /// Runs every trial of every variant and groups them into aggregates.
    /// Failed trials are recorded with their error and do not stop the sweep.
    pub fn run(&self, variants: &[Variant]) -> Result<Vec<RunRecord>> {
        let keys = self.keys(variants);
        let trace_dir = if self.cfg.write_traces {
            self.cfg.output.clone()
        } else {
            None
        };
        let work = || -> Result<Vec<TrialRecord>> {
            keys.par_iter()
                .map(|key| {
                    let (rec, state) = self.record(key);
                    if let (Some(dir), Some(state)) = (&trace_dir, state) {
                        emit_convergence_trace(
                            &state,
                            &dir.join(format!("trace_{}.csv", rec.run_id)),
                        )?;
                    }
                    Ok(rec)
                })
                .collect()
        };
        let trials = match self.cfg.workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
                .install(work)?,
            None => work()?,
        };
        let per_group = self.cfg.mask.repeats;
        let mut records = Vec::new();
        let mut iter = trials.into_iter().peekable();
        while iter.peek().is_some() {
            let group: Vec<TrialRecord> = iter.by_ref().take(per_group).collect();
            records.push(RunRecord::from_trials(group));
        }
        Ok(records)
    }
}

fn write_outputs(
    cfg: &ExperimentConfig,
    records: &[RunRecord],
    variants: &[Variant],
) -> Result<()> {
    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_trials_csv(&dir.join("trials.csv"), records)?;
        write_aggregate_csv(&dir.join("aggregate.csv"), records)?;
        write_manifest(&dir.join("manifest.json"), cfg, records, variants)?;
    }
    Ok(())
}

/// Full-model sweep. Writes `trials.csv`, `aggregate.csv` and `manifest.json`
/// when the config names an output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    let variants = [Variant::Full];
    let records = Sweep::new(cfg.clone())?.run(&variants)?;
    write_outputs(cfg, &records, &variants)?;
    Ok(records)
}

/// Same pipeline for the full model and the model without `which`; rows are
/// labelled `full` and `wo-<which>`.
pub fn run_ablation(cfg: &ExperimentConfig, which: AblationKind) -> Result<Vec<RunRecord>> {
    let variants = [Variant::Full, Variant::Without(which)];
    let records = Sweep::new(cfg.clone())?.run(&variants)?;
    write_outputs(cfg, &records, &variants)?;
    Ok(records)
}

/// Objective trace of a completed fit as plot-ready CSV.
pub fn emit_convergence_trace(state: &SolverState, path: &Path) -> Result<()> {
    write_trace_csv(state, path)
}
