use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lsimvc_core::dataset::{load_dataset, DatasetFiles};
use lsimvc_core::harness::{
    emit_convergence_trace, run_ablation, run_experiment, AblationKind, ExperimentConfig,
    RunRecord, Sweep, TrialKey, Variant,
};
use lsimvc_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lsimvc",
    version,
    about = "Incomplete multi-view clustering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::from_json_file(&self.config)?;
        if let Some(out) = &self.output {
            cfg.output = Some(out.clone());
        }
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Weight,
    Sparsity,
    Graph,
}

impl From<Which> for AblationKind {
    fn from(w: Which) -> Self {
        match w {
            Which::Weight => AblationKind::Weight,
            Which::Sparsity => AblationKind::Sparsity,
            Which::Graph => AblationKind::Graph,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full model over the grid, mask rates and repeats.
    Run(Common),
    /// Run the full model and one ablated variant side by side.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Fit a single trial and write its objective trace.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        grid_index: usize,
        #[arg(long, default_value_t = 0)]
        rate_index: usize,
        #[arg(long, default_value_t = 0)]
        repeat: usize,
    },
    /// Load a dataset and report its shape, or the first problem found.
    ValidateData {
        /// Take the dataset from an experiment config.
        #[arg(long, conflicts_with = "view")]
        config: Option<PathBuf>,
        /// View CSV files (features x instances), in view order.
        #[arg(long)]
        view: Vec<PathBuf>,
        /// Availability sidecars, one per view in order; `-` marks a complete view.
        #[arg(long)]
        availability: Vec<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
}

fn print_records(records: &[RunRecord]) {
    println!(
        "{:<28} {:>6} {:>10} {:>10} {:>6} {:>4} {:>16} {:>16} {:>16} {:>6}",
        "run", "rate", "lambda", "beta", "r", "k", "acc", "nmi", "purity", "failed"
    );
    for r in records {
        println!(
            "{:<28} {:>6} {:>10} {:>10} {:>6} {:>4} {:>7.4} ± {:<6.4} {:>7.4} ± {:<6.4} {:>7.4} ± {:<6.4} {:>6}",
            r.run_id,
            r.rate,
            r.lambda,
            r.beta,
            r.r,
            r.k,
            r.acc.mean,
            r.acc.std,
            r.nmi.mean,
            r.nmi.std,
            r.purity.mean,
            r.purity.std,
            r.failed
        );
    }
    let failed: usize = records.iter().map(|r| r.failed).sum();
    if failed > 0 {
        eprintln!("{failed} trial(s) failed:");
        for t in records
            .iter()
            .flat_map(|r| &r.trials)
            .filter(|t| !t.succeeded())
        {
            eprintln!("  {}: {}", t.run_id, t.error.as_deref().unwrap_or(""));
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.load()?;
            print_records(&run_experiment(&cfg)?);
        }
        Command::Ablate { common, which } => {
            let cfg = common.load()?;
            print_records(&run_ablation(&cfg, which.into())?);
        }
        Command::Trace {
            common,
            grid_index,
            rate_index,
            repeat,
        } => {
            let cfg = common.load()?;
            let out = cfg
                .output
                .clone()
                .ok_or_else(|| Error::InvalidConfig("trace needs an output directory".into()))?;
            let sweep = Sweep::new(cfg)?;
            let points = sweep.config().grid.points();
            let rates = sweep.config().mask.resolved_rates();
            let point = *points.get(grid_index).ok_or_else(|| {
                Error::InvalidConfig(format!("grid index {grid_index} out of range"))
            })?;
            let rate = *rates.get(rate_index).ok_or_else(|| {
                Error::InvalidConfig(format!("rate index {rate_index} out of range"))
            })?;
            let key = TrialKey {
                variant: Variant::Full,
                point,
                rate,
                repeat,
            };
            let (scores, state) = sweep.run_trial(&key)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            let path = out.join(format!(
                "trace_full-g{grid_index}-rate{rate}-rep{repeat}.csv"
            ));
            emit_convergence_trace(&state, &path)?;
            println!(
                "{} iterations (converged: {}), acc {:.4}, nmi {:.4}, purity {:.4}; trace written to {}",
                state.iterations(),
                state.converged,
                scores.acc,
                scores.nmi,
                scores.purity,
                path.display()
            );
        }
        Command::ValidateData {
            config,
            view,
            availability,
            labels,
        } => {
            let ds = match config {
                Some(path) => {
                    let cfg = ExperimentConfig::from_json_file(&path)?;
                    cfg.dataset.materialize(cfg.normalization)?
                }
                None => load_dataset(&DatasetFiles {
                    views: view,
                    availability: availability
                        .into_iter()
                        .map(|p| (p.as_os_str() != "-").then_some(p))
                        .collect(),
                    labels,
                })?,
            };
            println!("samples: {}", ds.n_samples());
            println!("views:   {}", ds.n_views());
            for v in ds.views() {
                println!(
                    "  view {}: {} features x {} instances",
                    v.view_id(),
                    v.dim(),
                    v.len()
                );
            }
            match ds.n_classes() {
                Some(k) => println!("classes: {k}"),
                None => println!("classes: (no labels)"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
