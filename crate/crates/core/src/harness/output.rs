use std::fs;
use std::path::Path;

use serde_json::json;

use super::{ExperimentConfig, RunRecord, Variant};
use crate::error::{Error, Result};

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per trial. Contains no timings, so identical configs and seeds
/// produce byte-identical files.
pub fn write_trials_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let header = [
        "run_id",
        "variant",
        "grid_index",
        "protocol",
        "rate",
        "repeat",
        "mask_seed",
        "trial_seed",
        "lambda",
        "beta",
        "r",
        "k",
        "gamma",
        "acc",
        "nmi",
        "purity",
        "iterations",
        "final_objective",
        "error",
    ];
    let rows = records
        .iter()
        .flat_map(|r| &r.trials)
        .map(|t| {
            vec![
                t.run_id.clone(),
                t.variant.clone(),
                t.grid_index.to_string(),
                t.protocol.clone(),
                t.rate.to_string(),
                t.repeat.to_string(),
                t.mask_seed.to_string(),
                t.trial_seed.to_string(),
                t.lambda.to_string(),
                t.beta.to_string(),
                t.r.to_string(),
                t.k.to_string(),
                t.gamma.to_string(),
                opt(t.acc),
                opt(t.nmi),
                opt(t.purity),
                opt(t.iterations),
                opt(t.final_objective),
                t.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(path, &header, rows)
}

/// One row per (variant, grid point, rate) with mean and std over repeats.
pub fn write_aggregate_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let header = [
        "run_id",
        "variant",
        "grid_index",
        "protocol",
        "rate",
        "lambda",
        "beta",
        "r",
        "k",
        "gamma",
        "trials",
        "failed",
        "acc_mean",
        "acc_std",
        "nmi_mean",
        "nmi_std",
        "purity_mean",
        "purity_std",
        "iterations_mean",
    ];
    let rows = records
        .iter()
        .map(|r| {
            vec![
                r.run_id.clone(),
                r.variant.clone(),
                r.grid_index.to_string(),
                r.protocol.clone(),
                r.rate.to_string(),
                r.lambda.to_string(),
                r.beta.to_string(),
                r.r.to_string(),
                r.k.to_string(),
                r.gamma.to_string(),
                r.trials.len().to_string(),
                r.failed.to_string(),
                r.acc.mean.to_string(),
                r.acc.std.to_string(),
                r.nmi.mean.to_string(),
                r.nmi.std.to_string(),
                r.purity.mean.to_string(),
                r.purity.std.to_string(),
                r.iterations_mean.to_string(),
            ]
        })
        .collect();
    write_csv(path, &header, rows)
}

/// Resolved config, versions, failed trials and wall-clock timings.
pub fn write_manifest(
    path: &Path,
    cfg: &ExperimentConfig,
    records: &[RunRecord],
    variants: &[Variant],
) -> Result<()> {
    let failed: Vec<_> = records
        .iter()
        .flat_map(|r| &r.trials)
        .filter(|t| !t.succeeded())
        .map(|t| json!({ "run_id": t.run_id, "error": t.error }))
        .collect();
    let timings: Vec<_> = records
        .iter()
        .map(|r| json!({ "run_id": r.run_id, "wall_seconds": r.wall_seconds }))
        .collect();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "variants": variants.iter().map(|v| v.label()).collect::<Vec<_>>(),
        "trials": records.iter().map(|r| r.trials.len()).sum::<usize>(),
        "failed_trials": failed,
        "timings": timings,
    });
    let body = serde_json::to_string_pretty(&manifest)?;
    fs::write(path, body).map_err(|e| Error::io(path, e))
}
