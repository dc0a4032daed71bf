//! Plain-text state snapshots: one CSV per matrix plus a JSON manifest, and
//! the objective trace as CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SolverState, TraceEntry};
use crate::dataset::{read_matrix_csv, write_matrix_csv};
use crate::error::{Error, Result};

const MANIFEST: &str = "state.json";

#[derive(Debug, Serialize, Deserialize)]
struct StateManifest {
    format: String,
    views: usize,
    c: usize,
    n: usize,
    alpha: Vec<f64>,
    converged: bool,
    u_files: Vec<String>,
    p_files: Vec<String>,
    q_file: String,
    trace_file: String,
}

/// Writes `U_<v>.csv`, `P_<v>.csv`, `Q.csv`, `trace.csv` and `state.json`
/// into `dir`, creating it if needed.
pub fn save_state(state: &SolverState, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let l = state.u.len();
    let u_files: Vec<String> = (0..l).map(|v| format!("U_{v}.csv")).collect();
    let p_files: Vec<String> = (0..l).map(|v| format!("P_{v}.csv")).collect();
    for v in 0..l {
        write_matrix_csv(&dir.join(&u_files[v]), &state.u[v])?;
        write_matrix_csv(&dir.join(&p_files[v]), &state.p[v])?;
    }
    write_matrix_csv(&dir.join("Q.csv"), &state.q)?;
    write_trace_csv(state, &dir.join("trace.csv"))?;
    let manifest = StateManifest {
        format: "lsimvc-state-v1".into(),
        views: l,
        c: state.q.nrows(),
        n: state.q.ncols(),
        alpha: state.alpha.clone(),
        converged: state.converged,
        u_files,
        p_files,
        q_file: "Q.csv".into(),
        trace_file: "trace.csv".into(),
    };
    let path = dir.join(MANIFEST);
    let body = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, body).map_err(|e| Error::io(&path, e))
}

pub fn load_state(dir: &Path) -> Result<SolverState> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: StateManifest = serde_json::from_str(&text)?;
    let read = |name: &str| read_matrix_csv(&dir.join(name));
    let u = manifest
        .u_files
        .iter()
        .map(|f| read(f))
        .collect::<Result<Vec<_>>>()?;
    let p = manifest
        .p_files
        .iter()
        .map(|f| read(f))
        .collect::<Result<Vec<_>>>()?;
    let q = if manifest.n == 0 || manifest.c == 0 {
        ndarray::Array2::zeros((manifest.c, manifest.n))
    } else {
        read(&manifest.q_file)?
    };
    if u.len() != manifest.views || p.len() != manifest.views || q.dim() != (manifest.c, manifest.n)
    {
        return Err(Error::Dimension(format!(
            "state in {} is inconsistent with its manifest",
            dir.display()
        )));
    }
    let trace = read_trace_csv(&dir.join(&manifest.trace_file))?;
    Ok(SolverState {
        u,
        p,
        q,
        alpha: manifest.alpha,
        trace,
        converged: manifest.converged,
    })
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with columns `iteration, objective, e_1.., alpha_1..`; an empty trace
/// gives a header-only file.
pub fn write_trace_csv(state: &SolverState, path: &Path) -> Result<()> {
    let l = state.alpha.len();
    let mut out = String::from("iteration,objective");
    for v in 1..=l {
        out.push_str(&format!(",e_{v}"));
    }
    for v in 1..=l {
        out.push_str(&format!(",alpha_{v}"));
    }
    out.push('\n');
    for (k, entry) in state.trace.iter().enumerate() {
        out.push_str(&format!("{},{}", k + 1, fmt(entry.objective)));
        for x in entry.e.iter().chain(&entry.alpha) {
            out.push(',');
            out.push_str(&fmt(*x));
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let width = reader.headers()?.len();
    if width < 2 || width % 2 != 0 {
        return Err(Error::Dimension(format!(
            "{}: malformed trace header",
            path.display()
        )));
    }
    let l = (width - 2) / 2;
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .enumerate()
            .skip(1)
            .map(|(col, cell)| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    row: row + 2,
                    col: col + 1,
                    msg: format!("not a number: {cell:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(TraceEntry {
            objective: values[0],
            e: values[1..1 + l].to_vec(),
            alpha: values[1 + l..].to_vec(),
        });
    }
    Ok(out)
}
