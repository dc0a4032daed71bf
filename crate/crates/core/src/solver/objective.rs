use ndarray::Array2;

use super::{validate_problem, SolverConfig, SolverState};
use crate::dataset::{IndicatorMatrix, MultiViewDataset};
use crate::error::Result;
use crate::graph::FusedGraph;

/// Per-view terms of the objective at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewCost {
    pub reconstruction: f64,
    pub l1: f64,
    pub graph: f64,
}

impl ViewCost {
    /// `reconstruction + beta * l1 + lambda * graph`.
    pub fn total(&self, lambda: f64, beta: f64) -> f64 {
        self.reconstruction + beta * self.l1 + lambda * self.graph
    }
}

pub(crate) fn view_cost(
    x: &Array2<f64>,
    u: &Array2<f64>,
    p: &Array2<f64>,
    q: &Array2<f64>,
    g: &IndicatorMatrix,
    w: &FusedGraph,
) -> ViewCost {
    let residual = x - &u.dot(p);
    let reconstruction = residual.iter().map(|v| v * v).sum();
    let l1 = p.iter().map(|v| v.abs()).sum();
    let mut graph = 0.0;
    for i in 0..w.len() {
        let pi = p.column(i);
        for &(j, wij) in w.row(i) {
            let qj = q.column(g.sample_of(j));
            let mut dist = 0.0;
            for (a, b) in pi.iter().zip(qj.iter()) {
                dist += (a - b) * (a - b);
            }
            graph += wij * dist;
        }
    }
    ViewCost {
        reconstruction,
        l1,
        graph,
    }
}

/// Per-view costs `e_v` under the configuration's ablation switches, so that
/// the objective equals `sum_v alpha_v^r e_v`.
pub fn compute_e(
    ds: &MultiViewDataset,
    graphs: &[FusedGraph],
    indicators: &[IndicatorMatrix],
    state: &SolverState,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    validate_problem(ds, graphs, indicators, cfg)?;
    state.check_shapes(ds, cfg.c)?;
    let graphs = cfg.effective_graphs(ds, graphs);
    let beta = cfg.effective_beta();
    Ok((0..ds.n_views())
        .map(|v| {
            view_cost(
                ds.view(v).data(),
                &state.u[v],
                &state.p[v],
                &state.q,
                &indicators[v],
                &graphs[v],
            )
            .total(cfg.lambda, beta)
        })
        .collect())
}

pub(crate) fn weighted_sum(alpha: &[f64], e: &[f64], r: f64) -> f64 {
    let mut total = 0.0;
    for (a, ev) in alpha.iter().zip(e) {
        total += a.powf(r) * ev;
    }
    total
}

/// Full objective `sum_v alpha_v^r (|X - U P|_F^2 + beta |P|_1 +
/// lambda sum_ij W_ij |P_i - Q g_j|^2)`.
pub fn objective(
    ds: &MultiViewDataset,
    graphs: &[FusedGraph],
    indicators: &[IndicatorMatrix],
    state: &SolverState,
    cfg: &SolverConfig,
) -> Result<f64> {
    let e = compute_e(ds, graphs, indicators, state, cfg)?;
    Ok(weighted_sum(&state.alpha, &e, cfg.r))
}
