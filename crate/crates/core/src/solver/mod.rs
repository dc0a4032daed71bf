//! Alternating minimization of the localized sparse incomplete multi-view
//! objective
//!
//! ```text
//! min  sum_v alpha_v^r ( |X_v - U_v P_v|_F^2 + beta |P_v|_1
//!                        + lambda sum_ij W_v[i,j] |P_v[:,i] - Q g_v[:,j]|^2 )
//! s.t. U_v^T U_v = I,  alpha on the simplex
//! ```
//!
//! Each iteration updates `Q`, then every `U_v`, then every `P_v`, then
//! `alpha`. Every block update is an exact minimizer of its subproblem, so the
//! recorded objective never increases.

mod objective;
mod persist;
mod updates;

use std::borrow::Cow;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{IndicatorMatrix, MultiViewDataset};
use crate::error::{Error, Result};
use crate::graph::FusedGraph;
use crate::linalg::random_orthonormal;

pub use objective::{compute_e, objective, ViewCost};
pub use persist::{load_state, read_trace_csv, save_state, write_trace_csv};
pub use updates::{soft_threshold, update_alpha, update_p, update_q, update_u, PUpdateWorkspace};

pub(crate) use objective::view_cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablation {
    pub weight_on: bool,
    pub sparsity_on: bool,
    pub graph_on: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Self {
            weight_on: true,
            sparsity_on: true,
            graph_on: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaInit {
    /// `1/l` for every view.
    #[default]
    Uniform,
    /// `1` for every view, off the simplex until the first weight update.
    Ones,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    pub beta: f64,
    pub r: f64,
    /// Latent dimension, normally the number of clusters.
    pub c: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    #[serde(default)]
    pub ablation: Ablation,
    #[serde(default)]
    pub alpha_init: AlphaInit,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            beta: 1e-3,
            r: 2.0,
            c: 2,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
            ablation: Ablation::default(),
            alpha_init: AlphaInit::Uniform,
        }
    }
}

impl SolverConfig {
    pub fn with_clusters(c: usize) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 1.0 && self.r.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "r = {} must exceed 1",
                self.r
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda = {} must be positive",
                self.lambda
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta = {} must be nonnegative",
                self.beta
            )));
        }
        if self.c == 0 {
            return Err(Error::InvalidConfig("c must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol = {} must be nonnegative",
                self.tol
            )));
        }
        Ok(())
    }

    /// `beta`, or zero when sparsity is ablated.
    pub fn effective_beta(&self) -> f64 {
        if self.ablation.sparsity_on {
            self.beta
        } else {
            0.0
        }
    }

    /// The given graphs, or identity graphs when the graph term is ablated.
    pub fn effective_graphs<'a>(
        &self,
        ds: &MultiViewDataset,
        graphs: &'a [FusedGraph],
    ) -> Cow<'a, [FusedGraph]> {
        if self.ablation.graph_on {
            Cow::Borrowed(graphs)
        } else {
            Cow::Owned(
                ds.views()
                    .iter()
                    .map(|v| FusedGraph::identity(v.view_id(), v.len()))
                    .collect(),
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub objective: f64,
    pub e: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Per-view `m_v x c` orthonormal bases.
    pub u: Vec<Array2<f64>>,
    /// Per-view `c x n_v` representations.
    pub p: Vec<Array2<f64>>,
    /// `c x n` consensus representation.
    pub q: Array2<f64>,
    pub alpha: Vec<f64>,
    /// One entry per completed iteration.
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
}

impl SolverState {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn objective_trace(&self) -> Vec<f64> {
        self.trace.iter().map(|t| t.objective).collect()
    }

    pub(crate) fn check_shapes(&self, ds: &MultiViewDataset, c: usize) -> Result<()> {
        let l = ds.n_views();
        if self.u.len() != l || self.p.len() != l || self.alpha.len() != l {
            return Err(Error::Dimension(format!(
                "state has {} bases, {} representations, {} weights for {l} views",
                self.u.len(),
                self.p.len(),
                self.alpha.len()
            )));
        }
        if self.q.dim() != (c, ds.n_samples()) {
            return Err(Error::Dimension(format!(
                "Q is {:?}, expected ({c}, {})",
                self.q.dim(),
                ds.n_samples()
            )));
        }
        for (v, view) in ds.views().iter().enumerate() {
            if self.u[v].dim() != (view.dim(), c) || self.p[v].dim() != (c, view.len()) {
                return Err(Error::Dimension(format!(
                    "view {v}: U is {:?}, P is {:?}, expected ({}, {c}) and ({c}, {})",
                    self.u[v].dim(),
                    self.p[v].dim(),
                    view.dim(),
                    view.len()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn validate_problem(
    ds: &MultiViewDataset,
    graphs: &[FusedGraph],
    indicators: &[IndicatorMatrix],
    cfg: &SolverConfig,
) -> Result<()> {
    cfg.validate()?;
    let l = ds.n_views();
    if graphs.len() != l || indicators.len() != l {
        return Err(Error::Dimension(format!(
            "{l} views but {} graphs and {} indicators",
            graphs.len(),
            indicators.len()
        )));
    }
    for (v, view) in ds.views().iter().enumerate() {
        if graphs[v].len() != view.len()
            || indicators[v].n_instances() != view.len()
            || indicators[v].n_samples() != ds.n_samples()
        {
            return Err(Error::Dimension(format!(
                "view {v} has {} instances; graph covers {}, indicator is {}x{}",
                view.len(),
                graphs[v].len(),
                indicators[v].n_samples(),
                indicators[v].n_instances()
            )));
        }
    }
    Ok(())
}

/// Random orthonormal bases, `P_v = U_v^T X_v`, zero `Q` and the configured
/// initial weights.
pub fn initialize(ds: &MultiViewDataset, cfg: &SolverConfig) -> Result<SolverState> {
    cfg.validate()?;
    if let Some(view) = ds.views().iter().find(|v| v.dim() < cfg.c) {
        return Err(Error::InvalidConfig(format!(
            "c = {} exceeds the feature dimension {} of view {}",
            cfg.c,
            view.dim(),
            view.view_id()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let u: Vec<Array2<f64>> = ds
        .views()
        .iter()
        .map(|v| random_orthonormal(v.dim(), cfg.c, &mut rng))
        .collect();
    let p = ds
        .views()
        .iter()
        .zip(&u)
        .map(|(v, u)| u.t().dot(v.data()))
        .collect();
    let l = ds.n_views();
    let alpha = match cfg.alpha_init {
        AlphaInit::Uniform => vec![1.0 / l as f64; l],
        AlphaInit::Ones => vec![1.0; l],
    };
    Ok(SolverState {
        u,
        p,
        q: Array2::zeros((cfg.c, ds.n_samples())),
        alpha,
        trace: Vec::new(),
        converged: false,
    })
}

fn relative_change(prev: f64, next: f64) -> f64 {
    (prev - next).abs() / prev.max(f64::EPSILON)
}

pub fn fit(
    ds: &MultiViewDataset,
    graphs: &[FusedGraph],
    indicators: &[IndicatorMatrix],
    cfg: &SolverConfig,
) -> Result<SolverState> {
    let state = initialize(ds, cfg)?;
    fit_from(ds, graphs, indicators, cfg, state, |_, _| {})
}

/// Runs the loop from an explicit starting state, calling `observer` with the
/// 1-based iteration number and the state after each full iteration.
pub fn fit_from<F>(
    ds: &MultiViewDataset,
    graphs: &[FusedGraph],
    indicators: &[IndicatorMatrix],
    cfg: &SolverConfig,
    mut state: SolverState,
    mut observer: F,
) -> Result<SolverState>
where
    F: FnMut(usize, &SolverState),
{
    validate_problem(ds, graphs, indicators, cfg)?;
    state.check_shapes(ds, cfg.c)?;
    let graphs = cfg.effective_graphs(ds, graphs);
    let graphs: &[FusedGraph] = &graphs;
    let beta = cfg.effective_beta();
    if !cfg.ablation.weight_on {
        let l = ds.n_views();
        state.alpha = vec![1.0 / l as f64; l];
    }
    let mut prev = objective(ds, graphs, indicators, &state, cfg)?;
    let start = state.trace.len();

    for iteration in (start + 1)..=(start + cfg.max_iter) {
        state.q = update_q(&state.p, graphs, indicators, &state.alpha, cfg.r)?;

        let q = &state.q;
        let blocks = (0..ds.n_views())
            .into_par_iter()
            .map(|v| {
                let x = ds.view(v).data();
                let u = update_u(x, &state.p[v])?;
                let p = update_p(x, &u, q, &indicators[v], &graphs[v], cfg.lambda, beta)?;
                let e = view_cost(x, &u, &p, q, &indicators[v], &graphs[v]).total(cfg.lambda, beta);
                Ok((u, p, e))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut e = Vec::with_capacity(blocks.len());
        for (v, (u, p, ev)) in blocks.into_iter().enumerate() {
            state.u[v] = u;
            state.p[v] = p;
            e.push(ev);
        }

        if cfg.ablation.weight_on {
            state.alpha = update_alpha(&e, cfg.r)?;
        }
        let value = objective::weighted_sum(&state.alpha, &e, cfg.r);
        if !value.is_finite() {
            return Err(Error::Divergence { iteration, value });
        }
        state.trace.push(TraceEntry {
            objective: value,
            e,
            alpha: state.alpha.clone(),
        });
        observer(iteration, &state);
        if relative_change(prev, value) <= cfg.tol {
            state.converged = true;
            break;
        }
        prev = value;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::{gaussian_blobs, BlobsSpec};
    use crate::dataset::{apply_mask, MaskProtocol, MaskSpec};
    use crate::graph::{build_fused_graphs, GraphParams};
    use crate::linalg::orthonormality_defect;

    fn problem(seed: u64) -> (MultiViewDataset, Vec<FusedGraph>, Vec<IndicatorMatrix>) {
        let full = gaussian_blobs(&BlobsSpec {
            n: 40,
            clusters: 3,
            view_dims: vec![6, 8, 5],
            noise_ratio: 0.5,
            centroid_distance: 10.0,
            seed,
        })
        .unwrap();
        let ds = apply_mask(
            &full,
            &MaskSpec::new(MaskProtocol::RandomMissing, 0.3, seed).unwrap(),
        )
        .unwrap();
        let graphs = build_fused_graphs(&ds, &GraphParams::default()).unwrap();
        let ind = ds.indicators().unwrap();
        (ds, graphs, ind)
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::with_clusters(3);
        assert!(ok.validate().is_ok());
        for bad in [
            SolverConfig {
                r: 1.0,
                ..ok.clone()
            },
            SolverConfig {
                lambda: 0.0,
                ..ok.clone()
            },
            SolverConfig {
                beta: -1.0,
                ..ok.clone()
            },
            SolverConfig { c: 0, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn initialize_is_orthonormal_shaped_and_deterministic() {
        let (ds, _, _) = problem(1);
        let cfg = SolverConfig::with_clusters(3);
        let a = initialize(&ds, &cfg).unwrap();
        for (v, u) in a.u.iter().enumerate() {
            assert!(orthonormality_defect(u.view()) < 1e-10);
            assert_eq!(a.p[v].dim(), (3, ds.view(v).len()));
        }
        assert_eq!(a, initialize(&ds, &cfg).unwrap());
        assert!((a.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn initialize_rejects_too_many_clusters() {
        let (ds, _, _) = problem(1);
        let cfg = SolverConfig::with_clusters(6);
        assert!(matches!(
            initialize(&ds, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn fit_decreases_and_keeps_constraints() {
        let (ds, graphs, ind) = problem(2);
        let cfg = SolverConfig::with_clusters(3);
        let state = initialize(&ds, &cfg).unwrap();
        let mut defects = Vec::new();
        let fitted = fit_from(&ds, &graphs, &ind, &cfg, state, |_, s| {
            defects.push(
                s.u.iter()
                    .map(|u| orthonormality_defect(u.view()))
                    .fold(0.0, f64::max),
            );
        })
        .unwrap();
        let trace = fitted.objective_trace();
        assert!(!trace.is_empty() && trace.len() < 300);
        for pair in trace.windows(2) {
            assert!(
                pair[1] <= pair[0] * (1.0 + 1e-9),
                "{} -> {}",
                pair[0],
                pair[1]
            );
        }
        assert!(defects.iter().all(|&d| d <= 1e-8));
        let last = objective(&ds, &graphs, &ind, &fitted, &cfg).unwrap();
        assert_eq!(last, *trace.last().unwrap());
    }

    #[test]
    fn e_sums_to_objective() {
        let (ds, graphs, ind) = problem(3);
        let cfg = SolverConfig {
            max_iter: 3,
            ..SolverConfig::with_clusters(3)
        };
        let mut state = fit(&ds, &graphs, &ind, &cfg).unwrap();
        state.alpha = vec![0.2, 0.5, 0.3];
        let e = compute_e(&ds, &graphs, &ind, &state, &cfg).unwrap();
        let f = objective(&ds, &graphs, &ind, &state, &cfg).unwrap();
        let sum: f64 = state
            .alpha
            .iter()
            .zip(&e)
            .map(|(a, e)| a.powf(cfg.r) * e)
            .sum();
        assert!((sum - f).abs() <= 1e-10 * f.max(1.0));
        assert!(e.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn graph_share_grows_with_lambda() {
        let (ds, graphs, ind) = problem(4);
        let cfg = SolverConfig {
            max_iter: 2,
            ..SolverConfig::with_clusters(3)
        };
        let state = fit(&ds, &graphs, &ind, &cfg).unwrap();
        let beta = cfg.effective_beta();
        for v in 0..ds.n_views() {
            let cost = view_cost(
                ds.view(v).data(),
                &state.u[v],
                &state.p[v],
                &state.q,
                &ind[v],
                &graphs[v],
            );
            let mut lambda = 1e-3;
            let mut last_share = 0.0;
            for _ in 0..12 {
                let share = lambda * cost.graph / cost.total(lambda, beta);
                assert!(share >= last_share);
                last_share = share;
                lambda *= 2.0;
            }
        }
    }

    #[test]
    fn weight_ablation_freezes_uniform_alpha() {
        let (ds, graphs, ind) = problem(5);
        let mut cfg = SolverConfig::with_clusters(3);
        cfg.ablation.weight_on = false;
        cfg.max_iter = 5;
        let state = fit(&ds, &graphs, &ind, &cfg).unwrap();
        assert!(state.trace.iter().all(|t| t.alpha == vec![1.0 / 3.0; 3]));
    }

    #[test]
    fn ones_alpha_init_is_still_monotone() {
        let (ds, graphs, ind) = problem(6);
        let cfg = SolverConfig {
            alpha_init: AlphaInit::Ones,
            ..SolverConfig::with_clusters(3)
        };
        let state = fit(&ds, &graphs, &ind, &cfg).unwrap();
        for pair in state.objective_trace().windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-9));
        }
    }

    #[test]
    fn zero_problem_has_zero_objective() {
        let x = Array2::<f64>::zeros((3, 4));
        let ds = MultiViewDataset::complete(vec![x], None).unwrap();
        let cfg = SolverConfig::with_clusters(2);
        let mut state = initialize(&ds, &cfg).unwrap();
        state.p[0].fill(0.0);
        let graphs = vec![FusedGraph::identity(0, 4)];
        let ind = ds.indicators().unwrap();
        assert_eq!(objective(&ds, &graphs, &ind, &state, &cfg).unwrap(), 0.0);
        assert_eq!(
            compute_e(&ds, &graphs, &ind, &state, &cfg).unwrap(),
            vec![0.0]
        );
    }
}
