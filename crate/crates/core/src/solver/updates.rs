//! Closed-form block updates of the alternating minimization.

use ndarray::{Array2, Axis};

use crate::dataset::IndicatorMatrix;
use crate::error::{Error, Result};
use crate::graph::FusedGraph;
use crate::linalg::procrustes;

/// `max(0, v - t) + min(0, v + t)`: the proximal map of `t |.|`.
#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    (v - t).max(0.0) + (v + t).min(0.0)
}

/// Basis update: the orthonormal `m_v x c` maximizer of `Tr(U^T X P^T)`,
/// `U = M N^T` from the thin SVD `X P^T = M S N^T`.
pub fn update_u(x: &Array2<f64>, p: &Array2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != p.ncols() {
        return Err(Error::Dimension(format!(
            "X has {} instances but P has {}",
            x.ncols(),
            p.ncols()
        )));
    }
    let target = x.dot(&p.t());
    procrustes(target.view())
}

/// Quantities of the representation subproblem, which separates over columns
/// into `min_p H_ii |p|^2 - 2 b_i^T p + beta |p|_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PUpdateWorkspace {
    /// Diagonal of `H = I + lambda D`.
    pub h: Vec<f64>,
    /// `B^T = U^T X + lambda Q G W`, `c x n_v`.
    pub bt: Array2<f64>,
}

impl PUpdateWorkspace {
    pub fn new(
        x: &Array2<f64>,
        u: &Array2<f64>,
        q: &Array2<f64>,
        g: &IndicatorMatrix,
        w: &FusedGraph,
        lambda: f64,
    ) -> Result<Self> {
        check_p_inputs(x, u, q, g, w)?;
        Ok(Self {
            h: h_diagonal(w, lambda),
            bt: b_transpose(x, u, q, g, w, lambda),
        })
    }
}

/// Column `i` of the graph part of `B^T` is `sum_j W_ij Q[:, sample_of(j)]`.
fn b_transpose(
    x: &Array2<f64>,
    u: &Array2<f64>,
    q: &Array2<f64>,
    g: &IndicatorMatrix,
    w: &FusedGraph,
    lambda: f64,
) -> Array2<f64> {
    let mut bt = u.t().dot(x);
    for i in 0..w.len() {
        let mut col = bt.column_mut(i);
        for &(j, wij) in w.row(i) {
            let qj = q.column(g.sample_of(j));
            col.scaled_add(lambda * wij, &qj);
        }
    }
    bt
}

fn h_diagonal(w: &FusedGraph, lambda: f64) -> Vec<f64> {
    w.degree().iter().map(|d| 1.0 + lambda * d).collect()
}

fn check_p_inputs(
    x: &Array2<f64>,
    u: &Array2<f64>,
    q: &Array2<f64>,
    g: &IndicatorMatrix,
    w: &FusedGraph,
) -> Result<()> {
    let n_v = x.ncols();
    if u.nrows() != x.nrows() || u.ncols() != q.nrows() {
        return Err(Error::Dimension(format!(
            "U is {:?}, X is {:?}, Q is {:?}",
            u.dim(),
            x.dim(),
            q.dim()
        )));
    }
    if g.n_instances() != n_v || w.len() != n_v || g.n_samples() != q.ncols() {
        return Err(Error::Dimension(format!(
            "view has {n_v} instances; indicator is {}x{}, graph has {}, Q has {} samples",
            g.n_samples(),
            g.n_instances(),
            w.len(),
            q.ncols()
        )));
    }
    if q.iter().chain(u.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite entry in U or Q".into()));
    }
    Ok(())
}

/// Representation update. Column `i` is the soft-thresholding of
/// `B^T[:, i] / H_ii` at `beta / (2 H_ii)`; with `beta = 0` it is the plain
/// ridge solution.
pub fn update_p(
    x: &Array2<f64>,
    u: &Array2<f64>,
    q: &Array2<f64>,
    g: &IndicatorMatrix,
    w: &FusedGraph,
    lambda: f64,
    beta: f64,
) -> Result<Array2<f64>> {
    let PUpdateWorkspace { h, bt: mut p } = PUpdateWorkspace::new(x, u, q, g, w, lambda)?;
    for (mut col, &hii) in p.axis_iter_mut(Axis(1)).zip(&h) {
        let t = beta / (2.0 * hii);
        col.mapv_inplace(|b| soft_threshold(b / hii, t));
    }
    Ok(p)
}

/// Consensus update `Q = (sum_v a_v P W G^T) (sum_v a_v G D G^T)^{-1}` with
/// `a_v = alpha_v^r`. The right factor is diagonal, so the inverse is taken
/// entrywise.
///
/// A sample whose weighted diagonal underflows to zero while still observed
/// (every covering view has `alpha_v^r == 0`) carries no weight in the
/// objective; its column falls back to the unweighted average.
pub fn update_q(
    p: &[Array2<f64>],
    graphs: &[FusedGraph],
    indicators: &[IndicatorMatrix],
    alpha: &[f64],
    r: f64,
) -> Result<Array2<f64>> {
    let l = p.len();
    if graphs.len() != l || indicators.len() != l || alpha.len() != l || l == 0 {
        return Err(Error::Dimension(format!(
            "{} P blocks, {} graphs, {} indicators, {} weights",
            l,
            graphs.len(),
            indicators.len(),
            alpha.len()
        )));
    }
    let c = p[0].nrows();
    let n = indicators[0].n_samples();
    let mut num = Array2::<f64>::zeros((c, n));
    let mut den = vec![0.0; n];
    let mut raw_num = Array2::<f64>::zeros((c, n));
    let mut raw_den = vec![0.0; n];
    for v in 0..l {
        let (pv, w, g) = (&p[v], &graphs[v], &indicators[v]);
        if pv.nrows() != c
            || pv.ncols() != w.len()
            || g.n_instances() != w.len()
            || g.n_samples() != n
        {
            return Err(Error::Dimension(format!(
                "view {v} blocks have inconsistent shapes"
            )));
        }
        let weight = alpha[v].powf(r);
        for j in 0..w.len() {
            let s = g.sample_of(j);
            // (P W)[:, j]; W is symmetric so row j lists column j's nonzeros
            let mut pw = ndarray::Array1::<f64>::zeros(c);
            for &(i, wij) in w.row(j) {
                pw.scaled_add(wij, &pv.column(i));
            }
            num.column_mut(s).scaled_add(weight, &pw);
            den[s] += weight * w.degree()[j];
            raw_num.column_mut(s).scaled_add(1.0, &pw);
            raw_den[s] += w.degree()[j];
        }
    }
    let mut q = num;
    for s in 0..n {
        if den[s] > 0.0 {
            let inv = 1.0 / den[s];
            q.column_mut(s).mapv_inplace(|x| x * inv);
        } else if raw_den[s] > 0.0 {
            let inv = 1.0 / raw_den[s];
            q.column_mut(s).assign(&raw_num.column(s).mapv(|x| x * inv));
        } else {
            return Err(Error::InfeasibleState(format!(
                "sample {s} is observed in no view"
            )));
        }
    }
    Ok(q)
}

/// View weights `alpha_v = e_v^{1/(1-r)} / sum_u e_u^{1/(1-r)}`, evaluated in
/// log space. Zero-cost views share all the weight equally.
pub fn update_alpha(e: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must exceed 1")));
    }
    if e.is_empty() {
        return Err(Error::Dimension("no view costs".into()));
    }
    if let Some(bad) = e.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Numeric(format!(
            "view cost {bad} is not a finite nonnegative value"
        )));
    }
    let zeros = e.iter().filter(|&&v| v == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return Ok(e
            .iter()
            .map(|&v| if v == 0.0 { share } else { 0.0 })
            .collect());
    }
    let expo = 1.0 / (1.0 - r);
    let logs: Vec<f64> = e.iter().map(|v| v.ln() * expo).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = logs.iter().map(|x| (x - top).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(unnorm.iter().map(|x| x / total).collect())
}
