//! Per-view kNN Gaussian similarity graphs and their fusion with the identity.

use std::path::Path;

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{write_matrix_csv, MultiViewDataset, ViewMatrix};
use crate::error::{Error, Result};

const SIGMA_SUBSAMPLE: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sigma {
    /// Median pairwise distance of the view's instances.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub view_id: usize,
    pub s: Array2<f64>,
    pub k: usize,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedGraph {
    view_id: usize,
    w: Array2<f64>,
    gamma: f64,
    degree: Array1<f64>,
    /// Nonzeros of `w` per row, in ascending column order.
    rows: Vec<Vec<(usize, f64)>>,
}

impl FusedGraph {
    /// `W = I` on `n_v` instances, which is what fusion with `gamma = 0` gives.
    pub fn identity(view_id: usize, n_v: usize) -> Self {
        Self::from_dense(view_id, Array2::eye(n_v), 0.0)
    }

    fn from_dense(view_id: usize, w: Array2<f64>, gamma: f64) -> Self {
        let degree = w.rows().into_iter().map(|r| r.sum()).collect();
        let rows = w
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Self {
            view_id,
            w,
            gamma,
            degree,
            rows,
        }
    }

    pub fn view_id(&self) -> usize {
        self.view_id
    }

    pub fn w(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Row sums of `w`, the diagonal of `D`.
    pub fn degree(&self) -> &Array1<f64> {
        &self.degree
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_matrix_csv(path, &self.w)
    }
}

fn squared_distances(x: &Array2<f64>) -> Array2<f64> {
    let n = x.ncols();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let xi = x.column(i);
        for j in (i + 1)..n {
            let xj = x.column(j);
            let dist: f64 = xi
                .iter()
                .zip(xj.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[[i, j]] = dist;
            d[[j, i]] = dist;
        }
    }
    d
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let len = values.len();
    if len % 2 == 1 {
        values[len / 2]
    } else {
        0.5 * (values[len / 2 - 1] + values[len / 2])
    }
}

/// Median of all pairwise Euclidean distances. Views with more than 2000
/// instances are subsampled with an even stride. If more than half the pairs
/// coincide, the median of the nonzero distances is used instead.
pub fn auto_sigma(view: &ViewMatrix) -> Result<f64> {
    let x = view.data();
    let n = x.ncols();
    let idx: Vec<usize> = if n > SIGMA_SUBSAMPLE {
        (0..SIGMA_SUBSAMPLE)
            .map(|k| k * n / SIGMA_SUBSAMPLE)
            .collect()
    } else {
        (0..n).collect()
    };
    let mut dists = Vec::with_capacity(idx.len() * idx.len().saturating_sub(1) / 2);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d2: f64 = x
                .column(i)
                .iter()
                .zip(x.column(j).iter())
                .map(|(p, q)| (p - q) * (p - q))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    let mut positive: Vec<f64> = dists.iter().copied().filter(|&d| d > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::SigmaDegenerate(format!(
            "view {} has no two distinct instances",
            view.view_id()
        )));
    }
    let sigma = median(&mut dists);
    Ok(if sigma > 0.0 {
        sigma
    } else {
        median(&mut positive)
    })
}

/// Gaussian kernel restricted to the symmetric kNN mask: `s[i][j]` is
/// `exp(-|x_i - x_j|^2 / (2 sigma^2))` when `j` is among the `k` nearest
/// neighbours of `i` or vice versa, zero otherwise and on the diagonal.
/// Distance ties are broken by the lower instance index.
pub fn gaussian_knn_graph(view: &ViewMatrix, k: usize, sigma: Sigma) -> Result<SimilarityGraph> {
    let n = view.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidK(format!(
            "k = {k} needs 1 <= k < n_v = {n} for view {}",
            view.view_id()
        )));
    }
    let sigma = match sigma {
        Sigma::Auto => auto_sigma(view)?,
        Sigma::Fixed(s) if s > 0.0 && s.is_finite() => s,
        Sigma::Fixed(s) => {
            return Err(Error::InvalidParameter(format!(
                "sigma {s} must be positive"
            )))
        }
    };
    let d2 = squared_distances(view.data());
    let denom = 2.0 * sigma * sigma;
    let mut s = Array2::zeros((n, n));
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| d2[[i, a]].total_cmp(&d2[[i, b]]).then(a.cmp(&b)));
        for &j in &order[..k] {
            let value = (-d2[[i, j]] / denom).exp();
            s[[i, j]] = value;
            s[[j, i]] = value;
        }
    }
    Ok(SimilarityGraph {
        view_id: view.view_id(),
        s,
        k,
        sigma,
    })
}

/// `W = gamma * S + I` with its degree vector.
pub fn fuse_graph(s: &SimilarityGraph, gamma: f64) -> Result<FusedGraph> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma {gamma} must be >= 0"
        )));
    }
    let n = s.s.nrows();
    let mut w = s.s.mapv(|v| gamma * v);
    for i in 0..n {
        w[[i, i]] += 1.0;
    }
    Ok(FusedGraph::from_dense(s.view_id, w, gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub k: usize,
    #[serde(default)]
    pub sigma: Sigma,
    pub gamma: f64,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            k: 5,
            sigma: Sigma::Auto,
            gamma: 1.0,
        }
    }
}

/// Fused graphs for all views, built in parallel. `k` is clamped to
/// `n_v - 1` so heavily masked views still get a graph; a single-instance
/// view gets the identity.
pub fn build_fused_graphs(ds: &MultiViewDataset, params: &GraphParams) -> Result<Vec<FusedGraph>> {
    if params.k == 0 {
        return Err(Error::InvalidK("k must be at least 1".into()));
    }
    ds.views()
        .par_iter()
        .map(|view| {
            if view.len() < 2 || params.gamma == 0.0 {
                return Ok(FusedGraph::identity(view.view_id(), view.len()));
            }
            let k = params.k.min(view.len() - 1);
            let s = gaussian_knn_graph(view, k, params.sigma)?;
            fuse_graph(&s, params.gamma)
        })
        .collect()
}
