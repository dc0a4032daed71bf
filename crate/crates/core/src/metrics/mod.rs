//! Cluster assignment of the consensus representation and external scores.

mod kmeans;
mod scores;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kmeans::{kmeans, kmeans_with, KMeansOptions, KMeansResult};
pub use scores::{accuracy, contingency, nmi, purity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub predicted: Vec<usize>,
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub kmeans_inertia: f64,
    pub restarts_used: usize,
}

/// k-means on the columns of `q`, scored against `truth`.
pub fn evaluate(
    q: ArrayView2<'_, f64>,
    truth: &[usize],
    k: usize,
    opts: &KMeansOptions,
    seed: u64,
) -> Result<ClusteringResult> {
    if truth.len() != q.ncols() {
        return Err(Error::Dimension(format!(
            "{} labels for {} samples",
            truth.len(),
            q.ncols()
        )));
    }
    let km = kmeans_with(q, k, opts, seed)?;
    Ok(ClusteringResult {
        acc: accuracy(truth, &km.labels)?,
        nmi: nmi(truth, &km.labels)?,
        purity: purity(truth, &km.labels)?,
        kmeans_inertia: km.inertia,
        restarts_used: km.restarts_used,
        predicted: km.labels,
    })
}
