//! Incomplete multi-view data.
//!
//! Each view stores its available instances as the columns of a dense
//! `features x instances` matrix. Column `j` of view `v` belongs to the
//! global sample `availability[v][j]`.

mod io;
mod mask;
pub mod synthetic;

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    load_dataset, read_availability, read_labels, read_matrix_csv, write_matrix_csv, DatasetFiles,
};
pub use mask::{
    apply_mask, apply_paired_sample_mask, apply_random_missing_mask, paired_sample_availability,
    random_missing_availability, MaskDraw, MaskProtocol, MaskSpec,
};

/// One view's available instances, `m_v x n_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewMatrix {
    view_id: usize,
    data: Array2<f64>,
}

impl ViewMatrix {
    pub fn new(view_id: usize, data: Array2<f64>) -> Result<Self> {
        let (m, n) = data.dim();
        if m == 0 || n == 0 {
            return Err(Error::Dimension(format!(
                "view {view_id} is {m}x{n}; need at least one feature and one instance"
            )));
        }
        if let Some(((i, j), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "view {view_id} has a non-finite entry at ({i}, {j})"
            )));
        }
        Ok(Self { view_id, data })
    }

    pub fn view_id(&self) -> usize {
        self.view_id
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    /// Feature dimension `m_v`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Available-instance count `n_v`.
    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<ViewMatrix>,
    n: usize,
    availability: Vec<Vec<usize>>,
    labels: Option<Vec<usize>>,
}

impl MultiViewDataset {
    /// Validates and assembles a dataset. Labels, when given, are remapped to
    /// contiguous ids `0..k` in ascending order of their original values.
    pub fn new(
        views: Vec<Array2<f64>>,
        availability: Vec<Vec<usize>>,
        n: usize,
        labels: Option<Vec<i64>>,
    ) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::Dimension("dataset has no views".into()));
        }
        if views.len() != availability.len() {
            return Err(Error::Dimension(format!(
                "{} views but {} availability lists",
                views.len(),
                availability.len()
            )));
        }
        let mut covered = vec![false; n];
        for (v, (data, avail)) in views.iter().zip(&availability).enumerate() {
            if data.ncols() != avail.len() {
                return Err(Error::Dimension(format!(
                    "view {v} has {} columns but {} availability entries",
                    data.ncols(),
                    avail.len()
                )));
            }
            validate_availability(avail, n)?;
            for &i in avail {
                covered[i] = true;
            }
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidAvailability(format!(
                "sample {i} is missing from every view"
            )));
        }
        let views = views
            .into_iter()
            .enumerate()
            .map(|(v, data)| ViewMatrix::new(v, data))
            .collect::<Result<Vec<_>>>()?;
        let labels = match labels {
            Some(raw) => {
                if raw.len() != n {
                    return Err(Error::Dimension(format!(
                        "{} labels for {n} samples",
                        raw.len()
                    )));
                }
                Some(remap_labels(&raw))
            }
            None => None,
        };
        Ok(Self {
            views,
            n,
            availability,
            labels,
        })
    }

    /// Dataset where every view observes every sample.
    pub fn complete(views: Vec<Array2<f64>>, labels: Option<Vec<i64>>) -> Result<Self> {
        let n = views.first().map(|v| v.ncols()).unwrap_or(0);
        let availability = vec![(0..n).collect(); views.len()];
        Self::new(views, availability, n, labels)
    }

    pub fn views(&self) -> &[ViewMatrix] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &ViewMatrix {
        &self.views[v]
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn availability(&self) -> &[Vec<usize>] {
        &self.availability
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().max().map(|m| m + 1).unwrap_or(0))
    }

    pub fn is_complete(&self) -> bool {
        self.availability.iter().all(|a| a.len() == self.n)
    }

    /// Restricts each view to the given sample ids, which must be a subset of
    /// what the view currently observes.
    pub fn select(&self, availability: Vec<Vec<usize>>) -> Result<Self> {
        if availability.len() != self.n_views() {
            return Err(Error::Dimension(format!(
                "{} availability lists for {} views",
                availability.len(),
                self.n_views()
            )));
        }
        let mut views = Vec::with_capacity(self.n_views());
        for (v, wanted) in availability.iter().enumerate() {
            let column_of: BTreeMap<usize, usize> = self.availability[v]
                .iter()
                .enumerate()
                .map(|(j, &i)| (i, j))
                .collect();
            let cols = wanted
                .iter()
                .map(|i| {
                    column_of.get(i).copied().ok_or_else(|| {
                        Error::InvalidAvailability(format!("view {v} does not observe sample {i}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            views.push(self.views[v].data.select(Axis(1), &cols));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| l.iter().map(|&x| x as i64).collect());
        Self::new(views, availability, self.n, labels)
    }

    /// Same availability and labels, new view data. Used by normalization.
    pub(crate) fn with_view_data(&self, data: Vec<Array2<f64>>) -> Result<Self> {
        let labels = self
            .labels
            .as_ref()
            .map(|l| l.iter().map(|&x| x as i64).collect());
        Self::new(data, self.availability.clone(), self.n, labels)
    }

    pub fn indicators(&self) -> Result<Vec<IndicatorMatrix>> {
        self.availability
            .iter()
            .enumerate()
            .map(|(v, a)| build_indicator(v, a, self.n))
            .collect()
    }
}

fn validate_availability(avail: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in avail {
        if i >= n {
            return Err(Error::InvalidAvailability(format!(
                "sample id {i} out of range for n = {n}"
            )));
        }
        if seen[i] {
            return Err(Error::InvalidAvailability(format!(
                "duplicate sample id {i}"
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

fn remap_labels(raw: &[i64]) -> Vec<usize> {
    let mut distinct: Vec<i64> = raw.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    raw.iter()
        .map(|x| distinct.binary_search(x).expect("label present"))
        .collect()
}

/// Binary `n x n_v` matrix with `g[i][j] = 1` iff instance `j` of the view is
/// sample `i`. Stored as the column-to-row map; [`IndicatorMatrix::to_dense`]
/// materializes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorMatrix {
    view_id: usize,
    n: usize,
    rows: Vec<usize>,
}

impl IndicatorMatrix {
    pub fn view_id(&self) -> usize {
        self.view_id
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    pub fn n_instances(&self) -> usize {
        self.rows.len()
    }

    /// Global sample id of instance `j`, i.e. the row holding column `j`'s one.
    pub fn sample_of(&self, j: usize) -> usize {
        self.rows[j]
    }

    pub fn samples(&self) -> &[usize] {
        &self.rows
    }

    pub fn to_dense(&self) -> Array2<u8> {
        let mut g = Array2::zeros((self.n, self.rows.len()));
        for (j, &i) in self.rows.iter().enumerate() {
            g[[i, j]] = 1;
        }
        g
    }
}

pub fn build_indicator(
    view_id: usize,
    availability: &[usize],
    n: usize,
) -> Result<IndicatorMatrix> {
    validate_availability(availability, n)?;
    Ok(IndicatorMatrix {
        view_id,
        n,
        rows: availability.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    #[default]
    None,
    UnitL2Column,
    ZscoreRow,
}

/// Per-view feature normalization. Zero-norm columns are left unchanged under
/// `UnitL2Column`; zero-variance rows become all zeros under `ZscoreRow`.
pub fn normalize_views(ds: &MultiViewDataset, mode: NormalizationMode) -> Result<MultiViewDataset> {
    if mode == NormalizationMode::None {
        return Ok(ds.clone());
    }
    let data = ds
        .views
        .iter()
        .map(|view| {
            let mut x = view.data.clone();
            match mode {
                NormalizationMode::None => {}
                NormalizationMode::UnitL2Column => {
                    for mut col in x.columns_mut() {
                        let norm = col.dot(&col).sqrt();
                        if norm > 0.0 {
                            col.mapv_inplace(|v| v / norm);
                        }
                    }
                }
                NormalizationMode::ZscoreRow => {
                    for mut row in x.rows_mut() {
                        let len = row.len() as f64;
                        let mean = row.sum() / len;
                        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len;
                        let std = var.sqrt();
                        if std > 0.0 {
                            row.mapv_inplace(|v| (v - mean) / std);
                        } else {
                            row.fill(0.0);
                        }
                    }
                }
            }
            x
        })
        .collect();
    ds.with_view_data(data)
}
