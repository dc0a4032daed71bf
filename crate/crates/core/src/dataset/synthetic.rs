//! Seeded synthetic multi-view generators used by tests, the acceptance
//! suite and the `synthetic` dataset source of the harness.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::MultiViewDataset;
use crate::error::{Error, Result};
use crate::linalg::random_orthonormal;

/// Gaussian blobs seen through several views.
///
/// Cluster centroids form a regular simplex with pairwise distance
/// `centroid_distance`; each view embeds them with its own random orthonormal
/// map into `m_v` dimensions. Per-view noise is isotropic with RMS norm
/// `noise_ratio * centroid_distance`, i.e. per-coordinate standard deviation
/// `noise_ratio * centroid_distance / sqrt(m_v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobsSpec {
    pub n: usize,
    pub clusters: usize,
    pub view_dims: Vec<usize>,
    #[serde(default = "default_noise_ratio")]
    pub noise_ratio: f64,
    #[serde(default = "default_centroid_distance")]
    pub centroid_distance: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_noise_ratio() -> f64 {
    0.5
}

fn default_centroid_distance() -> f64 {
    10.0
}

/// Two interleaved half-moons, balanced. Each view adds its own Gaussian noise
/// (std `noise`) in the moon plane and embeds the plane into `m_v` dimensions
/// through a random orthonormal map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoonsSpec {
    pub n: usize,
    pub view_dims: Vec<usize>,
    #[serde(default = "default_moon_noise")]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_moon_noise() -> f64 {
    0.1
}

fn balanced_labels(n: usize, clusters: usize) -> Vec<i64> {
    (0..n).map(|i| (i % clusters) as i64).collect()
}

pub fn gaussian_blobs(spec: &BlobsSpec) -> Result<MultiViewDataset> {
    if spec.clusters == 0 || spec.n < spec.clusters {
        return Err(Error::InvalidParameter(format!(
            "blobs need 1 <= clusters <= n, got clusters = {} and n = {}",
            spec.clusters, spec.n
        )));
    }
    if let Some(&m) = spec.view_dims.iter().find(|&&m| m < spec.clusters) {
        return Err(Error::InvalidParameter(format!(
            "view dimension {m} is below the cluster count {}",
            spec.clusters
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let c = spec.clusters;
    let labels = balanced_labels(spec.n, c);
    let scale = spec.centroid_distance / std::f64::consts::SQRT_2;
    let views = spec
        .view_dims
        .iter()
        .map(|&m| {
            let embed = random_orthonormal(m, c, &mut rng);
            let std = spec.noise_ratio * spec.centroid_distance / (m as f64).sqrt();
            let noise =
                Normal::new(0.0, std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut x = Array2::zeros((m, spec.n));
            for (i, &label) in labels.iter().enumerate() {
                let centroid = embed.column(label as usize).mapv(|v| v * scale);
                for r in 0..m {
                    x[[r, i]] = centroid[r] + rng.sample(noise);
                }
            }
            Ok(x)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiViewDataset::complete(views, Some(labels))
}

pub fn two_moons(spec: &MoonsSpec) -> Result<MultiViewDataset> {
    if spec.n < 2 {
        return Err(Error::InvalidParameter("two moons need n >= 2".into()));
    }
    if let Some(&m) = spec.view_dims.iter().find(|&&m| m < 2) {
        return Err(Error::InvalidParameter(format!(
            "view dimension {m} is below 2"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels = balanced_labels(spec.n, 2);
    let latent: Vec<[f64; 2]> = labels
        .iter()
        .map(|&label| {
            let t = rng.random_range(0.0..std::f64::consts::PI);
            if label == 0 {
                [t.cos(), t.sin()]
            } else {
                [1.0 - t.cos(), 0.5 - t.sin()]
            }
        })
        .collect();
    let views = spec
        .view_dims
        .iter()
        .map(|&m| {
            let embed = random_orthonormal(m, 2, &mut rng);
            let mut x = Array2::zeros((m, spec.n));
            for (i, p) in latent.iter().enumerate() {
                let a = p[0] + spec.noise * rng.sample::<f64, _>(StandardNormal);
                let b = p[1] + spec.noise * rng.sample::<f64, _>(StandardNormal);
                let point: Array1<f64> = &embed.column(0) * a + &embed.column(1) * b;
                x.column_mut(i).assign(&point);
            }
            x
        })
        .collect();
    MultiViewDataset::complete(views, Some(labels))
}
