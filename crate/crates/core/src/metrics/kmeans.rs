use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::mix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    /// `k x dim`, one centroid per row.
    pub centroids: Array2<f64>,
    pub inertia: f64,
    pub restarts_used: usize,
    /// Inertia after each assignment step of the winning run.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm on the columns of `data` (`dim x n`) with k-means++
/// seeding, best of `restarts` runs by inertia. Restart `i` is seeded from
/// `mix(seed, i)`, so results do not depend on thread scheduling.
pub fn kmeans(
    data: ArrayView2<'_, f64>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<KMeansResult> {
    kmeans_with(
        data,
        k,
        &KMeansOptions {
            restarts,
            ..KMeansOptions::default()
        },
        seed,
    )
}

pub fn kmeans_with(
    data: ArrayView2<'_, f64>,
    k: usize,
    opts: &KMeansOptions,
    seed: u64,
) -> Result<KMeansResult> {
    let n = data.ncols();
    if k == 0 || k > n {
        return Err(Error::InvalidK(format!("k = {k} needs 1 <= k <= n = {n}")));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "k-means input has a non-finite entry".into(),
        ));
    }
    // row-major points for cache-friendly distance loops
    let points: Vec<Vec<f64>> = data.columns().into_iter().map(|c| c.to_vec()).collect();
    let restarts = opts.restarts.max(1);
    let runs: Vec<KMeansResult> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, i as u64));
            lloyd(&points, k, opts.max_iter, &mut rng)
        })
        .collect();
    let mut best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.inertia.total_cmp(&b.inertia).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    best.restarts_used = restarts;
    Ok(best)
}

fn plus_plus<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].clone();
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(
    points: &[Vec<f64>],
    centroids: &[Vec<f64>],
    labels: &mut [usize],
    dists: &mut [f64],
) -> bool {
    let mut changed = false;
    for (i, p) in points.iter().enumerate() {
        let (best, d) = centroids
            .iter()
            .enumerate()
            .map(|(c, m)| (c, sq_dist(p, m)))
            .fold(
                (0, f64::INFINITY),
                |acc, cur| if cur.1 < acc.1 { cur } else { acc },
            );
        if labels[i] != best {
            labels[i] = best;
            changed = true;
        }
        dists[i] = d;
    }
    changed
}

fn lloyd<R: Rng>(points: &[Vec<f64>], k: usize, max_iter: usize, rng: &mut R) -> KMeansResult {
    let n = points.len();
    let dim = points[0].len();
    let mut centroids = plus_plus(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    for _ in 0..max_iter.max(1) {
        let changed = assign(points, &centroids, &mut labels, &mut dists);
        history.push(dists.iter().sum());
        if !changed && history.len() > 1 {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                centroids[c] = sums[c].iter().map(|s| s * inv).collect();
            }
        }
        // empty clusters take the point farthest from its centroid
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("non-empty");
                centroids[c] = points[far].clone();
                dists[far] = 0.0;
            }
        }
    }
    // final centroids are the means of the final assignment
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(&labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            centroids[c] = sums[c].iter().map(|s| s * inv).collect();
        }
    }
    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| sq_dist(p, &centroids[l]))
        .sum();
    let centroids = Array2::from_shape_fn((k, dim), |(c, j)| centroids[c][j]);
    KMeansResult {
        labels,
        centroids,
        inertia,
        restarts_used: 1,
        inertia_history: history,
    }
}
