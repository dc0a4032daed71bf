#![allow(dead_code)]

use lsimvc_core::dataset::{random_missing_availability, IndicatorMatrix, MultiViewDataset};
use lsimvc_core::graph::{build_fused_graphs, FusedGraph, GraphParams};
use lsimvc_core::linalg::random_orthonormal;
use lsimvc_core::solver::SolverState;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct Problem {
    pub ds: MultiViewDataset,
    pub graphs: Vec<FusedGraph>,
    pub indicators: Vec<IndicatorMatrix>,
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample::<f64, _>(StandardNormal))
}

/// Random Gaussian views of `n` samples with a random-missing mask.
pub fn random_problem(
    seed: u64,
    views: usize,
    n: usize,
    dims: &[usize],
    rate: f64,
    k: usize,
) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = random_missing_availability(n, views, rate, seed ^ 0xABCD).unwrap();
    let data = (0..views)
        .map(|v| gaussian(dims[v % dims.len()], draw.availability[v].len(), &mut rng))
        .collect();
    let ds = MultiViewDataset::new(data, draw.availability, n, None).unwrap();
    let graphs = build_fused_graphs(
        &ds,
        &GraphParams {
            k,
            ..GraphParams::default()
        },
    )
    .unwrap();
    let indicators = ds.indicators().unwrap();
    Problem {
        ds,
        graphs,
        indicators,
    }
}

/// Arbitrary (not fitted) state with orthonormal bases and simplex weights.
pub fn random_state(ds: &MultiViewDataset, c: usize, seed: u64) -> SolverState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<_> = ds
        .views()
        .iter()
        .map(|v| random_orthonormal(v.dim(), c, &mut rng))
        .collect();
    let p = ds
        .views()
        .iter()
        .map(|v| gaussian(c, v.len(), &mut rng))
        .collect();
    let q = gaussian(c, ds.n_samples(), &mut rng);
    let raw: Vec<f64> = (0..ds.n_views())
        .map(|_| rng.random_range(0.05..1.0))
        .collect();
    let total: f64 = raw.iter().sum();
    SolverState {
        u,
        p,
        q,
        alpha: raw.iter().map(|a| a / total).collect(),
        trace: Vec::new(),
        converged: false,
    }
}

/// Dense `G` as f64.
pub fn dense_g(g: &IndicatorMatrix) -> Array2<f64> {
    g.to_dense().mapv(f64::from)
}

/// Graph term `sum_ij W_ij |P_i - (Q G)_j|^2` by plain loops over the dense `W`.
pub fn naive_graph_term(
    p: &Array2<f64>,
    q: &Array2<f64>,
    g: &IndicatorMatrix,
    w: &Array2<f64>,
) -> f64 {
    let qg = q.dot(&dense_g(g));
    let n_v = p.ncols();
    let mut total = 0.0;
    for i in 0..n_v {
        for j in 0..n_v {
            let mut d = 0.0;
            for r in 0..p.nrows() {
                d += (p[[r, i]] - qg[[r, j]]).powi(2);
            }
            total += d * w[[i, j]];
        }
    }
    total
}
