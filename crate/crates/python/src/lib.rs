//! Python bindings. Matrices cross the boundary as nested lists (or any
//! sequence of sequences, such as a 2-D numpy array) in features x instances
//! layout.

use std::path::PathBuf;

use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lsimvc_core::dataset::synthetic::{gaussian_blobs, two_moons, BlobsSpec, MoonsSpec};
use lsimvc_core::dataset::{apply_mask, MaskProtocol, MaskSpec, MultiViewDataset};
use lsimvc_core::graph::{build_fused_graphs, GraphParams, Sigma};
use lsimvc_core::harness::{run_experiment as run_sweep, ExperimentConfig};
use lsimvc_core::metrics::{self, KMeansOptions};
use lsimvc_core::solver::{self, SolverConfig};

fn py_err(e: lsimvc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_array(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Array2::from_shape_vec((r, c), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

/// Views, availability and optional labels of a multi-view dataset.
#[pyclass(name = "Dataset", module = "lsimvc", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: MultiViewDataset,
}

#[pymethods]
impl PyDataset {
    /// `views[v]` is `m_v x n_v`; `availability[v]` lists the sample ids of
    /// its columns and may be omitted for complete data.
    #[new]
    #[pyo3(signature = (views, availability=None, n=None, labels=None))]
    fn new(
        views: Vec<Vec<Vec<f64>>>,
        availability: Option<Vec<Vec<usize>>>,
        n: Option<usize>,
        labels: Option<Vec<i64>>,
    ) -> PyResult<Self> {
        let views = views
            .into_iter()
            .map(to_array)
            .collect::<PyResult<Vec<_>>>()?;
        let inner = match availability {
            None => MultiViewDataset::complete(views, labels),
            Some(avail) => {
                let n = n
                    .or_else(|| labels.as_ref().map(Vec::len))
                    .or_else(|| avail.iter().flatten().max().map(|m| m + 1))
                    .unwrap_or(0);
                MultiViewDataset::new(views, avail, n, labels)
            }
        }
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, clusters, view_dims, noise_ratio=0.5, centroid_distance=10.0, seed=0))]
    fn blobs(
        n: usize,
        clusters: usize,
        view_dims: Vec<usize>,
        noise_ratio: f64,
        centroid_distance: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let spec = BlobsSpec {
            n,
            clusters,
            view_dims,
            noise_ratio,
            centroid_distance,
            seed,
        };
        Ok(Self {
            inner: gaussian_blobs(&spec).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, view_dims, noise=0.1, seed=0))]
    fn moons(n: usize, view_dims: Vec<usize>, noise: f64, seed: u64) -> PyResult<Self> {
        let spec = MoonsSpec {
            n,
            view_dims,
            noise,
            seed,
        };
        Ok(Self {
            inner: two_moons(&spec).map_err(py_err)?,
        })
    }

    /// Drops instances of a complete dataset: `"random-missing"` removes a
    /// `rate` fraction per view, `"paired-sample"` keeps a `rate` fraction of
    /// samples in both of two views.
    #[pyo3(signature = (rate, seed, protocol="random-missing"))]
    fn mask(&self, rate: f64, seed: u64, protocol: &str) -> PyResult<Self> {
        let protocol = match protocol {
            "random-missing" => MaskProtocol::RandomMissing,
            "paired-sample" => MaskProtocol::PairedSample,
            other => return Err(PyValueError::new_err(format!("unknown protocol {other:?}"))),
        };
        let spec = MaskSpec::new(protocol, rate, seed).map_err(py_err)?;
        Ok(Self {
            inner: apply_mask(&self.inner, &spec).map_err(py_err)?,
        })
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn n_views(&self) -> usize {
        self.inner.n_views()
    }

    #[getter]
    fn availability(&self) -> Vec<Vec<usize>> {
        self.inner.availability().to_vec()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<usize>> {
        self.inner.labels().map(<[usize]>::to_vec)
    }

    fn view(&self, v: usize) -> PyResult<Vec<Vec<f64>>> {
        if v >= self.inner.n_views() {
            return Err(PyValueError::new_err(format!("view {v} out of range")));
        }
        Ok(to_rows(self.inner.view(v).data()))
    }

    /// Dense `n x n_v` indicator of view `v`.
    fn indicator(&self, v: usize) -> PyResult<Vec<Vec<u8>>> {
        let g = self.inner.indicators().map_err(py_err)?;
        let g = g
            .get(v)
            .ok_or_else(|| PyValueError::new_err(format!("view {v} out of range")))?;
        Ok(g.to_dense().outer_iter().map(|r| r.to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        let dims: Vec<String> = self
            .inner
            .views()
            .iter()
            .map(|v| format!("{}x{}", v.dim(), v.len()))
            .collect();
        format!(
            "Dataset(n={}, views=[{}])",
            self.inner.n_samples(),
            dims.join(", ")
        )
    }
}

/// Fits the model and returns `q`, `u`, `p`, `alpha`, `objective_trace`,
/// `iterations` and `converged`.
#[pyfunction]
#[pyo3(signature = (dataset, clusters, lam=1.0, beta=1e-3, r=2.0, k=5, gamma=1.0, sigma=None, max_iter=300, tol=1e-6, seed=0))]
#[allow(clippy::too_many_arguments)]
fn fit<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    clusters: usize,
    lam: f64,
    beta: f64,
    r: f64,
    k: usize,
    gamma: f64,
    sigma: Option<f64>,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let ds = &dataset.inner;
    let params = GraphParams {
        k,
        sigma: sigma.map_or(Sigma::Auto, Sigma::Fixed),
        gamma,
    };
    let cfg = SolverConfig {
        lambda: lam,
        beta,
        r,
        max_iter,
        tol,
        seed,
        ..SolverConfig::with_clusters(clusters)
    };
    let state = py
        .detach(|| {
            let graphs = build_fused_graphs(ds, &params)?;
            let indicators = ds.indicators()?;
            solver::fit(ds, &graphs, &indicators, &cfg)
        })
        .map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("q", to_rows(&state.q))?;
    out.set_item("u", state.u.iter().map(to_rows).collect::<Vec<_>>())?;
    out.set_item("p", state.p.iter().map(to_rows).collect::<Vec<_>>())?;
    out.set_item("alpha", state.alpha.clone())?;
    out.set_item("objective_trace", state.objective_trace())?;
    out.set_item("iterations", state.iterations())?;
    out.set_item("converged", state.converged)?;
    Ok(out)
}

/// k-means++ with Lloyd iterations on the columns of `data`; returns labels.
#[pyfunction]
#[pyo3(signature = (data, k, restarts=20, seed=0))]
fn kmeans(
    py: Python<'_>,
    data: Vec<Vec<f64>>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Vec<usize>> {
    let data = to_array(data)?;
    let res = py
        .detach(|| metrics::kmeans(data.view(), k, restarts, seed))
        .map_err(py_err)?;
    Ok(res.labels)
}

/// Clusters the columns of `q` and scores them: `predicted`, `acc`, `nmi`,
/// `purity`.
#[pyfunction]
#[pyo3(signature = (q, truth, k, restarts=20, seed=0))]
fn evaluate<'py>(
    py: Python<'py>,
    q: Vec<Vec<f64>>,
    truth: Vec<usize>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let q = to_array(q)?;
    let opts = KMeansOptions {
        restarts,
        ..KMeansOptions::default()
    };
    let res = py
        .detach(|| metrics::evaluate(q.view(), &truth, k, &opts, seed))
        .map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("predicted", res.predicted)?;
    out.set_item("acc", res.acc)?;
    out.set_item("nmi", res.nmi)?;
    out.set_item("purity", res.purity)?;
    Ok(out)
}

#[pyfunction]
fn accuracy(truth: Vec<usize>, pred: Vec<usize>) -> PyResult<f64> {
    metrics::accuracy(&truth, &pred).map_err(py_err)
}

#[pyfunction]
fn nmi(truth: Vec<usize>, pred: Vec<usize>) -> PyResult<f64> {
    metrics::nmi(&truth, &pred).map_err(py_err)
}

#[pyfunction]
fn purity(truth: Vec<usize>, pred: Vec<usize>) -> PyResult<f64> {
    metrics::purity(&truth, &pred).map_err(py_err)
}

/// Runs a sweep from a JSON config file and returns one dict per
/// (grid point, rate) aggregate.
#[pyfunction]
#[pyo3(signature = (config, output=None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config: PathBuf,
    output: Option<PathBuf>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = ExperimentConfig::from_json_file(&config).map_err(py_err)?;
    if output.is_some() {
        cfg.output = output;
    }
    let records = py.detach(|| run_sweep(&cfg)).map_err(py_err)?;
    records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("run_id", &r.run_id)?;
            d.set_item("rate", r.rate)?;
            d.set_item("lambda", r.lambda)?;
            d.set_item("beta", r.beta)?;
            d.set_item("r", r.r)?;
            d.set_item("k", r.k)?;
            d.set_item("acc_mean", r.acc.mean)?;
            d.set_item("acc_std", r.acc.std)?;
            d.set_item("nmi_mean", r.nmi.mean)?;
            d.set_item("nmi_std", r.nmi.std)?;
            d.set_item("purity_mean", r.purity.mean)?;
            d.set_item("purity_std", r.purity.std)?;
            d.set_item("failed", r.failed)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn lsimvc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(nmi, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
