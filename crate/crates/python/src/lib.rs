//! Python bindings for `kronalign`.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::str::FromStr;

use kronalign::align::AlignOptions;
use kronalign::cli::{run_alignment, AlignConfig, RunSpec};
use kronalign::eigen::{self, EigenOptions};
use kronalign::matching;
use kronalign::motifs::{self, read_edge_list, write_edge_list};
use kronalign::refine::RefineOptions;
use kronalign::synth::{self, NoiseModel};
use kronalign::tensor::{self, DEFAULT_DENSE_BUDGET};
use nalgebra::DMatrix;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err(e: kronalign::Error) -> PyErr {
    match e {
        kronalign::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn io_err(e: std::io::Error) -> PyErr {
    PyIOError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for it in items {
                list.append(json_to_py(py, it)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let d = PyDict::new(py);
            for (k, it) in map {
                d.set_item(k, json_to_py(py, it)?)?;
            }
            d.into_any()
        }
    })
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// Undirected simple graph on vertices `0..n`.
#[pyclass(module = "kronalign_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Graph {
    inner: motifs::Graph,
}

#[pymethods]
impl Graph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(Graph {
            inner: motifs::Graph::new(n, edges).map_err(err)?,
        })
    }

    /// Reads a 1-based edge list.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let f = File::open(path).map_err(io_err)?;
        Ok(Graph {
            inner: read_edge_list(BufReader::new(f)).map_err(err)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(io_err)?;
        write_edge_list(&self.inner, BufWriter::new(f)).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.inner.has_edge(u, v)
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.n(), self.inner.num_edges())
    }
}

/// Sparse symmetric tensor stored by sorted hyperedges.
#[pyclass(module = "kronalign_py", frozen)]
struct MotifTensor {
    inner: tensor::MotifTensor,
}

#[pymethods]
impl MotifTensor {
    #[new]
    #[pyo3(signature = (order, dim, hyperedges, weights=None))]
    fn new(
        order: usize,
        dim: usize,
        hyperedges: Vec<Vec<usize>>,
        weights: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        Ok(MotifTensor {
            inner: tensor::MotifTensor::new(order, dim, hyperedges, weights).map_err(err)?,
        })
    }

    /// The k-clique tensor of `graph`.
    #[staticmethod]
    fn cliques(graph: &Graph, k: usize) -> PyResult<Self> {
        Ok(MotifTensor {
            inner: motifs::clique_tensor(&graph.inner, k).map_err(err)?,
        })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn hyperedges(&self) -> Vec<Vec<usize>> {
        self.inner.hyperedges().map(|e| e.to_vec()).collect()
    }

    /// `T·x^{k−1}`
    fn ttv(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let c = tensor::ttv_same(&self.inner, &x, self.inner.order() - 1).map_err(err)?;
        Ok(c.into_vector().unwrap_or_default())
    }

    /// `T·x^k`
    fn ttv_scalar(&self, x: Vec<f64>) -> PyResult<f64> {
        let c = tensor::ttv_same(&self.inner, &x, self.inner.order()).map_err(err)?;
        Ok(c.scalar().unwrap_or_default())
    }

    fn __repr__(&self) -> String {
        format!(
            "MotifTensor(order={}, dim={}, nnz={})",
            self.inner.order(),
            self.inner.dim(),
            self.inner.nnz()
        )
    }
}

/// Dense symmetric tensor.
#[pyclass(module = "kronalign_py", frozen)]
struct DenseTensor {
    inner: tensor::DenseTensor,
}

#[pymethods]
impl DenseTensor {
    #[staticmethod]
    fn random_symmetric(order: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseTensor {
            inner: tensor::DenseTensor::random_symmetric(order, dim, &mut rng),
        }
    }

    #[staticmethod]
    fn diagonal(order: usize, dim: usize) -> Self {
        DenseTensor {
            inner: tensor::DenseTensor::diagonal(order, dim),
        }
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn get(&self, index: Vec<usize>) -> PyResult<f64> {
        if index.len() != self.inner.order() || index.iter().any(|&i| i >= self.inner.dim()) {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.get(&index))
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err("vector length must equal dim"));
        }
        Ok(self.inner.apply(&x))
    }

    /// `B ⊗ A` with `self` as `B`.
    fn kron(&self, a: &DenseTensor) -> PyResult<Self> {
        Ok(DenseTensor {
            inner: self.inner.kron(&a.inner, DEFAULT_DENSE_BUDGET).map_err(err)?,
        })
    }

    /// Returns `(lambda, vector, residual)`.
    #[pyo3(signature = (restarts=100, seed=0, tol=1e-10))]
    fn dominant_eigen(&self, restarts: usize, seed: u64, tol: f64) -> PyResult<(f64, Vec<f64>, f64)> {
        let opts = EigenOptions {
            restarts,
            seed,
            tol,
            ..EigenOptions::default()
        };
        let p = eigen::dominant_eigen(&self.inner, &opts).map_err(err)?;
        Ok((p.lambda, p.vector, p.residual))
    }

    /// Distinct eigenvalues found from random starts, with vectors.
    #[pyo3(signature = (restarts=100, seed=0, tol=1e-12))]
    fn spectrum(&self, restarts: usize, seed: u64, tol: f64) -> Vec<(f64, Vec<f64>)> {
        eigen::spectrum_sample(&self.inner, restarts, seed, tol)
            .into_iter()
            .map(|p| (p.lambda, p.vector))
            .collect()
    }
}

/// Compares the dominant pair of `B ⊗ A` with those of `A` and `B`.
#[pyfunction]
#[pyo3(signature = (a, b, restarts=1000, seed=0))]
fn verify_decoupling<'py>(
    py: Python<'py>,
    a: &DenseTensor,
    b: &DenseTensor,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = EigenOptions {
        restarts,
        seed,
        ..EigenOptions::default()
    };
    let rep = eigen::verify_decoupling(&a.inner, &b.inner, &opts).map_err(err)?;
    to_py(py, &rep)
}

/// Maximum-weight matching of a dense weight matrix given as rows.
#[pyfunction]
fn max_weight_matching(rows: Vec<Vec<f64>>) -> PyResult<Vec<(usize, usize)>> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("rows must have equal length"));
    }
    let x = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    Ok(matching::max_weight_matching(&x).map_err(err)?.pairs().to_vec())
}

/// Random geometric graph on `n` vertices.
#[pyfunction]
fn rgg(n: usize, seed: u64) -> Graph {
    Graph {
        inner: synth::rgg(n, seed),
    }
}

/// Synthetic problem; returns `(graph_a, graph_b, truth)`.
#[pyfunction]
#[pyo3(signature = (n, model="er", p=0.05, frac=0.25, pedge=0.5, seed=0))]
fn make_problem(
    n: usize,
    model: &str,
    p: f64,
    frac: f64,
    pedge: f64,
    seed: u64,
) -> PyResult<(Graph, Graph, Vec<usize>)> {
    let noise = match model {
        "er" => NoiseModel::Er { p },
        "duplication" => NoiseModel::Duplication { frac, p_edge: pedge },
        other => return Err(PyValueError::new_err(format!("unknown model `{other}`"))),
    };
    let prob = synth::make_problem(n, noise, seed).map_err(err)?;
    Ok((
        Graph { inner: prob.graph_a },
        Graph { inner: prob.graph_b },
        prob.truth,
    ))
}

/// Aligns two graphs. `method` is `tame`, `lowrank-tame` or `lambda-tame`,
/// optionally suffixed with `+local-search`. Returns `(record, pairs)`.
#[pyfunction]
#[pyo3(signature = (graph_a, graph_b, method="lambda-tame", motif=3, alpha=0.5, beta=1.0, iters=15, tol=1e-6, seed=0, truth=None))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn align<'py>(
    py: Python<'py>,
    graph_a: &Graph,
    graph_b: &Graph,
    method: &str,
    motif: usize,
    alpha: f64,
    beta: f64,
    iters: usize,
    tol: f64,
    seed: u64,
    truth: Option<Vec<usize>>,
) -> PyResult<(Bound<'py, PyAny>, Vec<(usize, usize)>)> {
    let spec = RunSpec::from_str(method).map_err(PyValueError::new_err)?;
    let cfg = AlignConfig {
        method: spec.method,
        refine: spec.refine,
        motif,
        options: AlignOptions {
            alpha,
            beta,
            max_iter: iters,
            tol,
            ..AlignOptions::default()
        },
        refine_options: RefineOptions::default(),
        edge_fallback: false,
        seed,
    };
    let (rec, mt) = py
        .detach(|| run_alignment(&graph_a.inner, &graph_b.inner, &cfg, truth.as_deref()))
        .map_err(err)?;
    Ok((to_py(py, &rec)?, mt.pairs().to_vec()))
}

#[pymodule]
pub fn kronalign_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<MotifTensor>()?;
    m.add_class::<DenseTensor>()?;
    m.add_function(wrap_pyfunction!(verify_decoupling, m)?)?;
    m.add_function(wrap_pyfunction!(max_weight_matching, m)?)?;
    m.add_function(wrap_pyfunction!(rgg, m)?)?;
    m.add_function(wrap_pyfunction!(make_problem, m)?)?;
    m.add_function(wrap_pyfunction!(align, m)?)?;
    Ok(())
}
