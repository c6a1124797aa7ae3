//! Python bindings: meshes, CPWL functions, networks, the two compilers, verification,
//! quantization and the 1D solver.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use femnet::compiler::{compile_cpwl_shallow, compile_fem_deep, compile_fem_shallow, MinMaxGadget};
use femnet::galerkin1d::{
    report_table, solve_afem, solve_algorithm1, to_markdown, uniform_knots, Bvp1dProblem, Bvp1dState, SolverConfig,
};
use femnet::geometry::BoundingBox;
use femnet::{cpwl, io, mesh, quantize, verify, CpwlPieces, QuantGrid, ReluNetwork, SimplicialMesh};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn lib_err(e: femnet::Error) -> PyErr {
    match e {
        femnet::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => err(other),
    }
}

/// Converts through JSON into plain Python dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Mesh", module = "femnet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMesh(SimplicialMesh);

#[pymethods]
impl PyMesh {
    #[new]
    #[pyo3(signature = (dim, vertices, simplices))]
    fn new(dim: usize, vertices: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>) -> PyResult<Self> {
        SimplicialMesh::new(dim, vertices, simplices, None, true).map(Self).map_err(err)
    }

    #[staticmethod]
    fn structured(nx: usize, ny: usize) -> Self {
        Self(mesh::structured_triangles(nx, ny))
    }

    #[staticmethod]
    fn criss_cross(nx: usize, ny: usize) -> Self {
        Self(mesh::criss_cross(nx, ny))
    }

    #[staticmethod]
    fn union_jack(nx: usize, ny: usize) -> Self {
        Self(mesh::union_jack(nx, ny))
    }

    #[staticmethod]
    fn kuhn_cube(n: usize) -> Self {
        Self(mesh::kuhn_cube(n))
    }

    #[staticmethod]
    fn interval(points: Vec<f64>) -> Self {
        Self(mesh::interval_from_points(&points))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        io::load_mesh(&path).map(Self).map_err(lib_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_mesh(&path, &self.0).map_err(lib_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.0.vertex_count()
    }

    #[getter]
    fn vertices(&self) -> Vec<Vec<f64>> {
        self.0.vertices().to_vec()
    }

    #[getter]
    fn simplices(&self) -> Vec<Vec<usize>> {
        self.0.simplices().to_vec()
    }

    /// Maximum number of simplices sharing a vertex.
    #[getter]
    fn kh(&self) -> usize {
        self.0.compute_kh()
    }

    fn non_convex_vertices(&self) -> Vec<usize> {
        self.0.non_convex_vertices()
    }

    fn eval_fem(&self, coeffs: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
        if coeffs.len() != self.0.vertex_count() || x.len() != self.0.dim() {
            return Err(err("coefficient or point dimension mismatch"));
        }
        Ok(self.0.eval_fem(&coeffs, &x))
    }

    fn __repr__(&self) -> String {
        format!("Mesh(dim={}, vertices={}, simplices={})", self.0.dim(), self.0.vertex_count(), self.0.simplex_count())
    }
}

#[pyclass(name = "Cpwl", module = "femnet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCpwl(CpwlPieces);

#[pymethods]
impl PyCpwl {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        io::load_cpwl(&path).map(Self).map_err(lib_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_cpwl(&path, &self.0).map_err(lib_err)
    }

    /// Random max-of-mins of `m` affine functions on `[-1, 1]^dim`.
    #[staticmethod]
    #[pyo3(signature = (dim, m, seed = 0))]
    fn random(dim: usize, m: usize, seed: u64) -> Self {
        Self(cpwl::random_cpwl(dim, m, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    /// Nodal basis function of vertex `i`.
    #[staticmethod]
    fn hat(mesh: &PyMesh, i: usize) -> PyResult<Self> {
        cpwl::hat_function(&mesh.0, i).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Number of distinct affine pieces.
    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&x).map_err(err)
    }
}

#[pyclass(name = "Network", module = "femnet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNetwork(ReluNetwork);

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        io::load_network(&path).map(Self).map_err(lib_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_network(&path, &self.0).map_err(lib_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::network_from_json(text).map(Self).map_err(lib_err)
    }

    fn to_json(&self) -> PyResult<String> {
        io::network_to_json(&self.0).map_err(lib_err)
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }

    #[getter]
    fn hidden_layers(&self) -> usize {
        self.0.hidden_layers()
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    #[getter]
    fn nonzero_params(&self) -> usize {
        self.0.nonzero_params()
    }

    #[getter]
    fn widths(&self) -> Vec<usize> {
        self.0.widths()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.eval(&x).map_err(err)
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.eval_scalar(&x).map_err(err)
    }

    fn eval_many(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        points.iter().map(|x| self.0.eval_scalar(x).map_err(err)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Network(input_dim={}, widths={:?})", self.0.input_dim(), self.0.widths())
    }
}

/// Compiles `sum coeffs_i phi_i`; returns the network and the depth/size accounting.
#[pyfunction]
#[pyo3(signature = (mesh, coeffs, pathway = "deep"))]
fn compile_fem<'py>(py: Python<'py>, mesh: &PyMesh, coeffs: Vec<f64>, pathway: &str) -> PyResult<(PyNetwork, Bound<'py, PyAny>)> {
    let (net, report) = match pathway {
        "deep" => compile_fem_deep(&mesh.0, &coeffs),
        "shallow" => compile_fem_shallow(&mesh.0, &coeffs),
        other => return Err(err(format!("unknown pathway {other:?}, use \"deep\" or \"shallow\""))),
    }
    .map_err(err)?;
    Ok((PyNetwork(net), to_py(py, &report)?))
}

#[pyfunction]
fn compile_cpwl<'py>(py: Python<'py>, f: &PyCpwl) -> PyResult<(PyNetwork, Bound<'py, PyAny>)> {
    let (net, report) = compile_cpwl_shallow(&f.0).map_err(err)?;
    Ok((PyNetwork(net), to_py(py, &report)?))
}

#[pyfunction]
#[pyo3(signature = (net, mesh, coeffs, samples = 10_000, tol = 1e-9, seed = 0))]
fn verify_fem<'py>(
    py: Python<'py>,
    net: &PyNetwork,
    mesh: &PyMesh,
    coeffs: Vec<f64>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    if coeffs.len() != mesh.0.vertex_count() {
        return Err(err("one coefficient per vertex expected"));
    }
    let r = verify::verify_fem(&net.0, &mesh.0, &coeffs, samples, tol, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(lib_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (net, f, samples = 10_000, tol = 1e-9, seed = 0))]
fn verify_cpwl<'py>(py: Python<'py>, net: &PyNetwork, f: &PyCpwl, samples: usize, tol: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let r = verify::verify_cpwl(&net.0, &f.0, samples, tol, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(lib_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (net, tol = None))]
fn check_structured<'py>(py: Python<'py>, net: &PyNetwork, tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let r = match tol {
        Some(t) => quantize::check_structured_tol(&net.0, t),
        None => quantize::check_structured(&net.0),
    };
    to_py(py, &r)
}

fn grid(k: i32, l: u32) -> PyResult<QuantGrid> {
    if !(2..=11).contains(&l) {
        return Err(err("l must lie in 2..=11"));
    }
    Ok(QuantGrid::new(k, l))
}

#[pyfunction]
fn quant_grid(k: i32, l: u32) -> PyResult<Vec<f64>> {
    Ok(grid(k, l)?.values().to_vec())
}

#[pyfunction]
fn project(w: f64, k: i32, l: u32) -> PyResult<f64> {
    Ok(grid(k, l)?.project(w))
}

#[pyfunction]
#[pyo3(signature = (net, k, l, from_layer = 0))]
fn quantize_network(net: &PyNetwork, k: i32, l: u32, from_layer: usize) -> PyResult<PyNetwork> {
    Ok(PyNetwork(grid(k, l)?.project_network(&net.0, from_layer)))
}

/// `min(a, b)` through the four-neuron gadget.
#[pyfunction]
fn gadget_min(a: f64, b: f64) -> f64 {
    MinMaxGadget::min().eval(a, b)
}

/// Activation-pattern labels on a `res x res` grid of `[lo, hi]^2`.
#[pyfunction]
#[pyo3(signature = (net, res = 200, lo = -1.0, hi = 1.0))]
fn region_labels(net: &PyNetwork, res: usize, lo: f64, hi: f64) -> PyResult<Vec<(f64, f64, usize)>> {
    let labels = verify::region_labels(&net.0, &BoundingBox::cube(2, lo, hi), res).map_err(err)?;
    Ok(labels.into_iter().map(|(x, l)| (x[0], x[1], l)).collect())
}

/// Solves the 1D model problem on `n` grid points with `method` in {"dnn", "afem", "uniform"}.
#[pyfunction]
#[pyo3(signature = (n, method = "dnn", max_iter = 200, eta = 0.5, width = 0.01))]
fn solve_bvp<'py>(py: Python<'py>, n: usize, method: &str, max_iter: usize, eta: f64, width: f64) -> PyResult<Bound<'py, PyAny>> {
    let problem = Bvp1dProblem::bump(width);
    let mut config = SolverConfig::new(n);
    config.max_iter = max_iter;
    config.eta = eta;
    config.validate().map_err(err)?;
    let state = match method {
        "dnn" => solve_algorithm1(&problem, &config),
        "afem" => solve_afem(&problem, n),
        "uniform" => Bvp1dState::from_grid(uniform_knots(n), &problem),
        other => return Err(err(format!("unknown method {other:?}"))),
    }
    .map_err(err)?;
    to_py(py, &state)
}

/// Error and energy table rows; `markdown=True` returns the formatted table instead.
#[pyfunction]
#[pyo3(signature = (ns = vec![23, 37, 53], markdown = false))]
fn report<'py>(py: Python<'py>, ns: Vec<usize>, markdown: bool) -> PyResult<Bound<'py, PyAny>> {
    let rows = report_table(&Bvp1dProblem::model(), &ns, &SolverConfig::new(3)).map_err(err)?;
    if markdown {
        Ok(to_markdown(&rows).into_pyobject(py)?.into_any())
    } else {
        to_py(py, &rows)
    }
}

#[pymodule]
#[pyo3(name = "femnet")]
fn femnet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyCpwl>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(compile_fem, m)?)?;
    m.add_function(wrap_pyfunction!(compile_cpwl, m)?)?;
    m.add_function(wrap_pyfunction!(verify_fem, m)?)?;
    m.add_function(wrap_pyfunction!(verify_cpwl, m)?)?;
    m.add_function(wrap_pyfunction!(check_structured, m)?)?;
    m.add_function(wrap_pyfunction!(quant_grid, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_network, m)?)?;
    m.add_function(wrap_pyfunction!(gadget_min, m)?)?;
    m.add_function(wrap_pyfunction!(region_labels, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bvp, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
