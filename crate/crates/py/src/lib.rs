//! Python bindings: bases, study data, PGD build, evaluation and simulation.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wallrom::bases::{ApproximationBasis, BasisKind, SnapshotMatrix};
use wallrom::grid::SpatialGrid;
use wallrom::metrics;
use wallrom::pgd::{Interpolation, PgdModel, StoppingCriteria};
use wallrom::studies::{
    synthetic_fixture, FixtureSettings, LearningPeriod, ModelSettings, PracticalCaseConfig, StudyData,
    TheoreticalCaseConfig,
};
use wallrom::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Shape { .. } => PyValueError::new_err(e.to_string()),
        Error::Io(_) | Error::Parse { .. } | Error::Version { .. } | Error::Corrupt(_) | Error::Json(_) => {
            PyIOError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn interpolation(name: &str) -> PyResult<Interpolation> {
    match name {
        "linear" => Ok(Interpolation::Linear),
        "nearest" => Ok(Interpolation::Nearest),
        other => Err(PyValueError::new_err(format!("unknown interpolation '{other}'"))),
    }
}

/// Orthonormal approximation basis on a uniform grid.
#[pyclass(name = "Basis", module = "wallrom")]
#[derive(Clone)]
struct PyBasis(ApproximationBasis);

#[pymethods]
impl PyBasis {
    #[staticmethod]
    fn chebyshev(n: usize, intervals: usize) -> PyResult<Self> {
        let g = SpatialGrid::uniform(intervals).map_err(py_err)?;
        ApproximationBasis::chebyshev(n, &g).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn legendre(n: usize, intervals: usize) -> PyResult<Self> {
        let g = SpatialGrid::uniform(intervals).map_err(py_err)?;
        ApproximationBasis::legendre(n, &g).map(Self).map_err(py_err)
    }

    /// POD basis learnt from snapshot profiles, one list per time sample.
    #[staticmethod]
    fn pod(snapshots: Vec<Vec<f64>>, n: usize) -> PyResult<Self> {
        let rows = snapshots.first().map_or(0, Vec::len);
        let g = SpatialGrid::uniform(rows.saturating_sub(1)).map_err(py_err)?;
        let times = (0..snapshots.len()).map(|t| t as f64).collect();
        let s = SnapshotMatrix::new(times, snapshots).map_err(py_err)?;
        ApproximationBasis::pod(&s, n, &g).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        ApproximationBasis::load_json(path).map(Self).map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save_json(path).map_err(py_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.0.n_modes()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.grid().nodes().to_vec()
    }

    fn modes(&self) -> Vec<Vec<f64>> {
        self.0.modes().to_vec()
    }

    fn project(&self, profile: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.project(&profile).map_err(py_err)
    }

    fn reconstruct(&self, zeta: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.reconstruct(&zeta).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Basis({}, n_modes={})", self.0.kind().name(), self.0.n_modes())
    }
}

/// Reference profiles and edge drives of one case study.
#[pyclass(name = "Study", module = "wallrom")]
struct PyStudy(StudyData);

#[pymethods]
impl PyStudy {
    /// Theoretical case; `horizon` in seconds.
    #[staticmethod]
    #[pyo3(signature = (horizon=None, nodes=None))]
    fn theoretical(horizon: Option<f64>, nodes: Option<usize>) -> PyResult<Self> {
        let mut cfg = TheoreticalCaseConfig::default();
        if let Some(h) = horizon {
            cfg.horizon = h;
        }
        if let Some(n) = nodes {
            cfg.nodes = n;
        }
        StudyData::theoretical(&cfg, &ModelSettings::default())
            .map(Self)
            .map_err(py_err)
    }

    /// Practical case on the synthetic fixture; POD trains on `period`.
    #[staticmethod]
    #[pyo3(signature = (period="full"))]
    fn practical(period: &str) -> PyResult<Self> {
        let period: LearningPeriod = period.parse().map_err(py_err)?;
        let cfg = PracticalCaseConfig::default();
        let set = synthetic_fixture(&cfg, &FixtureSettings::default()).map_err(py_err)?;
        StudyData::practical(&set, &cfg, period).map(Self).map_err(py_err)
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.grid().nodes().to_vec()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.reference.times.clone()
    }

    fn reference(&self) -> Vec<Vec<f64>> {
        self.0.reference.profiles.clone()
    }

    /// Basis of `n` modes with coefficient ranges from this study.
    fn basis(&self, kind: &str, n: usize) -> PyResult<PyBasis> {
        let kind: BasisKind = kind.parse().map_err(py_err)?;
        self.0.basis(kind, n).map(PyBasis).map_err(py_err)
    }

    fn mu(&self, basis: &PyBasis) -> PyResult<f64> {
        metrics::mu(&self.0.reference, &basis.0).map(|r| r.value).map_err(py_err)
    }

    fn nu(&self, basis: &PyBasis, delta_zeta: f64) -> PyResult<f64> {
        metrics::nu(&self.0.reference, &basis.0, delta_zeta)
            .map(|r| r.value)
            .map_err(py_err)
    }

    /// Offline PGD build for `basis` at coefficient spacing `delta_zeta`.
    #[pyo3(signature = (basis, delta_zeta, seed=42, eps_fixed_point=None, eps_enrichment=None))]
    fn build(
        &self,
        py: Python<'_>,
        basis: &PyBasis,
        delta_zeta: f64,
        seed: u64,
        eps_fixed_point: Option<f64>,
        eps_enrichment: Option<f64>,
    ) -> PyResult<PyModel> {
        let mut criteria = StoppingCriteria::default();
        if let Some(e) = eps_fixed_point {
            criteria.eps_fixed_point = e;
        }
        if let Some(e) = eps_enrichment {
            criteria.eps_enrichment = e;
        }
        let data = &self.0;
        py.allow_threads(|| data.build(&basis.0, delta_zeta, &ModelSettings::default(), &criteria, seed))
            .map(PyModel)
            .map_err(py_err)
    }

    /// Online run of `model` over the whole study; returns (profiles, epsilon).
    #[pyo3(signature = (model, interpolation="linear"))]
    fn simulate(&self, model: &PyModel, interpolation: &str) -> PyResult<(Vec<Vec<f64>>, f64)> {
        let sim = self.0.simulate(&model.0, self::interpolation(interpolation)?).map_err(py_err)?;
        let eps = self.0.epsilon(&sim).map_err(py_err)?.value;
        Ok((sim.series.profiles, eps))
    }
}

/// Separated PGD solution of one implicit step.
#[pyclass(name = "Model", module = "wallrom")]
struct PyModel(PgdModel);

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        PgdModel::load(path).map(Self).map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).map_err(py_err)
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.0.n_modes()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.meta.seed
    }

    /// Edge-parameter domains as ((lo, hi), (lo, hi)) for b_in and b_out.
    fn domains(&self) -> ((f64, f64), (f64, f64)) {
        let d = &self.0.domains;
        ((d.b_in.lo, d.b_in.hi), (d.b_out.lo, d.b_out.hi))
    }

    #[pyo3(signature = (b_in, b_out, zeta_bar, interpolation="linear"))]
    fn evaluate(&self, b_in: f64, b_out: f64, zeta_bar: Vec<f64>, interpolation: &str) -> PyResult<Vec<f64>> {
        self.0
            .evaluate(b_in, b_out, &zeta_bar, self::interpolation(interpolation)?)
            .map(|e| e.field)
            .map_err(py_err)
    }

    /// Full-order solve of the same step problem.
    fn oracle(&self, b_in: f64, b_out: f64, zeta_bar: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.oracle(b_in, b_out, &zeta_bar).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Model(n_modes={}, basis={})", self.0.n_modes(), self.0.basis.kind().name())
    }
}

#[pymodule]
#[pyo3(name = "wallrom")]
fn wallrom_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBasis>()?;
    m.add_class::<PyStudy>()?;
    m.add_class::<PyModel>()?;
    Ok(())
}
