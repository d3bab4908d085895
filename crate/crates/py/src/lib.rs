//! Python module `lorentz_wall`.

use lorentz_core::acceptance::{run_all, AcceptanceConfig};
use lorentz_core::geometry::{BoundaryMode, Disk, ScattererLattice};
use lorentz_core::limit::default_truncation;
use lorentz_core::rng::stream;
use lorentz_core::sim::{run_ensemble, WallDynamics};
use lorentz_core::{stats, AlphaSchedule, CrossingMode, Regime, Vec2, WalkRegime};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: lorentz_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_boundary(s: &str) -> PyResult<BoundaryMode> {
    match s {
        "vertical_torus" => Ok(BoundaryMode::VerticalTorus),
        "reflecting_strip" => Ok(BoundaryMode::ReflectingStrip),
        _ => Err(PyValueError::new_err(format!("unknown boundary mode {s:?}"))),
    }
}

fn parse_regime(s: &str) -> PyResult<Regime> {
    match s {
        "shrinking" => Ok(Regime::Shrinking),
        "double_array" => Ok(Regime::DoubleArray),
        "no_wall" => Ok(Regime::NoWall),
        _ => Err(PyValueError::new_err(format!("unknown regime {s:?}"))),
    }
}

fn parse_crossing(s: &str) -> PyResult<CrossingMode> {
    match s {
        "geometric" => Ok(CrossingMode::Geometric),
        "trapdoor" => Ok(CrossingMode::Trapdoor),
        _ => Err(PyValueError::new_err(format!("unknown crossing mode {s:?}"))),
    }
}

fn parse_dynamics(s: &str) -> PyResult<WallDynamics> {
    match s {
        "mirror" => Ok(WallDynamics::Mirror),
        "direct" => Ok(WallDynamics::Direct),
        _ => Err(PyValueError::new_err(format!("unknown wall dynamics {s:?}"))),
    }
}

fn parse_alpha(family: &str, c: f64, alpha: f64, beta: f64) -> PyResult<AlphaSchedule> {
    match family {
        "inv_sqrt" => Ok(AlphaSchedule::InvSqrt { c }),
        "const" => Ok(AlphaSchedule::Const { alpha }),
        "power" => Ok(AlphaSchedule::Power { c, beta }),
        _ => Err(PyValueError::new_err(format!("unknown alpha family {family:?}"))),
    }
}

/// Periodic array of disjoint disks.
#[pyclass(name = "Lattice", module = "lorentz_wall", frozen)]
struct PyLattice(ScattererLattice);

#[pymethods]
impl PyLattice {
    /// `disks` is a list of `(x, y, radius)`.
    #[new]
    #[pyo3(signature = (disks, boundary_mode = "vertical_torus"))]
    fn new(disks: Vec<(f64, f64, f64)>, boundary_mode: &str) -> PyResult<Self> {
        let disks = disks.into_iter().map(|(x, y, r)| Disk::new(x, y, r)).collect();
        ScattererLattice::new(disks, parse_boundary(boundary_mode)?)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn reference() -> Self {
        Self(ScattererLattice::reference())
    }

    #[getter]
    fn disks(&self) -> Vec<(f64, f64, f64)> {
        self.0
            .disks()
            .iter()
            .map(|d| (d.center.x, d.center.y, d.radius))
            .collect()
    }

    fn wall_components(&self) -> PyResult<Vec<(f64, f64)>> {
        self.0.wall_components().map_err(err)
    }

    /// Certified bound on free flights; raises for an infinite horizon.
    fn max_free_path(&self, py: Python<'_>) -> PyResult<f64> {
        py.detach(|| self.0.validate_finite_horizon()).map_err(err)
    }

    /// Distance to the first scatterer along `v` from `q`, if within `limit`.
    fn cast_ray(&self, q: (f64, f64), v: (f64, f64), limit: f64) -> Option<f64> {
        let v = Vec2::new(v.0, v.1).normalized();
        self.0.cast_ray(Vec2::new(q.0, q.1), v, limit).map(|(t, _)| t)
    }

    fn __repr__(&self) -> String {
        format!("Lattice({:?})", self.disks())
    }
}

/// Specular reflection of `v` about the unit normal `n`.
#[pyfunction]
fn reflect(v: (f64, f64), n: (f64, f64)) -> (f64, f64) {
    let r = lorentz_core::reflect(Vec2::new(v.0, v.1), Vec2::new(n.0, n.1));
    (r.x, r.y)
}

/// Billiard with its wall.
#[pyclass(name = "LorentzConfig", module = "lorentz_wall", frozen)]
struct PyLorentzConfig(lorentz_core::LorentzConfig);

#[pymethods]
impl PyLorentzConfig {
    /// Without `max_free_path` the horizon sweep runs first.
    #[new]
    #[pyo3(signature = (lattice, max_free_path = None, count_wall_hits = false, dynamics = "mirror"))]
    fn new(
        py: Python<'_>,
        lattice: &PyLattice,
        max_free_path: Option<f64>,
        count_wall_hits: bool,
        dynamics: &str,
    ) -> PyResult<Self> {
        let lattice = lattice.0.clone();
        let mut cfg = match max_free_path {
            Some(b) => lorentz_core::LorentzConfig::with_bound(lattice, b),
            None => py.detach(|| lorentz_core::LorentzConfig::new(lattice, Default::default())),
        }
        .map_err(err)?;
        cfg.count_wall_hits = count_wall_hits;
        cfg.dynamics = parse_dynamics(dynamics)?;
        Ok(Self(cfg))
    }

    #[staticmethod]
    fn reference() -> Self {
        Self(lorentz_core::LorentzConfig::reference())
    }

    #[getter]
    fn max_free_path(&self) -> f64 {
        self.0.max_free_path
    }

    #[getter]
    fn wall_components(&self) -> Vec<(f64, f64)> {
        self.0.wall.components().to_vec()
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.0.wall.c1()
    }
}

/// Hole sizes and how crossings are decided.
#[pyclass(name = "HoleSchedule", module = "lorentz_wall", frozen)]
struct PyHoleSchedule(lorentz_core::HoleSchedule);

#[pymethods]
impl PyHoleSchedule {
    #[new]
    #[pyo3(signature = (regime, family = "inv_sqrt", *, c = 1.0, alpha = 0.0, beta = 0.5, crossing_mode = "geometric"))]
    fn new(regime: &str, family: &str, c: f64, alpha: f64, beta: f64, crossing_mode: &str) -> PyResult<Self> {
        Ok(Self(lorentz_core::HoleSchedule::new(
            parse_regime(regime)?,
            parse_alpha(family, c, alpha, beta)?,
            parse_crossing(crossing_mode)?,
        )))
    }

    #[staticmethod]
    fn no_wall() -> Self {
        Self(lorentz_core::HoleSchedule::no_wall())
    }

    /// Hole size at collision `k` of a run with `n` steps.
    fn hole_size(&self, k: usize, n: usize) -> f64 {
        self.0.hole_size(k, n)
    }
}

/// One trajectory of the billiard or the walk.
#[pyclass(name = "Trajectory", module = "lorentz_wall", frozen, get_all)]
struct PyTrajectory {
    kappa: Vec<f64>,
    s: Vec<f64>,
    position: Vec<f64>,
    l: Vec<u32>,
    crossing_steps: Vec<usize>,
    wall_hits: usize,
    alpha: Vec<f64>,
}

impl From<lorentz_core::TrajectoryRecord> for PyTrajectory {
    fn from(r: lorentz_core::TrajectoryRecord) -> Self {
        Self {
            kappa: r.kappa,
            s: r.s,
            position: r.position,
            l: r.l,
            crossing_steps: r.crossing_steps,
            wall_hits: r.wall_hits,
            alpha: r.alpha,
        }
    }
}

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.kappa.len()
    }
}

/// Trajectory `index` of the ensemble with master seed `seed`.
#[pyfunction]
#[pyo3(signature = (config, schedule, n, seed, index = 0))]
fn run_trajectory(
    py: Python<'_>,
    config: &PyLorentzConfig,
    schedule: &PyHoleSchedule,
    n: usize,
    seed: u64,
    index: u64,
) -> PyResult<PyTrajectory> {
    schedule.0.validate(&config.0.wall, n, n).map_err(err)?;
    py.detach(|| lorentz_core::run_trajectory(&mut stream(seed, index), &config.0, &schedule.0, n))
        .map(Into::into)
        .map_err(err)
}

/// `(S_n, position_n, L_n)` for `samples` trajectories, in parallel.
#[pyfunction]
fn run_endpoints(
    py: Python<'_>,
    config: &PyLorentzConfig,
    schedule: &PyHoleSchedule,
    n: usize,
    samples: usize,
    seed: u64,
) -> PyResult<Vec<(f64, f64, u32)>> {
    schedule.0.validate(&config.0.wall, n, n).map_err(err)?;
    py.detach(|| {
        run_ensemble(&config.0, &schedule.0, n, samples, seed, |_, r| {
            (r.s[n], r.position[n], r.l[n])
        })
    })
    .map_err(err)
}

/// Random walk from +-1 that crosses 0 with probability `eps_k` given by
/// `schedule` (shrinking or double-array regime).
#[pyfunction]
#[pyo3(signature = (schedule, n, seed, index = 0))]
fn run_walk(
    py: Python<'_>,
    schedule: &PyHoleSchedule,
    n: usize,
    seed: u64,
    index: u64,
) -> PyResult<PyTrajectory> {
    let regime = match schedule.0.regime {
        Regime::Shrinking => WalkRegime::Shrinking,
        Regime::DoubleArray => WalkRegime::DoubleArray,
        Regime::NoWall => return Err(PyValueError::new_err("the walk needs a wall regime")),
    };
    let cfg = lorentz_core::WalkConfig::new(regime, schedule.0.alpha, n).map_err(err)?;
    py.detach(|| lorentz_core::run_walk(&mut stream(seed, index), &cfg))
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn chain_plus_probability(p: Vec<f64>) -> f64 {
    lorentz_core::chain_plus_probability(&p)
}

/// `(distance, bound)` between the Poisson-binomial law of `p` and Poisson(sum p).
#[pyfunction]
fn le_cam_bound(p: Vec<f64>) -> PyResult<(f64, f64)> {
    lorentz_core::le_cam_bound(&p).map_err(err)
}

#[pyfunction]
fn bridge_local_time_tail(a: f64, b: f64, t0: f64, t1: f64, sigma: f64, y: f64) -> PyResult<f64> {
    lorentz_core::bridge_local_time_tail(a, b, t0, t1, sigma, y).map_err(err)
}

#[pyfunction]
fn gaussian_marginal_cdf(t: f64, sigma: f64, x: f64) -> f64 {
    lorentz_core::gaussian_marginal_cdf(t, sigma, x)
}

/// `(times, values)` of a qRBM(c, sigma) path.
#[pyfunction]
#[pyo3(signature = (n_grid, c, sigma, seed, index = 0))]
fn sample_qrbm(
    py: Python<'_>,
    n_grid: usize,
    c: f64,
    sigma: f64,
    seed: u64,
    index: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = py
        .detach(|| lorentz_core::sample_qrbm(&mut stream(seed, index), n_grid, c, sigma))
        .map_err(err)?;
    Ok((p.grid().to_vec(), p.values().to_vec()))
}

/// `(times, values)` of a QRBM(c, sigma) path truncated at `t0`
/// (default `1 / sqrt(n_grid)`).
#[pyfunction]
#[pyo3(signature = (n_grid, c, sigma, seed, index = 0, t0 = None))]
fn sample_big_qrbm(
    py: Python<'_>,
    n_grid: usize,
    c: f64,
    sigma: f64,
    seed: u64,
    index: u64,
    t0: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let t0 = t0.unwrap_or_else(|| default_truncation(n_grid));
    let p = py
        .detach(|| lorentz_core::sample_big_qrbm(&mut stream(seed, index), n_grid, c, sigma, t0))
        .map_err(err)?;
    Ok((p.grid().to_vec(), p.values().to_vec()))
}

/// `(times, local_time)` of Brownian local time at 0 from the lattice backbone.
#[pyfunction]
#[pyo3(signature = (n_grid, sigma, seed, index = 0))]
fn sample_local_time(
    py: Python<'_>,
    n_grid: usize,
    sigma: f64,
    seed: u64,
    index: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let b = py
        .detach(|| lorentz_core::sample_bm_with_local_time(&mut stream(seed, index), n_grid, sigma))
        .map_err(err)?;
    Ok((b.local_time.grid().to_vec(), b.local_time.values().to_vec()))
}

#[pyclass(name = "TestReport", module = "lorentz_wall", frozen, get_all)]
struct PyTestReport {
    name: String,
    statistic: f64,
    threshold: f64,
    p_value: Option<f64>,
    passed: bool,
    value: f64,
    detail: String,
}

impl From<stats::TestReport> for PyTestReport {
    fn from(r: stats::TestReport) -> Self {
        Self {
            name: r.name,
            statistic: r.statistic,
            threshold: r.threshold,
            p_value: r.p_value,
            passed: r.pass,
            value: r.value,
            detail: r.detail,
        }
    }
}

#[pymethods]
impl PyTestReport {
    fn __repr__(&self) -> String {
        format!(
            "TestReport({:?}, statistic={}, threshold={}, passed={})",
            self.name, self.statistic, self.threshold, self.passed
        )
    }
}

/// One-sample KS test against a Python callable `cdf`.
#[pyfunction]
#[pyo3(signature = (data, cdf, threshold, name = "ks"))]
fn ks_one_sample(
    data: Vec<f64>,
    cdf: Bound<'_, PyAny>,
    threshold: f64,
    name: &str,
) -> PyResult<PyTestReport> {
    let failure = std::cell::RefCell::new(None);
    let f = |x: f64| match cdf.call1((x,)).and_then(|v| v.extract::<f64>()) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let report = stats::ks_one_sample(name, &data, &f, threshold).map_err(err)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(report.into())
}

#[pyfunction]
#[pyo3(signature = (a, b, threshold, name = "ks2"))]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>, threshold: f64, name: &str) -> PyResult<PyTestReport> {
    stats::ks_two_sample(name, &a, &b, threshold)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn estimate_sigma(s_n: Vec<f64>, n: usize) -> PyResult<f64> {
    stats::estimate_sigma(&s_n, n).map_err(err)
}

#[pyfunction]
fn estimate_c0(l_n: Vec<f64>, n: usize, sigma: f64) -> PyResult<f64> {
    stats::estimate_c0(&l_n, n, sigma).map_err(err)
}

/// Full acceptance suite on the reference billiard; `smoke` shrinks the
/// sample sizes (thresholds are then not meaningful).
#[pyfunction]
#[pyo3(signature = (smoke = false, seed = None))]
fn run_acceptance(py: Python<'_>, smoke: bool, seed: Option<u64>) -> PyResult<Vec<PyTestReport>> {
    let mut cfg = if smoke {
        AcceptanceConfig::smoke()
    } else {
        AcceptanceConfig::default()
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let reports = py
        .detach(|| run_all(&cfg, &lorentz_core::LorentzConfig::reference()))
        .map_err(err)?;
    Ok(reports.into_iter().map(Into::into).collect())
}

#[pymodule]
pub fn lorentz_wall(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyLorentzConfig>()?;
    m.add_class::<PyHoleSchedule>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyTestReport>()?;
    m.add_function(wrap_pyfunction!(reflect, m)?)?;
    m.add_function(wrap_pyfunction!(run_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(run_endpoints, m)?)?;
    m.add_function(wrap_pyfunction!(run_walk, m)?)?;
    m.add_function(wrap_pyfunction!(chain_plus_probability, m)?)?;
    m.add_function(wrap_pyfunction!(le_cam_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bridge_local_time_tail, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_marginal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(sample_qrbm, m)?)?;
    m.add_function(wrap_pyfunction!(sample_big_qrbm, m)?)?;
    m.add_function(wrap_pyfunction!(sample_local_time, m)?)?;
    m.add_function(wrap_pyfunction!(ks_one_sample, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_c0, m)?)?;
    m.add_function(wrap_pyfunction!(run_acceptance, m)?)?;
    m.add(
        "REFERENCE_MAX_FREE_PATH",
        lorentz_core::sim::REFERENCE_MAX_FREE_PATH,
    )?;
    Ok(())
}
