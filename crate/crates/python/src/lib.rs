//! Python bindings for the `nmisc` simulator.
//!
//! Devices, solvers, potential fields and dot spectra are wrapped as classes;
//! records without behaviour (cycle statistics, level ladders, transition
//! tables, reports) come back as plain dictionaries.

use std::path::PathBuf;
use std::sync::Arc;

use nmisc::config::RunConfig;
use nmisc::cycle::{self, DEFAULT_SEED};
use nmisc::device::{self, DeviceFile, DeviceSpec};
use nmisc::electrostatics::{bias_sweep, write_band_profile_csv, PoissonSolver, SolverOptions};
use nmisc::mesh::{generate_mesh, RefinementSpec};
use nmisc::qdot::{self, DotSpectrum, SEARCH_TOLERANCE_MEV};
use nmisc::zeeman::{self, ZeemanConfig};
use nmisc::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Contract(_) | Error::InvalidDevice(_) | Error::TomlDe(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for nmisc::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Serializes through JSON into native Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Layered heterostructure with a circular top gate.
#[pyclass(name = "Device", module = "nmisc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDevice {
    spec: DeviceSpec,
    mesh: Option<RefinementSpec>,
}

#[pymethods]
impl PyDevice {
    /// The bundled reference device.
    #[new]
    fn new() -> Self {
        Self {
            spec: device::build_default_device(),
            mesh: None,
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let f = DeviceFile::from_toml_str(text).py()?;
        Ok(Self {
            spec: f.device,
            mesh: f.mesh,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let f = DeviceFile::load(path).py()?;
        Ok(Self {
            spec: f.device,
            mesh: f.mesh,
        })
    }

    fn with_gate_radius(&self, radius_nm: f64) -> PyResult<Self> {
        let spec = self.spec.clone().with_gate_radius(radius_nm);
        spec.validate().py()?;
        Ok(Self {
            spec,
            mesh: self.mesh.clone(),
        })
    }

    #[getter]
    fn gate_radius_nm(&self) -> f64 {
        self.spec.gate.radius_nm
    }

    #[getter]
    fn mesa_radius_nm(&self) -> f64 {
        self.spec.mesa_radius_nm
    }

    #[getter]
    fn acceptor_sheet_density_cm2(&self) -> f64 {
        self.spec.acceptor_sheet_density_cm2
    }

    fn hole_fermi_energy_mev(&self) -> f64 {
        self.spec.hole_fermi_energy_mev()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.spec)
    }

    fn __repr__(&self) -> String {
        format!(
            "Device(gate_radius_nm={}, mesa_radius_nm={:.3})",
            self.spec.gate.radius_nm, self.spec.mesa_radius_nm
        )
    }
}

/// Nonlinear Poisson solver on a fixed mesh.
#[pyclass(name = "Solver", module = "nmisc", frozen)]
struct PySolver {
    inner: Arc<PoissonSolver>,
}

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (device=None, min_spacing_nm=None, tolerance=None, max_iterations=None))]
    fn new(
        device: Option<PyRef<'_, PyDevice>>,
        min_spacing_nm: Option<f64>,
        tolerance: Option<f64>,
        max_iterations: Option<usize>,
    ) -> PyResult<Self> {
        let d = device.map_or_else(PyDevice::new, |d| d.clone());
        let mut refine = d.mesh.clone().unwrap_or_default();
        if let Some(h) = min_spacing_nm {
            refine = refine.with_min_spacing(h);
        }
        refine.validate().py()?;
        let mesh = generate_mesh(&d.spec, &refine).py()?;
        let mut options = SolverOptions::default();
        if let Some(t) = tolerance {
            options.tolerance = t;
        }
        if let Some(n) = max_iterations {
            options.max_iterations = n;
        }
        let inner = PoissonSolver::new(Arc::new(mesh), options).py()?;
        Ok(Self {
            inner: Arc::new(inner),
        })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.mesh().node_count()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.mesh().nr(), self.inner.mesh().nz())
    }

    #[pyo3(signature = (vgate, initial=None))]
    fn solve(
        &self,
        py: Python<'_>,
        vgate: f64,
        initial: Option<PyRef<'_, PyField>>,
    ) -> PyResult<PyField> {
        let guess = initial.map(|f| f.inner.clone());
        let field = py
            .detach(|| self.inner.solve(vgate, guess.as_deref()))
            .py()?;
        Ok(PyField {
            inner: Arc::new(field),
        })
    }

    fn sweep(&self, py: Python<'_>, biases: Vec<f64>) -> PyResult<Vec<PyField>> {
        let fields = py.detach(|| bias_sweep(&self.inner, &biases)).py()?;
        Ok(fields
            .into_iter()
            .map(|f| PyField { inner: Arc::new(f) })
            .collect())
    }

    /// Bias at which the dot bottom reaches the Fermi level.
    #[pyo3(signature = (lo=1.5, hi=3.5, tolerance_mev=SEARCH_TOLERANCE_MEV))]
    fn find_alignment_bias(
        &self,
        py: Python<'_>,
        lo: f64,
        hi: f64,
        tolerance_mev: f64,
    ) -> PyResult<(f64, PyField)> {
        let s = py
            .detach(|| qdot::find_alignment_bias(&self.inner, (lo, hi), tolerance_mev))
            .py()?;
        Ok((
            s.bias,
            PyField {
                inner: Arc::new(s.field),
            },
        ))
    }

    /// Bias at which the lowest confined level reaches the Fermi level.
    #[pyo3(signature = (lo=1.5, hi=3.5, tolerance_mev=SEARCH_TOLERANCE_MEV))]
    fn find_onset_bias(
        &self,
        py: Python<'_>,
        lo: f64,
        hi: f64,
        tolerance_mev: f64,
    ) -> PyResult<(f64, PyField)> {
        let s = py
            .detach(|| qdot::find_onset_bias(&self.inner, (lo, hi), tolerance_mev))
            .py()?;
        Ok((
            s.bias,
            PyField {
                inner: Arc::new(s.field),
            },
        ))
    }
}

/// Converged (or not) electrostatic solution at one gate bias.
#[pyclass(name = "Field", module = "nmisc", frozen)]
struct PyField {
    inner: Arc<nmisc::electrostatics::PotentialField>,
}

#[pymethods]
impl PyField {
    #[getter]
    fn gate_bias(&self) -> f64 {
        self.inner.gate_bias
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn newton_iterations(&self) -> usize {
        self.inner.newton_iterations
    }

    #[getter]
    fn residual_norm(&self) -> f64 {
        self.inner.residual_norm
    }

    #[getter]
    fn min_conduction_edge_mev(&self) -> f64 {
        self.inner.min_conduction_edge_mev()
    }

    #[getter]
    fn electron_count(&self) -> f64 {
        self.inner.electron_count()
    }

    #[getter]
    fn potential(&self) -> Vec<f64> {
        self.inner.potential.clone()
    }

    /// (r in nm, E_c − E_F in meV) along the well midplane.
    fn midplane_profile(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = qdot::extract_profile(&self.inner).py()?;
        Ok((p.radii, p.well_conduction_edge))
    }

    fn gauss_balance<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.gauss_balance())
    }

    #[pyo3(signature = (max_shell=3))]
    fn spectrum(&self, max_shell: usize) -> PyResult<PySpectrum> {
        Ok(PySpectrum {
            inner: DotSpectrum::from_field(&self.inner, max_shell).py()?,
        })
    }

    fn band_profile_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_band_profile_csv(&self.inner, &mut buf).py()?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(gate_bias={}, converged={}, min_conduction_edge_mev={:.4})",
            self.inner.gate_bias,
            self.inner.converged,
            self.inner.min_conduction_edge_mev()
        )
    }
}

/// Parabolic fit and derived single-particle quantities at one bias.
#[pyclass(name = "Spectrum", module = "nmisc", frozen)]
struct PySpectrum {
    inner: DotSpectrum,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn bias(&self) -> f64 {
        self.inner.bias
    }

    #[getter]
    fn hbar_omega0(&self) -> f64 {
        self.inner.hbar_omega0
    }

    #[getter]
    fn curvature(&self) -> f64 {
        self.inner.curvature
    }

    #[getter]
    fn fit_residual(&self) -> f64 {
        self.inner.fit_residual
    }

    #[getter]
    fn fit_window_radius(&self) -> f64 {
        self.inner.fit_window_radius
    }

    #[getter]
    fn confinement_length(&self) -> f64 {
        self.inner.confinement_length_l0
    }

    /// (interaction integral, disk self-capacitance) estimates in meV.
    #[getter]
    fn charging_energy(&self) -> (f64, f64) {
        let c = self.inner.charging_energy;
        (c.interaction_integral, c.disk_self_capacitance)
    }

    #[getter]
    fn ground_state_energy(&self) -> f64 {
        self.inner.ground_state_energy_absolute
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }
}

/// Load, ramp and reset timings with tunnelling and recombination times, ns.
#[pyclass(name = "PulseProtocol", module = "nmisc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProtocol {
    inner: cycle::PulseProtocol,
}

#[pymethods]
impl PyProtocol {
    #[new]
    #[pyo3(signature = (
        t1_ns=10.0, t2_ns=0.1, t3_ns=10.0, tau_tunnel_ns=1.0, tau_rad_ns=1.0,
        tau_nonrad_ns=f64::INFINITY, early_emission_enabled=false, early_emission_scale=0.0
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        t1_ns: f64,
        t2_ns: f64,
        t3_ns: f64,
        tau_tunnel_ns: f64,
        tau_rad_ns: f64,
        tau_nonrad_ns: f64,
        early_emission_enabled: bool,
        early_emission_scale: f64,
    ) -> PyResult<Self> {
        let inner = cycle::PulseProtocol {
            t1_ns,
            t2_ns,
            t3_ns,
            tau_tunnel_ns,
            tau_rad_ns,
            tau_nonrad_ns,
            early_emission_enabled,
            early_emission_scale,
        };
        inner.validate().py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn period_ns(&self) -> f64 {
        self.inner.period_ns()
    }

    /// MHz.
    fn repetition_rate(&self) -> f64 {
        cycle::repetition_rate(&self.inner)
    }

    fn analytic_efficiency(&self) -> f64 {
        cycle::analytic_efficiency(&self.inner)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }
}

fn default_protocol(p: Option<PyRef<'_, PyProtocol>>) -> cycle::PulseProtocol {
    p.map(|p| p.inner.clone()).unwrap_or_default()
}

/// Monte Carlo statistics for `pulses` cycles as a dictionary.
#[pyfunction]
#[pyo3(signature = (protocol=None, pulses=100_000, seed=DEFAULT_SEED))]
fn run_monte_carlo<'py>(
    py: Python<'py>,
    protocol: Option<PyRef<'py, PyProtocol>>,
    pulses: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = default_protocol(protocol);
    let stats = py
        .detach(|| cycle::run_monte_carlo(&p, pulses, seed))
        .py()?;
    to_py(py, &stats)
}

#[pyfunction]
fn conversion_ratio(tau_rad_ns: f64, tau_nonrad_ns: f64) -> f64 {
    cycle::conversion_ratio(tau_rad_ns, tau_nonrad_ns)
}

/// Hole Fermi energy in meV for a 2D gas at zero temperature.
#[pyfunction]
#[pyo3(signature = (sheet_density_cm2=1e11, hole_mass_m0=0.38))]
fn hole_fermi_energy(sheet_density_cm2: f64, hole_mass_m0: f64) -> f64 {
    device::hole_fermi_energy(sheet_density_cm2, hole_mass_m0)
}

#[pyfunction]
fn hbar_omega_from_curvature(curvature: f64, mass_m0: f64) -> f64 {
    qdot::hbar_omega_from_curvature(curvature, mass_m0)
}

/// Shells up to `max_shell` as dictionaries.
#[pyfunction]
fn fock_darwin_levels<'py>(
    py: Python<'py>,
    hbar_omega0: f64,
    max_shell: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &qdot::fock_darwin_levels(hbar_omega0, max_shell).py()?)
}

/// Gate bias change per unit of dot energy change, from (bias V, energy meV)
/// points.
#[pyfunction]
fn lever_arm(points: Vec<(f64, f64)>) -> PyResult<f64> {
    qdot::lever_arm(&points).py()
}

fn zeeman_config(b_field_z: f64, g_electron: f64, g_hole: f64) -> PyResult<ZeemanConfig> {
    let cfg = ZeemanConfig {
        b_field_z,
        g_electron,
        g_hole,
        ..ZeemanConfig::default()
    };
    cfg.validate().py()?;
    Ok(cfg)
}

/// Electron spin splitting in meV.
#[pyfunction]
#[pyo3(signature = (b_field_z=5.0, g_electron=-3.0))]
fn electron_splitting(b_field_z: f64, g_electron: f64) -> PyResult<f64> {
    let cfg = zeeman_config(b_field_z, g_electron, zeeman::PLACEHOLDER_HOLE_G)?;
    zeeman::electron_splitting(&cfg).py()
}

/// "sigma_minus", "sigma_plus" or "forbidden".
#[pyfunction]
fn transition_polarization<'py>(
    py: Python<'py>,
    electron_sz: f64,
    hole_sz: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &zeeman::transition_polarization(electron_sz, hole_sz).py()?,
    )
}

#[pyfunction]
fn apply_pi_pulse(electron_sz: f64) -> PyResult<f64> {
    zeeman::apply_pi_pulse(electron_sz).py()
}

/// All four spin combinations with polarization and energy shift.
#[pyfunction]
#[pyo3(signature = (b_field_z=5.0, g_electron=-3.0, g_hole=zeeman::PLACEHOLDER_HOLE_G))]
fn transition_table<'py>(
    py: Python<'py>,
    b_field_z: f64,
    g_electron: f64,
    g_hole: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = zeeman_config(b_field_z, g_electron, g_hole)?;
    to_py(py, &zeeman::transition_table(&cfg).py()?)
}

/// Full dot characterization as the report dictionary. Uses the run
/// configuration at `config` or the built-in defaults.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn characterize<'py>(py: Python<'py>, config: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = match config {
        Some(path) => RunConfig::load(&path).py()?,
        None => RunConfig::default(),
    };
    let (report, _) = py.detach(|| nmisc::cli::characterize(&cfg)).py()?;
    let text = nmisc::report::to_json(&report).py()?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Adds every class and function to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDevice>()?;
    m.add_class::<PySolver>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyProtocol>()?;
    m.add_function(wrap_pyfunction!(run_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(conversion_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(hole_fermi_energy, m)?)?;
    m.add_function(wrap_pyfunction!(hbar_omega_from_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(fock_darwin_levels, m)?)?;
    m.add_function(wrap_pyfunction!(lever_arm, m)?)?;
    m.add_function(wrap_pyfunction!(electron_splitting, m)?)?;
    m.add_function(wrap_pyfunction!(transition_polarization, m)?)?;
    m.add_function(wrap_pyfunction!(apply_pi_pulse, m)?)?;
    m.add_function(wrap_pyfunction!(transition_table, m)?)?;
    m.add_function(wrap_pyfunction!(characterize, m)?)?;
    m.add("DEFAULT_SEED", DEFAULT_SEED)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[pymodule]
#[pyo3(name = "nmisc")]
fn nmisc_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
