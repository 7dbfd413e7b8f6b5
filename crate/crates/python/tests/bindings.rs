use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyModule>)>(f: F) {
    Python::attach(|py| {
        let m = PyModule::new(py, "nmisc").unwrap();
        nmisc_py::register(&m).unwrap();
        f(py, &m);
    });
}

#[test]
fn scalar_functions() {
    with_module(|_, m| {
        let ef: f64 = m
            .getattr("hole_fermi_energy")
            .unwrap()
            .call0()
            .unwrap()
            .extract()
            .unwrap();
        assert!((ef - 0.630).abs() < 0.003);
        let s: f64 = m
            .getattr("electron_splitting")
            .unwrap()
            .call0()
            .unwrap()
            .extract()
            .unwrap();
        assert!((s - 0.868).abs() < 0.003);
        let flip: f64 = m
            .getattr("apply_pi_pulse")
            .unwrap()
            .call1((0.5,))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(flip, -0.5);
        let pol: String = m
            .getattr("transition_polarization")
            .unwrap()
            .call1((0.5, 1.5))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(pol, "sigma_minus");
    });
}

#[test]
fn records_are_dictionaries() {
    with_module(|_, m| {
        let shells = m
            .getattr("fock_darwin_levels")
            .unwrap()
            .call1((12.5, 3))
            .unwrap();
        let shells = shells.cast::<PyList>().unwrap();
        assert_eq!(shells.len(), 3);
        let third = shells.get_item(2).unwrap();
        let deg: usize = third
            .get_item("orbital_degeneracy")
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(deg, 3);

        let stats = m
            .getattr("run_monte_carlo")
            .unwrap()
            .call1((None::<i32>, 2000, 7))
            .unwrap();
        let stats = stats.cast::<PyDict>().unwrap();
        let p_multi: f64 = stats
            .get_item("p_multi")
            .unwrap()
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(p_multi, 0.0);
        let pulses: u64 = stats
            .get_item("pulses")
            .unwrap()
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(pulses, 2000);
    });
}

#[test]
fn protocol_validation_raises_value_error() {
    with_module(|py, m| {
        let cls = m.getattr("PulseProtocol").unwrap();
        let p = cls.call0().unwrap();
        let rate: f64 = p
            .call_method0("repetition_rate")
            .unwrap()
            .extract()
            .unwrap();
        assert!((rate - 1e3 / 20.1).abs() < 1e-12);
        let kwargs = PyDict::new(py);
        kwargs.set_item("t1_ns", -1.0).unwrap();
        let err = cls.call((), Some(&kwargs)).unwrap_err();
        assert!(err.is_instance_of::<PyValueError>(py));
    });
}

#[test]
fn solver_round_trip() {
    with_module(|py, m| {
        let device = m.getattr("Device").unwrap().call0().unwrap();
        let kwargs = PyDict::new(py);
        kwargs.set_item("device", &device).unwrap();
        kwargs.set_item("min_spacing_nm", 2.5).unwrap();
        let solver = m
            .getattr("Solver")
            .unwrap()
            .call((), Some(&kwargs))
            .unwrap();
        let (bias, field): (f64, Bound<'_, PyAny>) = solver
            .call_method0("find_alignment_bias")
            .unwrap()
            .extract()
            .unwrap();
        assert!((1.5..=3.5).contains(&bias));
        let converged: bool = field.getattr("converged").unwrap().extract().unwrap();
        assert!(converged);
        let spectrum = field.call_method0("spectrum").unwrap();
        let hw: f64 = spectrum.getattr("hbar_omega0").unwrap().extract().unwrap();
        assert!(hw > 0.0);

        let opts = PyDict::new(py);
        opts.set_item("max_iterations", 1).unwrap();
        let tight = m.getattr("Solver").unwrap().call((), Some(&opts)).unwrap();
        let raw = tight.call_method1("solve", (2.8,)).unwrap();
        let err = raw.call_method0("spectrum").unwrap_err();
        assert!(err.is_instance_of::<PyRuntimeError>(py));
    });
}
