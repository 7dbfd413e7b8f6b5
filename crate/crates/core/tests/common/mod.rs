#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nmisc::constants::CODATA;
use nmisc::device::{build_default_device, DeviceSpec, LayerRole};
use nmisc::electrostatics::{assemble_system, ChargeState, PoissonSolver, SolverOptions};
use nmisc::mesh::{generate_mesh, Mesh, NodeKind, RefinementSpec};

/// Gate covering the whole mesa, no doping: a one-dimensional capacitor
/// between the substrate top (z = 1000 nm) and the gate plane (z = 1360 nm).
pub fn planar_device(radius_nm: f64) -> DeviceSpec {
    let mut d = build_default_device();
    d.mesa_radius_nm = radius_nm;
    d.gate.radius_nm = radius_nm;
    d.acceptor_sheet_density_cm2 = 0.0;
    d
}

/// Uniform spacing `h` everywhere.
pub fn uniform(h: f64) -> RefinementSpec {
    RefinementSpec {
        min_spacing_nm: h,
        growth_ratio: 1.0,
        max_spacing_nm: h,
        ..RefinementSpec::default()
    }
}

pub fn coarse() -> RefinementSpec {
    RefinementSpec {
        min_spacing_nm: 2.5,
        growth_ratio: 1.3,
        max_spacing_nm: 40.0,
        ..RefinementSpec::default()
    }
}

pub fn mesh(device: &DeviceSpec, refinement: &RefinementSpec) -> Arc<Mesh> {
    Arc::new(generate_mesh(device, refinement).unwrap())
}

pub fn default_solver() -> PoissonSolver {
    let d = build_default_device();
    PoissonSolver::new(
        mesh(&d, &RefinementSpec::default()),
        SolverOptions::default(),
    )
    .unwrap()
}

pub fn solver_for(device: &DeviceSpec, refinement: &RefinementSpec) -> PoissonSolver {
    PoissonSolver::new(mesh(device, refinement), SolverOptions::default()).unwrap()
}

/// Layer thicknesses between the substrate top and the gate plane with their
/// permittivities, bottom to top.
pub fn stack(device: &DeviceSpec) -> Vec<(f64, f64)> {
    [
        LayerRole::Buffer,
        LayerRole::QuantumWell,
        LayerRole::GateDielectric,
    ]
    .into_iter()
    .map(|r| {
        (
            device.layer(r).thickness_nm,
            device.material(r).dielectric_constant,
        )
    })
    .collect()
}

/// Exact potential of the charge-free layered capacitor at height `z`.
pub fn capacitor_potential(device: &DeviceSpec, bias: f64, z: f64) -> f64 {
    let z0 = device.layer(LayerRole::Substrate).thickness_nm;
    let layers = stack(device);
    let d = bias / layers.iter().map(|(t, e)| t / e).sum::<f64>();
    let mut v = 0.0;
    let mut bottom = z0;
    for (t, eps) in layers {
        let top = bottom + t;
        if z <= top {
            return v + d * (z - bottom).max(0.0) / eps;
        }
        v += d * t / eps;
        bottom = top;
    }
    bias
}

/// Largest deviation from the exact charge-free capacitor, relative to the
/// bias, on a uniform mesh of spacing `h`.
pub fn max_rel_error(device: &DeviceSpec, h: f64, bias: f64) -> f64 {
    let m = mesh(device, &uniform(h));
    let v = assemble_system(&m, bias, &ChargeState::neutral(&m))
        .unwrap()
        .solve()
        .unwrap();
    let mut worst: f64 = 0.0;
    for (n, vn) in v.iter().enumerate() {
        let (i, j) = m.node_coords(n);
        if m.node_kind(i, j) == NodeKind::Free {
            let exact = capacitor_potential(device, bias, m.axial_nodes[j]);
            worst = worst.max((vn - exact).abs() / bias.abs());
        }
    }
    worst
}

/// Sinusoidal charge in the semiconductor between the plates; the exact
/// solution adds a sine of amplitude `K a / (ε k²)` to the linear profile.
pub fn manufactured_error(h: f64) -> f64 {
    let d = planar_device(10.0);
    let m = mesh(&d, &uniform(h));
    let z0 = d.layer(LayerRole::Substrate).thickness_nm;
    let length = stack(&d).iter().map(|l| l.0).sum::<f64>();
    let k = PI / length;
    let eps = 14.0;
    let amplitude_v = 0.1;
    let a = amplitude_v * eps * k * k / CODATA.charge_to_flux(); // e/nm³
    let mut charge = ChargeState::neutral(&m);
    for n in 0..m.node_count() {
        let (_, j) = m.node_coords(n);
        let z = m.axial_nodes[j];
        if z > z0 && z < z0 + length {
            charge.net_volume_charge[n] =
                a * (k * (z - z0)).sin() * CODATA.elementary_charge * 1e27;
        }
    }
    let bias = 0.3;
    let v = assemble_system(&m, bias, &charge).unwrap().solve().unwrap();
    let mut worst: f64 = 0.0;
    for (n, vn) in v.iter().enumerate() {
        let (i, j) = m.node_coords(n);
        if m.node_kind(i, j) == NodeKind::Free && i == 0 {
            let z = m.axial_nodes[j] - z0;
            let exact = bias * z / length + amplitude_v * (k * z).sin();
            worst = worst.max((vn - exact).abs());
        }
    }
    worst
}
