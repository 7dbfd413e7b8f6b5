use crate::constants::{CM2_TO_NM2, CODATA};
use crate::device::{DeviceSpec, LayerRole};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

use super::operator::FvOperator;

/// Free-carrier and fixed charge in the quantum well.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeState {
    /// Per radial node column, cm⁻².
    pub electron_sheet_density: Vec<f64>,
    /// Per radial node column, cm⁻².
    pub hole_sheet_density: Vec<f64>,
    /// cm⁻², fixed at the doping level.
    pub ionized_acceptor_density: f64,
    /// Control-volume averaged net charge density per node, C/m³.
    pub net_volume_charge: Vec<f64>,
}

impl ChargeState {
    /// No charge anywhere on `mesh`.
    pub fn neutral(mesh: &Mesh) -> Self {
        Self {
            electron_sheet_density: vec![0.0; mesh.nr()],
            hole_sheet_density: vec![0.0; mesh.nr()],
            ionized_acceptor_density: 0.0,
            net_volume_charge: vec![0.0; mesh.node_count()],
        }
    }
}

/// Electron sheet density (cm⁻²) of a degenerate 2D gas whose band edge lies
/// `ec_minus_ef_ev` above the Fermi level.
pub fn electron_sheet_density(ec_minus_ef_ev: f64, electron_mass: f64) -> f64 {
    CODATA.dos_2d(electron_mass) * (-ec_minus_ef_ev).max(0.0) / CM2_TO_NM2
}

/// Hole sheet density (cm⁻²) for a valence edge `ev_minus_ef_ev` above E_F.
pub fn hole_sheet_density(ev_minus_ef_ev: f64, hole_mass: f64) -> f64 {
    CODATA.dos_2d(hole_mass) * ev_minus_ef_ev.max(0.0) / CM2_TO_NM2
}

/// Zero-temperature occupation of the well, optionally smoothed.
///
/// With `width > 0` the kink of `max(0, x)` is replaced by the C¹ quadratic
/// `(x + w/2)² / 2w` on `|x| < w/2`; outside that band the result is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellStatistics {
    /// E_c − E_F at V = 0, eV.
    pub conduction_edge0_ev: f64,
    pub bandgap_ev: f64,
    /// Electron 2D DOS divided by well thickness, nm⁻³·eV⁻¹.
    pub electron_dos_volume: f64,
    pub hole_dos_volume: f64,
    /// Ionized acceptors per nm³.
    pub acceptor_volume_density: f64,
    pub width_ev: f64,
}

/// `max(0, x)` and its derivative, rounded quadratically for `|x| < w/2`.
fn smooth_positive(x: f64, w: f64) -> (f64, f64) {
    if x >= 0.5 * w {
        (x, 1.0)
    } else if x <= -0.5 * w {
        (0.0, 0.0)
    } else {
        let s = x + 0.5 * w;
        (s * s / (2.0 * w), s / w)
    }
}

impl WellStatistics {
    pub fn new(device: &DeviceSpec, width_ev: f64) -> Self {
        let well = device.well_material();
        let t = device.well_thickness_nm();
        Self {
            conduction_edge0_ev: well.conduction_band_offset_ev + device.fermi_shift_ev(),
            bandgap_ev: well.bandgap_ev,
            electron_dos_volume: CODATA.dos_2d(well.electron_mass) / t,
            hole_dos_volume: CODATA.dos_2d(well.heavy_hole_mass) / t,
            acceptor_volume_density: device.acceptor_sheet_density_cm2 * CM2_TO_NM2 / t,
            width_ev,
        }
    }

    /// Net charge density (e/nm³) at potential `v` and its derivative in V.
    pub fn charge(&self, v: f64) -> (f64, f64) {
        let ec = self.conduction_edge0_ev - v;
        let ev = ec - self.bandgap_ev;
        let (p, dp) = smooth_positive(ev, self.width_ev);
        let (n, dn) = smooth_positive(-ec, self.width_ev);
        let q =
            self.hole_dos_volume * p - self.electron_dos_volume * n - self.acceptor_volume_density;
        let dq = -self.hole_dos_volume * dp - self.electron_dos_volume * dn;
        (q, dq)
    }
}

/// Zero-temperature Thomas–Fermi charge for given nodal band edges (eV,
/// relative to E_F = 0). Entries outside the well are ignored.
pub fn charge_density(
    mesh: &Mesh,
    conduction_edge: &[f64],
    valence_edge: &[f64],
) -> Result<ChargeState> {
    let op = FvOperator::new(mesh);
    charge_density_with(mesh, &op, conduction_edge, valence_edge)
}

pub(crate) fn charge_density_with(
    mesh: &Mesh,
    op: &FvOperator,
    conduction_edge: &[f64],
    valence_edge: &[f64],
) -> Result<ChargeState> {
    let n_nodes = mesh.node_count();
    if conduction_edge.len() != n_nodes || valence_edge.len() != n_nodes {
        return Err(Error::Contract(format!(
            "band edges have {} / {} entries, mesh has {n_nodes} nodes",
            conduction_edge.len(),
            valence_edge.len()
        )));
    }
    let device = &mesh.device;
    let well = device.well_material();
    let t = device.well_thickness_nm();
    let na = device.acceptor_sheet_density_cm2;
    let mut state = ChargeState::neutral(mesh);
    state.ionized_acceptor_density = na;
    let z = &mesh.axial_nodes;
    let (jb, jt) = (mesh.well_bottom_plane, mesh.well_top_plane);
    for j in jb..=jt {
        // axial extent of this node's control volume inside the well
        let below = if j > jb { 0.5 * (z[j] - z[j - 1]) } else { 0.0 };
        let above = if j < jt { 0.5 * (z[j + 1] - z[j]) } else { 0.0 };
        let weight = (below + above) / t;
        for i in 0..mesh.nr() {
            let n = mesh.node_index(i, j);
            debug_assert_eq!(mesh.node_layer(i, j), Some(LayerRole::QuantumWell));
            let (ec, ev) = (conduction_edge[n], valence_edge[n]);
            if !ec.is_finite() || !ev.is_finite() {
                return Err(Error::Contract(format!(
                    "band edge missing at well node ({i}, {j})"
                )));
            }
            let ne = electron_sheet_density(ec, well.electron_mass);
            let p = hole_sheet_density(ev, well.heavy_hole_mass);
            state.electron_sheet_density[i] += ne * weight;
            state.hole_sheet_density[i] += p * weight;
            if op.volume[n] > 0.0 {
                // e/nm³ -> C/m³
                let rho = (p - ne - na) * CM2_TO_NM2 / t * CODATA.elementary_charge * 1e27;
                state.net_volume_charge[n] = rho * op.well_volume[n] / op.volume[n];
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn electron_density_five_mev_below_fermi() {
        // m/(πħ²)·5 meV with m = 0.045 m0, evaluated directly from SI values
        let m = 0.045 * 9.109_383_701_5e-31;
        let hbar = 1.054_571_817e-34;
        let expected_m2 = m / (std::f64::consts::PI * hbar * hbar) * 5e-3 * 1.602_176_634e-19;
        let expected_cm2 = expected_m2 * 1e-4;
        let n = electron_sheet_density(-5e-3, 0.045);
        assert_relative_eq!(n, expected_cm2, max_relative = 1e-12);
        assert!((n - 9.4e10).abs() / 9.4e10 < 0.01, "{n}");
    }

    #[test]
    fn band_edge_touching_fermi_level_is_empty() {
        assert_eq!(hole_sheet_density(0.0, 0.38), 0.0);
        assert_eq!(electron_sheet_density(0.0, 0.045), 0.0);
    }

    #[test]
    fn hole_density_inverts_fermi_energy() {
        let p = hole_sheet_density(0.63e-3, 0.38);
        assert!((p - 1.0e11).abs() / 1.0e11 < 0.005, "{p}");
    }

    #[test]
    fn smoothing_is_exact_outside_band() {
        let w = 1e-4;
        assert_eq!(smooth_positive(2e-4, w), (2e-4, 1.0));
        assert_eq!(smooth_positive(-2e-4, w), (0.0, 0.0));
        let (v, d) = smooth_positive(0.5 * w - 1e-18, w);
        assert_relative_eq!(v, 0.5 * w, max_relative = 1e-9);
        assert_relative_eq!(d, 1.0, max_relative = 1e-9);
        assert_eq!(smooth_positive(1.0, 0.0), (1.0, 1.0));
    }

    #[test]
    fn statistics_neutral_at_flat_band() {
        let d = crate::device::build_default_device();
        let s = WellStatistics::new(&d, 1e-4);
        let (q, dq) = s.charge(0.0);
        assert!(q.abs() < 1e-12 * s.acceptor_volume_density, "{q}");
        assert!(dq < 0.0);
    }
}
