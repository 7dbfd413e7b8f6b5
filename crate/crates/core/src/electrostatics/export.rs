use std::io::Write;

use crate::constants::CODATA;
use crate::device::LayerRole;
use crate::error::Result;

use super::newton::PotentialField;

pub const BAND_PROFILE_HEADER: [&str; 7] = [
    "r_nm", "z_nm", "V_volts", "Ec_eV", "Ev_eV", "n_e_cm2", "p_cm2",
];

/// Band profile over the semiconductor nodes. Carrier columns hold the local
/// sheet-equivalent densities on well nodes and 0 elsewhere.
pub fn write_band_profile_csv<W: Write>(field: &PotentialField, writer: W) -> Result<()> {
    let m = &field.mesh;
    let well = m.device.well_material();
    let dos_e = CODATA.dos_2d(well.electron_mass) * 1e14;
    let dos_h = CODATA.dos_2d(well.heavy_hole_mass) * 1e14;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BAND_PROFILE_HEADER)?;
    for j in 0..m.nz() {
        for i in 0..m.nr() {
            let Some(role) = m.node_layer(i, j) else {
                continue;
            };
            let n = m.node_index(i, j);
            let (ec, ev) = (field.conduction_band_edge[n], field.valence_band_edge[n]);
            let (ne, p) = if role == LayerRole::QuantumWell {
                (dos_e * (-ec).max(0.0), dos_h * ev.max(0.0))
            } else {
                (0.0, 0.0)
            };
            w.write_record(&[
                fmt(m.radial_nodes[i]),
                fmt(m.axial_nodes[j]),
                fmt(field.potential[n]),
                fmt(ec),
                fmt(ev),
                fmt(ne),
                fmt(p),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}
