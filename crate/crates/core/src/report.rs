//! JSON and CSV reports written by the command-line tool.
//!
//! Every JSON document carries `schema_version`, keys are sorted and floats
//! are rounded to 12 significant digits, so repeated runs produce
//! byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::cycle::{CycleStats, PulseProtocol};
use crate::electrostatics::{GaussBalance, PotentialField};
use crate::error::Result;
use crate::qdot::{ChargingEnergy, DotSpectrum, Shell};
use crate::zeeman::{self, Polarization, ZeemanConfig};

pub const SCHEMA_VERSION: u32 = 1;

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            Number::from_f64(r)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Serializes `report` with `schema_version` added and rounded floats.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut out = Map::new();
    out.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    match round_value(serde_json::to_value(report)?) {
        Value::Object(o) => out.extend(o),
        other => {
            out.insert("data".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(out))?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    #[serde(rename = "vgate_V")]
    pub vgate: f64,
    pub converged: bool,
    pub newton_iterations: usize,
    pub residual_norm: f64,
    #[serde(rename = "min_Ec_meV")]
    pub min_ec_mev: f64,
    pub electron_count: f64,
    pub electron_sheet_density_max_cm2: f64,
    pub hole_sheet_density_min_cm2: f64,
    pub hole_sheet_density_max_cm2: f64,
    pub gauss: GaussBalance,
    pub mesh_nodes: [usize; 2],
    pub band_profile_csv: Option<String>,
}

impl SolveSummary {
    pub fn new(field: &PotentialField, band_profile_csv: Option<String>) -> Self {
        let cs = field.charge_state();
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            vgate: field.gate_bias,
            converged: field.converged,
            newton_iterations: field.newton_iterations,
            residual_norm: field.residual_norm,
            min_ec_mev: field.min_conduction_edge_mev(),
            electron_count: field.electron_count(),
            electron_sheet_density_max_cm2: max(&cs.electron_sheet_density),
            hole_sheet_density_min_cm2: min(&cs.hole_sheet_density),
            hole_sheet_density_max_cm2: max(&cs.hole_sheet_density),
            gauss: field.gauss_balance(),
            mesh_nodes: [field.mesh.nr(), field.mesh.nz()],
            band_profile_csv,
        }
    }
}

pub const SWEEP_HEADER: [&str; 6] = [
    "vgate_V",
    "min_Ec_meV",
    "hbar_omega0_meV",
    "ground_state_meV",
    "n_electrons_estimate",
    "status",
];

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub vgate: f64,
    pub min_ec_mev: f64,
    pub hbar_omega0_mev: Option<f64>,
    pub ground_state_mev: Option<f64>,
    pub n_electrons: f64,
    pub status: String,
}

impl SweepRow {
    pub fn new(field: &PotentialField) -> Self {
        let (hw, gs, status) = if !field.converged {
            (None, None, "not_converged".to_string())
        } else {
            match DotSpectrum::from_field(field, 1) {
                Ok(s) => (
                    Some(s.hbar_omega0),
                    Some(s.ground_state_energy_absolute),
                    "ok".to_string(),
                ),
                Err(_) => (None, None, "fit_failed".to_string()),
            }
        };
        Self {
            vgate: field.gate_bias,
            min_ec_mev: field.min_conduction_edge_mev(),
            hbar_omega0_mev: hw,
            ground_state_mev: gs,
            n_electrons: field.electron_count(),
            status,
        }
    }
}

fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            fmt12(r.vgate),
            fmt12(r.min_ec_mev),
            r.hbar_omega0_mev.map(fmt12).unwrap_or_default(),
            r.ground_state_mev.map(fmt12).unwrap_or_default(),
            fmt12(r.n_electrons),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ChargingReport {
    #[serde(flatten)]
    pub estimates: ChargingEnergy,
    pub note: &'static str,
}

/// Dot characterization. Quantities that could not be computed are `null`
/// and the reason is listed under `errors`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DotReport {
    #[serde(rename = "v_align_V")]
    pub v_align: Option<f64>,
    #[serde(rename = "v_onset_V")]
    pub v_onset: Option<f64>,
    #[serde(rename = "hbar_omega0_meV")]
    pub hbar_omega0: Option<f64>,
    #[serde(rename = "curvature_meV_per_nm2")]
    pub curvature: Option<f64>,
    #[serde(rename = "fit_residual_meV")]
    pub fit_residual: Option<f64>,
    #[serde(rename = "fit_window_nm")]
    pub fit_window: Option<f64>,
    pub l0_nm: Option<f64>,
    #[serde(rename = "charging_energy_meV")]
    pub charging_energy: Option<ChargingReport>,
    pub lever_arm: Option<f64>,
    /// (bias V, ground-state energy meV) pairs used for the lever arm.
    pub lever_arm_points: Vec<[f64; 2]>,
    pub level_ladder: Vec<Shell>,
    pub errors: BTreeMap<String, String>,
}

pub const CHARGING_NOTE: &str =
    "closed-form estimates, not computed from the solved charge distribution";

impl DotReport {
    pub fn set_spectrum(&mut self, s: &DotSpectrum) {
        self.hbar_omega0 = Some(s.hbar_omega0);
        self.curvature = Some(s.curvature);
        self.fit_residual = Some(s.fit_residual);
        self.fit_window = Some(s.fit_window_radius);
        self.l0_nm = Some(s.confinement_length_l0);
        self.charging_energy = Some(ChargingReport {
            estimates: s.charging_energy,
            note: CHARGING_NOTE,
        });
        self.level_ladder = s.level_ladder.clone();
    }
}

/// Cycle statistics with the protocol echoed; an infinite lifetime is
/// written as `null`.
#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    pub protocol: PulseProtocol,
    #[serde(flatten)]
    pub stats: CycleStats,
}

impl CycleReport {
    pub fn new(protocol: &PulseProtocol, stats: CycleStats) -> Self {
        Self {
            protocol: protocol.clone(),
            stats,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionRow {
    pub e_sz: f64,
    pub h_sz: f64,
    pub polarization: Polarization,
    #[serde(rename = "shift_meV")]
    pub shift_mev: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeemanReport {
    pub b_tesla: f64,
    pub g_electron: f64,
    pub g_hole: f64,
    pub g_hole_note: Option<&'static str>,
    #[serde(rename = "electron_splitting_meV")]
    pub electron_splitting_mev: f64,
    pub sign_convention: &'static str,
    pub transitions: Vec<TransitionRow>,
    /// Zero-field line estimated as well bandgap plus ℏω₀, meV.
    #[serde(rename = "photon_energy_estimate_meV")]
    pub photon_energy_estimate_mev: Option<f64>,
    pub photon_energy_note: String,
}

impl ZeemanReport {
    /// `zero_field_line` is the bandgap + ℏω₀ estimate (meV) if available,
    /// otherwise a reason it is missing.
    pub fn new(
        cfg: &ZeemanConfig,
        zero_field_line: std::result::Result<f64, String>,
    ) -> Result<Self> {
        let transitions = zeeman::transition_table(cfg)?
            .into_iter()
            .map(|e| TransitionRow {
                e_sz: e.electron_state,
                h_sz: e.hole_state,
                polarization: e.polarization,
                shift_mev: e.photon_energy_shift,
            })
            .collect();
        let (estimate, note) = match zero_field_line {
            Ok(v) => (
                Some(v),
                "well bandgap + hbar_omega0 at alignment; hole confinement and exciton binding omitted".to_string(),
            ),
            Err(reason) => (None, reason),
        };
        Ok(Self {
            b_tesla: cfg.b_field_z,
            g_electron: cfg.g_electron,
            g_hole: cfg.g_hole,
            g_hole_note: (cfg.g_hole == zeeman::PLACEHOLDER_HOLE_G).then_some(zeeman::HOLE_G_NOTE),
            electron_splitting_mev: zeeman::electron_splitting(cfg)?,
            sign_convention: zeeman::SIGN_CONVENTION,
            transitions,
            photon_energy_estimate_mev: estimate,
            photon_energy_note: note,
        })
    }
}
