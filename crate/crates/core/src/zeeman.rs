//! Zeeman splitting, heavy-hole dipole selection rules and spin flips.

use serde::{Deserialize, Serialize};

use crate::constants::CODATA;
use crate::error::{Error, Result};

/// Hole g factor used when none is configured. Not a measured value.
pub const PLACEHOLDER_HOLE_G: f64 = 0.5;

pub const HOLE_G_NOTE: &str = "g_hole is a placeholder default, not a measured value; set zeeman.g_hole for quantitative shifts";

pub const SIGN_CONVENTION: &str =
    "shift_meV = mu_B * B * (g_electron * e_sz + g_hole * h_sz), relative to the zero-field transition";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZeemanConfig {
    pub b_field_z: f64,
    pub g_electron: f64,
    pub g_hole: f64,
    pub electron_sz: f64,
    pub hole_sz: f64,
}

impl Default for ZeemanConfig {
    fn default() -> Self {
        Self {
            b_field_z: 5.0,
            g_electron: -3.0,
            g_hole: PLACEHOLDER_HOLE_G,
            electron_sz: 0.5,
            hole_sz: 1.5,
        }
    }
}

impl ZeemanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_field_z >= 0.0 && self.b_field_z.is_finite()) {
            return Err(Error::Config(format!(
                "b_field_z must be >= 0, got {}",
                self.b_field_z
            )));
        }
        if !(self.g_hole > 0.0) {
            return Err(Error::Config("g_hole must be positive".into()));
        }
        if !self.g_electron.is_finite() {
            return Err(Error::Config("g_electron must be finite".into()));
        }
        check_electron(self.electron_sz)?;
        check_hole(self.hole_sz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    SigmaMinus,
    SigmaPlus,
    Forbidden,
}

fn check_electron(s: f64) -> Result<()> {
    if s == 0.5 || s == -0.5 {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "electron s_z must be +-1/2, got {s}"
        )))
    }
}

fn check_hole(s: f64) -> Result<()> {
    if s == 1.5 || s == -1.5 {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "heavy-hole s_z must be +-3/2, got {s}"
        )))
    }
}

/// Splitting between the electron s_z = ±1/2 levels, `|g_e| μ_B B`, meV.
pub fn electron_splitting(cfg: &ZeemanConfig) -> Result<f64> {
    if !(cfg.b_field_z >= 0.0) {
        return Err(Error::Contract("b_field_z must be >= 0".into()));
    }
    Ok(cfg.g_electron.abs() * CODATA.bohr_magneton * cfg.b_field_z)
}

pub fn transition_polarization(electron_sz: f64, hole_sz: f64) -> Result<Polarization> {
    check_electron(electron_sz)?;
    check_hole(hole_sz)?;
    Ok(match (electron_sz > 0.0, hole_sz > 0.0) {
        (true, true) => Polarization::SigmaMinus,
        (false, false) => Polarization::SigmaPlus,
        _ => Polarization::Forbidden,
    })
}

/// Idealised resonant flip `s_z -> -s_z`.
pub fn apply_pi_pulse(electron_sz: f64) -> Result<f64> {
    check_electron(electron_sz)?;
    Ok(-electron_sz)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmissionEvent {
    pub polarization: Polarization,
    /// meV relative to the zero-field line; `None` for forbidden pairs.
    pub photon_energy_shift: Option<f64>,
    pub electron_state: f64,
    pub hole_state: f64,
}

/// Photon emitted by the configured electron/hole pair.
pub fn emission_event(cfg: &ZeemanConfig) -> Result<EmissionEvent> {
    cfg.validate()?;
    let polarization = transition_polarization(cfg.electron_sz, cfg.hole_sz)?;
    let shift = (polarization != Polarization::Forbidden).then_some(
        CODATA.bohr_magneton
            * cfg.b_field_z
            * (cfg.g_electron * cfg.electron_sz + cfg.g_hole * cfg.hole_sz),
    );
    Ok(EmissionEvent {
        polarization,
        photon_energy_shift: shift,
        electron_state: cfg.electron_sz,
        hole_state: cfg.hole_sz,
    })
}

/// All four electron/hole pairs at the configured field and g factors.
pub fn transition_table(cfg: &ZeemanConfig) -> Result<Vec<EmissionEvent>> {
    let mut out = Vec::with_capacity(4);
    for e in [0.5, -0.5] {
        for h in [1.5, -1.5] {
            out.push(emission_event(&ZeemanConfig {
                electron_sz: e,
                hole_sz: h,
                ..cfg.clone()
            })?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitting_at_five_tesla() {
        let s = electron_splitting(&ZeemanConfig::default()).unwrap();
        assert!((s - 0.868).abs() / 0.868 < 5e-3, "{s}");
        let zero = ZeemanConfig {
            b_field_z: 0.0,
            ..Default::default()
        };
        assert_eq!(electron_splitting(&zero).unwrap(), 0.0);
        let double = ZeemanConfig {
            b_field_z: 10.0,
            ..Default::default()
        };
        assert!((electron_splitting(&double).unwrap() - 2.0 * s).abs() < 1e-15);
    }

    #[test]
    fn selection_rules() {
        assert_eq!(
            transition_polarization(0.5, 1.5).unwrap(),
            Polarization::SigmaMinus
        );
        assert_eq!(
            transition_polarization(-0.5, -1.5).unwrap(),
            Polarization::SigmaPlus
        );
        assert_eq!(
            transition_polarization(0.5, -1.5).unwrap(),
            Polarization::Forbidden
        );
        assert_eq!(
            transition_polarization(-0.5, 1.5).unwrap(),
            Polarization::Forbidden
        );
        assert!(matches!(
            transition_polarization(1.5, 1.5),
            Err(Error::Contract(_))
        ));
        assert!(transition_polarization(0.5, 0.5).is_err());
    }

    #[test]
    fn pi_pulse() {
        assert_eq!(apply_pi_pulse(0.5).unwrap(), -0.5);
        assert_eq!(apply_pi_pulse(-0.5).unwrap(), 0.5);
        assert!(apply_pi_pulse(1.0).is_err());
    }

    #[test]
    fn shifts_are_symmetric() {
        let table = transition_table(&ZeemanConfig::default()).unwrap();
        let shift = |p| {
            table
                .iter()
                .find(|e| e.polarization == p)
                .unwrap()
                .photon_energy_shift
                .unwrap()
        };
        assert!((shift(Polarization::SigmaMinus) + shift(Polarization::SigmaPlus)).abs() < 1e-15);
        assert_eq!(
            table
                .iter()
                .filter(|e| e.polarization == Polarization::Forbidden)
                .count(),
            2
        );
        assert!(table
            .iter()
            .filter(|e| e.polarization == Polarization::Forbidden)
            .all(|e| e.photon_energy_shift.is_none()));
        let zero = transition_table(&ZeemanConfig {
            b_field_z: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert!(zero
            .iter()
            .filter_map(|e| e.photon_energy_shift)
            .all(|s| s == 0.0));
    }
}
