//! Device description: materials, the layer stack under the gate, gate
//! geometry and doping.
//!
//! Energies of band edges are referenced to the valence-band maximum of the
//! quantum-well material; [`DeviceSpec::fermi_shift_ev`] moves that reference
//! onto the hole Fermi level so that `E_F = 0` everywhere in equilibrium.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{CM2_TO_NM2, CODATA};
use crate::error::{Error, Result};
use crate::mesh::RefinementSpec;

/// Bundled configuration reproducing the default In0.53Ga0.47As device.
pub const DEFAULT_DEVICE_TOML: &str = include_str!("../configs/default_device.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub name: String,
    /// eV
    pub bandgap_ev: f64,
    /// units of m0
    pub electron_mass: f64,
    /// units of m0
    pub heavy_hole_mass: f64,
    pub dielectric_constant: f64,
    /// Conduction-band edge in eV, relative to the quantum-well valence band.
    pub conduction_band_offset_ev: f64,
}

impl MaterialParams {
    pub fn valence_band_offset_ev(&self) -> f64 {
        self.conduction_band_offset_ev - self.bandgap_ev
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::InvalidDevice(format!(
                "material {}: {what}",
                self.name
            )))
        };
        if !(self.bandgap_ev > 0.0) {
            return bad("bandgap must be positive");
        }
        if !(self.electron_mass > 0.0 && self.heavy_hole_mass > 0.0) {
            return bad("effective masses must be positive");
        }
        if !(self.dielectric_constant >= 1.0) {
            return bad("dielectric constant must be >= 1");
        }
        if !self.conduction_band_offset_ev.is_finite() {
            return bad("band offset must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRole {
    GateDielectric,
    QuantumWell,
    Buffer,
    Substrate,
}

impl LayerRole {
    /// Required top-to-bottom order.
    pub const ORDER: [LayerRole; 4] = [
        LayerRole::GateDielectric,
        LayerRole::QuantumWell,
        LayerRole::Buffer,
        LayerRole::Substrate,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub role: LayerRole,
    /// Key into [`DeviceSpec::materials`].
    pub material: String,
    pub thickness_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub height_nm: f64,
    pub radius_nm: f64,
    /// Constant added to the applied bias on the gate surface (work-function
    /// difference). Zero puts the flat-band voltage at 0 V.
    #[serde(default)]
    pub offset_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureModel {
    /// Degenerate step-function occupation at T = 0.
    #[default]
    ZeroTemperature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub gate: GateSpec,
    /// Radius of the disk with the same area as the square mesa.
    pub mesa_radius_nm: f64,
    /// Ionized acceptors in the quantum well, cm⁻².
    pub acceptor_sheet_density_cm2: f64,
    #[serde(default)]
    pub temperature_model: TemperatureModel,
    pub materials: BTreeMap<String, MaterialParams>,
    /// Top to bottom.
    pub layers: Vec<Layer>,
}

/// On-disk device file: the device plus an optional mesh section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceFile {
    #[serde(flatten)]
    pub device: DeviceSpec,
    #[serde(default)]
    pub mesh: Option<RefinementSpec>,
}

impl DeviceFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: DeviceFile = toml::from_str(text)?;
        file.device.validate()?;
        if let Some(mesh) = &file.mesh {
            mesh.validate()?;
        }
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn bundled_default() -> Self {
        Self::from_toml_str(DEFAULT_DEVICE_TOML).expect("bundled device config is valid")
    }
}

/// Side length of the square mesa, nm.
pub const DEFAULT_MESA_SIDE_NM: f64 = 1000.0;

/// The In0.53Ga0.47As / In0.52Al0.48As / InP structure.
///
/// Barrier offsets are not part of the device description we reproduce;
/// ΔE_c = 0.50 eV and ΔE_v = 0.20 eV are used for the lattice-matched pair.
pub fn build_default_device() -> DeviceSpec {
    let ingaas = MaterialParams {
        name: "In0.53Ga0.47As".into(),
        bandgap_ev: 0.75,
        electron_mass: 0.045,
        heavy_hole_mass: 0.38,
        dielectric_constant: 14.0,
        conduction_band_offset_ev: 0.75,
    };
    let inalas = MaterialParams {
        name: "In0.52Al0.48As".into(),
        bandgap_ev: 1.45,
        electron_mass: 0.075,
        heavy_hole_mass: 0.41,
        dielectric_constant: 14.0,
        conduction_band_offset_ev: 1.25,
    };
    let inp = MaterialParams {
        name: "InP".into(),
        bandgap_ev: 1.344,
        electron_mass: 0.08,
        heavy_hole_mass: 0.6,
        dielectric_constant: 14.0,
        conduction_band_offset_ev: 1.0,
    };
    let mut materials = BTreeMap::new();
    for m in [ingaas, inalas, inp] {
        materials.insert(m.name.clone(), m);
    }
    let layer = |role, material: &str, thickness_nm| Layer {
        role,
        material: material.into(),
        thickness_nm,
    };
    DeviceSpec {
        gate: GateSpec {
            height_nm: 150.0,
            radius_nm: 35.0,
            offset_v: 0.0,
        },
        mesa_radius_nm: (DEFAULT_MESA_SIDE_NM * DEFAULT_MESA_SIDE_NM / std::f64::consts::PI).sqrt(),
        acceptor_sheet_density_cm2: 1e11,
        temperature_model: TemperatureModel::ZeroTemperature,
        materials,
        layers: vec![
            layer(LayerRole::GateDielectric, "In0.52Al0.48As", 50.0),
            layer(LayerRole::QuantumWell, "In0.53Ga0.47As", 10.0),
            layer(LayerRole::Buffer, "In0.52Al0.48As", 300.0),
            layer(LayerRole::Substrate, "InP", 1000.0),
        ],
    }
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDevice(msg));
        if !(self.gate.height_nm > 0.0 && self.gate.radius_nm > 0.0) {
            return bad("gate height and radius must be positive".into());
        }
        if !self.gate.offset_v.is_finite() {
            return bad("gate offset must be finite".into());
        }
        if !(self.mesa_radius_nm >= self.gate.radius_nm) {
            return bad("mesa radius must be at least the gate radius".into());
        }
        if !(self.acceptor_sheet_density_cm2 >= 0.0 && self.acceptor_sheet_density_cm2.is_finite())
        {
            return bad("acceptor density must be non-negative".into());
        }
        let roles: Vec<LayerRole> = self.layers.iter().map(|l| l.role).collect();
        if roles != LayerRole::ORDER {
            return bad(format!(
                "layers must be gate_dielectric, quantum_well, buffer, substrate (top to bottom), got {roles:?}"
            ));
        }
        for layer in &self.layers {
            if !(layer.thickness_nm > 0.0) {
                return bad(format!("{:?} layer thickness must be positive", layer.role));
            }
            if !self.materials.contains_key(&layer.material) {
                return bad(format!("unknown material {}", layer.material));
            }
        }
        for m in self.materials.values() {
            m.validate()?;
        }
        Ok(())
    }

    pub fn layer(&self, role: LayerRole) -> &Layer {
        self.layers
            .iter()
            .find(|l| l.role == role)
            .expect("validated device has every layer role")
    }

    pub fn material(&self, role: LayerRole) -> &MaterialParams {
        &self.materials[&self.layer(role).material]
    }

    pub fn well_material(&self) -> &MaterialParams {
        self.material(LayerRole::QuantumWell)
    }

    pub fn well_thickness_nm(&self) -> f64 {
        self.layer(LayerRole::QuantumWell).thickness_nm
    }

    /// Equilibrium hole Fermi energy of the doped well, meV.
    pub fn hole_fermi_energy_mev(&self) -> f64 {
        hole_fermi_energy(
            self.acceptor_sheet_density_cm2,
            self.well_material().heavy_hole_mass,
        )
    }

    /// Shift (eV) from the material offset reference to `E_F = 0`: at flat
    /// band the well valence edge sits the hole Fermi energy above E_F.
    pub fn fermi_shift_ev(&self) -> f64 {
        self.hole_fermi_energy_mev() * 1e-3 - self.well_material().valence_band_offset_ev()
    }

    pub fn with_gate_radius(mut self, radius_nm: f64) -> Self {
        self.gate.radius_nm = radius_nm;
        self
    }
}

/// Zero-temperature Fermi energy (meV) of a 2D hole gas with spin-degenerate
/// density of states `m/(πħ²)`.
pub fn hole_fermi_energy(sheet_density_cm2: f64, hole_mass_m0: f64) -> f64 {
    let p_nm2 = sheet_density_cm2 * CM2_TO_NM2;
    p_nm2 / CODATA.dos_2d(hole_mass_m0) * 1e3
}
