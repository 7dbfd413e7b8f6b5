//! CODATA 2018 physical constants and the unit conversions used throughout
//! the crate (lengths in nm, energies in eV or meV, potentials in V).

/// Fixed CODATA 2018 values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// kg
    pub electron_mass_m0: f64,
    /// C
    pub elementary_charge: f64,
    /// F/m
    pub vacuum_permittivity: f64,
    /// J·s
    pub reduced_planck: f64,
    /// meV/T
    pub bohr_magneton: f64,
}

/// Bohr magneton in J/T.
pub const BOHR_MAGNETON_J_PER_T: f64 = 9.274_010_078_3e-24;

pub const CODATA: PhysicalConstants = PhysicalConstants {
    electron_mass_m0: 9.109_383_701_5e-31,
    elementary_charge: 1.602_176_634e-19,
    vacuum_permittivity: 8.854_187_812_8e-12,
    reduced_planck: 1.054_571_817e-34,
    bohr_magneton: 0.057_883_818_060,
};

impl PhysicalConstants {
    /// Spin-degenerate 2D density of states `m / (π ħ²)` in nm⁻²·eV⁻¹.
    pub fn dos_2d(&self, mass_m0: f64) -> f64 {
        let m = mass_m0 * self.electron_mass_m0;
        let per_joule_per_m2 = m / (std::f64::consts::PI * self.reduced_planck.powi(2));
        per_joule_per_m2 * self.elementary_charge * 1e-18
    }

    /// `e / ε₀` expressed in V·nm; converts a charge in units of e into the
    /// flux of ε_r∇V with lengths in nm.
    pub fn charge_to_flux(&self) -> f64 {
        self.elementary_charge / self.vacuum_permittivity * 1e9
    }

    /// `e² / (4π ε₀)` in eV·nm.
    pub fn coulomb_ev_nm(&self) -> f64 {
        self.charge_to_flux() / (4.0 * std::f64::consts::PI)
    }

    /// ħ²/(2 m0) in meV·nm², the kinetic-energy scale for confinement lengths.
    pub fn hbar2_over_2m0_mev_nm2(&self) -> f64 {
        self.reduced_planck.powi(2) / (2.0 * self.electron_mass_m0) / self.elementary_charge
            * 1e3
            * 1e18
    }
}

/// Sheet density conversion: 1 cm⁻² = 1e-14 nm⁻².
pub const CM2_TO_NM2: f64 = 1e-14;
