//! Gate-defined quantum dot: lateral confinement profile, parabolic fit,
//! Fock–Darwin shells, lever arm, alignment/onset biases and charging
//! energy estimates.

use serde::Serialize;

use crate::constants::CODATA;
use crate::electrostatics::{PoissonSolver, PotentialField};
use crate::error::{Error, Result};

/// Conduction-band edge along r at the well midplane.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfinementProfile {
    /// nm, strictly increasing from 0.
    pub radii: Vec<f64>,
    /// meV relative to E_F = 0.
    pub well_conduction_edge: Vec<f64>,
    pub bias: f64,
    /// Well electron mass, units of m0.
    pub electron_mass: f64,
}

impl ConfinementProfile {
    pub fn minimum(&self) -> f64 {
        self.well_conduction_edge
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> usize {
        self.well_conduction_edge
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &e)| if e < acc.1 { (i, e) } else { acc },
            )
            .0
    }

    /// Linear interpolation at radius `r` (clamped to the profile).
    pub fn at(&self, r: f64) -> f64 {
        let x = &self.radii;
        let y = &self.well_conduction_edge;
        if r <= x[0] {
            return y[0];
        }
        match x.iter().position(|&xi| xi >= r) {
            Some(k) => {
                let t = (r - x[k - 1]) / (x[k] - x[k - 1]);
                y[k - 1] + t * (y[k] - y[k - 1])
            }
            None => *y.last().unwrap(),
        }
    }
}

/// Samples the midplane conduction edge of a converged field.
pub fn extract_profile(field: &PotentialField) -> Result<ConfinementProfile> {
    if !field.converged {
        return Err(Error::NotConverged {
            residual: field.residual_norm,
        });
    }
    Ok(ConfinementProfile {
        radii: field.mesh.radial_nodes.clone(),
        well_conduction_edge: field.midplane_conduction_edge_mev(),
        bias: field.gate_bias,
        electron_mass: field.mesh.device.well_material().electron_mass,
    })
}

/// `E(r) = offset + curvature · r²` over `r <= window_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParabolaFit {
    /// meV/nm²; the potential-energy coefficient, i.e. ½ m ω₀².
    pub curvature: f64,
    /// meV
    pub offset: f64,
    /// meV RMS
    pub rms_residual: f64,
    pub window_radius: f64,
    pub samples: usize,
}

const MIN_FIT_SAMPLES: usize = 5;

/// ℏω₀ (meV) of a parabola with coefficient `curvature` (meV/nm²) for a
/// particle of mass `mass_m0`: `ħ·sqrt(2c/m)`.
pub fn hbar_omega_from_curvature(curvature: f64, mass_m0: f64) -> f64 {
    2.0 * (CODATA.hbar2_over_2m0_mev_nm2() * curvature.max(0.0) / mass_m0).sqrt()
}

/// Inverse of [`hbar_omega_from_curvature`].
pub fn curvature_from_hbar_omega(hbar_omega_mev: f64, mass_m0: f64) -> f64 {
    hbar_omega_mev * hbar_omega_mev * mass_m0 / (4.0 * CODATA.hbar2_over_2m0_mev_nm2())
}

fn least_squares(radii: &[f64], energies: &[f64], window: f64) -> Result<ParabolaFit> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(energies)
        .filter(|(r, _)| **r <= window)
        .map(|(r, e)| (r * r, *e))
        .collect();
    let n = pts.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{n} samples inside {window} nm, need at least {MIN_FIT_SAMPLES}"
        )));
    }
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::Fit("degenerate fit: all radii coincide".into()));
    }
    let curvature = sxy / sxx;
    let offset = mean_y - curvature * mean_x;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - offset - curvature * p.0).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(ParabolaFit {
        curvature,
        offset,
        rms_residual: rms,
        window_radius: window,
        samples: n,
    })
}

/// Largest radius, walking out from r = 0, at which the profile is still
/// within `rise` of its value at r = 0. At least [`MIN_FIT_SAMPLES`] samples.
fn window_for_rise(profile: &ConfinementProfile, rise: f64) -> f64 {
    let e0 = profile.well_conduction_edge[0];
    let mut last = 0;
    for (k, e) in profile.well_conduction_edge.iter().enumerate() {
        if e - e0 <= rise {
            last = k;
        } else {
            break;
        }
    }
    let k = last.max(MIN_FIT_SAMPLES - 1).min(profile.radii.len() - 1);
    profile.radii[k]
}

/// Least-squares parabola through the profile. With `window = None` the
/// window is chosen where the profile rises two estimated quanta above its
/// centre value, with one refinement of that estimate.
pub fn fit_parabola(profile: &ConfinementProfile, window: Option<f64>) -> Result<ParabolaFit> {
    let (r, e) = (&profile.radii, &profile.well_conduction_edge);
    if r.len() != e.len() || r.is_empty() {
        return Err(Error::Fit("profile is empty or ragged".into()));
    }
    if let Some(w) = window {
        return least_squares(r, e, w);
    }
    let span = e.iter().copied().fold(f64::NEG_INFINITY, f64::max) - e[0];
    if !(span > 0.0) {
        return least_squares(r, e, *r.last().unwrap());
    }
    let mut fit = least_squares(r, e, window_for_rise(profile, 0.25 * span))?;
    for _ in 0..2 {
        let quantum = hbar_omega_from_curvature(fit.curvature, profile.electron_mass);
        fit = least_squares(r, e, window_for_rise(profile, 2.0 * quantum))?;
    }
    Ok(fit)
}

/// One degenerate shell of the 2D isotropic oscillator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shell {
    /// k = 2n + |ℓ| + 1
    pub index: usize,
    /// meV above the well minimum, k·ℏω₀.
    pub energy: f64,
    pub orbital_degeneracy: usize,
    pub spin_degeneracy: usize,
    /// (n, ℓ) pairs in the shell.
    pub states: Vec<(usize, i64)>,
}

/// Zero-field Fock–Darwin ladder up to shell `max_shell`. Shell k holds the
/// states with `2n + |ℓ| + 1 = k` (radial quantum number n), so its orbital
/// degeneracy is k.
pub fn fock_darwin_levels(hbar_omega0: f64, max_shell: usize) -> Result<Vec<Shell>> {
    if !(hbar_omega0 > 0.0) {
        return Err(Error::Contract("hbar_omega0 must be positive".into()));
    }
    Ok((1..=max_shell)
        .map(|k| {
            let mut states = Vec::with_capacity(k);
            for n in 0..=(k - 1) / 2 {
                let l = (k - 1 - 2 * n) as i64;
                if l == 0 {
                    states.push((n, 0));
                } else {
                    states.push((n, -l));
                    states.push((n, l));
                }
            }
            Shell {
                index: k,
                energy: k as f64 * hbar_omega0,
                orbital_degeneracy: states.len(),
                spin_degeneracy: 2,
                states,
            }
        })
        .collect())
}

/// Oscillator length `sqrt(ħ/(m ω₀))`, nm.
pub fn confinement_length(hbar_omega0: f64, mass_m0: f64) -> f64 {
    (2.0 * CODATA.hbar2_over_2m0_mev_nm2() / (mass_m0 * hbar_omega0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChargingEstimator {
    /// Coulomb interaction of two electrons in the oscillator ground state:
    /// `sqrt(π/2) e² / (4π ε₀ ε_r l₀)`.
    InteractionIntegral { l0_nm: f64 },
    /// Conducting disk of radius R: `e² / (8 ε₀ ε_r R)`.
    DiskSelfCapacitance { radius_nm: f64 },
}

/// Single-electron charging energy estimate, meV.
pub fn charging_energy(epsilon_r: f64, estimator: ChargingEstimator) -> Result<f64> {
    if !(epsilon_r > 0.0) {
        return Err(Error::Contract("epsilon_r must be positive".into()));
    }
    let coulomb = CODATA.coulomb_ev_nm() * 1e3 / epsilon_r;
    match estimator {
        ChargingEstimator::InteractionIntegral { l0_nm } if l0_nm > 0.0 => {
            Ok((std::f64::consts::PI / 2.0).sqrt() * coulomb / l0_nm)
        }
        ChargingEstimator::DiskSelfCapacitance { radius_nm } if radius_nm > 0.0 => {
            Ok(coulomb * 4.0 * std::f64::consts::PI / (8.0 * radius_nm))
        }
        _ => Err(Error::Contract("length scale must be positive".into())),
    }
}

/// Both charging-energy estimates, meV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargingEnergy {
    pub interaction_integral: f64,
    pub disk_self_capacitance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DotSpectrum {
    pub bias: f64,
    /// meV
    pub hbar_omega0: f64,
    /// meV/nm², ½ m ω₀² convention.
    pub curvature: f64,
    pub fit_window_radius: f64,
    /// meV RMS
    pub fit_residual: f64,
    pub level_ladder: Vec<Shell>,
    pub confinement_length_l0: f64,
    pub charging_energy: ChargingEnergy,
    /// Lowest midplane conduction edge, meV vs E_F.
    pub well_minimum: f64,
    /// `well_minimum + ℏω₀`, meV vs E_F.
    pub ground_state_energy_absolute: f64,
}

impl DotSpectrum {
    pub fn from_profile(
        profile: &ConfinementProfile,
        window: Option<f64>,
        max_shell: usize,
        epsilon_r: f64,
        gate_radius_nm: f64,
    ) -> Result<Self> {
        let fit = fit_parabola(profile, window)?;
        let hbar_omega0 = hbar_omega_from_curvature(fit.curvature, profile.electron_mass);
        if !(hbar_omega0 > 0.0) {
            return Err(Error::Fit(format!(
                "profile at {} V has no confinement (curvature {:.3e})",
                profile.bias, fit.curvature
            )));
        }
        let l0 = confinement_length(hbar_omega0, profile.electron_mass);
        let well_minimum = profile.minimum();
        Ok(Self {
            bias: profile.bias,
            hbar_omega0,
            curvature: fit.curvature,
            fit_window_radius: fit.window_radius,
            fit_residual: fit.rms_residual,
            level_ladder: fock_darwin_levels(hbar_omega0, max_shell)?,
            confinement_length_l0: l0,
            charging_energy: ChargingEnergy {
                interaction_integral: charging_energy(
                    epsilon_r,
                    ChargingEstimator::InteractionIntegral { l0_nm: l0 },
                )?,
                disk_self_capacitance: charging_energy(
                    epsilon_r,
                    ChargingEstimator::DiskSelfCapacitance {
                        radius_nm: gate_radius_nm,
                    },
                )?,
            },
            well_minimum,
            ground_state_energy_absolute: well_minimum + hbar_omega0,
        })
    }

    /// Spectrum of a solved field with the automatic fit window.
    pub fn from_field(field: &PotentialField, max_shell: usize) -> Result<Self> {
        let profile = extract_profile(field)?;
        let device = &field.mesh.device;
        Self::from_profile(
            &profile,
            None,
            max_shell,
            device.well_material().dielectric_constant,
            device.gate.radius_nm,
        )
    }
}

/// Gating effectiveness `|ΔV_gate / Δ(E/e)|` from a linear regression of
/// the dot ground-state energy (meV) against bias (V).
pub fn lever_arm(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Fit(
            "lever arm needs at least two sweep points".into(),
        ));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1 * 1e-3).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 * 1e-3 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("lever arm needs distinct biases".into()));
    }
    let slope = sxy / sxx;
    if slope == 0.0 {
        return Err(Error::Fit("ground state does not move with bias".into()));
    }
    Ok((1.0 / slope).abs())
}

/// [`lever_arm`] over a list of spectra.
pub fn lever_arm_from_spectra(spectra: &[DotSpectrum]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = spectra
        .iter()
        .map(|s| (s.bias, s.ground_state_energy_absolute))
        .collect();
    lever_arm(&pts)
}

/// Result of a bisection on gate bias.
#[derive(Debug, Clone)]
pub struct BiasSearch {
    pub bias: f64,
    /// Value of the searched quantity at `bias`, meV.
    pub residual_mev: f64,
    pub field: PotentialField,
    pub evaluations: usize,
}

/// Default acceptance for both bias searches, meV.
pub const SEARCH_TOLERANCE_MEV: f64 = 0.05;

fn bisect<F>(
    solver: &PoissonSolver,
    bracket: (f64, f64),
    tol_mev: f64,
    mut quantity: F,
) -> Result<BiasSearch>
where
    F: FnMut(&PotentialField) -> Result<f64>,
{
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let mut evaluations = 0;
    let mut eval = |bias: f64, guess: Option<&PotentialField>| -> Result<(PotentialField, f64)> {
        evaluations += 1;
        let field = solver.solve(bias, guess)?;
        if !field.converged {
            return Err(Error::NotConverged {
                residual: field.residual_norm,
            });
        }
        let q = quantity(&field)?;
        Ok((field, q))
    };
    let (f_lo_field, mut f_lo) = eval(lo, None)?;
    let (f_hi_field, f_hi) = eval(hi, Some(&f_lo_field))?;
    if f_lo.abs() < tol_mev {
        return Ok(BiasSearch {
            bias: lo,
            residual_mev: f_lo,
            field: f_lo_field,
            evaluations: 2,
        });
    }
    if f_hi.abs() < tol_mev {
        return Ok(BiasSearch {
            bias: hi,
            residual_mev: f_hi,
            field: f_hi_field,
            evaluations: 2,
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let (mut lo_field, mut hi_field) = (f_lo_field, f_hi_field);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let guess = if mid - lo <= hi - mid {
            &lo_field
        } else {
            &hi_field
        };
        let (field, f_mid) = eval(mid, Some(guess))?;
        if f_mid.abs() < tol_mev || hi - lo < 1e-12 {
            return Ok(BiasSearch {
                bias: mid,
                residual_mev: f_mid,
                field,
                evaluations: 0,
            }
            .with_count(evaluations));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
            lo_field = field;
        } else {
            hi = mid;
            hi_field = field;
        }
    }
    Err(Error::Fit("bisection did not terminate".into()))
}

impl BiasSearch {
    fn with_count(mut self, evaluations: usize) -> Self {
        self.evaluations = evaluations;
        self
    }
}

/// Bias at which the lowest midplane conduction edge reaches E_F.
pub fn find_alignment_bias(
    solver: &PoissonSolver,
    bracket: (f64, f64),
    tol_mev: f64,
) -> Result<BiasSearch> {
    bisect(
        solver,
        bracket,
        tol_mev,
        |f| Ok(f.min_conduction_edge_mev()),
    )
}

/// Bias at which the dot ground state (well minimum + ℏω₀) reaches E_F.
pub fn find_onset_bias(
    solver: &PoissonSolver,
    bracket: (f64, f64),
    tol_mev: f64,
) -> Result<BiasSearch> {
    bisect(solver, bracket, tol_mev, |f| {
        let spectrum = DotSpectrum::from_field(f, 1)?;
        Ok(spectrum.ground_state_energy_absolute)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(offset: f64, c: f64, n: usize, dr: f64) -> ConfinementProfile {
        let radii: Vec<f64> = (0..n).map(|k| k as f64 * dr).collect();
        let well_conduction_edge = radii.iter().map(|r| offset + c * r * r).collect();
        ConfinementProfile {
            radii,
            well_conduction_edge,
            bias: 0.0,
            electron_mass: 0.045,
        }
    }

    #[test]
    fn exact_parabola_round_trip() {
        let p = synthetic(3.0, 0.0923, 200, 0.5);
        let fit = fit_parabola(&p, Some(40.0)).unwrap();
        assert_relative_eq!(fit.curvature, 0.0923, max_relative = 1e-9);
        assert_relative_eq!(fit.offset, 3.0, max_relative = 1e-9);
        assert!(fit.rms_residual < 1e-10);
        let auto = fit_parabola(&p, None).unwrap();
        assert_relative_eq!(auto.curvature, 0.0923, max_relative = 1e-9);
    }

    #[test]
    fn auto_window_spans_two_quanta() {
        let c = curvature_from_hbar_omega(12.5, 0.045);
        let p = synthetic(0.0, c, 400, 0.5);
        let fit = fit_parabola(&p, None).unwrap();
        // c·w² ≈ 25 meV
        assert!(
            (c * fit.window_radius.powi(2) - 25.0).abs() < 1.0,
            "{}",
            fit.window_radius
        );
    }

    #[test]
    fn degenerate_fit_rejected() {
        let p = ConfinementProfile {
            radii: vec![1.0; 6],
            well_conduction_edge: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            bias: 0.0,
            electron_mass: 0.045,
        };
        assert!(matches!(fit_parabola(&p, Some(2.0)), Err(Error::Fit(_))));
        let short = synthetic(0.0, 1.0, 4, 1.0);
        assert!(fit_parabola(&short, Some(10.0)).is_err());
    }

    #[test]
    fn hbar_omega_of_curvature() {
        // ħ·sqrt(2c/m) evaluated in SI for c in meV/nm²
        let si = |c: f64| {
            let k = 2.0 * c * 1.602_176_634e-22 / 1e-18;
            let m = 0.045 * 9.109_383_701_5e-31;
            1.054_571_817e-34 * (k / m).sqrt() / 1.602_176_634e-22
        };
        assert_relative_eq!(
            hbar_omega_from_curvature(0.0923, 0.045),
            si(0.0923),
            max_relative = 1e-10
        );
        let c = curvature_from_hbar_omega(12.5, 0.045);
        assert_relative_eq!(c, 0.046_13, max_relative = 1e-3);
        assert_relative_eq!(
            hbar_omega_from_curvature(c, 0.045),
            12.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn fock_darwin_first_shells() {
        let shells = fock_darwin_levels(12.5, 3).unwrap();
        assert_eq!(shells[0].energy, 12.5);
        assert_eq!(shells[0].states, vec![(0, 0)]);
        assert_eq!(shells[1].energy, 25.0);
        assert_eq!(shells[1].states, vec![(0, -1), (0, 1)]);
        assert_eq!(shells[2].energy, 37.5);
        assert_eq!(shells[2].orbital_degeneracy, 3);
        assert!(shells.iter().all(|s| s.spin_degeneracy == 2));
        assert!(fock_darwin_levels(0.0, 3).is_err());
    }

    #[test]
    fn oscillator_length() {
        assert!((confinement_length(12.5, 0.045) - 11.6).abs() < 0.05);
    }

    #[test]
    fn charging_estimates() {
        // e²/(8 ε₀ ε_r R) in SI
        let si = 1.602_176_634e-19 / (8.0 * 8.854_187_812_8e-12 * 14.0 * 35e-9) * 1e3;
        let disk = charging_energy(
            14.0,
            ChargingEstimator::DiskSelfCapacitance { radius_nm: 35.0 },
        )
        .unwrap();
        assert_relative_eq!(disk, si, max_relative = 1e-9);
        assert!((disk - 4.61).abs() < 0.01, "{disk}");
        let ii = charging_energy(
            14.0,
            ChargingEstimator::InteractionIntegral { l0_nm: 11.64 },
        )
        .unwrap();
        let ii2 = charging_energy(
            28.0,
            ChargingEstimator::InteractionIntegral { l0_nm: 11.64 },
        )
        .unwrap();
        assert_relative_eq!(ii2, ii / 2.0, max_relative = 1e-14);
        let disk2 = charging_energy(
            28.0,
            ChargingEstimator::DiskSelfCapacitance { radius_nm: 35.0 },
        )
        .unwrap();
        assert_relative_eq!(disk2, disk / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn lever_arm_synthetic() {
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|k| (2.5 + 0.065 * k as f64, 10.0 - 12.5 * k as f64))
            .collect();
        assert_relative_eq!(lever_arm(&pts).unwrap(), 5.2, max_relative = 1e-9);
        let unity: Vec<(f64, f64)> = (0..3).map(|k| (k as f64 * 1e-3, -(k as f64))).collect();
        assert_relative_eq!(lever_arm(&unity).unwrap(), 1.0, max_relative = 1e-9);
        assert!(lever_arm(&pts[..1]).is_err());
    }
}
