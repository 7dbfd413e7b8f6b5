//! Pulsed single-photon operating cycle: load (T1), ramp (T2) and
//! emission (T3) phases, simulated by kinetic Monte Carlo and in closed form.
//!
//! Times are in ns, rates in 1/ns, repetition rates in MHz.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_070_401;

/// Pulses simulated per independent trajectory.
pub const TRAJECTORY_PULSES: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PulseProtocol {
    pub t1_ns: f64,
    pub t2_ns: f64,
    pub t3_ns: f64,
    pub tau_tunnel_ns: f64,
    pub tau_rad_ns: f64,
    /// `inf` disables non-radiative recombination.
    pub tau_nonrad_ns: f64,
    pub early_emission_enabled: bool,
    /// Fraction of the radiative rate active during the load phase.
    pub early_emission_scale: f64,
}

impl Default for PulseProtocol {
    fn default() -> Self {
        Self {
            t1_ns: 10.0,
            t2_ns: 0.1,
            t3_ns: 10.0,
            tau_tunnel_ns: 1.0,
            tau_rad_ns: 1.0,
            tau_nonrad_ns: f64::INFINITY,
            early_emission_enabled: false,
            early_emission_scale: 0.0,
        }
    }
}

impl PulseProtocol {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t1_ns", self.t1_ns),
            ("t3_ns", self.t3_ns),
            ("tau_tunnel_ns", self.tau_tunnel_ns),
            ("tau_rad_ns", self.tau_rad_ns),
            ("tau_nonrad_ns", self.tau_nonrad_ns),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("t1_ns", self.t1_ns),
            ("t3_ns", self.t3_ns),
            ("tau_rad_ns", self.tau_rad_ns),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if !(self.t2_ns >= 0.0 && self.t2_ns.is_finite()) {
            return Err(Error::Config(format!(
                "t2_ns must be >= 0, got {}",
                self.t2_ns
            )));
        }
        if !(0.0..=1.0).contains(&self.early_emission_scale) {
            return Err(Error::Config(
                "early_emission_scale must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn period_ns(&self) -> f64 {
        self.t1_ns + self.t2_ns + self.t3_ns
    }

    fn recombination_rate(&self) -> f64 {
        1.0 / self.tau_rad_ns + 1.0 / self.tau_nonrad_ns
    }

    fn early_rate(&self) -> f64 {
        if self.early_emission_enabled {
            self.early_emission_scale / self.tau_rad_ns
        } else {
            0.0
        }
    }
}

/// `1/(t1 + t2 + t3)` in MHz.
pub fn repetition_rate(protocol: &PulseProtocol) -> f64 {
    1e3 / protocol.period_ns()
}

/// Radiative branching fraction `τ_non/(τ_non + τ_rad)`.
pub fn conversion_ratio(tau_rad_ns: f64, tau_nonrad_ns: f64) -> f64 {
    if tau_nonrad_ns.is_infinite() {
        1.0
    } else {
        tau_nonrad_ns / (tau_nonrad_ns + tau_rad_ns)
    }
}

/// Probability that an initially empty cycle loads and emits within T3.
/// The early-emission channel and carryover are not included.
pub fn analytic_efficiency(protocol: &PulseProtocol) -> f64 {
    let load = -(-protocol.t1_ns / protocol.tau_tunnel_ns).exp_m1();
    let decay = -(-protocol.t3_ns * protocol.recombination_rate()).exp_m1();
    load * conversion_ratio(protocol.tau_rad_ns, protocol.tau_nonrad_ns) * decay
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionPhase {
    Load,
    Ramp,
    Reset,
}

impl EmissionPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Load => "load",
            Self::Ramp => "ramp",
            Self::Reset => "reset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleOutcome {
    /// An electron tunnelled in during this cycle's load phase.
    pub electron_loaded: bool,
    pub photon_emitted: bool,
    /// ns from the start of the cycle.
    pub emission_time: Option<f64>,
    pub emission_phase: Option<EmissionPhase>,
    /// Recombined without a photon.
    pub nonradiative_loss: bool,
    /// Still occupied at the end of the cycle.
    pub electron_carried_over: bool,
}

fn exp_time(u: f64, rate: f64) -> f64 {
    if rate > 0.0 {
        -(-u).ln_1p() / rate
    } else {
        f64::INFINITY
    }
}

/// One cycle. Exactly four uniforms are drawn whatever happens, so
/// trajectories with different protocols stay aligned draw by draw.
pub fn simulate_cycle<R: Rng + ?Sized>(
    protocol: &PulseProtocol,
    occupied_in: bool,
    rng: &mut R,
) -> CycleOutcome {
    let u: [f64; 4] = [rng.random(), rng.random(), rng.random(), rng.random()];
    let mut out = CycleOutcome {
        electron_loaded: false,
        photon_emitted: false,
        emission_time: None,
        emission_phase: None,
        nonradiative_loss: false,
        electron_carried_over: false,
    };

    let mut occupied_at = if occupied_in { Some(0.0) } else { None };
    if occupied_at.is_none() {
        let t_in = exp_time(u[0], 1.0 / protocol.tau_tunnel_ns);
        if t_in <= protocol.t1_ns {
            occupied_at = Some(t_in);
            out.electron_loaded = true;
        }
    }
    let Some(t_occ) = occupied_at else {
        return out;
    };

    let t_early = t_occ + exp_time(u[1], protocol.early_rate());
    if t_early <= protocol.t1_ns {
        out.photon_emitted = true;
        out.emission_time = Some(t_early);
        out.emission_phase = Some(EmissionPhase::Load);
        return out;
    }

    let t_rec = exp_time(u[2], protocol.recombination_rate());
    if t_rec <= protocol.t3_ns {
        if u[3] < conversion_ratio(protocol.tau_rad_ns, protocol.tau_nonrad_ns) {
            out.photon_emitted = true;
            out.emission_time = Some(protocol.t1_ns + protocol.t2_ns + t_rec);
            out.emission_phase = Some(EmissionPhase::Reset);
        } else {
            out.nonradiative_loss = true;
        }
    } else {
        out.electron_carried_over = true;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleStats {
    pub pulses: u64,
    pub photons: u64,
    pub efficiency: f64,
    pub p0: f64,
    pub p1: f64,
    pub p_multi: f64,
    /// ns from cycle start; `None` without photons.
    #[serde(rename = "mean_emission_time_ns")]
    pub mean_emission_time: Option<f64>,
    #[serde(rename = "repetition_rate_MHz")]
    pub repetition_rate: f64,
    pub rng_seed: u64,
    pub analytic_efficiency: f64,
    /// Binomial standard deviation of `efficiency` at `analytic_efficiency`.
    pub binomial_sigma: f64,
    pub electrons_loaded: u64,
    pub nonradiative_losses: u64,
    /// Cycles that ended with the electron still in the dot.
    pub carryover_cycles: u64,
    /// Electrons left in the dot when each trajectory ended.
    pub final_occupancy: u64,
}

impl CycleStats {
    /// `loaded = photons + non-radiative losses + final occupancy`.
    pub fn conserves_electrons(&self) -> bool {
        self.electrons_loaded == self.photons + self.nonradiative_losses + self.final_occupancy
    }
}

/// Per-pulse record for the event log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseEvent {
    pub pulse_index: u64,
    pub outcome: CycleOutcome,
}

pub const EVENT_HEADER: [&str; 5] = [
    "pulse_index",
    "loaded",
    "emitted",
    "emission_time_ns",
    "phase",
];

pub fn write_event_csv<W: Write>(events: &[PulseEvent], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(EVENT_HEADER)?;
    for e in events {
        w.write_record([
            e.pulse_index.to_string(),
            (e.outcome.electron_loaded as u8).to_string(),
            (e.outcome.photon_emitted as u8).to_string(),
            e.outcome
                .emission_time
                .map(|t| format!("{t:.12e}"))
                .unwrap_or_default(),
            e.outcome
                .emission_phase
                .map(|p| p.as_str().to_string())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Random stream for one trajectory of a run.
pub fn trajectory_rng(seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory);
    rng
}

/// Monte Carlo over `pulses` cycles, split into independent trajectories of
/// [`TRAJECTORY_PULSES`] cycles that each start with an empty dot.
pub fn run_monte_carlo(protocol: &PulseProtocol, pulses: u64, seed: u64) -> Result<CycleStats> {
    run(protocol, pulses, seed, None)
}

/// [`run_monte_carlo`] that also returns the per-pulse outcomes.
pub fn run_monte_carlo_with_events(
    protocol: &PulseProtocol,
    pulses: u64,
    seed: u64,
) -> Result<(CycleStats, Vec<PulseEvent>)> {
    let mut events = Vec::with_capacity(pulses as usize);
    let stats = run(protocol, pulses, seed, Some(&mut events))?;
    Ok((stats, events))
}

fn run(
    protocol: &PulseProtocol,
    pulses: u64,
    seed: u64,
    mut events: Option<&mut Vec<PulseEvent>>,
) -> Result<CycleStats> {
    protocol.validate()?;
    if pulses == 0 {
        return Err(Error::Config("pulses must be at least 1".into()));
    }
    let (mut photons, mut loaded, mut nonrad, mut carry, mut final_occ) =
        (0u64, 0u64, 0u64, 0u64, 0u64);
    let mut time_sum = 0.0;
    let trajectories = pulses.div_ceil(TRAJECTORY_PULSES);
    for traj in 0..trajectories {
        let mut rng = trajectory_rng(seed, traj);
        let start = traj * TRAJECTORY_PULSES;
        let end = (start + TRAJECTORY_PULSES).min(pulses);
        let mut occupied = false;
        for pulse_index in start..end {
            let outcome = simulate_cycle(protocol, occupied, &mut rng);
            loaded += outcome.electron_loaded as u64;
            nonrad += outcome.nonradiative_loss as u64;
            carry += outcome.electron_carried_over as u64;
            if let Some(t) = outcome.emission_time {
                photons += 1;
                time_sum += t;
            }
            occupied = outcome.electron_carried_over;
            if let Some(ev) = events.as_deref_mut() {
                ev.push(PulseEvent {
                    pulse_index,
                    outcome,
                });
            }
        }
        final_occ += occupied as u64;
    }
    let efficiency = photons as f64 / pulses as f64;
    let analytic = analytic_efficiency(protocol);
    Ok(CycleStats {
        pulses,
        photons,
        efficiency,
        p0: (pulses - photons) as f64 / pulses as f64,
        p1: efficiency,
        p_multi: 0.0,
        mean_emission_time: (photons > 0).then(|| time_sum / photons as f64),
        repetition_rate: repetition_rate(protocol),
        rng_seed: seed,
        analytic_efficiency: analytic,
        binomial_sigma: (analytic * (1.0 - analytic) / pulses as f64).sqrt(),
        electrons_loaded: loaded,
        nonradiative_losses: nonrad,
        carryover_cycles: carry,
        final_occupancy: final_occ,
    })
}
