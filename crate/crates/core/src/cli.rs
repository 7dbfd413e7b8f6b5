//! Command-line interface: `solve`, `sweep`, `characterize`, `cycle` and
//! `zeeman` subcommands.
//!
//! Exit status: 0 success, 2 configuration error, 3 convergence failure,
//! 4 bias-search bracket failure, 1 anything else.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::cycle::{run_monte_carlo_with_events, write_event_csv};
use crate::electrostatics::{bias_sweep, write_band_profile_csv, PoissonSolver};
use crate::error::{Error, Result};
use crate::mesh::generate_mesh;
use crate::qdot::{find_alignment_bias, find_onset_bias, lever_arm, DotSpectrum};
use crate::report::{
    to_json, write_sweep_csv, CycleReport, DotReport, SolveSummary, SweepRow, ZeemanReport,
};

pub const CONFIG_ENV: &str = "NMISC_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "nmisc",
    version,
    about = "Nanoscale MIS single-photon source simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML). Defaults are used when absent.
    #[arg(env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Overrides `output_dir` from the configuration.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one gate bias; writes the band profile CSV and a JSON summary.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, visible_alias = "vgate-v", allow_hyphen_values = true)]
        vgate: f64,
    },
    /// Bias sweep table.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, visible_alias = "from-v", allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, visible_alias = "to-v", allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Alignment and onset biases, confinement fit, lever arm, charging energy.
    Characterize {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo of the pulsed emission cycle.
    Cycle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        pulses: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the per-pulse event log.
        #[arg(long)]
        events: bool,
    },
    /// Zeeman splitting and polarization selection rules.
    Zeeman {
        #[command(flatten)]
        common: Common,
        #[arg(long, visible_alias = "field-t")]
        field: Option<f64>,
        /// Skip the electrostatic solve used for the photon-energy estimate.
        #[arg(long)]
        no_dot: bool,
    },
}

/// Parses arguments, runs the command and returns the exit status.
/// Errors are reported on standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            if !path.is_file() {
                return Err(Error::Config(format!(
                    "config file {} not found",
                    path.display()
                )));
            }
            RunConfig::load(path)?
        }
        None => RunConfig::default(),
    };
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn output_file(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg.output_dir.join(name))
}

fn write_json(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    print!("{text}");
    Ok(())
}

fn solver(cfg: &RunConfig) -> Result<PoissonSolver> {
    let mesh = Arc::new(generate_mesh(&cfg.device, &cfg.mesh)?);
    PoissonSolver::new(mesh, cfg.solver.clone())
}

/// Runs one subcommand; returns the exit status for non-fatal outcomes.
pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Solve { common, vgate } => {
            let cfg = load_config(&common)?;
            let field = solver(&cfg)?.solve(vgate, None)?;
            let csv_name = format!("band_profile_{vgate:+.6}V.csv");
            write_band_profile_csv(
                &field,
                BufWriter::new(fs::File::create(output_file(&cfg, &csv_name)?)?),
            )?;
            let summary = SolveSummary::new(&field, Some(csv_name));
            write_json(
                &output_file(&cfg, "solve_summary.json")?,
                &to_json(&summary)?,
            )?;
            if field.converged {
                Ok(0)
            } else {
                eprintln!(
                    "error: Newton iteration did not converge (residual {:.3e})",
                    field.residual_norm
                );
                Ok(Error::NotConverged {
                    residual: field.residual_norm,
                }
                .exit_code())
            }
        }
        Command::Sweep {
            common,
            from,
            to,
            steps,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.sweep.from_v = from.unwrap_or(cfg.sweep.from_v);
            cfg.sweep.to_v = to.unwrap_or(cfg.sweep.to_v);
            cfg.sweep.steps = steps.unwrap_or(cfg.sweep.steps);
            let biases = cfg.sweep.biases()?;
            let fields = bias_sweep(&solver(&cfg)?, &biases)?;
            let rows: Vec<SweepRow> = fields.iter().map(SweepRow::new).collect();
            let path = output_file(&cfg, "sweep.csv")?;
            write_sweep_csv(&rows, BufWriter::new(fs::File::create(&path)?))?;
            write_sweep_csv(&rows, std::io::stdout())?;
            Ok(0)
        }
        Command::Characterize { common } => {
            let cfg = load_config(&common)?;
            let (report, code) = characterize(&cfg)?;
            write_json(&output_file(&cfg, "dot_report.json")?, &to_json(&report)?)?;
            Ok(code)
        }
        Command::Cycle {
            common,
            pulses,
            seed,
            events,
        } => {
            let cfg = load_config(&common)?;
            if pulses == 0 {
                return Err(Error::Config("--pulses must be at least 1".into()));
            }
            let seed = seed.unwrap_or(cfg.seed);
            let (stats, log) = run_monte_carlo_with_events(&cfg.protocol, pulses, seed)?;
            if events {
                write_event_csv(
                    &log,
                    BufWriter::new(fs::File::create(output_file(&cfg, "cycle_events.csv")?)?),
                )?;
            }
            let report = CycleReport::new(&cfg.protocol, stats);
            write_json(&output_file(&cfg, "cycle_stats.json")?, &to_json(&report)?)?;
            Ok(0)
        }
        Command::Zeeman {
            common,
            field,
            no_dot,
        } => {
            let mut cfg = load_config(&common)?;
            if let Some(b) = field {
                cfg.zeeman.b_field_z = b;
            }
            cfg.zeeman.validate()?;
            let line = if no_dot {
                Err("not computed (--no-dot)".to_string())
            } else {
                zero_field_line(&cfg).map_err(|e| format!("not computed: {e}"))
            };
            let report = ZeemanReport::new(&cfg.zeeman, line)?;
            write_json(&output_file(&cfg, "zeeman.json")?, &to_json(&report)?)?;
            Ok(0)
        }
    }
}

fn zero_field_line(cfg: &RunConfig) -> Result<f64> {
    let s = solver(cfg)?;
    let [lo, hi] = cfg.search.bracket_v;
    let align = find_alignment_bias(&s, (lo, hi), cfg.search.tolerance_mev)?;
    let spectrum = DotSpectrum::from_field(&align.field, 1)?;
    Ok(1e3 * cfg.device.well_material().bandgap_ev + spectrum.hbar_omega0)
}

/// Full dot characterization. Search failures are recorded in the report
/// and turn the exit status into the bracket or convergence code.
pub fn characterize(cfg: &RunConfig) -> Result<(DotReport, i32)> {
    let s = solver(cfg)?;
    let [lo, hi] = cfg.search.bracket_v;
    let tol = cfg.search.tolerance_mev;
    let mut report = DotReport::default();
    let mut code = 0;
    let mut note = |report: &mut DotReport, key: &str, e: &Error| {
        report.errors.insert(key.to_string(), e.to_string());
        if code == 0 {
            code = e.exit_code();
        }
    };

    let align = match find_alignment_bias(&s, (lo, hi), tol) {
        Ok(a) => Some(a),
        Err(e) => {
            note(&mut report, "v_align", &e);
            None
        }
    };
    if let Some(a) = &align {
        report.v_align = Some(a.bias);
        match DotSpectrum::from_field(&a.field, cfg.search.max_shell) {
            Ok(sp) => report.set_spectrum(&sp),
            Err(e) => note(&mut report, "spectrum", &e),
        }
    }
    let onset_lo = align.as_ref().map_or(lo, |a| a.bias);
    let onset = match find_onset_bias(&s, (onset_lo, hi), tol) {
        Ok(o) => Some(o),
        Err(e) => {
            note(&mut report, "v_onset", &e);
            None
        }
    };
    report.v_onset = onset.as_ref().map(|o| o.bias);

    if let (Some(a), Some(o)) = (&align, &onset) {
        let n = cfg.search.lever_points;
        let biases: Vec<f64> = (0..n)
            .map(|k| a.bias + (o.bias - a.bias) * k as f64 / (n - 1) as f64)
            .collect();
        let result = bias_sweep(&s, &biases).and_then(|fields| {
            fields
                .iter()
                .map(|f| {
                    DotSpectrum::from_field(f, 1)
                        .map(|sp| [f.gate_bias, sp.ground_state_energy_absolute])
                })
                .collect::<Result<Vec<_>>>()
        });
        match result.and_then(|pts| {
            let pairs: Vec<(f64, f64)> = pts.iter().map(|p| (p[0], p[1])).collect();
            lever_arm(&pairs).map(|l| (l, pts))
        }) {
            Ok((l, pts)) => {
                report.lever_arm = Some(l);
                report.lever_arm_points = pts;
            }
            Err(e) => note(&mut report, "lever_arm", &e),
        }
    } else {
        report.errors.insert(
            "lever_arm".into(),
            "needs both alignment and onset biases".into(),
        );
    }
    Ok((report, code))
}
