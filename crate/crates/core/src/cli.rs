//! Command-line frontend.
//!
//! Every subcommand writes CSV to stdout (or `--output`) and echoes its
//! resolved parameters to stderr as TOML comment lines.
//!
//! | exit code | meaning |
//! |-----------|---------|
//! | 0 | success |
//! | 1 | `validate` ran but a check failed |
//! | 2 | bad arguments, configuration or world file |
//! | 3 | numerical failure or non-convergence |
//! | 4 | internal invariant violation |
//! | 5 | I/O failure |

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::abm::{run_experiment, ExperimentOptions};
use crate::dispersion::{
    contamination_threshold_time, BackgroundField, DispersionParams, Mask, PathogenSurfaceConstants,
    ProximityField,
};
use crate::error::{Error, Result};
use crate::exposure::{
    combined_inhalation_probability, direct_inhalation_probability, infection_probability_inhalation,
    infection_probability_surface, inhaled_count, ExposureParams,
};
use crate::pde::{compare, OuterBoundary, RadialGrid, RadialSolver, STEADY_MAX_DECAY_TIMES, STEADY_TOLERANCE};
use crate::scenario::{self, ExperimentConfig};

pub const EXIT_CHECKS_FAILED: i32 = 1;

const PRESET_RATES: [f64; 3] = [1.5, 5.0, 66.0];
const SWEEP_TAUS: [f64; 5] = [25.0, 50.0, 75.0, 100.0, 125.0];
const SWEEP_DIFFUSION: [f64; 3] = [0.025, 0.05, 0.1];

const L2_TOLERANCE: f64 = 0.02;
const MASS_TOLERANCE: f64 = 0.02;
const HALF_LIFE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "airisk", version, about = "Indoor airborne infection risk calculators and workplace simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady droplet density around one emitter.
    Concentration(ConcentrationArgs),
    /// Infection probability against exposure time.
    Risk(RiskArgs),
    /// Finite-volume solution against the closed-form field.
    Validate(ValidateArgs),
    /// Agent-based workplace simulation over a parameter sweep.
    Abm(AbmArgs),
    /// Emission time until a surface is contaminated.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskArg {
    None,
    Ordinary,
    Dedicated,
}

impl From<MaskArg> for Mask {
    fn from(m: MaskArg) -> Self {
        match m {
            MaskArg::None => Mask::None,
            MaskArg::Ordinary => Mask::Ordinary,
            MaskArg::Dedicated => Mask::Dedicated,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct GeometryArgs {
    /// Control radius r0, m.
    #[arg(long, default_value_t = 0.62)]
    pub r0: f64,
    /// Validity radius d_max, m.
    #[arg(long, default_value_t = 2.6)]
    pub d_max: f64,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ConcentrationArgs {
    /// Source rates, droplets/s.
    #[arg(long, value_delimiter = ',', default_values_t = [66.0])]
    pub rate: Vec<f64>,
    /// Use the breathing, speaking and coughing rates 1.5, 5, 66.
    #[arg(long)]
    pub sweep_rate: bool,
    /// Decay constants, s.
    #[arg(long, value_delimiter = ',', default_values_t = [50.0])]
    pub tau: Vec<f64>,
    /// Use decay constants 25, 50, 75, 100, 125 s.
    #[arg(long)]
    pub sweep_tau: bool,
    /// Diffusion coefficients, m²/s.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05])]
    pub diffusion: Vec<f64>,
    /// Use diffusion coefficients 0.025, 0.05, 0.1 m²/s.
    #[arg(long)]
    pub sweep_diffusion: bool,
    #[arg(long, value_enum, default_value_t = MaskArg::None)]
    pub mask: MaskArg,
    /// Evaluation distances, m. Defaults to an even grid on [0, --r-max].
    #[arg(long, value_delimiter = ',')]
    pub distance: Vec<f64>,
    #[arg(long, default_value_t = 3.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMode {
    /// Proximity of one emitter at --distance.
    Direct,
    /// Well-mixed compartment air of volume --volume.
    Background,
    /// Proximity and compartment air together.
    Combined,
    /// Contact with a surface the emitter occupied for --t1 hours.
    Surface,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RiskArgs {
    #[arg(long, value_enum, default_value_t = RiskMode::Direct)]
    pub mode: RiskMode,
    /// Source rates, droplets/s.
    #[arg(long, value_delimiter = ',', default_values_t = PRESET_RATES)]
    pub rate: Vec<f64>,
    #[arg(long, value_enum, default_value_t = MaskArg::None)]
    pub mask: MaskArg,
    /// Infectious doses N_b, droplets.
    #[arg(long, value_delimiter = ',', default_values_t = [100.0])]
    pub infectious_dose: Vec<f64>,
    /// Infection probability at one infectious dose.
    #[arg(long, default_value_t = 0.1)]
    pub dose_probability: f64,
    /// Breathing rate Q, m³/s.
    #[arg(long, default_value_t = 3.16e-4)]
    pub breathing_rate: f64,
    /// Distance to the emitter, m.
    #[arg(long, default_value_t = 1.0)]
    pub distance: f64,
    /// Proximity decay constant τ, s.
    #[arg(long, default_value_t = 50.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.05)]
    pub diffusion: f64,
    /// Background decay constant τ', s.
    #[arg(long, default_value_t = 125.0)]
    pub tau_background: f64,
    /// Compartment volume, m³.
    #[arg(long, default_value_t = 100.0)]
    pub volume: f64,
    /// Time the emitter spent at the surface before contact, hours.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 4.0])]
    pub t1: Vec<f64>,
    /// Surface area, m².
    #[arg(long, default_value_t = 2.25)]
    pub area: f64,
    /// Hand-to-face transfer probability per contact.
    #[arg(long, default_value_t = 1e-4)]
    pub contact_probability: f64,
    /// Contacts per second.
    #[arg(long, default_value_t = 1.0 / 60.0)]
    pub contact_frequency: f64,
    /// Exposure horizon, minutes.
    #[arg(long, default_value_t = 60.0)]
    pub t_max: f64,
    /// Output spacing, minutes.
    #[arg(long, default_value_t = 1.0)]
    pub t_step: f64,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryArg {
    Recirculating,
    Absorbing,
}

impl From<BoundaryArg> for OuterBoundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Recirculating => OuterBoundary::Recirculating,
            BoundaryArg::Absorbing => OuterBoundary::Absorbing,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct ValidateArgs {
    /// Radial cells on [0, d_max].
    #[arg(long, default_value_t = 512)]
    pub grid_cells: usize,
    /// Longest simulated time allowed to reach steady state, s.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Source rate, droplets/s.
    #[arg(long, default_value_t = 66.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 50.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.05)]
    pub diffusion: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Recirculating)]
    pub boundary: BoundaryArg,
    /// Also solve at a half and a quarter of --grid-cells and require the
    /// error to fall with refinement.
    #[arg(long)]
    pub refine: bool,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct AbmArgs {
    /// Experiment TOML. Omitted: all defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write per-point infection event logs.
    #[arg(long)]
    pub event_log: bool,
    /// Worker threads. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides `output.directory`.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ThresholdArgs {
    /// Surface areas, m².
    #[arg(long, value_delimiter = ',', default_values_t = [2.25, 1.0])]
    pub area: Vec<f64>,
    /// Source rates, droplets/s.
    #[arg(long, value_delimiter = ',', default_values_t = [66.0, 5.0])]
    pub rate: Vec<f64>,
    /// Genome copies per large droplet.
    #[arg(long, default_value_t = 10.0)]
    pub nu: f64,
    /// Contamination threshold, genome copies/m².
    #[arg(long, default_value_t = 1e4)]
    pub gc_thres: f64,
    /// Fraction of emitted droplets that sediment.
    #[arg(long, default_value_t = crate::dispersion::LARGE_DROPLET_FRACTION)]
    pub large_fraction: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ChecksFailed,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, stdout, stderr) {
        Ok(Status::Success) => 0,
        Ok(Status::ChecksFailed) => EXIT_CHECKS_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Status> {
    match cli.command {
        Command::Concentration(a) => concentration(&a, stdout, stderr),
        Command::Risk(a) => risk(&a, stdout, stderr),
        Command::Validate(a) => validate(&a, stdout, stderr),
        Command::Abm(a) => abm(&a, stderr),
        Command::Threshold(a) => threshold(&a, stdout, stderr),
    }
}

fn echo<T: Serialize>(stderr: &mut dyn Write, resolved: &T) -> Result<()> {
    let text = toml::to_string(resolved).map_err(|e| Error::config("echo", e.to_string()))?;
    let mut block = String::from("# resolved parameters\n");
    for line in text.lines() {
        block.push('#');
        if !line.is_empty() {
            block.push(' ');
            block.push_str(line);
        }
        block.push('\n');
    }
    stderr
        .write_all(block.as_bytes())
        .map_err(|e| Error::io("<stderr>", e))
}

fn emit_csv(output: &Option<PathBuf>, stdout: &mut dyn Write, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let label = output
        .as_deref()
        .unwrap_or_else(|| Path::new("<stdout>"))
        .to_path_buf();
    let fail = |e: csv::Error| Error::io(&label, io::Error::other(e.to_string()));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(&label, io::Error::other(e.to_string())))?;
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => stdout.write_all(&bytes).map_err(|e| Error::io(&label, e)),
    }
}

fn dispersion(diffusion: f64, tau: f64, geometry: &GeometryArgs) -> Result<DispersionParams> {
    let p = DispersionParams {
        diffusion_coefficient: diffusion,
        decay_constant_direct: tau,
        control_radius: geometry.r0,
        validity_radius: geometry.d_max,
        ..DispersionParams::default()
    };
    p.validate()?;
    Ok(p)
}

fn or_sweep(values: &[f64], sweep: bool, preset: &[f64]) -> Vec<f64> {
    if sweep {
        preset.to_vec()
    } else {
        values.to_vec()
    }
}

#[derive(Serialize)]
struct ConcentrationEcho {
    rate: Vec<f64>,
    tau: Vec<f64>,
    diffusion: Vec<f64>,
    mask: MaskArg,
    mask_factor: f64,
    control_radius: f64,
    validity_radius: f64,
    distances: Vec<f64>,
}

fn concentration(a: &ConcentrationArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Status> {
    let rates = or_sweep(&a.rate, a.sweep_rate, &PRESET_RATES);
    let taus = or_sweep(&a.tau, a.sweep_tau, &SWEEP_TAUS);
    let diffusions = or_sweep(&a.diffusion, a.sweep_diffusion, &SWEEP_DIFFUSION);
    let distances = if a.distance.is_empty() {
        if a.points < 2 || !(a.r_max > 0.0) {
            return Err(Error::config("points", "need at least 2 points on a positive --r-max"));
        }
        (0..a.points)
            .map(|i| a.r_max * i as f64 / (a.points - 1) as f64)
            .collect()
    } else {
        a.distance.clone()
    };
    if let Some(r) = distances.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::config("distance", format!("must be >= 0, got {r}")));
    }
    let mask = Mask::from(a.mask);
    echo(
        stderr,
        &ConcentrationEcho {
            rate: rates.clone(),
            tau: taus.clone(),
            diffusion: diffusions.clone(),
            mask: a.mask,
            mask_factor: mask.factor(),
            control_radius: a.geometry.r0,
            validity_radius: a.geometry.d_max,
            distances: distances.clone(),
        },
    )?;
    let mut rows = Vec::new();
    for &s in &rates {
        for &tau in &taus {
            for &d in &diffusions {
                let field = ProximityField::new(dispersion(d, tau, &a.geometry)?, s * mask.factor())?;
                for &r in &distances {
                    rows.push(vec![
                        s.to_string(),
                        tau.to_string(),
                        d.to_string(),
                        r.to_string(),
                        field.concentration(r).to_string(),
                    ]);
                }
            }
        }
    }
    emit_csv(
        &a.output,
        stdout,
        &["rate_per_s", "tau_s", "diffusion_m2_per_s", "r_m", "c_droplets_per_m3"],
        rows,
    )?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct RiskEcho<'a> {
    mode: RiskMode,
    rate: &'a [f64],
    mask: MaskArg,
    infectious_dose: &'a [f64],
    dose_probability: f64,
    breathing_rate: f64,
    distance: f64,
    tau: f64,
    diffusion: f64,
    tau_background: f64,
    volume: f64,
    t1_hours: &'a [f64],
    area: f64,
    contact_probability: f64,
    contact_frequency: f64,
    large_droplet_fraction: f64,
    genomes_per_droplet: f64,
    contamination_threshold: f64,
    control_radius: f64,
    validity_radius: f64,
    t_max_minutes: f64,
    t_step_minutes: f64,
}

fn risk(a: &RiskArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Status> {
    if !(a.t_step > 0.0 && a.t_max >= 0.0) {
        return Err(Error::config("t_step", "need --t-step > 0 and --t-max >= 0"));
    }
    let pathogen = PathogenSurfaceConstants::default();
    let w = crate::dispersion::LARGE_DROPLET_FRACTION;
    echo(
        stderr,
        &RiskEcho {
            mode: a.mode,
            rate: &a.rate,
            mask: a.mask,
            infectious_dose: &a.infectious_dose,
            dose_probability: a.dose_probability,
            breathing_rate: a.breathing_rate,
            distance: a.distance,
            tau: a.tau,
            diffusion: a.diffusion,
            tau_background: a.tau_background,
            volume: a.volume,
            t1_hours: &a.t1,
            area: a.area,
            contact_probability: a.contact_probability,
            contact_frequency: a.contact_frequency,
            large_droplet_fraction: w,
            genomes_per_droplet: pathogen.genomes_per_droplet,
            contamination_threshold: pathogen.contamination_threshold,
            control_radius: a.geometry.r0,
            validity_radius: a.geometry.d_max,
            t_max_minutes: a.t_max,
            t_step_minutes: a.t_step,
        },
    )?;
    let steps = (a.t_max / a.t_step + 1e-9).floor() as usize;
    let minutes: Vec<f64> = (0..=steps).map(|i| i as f64 * a.t_step).collect();
    let params = dispersion(a.diffusion, a.tau, &a.geometry)?;
    let mask = Mask::from(a.mask);
    let mut rows = Vec::new();
    for &s in &a.rate {
        let rate = s * mask.factor();
        for &n_b in &a.infectious_dose {
            let exposure = ExposureParams {
                breathing_rate: a.breathing_rate,
                infectious_dose: n_b,
                dose_probability: a.dose_probability,
                contact_probability: a.contact_probability,
                contact_frequency: a.contact_frequency,
            };
            exposure.validate()?;
            let mut push = |label: String, p: &dyn Fn(f64) -> f64| {
                for &m in &minutes {
                    rows.push(vec![label.clone(), m.to_string(), p(m * 60.0).to_string()]);
                }
            };
            match a.mode {
                RiskMode::Direct => {
                    let field = ProximityField::new(params, rate)?;
                    push(
                        format!("s={s};N_b={n_b};r={}", a.distance),
                        &|t| direct_inhalation_probability(a.distance, &field, &exposure, t),
                    );
                }
                RiskMode::Background => {
                    let bg = BackgroundField::new(vec![rate], a.tau_background, a.volume)?;
                    push(format!("s={s};N_b={n_b};V={}", a.volume), &|t| {
                        infection_probability_inhalation(
                            inhaled_count(bg.concentration(), exposure.breathing_rate, t),
                            &exposure,
                        )
                    });
                }
                RiskMode::Combined => {
                    let field = ProximityField::new(params, rate)?;
                    let bg = BackgroundField::new(vec![rate], a.tau_background, a.volume)?;
                    push(
                        format!("s={s};N_b={n_b};r={};V={}", a.distance, a.volume),
                        &|t| combined_inhalation_probability(a.distance, &field, &bg, &exposure, t),
                    );
                }
                RiskMode::Surface => {
                    let t_thres = contamination_threshold_time(
                        a.area,
                        pathogen.contamination_threshold,
                        w,
                        rate,
                        pathogen.genomes_per_droplet,
                    )?;
                    for &t1 in &a.t1 {
                        if !(t1 >= 0.0) {
                            return Err(Error::config("t1", format!("must be >= 0, got {t1}")));
                        }
                        push(format!("s={s};t1_h={t1};A={}", a.area), &|t| {
                            infection_probability_surface(t, t1 * 3600.0, t_thres, &exposure)
                        });
                    }
                }
            }
        }
    }
    emit_csv(&a.output, stdout, &["scenario", "t_minutes", "probability"], rows)?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct ValidateEcho {
    grid_cells: usize,
    rate: f64,
    dispersion: DispersionParams,
    boundary: BoundaryArg,
    max_simulated_time: f64,
    steady_tolerance: f64,
    refine: bool,
}

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn validate(a: &ValidateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Status> {
    let params = dispersion(a.diffusion, a.tau, &a.geometry)?;
    let max_decay_times = match a.t_end {
        Some(t) if !(t > 0.0) => return Err(Error::config("t_end", format!("must be > 0, got {t}"))),
        Some(t) => ((t / params.decay_constant_direct).ceil() as usize).max(1),
        None => STEADY_MAX_DECAY_TIMES,
    };
    echo(
        stderr,
        &ValidateEcho {
            grid_cells: a.grid_cells,
            rate: a.rate,
            dispersion: params,
            boundary: a.boundary,
            max_simulated_time: max_decay_times as f64 * params.decay_constant_direct,
            steady_tolerance: STEADY_TOLERANCE,
            refine: a.refine,
        },
    )?;
    let field = ProximityField::new(params, a.rate)?;
    let solve = |cells: usize| -> Result<(RadialSolver, crate::pde::PdeSolution)> {
        let grid = RadialGrid::for_params(&params, cells)?;
        let mut solver = RadialSolver::new(params, a.rate, grid)?.with_boundary(a.boundary.into());
        let solution = solver.run_to_steady(STEADY_TOLERANCE, max_decay_times)?;
        Ok((solver, solution))
    };

    let mut checks = Vec::new();
    if a.refine {
        let coarse: Vec<usize> = [a.grid_cells / 4, a.grid_cells / 2]
            .into_iter()
            .filter(|&n| n >= crate::pde::MIN_CELLS)
            .collect();
        let mut errors = Vec::new();
        for &n in &coarse {
            let (_, sol) = solve(n)?;
            errors.push((n, compare(&sol, &field)?.l2_relative));
        }
        let (_, sol) = solve(a.grid_cells)?;
        errors.push((a.grid_cells, compare(&sol, &field)?.l2_relative));
        let monotone = errors.windows(2).all(|w| w[1].1 < w[0].1 || w[1].1 == 0.0);
        checks.push(Check {
            name: "refinement".into(),
            pass: monotone && errors.len() >= 2,
            detail: errors
                .iter()
                .map(|(n, e)| format!("{n}:{e:.3e}"))
                .collect::<Vec<_>>()
                .join(" "),
        });
    }

    let (mut solver, solution) = solve(a.grid_cells)?;
    let comparison = compare(&solution, &field)?;
    checks.push(Check {
        name: "profile_l2".into(),
        pass: comparison.l2_relative < L2_TOLERANCE,
        detail: format!("l2_relative={:.3e} (< {L2_TOLERANCE})", comparison.l2_relative),
    });

    let expected_mass = a.rate * params.decay_constant_direct;
    let mass = solution.total_mass();
    let mass_ok = if expected_mass > 0.0 {
        (mass - expected_mass).abs() / expected_mass < MASS_TOLERANCE
    } else {
        mass == 0.0
    };
    checks.push(Check {
        name: "steady_mass".into(),
        pass: mass_ok,
        detail: format!("mass={mass} expected={expected_mass} (rel tol {MASS_TOLERANCE})"),
    });

    if mass > 0.0 {
        solver.set_rate(0.0);
        let tau = params.decay_constant_direct;
        let half_life = solver.time_to_mass_fraction(0.5, 20.0 * tau)?;
        let expected = std::f64::consts::LN_2 * tau;
        checks.push(Check {
            name: "half_life".into(),
            pass: (half_life - expected).abs() / expected < HALF_LIFE_TOLERANCE,
            detail: format!("t_half={half_life:.4} s expected={expected:.4} s (rel tol {HALF_LIFE_TOLERANCE})"),
        });
    }

    match &a.output {
        Some(path) => scenario::write_comparison_csv(path, &comparison)?,
        None => {
            let rows = comparison
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.r.to_string(),
                        r.numeric.to_string(),
                        r.analytic.to_string(),
                        r.rel_err.to_string(),
                    ]
                })
                .collect();
            emit_csv(&None, stdout, &scenario::COMPARISON_HEADER, rows)?;
        }
    }

    let mut all = true;
    for c in &checks {
        all &= c.pass;
        writeln!(stderr, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)
            .map_err(|e| Error::io("<stderr>", e))?;
    }
    Ok(if all { Status::Success } else { Status::ChecksFailed })
}

fn abm(a: &AbmArgs, stderr: &mut dyn Write) -> Result<Status> {
    let (mut config, base_dir) = match &a.config {
        Some(path) => (
            scenario::load_config(path)?,
            path.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (ExperimentConfig::default().resolve()?, PathBuf::from(".")),
    };
    if let Some(n) = a.replications {
        config.simulation.replications = n;
    }
    if let Some(seed) = a.seed {
        config.simulation.base_seed = seed;
    }
    if a.event_log {
        config.output.event_log = true;
    }
    if let Some(dir) = &a.output_dir {
        config.output.directory = dir.to_string_lossy().into_owned();
    }
    let config = config.resolve()?;
    let world = config.load_world(&base_dir)?;
    let resolved = config.to_toml()?;
    echo(stderr, &config)?;

    let results = run_experiment(
        &config.simulation,
        &config.sweep,
        &world,
        ExperimentOptions {
            threads: a.threads,
            log_events: config.output.event_log,
        },
    )?;
    let dir = PathBuf::from(&config.output.directory);
    let files = scenario::write_results(&dir, &results, config.output.histograms, config.output.event_log)?;
    let echo_path = dir.join("resolved.toml");
    fs::write(&echo_path, resolved).map_err(|e| Error::io(&echo_path, e))?;
    writeln!(
        stderr,
        "wrote {} ({} sweep points)",
        files.aggregate.display(),
        results.len()
    )
    .map_err(|e| Error::io("<stderr>", e))?;
    Ok(Status::Success)
}

#[derive(Serialize)]
struct ThresholdEcho<'a> {
    area: &'a [f64],
    rate: &'a [f64],
    nu: f64,
    gc_thres: f64,
    large_droplet_fraction: f64,
}

fn threshold(a: &ThresholdArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Status> {
    echo(
        stderr,
        &ThresholdEcho {
            area: &a.area,
            rate: &a.rate,
            nu: a.nu,
            gc_thres: a.gc_thres,
            large_droplet_fraction: a.large_fraction,
        },
    )?;
    let mut rows = Vec::new();
    for &area in &a.area {
        for &rate in &a.rate {
            let t = contamination_threshold_time(area, a.gc_thres, a.large_fraction, rate, a.nu)?;
            rows.push(vec![area.to_string(), rate.to_string(), (t / 60.0).to_string()]);
        }
    }
    emit_csv(&a.output, stdout, &["area_m2", "rate_per_s", "t_thres_minutes"], rows)?;
    Ok(Status::Success)
}
