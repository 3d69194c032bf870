//! World maps, experiment configuration and result files.
//!
//! # World files
//!
//! Plain ASCII, one grid row per line, all rows the same length:
//!
//! | char | cell |
//! |------|------|
//! | `#`  | wall |
//! | `.`  | floor |
//! | `M`  | workplace (machine, workstation) |
//!
//! The outer border must be entirely `#`.
//!
//! # Experiment configuration
//!
//! TOML. Every table and key is optional and unknown keys are rejected:
//!
//! ```toml
//! world = "factory_default.world"   # relative to the config file; "builtin:factory_default" by default
//!
//! [dispersion]      # DispersionParams
//! [exposure]        # ExposureParams
//! [simulation]      # SimulationConfig
//! [simulation.rates]
//! [sweep]           # lists: mobility, population, initially_infected, patch_contamination_probability
//! [output]          # directory, event_log, histograms
//! ```
//!
//! [`ExperimentConfig::to_toml`] writes the fully resolved document; parsing it
//! again gives back the same config.
//!
//! # Result files
//!
//! * `aggregate.csv`: `mu,n,alpha,patch_contamination_prob,mean_new_infections,var,replications`
//! * `histogram_<point>.csv`: `count,occurrences`
//! * `events_<point>.csv`: `replication,step,agent_id,channel,cell_x,cell_y`
//! * validation: `r_m,c_numeric,c_analytic,rel_err`
//!
//! Floats are written in shortest round-trip form.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::abm::{CellKind, InfectionEvent, PointResult, RunStatistics, SimulationConfig, Sweep, SweepPoint, World};
use crate::dispersion::DispersionParams;
use crate::error::{Error, Result};
use crate::exposure::ExposureParams;
use crate::pde::Comparison;

pub const FACTORY_DEFAULT_WORLD: &str = include_str!("../recipes/factory_default.world");
pub const BUILTIN_FACTORY: &str = "builtin:factory_default";

pub fn factory_default_world() -> World {
    parse_world(FACTORY_DEFAULT_WORLD).expect("bundled world is valid")
}

pub fn parse_world(text: &str) -> Result<World> {
    let rows: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let rows = match rows.iter().rposition(|r| !r.is_empty()) {
        Some(last) => &rows[..=last],
        None => {
            return Err(Error::WorldParse {
                line: 1,
                column: 1,
                reason: "empty world".into(),
            })
        }
    };
    let width = rows[0].chars().count();
    let height = rows.len();
    let mut cells = Vec::with_capacity(width * height);
    for (y, row) in rows.iter().enumerate() {
        let len = row.chars().count();
        if len != width {
            return Err(Error::WorldParse {
                line: y + 1,
                column: len.min(width) + 1,
                reason: format!("row has {len} columns, expected {width}"),
            });
        }
        for (x, ch) in row.chars().enumerate() {
            let kind = match ch {
                '#' => CellKind::Wall,
                '.' => CellKind::Floor,
                'M' => CellKind::Workplace,
                other => {
                    return Err(Error::WorldParse {
                        line: y + 1,
                        column: x + 1,
                        reason: format!("illegal character {other:?}"),
                    })
                }
            };
            let border = x == 0 || y == 0 || x == width - 1 || y == height - 1;
            if border && kind != CellKind::Wall {
                return Err(Error::WorldParse {
                    line: y + 1,
                    column: x + 1,
                    reason: "border must be wall '#'".into(),
                });
            }
            cells.push(kind);
        }
    }
    World::new(width, height, cells).map_err(|e| Error::WorldParse {
        line: 1,
        column: 1,
        reason: e.to_string(),
    })
}

pub fn render_world(world: &World) -> String {
    let mut out = String::with_capacity((world.width() + 1) * world.height());
    for y in 0..world.height() {
        for x in 0..world.width() {
            out.push(match world.kind_at(x, y) {
                CellKind::Wall => '#',
                CellKind::Floor => '.',
                CellKind::Workplace => 'M',
            });
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    pub event_log: bool,
    pub histograms: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "results".into(),
            event_log: false,
            histograms: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub world: String,
    pub dispersion: DispersionParams,
    pub exposure: ExposureParams,
    pub simulation: SimulationConfig,
    pub sweep: Sweep,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            world: BUILTIN_FACTORY.into(),
            dispersion: DispersionParams::default(),
            exposure: ExposureParams::default(),
            simulation: SimulationConfig::default(),
            sweep: Sweep::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Fills derived values and checks every constraint, including each
    /// sweep point.
    pub fn resolve(mut self) -> Result<Self> {
        self.dispersion
            .validate()
            .map_err(|e| prefix_key("dispersion", e))?;
        self.exposure.validate().map_err(|e| prefix_key("exposure", e))?;
        self.simulation
            .rates
            .resolve_diagonal(&self.dispersion, &self.exposure)?;
        self.simulation.validate()?;
        for point in self.sweep.points(&self.simulation) {
            point.apply(&self.simulation).validate().map_err(|e| match e {
                Error::Config { key, reason } => Error::config(
                    key.replacen("simulation.", "sweep.", 1),
                    format!("{reason} (sweep point {point:?})"),
                ),
                other => other,
            })?;
        }
        if self.simulation.base_seed > i64::MAX as u64 {
            return Err(Error::config("simulation.base_seed", "must be below 2^63"));
        }
        Ok(self)
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        self.sweep.points(&self.simulation)
    }

    /// Loads the world named by `world`, relative to `base_dir`.
    pub fn load_world(&self, base_dir: &Path) -> Result<World> {
        if self.world == BUILTIN_FACTORY {
            return Ok(factory_default_world());
        }
        let path = base_dir.join(&self.world);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        parse_world(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("document", e.to_string()))
    }
}

fn prefix_key(table: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { name, reason } => Error::config(format!("{table}.{name}"), reason),
        other => other,
    }
}

/// Parses and resolves a TOML experiment document.
pub fn parse_config(document: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(document).map_err(|e| {
        let key = e
            .span()
            .and_then(|span| key_at(document, span.start))
            .unwrap_or_else(|| "document".into());
        Error::config(key, e.message().trim().to_string())
    })?;
    config.resolve()
}

/// Dotted key of the assignment containing byte offset `pos`.
fn key_at(document: &str, pos: usize) -> Option<String> {
    let mut table = String::new();
    let mut offset = 0;
    for line in document.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            table = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        if pos < offset + line.len() {
            let key = trimmed.split('=').next()?.trim();
            if trimmed.starts_with('[') {
                return Some(table);
            }
            return Some(if table.is_empty() {
                key.to_string()
            } else {
                format!("{table}.{key}")
            });
        }
        offset += line.len();
    }
    None
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const AGGREGATE_HEADER: [&str; 7] = [
    "mu",
    "n",
    "alpha",
    "patch_contamination_prob",
    "mean_new_infections",
    "var",
    "replications",
];
pub const HISTOGRAM_HEADER: [&str; 2] = ["count", "occurrences"];
pub const EVENT_HEADER: [&str; 6] = ["replication", "step", "agent_id", "channel", "cell_x", "cell_y"];
pub const COMPARISON_HEADER: [&str; 4] = ["r_m", "c_numeric", "c_analytic", "rel_err"];

pub fn write_aggregate_csv(path: &Path, results: &[PointResult]) -> Result<()> {
    write_rows(
        path,
        &AGGREGATE_HEADER,
        results.iter().map(|r| {
            vec![
                r.point.mobility.to_string(),
                r.point.population.to_string(),
                r.point.initially_infected.to_string(),
                r.point.patch_contamination_probability.to_string(),
                r.statistics.mean.to_string(),
                r.statistics.variance.to_string(),
                r.replications.to_string(),
            ]
        }),
    )
}

pub fn write_histogram_csv(path: &Path, stats: &RunStatistics) -> Result<()> {
    write_rows(
        path,
        &HISTOGRAM_HEADER,
        stats
            .histogram
            .iter()
            .enumerate()
            .map(|(k, n)| vec![k.to_string(), n.to_string()]),
    )
}

pub fn write_event_csv(path: &Path, events: &[InfectionEvent]) -> Result<()> {
    write_rows(
        path,
        &EVENT_HEADER,
        events.iter().map(|e| {
            vec![
                e.replication.to_string(),
                e.step.to_string(),
                e.agent_id.to_string(),
                e.channel.as_str().to_string(),
                e.cell_x.to_string(),
                e.cell_y.to_string(),
            ]
        }),
    )
}

pub fn write_comparison_csv(path: &Path, comparison: &Comparison) -> Result<()> {
    write_rows(
        path,
        &COMPARISON_HEADER,
        comparison.rows.iter().map(|r| {
            vec![
                r.r.to_string(),
                r.numeric.to_string(),
                r.analytic.to_string(),
                r.rel_err.to_string(),
            ]
        }),
    )
}

/// File-name stem identifying a sweep point.
pub fn point_label(point: &SweepPoint) -> String {
    format!(
        "mu{}_n{}_alpha{}_p{}",
        point.mobility, point.population, point.initially_infected, point.patch_contamination_probability
    )
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WrittenFiles {
    pub aggregate: PathBuf,
    pub histograms: Vec<PathBuf>,
    pub event_logs: Vec<PathBuf>,
}

/// Writes `aggregate.csv` plus per-point histograms and event logs into
/// `directory`, creating it if needed.
pub fn write_results(
    directory: &Path,
    results: &[PointResult],
    histograms: bool,
    event_logs: bool,
) -> Result<WrittenFiles> {
    fs::create_dir_all(directory).map_err(|e| Error::io(directory, e))?;
    let mut files = WrittenFiles {
        aggregate: directory.join("aggregate.csv"),
        ..WrittenFiles::default()
    };
    write_aggregate_csv(&files.aggregate, results)?;
    for r in results {
        let label = point_label(&r.point);
        if histograms {
            let path = directory.join(format!("histogram_{label}.csv"));
            write_histogram_csv(&path, &r.statistics)?;
            files.histograms.push(path);
        }
        if event_logs {
            let path = directory.join(format!("events_{label}.csv"));
            write_event_csv(&path, &r.events)?;
            files.event_logs.push(path);
        }
    }
    Ok(files)
}
