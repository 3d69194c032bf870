use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sim::{mix_seed, AgentState, InfectionEvent, Simulation, SimulationConfig};
use super::world::World;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub replication: usize,
    pub new_infections: usize,
    pub events: Option<Vec<InfectionEvent>>,
}

/// Runs one shift from a fresh placement seeded with
/// `mix_seed(base_seed, replication)`. Invariants are checked after every
/// step; a violation aborts with [`Error::InvariantViolation`].
pub fn run_replication(
    config: &SimulationConfig,
    world: &World,
    replication: usize,
    log_events: bool,
) -> Result<ReplicationResult> {
    let seed = mix_seed(config.base_seed, replication as u64);
    let mut sim = Simulation::new(config, world, seed)?;
    if log_events {
        sim = sim.with_event_log(replication);
    }
    let infectious = sim.count(AgentState::Infectious);
    for _ in 0..config.steps {
        let contaminated = sim.contaminated_count();
        sim.step();
        sim.verify(infectious, contaminated)?;
    }
    let new_infections = sim.new_infections();
    if new_infections > config.population - config.initially_infected {
        return Err(Error::InvariantViolation(format!(
            "{new_infections} new infections exceed the {} susceptible agents",
            config.population - config.initially_infected
        )));
    }
    Ok(ReplicationResult {
        replication,
        new_infections,
        events: sim.into_events(),
    })
}

/// New-infection counts of a batch of replications.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStatistics {
    /// Count per replication, in replication order.
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Unbiased sample variance; 0 for a single replication.
    pub variance: f64,
    /// `histogram[k]` = replications with exactly `k` new infections,
    /// for `k` in `0..=max_count`.
    pub histogram: Vec<u64>,
}

impl RunStatistics {
    pub fn from_counts(counts: Vec<usize>, max_count: usize) -> Self {
        let n = counts.len() as f64;
        let mean = if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<usize>() as f64 / n
        };
        let variance = if counts.len() > 1 {
            counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let top = counts.iter().copied().max().unwrap_or(0).max(max_count);
        let mut histogram = vec![0u64; top + 1];
        for &c in &counts {
            histogram[c] += 1;
        }
        Self {
            counts,
            mean,
            variance,
            histogram,
        }
    }

    pub fn replications(&self) -> usize {
        self.counts.len()
    }
}

/// Axes of a parameter sweep. An empty axis takes the base config's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub mobility: Vec<f64>,
    pub population: Vec<usize>,
    pub initially_infected: Vec<usize>,
    pub patch_contamination_probability: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub mobility: f64,
    pub population: usize,
    pub initially_infected: usize,
    pub patch_contamination_probability: f64,
}

impl SweepPoint {
    pub fn apply(&self, base: &SimulationConfig) -> SimulationConfig {
        SimulationConfig {
            mobility: self.mobility,
            population: self.population,
            initially_infected: self.initially_infected,
            patch_contamination_probability: self.patch_contamination_probability,
            ..base.clone()
        }
    }
}

impl Sweep {
    /// Cartesian product of the axes, mobility outermost and contamination
    /// innermost.
    pub fn points(&self, base: &SimulationConfig) -> Vec<SweepPoint> {
        fn axis<T: Copy>(values: &[T], fallback: T) -> Vec<T> {
            if values.is_empty() {
                vec![fallback]
            } else {
                values.to_vec()
            }
        }
        let mut points = Vec::new();
        for &mobility in &axis(&self.mobility, base.mobility) {
            for &population in &axis(&self.population, base.population) {
                for &initially_infected in &axis(&self.initially_infected, base.initially_infected) {
                    for &p in &axis(&self.patch_contamination_probability, base.patch_contamination_probability) {
                        points.push(SweepPoint {
                            mobility,
                            population,
                            initially_infected,
                            patch_contamination_probability: p,
                        });
                    }
                }
            }
        }
        points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub point: SweepPoint,
    pub replications: usize,
    pub statistics: RunStatistics,
    pub events: Vec<InfectionEvent>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExperimentOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub log_events: bool,
}

/// Runs `base.replications` replications at every sweep point. Replication
/// `i` is seeded with `mix_seed(base_seed, i)` at every point, so results do
/// not depend on thread count or scheduling.
pub fn run_experiment(
    base: &SimulationConfig,
    sweep: &Sweep,
    world: &World,
    options: ExperimentOptions,
) -> Result<Vec<PointResult>> {
    let points = sweep.points(base);
    for point in &points {
        point.apply(base).validate()?;
    }
    let run = || -> Result<Vec<PointResult>> {
        points
            .iter()
            .map(|point| run_point(&point.apply(base), *point, world, options.log_events))
            .collect()
    };
    match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn run_point(config: &SimulationConfig, point: SweepPoint, world: &World, log_events: bool) -> Result<PointResult> {
    let results: Vec<ReplicationResult> = (0..config.replications)
        .into_par_iter()
        .map(|i| run_replication(config, world, i, log_events))
        .collect::<Result<_>>()?;
    let mut events = Vec::new();
    let mut counts = Vec::with_capacity(results.len());
    for r in results {
        counts.push(r.new_infections);
        events.extend(r.events.into_iter().flatten());
    }
    Ok(PointResult {
        point,
        replications: config.replications,
        statistics: RunStatistics::from_counts(counts, config.population - config.initially_infected),
        events,
    })
}
