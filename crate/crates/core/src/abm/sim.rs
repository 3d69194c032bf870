use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::world::{CellKind, World};
use crate::dispersion::{DispersionParams, ProximityField};
use crate::error::{Error, Result};
use crate::exposure::{per_step_direct_probability, per_step_surface_probability, ExposureParams};

/// Seconds of real time per simulation step.
pub const STEP_SECONDS: f64 = 60.0;

/// Factor applied to the mobility of agents on or next to a workplace cell.
pub const WORKPLACE_SLOWDOWN: f64 = 1e-2;

/// Distances at which the direct-channel rates are evaluated: same cell,
/// orthogonal neighbour, diagonal neighbour.
pub const SAME_CELL_DISTANCE: f64 = 0.75;
pub const NEIGHBOR_CELL_DISTANCE: f64 = World::CELL_SIZE;
pub const DIAGONAL_CELL_DISTANCE: f64 = World::CELL_SIZE * std::f64::consts::SQRT_2;

/// Per-step infection probabilities of each channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransmissionRates {
    /// Infectious agent on the same cell.
    pub same_cell: f64,
    /// Infectious agent on an orthogonal neighbour cell.
    pub neighbor_cell: f64,
    /// Standing on a contaminated workplace cell.
    pub surface: f64,
    /// Also transmit between diagonal neighbours.
    pub include_diagonal: bool,
    /// Diagonal rate; derived from the proximity field at 2.12 m when
    /// `include_diagonal` is set and this is absent.
    pub diagonal_cell: Option<f64>,
    /// Emission rate used to derive `diagonal_cell`, droplets/s.
    pub source_rate: f64,
}

impl Default for TransmissionRates {
    fn default() -> Self {
        Self {
            same_cell: 0.0049,
            neighbor_cell: 0.0013,
            surface: 0.0001,
            include_diagonal: false,
            diagonal_cell: None,
            source_rate: 66.0,
        }
    }
}

impl TransmissionRates {
    /// All rates zero; agents still move.
    pub fn zero() -> Self {
        Self {
            same_cell: 0.0,
            neighbor_cell: 0.0,
            surface: 0.0,
            ..Self::default()
        }
    }

    /// Rates computed from the analytical models for one step of `dt`
    /// seconds, with an emitter of `source_rate` droplets/s.
    pub fn from_models(
        dispersion: &DispersionParams,
        exposure: &ExposureParams,
        source_rate: f64,
        dt: f64,
        include_diagonal: bool,
    ) -> Result<Self> {
        let field = ProximityField::new(*dispersion, source_rate)?;
        let at = |r| per_step_direct_probability(r, &field, exposure, dt);
        Ok(Self {
            same_cell: at(SAME_CELL_DISTANCE),
            neighbor_cell: at(NEIGHBOR_CELL_DISTANCE),
            surface: per_step_surface_probability(exposure, dt),
            include_diagonal,
            diagonal_cell: include_diagonal.then(|| at(DIAGONAL_CELL_DISTANCE)),
            source_rate,
        })
    }

    /// Fills `diagonal_cell` from the models if diagonals are on and no rate
    /// was given.
    pub fn resolve_diagonal(&mut self, dispersion: &DispersionParams, exposure: &ExposureParams) -> Result<()> {
        if self.include_diagonal && self.diagonal_cell.is_none() {
            let field = ProximityField::new(*dispersion, self.source_rate)?;
            self.diagonal_cell = Some(per_step_direct_probability(
                DIAGONAL_CELL_DISTANCE,
                &field,
                exposure,
                STEP_SECONDS,
            ));
        }
        Ok(())
    }

    fn diagonal(&self) -> f64 {
        if self.include_diagonal {
            self.diagonal_cell.unwrap_or(0.0)
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probabilities = [
            ("simulation.rates.same_cell", self.same_cell),
            ("simulation.rates.neighbor_cell", self.neighbor_cell),
            ("simulation.rates.surface", self.surface),
            ("simulation.rates.diagonal_cell", self.diagonal_cell.unwrap_or(0.0)),
        ];
        for (key, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(key, format!("must lie in [0, 1], got {p}")));
            }
        }
        if self.include_diagonal && self.diagonal_cell.is_none() {
            return Err(Error::config("simulation.rates.diagonal_cell", "unresolved while include_diagonal is set"));
        }
        Ok(())
    }
}

/// One simulated shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// n, number of agents.
    pub population: usize,
    /// α, agents infectious from the start.
    pub initially_infected: usize,
    /// μ, probability of moving per step.
    pub mobility: f64,
    /// Per-step probability that an occupied workplace cell becomes
    /// contaminated.
    pub patch_contamination_probability: f64,
    /// Steps of 60 s; 480 is one 8-hour shift.
    pub steps: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub rates: TransmissionRates,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            population: 70,
            initially_infected: 9,
            mobility: 0.05,
            patch_contamination_probability: 0.5,
            steps: 480,
            replications: 10_000,
            base_seed: 0,
            rates: TransmissionRates::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initially_infected > self.population {
            return Err(Error::config(
                "simulation.initially_infected",
                format!(
                    "{} exceeds population {}",
                    self.initially_infected, self.population
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.mobility) {
            return Err(Error::config(
                "simulation.mobility",
                format!("must lie in [0, 1], got {}", self.mobility),
            ));
        }
        if !(0.0..=1.0).contains(&self.patch_contamination_probability) {
            return Err(Error::config(
                "simulation.patch_contamination_probability",
                format!("must lie in [0, 1], got {}", self.patch_contamination_probability),
            ));
        }
        if self.replications == 0 {
            return Err(Error::config("simulation.replications", "must be >= 1"));
        }
        self.rates.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentState {
    Susceptible,
    Infectious,
    /// Infected during this shift; does not transmit.
    LatentInfected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent {
    /// Row-major cell index.
    pub position: usize,
    pub state: AgentState,
    pub mobility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    DirectSame,
    DirectAdjacent,
    DirectDiagonal,
    Surface,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::DirectSame => "direct_same",
            Channel::DirectAdjacent => "direct_adjacent",
            Channel::DirectDiagonal => "direct_diagonal",
            Channel::Surface => "surface",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InfectionEvent {
    pub replication: usize,
    /// 1-based step in which the infection happened.
    pub step: usize,
    pub agent_id: usize,
    pub channel: Channel,
    pub cell_x: usize,
    pub cell_y: usize,
}

/// `mix(base, i)` is the (i+1)-th output of a SplitMix64 generator seeded
/// with `base`: golden-ratio increment followed by the SplitMix64 finalizer.
pub fn mix_seed(base_seed: u64, replication: u64) -> u64 {
    let mut z = base_seed.wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(replication.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// State of one replication.
///
/// Each [`Simulation::step`] runs, in order: movement, patch contamination,
/// transmission.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    world: &'a World,
    config: &'a SimulationConfig,
    replication: usize,
    agents: Vec<Agent>,
    contaminated: Vec<bool>,
    contaminated_count: usize,
    step: usize,
    rng: ChaCha8Rng,
    events: Option<Vec<InfectionEvent>>,
    // per-cell scratch, kept zeroed between steps
    infectious_here: Vec<u32>,
    tried: Vec<bool>,
}

impl<'a> Simulation<'a> {
    /// Places `population` agents uniformly at random on walkable cells (more
    /// than one per cell allowed); the first `initially_infected` are
    /// infectious. All patches start clean.
    pub fn new(config: &'a SimulationConfig, world: &'a World, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let walkable = world.walkable_cells();
        let agents = (0..config.population)
            .map(|i| Agent {
                position: walkable[rng.random_range(0..walkable.len())],
                state: if i < config.initially_infected {
                    AgentState::Infectious
                } else {
                    AgentState::Susceptible
                },
                mobility: config.mobility,
            })
            .collect();
        let cells = world.cells().len();
        Ok(Self {
            world,
            config,
            replication: 0,
            agents,
            contaminated: vec![false; cells],
            contaminated_count: 0,
            step: 0,
            rng,
            events: None,
            infectious_here: vec![0; cells],
            tried: vec![false; cells],
        })
    }

    pub fn with_event_log(mut self, replication: usize) -> Self {
        self.replication = replication;
        self.events = Some(Vec::new());
        self
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    /// Replaces the agent list, e.g. to pin agents in tests.
    pub fn set_agents(&mut self, agents: Vec<Agent>) -> Result<()> {
        if let Some(a) = agents.iter().find(|a| !self.world.kind(a.position).is_walkable()) {
            return Err(Error::invalid("agents", format!("agent placed on wall cell {}", a.position)));
        }
        self.agents = agents;
        Ok(())
    }

    pub fn contaminate(&mut self, cell: usize) {
        if self.world.kind(cell) == CellKind::Workplace && !self.contaminated[cell] {
            self.contaminated[cell] = true;
            self.contaminated_count += 1;
        }
    }

    pub fn is_contaminated(&self, cell: usize) -> bool {
        self.contaminated[cell]
    }

    pub fn contaminated_count(&self) -> usize {
        self.contaminated_count
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn events(&self) -> Option<&[InfectionEvent]> {
        self.events.as_deref()
    }

    pub fn into_events(self) -> Option<Vec<InfectionEvent>> {
        self.events
    }

    pub fn count(&self, state: AgentState) -> usize {
        self.agents.iter().filter(|a| a.state == state).count()
    }

    pub fn new_infections(&self) -> usize {
        self.count(AgentState::LatentInfected)
    }

    pub fn step(&mut self) {
        self.step += 1;
        self.move_agents();
        self.contaminate_patches();
        self.transmit();
    }

    fn move_agents(&mut self) {
        for agent in &mut self.agents {
            let mu = if self.world.near_workplace(agent.position) {
                agent.mobility * WORKPLACE_SLOWDOWN
            } else {
                agent.mobility
            };
            if self.rng.random::<f64>() < mu {
                let options = self.world.orthogonal_neighbors(agent.position);
                if !options.is_empty() {
                    agent.position = options[self.rng.random_range(0..options.len())];
                }
            }
        }
    }

    fn contaminate_patches(&mut self) {
        let p = self.config.patch_contamination_probability;
        if p <= 0.0 {
            return;
        }
        let mut visited = Vec::new();
        for agent in self.agents.iter().filter(|a| a.state == AgentState::Infectious) {
            let cell = agent.position;
            if self.world.kind(cell) != CellKind::Workplace || self.contaminated[cell] || self.tried[cell] {
                continue;
            }
            self.tried[cell] = true;
            visited.push(cell);
            if self.rng.random::<f64>() < p {
                self.contaminated[cell] = true;
                self.contaminated_count += 1;
            }
        }
        for cell in visited {
            self.tried[cell] = false;
        }
    }

    fn transmit(&mut self) {
        let rates = &self.config.rates;
        let diagonal_rate = rates.diagonal();
        let mut occupied = Vec::new();
        for agent in self.agents.iter().filter(|a| a.state == AgentState::Infectious) {
            if self.infectious_here[agent.position] == 0 {
                occupied.push(agent.position);
            }
            self.infectious_here[agent.position] += 1;
        }

        let world = self.world;
        for (id, agent) in self.agents.iter_mut().enumerate() {
            if agent.state != AgentState::Susceptible {
                continue;
            }
            let cell = agent.position;
            let count = |cells: &[usize]| cells.iter().map(|&c| self.infectious_here[c]).sum::<u32>();
            let same = self.infectious_here[cell];
            let adjacent = count(world.orthogonal_neighbors(cell));
            let diagonal = if diagonal_rate > 0.0 {
                count(world.diagonal_neighbors(cell))
            } else {
                0
            };
            let surface = u32::from(self.contaminated[cell]);

            // cumulative escape probabilities, channel by channel
            let channels = [
                (Channel::DirectSame, rates.same_cell, same),
                (Channel::DirectAdjacent, rates.neighbor_cell, adjacent),
                (Channel::DirectDiagonal, diagonal_rate, diagonal),
                (Channel::Surface, rates.surface, surface),
            ];
            let mut escape = [1.0_f64; 4];
            let mut running = 1.0;
            for (k, (_, p, n)) in channels.iter().enumerate() {
                if *n > 0 && *p > 0.0 {
                    running *= (1.0 - p).powi(*n as i32);
                }
                escape[k] = running;
            }
            if running >= 1.0 {
                continue;
            }
            // one uniform decides infection; its position within the
            // cumulative probabilities names the channel
            let u = self.rng.random::<f64>();
            if u >= 1.0 - running {
                continue;
            }
            let k = escape.iter().position(|e| u < 1.0 - e).unwrap_or(3);
            agent.state = AgentState::LatentInfected;
            if let Some(events) = self.events.as_mut() {
                let (x, y) = world.coords(cell);
                events.push(InfectionEvent {
                    replication: self.replication,
                    step: self.step,
                    agent_id: id,
                    channel: channels[k].0,
                    cell_x: x,
                    cell_y: y,
                });
            }
        }

        for cell in occupied {
            self.infectious_here[cell] = 0;
        }
    }

    /// Checks the population and world invariants.
    pub fn verify(&self, infectious_at_start: usize, contaminated_before: usize) -> Result<()> {
        let infectious = self.count(AgentState::Infectious);
        if infectious != infectious_at_start {
            return Err(Error::InvariantViolation(format!(
                "infectious count changed from {infectious_at_start} to {infectious} at step {}",
                self.step
            )));
        }
        if self.agents.len() != self.config.population {
            return Err(Error::InvariantViolation("population size changed".into()));
        }
        if let Some(a) = self.agents.iter().find(|a| !self.world.kind(a.position).is_walkable()) {
            return Err(Error::InvariantViolation(format!(
                "agent on wall cell {:?} at step {}",
                self.world.coords(a.position),
                self.step
            )));
        }
        if self.contaminated_count < contaminated_before {
            return Err(Error::InvariantViolation("patch contamination decreased".into()));
        }
        Ok(())
    }
}
