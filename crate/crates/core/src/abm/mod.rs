//! Grid-world agent-based simulation of one work shift.
//!
//! Agents random-walk on a walled grid of 1.5 m cells, slow down on or next
//! to workplace cells, contaminate the workplaces they stand on and infect
//! susceptible agents on the same or a neighbouring cell. Agents infected
//! during the shift stay latent and never transmit.
//!
//! Mobility near workplaces is `μ × 10⁻²`.

mod experiment;
mod sim;
mod world;

pub use experiment::{
    run_experiment, run_replication, ExperimentOptions, PointResult, ReplicationResult, RunStatistics, Sweep,
    SweepPoint,
};
pub use sim::{
    mix_seed, Agent, AgentState, Channel, InfectionEvent, Simulation, SimulationConfig, TransmissionRates,
    DIAGONAL_CELL_DISTANCE, NEIGHBOR_CELL_DISTANCE, SAME_CELL_DISTANCE, STEP_SECONDS, WORKPLACE_SLOWDOWN,
};
pub use world::{CellKind, World};
