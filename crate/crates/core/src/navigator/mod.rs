//! Memoryless cast-and-surge navigator and the flight loop that couples it
//! to the plume.

mod agent;
mod flight;

pub use agent::{step_agent, AgentConfig, AgentState, Mode};
pub use flight::{mean_path, mean_trajectory, run_flight, FlightRecord, Phase, Scenario};
