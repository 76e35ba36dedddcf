//! Moth-inspired olfactory navigation workbench.
//!
//! * [`plume`]: puff-based pheromone plume in a meandering turbulent wind.
//! * [`navigator`]: cast-and-surge agent with bounded acceleration and noisy
//!   sensing, and the flight loop producing labelled trajectories.
//! * [`segmentation`]: exploration/exploitation division of a trajectory by
//!   genetic search over segment boundaries.
//! * [`analysis`]: path comparison, exploration-rate profiles and tests.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod navigator;
pub mod phase;
pub mod plume;
pub mod segmentation;

pub use error::{Error, Result};
pub use geometry::{velocity_profile, Trajectory, Vec3, VelocitySeries};
pub use navigator::{run_flight, FlightRecord, Scenario};
pub use phase::Phase;
pub use segmentation::{segment, GaConfig, LabelConvention, Segmentation};
