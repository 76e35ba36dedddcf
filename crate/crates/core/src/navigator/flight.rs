use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::agent::{step_agent, AgentConfig, AgentState, Mode};
use crate::error::{invalid, Error, Result};
use crate::geometry::{Trajectory, Vec3};
pub use crate::phase::Phase;
use crate::plume::{sense, PlumeConfig, PlumeState, WindModel, DEFAULT_DT};

/// Everything needed to fly one simulated moth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub id: String,
    pub wind: WindModel,
    pub plume: PlumeConfig,
    pub agent: AgentConfig,
    /// Simulation and sampling interval, s.
    pub dt: f64,
    /// Plume spin-up before the agent is released, s.
    pub warmup: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            id: "undisturbed".into(),
            wind: WindModel::default(),
            plume: PlumeConfig::default(),
            agent: AgentConfig::default(),
            dt: DEFAULT_DT,
            warmup: 10.0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.wind.validate()?;
        self.plume.validate()?;
        self.agent.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.warmup.is_finite() && self.warmup >= 0.0) {
            return Err(Error::Config("warmup must be >= 0".into()));
        }
        Ok(())
    }
}

/// A simulated flight with its ground-truth phase per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub trajectory: Trajectory,
    pub true_labels: Vec<Phase>,
    pub success: bool,
    pub seed: u64,
    pub scenario_id: String,
}

fn noisy_upwind<R: Rng>(upwind: Vec3, std: f64, rng: &mut R) -> Vec3 {
    if std <= 0.0 {
        return upwind;
    }
    let probe = Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    let angle = std * rng.sample::<f64, _>(StandardNormal);
    match upwind.cross(probe).normalized() {
        Some(axis) => upwind.rotate_about(axis, angle),
        None => upwind,
    }
}

/// Co-steps the plume and a single agent until capture or timeout.
///
/// The plume and the agent draw from separate streams of a ChaCha generator
/// seeded with `seed`, so a flight is fully determined by `(scenario, seed)`.
pub fn run_flight(scenario: &Scenario, seed: u64) -> Result<FlightRecord> {
    scenario.validate()?;
    let dt = scenario.dt;
    let cfg = &scenario.agent;
    let source = scenario.plume.source_position;

    let mut plume_rng = ChaCha8Rng::seed_from_u64(seed);
    plume_rng.set_stream(0);
    let mut agent_rng = ChaCha8Rng::seed_from_u64(seed);
    agent_rng.set_stream(1);

    let mut plume = PlumeState::new(&scenario.plume)?;
    let warmup_steps = (scenario.warmup / dt).round() as usize;
    for _ in 0..warmup_steps {
        plume.step(&scenario.wind, dt, &mut plume_rng)?;
    }

    let mut state = AgentState::at_rest(cfg.start_position, cfg);
    let mut samples = vec![state.position];
    let mut labels = vec![Phase::Exploration];
    let mut success = state.position.distance(source) <= cfg.capture_radius;

    let max_steps = (cfg.max_flight_time / dt).round() as usize;
    let mut step = 0;
    while !success && step < max_steps {
        plume.step(&scenario.wind, dt, &mut plume_rng)?;
        let c = plume.concentration_at(state.position);
        let detected = sense(c, cfg.sensor_threshold, cfg.sensor_noise, &mut agent_rng);
        let wind = scenario.wind.velocity_at(state.position, source, plume.time);
        let upwind = (-wind).normalized().unwrap_or(-scenario.wind.mean_direction);
        let upwind = noisy_upwind(upwind, cfg.wind_direction_noise_std, &mut agent_rng);

        state = step_agent(&state, cfg, detected, upwind, dt);
        samples.push(state.position);
        labels.push(match state.mode {
            Mode::Surge => Phase::Exploitation,
            Mode::Cast => Phase::Exploration,
        });
        success = state.position.distance(source) <= cfg.capture_radius;
        step += 1;
    }

    Ok(FlightRecord {
        trajectory: Trajectory::new(samples, dt)?,
        true_labels: labels,
        success,
        seed,
        scenario_id: scenario.id.clone(),
    })
}

/// Pointwise average of arc-length resampled trajectories.
///
/// Every input is resampled to the median sample count before averaging.
pub fn mean_trajectory(trajectories: &[&Trajectory]) -> Result<Trajectory> {
    if trajectories.is_empty() {
        return Err(invalid("mean path needs at least one trajectory"));
    }
    let mut lengths: Vec<usize> = trajectories.iter().map(|t| t.len()).collect();
    lengths.sort_unstable();
    let mid = lengths.len() / 2;
    let count = if lengths.len().is_multiple_of(2) {
        (lengths[mid - 1] + lengths[mid]) / 2
    } else {
        lengths[mid]
    };

    let resampled = trajectories
        .iter()
        .map(|t| t.resample_by_arc_length(count))
        .collect::<Result<Vec<_>>>()?;
    let scale = 1.0 / resampled.len() as f64;
    let mut sum = vec![Vec3::ZERO; count];
    for t in &resampled {
        for (acc, p) in sum.iter_mut().zip(t.samples()) {
            *acc += *p;
        }
    }
    let dt = resampled.iter().map(|t| t.dt()).sum::<f64>() * scale;
    Trajectory::new(sum.into_iter().map(|p| p * scale).collect(), dt)
}

/// Mean route over successful flights.
pub fn mean_path(records: &[FlightRecord]) -> Result<Trajectory> {
    if records.is_empty() {
        return Err(invalid("mean path needs at least one flight"));
    }
    if let Some(r) = records.iter().find(|r| !r.success) {
        return Err(invalid(format!("flight with seed {} was not successful", r.seed)));
    }
    let refs: Vec<&Trajectory> = records.iter().map(|r| &r.trajectory).collect();
    mean_trajectory(&refs)
}
