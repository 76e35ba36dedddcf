use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::plume::SensorNoise;

// absorbs rounding when timers are decremented in steps of dt
const TIMER_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Cast,
    Surge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    /// m/s
    pub max_speed: f64,
    /// m/s^2
    pub max_acceleration: f64,
    /// Surge timer length, s.
    pub surge_duration: f64,
    /// m/s
    pub cast_crosswind_speed: f64,
    /// Upwind component kept while casting, m/s.
    pub cast_upwind_speed: f64,
    /// Duration of one crosswind leg of the zigzag, s.
    pub cast_leg_duration: f64,
    /// Slow crosswind drift laid over the zigzag, m/s. A bout drifts
    /// toward the side of its first leg.
    pub cast_sweep_speed: f64,
    pub sensor_threshold: f64,
    pub sensor_noise: SensorNoise,
    /// radians
    pub wind_direction_noise_std: f64,
    /// m
    pub capture_radius: f64,
    pub start_position: Vec3,
    /// s
    pub max_flight_time: f64,
    /// Height the vertical controller holds, m.
    pub cruise_altitude: f64,
    /// 1/s
    pub altitude_gain: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            max_speed: 0.4,
            max_acceleration: 60.0,
            surge_duration: 0.4,
            cast_crosswind_speed: 0.35,
            cast_upwind_speed: 0.15,
            cast_leg_duration: 2.0 / 75.0,
            cast_sweep_speed: 0.004,
            sensor_threshold: 700.0,
            sensor_noise: SensorNoise { mean: 0.0, std: 200.0 },
            wind_direction_noise_std: 0.01,
            capture_radius: 0.15,
            // 2 m downwind of the source on the tunnel centreline
            start_position: Vec3::new(0.0, 0.5, 0.5),
            max_flight_time: 30.0,
            cruise_altitude: 0.5,
            altitude_gain: 1.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("max_speed", self.max_speed),
            ("cast_crosswind_speed", self.cast_crosswind_speed),
            ("cast_upwind_speed", self.cast_upwind_speed),
            ("cast_sweep_speed", self.cast_sweep_speed),
            ("wind_direction_noise_std", self.wind_direction_noise_std),
            ("altitude_gain", self.altitude_gain),
            ("sensor_noise.std", self.sensor_noise.std),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        let positive = [
            ("max_acceleration", self.max_acceleration),
            ("surge_duration", self.surge_duration),
            ("cast_leg_duration", self.cast_leg_duration),
            ("capture_radius", self.capture_radius),
            ("max_flight_time", self.max_flight_time),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.sensor_threshold.is_nan() || !self.sensor_noise.mean.is_finite() {
            return Err(Error::Config("sensor threshold and noise mean must be numbers".into()));
        }
        if !self.start_position.is_finite() || !self.cruise_altitude.is_finite() {
            return Err(Error::Config("start position and altitude must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub mode: Mode,
    /// Remaining surge time, s. Zero while casting.
    pub timer_remaining: f64,
    /// Current zigzag side, +1 or -1.
    pub cast_sign: f64,
    /// Drift side of the current bout, +1 or -1.
    pub sweep_sign: f64,
    /// Remaining time on the current cast leg, s.
    pub leg_remaining: f64,
}

impl AgentState {
    /// At rest and casting.
    pub fn at_rest(position: Vec3, cfg: &AgentConfig) -> Self {
        Self {
            position,
            velocity: Vec3::ZERO,
            mode: Mode::Cast,
            timer_remaining: 0.0,
            cast_sign: 1.0,
            sweep_sign: 1.0,
            leg_remaining: cfg.cast_leg_duration,
        }
    }
}

fn horizontal_crosswind(upwind: Vec3) -> Vec3 {
    Vec3::Z.cross(upwind).normalized().unwrap_or(Vec3::Y)
}

/// One control step.
///
/// `upwind` is the agent's (noisy) estimate of the unit vector pointing
/// into the wind. A detection (re)arms the surge timer; when the timer runs
/// out the agent falls back to casting on the opposite side. While casting,
/// the crosswind side flips every `cast_leg_duration`.
pub fn step_agent(state: &AgentState, cfg: &AgentConfig, detected: bool, upwind: Vec3, dt: f64) -> AgentState {
    debug_assert!(dt > 0.0);
    let mut next = state.clone();

    if detected {
        next.mode = Mode::Surge;
        next.timer_remaining = cfg.surge_duration;
    } else {
        match next.mode {
            Mode::Surge => {
                next.timer_remaining -= dt;
                if next.timer_remaining <= TIMER_EPS {
                    next.mode = Mode::Cast;
                    next.timer_remaining = 0.0;
                    next.cast_sign = -next.cast_sign;
                    next.sweep_sign = next.cast_sign;
                    next.leg_remaining = cfg.cast_leg_duration;
                }
            }
            Mode::Cast => {
                next.leg_remaining -= dt;
                if next.leg_remaining <= TIMER_EPS {
                    next.cast_sign = -next.cast_sign;
                    next.leg_remaining += cfg.cast_leg_duration;
                }
            }
        }
    }

    let mut desired = match next.mode {
        Mode::Surge => upwind * cfg.max_speed,
        Mode::Cast => {
            let flat = Vec3::new(upwind.x, upwind.y, 0.0).normalized().unwrap_or(upwind);
            let lateral = next.cast_sign * cfg.cast_crosswind_speed + next.sweep_sign * cfg.cast_sweep_speed;
            horizontal_crosswind(upwind) * lateral + flat * cfg.cast_upwind_speed
        }
    };
    desired.z += cfg.altitude_gain * (cfg.cruise_altitude - state.position.z);

    let accel = ((desired - state.velocity) / dt).clamp_norm(cfg.max_acceleration);
    next.velocity = (state.velocity + accel * dt).clamp_norm(cfg.max_speed);
    next.position = state.position + next.velocity * dt;
    next
}
