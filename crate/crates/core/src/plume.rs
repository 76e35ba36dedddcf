//! Puff-based pheromone plume in a meandering, turbulent mean wind.
//!
//! The source releases discrete Gaussian puffs. Each puff is carried by the
//! local mean wind plus an independent Gaussian velocity fluctuation per
//! axis, and grows linearly in radius. In disturbed mode a travelling
//! crossflow oscillation is added close to the source, standing in for the
//! vortex street shed by an upstream cylinder.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Vec3;

/// Tracking rate of the wind-tunnel cameras.
pub const DEFAULT_DT: f64 = 1.0 / 75.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindModel {
    /// m/s
    pub mean_speed: f64,
    /// Unit vector pointing from the source towards the release point.
    pub mean_direction: Vec3,
    /// Fluctuation standard deviation as a fraction of `mean_speed`.
    pub turbulence_intensity: f64,
    /// Peak horizontal rotation of the mean wind, radians.
    pub meander_amplitude: f64,
    /// Hz
    pub meander_frequency: f64,
    /// Adds the cylinder-wake crossflow near the source.
    pub disturbed: bool,
    /// Extent of the wake region measured from the source, m.
    pub wake_length: f64,
    /// Vortex shedding frequency, Hz.
    pub shedding_frequency: f64,
    /// Crossflow amplitude in units of `turbulence_intensity * mean_speed`.
    pub wake_gain: f64,
}

impl Default for WindModel {
    fn default() -> Self {
        Self {
            mean_speed: 0.25,
            mean_direction: -Vec3::X,
            turbulence_intensity: 0.1,
            meander_amplitude: 0.05,
            meander_frequency: 0.2,
            disturbed: false,
            wake_length: 0.6,
            // Strouhal 0.2 for a 0.05 m cylinder at 0.25 m/s
            shedding_frequency: 1.0,
            wake_gain: 2.0,
        }
    }
}

impl WindModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_speed.is_finite() && self.mean_speed > 0.0) {
            return Err(Error::Config(format!(
                "mean wind speed must be positive, got {}",
                self.mean_speed
            )));
        }
        if !(self.turbulence_intensity.is_finite() && self.turbulence_intensity >= 0.0) {
            return Err(Error::Config("turbulence intensity must be >= 0".into()));
        }
        if (self.mean_direction.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("mean wind direction must have unit norm".into()));
        }
        let finite = [
            self.meander_amplitude,
            self.meander_frequency,
            self.wake_length,
            self.shedding_frequency,
            self.wake_gain,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("wind parameters must be finite".into()));
        }
        if self.wake_length < 0.0 || self.shedding_frequency < 0.0 || self.meander_frequency < 0.0 {
            return Err(Error::Config("wake length and frequencies must be >= 0".into()));
        }
        Ok(())
    }

    /// Standard deviation of the per-axis velocity fluctuation, m/s.
    pub fn fluctuation_std(&self) -> f64 {
        self.turbulence_intensity * self.mean_speed
    }

    /// Horizontal unit vector perpendicular to the mean wind.
    pub fn crosswind(&self) -> Vec3 {
        Vec3::Z.cross(self.mean_direction).normalized().unwrap_or(Vec3::Y)
    }

    fn meander_angle(&self, time: f64) -> f64 {
        self.meander_amplitude * (2.0 * PI * self.meander_frequency * time).sin()
    }

    /// Deterministic part of the wind at `pos`: meandering mean flow plus the
    /// wake crossflow when disturbed.
    pub fn velocity_at(&self, pos: Vec3, source: Vec3, time: f64) -> Vec3 {
        let mean = self.mean_direction.rotate_about(Vec3::Z, self.meander_angle(time)) * self.mean_speed;
        if !self.disturbed || self.wake_length <= 0.0 {
            return mean;
        }
        let offset = pos - source;
        let distance = offset.norm();
        if distance > self.wake_length {
            return mean;
        }
        // vortices are convected downstream with the mean flow
        let downstream = offset.dot(self.mean_direction).max(0.0);
        let phase = 2.0 * PI * self.shedding_frequency * (time - downstream / self.mean_speed);
        let envelope = 1.0 - distance / self.wake_length;
        let amplitude = self.wake_gain * self.fluctuation_std() * envelope;
        mean + self.crosswind() * (amplitude * phase.sin())
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: Vec3,
    pub max: Vec3,
}

impl Domain {
    pub fn contains(&self, p: Vec3) -> bool {
        (self.min.x..=self.max.x).contains(&p.x)
            && (self.min.y..=self.max.y).contains(&p.y)
            && (self.min.z..=self.max.z).contains(&p.z)
    }
}

impl Default for Domain {
    /// The 2 x 1 x 1 m tracked volume; x runs along the tunnel.
    fn default() -> Self {
        Self {
            min: Vec3::new(0.0, 0.0, 0.0),
            max: Vec3::new(2.0, 1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Puff {
    pub center: Vec3,
    pub radius: f64,
    pub mass: f64,
}

impl Puff {
    /// Isotropic Gaussian kernel value at `pos`.
    pub fn concentration_at(&self, pos: Vec3) -> f64 {
        let r2 = self.radius * self.radius;
        let norm = (2.0 * PI * r2).powf(-1.5);
        self.mass * norm * (-(pos - self.center).norm_squared() / (2.0 * r2)).exp()
    }
}

/// Source parameters for a plume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlumeConfig {
    pub source_position: Vec3,
    /// puffs/s
    pub release_rate: f64,
    /// m/s of radius
    pub growth_rate: f64,
    /// m
    pub initial_radius: f64,
    /// odor units per puff
    pub puff_mass: f64,
    pub domain: Domain,
}

impl Default for PlumeConfig {
    fn default() -> Self {
        Self {
            source_position: Vec3::new(2.0, 0.5, 0.5),
            release_rate: 10.0,
            growth_rate: 0.02,
            initial_radius: 0.07,
            puff_mass: 1.0,
            domain: Domain::default(),
        }
    }
}

impl PlumeConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("release_rate", self.release_rate),
            ("initial_radius", self.initial_radius),
            ("puff_mass", self.puff_mass),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.growth_rate.is_finite() && self.growth_rate >= 0.0) {
            return Err(Error::Config("growth_rate must be >= 0".into()));
        }
        if !self.source_position.is_finite() {
            return Err(Error::Config("source position must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlumeState {
    pub puffs: Vec<Puff>,
    /// s
    pub time: f64,
    pub source_position: Vec3,
    pub release_rate: f64,
    pub growth_rate: f64,
    pub initial_radius: f64,
    pub puff_mass: f64,
    pub domain: Domain,
    /// Fractional puff carried over to the next step.
    pub release_residual: f64,
}

impl PlumeState {
    /// Empty plume at `time = 0`.
    pub fn new(cfg: &PlumeConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            puffs: Vec::new(),
            time: 0.0,
            source_position: cfg.source_position,
            release_rate: cfg.release_rate,
            growth_rate: cfg.growth_rate,
            initial_radius: cfg.initial_radius,
            puff_mass: cfg.puff_mass,
            domain: cfg.domain,
            release_residual: 0.0,
        })
    }

    /// Advances the plume by `dt` seconds.
    pub fn step<R: Rng + ?Sized>(&mut self, wind: &WindModel, dt: f64, rng: &mut R) -> Result<()> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(invalid(format!("plume step needs dt >= 0, got {dt}")));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let sigma = wind.fluctuation_std();
        for puff in &mut self.puffs {
            let mut v = wind.velocity_at(puff.center, self.source_position, self.time);
            if sigma > 0.0 {
                let gx: f64 = rng.sample(StandardNormal);
                let gy: f64 = rng.sample(StandardNormal);
                let gz: f64 = rng.sample(StandardNormal);
                v += Vec3::new(gx, gy, gz) * sigma;
            }
            puff.center += v * dt;
            puff.radius += self.growth_rate * dt;
        }
        let domain = self.domain;
        self.puffs.retain(|p| domain.contains(p.center));

        self.release_residual += self.release_rate * dt;
        // tolerance absorbs rounding in the accumulated residual
        while self.release_residual >= 1.0 - 1e-9 {
            self.release_residual -= 1.0;
            self.puffs.push(Puff {
                center: self.source_position,
                radius: self.initial_radius,
                mass: self.puff_mass,
            });
        }
        self.release_residual = self.release_residual.max(0.0);
        self.time += dt;
        Ok(())
    }

    /// Superposed puff concentration at `pos` (odor units / m^3).
    pub fn concentration_at(&self, pos: Vec3) -> f64 {
        self.puffs.iter().map(|p| p.concentration_at(pos)).sum()
    }
}

/// Gaussian sensor noise added to the concentration reading.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorNoise {
    pub mean: f64,
    pub std: f64,
}

/// Binary detection: true when the noisy reading strictly exceeds `threshold`.
pub fn sense<R: Rng + ?Sized>(concentration: f64, threshold: f64, noise: SensorNoise, rng: &mut R) -> bool {
    let g = if noise.std > 0.0 {
        noise.mean + noise.std * rng.sample::<f64, _>(StandardNormal)
    } else {
        noise.mean
    };
    concentration + g > threshold
}
