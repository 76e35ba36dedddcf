//! Vectors, uniformly sampled trajectories and the five-point stencil.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A point or velocity in tunnel coordinates (m or m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > f64::EPSILON).then(|| self / n)
    }

    /// Rescales the vector so that its norm does not exceed `max`.
    pub fn clamp_norm(self, max: f64) -> Vec3 {
        let n = self.norm();
        if n > max {
            if max <= 0.0 {
                Vec3::ZERO
            } else {
                self * (max / n)
            }
        } else {
            self
        }
    }

    /// Rodrigues rotation of `self` by `angle` radians about the unit `axis`.
    pub fn rotate_about(self, axis: Vec3, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        self * c + axis.cross(self) * s + axis * (axis.dot(self) * (1.0 - c))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Positions sampled at a fixed interval `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    samples: Vec<Vec3>,
    dt: f64,
}

impl Trajectory {
    pub fn new(samples: Vec<Vec3>, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("sampling interval must be positive, got {dt}")));
        }
        if samples.is_empty() {
            return Err(invalid("trajectory has no samples"));
        }
        if let Some(i) = samples.iter().position(|p| !p.is_finite()) {
            return Err(invalid(format!("sample {i} is not finite")));
        }
        Ok(Self { samples, dt })
    }

    pub fn samples(&self) -> &[Vec3] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Vec3> {
        self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    /// Total polyline length.
    pub fn arc_length(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Resamples to `count` points equally spaced in arc length.
    ///
    /// The sampling interval is stretched so the duration is preserved.
    pub fn resample_by_arc_length(&self, count: usize) -> Result<Trajectory> {
        if count == 0 {
            return Err(invalid("cannot resample to zero points"));
        }
        let mut cumulative = Vec::with_capacity(self.samples.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in self.samples.windows(2) {
            acc += w[0].distance(w[1]);
            cumulative.push(acc);
        }
        let total = acc;
        let dt = if count > 1 {
            self.duration().max(self.dt) / (count - 1) as f64
        } else {
            self.dt
        };
        if total <= 0.0 || count == 1 {
            return Trajectory::new(vec![self.samples[0]; count], dt);
        }

        let mut out = Vec::with_capacity(count);
        let mut seg = 0;
        for j in 0..count {
            let target = total * j as f64 / (count - 1) as f64;
            while seg + 2 < cumulative.len() && cumulative[seg + 1] < target {
                seg += 1;
            }
            let (s0, s1) = (cumulative[seg], cumulative[seg + 1]);
            let p = if s1 > s0 {
                let u = ((target - s0) / (s1 - s0)).clamp(0.0, 1.0);
                self.samples[seg] + (self.samples[seg + 1] - self.samples[seg]) * u
            } else {
                self.samples[seg]
            };
            out.push(p);
        }
        // Pin the endpoints exactly.
        out[0] = self.samples[0];
        out[count - 1] = *self.samples.last().unwrap();
        Trajectory::new(out, dt)
    }
}

/// Stencil velocities for a trajectory; `values[j]` belongs to trajectory
/// sample `j + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocitySeries {
    pub values: Vec<Vec3>,
    pub offset: usize,
}

impl VelocitySeries {
    /// Number of trajectory samples lost at each end of the stencil.
    pub const OFFSET: usize = 2;

    pub fn new(values: Vec<Vec3>) -> Self {
        Self {
            values,
            offset: Self::OFFSET,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> VelocitySeries {
        VelocitySeries {
            values: self.values.iter().map(|v| *v * factor).collect(),
            offset: self.offset,
        }
    }
}

/// Fourth-order central difference of positions over interior samples.
///
/// `v_i = (l[i-2] - 8 l[i-1] + 8 l[i+1] - l[i+2]) / (12 dt)` for
/// `i in 2..n-2`, so the result has `n - 4` entries.
pub fn velocity_profile(traj: &Trajectory) -> Result<VelocitySeries> {
    let l = traj.samples();
    if l.len() < 5 {
        return Err(invalid(format!(
            "velocity stencil needs at least 5 samples, got {}",
            l.len()
        )));
    }
    let denom = 12.0 * traj.dt();
    let values = l
        .windows(5)
        .map(|w| ((w[3] - w[1]) * 8.0 - (w[4] - w[0])) / denom)
        .collect();
    Ok(VelocitySeries::new(values))
}
