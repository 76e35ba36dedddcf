//! Exploration-to-exploitation rate as a function of distance to the target.

use serde::{Deserialize, Serialize};

use super::stats::mean_std;
use crate::error::{invalid, Error, Result};
use crate::geometry::{Trajectory, Vec3, VelocitySeries};
use crate::navigator::FlightRecord;
use crate::phase::Phase;
use crate::segmentation::Segmentation;

/// Half-width of a distance bin, m.
pub const DEFAULT_BIN_RADIUS: f64 = 0.06;

/// Centres of contiguous bins of width `2 * radius` covering `[0, max_distance]`.
pub fn distance_bins(radius: f64, max_distance: f64) -> Vec<f64> {
    let width = 2.0 * radius;
    let count = ((max_distance / width) - 1e-9).ceil().max(1.0) as usize;
    (0..count).map(|i| (i as f64 + 0.5) * width).collect()
}

/// Per-bin step counts for a single flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightEer {
    pub bin_radius: f64,
    pub explore: Vec<u64>,
    pub exploit: Vec<u64>,
}

impl FlightEer {
    pub fn bins(&self) -> usize {
        self.explore.len()
    }

    /// `explore / (explore + exploit)`, `None` for an empty bin.
    pub fn fraction(&self, bin: usize) -> Option<f64> {
        let total = self.explore[bin] + self.exploit[bin];
        (total > 0).then(|| self.explore[bin] as f64 / total as f64)
    }

    /// `explore / exploit`, `None` when the bin has no exploitation steps.
    pub fn ratio(&self, bin: usize) -> Option<f64> {
        (self.exploit[bin] > 0).then(|| self.explore[bin] as f64 / self.exploit[bin] as f64)
    }
}

/// Bins every velocity step of a segmented flight by its distance to
/// `target`. Steps further than the last bin are ignored.
pub fn eer_profile(
    record: &FlightRecord,
    seg: &Segmentation,
    target: Vec3,
    bin_radius: f64,
    max_distance: f64,
) -> Result<FlightEer> {
    trajectory_eer(&record.trajectory, seg, target, bin_radius, max_distance)
}

/// [`eer_profile`] for a bare trajectory.
pub fn trajectory_eer(
    traj: &Trajectory,
    seg: &Segmentation,
    target: Vec3,
    bin_radius: f64,
    max_distance: f64,
) -> Result<FlightEer> {
    if bin_radius.is_nan() || bin_radius <= 0.0 {
        return Err(invalid("bin radius must be positive"));
    }
    let expected = traj.len().saturating_sub(4);
    if seg.len != expected {
        return Err(Error::LengthMismatch {
            left: seg.len,
            right: expected,
        });
    }
    let bins = distance_bins(bin_radius, max_distance).len();
    let width = 2.0 * bin_radius;
    let mut explore = vec![0u64; bins];
    let mut exploit = vec![0u64; bins];
    let samples = &traj.samples()[VelocitySeries::OFFSET..];
    for (p, label) in samples.iter().zip(seg.step_labels()) {
        let bin = (p.distance(target) / width).floor() as usize;
        if bin >= bins {
            continue;
        }
        match label {
            Phase::Exploration => explore[bin] += 1,
            Phase::Exploitation => exploit[bin] += 1,
        }
    }
    Ok(FlightEer {
        bin_radius,
        explore,
        exploit,
    })
}

/// Exploration fraction over a whole segmented flight.
pub fn mean_eer(record: &FlightRecord, seg: &Segmentation) -> Result<f64> {
    let expected = record.trajectory.len().saturating_sub(4);
    if seg.len != expected {
        return Err(Error::LengthMismatch {
            left: seg.len,
            right: expected,
        });
    }
    Ok(exploration_fraction(seg))
}

/// Share of steps labelled exploration.
pub fn exploration_fraction(seg: &Segmentation) -> f64 {
    let explore: usize = seg
        .segments()
        .filter(|(_, _, l)| *l == Phase::Exploration)
        .map(|(s, e, _)| e - s)
        .sum();
    explore as f64 / seg.len as f64
}

/// Across-flight summary per distance bin. Bins no flight reached hold
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EerProfile {
    pub bin_radius: f64,
    pub bin_centers: Vec<f64>,
    pub mean_fraction: Vec<Option<f64>>,
    pub std_fraction: Vec<Option<f64>>,
    pub mean_ratio: Vec<Option<f64>>,
    pub std_ratio: Vec<Option<f64>>,
    /// Steps per bin, all flights pooled.
    pub counts: Vec<u64>,
    /// Flights with at least one step in the bin.
    pub flights: Vec<usize>,
}

impl EerProfile {
    pub fn aggregate(flights: &[FlightEer]) -> Result<EerProfile> {
        let first = flights.first().ok_or_else(|| invalid("no flights to aggregate"))?;
        let bins = first.bins();
        if flights
            .iter()
            .any(|f| f.bins() != bins || f.bin_radius != first.bin_radius)
        {
            return Err(invalid("flights were binned differently"));
        }
        let width = 2.0 * first.bin_radius;
        let mut profile = EerProfile {
            bin_radius: first.bin_radius,
            bin_centers: (0..bins).map(|i| (i as f64 + 0.5) * width).collect(),
            mean_fraction: Vec::with_capacity(bins),
            std_fraction: Vec::with_capacity(bins),
            mean_ratio: Vec::with_capacity(bins),
            std_ratio: Vec::with_capacity(bins),
            counts: Vec::with_capacity(bins),
            flights: Vec::with_capacity(bins),
        };
        for b in 0..bins {
            let fractions: Vec<f64> = flights.iter().filter_map(|f| f.fraction(b)).collect();
            let ratios: Vec<f64> = flights.iter().filter_map(|f| f.ratio(b)).collect();
            let (mf, sf) = split(mean_std(&fractions));
            let (mr, sr) = split(mean_std(&ratios));
            profile.mean_fraction.push(mf);
            profile.std_fraction.push(sf);
            profile.mean_ratio.push(mr);
            profile.std_ratio.push(sr);
            profile
                .counts
                .push(flights.iter().map(|f| f.explore[b] + f.exploit[b]).sum());
            profile.flights.push(fractions.len());
        }
        Ok(profile)
    }
}

fn split(v: Option<(f64, f64)>) -> (Option<f64>, Option<f64>) {
    match v {
        Some((m, s)) => (Some(m), Some(s)),
        None => (None, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn straight_record(n: usize) -> FlightRecord {
        // moves towards the target at the origin from x = 1
        let samples = (0..n).map(|i| Vec3::new(1.0 - i as f64 / n as f64, 0.0, 0.0)).collect();
        FlightRecord {
            trajectory: Trajectory::new(samples, 0.1).unwrap(),
            true_labels: vec![Phase::Exploration; n],
            success: true,
            seed: 0,
            scenario_id: "t".into(),
        }
    }

    #[test]
    fn bins_cover_release_distance() {
        let c = distance_bins(0.06, 2.0);
        assert_eq!(c.len(), 17);
        assert_relative_eq!(c[0], 0.06);
        assert_relative_eq!(c[16], 1.98);
        assert_eq!(distance_bins(0.5, 2.0).len(), 2);
    }

    #[test]
    fn all_exploration() {
        let r = straight_record(104);
        let seg = Segmentation::alternating(vec![], Phase::Exploration, 100).unwrap();
        let f = eer_profile(&r, &seg, Vec3::ZERO, 0.06, 2.0).unwrap();
        for b in 0..f.bins() {
            if f.explore[b] > 0 {
                assert_eq!(f.fraction(b), Some(1.0));
                assert_eq!(f.ratio(b), None);
            }
        }
        assert_eq!(mean_eer(&r, &seg).unwrap(), 1.0);
    }

    #[test]
    fn all_exploitation() {
        let r = straight_record(104);
        let seg = Segmentation::alternating(vec![], Phase::Exploitation, 100).unwrap();
        let f = eer_profile(&r, &seg, Vec3::ZERO, 0.06, 2.0).unwrap();
        for b in 0..f.bins() {
            if f.exploit[b] > 0 {
                assert_eq!(f.fraction(b), Some(0.0));
                assert_eq!(f.ratio(b), Some(0.0));
            }
        }
        assert_eq!(mean_eer(&r, &seg).unwrap(), 0.0);
    }

    #[test]
    fn bin_counts() {
        let f = FlightEer {
            bin_radius: 0.06,
            explore: vec![6],
            exploit: vec![3],
        };
        assert_eq!(f.ratio(0), Some(2.0));
        assert_relative_eq!(f.fraction(0).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn forty_sixty_flight() {
        let r = straight_record(104);
        let seg = Segmentation::alternating(vec![40], Phase::Exploration, 100).unwrap();
        assert_relative_eq!(mean_eer(&r, &seg).unwrap(), 0.4);
    }

    #[test]
    fn aggregation_and_consistency() {
        let a = FlightEer {
            bin_radius: 0.06,
            explore: vec![6, 0, 1],
            exploit: vec![3, 0, 1],
        };
        let b = FlightEer {
            bin_radius: 0.06,
            explore: vec![2, 0, 4],
            exploit: vec![2, 0, 0],
        };
        let p = EerProfile::aggregate(&[a.clone(), b]).unwrap();
        assert_relative_eq!(p.mean_fraction[0].unwrap(), (2.0 / 3.0 + 0.5) / 2.0);
        assert_eq!(p.mean_fraction[1], None);
        assert_eq!(p.counts, vec![13, 0, 6]);
        assert_eq!(p.flights, vec![2, 0, 2]);
        assert_eq!(p.mean_ratio[2], Some(1.0));
        for bin in 0..3 {
            if let (Some(f), Some(r)) = (a.fraction(bin), a.ratio(bin)) {
                assert_relative_eq!(r, f / (1.0 - f), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let r = straight_record(50);
        let seg = Segmentation::alternating(vec![], Phase::Exploration, 10).unwrap();
        assert!(eer_profile(&r, &seg, Vec3::ZERO, 0.06, 2.0).is_err());
        assert!(mean_eer(&r, &seg).is_err());
    }
}
