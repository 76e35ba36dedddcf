//! Path comparison, exploration-rate profiles and the statistics used to
//! summarize simulated experiments.

mod dtw;
mod eer;
mod stats;

use serde::{Deserialize, Serialize};

pub use dtw::{dtw_align, dtw_mae, fit_report, r_squared, Alignment, FitReport};
pub use eer::{
    distance_bins, eer_profile, exploration_fraction, mean_eer, trajectory_eer, EerProfile, FlightEer,
    DEFAULT_BIN_RADIUS,
};
pub use stats::{
    ad_k_sample, axis_variance_fractions, mean_std, principal_variance_fractions, ranks, spearman, AndersonDarling,
    VarianceMode,
};

use crate::geometry::{Trajectory, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    XY,
    XZ,
    YZ,
}

/// Zeroes the coordinate normal to `plane`.
pub fn project_plane(traj: &Trajectory, plane: Plane) -> Trajectory {
    let samples = traj
        .samples()
        .iter()
        .map(|p| match plane {
            Plane::XY => Vec3::new(p.x, p.y, 0.0),
            Plane::XZ => Vec3::new(p.x, 0.0, p.z),
            Plane::YZ => Vec3::new(0.0, p.y, p.z),
        })
        .collect();
    Trajectory::new(samples, traj.dt()).expect("projection keeps a valid trajectory")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections() {
        let t = Trajectory::new(vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 7.0)], 0.1).unwrap();
        assert_eq!(project_plane(&t, Plane::XY).samples()[0], Vec3::new(1.0, 2.0, 0.0));
        assert_eq!(project_plane(&t, Plane::XZ).samples()[0], Vec3::new(1.0, 0.0, 3.0));
        assert_eq!(project_plane(&t, Plane::YZ).samples()[0], Vec3::new(0.0, 2.0, 3.0));
        for plane in [Plane::XY, Plane::XZ, Plane::YZ] {
            let once = project_plane(&t, plane);
            assert_eq!(project_plane(&once, plane), once);
            assert_eq!(once.len(), t.len());
        }
    }
}
