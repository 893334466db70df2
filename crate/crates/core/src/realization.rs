//! The model-agnostic multipath description both generators produce.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::mathkit::wrap_degrees;
use crate::scenario::{d3d_from_d2d, ChannelModel, LinkState};

/// One multipath component. Angles are in degrees; azimuths in
/// `[-180, 180)`, zeniths in `[0, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub delay_s: f64,
    /// Linear fraction of the small-scale power.
    pub power: f64,
    pub aod_az: f64,
    pub aod_zen: f64,
    pub aoa_az: f64,
    pub aoa_zen: f64,
    /// Cross-polarization power ratio (linear); `f64::INFINITY` for a
    /// perfectly co-polar ray.
    pub xpr: f64,
    /// Initial phases for the θθ, θφ, φθ and φφ polarization pairs.
    pub phases: [f64; 4],
}

impl Ray {
    /// The specular LOS component: no cross-polar leakage, φφ inverted.
    pub fn specular(power: f64, dir: &LosDirection) -> Self {
        Ray {
            delay_s: 0.0,
            power,
            aod_az: dir.aod_az,
            aod_zen: dir.aod_zen,
            aoa_az: dir.aoa_az,
            aoa_zen: dir.aoa_zen,
            xpr: f64::INFINITY,
            phases: [0.0, 0.0, 0.0, std::f64::consts::PI],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub rays: Vec<Ray>,
    pub link_state: LinkState,
    /// Large-scale path loss including shadow fading, in dB.
    pub path_loss_db: f64,
    pub model: ChannelModel,
}

impl ChannelRealization {
    pub fn total_power(&self) -> f64 {
        self.rays.iter().map(|r| r.power).sum()
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        if self.rays.is_empty() {
            return Err(SimError::arg("realization has no rays"));
        }
        let total = self.total_power();
        if (total - 1.0).abs() > tol {
            return Err(SimError::arg(format!("ray powers sum to {total}, expected 1")));
        }
        Ok(())
    }
}

/// Where a user sits relative to its serving BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub d2d_m: f64,
    /// Azimuth of the UE seen from the BS, relative to the BS boresight.
    pub azimuth_deg: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
}

impl LinkGeometry {
    pub fn d3d_m(&self) -> f64 {
        d3d_from_d2d(self.d2d_m, self.bs_height_m, self.ue_height_m)
    }

    pub fn los_direction(&self) -> LosDirection {
        let elev = (self.bs_height_m - self.ue_height_m).atan2(self.d2d_m).to_degrees();
        let aod_zen = 90.0 + elev;
        LosDirection {
            aod_az: wrap_degrees(self.azimuth_deg),
            aod_zen,
            aoa_az: wrap_degrees(self.azimuth_deg + 180.0),
            aoa_zen: 180.0 - aod_zen,
        }
    }
}

/// Geometric LOS departure and arrival angles, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosDirection {
    pub aod_az: f64,
    pub aod_zen: f64,
    pub aoa_az: f64,
    pub aoa_zen: f64,
}

impl Default for LosDirection {
    fn default() -> Self {
        Self {
            aod_az: 0.0,
            aod_zen: 90.0,
            aoa_az: -180.0,
            aoa_zen: 90.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn los_direction_points_down_from_bs() {
        let g = LinkGeometry {
            d2d_m: 8.5,
            azimuth_deg: 30.0,
            bs_height_m: 10.0,
            ue_height_m: 1.5,
        };
        let d = g.los_direction();
        assert!((d.aod_zen - 135.0).abs() < 1e-9);
        assert!((d.aoa_zen - 45.0).abs() < 1e-9);
        assert!((d.aoa_az - (-150.0)).abs() < 1e-9);
        assert!((g.d3d_m() - 8.5 * 2f64.sqrt()).abs() < 1e-9);
    }
}
