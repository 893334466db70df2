//! Array geometry, element patterns, steering vectors and channel-matrix
//! assembly.
//!
//! URA axis convention: element rows run along z (zenith), columns along
//! y, broadside is +x. Element `(row, col)` of a URA with spacing `d`
//! wavelengths has phase `2π·d·(col·sinθ·sinφ + row·cosθ)`. Elements are
//! ordered polarization-major: `index = pol·rows·cols + row·cols + col`,
//! with the +45° slant first for cross-polarized arrays.

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::mathkit::{CMat, CVec};
use crate::realization::{ChannelRealization, Ray};

/// Maximum attenuation of the directional element, dB.
const MAX_ATTENUATION_DB: f64 = 30.0;
const HALF_POWER_BEAMWIDTH_DEG: f64 = 65.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarization {
    /// Co-located ±45° slanted pairs.
    CrossPol,
    /// Single vertically polarized element.
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ElementPattern {
    /// Directional sector element with the given boresight gain.
    Directional { max_gain_db: f64 },
    Omni,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    pub spacing_wavelengths: f64,
    pub polarization: Polarization,
    pub pattern: ElementPattern,
}

impl ArrayGeometry {
    /// The BS array: 8×16 cross-polarized directional elements (256 total).
    pub fn default_bs() -> Self {
        Self {
            rows: 8,
            cols: 16,
            spacing_wavelengths: 0.5,
            polarization: Polarization::CrossPol,
            pattern: ElementPattern::Directional { max_gain_db: 10.0 },
        }
    }

    /// The UE array: 2×2 cross-polarized omnidirectional elements (8 total).
    pub fn default_ue() -> Self {
        Self {
            rows: 2,
            cols: 2,
            spacing_wavelengths: 0.5,
            polarization: Polarization::CrossPol,
            pattern: ElementPattern::Omni,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(SimError::arg("array needs at least one row and one column"));
        }
        if !(self.spacing_wavelengths > 0.0) {
            return Err(SimError::arg("element spacing must be > 0"));
        }
        Ok(())
    }

    pub fn n_polarizations(&self) -> usize {
        match self.polarization {
            Polarization::CrossPol => 2,
            Polarization::Single => 1,
        }
    }

    pub fn n_spatial(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_elements(&self) -> usize {
        self.n_spatial() * self.n_polarizations()
    }

    fn slants(&self) -> &'static [f64] {
        match self.polarization {
            Polarization::CrossPol => &[FRAC_PI_4, -FRAC_PI_4],
            Polarization::Single => &[0.0],
        }
    }
}

/// Element power gain in dBi towards `(az, zen)` in the element's local
/// frame (boresight at az = 0°, zen = 90°).
pub fn element_gain(pattern: &ElementPattern, az_deg: f64, zen_deg: f64) -> f64 {
    match *pattern {
        ElementPattern::Omni => 0.0,
        ElementPattern::Directional { max_gain_db } => {
            let vertical = (12.0 * ((zen_deg - 90.0) / HALF_POWER_BEAMWIDTH_DEG).powi(2)).min(MAX_ATTENUATION_DB);
            let horizontal = (12.0 * (az_deg / HALF_POWER_BEAMWIDTH_DEG).powi(2)).min(MAX_ATTENUATION_DB);
            max_gain_db - (vertical + horizontal).min(MAX_ATTENUATION_DB)
        }
    }
}

/// Unit-modulus phases of the spatial (single-polarization) URA elements.
pub fn spatial_phases(geometry: &ArrayGeometry, az_deg: f64, zen_deg: f64) -> Vec<Complex64> {
    let (az, zen) = (az_deg.to_radians(), zen_deg.to_radians());
    let ky = TAU * geometry.spacing_wavelengths * zen.sin() * az.sin();
    let kz = TAU * geometry.spacing_wavelengths * zen.cos();
    let mut out = Vec::with_capacity(geometry.n_spatial());
    for row in 0..geometry.rows {
        for col in 0..geometry.cols {
            out.push(Complex64::from_polar(1.0, col as f64 * ky + row as f64 * kz));
        }
    }
    out
}

/// Unit-norm array response, the spatial phases repeated on each
/// polarization group.
pub fn array_response(geometry: &ArrayGeometry, az_deg: f64, zen_deg: f64) -> CVec {
    let s = spatial_phases(geometry, az_deg, zen_deg);
    let norm = (geometry.n_elements() as f64).sqrt();
    let n_pol = geometry.n_polarizations();
    CVec::from_iterator(
        geometry.n_elements(),
        (0..n_pol).flat_map(|_| s.iter().map(|z| z / norm)),
    )
}

/// `(F_θ, F_φ)` field components for each polarization group.
fn field_components(geometry: &ArrayGeometry, az_deg: f64, zen_deg: f64) -> Vec<(f64, f64)> {
    let amp = 10f64.powf(element_gain(&geometry.pattern, az_deg, zen_deg) / 20.0);
    geometry
        .slants()
        .iter()
        .map(|&zeta| (amp * zeta.cos(), amp * zeta.sin()))
        .collect()
}

/// 2×2 polarization coupling of one ray, row-major θθ, θφ, φθ, φφ.
fn polarization_matrix(ray: &Ray) -> [Complex64; 4] {
    let cross = if ray.xpr.is_infinite() { 0.0 } else { (1.0 / ray.xpr).sqrt() };
    let [tt, tp, pt, pp] = ray.phases;
    [
        Complex64::from_polar(1.0, tt),
        Complex64::from_polar(cross, tp),
        Complex64::from_polar(cross, pt),
        Complex64::from_polar(1.0, pp),
    ]
}

/// A narrowband `Nr × Nt` channel snapshot at the carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: CMat,
    pub carrier_ghz: f64,
    /// Path loss already folded into `entries`, dB.
    pub path_loss_db: f64,
}

impl ChannelMatrix {
    pub fn n_rx(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.entries.ncols()
    }

    /// Entries with the path loss removed.
    pub fn small_scale(&self) -> CMat {
        &self.entries * Complex64::new(10f64.powf(self.path_loss_db / 20.0), 0.0)
    }
}

/// Sum the rays of `realization` into a channel matrix: per ray, the
/// polarization-coupled element fields times the outer product of the
/// spatial responses, weighted by `sqrt(power)`, the delay phase at the
/// carrier and the path gain `10^(−PL/20)`.
pub fn assemble_channel(
    realization: &ChannelRealization,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    carrier_ghz: f64,
) -> Result<ChannelMatrix> {
    if realization.rays.is_empty() {
        return Err(SimError::arg("cannot assemble a channel from an empty realization"));
    }
    tx.validate()?;
    rx.validate()?;
    let n_rs = rx.n_spatial();
    let n_ts = tx.n_spatial();
    let n_rp = rx.n_polarizations();
    let n_tp = tx.n_polarizations();
    let path_gain = 10f64.powf(-realization.path_loss_db / 20.0);
    let mut h = CMat::zeros(rx.n_elements(), tx.n_elements());
    let mut coupling = vec![Complex64::new(0.0, 0.0); n_rp * n_tp];

    for ray in &realization.rays {
        let f_rx = field_components(rx, ray.aoa_az, ray.aoa_zen);
        let f_tx = field_components(tx, ray.aod_az, ray.aod_zen);
        let p = polarization_matrix(ray);
        let delay_phase = -TAU * carrier_ghz * 1e9 * ray.delay_s;
        let amplitude = Complex64::from_polar(ray.power.sqrt() * path_gain, delay_phase.rem_euclid(TAU));
        for (pr, &(rt, rp)) in f_rx.iter().enumerate() {
            for (pt, &(tt, tp)) in f_tx.iter().enumerate() {
                let c = p[0] * (rt * tt) + p[1] * (rt * tp) + p[2] * (rp * tt) + p[3] * (rp * tp);
                coupling[pr * n_tp + pt] = c * amplitude;
            }
        }
        let s_rx = spatial_phases(rx, ray.aoa_az, ray.aoa_zen);
        let s_tx = spatial_phases(tx, ray.aod_az, ray.aod_zen);
        for pt in 0..n_tp {
            for j in 0..n_ts {
                let tx_term = s_tx[j].conj();
                let mut col = h.column_mut(pt * n_ts + j);
                for pr in 0..n_rp {
                    let c = coupling[pr * n_tp + pt] * tx_term;
                    for (i, s) in s_rx.iter().enumerate() {
                        col[pr * n_rs + i] += c * s;
                    }
                }
            }
        }
    }
    Ok(ChannelMatrix {
        entries: h,
        carrier_ghz,
        path_loss_db: realization.path_loss_db,
    })
}
