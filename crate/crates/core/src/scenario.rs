//! Scenarios, LOS probability, large-scale path loss and cell sizing.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, SimError};
use crate::mathkit::RngStream;

/// Thermal noise power spectral density at room temperature.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;
/// Lower bound on the T-R separation for dropped users.
pub const MIN_DROP_DISTANCE_M: f64 = 10.0;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Environment {
    #[serde(rename = "umi", alias = "umi-street-canyon")]
    UmiStreetCanyon,
    #[serde(rename = "uma")]
    Uma,
}

impl Environment {
    pub fn bs_height_m(self) -> f64 {
        match self {
            Environment::UmiStreetCanyon => 10.0,
            Environment::Uma => 25.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Environment::UmiStreetCanyon => "umi",
            Environment::Uma => "uma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelModel {
    #[serde(rename = "3gpp")]
    ThreeGpp,
    #[serde(rename = "nyusim")]
    Nyusim,
}

impl ChannelModel {
    pub fn tag(self) -> &'static str {
        match self {
            ChannelModel::ThreeGpp => "3gpp",
            ChannelModel::Nyusim => "nyusim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub environment: Environment,
    pub model: ChannelModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub fn tag(self) -> &'static str {
        match self {
            LinkState::Los => "los",
            LinkState::Nlos => "nlos",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub carrier_ghz: f64,
    pub bandwidth_mhz: f64,
    pub noise_figure_db: f64,
    pub bs_element_max_gain_db: f64,
    /// Beamforming gain credited when sizing the cell. Defaults to one
    /// polarization of the 8×16 BS panel, `10·log10(128)`.
    pub array_gain_db: f64,
    pub snr_threshold_db: f64,
    pub coverage_fraction: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 30.0,
            carrier_ghz: 28.0,
            bandwidth_mhz: 100.0,
            noise_figure_db: 10.0,
            bs_element_max_gain_db: 10.0,
            array_gain_db: 10.0 * 128.0f64.log10(),
            snr_threshold_db: 5.0,
            coverage_fraction: 0.95,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_mhz > 0.0) {
            return Err(SimError::config("bandwidth_mhz", "must be > 0"));
        }
        if !(self.coverage_fraction > 0.0 && self.coverage_fraction < 1.0) {
            return Err(SimError::config("coverage_fraction", "must lie in (0, 1)"));
        }
        if !(0.5..=100.0).contains(&self.carrier_ghz) {
            return Err(SimError::config("carrier_ghz", "must lie in [0.5, 100] GHz"));
        }
        for (key, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("noise_figure_db", self.noise_figure_db),
            ("bs_element_max_gain_db", self.bs_element_max_gain_db),
            ("array_gain_db", self.array_gain_db),
            ("snr_threshold_db", self.snr_threshold_db),
        ] {
            if !v.is_finite() {
                return Err(SimError::config(key, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn noise_power_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_PER_HZ + 10.0 * (self.bandwidth_mhz * 1e6).log10() + self.noise_figure_db
    }

    /// Largest path loss that still meets the SNR threshold.
    pub fn max_path_loss_db(&self) -> f64 {
        self.tx_power_dbm + self.bs_element_max_gain_db + self.array_gain_db
            - self.noise_power_dbm()
            - self.snr_threshold_db
    }
}

/// Path-loss and LOS-probability constants for one (environment, state).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams {
    pub ple: f64,
    pub sf_sigma_db: f64,
    pub abg_alpha: f64,
    pub abg_beta_db: f64,
    pub abg_gamma: f64,
    pub los_d1_m: f64,
    pub los_d2_m: f64,
}

impl PathLossParams {
    fn validate(&self) -> Result<()> {
        if !(self.ple > 0.0) {
            return Err(SimError::arg(format!("PLE must be > 0, got {}", self.ple)));
        }
        if !(self.sf_sigma_db >= 0.0) {
            return Err(SimError::arg(format!("SF sigma must be >= 0, got {}", self.sf_sigma_db)));
        }
        if !(self.los_d1_m > 0.0 && self.los_d2_m > 0.0) {
            return Err(SimError::arg("LOS distance constants must be > 0"));
        }
        Ok(())
    }

    /// Mean (shadow-free) path loss under the law each model uses: CI for
    /// NYUSIM, ABG for 3GPP.
    pub fn mean_path_loss_db(&self, model: ChannelModel, carrier_ghz: f64, d3d: f64) -> Result<f64> {
        match model {
            ChannelModel::Nyusim => path_loss_ci(carrier_ghz, d3d, self.ple, 0.0),
            ChannelModel::ThreeGpp => path_loss_abg(carrier_ghz, d3d, self, 0.0),
        }
    }
}

#[derive(Debug, Deserialize)]
struct PathLossRow {
    environment: Environment,
    state: LinkState,
    ple: f64,
    sf_sigma_db: f64,
    abg_alpha: f64,
    abg_beta_db: f64,
    abg_gamma: f64,
    los_d1_m: f64,
    los_d2_m: f64,
}

/// One [`PathLossParams`] row per (environment, state).
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossTable {
    rows: Vec<(Environment, LinkState, PathLossParams)>,
}

const DEFAULT_PATHLOSS_CSV: &str = include_str!("../data/pathloss_params.csv");

impl Default for PathLossTable {
    fn default() -> Self {
        Self::from_csv(DEFAULT_PATHLOSS_CSV).expect("shipped path-loss table parses")
    }
}

impl PathLossTable {
    pub fn from_csv(text: &str) -> Result<Self> {
        let table_err = |message: String| SimError::Table {
            table: "pathloss".into(),
            message,
        };
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, rec) in reader.deserialize::<PathLossRow>().enumerate() {
            let r = rec.map_err(|e| table_err(format!("row {}: {e}", i + 1)))?;
            let p = PathLossParams {
                ple: r.ple,
                sf_sigma_db: r.sf_sigma_db,
                abg_alpha: r.abg_alpha,
                abg_beta_db: r.abg_beta_db,
                abg_gamma: r.abg_gamma,
                los_d1_m: r.los_d1_m,
                los_d2_m: r.los_d2_m,
            };
            p.validate().map_err(|e| table_err(format!("row {}: {e}", i + 1)))?;
            rows.push((r.environment, r.state, p));
        }
        let table = Self { rows };
        for env in [Environment::UmiStreetCanyon, Environment::Uma] {
            for state in [LinkState::Los, LinkState::Nlos] {
                if table.find(env, state).is_none() {
                    return Err(table_err(format!("missing row {}/{}", env.tag(), state.tag())));
                }
            }
        }
        Ok(table)
    }

    fn find(&self, env: Environment, state: LinkState) -> Option<&PathLossParams> {
        self.rows
            .iter()
            .find(|(e, s, _)| *e == env && *s == state)
            .map(|(_, _, p)| p)
    }

    pub fn get(&self, env: Environment, state: LinkState) -> &PathLossParams {
        self.find(env, state).expect("table validated on construction")
    }
}

fn check_distance(d: f64, what: &str) -> Result<()> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(SimError::arg(format!("{what} must be a finite non-negative distance, got {d}")));
    }
    Ok(())
}

/// `min(d1/d, 1)·(1 − e^{−d/d2}) + e^{−d/d2}`, the shared LOS-probability form.
pub fn los_inner(d2d: f64, d1: f64, d2: f64) -> f64 {
    if d2d <= d1 {
        return 1.0;
    }
    let e = (-d2d / d2).exp();
    (d1 / d2d) * (1.0 - e) + e
}

/// 3GPP LOS probability for the outdoor scenarios.
pub fn los_probability_3gpp(d2d: f64, env: Environment, ue_height_m: f64) -> Result<f64> {
    check_distance(d2d, "2D distance")?;
    let p = match env {
        Environment::UmiStreetCanyon => los_inner(d2d, 18.0, 36.0),
        Environment::Uma => {
            let base = los_inner(d2d, 18.0, 63.0);
            if d2d <= 18.0 {
                base
            } else {
                let c = if ue_height_m <= 13.0 {
                    0.0
                } else {
                    ((ue_height_m - 13.0) / 10.0).powf(1.5)
                };
                base * (1.0 + c * 1.25 * (d2d / 100.0).powi(3) * (-d2d / 150.0).exp())
            }
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

/// NYUSIM LOS probability: the 3GPP-form expression squared, with the
/// distance constants taken from `params`.
pub fn los_probability_nyusim(d2d: f64, params: &PathLossParams) -> Result<f64> {
    check_distance(d2d, "2D distance")?;
    let inner = los_inner(d2d, params.los_d1_m, params.los_d2_m);
    Ok(inner * inner)
}

pub fn draw_link_state(rng: &mut RngStream, p_los: f64) -> Result<LinkState> {
    Ok(if rng.bernoulli(p_los)? {
        LinkState::Los
    } else {
        LinkState::Nlos
    })
}

fn check_pl_args(carrier_ghz: f64, d3d: f64) -> Result<()> {
    if !(d3d >= 1.0) {
        return Err(SimError::arg(format!("3D distance must be >= 1 m, got {d3d}")));
    }
    if !(carrier_ghz > 0.0) {
        return Err(SimError::arg(format!("carrier frequency must be > 0, got {carrier_ghz}")));
    }
    Ok(())
}

/// Close-in free-space reference distance path loss (1 m anchor), in dB.
pub fn path_loss_ci(carrier_ghz: f64, d3d: f64, ple: f64, sf_db: f64) -> Result<f64> {
    check_pl_args(carrier_ghz, d3d)?;
    Ok(32.4 + 10.0 * ple * d3d.log10() + 20.0 * carrier_ghz.log10() + sf_db)
}

/// Alpha-beta-gamma path loss, in dB.
pub fn path_loss_abg(carrier_ghz: f64, d3d: f64, params: &PathLossParams, sf_db: f64) -> Result<f64> {
    check_pl_args(carrier_ghz, d3d)?;
    Ok(10.0 * params.abg_alpha * d3d.log10()
        + params.abg_beta_db
        + 10.0 * params.abg_gamma * carrier_ghz.log10()
        + sf_db)
}

/// Effective-height breakpoint distance `4·h'_BS·h'_UT·fc/c` with 1 m
/// effective environment height.
pub fn breakpoint_distance_m(carrier_ghz: f64, bs_height_m: f64, ue_height_m: f64) -> f64 {
    4.0 * (bs_height_m - 1.0) * (ue_height_m - 1.0) * carrier_ghz * 1e9 / SPEED_OF_LIGHT
}

/// CI path loss with a second slope `far_ple` beyond `breakpoint_m`.
pub fn path_loss_ci_two_slope(
    carrier_ghz: f64,
    d3d: f64,
    ple: f64,
    far_ple: f64,
    breakpoint_m: f64,
    sf_db: f64,
) -> Result<f64> {
    if d3d <= breakpoint_m || breakpoint_m < 1.0 {
        return path_loss_ci(carrier_ghz, d3d, ple, sf_db);
    }
    let at_bp = path_loss_ci(carrier_ghz, breakpoint_m, ple, 0.0)?;
    Ok(at_bp + 10.0 * far_ple * (d3d / breakpoint_m).log10() + sf_db)
}

pub fn sample_shadow_fading(rng: &mut RngStream, sigma_db: f64) -> Result<f64> {
    if !(sigma_db >= 0.0) {
        return Err(SimError::arg(format!("shadow-fading sigma must be >= 0, got {sigma_db}")));
    }
    if sigma_db == 0.0 {
        return Ok(0.0);
    }
    rng.normal(0.0, sigma_db)
}

/// Standard-normal quantile at `p`.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// 3D T-R distance at which `mean_PL(d) + z·σ` reaches the link budget's
/// maximum path loss, `z` being the coverage-fraction quantile.
pub fn cell_radius_for_coverage(
    budget: &LinkBudget,
    params: &PathLossParams,
    model: ChannelModel,
) -> Result<f64> {
    budget.validate()?;
    let margin = normal_quantile(budget.coverage_fraction) * params.sf_sigma_db;
    let allowed = budget.max_path_loss_db() - margin;
    let at_floor = params.mean_path_loss_db(model, budget.carrier_ghz, MIN_DROP_DISTANCE_M)?;
    if allowed <= at_floor {
        return Err(SimError::config(
            "link_budget",
            format!(
                "budget cannot cover the {MIN_DROP_DISTANCE_M} m lower bound: deficit {:.2} dB",
                at_floor - allowed
            ),
        ));
    }
    let fc_log = budget.carrier_ghz.log10();
    let exponent = match model {
        ChannelModel::Nyusim => (allowed - 32.4 - 20.0 * fc_log) / (10.0 * params.ple),
        ChannelModel::ThreeGpp => {
            (allowed - params.abg_beta_db - 10.0 * params.abg_gamma * fc_log) / (10.0 * params.abg_alpha)
        }
    };
    Ok(10f64.powf(exponent))
}

pub fn d3d_from_d2d(d2d: f64, bs_height_m: f64, ue_height_m: f64) -> f64 {
    let dh = bs_height_m - ue_height_m;
    (d2d * d2d + dh * dh).sqrt()
}

pub fn d2d_from_d3d(d3d: f64, bs_height_m: f64, ue_height_m: f64) -> f64 {
    let dh = bs_height_m - ue_height_m;
    (d3d * d3d - dh * dh).max(0.0).sqrt()
}
