//! Simulation configuration: a TOML document whose every key has a default.
//!
//! An empty file yields the reference setup: 28 GHz, 100 MHz, a 256-element
//! BS and an 8-element UE, three users and 1000 drops in UMi.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::antenna::ArrayGeometry;
use crate::error::{Result, SimError};
use crate::scenario::{Environment, LinkBudget, LinkState, MIN_DROP_DISTANCE_M};

pub const DEFAULT_SEED: u64 = 2017;

/// Which channel families a campaign runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelSelection {
    #[serde(rename = "3gpp")]
    ThreeGpp,
    #[serde(rename = "nyusim")]
    Nyusim,
    #[serde(rename = "rayleigh")]
    Rayleigh,
    #[serde(rename = "all")]
    All,
}

impl std::str::FromStr for ModelSelection {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3gpp" => Ok(Self::ThreeGpp),
            "nyusim" => Ok(Self::Nyusim),
            "rayleigh" => Ok(Self::Rayleigh),
            "all" => Ok(Self::All),
            other => Err(SimError::config("model", format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub seed: u64,
    pub drops: usize,
    pub users: usize,
    pub environment: Environment,
    pub model: ModelSelection,
    pub ue_height_m: f64,
    /// Users are dropped uniformly in azimuth within ±this of boresight.
    pub sector_half_width_deg: f64,
    /// Link state whose path-loss law sizes the cell.
    pub radius_link_state: LinkState,
    /// Use a two-slope CI law with a breakpoint for 3GPP LOS links instead
    /// of the ABG fit.
    pub los_two_slope: bool,
    /// Path-loss exponent beyond the breakpoint when `los_two_slope` is set.
    pub los_far_ple: f64,
    pub link_budget: LinkBudget,
    pub bs_array: ArrayGeometry,
    pub ue_array: ArrayGeometry,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            drops: 1000,
            users: 3,
            environment: Environment::UmiStreetCanyon,
            model: ModelSelection::All,
            ue_height_m: 1.5,
            sector_half_width_deg: 60.0,
            radius_link_state: LinkState::Nlos,
            los_two_slope: false,
            los_far_ple: 4.0,
            link_budget: LinkBudget::default(),
            bs_array: ArrayGeometry::default_bs(),
            ue_array: ArrayGeometry::default_ue(),
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.drops == 0 {
            return Err(SimError::config("drops", "must be at least 1"));
        }
        if self.drops >= 1 << 40 {
            return Err(SimError::config("drops", "too many drops"));
        }
        if self.users == 0 {
            return Err(SimError::config("users", "must be at least 1"));
        }
        if !(self.ue_height_m > 0.0 && self.ue_height_m < self.environment.bs_height_m()) {
            return Err(SimError::config("ue_height_m", "must be positive and below the BS height"));
        }
        if !(self.sector_half_width_deg > 0.0 && self.sector_half_width_deg <= 180.0) {
            return Err(SimError::config("sector_half_width_deg", "must lie in (0, 180]"));
        }
        if !(self.los_far_ple > 0.0) {
            return Err(SimError::config("los_far_ple", "must be > 0"));
        }
        self.link_budget.validate()?;
        self.bs_array
            .validate()
            .map_err(|e| SimError::config("bs_array", e.to_string()))?;
        self.ue_array
            .validate()
            .map_err(|e| SimError::config("ue_array", e.to_string()))?;
        let interferers = (self.users - 1) * self.ue_array.n_elements();
        if interferers >= self.bs_array.n_elements() {
            return Err(SimError::config(
                "users",
                format!(
                    "{} users leave no null space on a {}-element BS array",
                    self.users,
                    self.bs_array.n_elements()
                ),
            ));
        }
        Ok(())
    }

    /// Parse and validate a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(text, s.start));
            let key = e
                .message()
                .split('`')
                .nth(1)
                .unwrap_or("config")
                .to_string();
            SimError::Config {
                key,
                line,
                message: e.message().trim().to_string(),
            }
        })?;
        cfg.validate().map_err(|e| match e {
            SimError::Config { key, message, .. } => {
                let line = line_of_key(text, &key);
                SimError::Config { key, line, message }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Config {
            key: "config".into(),
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Lower bound of the user-drop annulus.
    pub fn min_distance_m(&self) -> f64 {
        MIN_DROP_DISTANCE_M
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// 1-based line on which `key` is assigned, if it appears in the text.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_reference_setup() {
        let c = SystemConfig::from_toml("").unwrap();
        assert_eq!(c, SystemConfig::default());
        assert_eq!(c.link_budget.carrier_ghz, 28.0);
        assert_eq!(c.link_budget.bandwidth_mhz, 100.0);
        assert_eq!(c.bs_array.n_elements(), 256);
        assert_eq!(c.ue_array.n_elements(), 8);
        assert_eq!((c.users, c.drops), (3, 1000));
    }

    #[test]
    fn zero_drops_names_key_and_line() {
        let err = SimError::to_string(&SystemConfig::from_toml("seed = 4\ndrops = 0\n").unwrap_err());
        assert!(err.contains("`drops`"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let e = SystemConfig::from_toml("users = 2\n\n[link_budget]\nbogus = 1\n").unwrap_err();
        match e {
            SimError::Config { key, line, .. } => {
                assert_eq!(key, "bogus");
                assert_eq!(line, Some(4));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn nested_key_validation_line() {
        let e = SystemConfig::from_toml("[link_budget]\ncarrier_ghz = 400.0\n").unwrap_err();
        assert!(matches!(e, SimError::Config { line: Some(2), .. }), "{e}");
    }

    #[test]
    fn round_trip() {
        let mut c = SystemConfig::default();
        c.seed = 99;
        c.environment = Environment::Uma;
        c.model = ModelSelection::Nyusim;
        c.link_budget.tx_power_dbm = 33.5;
        let back = SystemConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn too_many_users_for_null_space() {
        let e = SystemConfig::from_toml("users = 40\n").unwrap_err();
        assert!(e.to_string().contains("`users`"));
    }

    #[test]
    fn two_slope_keys() {
        let c = SystemConfig::from_toml("los_two_slope = true
los_far_ple = 3.5
").unwrap();
        assert!(c.los_two_slope);
        let e = SystemConfig::from_toml("los_two_slope = true
los_far_ple = 0.0
").unwrap_err();
        assert!(matches!(e, SimError::Config { line: Some(2), .. }), "{e}");
    }
}
