//! User dropping, per-drop evaluation and campaign aggregation.
//!
//! Every drop draws from its own RNG stream keyed by (model, drop index,
//! attempt), so results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::antenna::assemble_channel;
use crate::beamform::{bd_precode, eigen_report, hybrid_precode, rayleigh_baseline, spectral_efficiency, EigenReport};
use crate::chan3gpp::{realize_3gpp, LspTable};
use crate::channyu::{realize_nyusim, NyuTable};
use crate::config::{ModelSelection, SystemConfig};
use crate::error::{Result, SimError};
use crate::mathkit::{db_to_linear, CMat, RngStream};
use crate::realization::{ChannelRealization, LinkGeometry};
use crate::scenario::{
    breakpoint_distance_m, cell_radius_for_coverage, d2d_from_d3d, path_loss_ci_two_slope, draw_link_state, los_probability_3gpp, los_probability_nyusim,
    sample_shadow_fading, ChannelModel, LinkState, PathLossTable,
};

/// Redraws allowed for one drop before the campaign gives up.
pub const MAX_ATTEMPTS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CampaignModel {
    #[serde(rename = "3gpp")]
    ThreeGpp,
    #[serde(rename = "nyusim")]
    Nyusim,
    #[serde(rename = "rayleigh")]
    Rayleigh,
}

impl CampaignModel {
    pub fn tag(self) -> &'static str {
        match self {
            CampaignModel::ThreeGpp => "3gpp",
            CampaignModel::Nyusim => "nyusim",
            CampaignModel::Rayleigh => "rayleigh",
        }
    }

    fn stream_tag(self) -> u64 {
        match self {
            CampaignModel::ThreeGpp => 1,
            CampaignModel::Nyusim => 2,
            CampaignModel::Rayleigh => 3,
        }
    }

    /// Model whose link budget and drop procedure this one uses.
    pub fn link_model(self) -> ChannelModel {
        match self {
            CampaignModel::Nyusim => ChannelModel::Nyusim,
            _ => ChannelModel::ThreeGpp,
        }
    }

    pub fn selected(sel: ModelSelection) -> Vec<CampaignModel> {
        match sel {
            ModelSelection::ThreeGpp => vec![CampaignModel::ThreeGpp],
            ModelSelection::Nyusim => vec![CampaignModel::Nyusim],
            ModelSelection::Rayleigh => vec![CampaignModel::Rayleigh],
            ModelSelection::All => vec![CampaignModel::ThreeGpp, CampaignModel::Nyusim, CampaignModel::Rayleigh],
        }
    }
}

pub fn stream_id(model: CampaignModel, drop: u64, attempt: u32) -> u64 {
    (model.stream_tag() << 48) | (drop << 8) | u64::from(attempt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserPosition {
    pub d2d_m: f64,
    pub azimuth_deg: f64,
}

/// `k` users uniform over the area of the annulus sector
/// `[min_d, max_d] × [−half_width, half_width]`.
pub fn drop_users(
    rng: &mut RngStream,
    k: usize,
    min_d: f64,
    max_d: f64,
    half_width_deg: f64,
) -> Result<Vec<UserPosition>> {
    if k == 0 {
        return Err(SimError::arg("need at least one user"));
    }
    if !(min_d >= 0.0 && min_d < max_d && max_d.is_finite()) {
        return Err(SimError::arg(format!("invalid radius bounds [{min_d}, {max_d}]")));
    }
    if !(half_width_deg > 0.0 && half_width_deg <= 180.0) {
        return Err(SimError::arg("sector half width must lie in (0, 180]"));
    }
    let (lo2, hi2) = (min_d * min_d, max_d * max_d);
    (0..k)
        .map(|_| {
            let d = (lo2 + rng.unit() * (hi2 - lo2)).sqrt().clamp(min_d, max_d);
            let az = rng.uniform(-half_width_deg, half_width_deg)?;
            Ok(UserPosition { d2d_m: d, azimuth_deg: az })
        })
        .collect()
}

/// Parameter tables shared by all drops.
#[derive(Debug, Clone, Default)]
pub struct ModelTables {
    pub pathloss: PathLossTable,
    pub lsp: LspTable,
    pub nyusim: NyuTable,
}

/// Largest 2D drop distance for a model under the configured budget.
pub fn cell_radius_2d(config: &SystemConfig, tables: &ModelTables, model: CampaignModel) -> Result<f64> {
    let env = config.environment;
    let params = tables.pathloss.get(env, config.radius_link_state);
    let d3d = cell_radius_for_coverage(&config.link_budget, params, model.link_model())?;
    let d2d = d2d_from_d3d(d3d, env.bs_height_m(), config.ue_height_m);
    if d2d <= config.min_distance_m() {
        return Err(SimError::config("link_budget", format!("cell radius {d2d:.1} m is below the minimum drop distance")));
    }
    Ok(d2d)
}

/// One user's link: where it is, its state and its channel.
#[derive(Debug, Clone)]
pub struct UserLink {
    pub position: UserPosition,
    pub link_state: LinkState,
    pub realization: ChannelRealization,
    /// Channel including path loss.
    pub channel: CMat,
}

/// One drop of all users for a ray-based model.
#[derive(Debug, Clone)]
pub struct Drop {
    pub users: Vec<UserLink>,
}

fn link_for_user(
    rng: &mut RngStream,
    config: &SystemConfig,
    tables: &ModelTables,
    model: ChannelModel,
    pos: UserPosition,
) -> Result<(LinkState, f64, LinkGeometry)> {
    let env = config.environment;
    let geometry = LinkGeometry {
        d2d_m: pos.d2d_m,
        azimuth_deg: pos.azimuth_deg,
        bs_height_m: env.bs_height_m(),
        ue_height_m: config.ue_height_m,
    };
    let p_los = match model {
        ChannelModel::ThreeGpp => los_probability_3gpp(pos.d2d_m, env, config.ue_height_m)?,
        ChannelModel::Nyusim => los_probability_nyusim(pos.d2d_m, tables.pathloss.get(env, LinkState::Los))?,
    };
    let state = draw_link_state(rng, p_los)?;
    let params = tables.pathloss.get(env, state);
    let fc = config.link_budget.carrier_ghz;
    let mean = if config.los_two_slope && model == ChannelModel::ThreeGpp && state == LinkState::Los {
        let bp = breakpoint_distance_m(fc, geometry.bs_height_m, geometry.ue_height_m);
        path_loss_ci_two_slope(fc, geometry.d3d_m(), params.ple, config.los_far_ple, bp, 0.0)?
    } else {
        params.mean_path_loss_db(model, fc, geometry.d3d_m())?
    };
    let pl = mean + sample_shadow_fading(rng, params.sf_sigma_db)?;
    Ok((state, pl, geometry))
}

/// Draw positions, link states, realizations and channels for one drop.
pub fn build_drop(
    rng: &mut RngStream,
    config: &SystemConfig,
    tables: &ModelTables,
    model: ChannelModel,
    radius_m: f64,
) -> Result<Drop> {
    let positions = drop_users(rng, config.users, config.min_distance_m(), radius_m, config.sector_half_width_deg)?;
    let mut users = Vec::with_capacity(positions.len());
    for pos in positions {
        let (state, pl, geometry) = link_for_user(rng, config, tables, model, pos)?;
        let realization = match model {
            ChannelModel::ThreeGpp => realize_3gpp(rng, config.environment, &tables.lsp, &geometry, state, pl)?,
            ChannelModel::Nyusim => realize_nyusim(rng, &tables.nyusim, &geometry, state, pl)?,
        };
        let channel = assemble_channel(&realization, &config.bs_array, &config.ue_array, config.link_budget.carrier_ghz)?;
        users.push(UserLink {
            position: pos,
            link_state: state,
            realization,
            channel: channel.entries,
        });
    }
    Ok(Drop { users })
}

/// What one drop contributes to the campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct DropOutcome {
    /// Eigen report of user 1's channel with path loss removed.
    pub eigen: EigenReport,
    pub se_hybrid: Vec<f64>,
    pub se_bd: Vec<f64>,
    pub link_states: Vec<LinkState>,
    pub ray_counts: Vec<usize>,
    /// Redraws caused by degenerate effective channels.
    pub resamples: u32,
}

fn small_scale_eigen(channel: &CMat, path_loss_db: f64) -> Result<EigenReport> {
    let mut report = eigen_report(channel)?;
    let scale = db_to_linear(path_loss_db);
    let total: f64 = report.eigenvalues.iter().map(|v| v * scale).sum();
    for v in &mut report.eigenvalues {
        *v *= scale;
    }
    report.ratios = report.eigenvalues.iter().map(|v| v / total).collect();
    Ok(report)
}

/// Evaluate drop `index` of `model`, redrawing on degenerate channels.
pub fn run_drop(
    config: &SystemConfig,
    tables: &ModelTables,
    model: CampaignModel,
    radius_m: f64,
    index: u64,
) -> Result<DropOutcome> {
    let tx_power_mw = db_to_linear(config.link_budget.tx_power_dbm);
    let noise_mw = db_to_linear(config.link_budget.noise_power_dbm());
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = RngStream::new(config.seed, stream_id(model, index, attempt));
        if model == CampaignModel::Rayleigh {
            let pos = drop_users(&mut rng, 1, config.min_distance_m(), radius_m, config.sector_half_width_deg)?[0];
            let (state, pl, _) = link_for_user(&mut rng, config, tables, ChannelModel::ThreeGpp, pos)?;
            let h = rayleigh_baseline(&mut rng, config.ue_array.n_elements(), config.bs_array.n_elements(), pl);
            return Ok(DropOutcome {
                eigen: small_scale_eigen(&h, pl)?,
                se_hybrid: Vec::new(),
                se_bd: Vec::new(),
                link_states: vec![state],
                ray_counts: Vec::new(),
                resamples: attempt,
            });
        }
        let drop = build_drop(&mut rng, config, tables, model.link_model(), radius_m)?;
        let channels: Vec<CMat> = drop.users.iter().map(|u| u.channel.clone()).collect();
        let reals: Vec<ChannelRealization> = drop.users.iter().map(|u| u.realization.clone()).collect();
        let hybrid = match hybrid_precode(&channels, &reals, &config.bs_array, &config.ue_array, tx_power_mw) {
            Ok(p) => p,
            Err(SimError::DegenerateDrop(_)) => continue,
            Err(e) => return Err(e),
        };
        let bd = bd_precode(&channels, tx_power_mw)?;
        return Ok(DropOutcome {
            eigen: small_scale_eigen(&channels[0], reals[0].path_loss_db)?,
            se_hybrid: spectral_efficiency(&hybrid, &channels, noise_mw)?,
            se_bd: spectral_efficiency(&bd, &channels, noise_mw)?,
            link_states: drop.users.iter().map(|u| u.link_state).collect(),
            ray_counts: reals.iter().map(|r| r.rays.len()).collect(),
            resamples: attempt,
        });
    }
    Err(SimError::DegenerateDrop(format!(
        "drop {index} of {} stayed degenerate after {MAX_ATTEMPTS} attempts",
        model.tag()
    )))
}

/// All samples one model produced in a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSamples {
    pub model: CampaignModel,
    pub cell_radius_m: f64,
    /// One report per drop, in drop order.
    pub eigen: Vec<EigenReport>,
    /// Per-user SE, drop-major.
    pub se_hybrid: Vec<f64>,
    pub se_bd: Vec<f64>,
    pub resamples: u64,
    pub los_users: u64,
}

impl ModelSamples {
    pub fn spreads(&self) -> Vec<f64> {
        self.eigen.iter().map(EigenReport::spread).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub config: SystemConfig,
    pub models: Vec<ModelSamples>,
}

impl CampaignResult {
    pub fn samples(&self, model: CampaignModel) -> Option<&ModelSamples> {
        self.models.iter().find(|m| m.model == model)
    }
}

fn run_model(config: &SystemConfig, tables: &ModelTables, model: CampaignModel) -> Result<ModelSamples> {
    let radius = cell_radius_2d(config, tables, model)?;
    let outcomes: Vec<DropOutcome> = (0..config.drops as u64)
        .into_par_iter()
        .map(|i| run_drop(config, tables, model, radius, i))
        .collect::<Result<_>>()?;
    let mut samples = ModelSamples {
        model,
        cell_radius_m: radius,
        eigen: Vec::with_capacity(outcomes.len()),
        se_hybrid: Vec::new(),
        se_bd: Vec::new(),
        resamples: 0,
        los_users: 0,
    };
    for o in outcomes {
        samples.eigen.push(o.eigen);
        samples.se_hybrid.extend(o.se_hybrid);
        samples.se_bd.extend(o.se_bd);
        samples.resamples += u64::from(o.resamples);
        samples.los_users += o.link_states.iter().filter(|&&s| s == LinkState::Los).count() as u64;
    }
    Ok(samples)
}

/// Run every selected model over the configured drops. `workers` caps the
/// thread count; `None` uses rayon's default.
pub fn run_campaign(config: &SystemConfig, workers: Option<usize>) -> Result<CampaignResult> {
    config.validate()?;
    let tables = ModelTables::default();
    let run = || -> Result<Vec<ModelSamples>> {
        CampaignModel::selected(config.model)
            .into_iter()
            .map(|m| run_model(config, &tables, m))
            .collect()
    };
    let models = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| SimError::arg(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(CampaignResult {
        config: config.clone(),
        models,
    })
}

/// Sorted right-continuous step CDF; ties collapse to their last rank.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(SimError::arg("empirical CDF of an empty sample"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(SimError::arg("empirical CDF of NaN samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for (i, v) in sorted.into_iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = p,
            _ => out.push((v, p)),
        }
    }
    Ok(out)
}

/// Median by sorting (mean of the middle pair for even counts).
pub fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
