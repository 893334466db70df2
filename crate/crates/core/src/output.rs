//! CSV tables behind each figure, plus a plain-text run manifest.
//!
//! Files are UTF-8 with LF line endings and `.` decimals; floats use the
//! shortest round-trip representation so equal results give equal bytes.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Result, SimError};
use crate::mathkit::linear_to_db;
use crate::montecarlo::{median, CampaignResult};
use crate::scenario::{los_probability_3gpp, los_probability_nyusim, ChannelModel, Environment, LinkState, PathLossTable};

/// Eigenvalues reported per model in `eigen_ratios.csv`.
pub const RATIO_INDICES: usize = 8;
/// Eigenvalue ranks with a CDF in `eigen_cdfs.csv`.
pub const CDF_RANKS: usize = 3;
/// Largest distance on the LOS-probability and path-loss grids, metres.
pub const CURVE_MAX_DISTANCE_M: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutputKind {
    LosProb,
    Pathloss,
    EigenRatios,
    EigenCdfs,
    SeCdfs,
}

impl OutputKind {
    pub const ALL: [OutputKind; 5] = [
        OutputKind::LosProb,
        OutputKind::Pathloss,
        OutputKind::EigenRatios,
        OutputKind::EigenCdfs,
        OutputKind::SeCdfs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutputKind::LosProb => "los-prob-curves",
            OutputKind::Pathloss => "pathloss-curves",
            OutputKind::EigenRatios => "eigen-ratios",
            OutputKind::EigenCdfs => "eigen-cdfs",
            OutputKind::SeCdfs => "se-cdfs",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            OutputKind::LosProb => "los_prob.csv",
            OutputKind::Pathloss => "pathloss.csv",
            OutputKind::EigenRatios => "eigen_ratios.csv",
            OutputKind::EigenCdfs => "eigen_cdfs.csv",
            OutputKind::SeCdfs => "se_cdfs.csv",
        }
    }

    /// Whether the output needs Monte Carlo samples.
    pub fn needs_campaign(self) -> bool {
        !matches!(self, OutputKind::LosProb | OutputKind::Pathloss)
    }

    /// Parse a comma-separated list such as `eigen-ratios,se-cdfs`; `all`
    /// selects everything.
    pub fn parse_list(list: &str) -> Result<BTreeSet<OutputKind>> {
        let mut out = BTreeSet::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item == "all" {
                out.extend(Self::ALL);
                continue;
            }
            let kind = Self::ALL
                .into_iter()
                .find(|k| k.name() == item)
                .ok_or_else(|| SimError::config("outputs", format!("unknown output `{item}`")))?;
            out.insert(kind);
        }
        if out.is_empty() {
            return Err(SimError::config("outputs", "no outputs selected"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub outputs: BTreeSet<OutputKind>,
}

fn writer(dir: &Path, kind: OutputKind) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(dir.join(kind.file_name()))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn csv_err(e: csv::Error) -> SimError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SimError::Io(io),
        other => SimError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_los_prob(dir: &Path, table: &PathLossTable, ue_height_m: f64) -> Result<()> {
    let mut w = writer(dir, OutputKind::LosProb)?;
    w.write_record(["distance_m", "p_3gpp_umi", "p_nyu_umi", "p_3gpp_uma", "p_nyu_uma"]).map_err(csv_err)?;
    for d in 1..=CURVE_MAX_DISTANCE_M {
        let d = d as f64;
        let mut row = vec![d.to_string()];
        for env in [Environment::UmiStreetCanyon, Environment::Uma] {
            row.push(los_probability_3gpp(d, env, ue_height_m)?.to_string());
            row.push(los_probability_nyusim(d, table.get(env, LinkState::Los))?.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_pathloss(dir: &Path, table: &PathLossTable, env: Environment, carrier_ghz: f64) -> Result<()> {
    let mut w = writer(dir, OutputKind::Pathloss)?;
    w.write_record(["distance_m", "pl_3gpp_los_db", "pl_3gpp_nlos_db", "pl_nyu_los_db", "pl_nyu_nlos_db"])
        .map_err(csv_err)?;
    for d in 10..=CURVE_MAX_DISTANCE_M {
        let d = d as f64;
        let mut row = vec![d.to_string()];
        for model in [ChannelModel::ThreeGpp, ChannelModel::Nyusim] {
            for state in [LinkState::Los, LinkState::Nlos] {
                row.push(table.get(env, state).mean_path_loss_db(model, carrier_ghz, d)?.to_string());
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_eigen_ratios(dir: &Path, result: &CampaignResult) -> Result<()> {
    let mut w = writer(dir, OutputKind::EigenRatios)?;
    w.write_record(["index", "model", "mean_ratio_linear", "mean_ratio_db", "median_ratio_db"])
        .map_err(csv_err)?;
    for m in &result.models {
        let n = m.eigen.first().map_or(0, |e| e.ratios.len()).min(RATIO_INDICES);
        let mut means: Vec<f64> = (0..n)
            .map(|i| m.eigen.iter().map(|e| e.ratios[i]).sum::<f64>() / m.eigen.len() as f64)
            .collect();
        // Renormalize over the reported indices so the column sums to one.
        let total: f64 = means.iter().sum();
        for v in &mut means {
            *v /= total;
        }
        for (i, mean) in means.iter().enumerate() {
            let per_drop: Vec<f64> = m.eigen.iter().map(|e| e.ratios[i]).collect();
            w.write_record([
                (i + 1).to_string(),
                m.model.tag().to_string(),
                mean.to_string(),
                linear_to_db(*mean).to_string(),
                linear_to_db(median(&per_drop)).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn sorted_with_rank(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.into_iter().enumerate().map(|(i, v)| (v, (i + 1) as f64 / n)).collect()
}

fn write_eigen_cdfs(dir: &Path, result: &CampaignResult) -> Result<()> {
    let mut w = writer(dir, OutputKind::EigenCdfs)?;
    w.write_record(["eigenvalue_db", "cdf", "rank", "model"]).map_err(csv_err)?;
    for m in &result.models {
        let ranks = m.eigen.first().map_or(0, |e| e.eigenvalues.len()).min(CDF_RANKS);
        for rank in 0..ranks {
            let values: Vec<f64> = m.eigen.iter().map(|e| linear_to_db(e.eigenvalues[rank])).collect();
            for (v, p) in sorted_with_rank(&values) {
                w.write_record([v.to_string(), p.to_string(), (rank + 1).to_string(), m.model.tag().to_string()])
                    .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_se_cdfs(dir: &Path, result: &CampaignResult) -> Result<()> {
    let mut w = writer(dir, OutputKind::SeCdfs)?;
    w.write_record(["se_bps_hz", "cdf", "model", "scheme"]).map_err(csv_err)?;
    for m in &result.models {
        for (scheme, values) in [("hybrid", &m.se_hybrid), ("bd", &m.se_bd)] {
            for (v, p) in sorted_with_rank(values) {
                w.write_record([v.to_string(), p.to_string(), m.model.tag().to_string(), scheme.to_string()])
                    .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn manifest_text(result: &CampaignResult, manifest: &RunManifest) -> String {
    let mut s = String::new();
    s.push_str("[run]\n");
    s.push_str(&format!("version = \"{}\"\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("seed = {}\n", result.config.seed));
    if let Some(p) = &manifest.config_path {
        s.push_str(&format!("config_path = {:?}\n", p.display().to_string()));
    }
    let names: Vec<String> = manifest.outputs.iter().map(|k| format!("\"{}\"", k.name())).collect();
    s.push_str(&format!("outputs = [{}]\n", names.join(", ")));
    for m in &result.models {
        s.push_str(&format!("\n[models.{}]\n", m.model.tag()));
        s.push_str(&format!("cell_radius_m = {}\n", m.cell_radius_m));
        s.push_str(&format!("drops = {}\n", m.eigen.len()));
        s.push_str(&format!("resampled_drops = {}\n", m.resamples));
        s.push_str(&format!("los_users = {}\n", m.los_users));
    }
    s.push_str("\n# Effective configuration\n[config]\n");
    let echo = result.config.to_toml();
    // Re-home the config's own tables under [config.*].
    for line in echo.lines() {
        match line.strip_prefix('[') {
            Some(rest) => s.push_str(&format!("[config.{rest}\n")),
            None => {
                s.push_str(line);
                s.push('\n');
            }
        }
    }
    s
}

/// Write every selected output into `manifest.out_dir`, plus
/// `manifest.toml`. Returns the paths written.
pub fn emit_outputs(result: &CampaignResult, manifest: &RunManifest) -> Result<Vec<PathBuf>> {
    let dir = &manifest.out_dir;
    fs::create_dir_all(dir)?;
    let table = PathLossTable::default();
    let cfg = &result.config;
    let mut written = Vec::new();
    for &kind in &manifest.outputs {
        match kind {
            OutputKind::LosProb => write_los_prob(dir, &table, cfg.ue_height_m)?,
            OutputKind::Pathloss => write_pathloss(dir, &table, cfg.environment, cfg.link_budget.carrier_ghz)?,
            OutputKind::EigenRatios => write_eigen_ratios(dir, result)?,
            OutputKind::EigenCdfs => write_eigen_cdfs(dir, result)?,
            OutputKind::SeCdfs => write_se_cdfs(dir, result)?,
        }
        written.push(dir.join(kind.file_name()));
    }
    let path = dir.join("manifest.toml");
    fs::write(&path, manifest_text(result, manifest))?;
    written.push(path);
    Ok(written)
}
