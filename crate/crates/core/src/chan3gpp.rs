//! 3GPP clustered channel generation.
//!
//! Clusters are joint delay-angle objects: a fixed number of clusters per
//! scenario and link state, each expanded into 20 rays around one mean
//! departure/arrival direction. Large-scale parameters are drawn per link
//! from the log-normal statistics in the LSP table; cross-correlation
//! between parameters and spatial consistency across drops are omitted.

use serde::Deserialize;

use crate::error::{Result, SimError};
use crate::mathkit::{db_to_linear, reflect_zenith, wrap_degrees, RngStream};
use crate::realization::{ChannelRealization, LinkGeometry, LosDirection, Ray};
use crate::scenario::{ChannelModel, Environment, LinkState};

const MAX_AZIMUTH_SPREAD_DEG: f64 = 104.0;
const MAX_ZENITH_SPREAD_DEG: f64 = 52.0;

/// Statistics of the large-scale parameters for one (environment, state).
/// `*_mu`/`*_sigma` are log10-domain moments.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct LspStats {
    pub ds_mu_log10s: f64,
    pub ds_sigma: f64,
    pub asd_mu_log10deg: f64,
    pub asd_sigma: f64,
    pub asa_mu_log10deg: f64,
    pub asa_sigma: f64,
    pub zsd_mu_log10deg: f64,
    pub zsd_sigma: f64,
    pub zsa_mu_log10deg: f64,
    pub zsa_sigma: f64,
    pub k_mu_db: f64,
    pub k_sigma_db: f64,
    pub xpr_mu_db: f64,
    pub xpr_sigma_db: f64,
    pub delay_proportionality: f64,
    pub cluster_shadow_sigma_db: f64,
    pub c_asd_deg: f64,
    pub c_asa_deg: f64,
    pub c_zsd_deg: f64,
    pub c_zsa_deg: f64,
}

/// One draw of the large-scale parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lsp3gpp {
    pub delay_spread_s: f64,
    pub asd_deg: f64,
    pub asa_deg: f64,
    pub zsd_deg: f64,
    pub zsa_deg: f64,
    /// Rician K-factor in dB; ignored in NLOS.
    pub rician_k_db: f64,
    pub cluster_shadow_sigma_db: f64,
}

impl LspStats {
    pub fn draw(&self, rng: &mut RngStream) -> Result<Lsp3gpp> {
        let mut lognormal = |mu: f64, sigma: f64| -> Result<f64> { Ok(10f64.powf(rng.normal(mu, sigma)?)) };
        let ds = lognormal(self.ds_mu_log10s, self.ds_sigma)?;
        let asd = lognormal(self.asd_mu_log10deg, self.asd_sigma)?.min(MAX_AZIMUTH_SPREAD_DEG);
        let asa = lognormal(self.asa_mu_log10deg, self.asa_sigma)?.min(MAX_AZIMUTH_SPREAD_DEG);
        let zsd = lognormal(self.zsd_mu_log10deg, self.zsd_sigma)?.min(MAX_ZENITH_SPREAD_DEG);
        let zsa = lognormal(self.zsa_mu_log10deg, self.zsa_sigma)?.min(MAX_ZENITH_SPREAD_DEG);
        let k = rng.normal(self.k_mu_db, self.k_sigma_db)?;
        Ok(Lsp3gpp {
            delay_spread_s: ds,
            asd_deg: asd,
            asa_deg: asa,
            zsd_deg: zsd,
            zsa_deg: zsa,
            rician_k_db: k,
            cluster_shadow_sigma_db: self.cluster_shadow_sigma_db,
        })
    }

    /// Parameters at the log-domain median, with zero spread.
    pub fn median(&self) -> Lsp3gpp {
        Lsp3gpp {
            delay_spread_s: 10f64.powf(self.ds_mu_log10s),
            asd_deg: 10f64.powf(self.asd_mu_log10deg),
            asa_deg: 10f64.powf(self.asa_mu_log10deg),
            zsd_deg: 10f64.powf(self.zsd_mu_log10deg),
            zsa_deg: 10f64.powf(self.zsa_mu_log10deg),
            rician_k_db: self.k_mu_db,
            cluster_shadow_sigma_db: self.cluster_shadow_sigma_db,
        }
    }
}

#[derive(Debug, Deserialize)]
struct LspRow {
    environment: Environment,
    state: LinkState,
    #[serde(flatten)]
    stats: LspStats,
}

#[derive(Debug, Deserialize)]
struct OffsetRow {
    #[allow(dead_code)]
    ray: usize,
    offset: f64,
}

/// LSP statistics per (environment, state) plus the intra-cluster ray
/// offset table.
#[derive(Debug, Clone, PartialEq)]
pub struct LspTable {
    rows: Vec<(Environment, LinkState, LspStats)>,
    offsets: Vec<f64>,
}

const DEFAULT_LSP_CSV: &str = include_str!("../data/lsp_3gpp.csv");
const DEFAULT_OFFSETS_CSV: &str = include_str!("../data/ray_offsets.csv");

impl Default for LspTable {
    fn default() -> Self {
        Self::from_csv(DEFAULT_LSP_CSV, DEFAULT_OFFSETS_CSV).expect("shipped LSP table parses")
    }
}

fn table_err(table: &str, message: String) -> SimError {
    SimError::Table {
        table: table.into(),
        message,
    }
}

impl LspTable {
    pub fn from_csv(lsp_csv: &str, offsets_csv: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut rdr = csv::Reader::from_reader(lsp_csv.as_bytes());
        for (i, rec) in rdr.deserialize::<LspRow>().enumerate() {
            let r = rec.map_err(|e| table_err("lsp_3gpp", format!("row {}: {e}", i + 1)))?;
            rows.push((r.environment, r.state, r.stats));
        }
        let mut offsets = Vec::new();
        let mut rdr = csv::Reader::from_reader(offsets_csv.as_bytes());
        for (i, rec) in rdr.deserialize::<OffsetRow>().enumerate() {
            let r = rec.map_err(|e| table_err("ray_offsets", format!("row {}: {e}", i + 1)))?;
            offsets.push(r.offset);
        }
        if offsets.len() != RAYS_PER_CLUSTER {
            return Err(table_err(
                "ray_offsets",
                format!("expected {RAYS_PER_CLUSTER} offsets, got {}", offsets.len()),
            ));
        }
        let table = Self { rows, offsets };
        for env in [Environment::UmiStreetCanyon, Environment::Uma] {
            for state in [LinkState::Los, LinkState::Nlos] {
                if table.find(env, state).is_none() {
                    return Err(table_err("lsp_3gpp", format!("missing row {}/{}", env.tag(), state.tag())));
                }
            }
        }
        Ok(table)
    }

    fn find(&self, env: Environment, state: LinkState) -> Option<&LspStats> {
        self.rows.iter().find(|(e, s, _)| *e == env && *s == state).map(|(_, _, p)| p)
    }

    pub fn get(&self, env: Environment, state: LinkState) -> &LspStats {
        self.find(env, state).expect("table validated on construction")
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
}

pub const RAYS_PER_CLUSTER: usize = 20;

/// Fixed cluster and ray counts.
pub fn cluster_counts_3gpp(env: Environment, state: LinkState) -> (usize, usize) {
    match (env, state) {
        (Environment::UmiStreetCanyon, LinkState::Los) => (12, RAYS_PER_CLUSTER),
        (Environment::UmiStreetCanyon, LinkState::Nlos) => (19, RAYS_PER_CLUSTER),
        (Environment::Uma, LinkState::Los) => (12, RAYS_PER_CLUSTER),
        (Environment::Uma, LinkState::Nlos) => (20, RAYS_PER_CLUSTER),
    }
}

/// Exponential cluster delays, sorted, shifted to start at zero.
pub fn generate_cluster_delays(
    rng: &mut RngStream,
    n: usize,
    delay_spread_s: f64,
    proportionality: f64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SimError::arg("cluster count must be >= 1"));
    }
    if !(delay_spread_s > 0.0) {
        return Err(SimError::arg(format!("delay spread must be > 0, got {delay_spread_s}")));
    }
    let mut d: Vec<f64> = (0..n)
        .map(|_| -proportionality * delay_spread_s * (1.0 - rng.unit()).ln())
        .collect();
    d.sort_by(f64::total_cmp);
    let min = d[0];
    for x in &mut d {
        *x -= min;
    }
    Ok(d)
}

/// Exponential delay-power law with per-cluster log-normal shadowing,
/// normalized to unit sum.
pub fn generate_cluster_powers(
    rng: &mut RngStream,
    delays: &[f64],
    delay_spread_s: f64,
    proportionality: f64,
    shadow_sigma_db: f64,
) -> Result<Vec<f64>> {
    if delays.is_empty() {
        return Err(SimError::arg("no cluster delays"));
    }
    let decay = (proportionality - 1.0) / (proportionality * delay_spread_s);
    let mut p = Vec::with_capacity(delays.len());
    for &tau in delays {
        let z = rng.normal(0.0, shadow_sigma_db)?;
        p.push((-tau * decay).exp() * 10f64.powf(-z / 10.0));
    }
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    Ok(p)
}

/// Mean angles of one cluster, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterAngles {
    pub aod_az: f64,
    pub aod_zen: f64,
    pub aoa_az: f64,
    pub aoa_zen: f64,
}

fn nearest_entry(table: &[(usize, f64)], n: usize) -> f64 {
    table
        .iter()
        .min_by_key(|(k, _)| k.abs_diff(n))
        .map(|(_, v)| *v)
        .expect("non-empty table")
}

/// Azimuth scaling factor for `n` clusters, with the LOS K-factor
/// correction when `k_db` is given.
fn azimuth_scaling(n: usize, k_db: Option<f64>) -> f64 {
    const NLOS: [(usize, f64); 11] = [
        (4, 0.779),
        (5, 0.860),
        (8, 1.018),
        (10, 1.090),
        (11, 1.123),
        (12, 1.146),
        (14, 1.190),
        (15, 1.211),
        (16, 1.226),
        (19, 1.273),
        (20, 1.289),
    ];
    let c = nearest_entry(&NLOS, n);
    match k_db {
        Some(k) => c * (1.1035 - 0.028 * k - 0.002 * k * k + 0.0001 * k * k * k),
        None => c,
    }
}

fn zenith_scaling(n: usize, k_db: Option<f64>) -> f64 {
    const NLOS: [(usize, f64); 7] = [
        (8, 0.889),
        (10, 0.957),
        (11, 1.031),
        (12, 1.104),
        (15, 1.1088),
        (19, 1.184),
        (20, 1.178),
    ];
    let c = nearest_entry(&NLOS, n);
    match k_db {
        Some(k) => c * (1.3086 + 0.0339 * k - 0.0077 * k * k + 0.0002 * k * k * k),
        None => c,
    }
}

/// Per-cluster mean angles: the inverse-Gaussian (azimuth) and
/// inverse-Laplacian (zenith) power-to-angle maps with random sign and
/// Gaussian jitter, centred on the LOS direction. In LOS the first
/// cluster is pinned to the geometric LOS direction.
pub fn generate_cluster_angles(
    rng: &mut RngStream,
    powers: &[f64],
    lsp: &Lsp3gpp,
    state: LinkState,
    los: &LosDirection,
) -> Result<Vec<ClusterAngles>> {
    if powers.is_empty() {
        return Err(SimError::arg("no cluster powers"));
    }
    let n = powers.len();
    let pmax = powers.iter().cloned().fold(0.0, f64::max);
    let k = match state {
        LinkState::Los => Some(lsp.rician_k_db),
        LinkState::Nlos => None,
    };
    let c_az = azimuth_scaling(n, k);
    let c_zen = zenith_scaling(n, k);

    let azimuth = |rng: &mut RngStream, spread: f64, centre: f64| -> Result<Vec<f64>> {
        let mut out: Vec<f64> = powers
            .iter()
            .map(|&p| {
                let base = 2.0 * (spread / 1.4) * (-(p / pmax).ln()).sqrt() / c_az;
                let sign = if rng.unit() < 0.5 { -1.0 } else { 1.0 };
                Ok(sign * base + rng.normal(0.0, spread / 7.0)?)
            })
            .collect::<Result<_>>()?;
        anchor(&mut out, state, centre);
        Ok(out.into_iter().map(wrap_degrees).collect())
    };
    let aoa = azimuth(rng, lsp.asa_deg, los.aoa_az)?;
    let aod = azimuth(rng, lsp.asd_deg, los.aod_az)?;

    let zenith = |rng: &mut RngStream, spread: f64, centre: f64| -> Result<Vec<f64>> {
        let mut out: Vec<f64> = powers
            .iter()
            .map(|&p| {
                let base = -spread * (p / pmax).ln() / c_zen;
                let sign = if rng.unit() < 0.5 { -1.0 } else { 1.0 };
                Ok(sign * base + rng.normal(0.0, spread / 7.0)?)
            })
            .collect::<Result<_>>()?;
        anchor(&mut out, state, centre);
        Ok(out.into_iter().map(reflect_zenith).collect())
    };
    let zoa = zenith(rng, lsp.zsa_deg, los.aoa_zen)?;
    let zod = zenith(rng, lsp.zsd_deg, los.aod_zen)?;

    Ok((0..n)
        .map(|i| ClusterAngles {
            aod_az: aod[i],
            aod_zen: zod[i],
            aoa_az: aoa[i],
            aoa_zen: zoa[i],
        })
        .collect())
}

fn anchor(offsets: &mut [f64], state: LinkState, centre: f64) {
    let shift = match state {
        LinkState::Los => offsets[0],
        LinkState::Nlos => 0.0,
    };
    for x in offsets.iter_mut() {
        *x = *x - shift + centre;
    }
}

/// Intra-cluster angular spreads and cross-polarization statistics used
/// when splitting a cluster into rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySpread {
    pub aod_deg: f64,
    pub aoa_deg: f64,
    pub zod_deg: f64,
    pub zoa_deg: f64,
    pub xpr_mu_db: f64,
    pub xpr_sigma_db: f64,
}

impl RaySpread {
    pub fn from_stats(stats: &LspStats) -> Self {
        Self {
            aod_deg: stats.c_asd_deg,
            aoa_deg: stats.c_asa_deg,
            zod_deg: stats.c_zsd_deg,
            zoa_deg: stats.c_zsa_deg,
            xpr_mu_db: stats.xpr_mu_db,
            xpr_sigma_db: stats.xpr_sigma_db,
        }
    }
}

/// Split one cluster into equal-power rays at the fixed offsets, randomly
/// coupled across the four angle dimensions.
pub fn expand_rays(
    rng: &mut RngStream,
    cluster: &ClusterAngles,
    cluster_power: f64,
    delay_s: f64,
    offsets: &[f64],
    spread: &RaySpread,
) -> Result<Vec<Ray>> {
    if offsets.is_empty() {
        return Err(SimError::arg("empty ray offset table"));
    }
    let m = offsets.len();
    let perm = |rng: &mut RngStream| {
        let mut v = offsets.to_vec();
        rng.shuffle(&mut v);
        v
    };
    let aod = perm(rng);
    let aoa = perm(rng);
    let zod = perm(rng);
    let zoa = perm(rng);
    let mut rays = Vec::with_capacity(m);
    for i in 0..m {
        let xpr = db_to_linear(rng.normal(spread.xpr_mu_db, spread.xpr_sigma_db)?);
        let phases = [rng.phase(), rng.phase(), rng.phase(), rng.phase()];
        rays.push(Ray {
            delay_s,
            power: cluster_power / m as f64,
            aod_az: wrap_degrees(cluster.aod_az + spread.aod_deg * aod[i]),
            aod_zen: reflect_zenith(cluster.aod_zen + spread.zod_deg * zod[i]),
            aoa_az: wrap_degrees(cluster.aoa_az + spread.aoa_deg * aoa[i]),
            aoa_zen: reflect_zenith(cluster.aoa_zen + spread.zoa_deg * zoa[i]),
            xpr,
            phases,
        });
    }
    Ok(rays)
}

/// Full 3GPP small-scale realization for one link. `path_loss_db` is
/// recorded on the result but not applied to the ray powers.
pub fn realize_3gpp(
    rng: &mut RngStream,
    env: Environment,
    table: &LspTable,
    geometry: &LinkGeometry,
    state: LinkState,
    path_loss_db: f64,
) -> Result<ChannelRealization> {
    let stats = table.get(env, state);
    let lsp = stats.draw(rng)?;
    let (n_clusters, _) = cluster_counts_3gpp(env, state);
    let delays = generate_cluster_delays(rng, n_clusters, lsp.delay_spread_s, stats.delay_proportionality)?;
    let powers = generate_cluster_powers(
        rng,
        &delays,
        lsp.delay_spread_s,
        stats.delay_proportionality,
        lsp.cluster_shadow_sigma_db,
    )?;
    let los = geometry.los_direction();
    let angles = generate_cluster_angles(rng, &powers, &lsp, state, &los)?;

    let scattered_share = match state {
        LinkState::Los => 1.0 / (db_to_linear(lsp.rician_k_db) + 1.0),
        LinkState::Nlos => 1.0,
    };
    let spread = RaySpread::from_stats(stats);
    let mut rays = Vec::with_capacity(n_clusters * RAYS_PER_CLUSTER + 1);
    if state == LinkState::Los {
        rays.push(Ray::specular(1.0 - scattered_share, &los));
    }
    for ((cluster, &p), &tau) in angles.iter().zip(&powers).zip(&delays) {
        rays.extend(expand_rays(rng, cluster, p * scattered_share, tau, table.offsets(), &spread)?);
    }
    Ok(ChannelRealization {
        rays,
        link_state: state,
        path_loss_db,
        model: ChannelModel::ThreeGpp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry() -> LinkGeometry {
        LinkGeometry {
            d2d_m: 80.0,
            azimuth_deg: 20.0,
            bs_height_m: 10.0,
            ue_height_m: 1.5,
        }
    }

    #[test]
    fn counts_are_fixed() {
        let env = Environment::UmiStreetCanyon;
        assert_eq!(cluster_counts_3gpp(env, LinkState::Los), (12, 20));
        assert_eq!(cluster_counts_3gpp(env, LinkState::Nlos), (19, 20));
        assert_eq!(
            cluster_counts_3gpp(env, LinkState::Nlos),
            cluster_counts_3gpp(env, LinkState::Nlos)
        );
    }

    #[test]
    fn delays_sorted_from_zero() {
        let mut rng = RngStream::new(1, 0);
        assert_eq!(generate_cluster_delays(&mut rng, 1, 1e-7, 3.0).unwrap(), vec![0.0]);
        for seed in 0..50 {
            let mut rng = RngStream::new(seed, 1);
            let d = generate_cluster_delays(&mut rng, 19, 6.6e-8, 2.1).unwrap();
            assert_eq!(d[0], 0.0);
            assert!(d.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(generate_cluster_delays(&mut rng, 0, 1e-7, 3.0).is_err());
        assert!(generate_cluster_delays(&mut rng, 3, 0.0, 3.0).is_err());
    }

    #[test]
    fn exponential_draw_spread() {
        // Raw draws are exponential with std r_tau·DS. With two clusters the
        // output gap |X1 − X2| is again exponential with that scale.
        let mut rng = RngStream::new(2, 0);
        let n = 100_000;
        let scale = 2.1 * 50e-9;
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let d = generate_cluster_delays(&mut rng, 2, 50e-9, 2.1).unwrap();
                d[1]
            })
            .collect();
        // |X1 − X2| of two iid exponentials is exponential with the same scale.
        let m = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((sd / scale - 1.0).abs() < 0.02, "{}", sd / scale);
    }

    #[test]
    fn powers_normalized_and_decaying() {
        let mut rng = RngStream::new(3, 0);
        assert_eq!(generate_cluster_powers(&mut rng, &[0.0], 1e-7, 3.0, 3.0).unwrap(), vec![1.0]);
        let eq = generate_cluster_powers(&mut rng, &[1e-8; 4], 1e-7, 3.0, 0.0).unwrap();
        assert!(eq.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        let d = generate_cluster_delays(&mut rng, 19, 6.6e-8, 2.1).unwrap();
        let p = generate_cluster_powers(&mut rng, &d, 6.6e-8, 2.1, 0.0).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_spread_collapses_to_los_direction() {
        let mut rng = RngStream::new(4, 0);
        let los = geometry().los_direction();
        let lsp = Lsp3gpp {
            delay_spread_s: 5e-8,
            asd_deg: 0.0,
            asa_deg: 0.0,
            zsd_deg: 0.0,
            zsa_deg: 0.0,
            rician_k_db: 9.0,
            cluster_shadow_sigma_db: 3.0,
        };
        let powers = vec![0.5, 0.3, 0.2];
        for state in [LinkState::Los, LinkState::Nlos] {
            for c in generate_cluster_angles(&mut rng, &powers, &lsp, state, &los).unwrap() {
                assert!((c.aod_az - los.aod_az).abs() < 1e-9);
                assert!((c.aoa_az - los.aoa_az).abs() < 1e-9);
                assert!((c.aod_zen - los.aod_zen).abs() < 1e-9);
                assert!((c.aoa_zen - los.aoa_zen).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn first_cluster_anchored_in_los() {
        let table = LspTable::default();
        let stats = table.get(Environment::UmiStreetCanyon, LinkState::Los);
        let los = geometry().los_direction();
        for seed in 0..20 {
            let mut rng = RngStream::new(seed, 0);
            let lsp = stats.draw(&mut rng).unwrap();
            let powers = vec![0.4, 0.3, 0.2, 0.1];
            let a = generate_cluster_angles(&mut rng, &powers, &lsp, LinkState::Los, &los).unwrap();
            assert!((a[0].aod_az - los.aod_az).abs() < 1e-9);
            assert!((a[0].aoa_az - los.aoa_az).abs() < 1e-9);
        }
    }

    #[test]
    fn ray_expansion_splits_power_equally() {
        let table = LspTable::default();
        let spread = RaySpread::from_stats(table.get(Environment::UmiStreetCanyon, LinkState::Nlos));
        let c = ClusterAngles {
            aod_az: 10.0,
            aod_zen: 95.0,
            aoa_az: -170.0,
            aoa_zen: 85.0,
        };
        let mut rng = RngStream::new(5, 0);
        let rays = expand_rays(&mut rng, &c, 0.4, 1e-8, table.offsets(), &spread).unwrap();
        assert_eq!(rays.len(), 20);
        assert!(rays.iter().all(|r| (r.power - 0.02).abs() < 1e-15));

        let still = RaySpread {
            aod_deg: 0.0,
            aoa_deg: 0.0,
            zod_deg: 0.0,
            zoa_deg: 0.0,
            ..spread
        };
        let rays = expand_rays(&mut rng, &c, 0.4, 1e-8, table.offsets(), &still).unwrap();
        for r in rays {
            assert_eq!((r.aod_az, r.aod_zen, r.aoa_az, r.aoa_zen), (10.0, 95.0, -170.0, 85.0));
        }
    }

    #[test]
    fn realization_counts_and_normalization() {
        let table = LspTable::default();
        let env = Environment::UmiStreetCanyon;
        for seed in 0..200 {
            let mut rng = RngStream::new(seed, 7);
            let nlos = realize_3gpp(&mut rng, env, &table, &geometry(), LinkState::Nlos, 100.0).unwrap();
            assert_eq!(nlos.rays.len(), 380);
            nlos.check_normalized(1e-9).unwrap();
            let los = realize_3gpp(&mut rng, env, &table, &geometry(), LinkState::Los, 100.0).unwrap();
            assert_eq!(los.rays.len(), 241);
            los.check_normalized(1e-9).unwrap();
            for r in nlos.rays.iter().chain(&los.rays) {
                assert!(r.delay_s >= 0.0 && r.power >= 0.0);
                assert!((0.0..=180.0).contains(&r.aod_zen) && (0.0..=180.0).contains(&r.aoa_zen));
                assert!((-180.0..180.0).contains(&r.aod_az) && (-180.0..180.0).contains(&r.aoa_az));
            }
        }
    }

    /// Power-weighted RMS of wrapped deviations about the circular mean.
    fn rms_spread(angles: &[f64], weights: &[f64]) -> f64 {
        let (re, im) = angles.iter().zip(weights).fold((0.0, 0.0), |(re, im), (x, w)| {
            (re + w * x.to_radians().cos(), im + w * x.to_radians().sin())
        });
        let mu = im.atan2(re).to_degrees();
        let total: f64 = weights.iter().sum();
        let var = angles
            .iter()
            .zip(weights)
            .map(|(x, w)| w * wrap_degrees(x - mu).powi(2))
            .sum::<f64>()
            / total;
        var.sqrt()
    }

    #[test]
    fn cluster_azimuth_spread_matches_configured_spread() {
        let table = LspTable::default();
        let stats = table.get(Environment::UmiStreetCanyon, LinkState::Nlos);
        let lsp = stats.median();
        let los = LosDirection::default();
        let mut rng = RngStream::new(10, 0);
        let n = 100_000;
        let (mut asa, mut asd) = (0.0, 0.0);
        for _ in 0..n {
            let d = generate_cluster_delays(&mut rng, 19, lsp.delay_spread_s, stats.delay_proportionality).unwrap();
            let p = generate_cluster_powers(&mut rng, &d, lsp.delay_spread_s, stats.delay_proportionality, 3.0)
                .unwrap();
            let a = generate_cluster_angles(&mut rng, &p, &lsp, LinkState::Nlos, &los).unwrap();
            let aoa: Vec<f64> = a.iter().map(|c| c.aoa_az).collect();
            let aod: Vec<f64> = a.iter().map(|c| c.aod_az).collect();
            asa += rms_spread(&aoa, &p);
            asd += rms_spread(&aod, &p);
        }
        let asa = asa / n as f64;
        let asd = asd / n as f64;
        assert!((asa / lsp.asa_deg - 1.0).abs() < 0.05, "ASA {asa} vs {}", lsp.asa_deg);
        assert!((asd / lsp.asd_deg - 1.0).abs() < 0.05, "ASD {asd} vs {}", lsp.asd_deg);
    }

    #[test]
    fn uma_tables_load() {
        let table = LspTable::default();
        let mut rng = RngStream::new(9, 0);
        let r = realize_3gpp(&mut rng, Environment::Uma, &table, &geometry(), LinkState::Nlos, 0.0).unwrap();
        assert_eq!(r.rays.len(), 400);
    }
}
