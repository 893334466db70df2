//! NYUSIM time-cluster / spatial-lobe channel generation.
//!
//! Temporal and spatial structure are drawn independently: time clusters
//! fix delays and powers, spatial lobes fix the angular containers, and
//! each subpath picks its departure and arrival lobe at random. Subpaths
//! of one time cluster can therefore arrive from different lobes.

use serde::Deserialize;

use crate::error::{Result, SimError};
use crate::mathkit::{db_to_linear, reflect_zenith, wrap_degrees, RngStream};
use crate::realization::{ChannelRealization, LinkGeometry, LosDirection, Ray};
use crate::scenario::{ChannelModel, LinkState};

pub const MAX_TIME_CLUSTERS: u32 = 6;
pub const MAX_SUBPATHS: u32 = 30;
pub const MAX_LOBES: u32 = 5;

/// Upper bound of the intra-cluster delay exponent perturbation.
const INTRA_DELAY_EXPONENT_MAX: f64 = 0.43;

/// Poisson means for the departure and arrival lobe counts.
pub fn lobe_count_means(state: LinkState) -> (f64, f64) {
    match state {
        LinkState::Los => (1.9, 1.8),
        LinkState::Nlos => (1.5, 2.1),
    }
}

/// Secondary statistics for one link state. Times in ns, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct NyuParams {
    pub tc_decay_ns: f64,
    pub subpath_decay_ns: f64,
    pub cluster_shadow_sigma_db: f64,
    pub void_interval_ns: f64,
    pub lobe_az_spread_deg: f64,
    pub lobe_zen_spread_deg: f64,
    pub xpr_mu_db: f64,
    pub xpr_sigma_db: f64,
    pub mean_excess_delay_ns: f64,
    pub subpath_shadow_sigma_db: f64,
    pub intra_delay_spacing_ns: f64,
    pub lobe_zen_mean_sigma_deg: f64,
    /// Share of the small-scale power carried by the LOS boresight ray.
    pub los_power_fraction: f64,
    /// Azimuth span around the UE direction holding the departure lobes.
    pub departure_sector_deg: f64,
}

impl NyuParams {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("tc_decay_ns", self.tc_decay_ns),
            ("subpath_decay_ns", self.subpath_decay_ns),
            ("mean_excess_delay_ns", self.mean_excess_delay_ns),
            ("lobe_az_spread_deg", self.lobe_az_spread_deg),
            ("lobe_zen_spread_deg", self.lobe_zen_spread_deg),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(SimError::arg(format!("{k} must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("cluster_shadow_sigma_db", self.cluster_shadow_sigma_db),
            ("subpath_shadow_sigma_db", self.subpath_shadow_sigma_db),
            ("void_interval_ns", self.void_interval_ns),
            ("intra_delay_spacing_ns", self.intra_delay_spacing_ns),
            ("lobe_zen_mean_sigma_deg", self.lobe_zen_mean_sigma_deg),
            ("xpr_sigma_db", self.xpr_sigma_db),
        ];
        for (k, v) in non_negative {
            if !(v >= 0.0) {
                return Err(SimError::arg(format!("{k} must be >= 0, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.los_power_fraction) {
            return Err(SimError::arg("los_power_fraction must lie in [0, 1)"));
        }
        if !(self.departure_sector_deg > 0.0 && self.departure_sector_deg <= 360.0) {
            return Err(SimError::arg("departure_sector_deg must lie in (0, 360]"));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct NyuRow {
    state: LinkState,
    #[serde(flatten)]
    params: NyuParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NyuTable {
    los: NyuParams,
    nlos: NyuParams,
}

const DEFAULT_NYU_CSV: &str = include_str!("../data/nyusim_params.csv");

impl Default for NyuTable {
    fn default() -> Self {
        Self::from_csv(DEFAULT_NYU_CSV).expect("shipped NYUSIM table parses")
    }
}

impl NyuTable {
    pub fn from_csv(text: &str) -> Result<Self> {
        let err = |message: String| SimError::Table {
            table: "nyusim".into(),
            message,
        };
        let mut los = None;
        let mut nlos = None;
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        for (i, rec) in rdr.deserialize::<NyuRow>().enumerate() {
            let r = rec.map_err(|e| err(format!("row {}: {e}", i + 1)))?;
            r.params.validate().map_err(|e| err(format!("row {}: {e}", i + 1)))?;
            match r.state {
                LinkState::Los => los = Some(r.params),
                LinkState::Nlos => nlos = Some(r.params),
            }
        }
        Ok(Self {
            los: los.ok_or_else(|| err("missing los row".into()))?,
            nlos: nlos.ok_or_else(|| err("missing nlos row".into()))?,
        })
    }

    pub fn get(&self, state: LinkState) -> &NyuParams {
        match state {
            LinkState::Los => &self.los,
            LinkState::Nlos => &self.nlos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NyuCounts {
    pub n_time_clusters: u32,
    pub subpaths_per_cluster: Vec<u32>,
    pub n_departure_lobes: u32,
    pub n_arrival_lobes: u32,
    /// Poisson draws before the `[1, 5]` clamp.
    pub raw_departure_lobes: u32,
    pub raw_arrival_lobes: u32,
}

pub fn draw_counts_nyu(rng: &mut RngStream, state: LinkState) -> Result<NyuCounts> {
    let n_tc = rng.uniform_int(1, MAX_TIME_CLUSTERS)?;
    let subpaths = (0..n_tc)
        .map(|_| rng.uniform_int(1, MAX_SUBPATHS))
        .collect::<Result<Vec<_>>>()?;
    let (dep_mean, arr_mean) = lobe_count_means(state);
    let raw_dep = rng.poisson(dep_mean)?;
    let raw_arr = rng.poisson(arr_mean)?;
    Ok(NyuCounts {
        n_time_clusters: n_tc,
        subpaths_per_cluster: subpaths,
        n_departure_lobes: raw_dep.clamp(1, MAX_LOBES),
        n_arrival_lobes: raw_arr.clamp(1, MAX_LOBES),
        raw_departure_lobes: raw_dep,
        raw_arrival_lobes: raw_arr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subpath {
    pub intra_delay_s: f64,
    /// Fraction of the total small-scale power.
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeCluster {
    pub excess_delay_s: f64,
    pub power_fraction: f64,
    pub subpaths: Vec<Subpath>,
}

/// Time clusters with void-separated excess delays and exponentially
/// decaying, log-normally shadowed cluster and subpath powers.
pub fn generate_time_clusters(
    rng: &mut RngStream,
    subpath_counts: &[u32],
    params: &NyuParams,
) -> Result<Vec<TimeCluster>> {
    if subpath_counts.is_empty() || subpath_counts.iter().any(|&m| m == 0 || m > MAX_SUBPATHS) {
        return Err(SimError::arg("each time cluster needs 1..=30 subpaths"));
    }
    let n = subpath_counts.len();

    // Intra-cluster delays in ns: ((m−1)·spacing)^(1+X), X ~ U[0, 0.43].
    let intra: Vec<Vec<f64>> = subpath_counts
        .iter()
        .map(|&m| {
            let x = rng.uniform(0.0, INTRA_DELAY_EXPONENT_MAX)?;
            let mut d: Vec<f64> = (0..m)
                .map(|k| (k as f64 * params.intra_delay_spacing_ns).powf(1.0 + x))
                .collect();
            d.sort_by(f64::total_cmp);
            Ok(d)
        })
        .collect::<Result<_>>()?;

    let mut raw: Vec<f64> = (0..n)
        .map(|_| -params.mean_excess_delay_ns * (1.0 - rng.unit()).ln())
        .collect();
    raw.sort_by(f64::total_cmp);
    let base = raw[0];
    let gaps: Vec<f64> = raw.iter().map(|t| t - base).collect();

    let mut excess = vec![0.0; n];
    for i in 1..n {
        let tail = *intra[i - 1].last().expect("non-empty cluster");
        excess[i] = excess[i - 1] + tail + (gaps[i] - gaps[i - 1]) + params.void_interval_ns;
    }

    let mut cluster_power: Vec<f64> = excess
        .iter()
        .map(|&t| {
            let z = rng.normal(0.0, params.cluster_shadow_sigma_db)?;
            Ok((-t / params.tc_decay_ns).exp() * db_to_linear(z))
        })
        .collect::<Result<_>>()?;
    let total: f64 = cluster_power.iter().sum();
    for p in &mut cluster_power {
        *p /= total;
    }

    let mut clusters = Vec::with_capacity(n);
    for i in 0..n {
        let mut sub: Vec<f64> = intra[i]
            .iter()
            .map(|&rho| {
                let u = rng.normal(0.0, params.subpath_shadow_sigma_db)?;
                Ok((-rho / params.subpath_decay_ns).exp() * db_to_linear(u))
            })
            .collect::<Result<_>>()?;
        let s: f64 = sub.iter().sum();
        for p in &mut sub {
            *p = *p / s * cluster_power[i];
        }
        clusters.push(TimeCluster {
            excess_delay_s: excess[i] * 1e-9,
            power_fraction: cluster_power[i],
            subpaths: intra[i]
                .iter()
                .zip(sub)
                .map(|(&rho, power)| Subpath {
                    intra_delay_s: rho * 1e-9,
                    power,
                })
                .collect(),
        });
    }
    Ok(clusters)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobeKind {
    Departure,
    Arrival,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialLobe {
    pub kind: LobeKind,
    pub mean_az: f64,
    pub mean_zen: f64,
    pub az_spread: f64,
    pub zen_spread: f64,
}

/// Angular anchor for one side of the link: the zenith centre for all
/// lobes, the azimuth span they share and, when pinned, the azimuth of
/// lobe 0 (the span is centred on it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeAnchor {
    pub zenith_deg: f64,
    pub pinned_azimuth_deg: Option<f64>,
    pub sector_deg: f64,
}

impl LobeAnchor {
    pub fn full_circle(zenith_deg: f64, pinned_azimuth_deg: Option<f64>) -> Self {
        Self {
            zenith_deg,
            pinned_azimuth_deg,
            sector_deg: 360.0,
        }
    }
}

/// Lobe means in `n` disjoint slots of width `span/n`: a rotation (random
/// unless pinned) plus jitter within the middle half of each slot, so any
/// two means are at least `span/(2n)` apart.
fn sector_lobes(
    rng: &mut RngStream,
    n: u32,
    kind: LobeKind,
    anchor: &LobeAnchor,
    params: &NyuParams,
) -> Result<Vec<SpatialLobe>> {
    if n == 0 {
        return Err(SimError::arg("lobe count must be >= 1"));
    }
    if !(anchor.sector_deg > 0.0 && anchor.sector_deg <= 360.0) {
        return Err(SimError::arg("lobe sector must lie in (0, 360]"));
    }
    let span = anchor.sector_deg;
    let width = span / n as f64;
    let rotation = match anchor.pinned_azimuth_deg {
        Some(az) => az,
        None => rng.uniform(-180.0, 180.0)?,
    };
    (0..n)
        .map(|k| {
            let jitter = if k == 0 && anchor.pinned_azimuth_deg.is_some() {
                0.0
            } else {
                rng.uniform(-width / 4.0, width / 4.0)?
            };
            let zen_jitter = if k == 0 && anchor.pinned_azimuth_deg.is_some() {
                0.0
            } else {
                rng.normal(0.0, params.lobe_zen_mean_sigma_deg)?
            };
            Ok(SpatialLobe {
                kind,
                mean_az: wrap_degrees(rotation + slot_offset(k as f64 * width, span) + jitter),
                mean_zen: reflect_zenith(anchor.zenith_deg + zen_jitter),
                az_spread: params.lobe_az_spread_deg,
                zen_spread: params.lobe_zen_spread_deg,
            })
        })
        .collect()
}

/// Slot offsets wrap inside a partial span so lobe 0 stays central.
fn slot_offset(offset: f64, span: f64) -> f64 {
    if span >= 360.0 {
        offset
    } else {
        (offset + span / 2.0).rem_euclid(span) - span / 2.0
    }
}

pub fn generate_spatial_lobes(
    rng: &mut RngStream,
    n_departure: u32,
    n_arrival: u32,
    departure_anchor: &LobeAnchor,
    arrival_anchor: &LobeAnchor,
    params: &NyuParams,
) -> Result<(Vec<SpatialLobe>, Vec<SpatialLobe>)> {
    let dep = sector_lobes(rng, n_departure, LobeKind::Departure, departure_anchor, params)?;
    let arr = sector_lobes(rng, n_arrival, LobeKind::Arrival, arrival_anchor, params)?;
    Ok((dep, arr))
}

/// Flatten clusters into rays, drawing each subpath's departure and
/// arrival lobe independently and uniformly.
pub fn assign_subpaths_to_lobes(
    rng: &mut RngStream,
    clusters: &[TimeCluster],
    departure: &[SpatialLobe],
    arrival: &[SpatialLobe],
    params: &NyuParams,
) -> Result<Vec<Ray>> {
    if clusters.is_empty() || departure.is_empty() || arrival.is_empty() {
        return Err(SimError::arg("need at least one cluster and one lobe per side"));
    }
    let mut rays = Vec::new();
    for tc in clusters {
        for sp in &tc.subpaths {
            let d = &departure[rng.uniform_int(0, departure.len() as u32 - 1)? as usize];
            let a = &arrival[rng.uniform_int(0, arrival.len() as u32 - 1)? as usize];
            let aod_az = wrap_degrees(rng.normal(d.mean_az, d.az_spread)?);
            let aod_zen = reflect_zenith(rng.normal(d.mean_zen, d.zen_spread)?);
            let aoa_az = wrap_degrees(rng.normal(a.mean_az, a.az_spread)?);
            let aoa_zen = reflect_zenith(rng.normal(a.mean_zen, a.zen_spread)?);
            let xpr = db_to_linear(rng.normal(params.xpr_mu_db, params.xpr_sigma_db)?);
            let phases = [rng.phase(), rng.phase(), rng.phase(), rng.phase()];
            rays.push(Ray {
                delay_s: tc.excess_delay_s + sp.intra_delay_s,
                power: sp.power,
                aod_az,
                aod_zen,
                aoa_az,
                aoa_zen,
                xpr,
                phases,
            });
        }
    }
    Ok(rays)
}

/// Full NYUSIM small-scale realization for one link. In LOS the first
/// lobe on each side is pinned to the geometric LOS direction and a
/// boresight ray takes `los_power_fraction` of the power. In NLOS the
/// first departure lobe sits within a quarter slot of the UE direction.
/// Departure lobes share `departure_sector_deg` around the UE direction.
pub fn realize_nyusim(
    rng: &mut RngStream,
    table: &NyuTable,
    geometry: &LinkGeometry,
    state: LinkState,
    path_loss_db: f64,
) -> Result<ChannelRealization> {
    let params = table.get(state);
    let counts = draw_counts_nyu(rng, state)?;
    let clusters = generate_time_clusters(rng, &counts.subpaths_per_cluster, params)?;
    let los: LosDirection = geometry.los_direction();
    let pin = state == LinkState::Los;
    let dep_azimuth = if pin {
        los.aod_az
    } else {
        let quarter = params.departure_sector_deg / (4.0 * counts.n_departure_lobes as f64);
        wrap_degrees(los.aod_az + rng.uniform(-quarter, quarter)?)
    };
    let dep_anchor = LobeAnchor {
        zenith_deg: los.aod_zen,
        pinned_azimuth_deg: Some(dep_azimuth),
        sector_deg: params.departure_sector_deg,
    };
    let arr_anchor = LobeAnchor::full_circle(los.aoa_zen, pin.then_some(los.aoa_az));
    let (dep, arr) = generate_spatial_lobes(
        rng,
        counts.n_departure_lobes,
        counts.n_arrival_lobes,
        &dep_anchor,
        &arr_anchor,
        params,
    )?;
    let mut rays = assign_subpaths_to_lobes(rng, &clusters, &dep, &arr, params)?;
    if state == LinkState::Los && params.los_power_fraction > 0.0 {
        let scattered = 1.0 - params.los_power_fraction;
        for r in &mut rays {
            r.power *= scattered;
        }
        rays.insert(0, Ray::specular(params.los_power_fraction, &los));
    }
    Ok(ChannelRealization {
        rays,
        link_state: state,
        path_loss_db,
        model: ChannelModel::Nyusim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(state: LinkState) -> NyuParams {
        *NyuTable::default().get(state)
    }

    fn free() -> LobeAnchor {
        LobeAnchor::full_circle(90.0, None)
    }

    #[test]
    fn lobe_counts_stay_in_range() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..20_000 {
            for state in [LinkState::Los, LinkState::Nlos] {
                let c = draw_counts_nyu(&mut rng, state).unwrap();
                assert!((1..=6).contains(&c.n_time_clusters));
                assert_eq!(c.subpaths_per_cluster.len(), c.n_time_clusters as usize);
                assert!(c.subpaths_per_cluster.iter().all(|m| (1..=30).contains(m)));
                assert!((1..=5).contains(&c.n_departure_lobes));
                assert!((1..=5).contains(&c.n_arrival_lobes));
            }
        }
    }

    #[test]
    fn time_cluster_pmf_is_uniform() {
        let mut rng = RngStream::new(2, 0);
        let n = 1_000_000;
        let mut bins = [0usize; 6];
        for _ in 0..n {
            bins[draw_counts_nyu(&mut rng, LinkState::Nlos).unwrap().n_time_clusters as usize - 1] += 1;
        }
        for b in bins {
            assert!((b as f64 / n as f64 - 1.0 / 6.0).abs() < 0.005);
        }
    }

    #[test]
    fn uncapped_departure_mean_los() {
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| draw_counts_nyu(&mut rng, LinkState::Los).unwrap().raw_departure_lobes as f64)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.9).abs() < 0.01, "{mean}");
    }

    #[test]
    fn cluster_delays_respect_void_interval() {
        for state in [LinkState::Los, LinkState::Nlos] {
            let p = params(state);
            for seed in 0..500 {
                let mut rng = RngStream::new(seed, 4);
                let c = draw_counts_nyu(&mut rng, state).unwrap();
                let tcs = generate_time_clusters(&mut rng, &c.subpaths_per_cluster, &p).unwrap();
                for w in tcs.windows(2) {
                    assert!(w[1].excess_delay_s - w[0].excess_delay_s >= 25e-9 - 1e-15);
                }
                let total: f64 = tcs.iter().flat_map(|t| &t.subpaths).map(|s| s.power).sum();
                assert!((total - 1.0).abs() < 1e-9);
                for t in &tcs {
                    assert_eq!(t.subpaths[0].intra_delay_s, 0.0);
                    assert!(t.subpaths.windows(2).all(|w| w[0].intra_delay_s <= w[1].intra_delay_s));
                }
            }
        }
    }

    #[test]
    fn single_cluster_takes_all_power() {
        let mut rng = RngStream::new(5, 0);
        let tcs = generate_time_clusters(&mut rng, &[7], &params(LinkState::Nlos)).unwrap();
        assert_eq!(tcs.len(), 1);
        assert!((tcs[0].power_fraction - 1.0).abs() < 1e-15);
        assert!(generate_time_clusters(&mut rng, &[], &params(LinkState::Nlos)).is_err());
        assert!(generate_time_clusters(&mut rng, &[31], &params(LinkState::Nlos)).is_err());
    }

    #[test]
    fn lobes_are_sector_separated() {
        let p = params(LinkState::Nlos);
        for seed in 0..2000 {
            let mut rng = RngStream::new(seed, 6);
            for n in 1..=5u32 {
                let (dep, _) = generate_spatial_lobes(&mut rng, n, 1, &free(), &free(), &p).unwrap();
                assert_eq!(dep.len(), n as usize);
                let min_sep = 360.0 / (2.0 * n as f64);
                for i in 0..dep.len() {
                    for j in (i + 1)..dep.len() {
                        let sep = wrap_degrees(dep[i].mean_az - dep[j].mean_az).abs();
                        assert!(sep >= min_sep - 1e-9, "n={n} sep={sep}");
                    }
                }
                let sector = LobeAnchor {
                    zenith_deg: 90.0,
                    pinned_azimuth_deg: Some(30.0),
                    sector_deg: 120.0,
                };
                let (dep, _) = generate_spatial_lobes(&mut rng, n, 1, &sector, &free(), &p).unwrap();
                assert_eq!(dep[0].mean_az, 30.0);
                let min_sep = 120.0 / (2.0 * n as f64);
                for i in 0..dep.len() {
                    assert!(wrap_degrees(dep[i].mean_az - 30.0).abs() <= 60.0 + 120.0 / (4.0 * n as f64) + 1e-9);
                    for j in (i + 1)..dep.len() {
                        assert!(wrap_degrees(dep[i].mean_az - dep[j].mean_az).abs() >= min_sep - 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn single_lobe_each_side_bounds_ray_angles() {
        let p = NyuParams {
            lobe_az_spread_deg: 5.0,
            lobe_zen_spread_deg: 2.0,
            ..params(LinkState::Nlos)
        };
        let mut rng = RngStream::new(7, 0);
        let (dep, arr) = generate_spatial_lobes(&mut rng, 1, 1, &free(), &free(), &p).unwrap();
        let tcs = generate_time_clusters(&mut rng, &[30, 30, 30], &p).unwrap();
        let rays = assign_subpaths_to_lobes(&mut rng, &tcs, &dep, &arr, &p).unwrap();
        assert_eq!(rays.len(), 90);
        for r in rays {
            // Six sigma envelope around the lobe means.
            assert!(wrap_degrees(r.aod_az - dep[0].mean_az).abs() < 6.0 * 5.0);
            assert!(wrap_degrees(r.aoa_az - arr[0].mean_az).abs() < 6.0 * 5.0);
            assert!((r.aoa_zen - arr[0].mean_zen).abs() < 6.0 * 2.0);
        }
    }

    #[test]
    fn realization_normalized_and_sparse() {
        let table = NyuTable::default();
        let g = LinkGeometry {
            d2d_m: 60.0,
            azimuth_deg: -15.0,
            bs_height_m: 10.0,
            ue_height_m: 1.5,
        };
        let mut counts = std::collections::BTreeSet::new();
        for seed in 0..100 {
            let mut rng = RngStream::new(seed, 8);
            for state in [LinkState::Los, LinkState::Nlos] {
                let r = realize_nyusim(&mut rng, &table, &g, state, 90.0).unwrap();
                r.check_normalized(1e-9).unwrap();
                assert!(r.rays.len() <= 6 * 30 + 1);
                counts.insert(r.rays.len());
            }
        }
        assert!(counts.len() > 2);
    }

    #[test]
    fn los_pins_first_lobes_and_adds_boresight() {
        let table = NyuTable::default();
        let g = LinkGeometry {
            d2d_m: 40.0,
            azimuth_deg: 25.0,
            bs_height_m: 10.0,
            ue_height_m: 1.5,
        };
        let los = g.los_direction();
        let mut rng = RngStream::new(9, 0);
        let r = realize_nyusim(&mut rng, &table, &g, LinkState::Los, 80.0).unwrap();
        let first = r.rays[0];
        assert_eq!(first.power, table.get(LinkState::Los).los_power_fraction);
        assert!((first.aod_az - los.aod_az).abs() < 1e-12);
        assert!((first.aoa_az - los.aoa_az).abs() < 1e-12);
    }
}
