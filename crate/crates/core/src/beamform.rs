//! Eigen analysis, multi-user precoding and spectral efficiency.
//!
//! Both precoding schemes serve one stream per user with a unit-norm
//! combiner at the UE and a unit-norm transmit vector per user at the BS;
//! the total power is split equally across users.

use num_complex::Complex64;

use crate::antenna::{array_response, ArrayGeometry};
use crate::error::{Result, SimError};
use crate::mathkit::{frobenius_norm_sq, gram, hermitian_eigvals, svd, CMat, CVec, RngStream};
use crate::realization::ChannelRealization;

/// Effective channels whose Gram matrix `H̄·H̄ᴴ` has a condition number
/// above this are rejected.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenReport {
    /// Eigenvalues of `H·Hᴴ`, descending; length `min(Nr, Nt)`.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues divided by their sum.
    pub ratios: Vec<f64>,
}

impl EigenReport {
    /// `λ_max / λ_min`.
    pub fn spread(&self) -> f64 {
        self.eigenvalues[0] / self.eigenvalues[self.eigenvalues.len() - 1]
    }
}

/// Eigenvalues of the Gram matrix of `h`.
///
/// Values below the numerical noise floor `λ_max·n·ε` are raised to it, so
/// a rank-deficient channel reports a large but finite spread.
pub fn eigen_report(h: &CMat) -> Result<EigenReport> {
    if h.is_empty() {
        return Err(SimError::arg("empty channel matrix"));
    }
    let g = if h.nrows() <= h.ncols() { gram(h) } else { gram(&h.adjoint()) };
    let mut eigenvalues = hermitian_eigvals(&g)?;
    let floor = eigenvalues[0].max(0.0) * eigenvalues.len() as f64 * f64::EPSILON;
    for v in &mut eigenvalues {
        *v = v.max(floor);
    }
    let total: f64 = eigenvalues.iter().sum();
    let ratios = if total > 0.0 {
        eigenvalues.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / eigenvalues.len() as f64; eigenvalues.len()]
    };
    Ok(EigenReport { eigenvalues, ratios })
}

/// Per-user transmit and receive vectors of a multi-user precoder.
///
/// The transmit vector of user `k` is `analog_tx · baseband[:, k]`. For
/// block diagonalization `analog_tx` holds the full digital precoders and
/// `baseband` is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub analog_tx: Vec<CVec>,
    pub combiners: Vec<CVec>,
    pub baseband: CMat,
    /// Linear transmit power per user (same unit as the total).
    pub powers: Vec<f64>,
}

impl PrecoderSet {
    pub fn n_users(&self) -> usize {
        self.combiners.len()
    }

    fn rf_matrix(&self) -> CMat {
        CMat::from_columns(&self.analog_tx)
    }

    /// All users' transmit vectors as the columns of an `Nt × K` matrix.
    pub fn transmit_vectors(&self) -> CMat {
        self.rf_matrix() * &self.baseband
    }

    pub fn transmit_vector(&self, k: usize) -> CVec {
        self.rf_matrix() * self.baseband.column(k)
    }

    /// `Σ_k ‖f_k‖²·p_k`.
    pub fn transmit_power(&self) -> f64 {
        let f = self.transmit_vectors();
        (0..self.n_users()).map(|k| f.column(k).norm_squared() * self.powers[k]).sum()
    }
}

/// Indices of the distinct ray directions, in first-seen order.
fn distinct_directions(dirs: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for d in dirs {
        if !out.iter().any(|o| o.0 == d.0 && o.1 == d.1) {
            out.push(d);
        }
    }
    out
}

/// Analog beam pair maximizing `|wᴴ·H·f|` over the array responses of the
/// ray directions of one user.
pub fn select_beam_pair(
    h: &CMat,
    realization: &ChannelRealization,
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
) -> Result<(CVec, CVec)> {
    if realization.rays.is_empty() {
        return Err(SimError::arg("beam selection needs at least one ray"));
    }
    let tx_dirs = distinct_directions(realization.rays.iter().map(|r| (r.aod_az, r.aod_zen)));
    let rx_dirs = distinct_directions(realization.rays.iter().map(|r| (r.aoa_az, r.aoa_zen)));
    let f_cb = CMat::from_columns(&tx_dirs.iter().map(|&(a, z)| array_response(tx, a, z)).collect::<Vec<_>>());
    let w_cb = CMat::from_columns(&rx_dirs.iter().map(|&(a, z)| array_response(rx, a, z)).collect::<Vec<_>>());
    let gains = w_cb.adjoint() * (h * &f_cb);
    let mut best = (0, 0, -1.0);
    for j in 0..gains.ncols() {
        for i in 0..gains.nrows() {
            let g = gains[(i, j)].norm_sqr();
            if g > best.2 {
                best = (i, j, g);
            }
        }
    }
    Ok((f_cb.column(best.1).into_owned(), w_cb.column(best.0).into_owned()))
}

fn condition_number(m: &CMat) -> Result<f64> {
    let s = svd(m)?;
    let smax = s.singular_values[0];
    let smin = s.singular_values[s.singular_values.len() - 1];
    Ok(if smin > 0.0 { smax / smin } else { f64::INFINITY })
}

fn check_user_count(channels: &[CMat]) -> Result<()> {
    if channels.is_empty() {
        return Err(SimError::arg("precoding needs at least one user"));
    }
    let nt = channels[0].ncols();
    if channels.iter().any(|h| h.ncols() != nt) {
        return Err(SimError::arg("all users must share the BS array"));
    }
    Ok(())
}

/// Hybrid precoding: per-user analog beam selection from the ray-direction
/// codebook, then zero-forcing on the `K × K` effective channel.
///
/// Returns [`SimError::DegenerateDrop`] when the effective channel is too
/// ill-conditioned to invert.
pub fn hybrid_precode(
    channels: &[CMat],
    realizations: &[ChannelRealization],
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    total_power: f64,
) -> Result<PrecoderSet> {
    check_user_count(channels)?;
    if realizations.len() != channels.len() {
        return Err(SimError::arg("one realization per user is required"));
    }
    let k = channels.len();
    let mut analog_tx = Vec::with_capacity(k);
    let mut combiners = Vec::with_capacity(k);
    for (h, r) in channels.iter().zip(realizations) {
        let (f, w) = select_beam_pair(h, r, tx, rx)?;
        analog_tx.push(f);
        combiners.push(w);
    }
    let f_rf = CMat::from_columns(&analog_tx);
    let h_eff = CMat::from_fn(k, k, |i, j| {
        (combiners[i].adjoint() * &channels[i] * f_rf.column(j))[(0, 0)]
    });
    // cond(H̄·H̄ᴴ) = cond(H̄)².
    let cond = condition_number(&h_eff)?.powi(2);
    if !(cond <= MAX_CONDITION_NUMBER) {
        return Err(SimError::DegenerateDrop(format!(
            "effective channel condition number {cond:.3e}"
        )));
    }
    // For square H̄ the ZF solution H̄ᴴ(H̄H̄ᴴ)⁻¹ is H̄⁻¹. Rows are equalized
    // first (users sit at very different path losses); that only rescales
    // columns of the inverse, which the normalization below removes.
    let mut scaled = h_eff.clone();
    for i in 0..k {
        let n = scaled.row(i).norm();
        scaled.row_mut(i).unscale_mut(n);
    }
    let mut baseband = scaled
        .full_piv_lu()
        .try_inverse()
        .ok_or_else(|| SimError::DegenerateDrop("effective channel is singular".into()))?;
    let f = &f_rf * &baseband;
    for j in 0..k {
        let norm = f.column(j).norm();
        baseband.column_mut(j).unscale_mut(norm);
    }
    Ok(PrecoderSet {
        analog_tx,
        combiners,
        baseband,
        powers: vec![total_power / k as f64; k],
    })
}

/// Block diagonalization: each user's precoder lies in the null space of
/// every other user's channel and follows the dominant mode of its own
/// projected channel.
pub fn bd_precode(channels: &[CMat], total_power: f64) -> Result<PrecoderSet> {
    check_user_count(channels)?;
    let k = channels.len();
    let nt = channels[0].ncols();
    let mut analog_tx = Vec::with_capacity(k);
    let mut combiners = Vec::with_capacity(k);
    for user in 0..k {
        let others: Vec<&CMat> = channels.iter().enumerate().filter(|&(j, _)| j != user).map(|(_, h)| h).collect();
        let other_rows: usize = others.iter().map(|h| h.nrows()).sum();
        if other_rows >= nt {
            return Err(SimError::config(
                "users",
                format!("block diagonalization needs fewer than {nt} interfering receive antennas, got {other_rows}"),
            ));
        }
        let own = &channels[user];
        let projected = if others.is_empty() {
            own.clone()
        } else {
            let mut stacked = CMat::zeros(other_rows, nt);
            let mut row = 0;
            for h in &others {
                stacked.rows_mut(row, h.nrows()).copy_from(*h);
                row += h.nrows();
            }
            let s = svd(&stacked)?;
            let tol = s.singular_values[0] * other_rows.max(nt) as f64 * f64::EPSILON;
            let rank = s.singular_values.iter().filter(|&&v| v > tol).count();
            let v1 = s.v.columns(0, rank).into_owned();
            own - (own * &v1) * v1.adjoint()
        };
        let s = svd(&projected)?;
        if !(s.singular_values[0] > 0.0) {
            return Err(SimError::DegenerateDrop(format!(
                "user {} has no gain outside the other users' row space",
                user + 1
            )));
        }
        analog_tx.push(s.v.column(0).into_owned());
        combiners.push(s.u.column(0).into_owned());
    }
    Ok(PrecoderSet {
        analog_tx,
        combiners,
        baseband: CMat::identity(k, k),
        powers: vec![total_power / k as f64; k],
    })
}

/// Per-user `log2(1 + SINR)` in bps/Hz.
pub fn spectral_efficiency(precoders: &PrecoderSet, channels: &[CMat], noise_power: f64) -> Result<Vec<f64>> {
    let k = precoders.n_users();
    if channels.len() != k || precoders.powers.len() != k {
        return Err(SimError::arg("precoder and channel user counts differ"));
    }
    let f = precoders.transmit_vectors();
    let mut out = Vec::with_capacity(k);
    for user in 0..k {
        let g = precoders.combiners[user].adjoint() * &channels[user] * &f;
        let mut signal = 0.0;
        let mut interference = 0.0;
        for j in 0..k {
            let p = g[(0, j)].norm_sqr() * precoders.powers[j];
            if j == user {
                signal = p;
            } else {
                interference += p;
            }
        }
        out.push((1.0 + signal / (noise_power + interference)).log2());
    }
    Ok(out)
}

/// i.i.d. `CN(0, 1)` entries scaled by the path gain `10^(−PL/20)`.
pub fn rayleigh_baseline(rng: &mut RngStream, n_rx: usize, n_tx: usize, path_loss_db: f64) -> CMat {
    let amp = 10f64.powf(-path_loss_db / 20.0) * std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(n_rx, n_tx, |_, _| {
        Complex64::new(rng.standard_normal(), rng.standard_normal()) * amp
    })
}

/// `Σλ` of an eigen report relative to `‖H‖²_F`, for contract checks.
pub fn trace_mismatch(h: &CMat, report: &EigenReport) -> f64 {
    let f = frobenius_norm_sq(h);
    (report.eigenvalues.iter().sum::<f64>() - f).abs() / f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::{ElementPattern, Polarization};
    use crate::realization::Ray;
    use crate::scenario::{ChannelModel, LinkState};

    fn random_channel(rng: &mut RngStream, nr: usize, nt: usize) -> CMat {
        rayleigh_baseline(rng, nr, nt, 0.0)
    }

    fn ula(n: usize) -> ArrayGeometry {
        ArrayGeometry {
            rows: 1,
            cols: n,
            spacing_wavelengths: 0.5,
            polarization: Polarization::Single,
            pattern: ElementPattern::Omni,
        }
    }

    fn ray_at(u: f64, power: f64) -> ChannelRealization {
        ChannelRealization {
            rays: vec![Ray {
                delay_s: 0.0,
                power,
                aod_az: u.asin().to_degrees(),
                aod_zen: 90.0,
                aoa_az: 0.0,
                aoa_zen: 90.0,
                xpr: f64::INFINITY,
                phases: [0.0; 4],
            }],
            link_state: LinkState::Los,
            path_loss_db: 0.0,
            model: ChannelModel::ThreeGpp,
        }
    }

    #[test]
    fn rank_one_ratios() {
        let a = CVec::from_fn(8, |i, _| Complex64::new(i as f64, 1.0));
        let b = CVec::from_fn(32, |i, _| Complex64::new(1.0, -(i as f64)));
        let r = eigen_report(&(a * b.adjoint())).unwrap();
        assert!((r.ratios[0] - 1.0).abs() < 1e-9);
        assert!(r.ratios[1..].iter().all(|&x| x < 1e-9));
        assert!((r.ratios.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_trace_identity() {
        let mut rng = RngStream::new(1, 0);
        for (nr, nt) in [(8, 256), (4, 4), (16, 3)] {
            let h = random_channel(&mut rng, nr, nt);
            let r = eigen_report(&h).unwrap();
            assert_eq!(r.eigenvalues.len(), nr.min(nt));
            assert!(trace_mismatch(&h, &r) < 1e-9);
            assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rayleigh_entry_variance() {
        let mut rng = RngStream::new(2, 0);
        let h = random_channel(&mut rng, 1000, 1000);
        let var = frobenius_norm_sq(&h) / 1e6;
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn zf_and_bd_nulls() {
        let mut rng = RngStream::new(3, 0);
        let tx = ArrayGeometry::default_bs();
        let rx = ArrayGeometry::default_ue();
        let mut channels = Vec::new();
        let mut reals = Vec::new();
        for k in 0..3 {
            let mut r = ray_at(0.0, 1.0);
            r.rays.clear();
            for i in 0..6 {
                r.rays.push(Ray {
                    delay_s: i as f64 * 1e-8,
                    power: 1.0 / 6.0,
                    aod_az: rng.uniform(-60.0, 60.0).unwrap(),
                    aod_zen: rng.uniform(80.0, 110.0).unwrap(),
                    aoa_az: rng.uniform(-180.0, 180.0).unwrap(),
                    aoa_zen: rng.uniform(60.0, 120.0).unwrap(),
                    xpr: 10.0 + k as f64,
                    phases: [rng.phase(), rng.phase(), rng.phase(), rng.phase()],
                });
            }
            channels.push(crate::antenna::assemble_channel(&r, &tx, &rx, 28.0).unwrap().entries);
            reals.push(r);
        }
        let hy = hybrid_precode(&channels, &reals, &tx, &rx, 1.0).unwrap();
        let bd = bd_precode(&channels, 1.0).unwrap();
        for set in [&hy, &bd] {
            assert!((set.transmit_power() - 1.0).abs() < 1e-9);
            assert!(set.combiners.iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));
        }
        let f_bd = bd.transmit_vectors();
        let f_hy = hy.transmit_vectors();
        for k in 0..3 {
            let own_bd = (&channels[k] * f_bd.column(k)).norm();
            let own_hy = (hy.combiners[k].adjoint() * &channels[k] * f_hy.column(k))[(0, 0)].norm();
            for j in (0..3).filter(|&j| j != k) {
                assert!((&channels[k] * f_bd.column(j)).norm() < 1e-9 * own_bd);
                let leak = (hy.combiners[k].adjoint() * &channels[k] * f_hy.column(j))[(0, 0)].norm();
                assert!(leak < 1e-9 * own_hy);
            }
        }
    }

    #[test]
    fn single_user_bd_is_dominant_eigenmode() {
        let mut rng = RngStream::new(4, 0);
        let h = random_channel(&mut rng, 8, 64);
        let bd = bd_precode(std::slice::from_ref(&h), 2.0).unwrap();
        let se = spectral_efficiency(&bd, std::slice::from_ref(&h), 0.5).unwrap();
        let lmax = eigen_report(&h).unwrap().eigenvalues[0];
        assert!((se[0] - (1.0 + 2.0 * lmax / 0.5).log2()).abs() < 1e-9);
    }

    #[test]
    fn single_user_hybrid_uses_best_beam() {
        let tx = ula(8);
        let rx = ula(1);
        let mut r = ray_at(0.2, 0.7);
        let mut second = ray_at(-0.5, 0.3).rays[0];
        second.delay_s = 2e-9;
        r.rays.push(second);
        let h = crate::antenna::assemble_channel(&r, &tx, &rx, 28.0).unwrap().entries;
        let hy = hybrid_precode(std::slice::from_ref(&h), std::slice::from_ref(&r), &tx, &rx, 1.0).unwrap();
        let se = spectral_efficiency(&hy, std::slice::from_ref(&h), 1.0).unwrap();
        let best = [0.2f64, -0.5]
            .iter()
            .map(|&u| (&h * array_response(&tx, u.asin().to_degrees(), 90.0))[0].norm_sqr())
            .fold(0.0, f64::max);
        assert!((se[0] - (1.0 + best).log2()).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_users_hybrid_equals_bd() {
        // Directions 2/N apart in sin-space give orthogonal ULA responses.
        let tx = ula(8);
        let rx = ula(1);
        let reals = [ray_at(0.0, 1.0), ray_at(0.25, 0.5)];
        let channels: Vec<CMat> = reals
            .iter()
            .map(|r| crate::antenna::assemble_channel(r, &tx, &rx, 28.0).unwrap().entries)
            .collect();
        let hy = hybrid_precode(&channels, &reals, &tx, &rx, 1.0).unwrap();
        let bd = bd_precode(&channels, 1.0).unwrap();
        let se_hy = spectral_efficiency(&hy, &channels, 0.1).unwrap();
        let se_bd = spectral_efficiency(&bd, &channels, 0.1).unwrap();
        for k in 0..2 {
            assert!((se_hy[k] - se_bd[k]).abs() < 1e-6, "{se_hy:?} {se_bd:?}");
        }
    }

    #[test]
    fn spectral_efficiency_edge_cases() {
        let set = PrecoderSet {
            analog_tx: vec![CVec::from_element(1, Complex64::new(1.0, 0.0))],
            combiners: vec![CVec::from_element(1, Complex64::new(1.0, 0.0))],
            baseband: CMat::identity(1, 1),
            powers: vec![1.0],
        };
        let zero = CMat::zeros(1, 1);
        assert_eq!(spectral_efficiency(&set, &[zero], 1.0).unwrap(), vec![0.0]);
        let one = CMat::from_element(1, 1, Complex64::new(0.0, 1.0));
        assert!((spectral_efficiency(&set, &[one], 1.0).unwrap()[0] - 1.0).abs() < 1e-15);
        let hi = CMat::from_element(1, 1, Complex64::new(1e3, 0.0));
        let hi2 = CMat::from_element(1, 1, Complex64::new(1e3 * 2f64.sqrt(), 0.0));
        let d = spectral_efficiency(&set, &[hi2], 1.0).unwrap()[0] - spectral_efficiency(&set, &[hi], 1.0).unwrap()[0];
        assert!((d - 1.0).abs() < 0.01);
    }

    #[test]
    fn co_directional_users_are_degenerate() {
        let tx = ula(8);
        let rx = ula(1);
        let reals = [ray_at(0.1, 1.0), ray_at(0.1, 0.5)];
        let channels: Vec<CMat> = reals
            .iter()
            .map(|r| crate::antenna::assemble_channel(r, &tx, &rx, 28.0).unwrap().entries)
            .collect();
        assert!(matches!(
            hybrid_precode(&channels, &reals, &tx, &rx, 1.0),
            Err(SimError::DegenerateDrop(_))
        ));
    }

    #[test]
    fn bd_rejects_missing_null_space() {
        let mut rng = RngStream::new(5, 0);
        let chans: Vec<CMat> = (0..3).map(|_| random_channel(&mut rng, 4, 8)).collect();
        assert!(matches!(bd_precode(&chans, 1.0), Err(SimError::Config { .. })));
    }
}
