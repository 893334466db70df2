use mmwsim::beamform::{eigen_report, trace_mismatch};
use mmwsim::chan3gpp::{realize_3gpp, LspTable};
use mmwsim::channyu::{realize_nyusim, NyuTable};
use mmwsim::mathkit::{reflect_zenith, svd, wrap_degrees, CMat, RngStream};
use mmwsim::montecarlo::empirical_cdf;
use mmwsim::realization::LinkGeometry;
use mmwsim::scenario::{
    los_probability_3gpp, los_probability_nyusim, path_loss_ci, path_loss_ci_two_slope, Environment, LinkState,
    PathLossTable,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = CMat> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), r * c)
            .prop_map(move |v| CMat::from_iterator(r, c, v.into_iter().map(|(re, im)| Complex64::new(re, im))))
    })
}

fn state() -> impl Strategy<Value = LinkState> {
    prop_oneof![Just(LinkState::Los), Just(LinkState::Nlos)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigen_ratios_sum_to_one(h in complex_matrix(8, 24)) {
        prop_assume!(h.norm() > 1e-6);
        let r = eigen_report(&h).unwrap();
        prop_assert!((r.ratios.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(r.ratios.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(trace_mismatch(&h, &r) < 1e-10);
    }

    #[test]
    fn svd_reconstructs(h in complex_matrix(9, 9)) {
        let d = svd(&h).unwrap();
        let scale = h.norm().max(1.0);
        prop_assert!((d.reconstruct() - &h).norm() / scale < 1e-10);
        prop_assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn angle_maps_land_in_range(x in -1e4..1e4f64) {
        let w = wrap_degrees(x);
        prop_assert!((-180.0..180.0).contains(&w));
        prop_assert!((((w - x) / 360.0).round() * 360.0 - (w - x)).abs() < 1e-6);
        let z = reflect_zenith(x);
        prop_assert!((0.0..=180.0).contains(&z));
    }

    #[test]
    fn ci_path_loss_is_monotone_with_decade_rule(
        fc in 0.5..100.0f64,
        d in 1.0..1e4f64,
        step in 0.0..1e3f64,
        ple in 1.0..6.0f64,
    ) {
        let a = path_loss_ci(fc, d, ple, 0.0).unwrap();
        prop_assert!(path_loss_ci(fc, d + step, ple, 0.0).unwrap() >= a);
        let decade = path_loss_ci(fc, 10.0 * d, ple, 0.0).unwrap() - a;
        prop_assert!((decade - 10.0 * ple).abs() < 1e-9);
    }

    #[test]
    fn two_slope_is_continuous_at_the_breakpoint(
        fc in 1.0..100.0f64,
        ple in 1.5..3.0f64,
        far in 3.0..5.0f64,
        bp in 10.0..1e3f64,
    ) {
        let near = path_loss_ci_two_slope(fc, bp, ple, far, bp, 0.0).unwrap();
        let past = path_loss_ci_two_slope(fc, bp * (1.0 + 1e-9), ple, far, bp, 0.0).unwrap();
        prop_assert!((near - past).abs() < 1e-6);
        let decade = path_loss_ci_two_slope(fc, 10.0 * bp, ple, far, bp, 0.0).unwrap() - near;
        prop_assert!((decade - 10.0 * far).abs() < 1e-9);
    }

    #[test]
    fn los_probabilities_are_probabilities(d in 0.0..5e3f64, h in 1.0..22.5f64) {
        let table = PathLossTable::default();
        for env in [Environment::UmiStreetCanyon, Environment::Uma] {
            let p = los_probability_3gpp(d, env, h).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            let q = los_probability_nyusim(d, table.get(env, LinkState::Los)).unwrap();
            prop_assert!((0.0..=1.0).contains(&q));
        }
    }

    #[test]
    fn empirical_cdf_is_a_step_cdf(v in prop::collection::vec(-1e3..1e3f64, 1..200)) {
        let cdf = empirical_cdf(&v).unwrap();
        prop_assert!(cdf.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        prop_assert_eq!(cdf.last().unwrap().1, 1.0);
        prop_assert!(cdf[0].1 >= 1.0 / v.len() as f64);
    }

    #[test]
    fn realizations_are_normalized_with_valid_angles(
        seed in any::<u64>(),
        s in state(),
        d in 10.0..500.0f64,
        az in -60.0..60.0f64,
    ) {
        let geometry = LinkGeometry { d2d_m: d, azimuth_deg: az, bs_height_m: 10.0, ue_height_m: 1.5 };
        let mut rng = RngStream::new(seed, 0);
        let g = realize_3gpp(&mut rng, Environment::UmiStreetCanyon, &LspTable::default(), &geometry, s, 0.0).unwrap();
        let n = realize_nyusim(&mut rng, &NyuTable::default(), &geometry, s, 0.0).unwrap();
        for r in [g, n] {
            prop_assert!((r.total_power() - 1.0).abs() < 1e-9);
            for ray in &r.rays {
                for a in [ray.aod_az, ray.aoa_az] {
                    prop_assert!((-180.0..180.0).contains(&a));
                }
                for z in [ray.aod_zen, ray.aoa_zen] {
                    prop_assert!((0.0..=180.0).contains(&z));
                }
                prop_assert!(ray.phases.iter().all(|p| (0.0..std::f64::consts::TAU).contains(p) || *p == std::f64::consts::PI));
            }
        }
    }
}
