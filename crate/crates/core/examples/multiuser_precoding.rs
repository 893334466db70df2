//! Hybrid ZF and block diagonalization on one three-user drop.
//!
//!     cargo run --release --example multiuser_precoding -- 11

use mmwsim::beamform::{bd_precode, hybrid_precode, spectral_efficiency};
use mmwsim::config::SystemConfig;
use mmwsim::mathkit::{db_to_linear, CMat, RngStream};
use mmwsim::montecarlo::{build_drop, cell_radius_2d, stream_id, CampaignModel, ModelTables};
use mmwsim::realization::ChannelRealization;

fn main() -> mmwsim::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(11);
    let config = SystemConfig { seed, ..SystemConfig::default() };
    let tables = ModelTables::default();
    let power = db_to_linear(config.link_budget.tx_power_dbm);
    let noise = db_to_linear(config.link_budget.noise_power_dbm());

    for model in [CampaignModel::ThreeGpp, CampaignModel::Nyusim] {
        let radius = cell_radius_2d(&config, &tables, model)?;
        let mut rng = RngStream::new(seed, stream_id(model, 0, 0));
        let drop = build_drop(&mut rng, &config, &tables, model.link_model(), radius)?;
        let channels: Vec<CMat> = drop.users.iter().map(|u| u.channel.clone()).collect();
        let reals: Vec<ChannelRealization> = drop.users.iter().map(|u| u.realization.clone()).collect();

        println!("{}:", model.tag());
        for u in &drop.users {
            println!(
                "  user at {:>6.1} m, {:>6.1} deg, {:?}, path loss {:.1} dB, {} rays",
                u.position.d2d_m,
                u.position.azimuth_deg,
                u.link_state,
                u.realization.path_loss_db,
                u.realization.rays.len()
            );
        }
        let bd = bd_precode(&channels, power)?;
        let bd_se = spectral_efficiency(&bd, &channels, noise)?;
        println!("  BD      SE {:.2?} bps/Hz", bd_se);
        match hybrid_precode(&channels, &reals, &config.bs_array, &config.ue_array, power) {
            Ok(h) => println!("  hybrid  SE {:.2?} bps/Hz", spectral_efficiency(&h, &channels, noise)?),
            Err(e) => println!("  hybrid  skipped: {e}"),
        }
    }
    Ok(())
}
