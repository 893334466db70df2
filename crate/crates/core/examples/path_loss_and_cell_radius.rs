//! Path-loss laws at 28 GHz and the cell radius each model implies.
//!
//!     cargo run --example path_loss_and_cell_radius

use mmwsim::config::SystemConfig;
use mmwsim::montecarlo::{cell_radius_2d, CampaignModel, ModelTables};
use mmwsim::scenario::{path_loss_ci, ChannelModel, Environment, LinkState};

fn main() -> mmwsim::Result<()> {
    let config = SystemConfig::default();
    let tables = ModelTables::default();
    let fc = config.link_budget.carrier_ghz;
    let umi = |s| tables.pathloss.get(Environment::UmiStreetCanyon, s);

    println!("free space at 1 m, 1 GHz: {:.2} dB", path_loss_ci(1.0, 1.0, 2.0, 0.0)?);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "d (m)", "3gpp los", "3gpp nlos", "nyu los", "nyu nlos");
    for d in [10.0, 30.0, 100.0, 200.0, 500.0] {
        let mut row = format!("{d:>6.0}");
        for model in [ChannelModel::ThreeGpp, ChannelModel::Nyusim] {
            for s in [LinkState::Los, LinkState::Nlos] {
                row += &format!(" {:>10.1}", umi(s).mean_path_loss_db(model, fc, d)?);
            }
        }
        println!("{row}");
    }

    let lb = &config.link_budget;
    println!("noise power {:.1} dBm, max path loss {:.1} dB", lb.noise_power_dbm(), lb.max_path_loss_db());
    for model in [CampaignModel::ThreeGpp, CampaignModel::Nyusim] {
        println!("{} cell radius {:.1} m", model.tag(), cell_radius_2d(&config, &tables, model)?);
    }
    Ok(())
}
