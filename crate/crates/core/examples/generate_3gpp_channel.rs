//! One 3GPP clustered realization and the MIMO channel it produces.
//!
//!     cargo run --example generate_3gpp_channel -- 7

use mmwsim::antenna::{assemble_channel, ArrayGeometry};
use mmwsim::chan3gpp::{realize_3gpp, LspTable};
use mmwsim::mathkit::{frobenius_norm_sq, RngStream};
use mmwsim::realization::LinkGeometry;
use mmwsim::scenario::{Environment, LinkState};

fn main() -> mmwsim::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut rng = RngStream::new(seed, 0);
    let geometry = LinkGeometry {
        d2d_m: 80.0,
        azimuth_deg: 15.0,
        bs_height_m: 10.0,
        ue_height_m: 1.5,
    };
    let r = realize_3gpp(&mut rng, Environment::UmiStreetCanyon, &LspTable::default(), &geometry, LinkState::Nlos, 110.0)?;

    println!("{} rays, total power {:.6}", r.rays.len(), r.total_power());
    println!("{:>4} {:>10} {:>9} {:>8} {:>8}", "ray", "delay ns", "power", "aod az", "aoa az");
    let mut strongest = r.rays.clone();
    strongest.sort_by(|a, b| b.power.total_cmp(&a.power));
    for (i, ray) in strongest.iter().take(8).enumerate() {
        println!(
            "{i:>4} {:>10.1} {:>9.5} {:>8.1} {:>8.1}",
            ray.delay_s * 1e9,
            ray.power,
            ray.aod_az,
            ray.aoa_az
        );
    }

    let h = assemble_channel(&r, &ArrayGeometry::default_bs(), &ArrayGeometry::default_ue(), 28.0)?;
    println!(
        "H is {}x{}, small-scale |H|_F^2 = {:.1}",
        h.n_rx(),
        h.n_tx(),
        frobenius_norm_sq(&h.small_scale())
    );
    Ok(())
}
