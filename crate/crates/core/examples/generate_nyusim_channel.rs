//! One NYUSIM realization: time clusters, spatial lobes and rays.
//!
//!     cargo run --example generate_nyusim_channel -- 3

use mmwsim::channyu::{draw_counts_nyu, realize_nyusim, NyuTable};
use mmwsim::mathkit::RngStream;
use mmwsim::realization::LinkGeometry;
use mmwsim::scenario::LinkState;

fn main() -> mmwsim::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let geometry = LinkGeometry {
        d2d_m: 80.0,
        azimuth_deg: 15.0,
        bs_height_m: 10.0,
        ue_height_m: 1.5,
    };

    // The same stream replays the count draw that opens the realization.
    let counts = draw_counts_nyu(&mut RngStream::new(seed, 0), LinkState::Nlos)?;
    println!(
        "{} time clusters with {:?} subpaths, {} departure and {} arrival lobes",
        counts.n_time_clusters, counts.subpaths_per_cluster, counts.n_departure_lobes, counts.n_arrival_lobes
    );

    let r = realize_nyusim(&mut RngStream::new(seed, 0), &NyuTable::default(), &geometry, LinkState::Nlos, 110.0)?;
    println!("{} rays, total power {:.6}", r.rays.len(), r.total_power());
    println!("{:>10} {:>9} {:>8} {:>8} {:>8}", "delay ns", "power", "aod az", "aoa az", "xpr dB");
    for ray in &r.rays {
        println!(
            "{:>10.1} {:>9.5} {:>8.1} {:>8.1} {:>8.1}",
            ray.delay_s * 1e9,
            ray.power,
            ray.aod_az,
            ray.aoa_az,
            10.0 * ray.xpr.log10()
        );
    }
    Ok(())
}
