//! Eigenvalue spread of 8×256 channels from each model, path loss removed.
//!
//!     cargo run --release --example eigen_spread -- 200

use mmwsim::antenna::{assemble_channel, ArrayGeometry};
use mmwsim::beamform::{eigen_report, rayleigh_baseline};
use mmwsim::chan3gpp::{realize_3gpp, LspTable};
use mmwsim::channyu::{realize_nyusim, NyuTable};
use mmwsim::mathkit::RngStream;
use mmwsim::montecarlo::median;
use mmwsim::realization::LinkGeometry;
use mmwsim::scenario::{Environment, LinkState};

fn main() -> mmwsim::Result<()> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let (bs, ue) = (ArrayGeometry::default_bs(), ArrayGeometry::default_ue());
    let (lsp, nyu) = (LspTable::default(), NyuTable::default());
    let geometry = LinkGeometry {
        d2d_m: 100.0,
        azimuth_deg: 0.0,
        bs_height_m: 10.0,
        ue_height_m: 1.5,
    };

    let mut spreads = [Vec::new(), Vec::new(), Vec::new()];
    let mut ratio_sums = [[0.0; 8]; 3];
    for seed in 0..n {
        let mut rng = RngStream::new(seed, 0);
        let g = realize_3gpp(&mut rng, Environment::UmiStreetCanyon, &lsp, &geometry, LinkState::Nlos, 0.0)?;
        let y = realize_nyusim(&mut rng, &nyu, &geometry, LinkState::Nlos, 0.0)?;
        let channels = [
            assemble_channel(&g, &bs, &ue, 28.0)?.entries,
            assemble_channel(&y, &bs, &ue, 28.0)?.entries,
            rayleigh_baseline(&mut rng, ue.n_elements(), bs.n_elements(), 0.0),
        ];
        for (i, h) in channels.iter().enumerate() {
            let r = eigen_report(h)?;
            spreads[i].push(r.spread());
            for (acc, v) in ratio_sums[i].iter_mut().zip(&r.ratios) {
                *acc += v;
            }
        }
    }

    for (i, name) in ["3gpp", "nyusim", "rayleigh"].iter().enumerate() {
        let ratios: Vec<String> = ratio_sums[i].iter().map(|s| format!("{:.1}", 10.0 * (s / n as f64).log10())).collect();
        println!("{name:>8}: median spread {:>10.1}, mean ratios (dB) [{}]", median(&spreads[i]), ratios.join(", "));
    }
    Ok(())
}
