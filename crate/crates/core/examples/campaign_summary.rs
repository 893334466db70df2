//! Run a small campaign and print per-model medians.
//!
//!     cargo run --release --example campaign_summary -- 200

use mmwsim::config::SystemConfig;
use mmwsim::montecarlo::{median, run_campaign};

fn main() -> mmwsim::Result<()> {
    let drops = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let config = SystemConfig { drops, ..SystemConfig::default() };
    let result = run_campaign(&config, None)?;

    for m in &result.models {
        println!("{} (cell radius {:.1} m)", m.model.tag(), m.cell_radius_m);
        println!("  median lambda_max/lambda_min  {:.1}", median(&m.spreads()));
        let lmax: Vec<f64> = m.eigen.iter().map(|e| 10.0 * e.eigenvalues[0].log10()).collect();
        println!("  median lambda_max             {:.1} dB", median(&lmax));
        if !m.se_bd.is_empty() {
            println!("  median SE hybrid              {:.2} bps/Hz", median(&m.se_hybrid));
            println!("  median SE BD                  {:.2} bps/Hz", median(&m.se_bd));
            println!("  LOS users                     {} of {}", m.los_users, m.se_bd.len());
        }
        println!("  resampled drops               {}", m.resamples);
    }
    Ok(())
}
