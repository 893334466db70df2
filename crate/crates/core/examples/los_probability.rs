//! LOS probability against distance for both models and environments.
//!
//!     cargo run --example los_probability

use mmwsim::scenario::{los_probability_3gpp, los_probability_nyusim, Environment, LinkState, PathLossTable};

fn main() -> mmwsim::Result<()> {
    let table = PathLossTable::default();
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "d (m)", "3gpp umi", "nyu umi", "3gpp uma", "nyu uma");
    for d in [1.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0, 150.0, 200.0, 300.0, 500.0] {
        let mut row = format!("{d:>6.0}");
        for env in [Environment::UmiStreetCanyon, Environment::Uma] {
            let p = los_probability_3gpp(d, env, 1.5)?;
            let q = los_probability_nyusim(d, table.get(env, LinkState::Los))?;
            row += &format!(" {p:>10.3} {q:>10.3}");
        }
        println!("{row}");
    }

    // Where each UMi curve crosses one half.
    for (name, f) in [
        ("3gpp", Box::new(|d| los_probability_3gpp(d, Environment::UmiStreetCanyon, 1.5)) as Box<dyn Fn(f64) -> _>),
        ("nyusim", Box::new(|d| los_probability_nyusim(d, table.get(Environment::UmiStreetCanyon, LinkState::Los)))),
    ] {
        let mut d = 1.0;
        while f(d)? > 0.5 {
            d += 0.1;
        }
        println!("UMi {name} LOS probability drops below 0.5 at {d:.1} m");
    }
    Ok(())
}
