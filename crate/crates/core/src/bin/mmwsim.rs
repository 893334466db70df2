//! Command-line front end: load a config, run the campaign, write CSVs.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mmwsim::config::{ModelSelection, SystemConfig};
use mmwsim::montecarlo::{run_campaign, CampaignResult};
use mmwsim::output::{emit_outputs, OutputKind, RunManifest};
use mmwsim::scenario::Environment;
use mmwsim::SimError;

#[derive(Debug, Parser)]
#[command(version, about = "Statistical mmWave channel simulator")]
struct Cli {
    /// TOML configuration file; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// One of 3gpp, nyusim, rayleigh, all.
    #[arg(long)]
    model: Option<String>,
    /// One of umi, uma.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated: los-prob-curves, pathloss-curves, eigen-ratios,
    /// eigen-cdfs, se-cdfs, or all.
    #[arg(long, default_value = "all")]
    outputs: String,
    /// Worker threads for the Monte Carlo drops.
    #[arg(long, env = "MMWSIM_WORKERS")]
    workers: Option<usize>,
}

fn load(cli: &Cli) -> mmwsim::Result<SystemConfig> {
    let mut cfg = match &cli.config {
        Some(p) => SystemConfig::from_path(p)?,
        None => SystemConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = &cli.model {
        cfg.model = m.parse::<ModelSelection>()?;
    }
    if let Some(s) = &cli.scenario {
        cfg.environment = match s.as_str() {
            "umi" => Environment::UmiStreetCanyon,
            "uma" => Environment::Uma,
            other => return Err(SimError::Config {
                key: "scenario".into(),
                line: None,
                message: format!("unknown scenario `{other}`"),
            }),
        };
    }
    if let Some(d) = cli.drops {
        cfg.drops = d;
    }
    if let Some(u) = cli.users {
        cfg.users = u;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> mmwsim::Result<Vec<PathBuf>> {
    let cfg = load(&cli)?;
    let outputs = OutputKind::parse_list(&cli.outputs)?;
    let result = if outputs.iter().any(|k| k.needs_campaign()) {
        run_campaign(&cfg, cli.workers)?
    } else {
        CampaignResult { config: cfg, models: Vec::new() }
    };
    let manifest = RunManifest {
        config_path: cli.config,
        out_dir: cli.out,
        outputs,
    };
    emit_outputs(&result, &manifest)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ SimError::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
