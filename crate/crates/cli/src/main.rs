//! `ssep <experiment> --config <file> [--seed S] [--out DIR] [--threads K]`
//!
//! Exit status: 0 when every check passes, 2 when a check fails, 1 on a
//! configuration or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ssep_core::harness::{run_experiment, ExperimentConfig, ExperimentKind};

#[derive(Parser, Debug)]
#[command(name = "ssep", version, about = "Boundary-driven exclusion experiments")]
struct Cli {
    /// hydro | hydrostatic | corr | duality | gw-alpha | dual-stats | engines-equal
    experiment: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replica parallelism (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<bool, String> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let mut cfg = ExperimentConfig::load(&cli.config).map_err(|e| e.to_string())?;
    if let Some(kind) = cfg.experiment {
        if kind != cli.experiment {
            return Err(format!("config is for '{kind}', not '{}'", cli.experiment));
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out_dir = cli
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}-seed{}", cli.experiment, cfg.seed)));
    let params = cfg.params().map_err(|e| e.to_string())?;
    if let Some(w) = params.h1_warning() {
        eprintln!("{w}");
    }
    let out = run_experiment(cli.experiment, &cfg).map_err(|e| e.to_string())?;
    out.write(&out_dir).map_err(|e| e.to_string())?;
    for c in &out.report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {} value={:.6e} bound={:.6e}", c.name, c.value, c.bound);
    }
    println!("wrote {}", out_dir.display());
    Ok(out.report.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
