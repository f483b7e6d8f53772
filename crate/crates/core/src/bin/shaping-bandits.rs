use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shaping_bandits::harness::{
    bundled_config, proposition1_oracle, run_experiment, write_experiment, ExperimentConfig, RunOptions,
    BUNDLED_CONFIGS,
};
use shaping_bandits::Error;

/// Overrides the output directory of every config when set.
const OUT_ENV: &str = "SHAPING_BANDITS_OUT";

#[derive(Parser)]
#[command(name = "shaping-bandits", version, about = "Bandit-driven reward shaping experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of one config (its [sweep] section is ignored).
    Run {
        /// Config file, or the name of a bundled config.
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every combination in the config's [sweep] section.
    Sweep {
        config: PathBuf,
        /// Run seeds on all cores.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the constant-arm oracle on built-in curve pairs.
    Oracle,
    /// List bundled experiment configs.
    ListExperiments,
}

fn load(path: &Path) -> Result<ExperimentConfig, Error> {
    match ExperimentConfig::load(path) {
        Err(Error::ConfigNotFound(p)) => match path.to_str().and_then(bundled_config) {
            Some(text) => ExperimentConfig::parse(text),
            None => Err(Error::ConfigNotFound(p)),
        },
        other => other,
    }
}

fn out_dir(cli: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    cli.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.experiment.output_dir.clone())
}

fn run_all(configs: &[ExperimentConfig], out: Option<PathBuf>, opts: &RunOptions) -> Result<(), Error> {
    for cfg in configs {
        let rows = run_experiment(cfg, opts)?;
        let path = write_experiment(cfg, &out_dir(out.clone(), cfg), &rows)?;
        println!("{}: {} rows -> {}", cfg.experiment.name, rows.len(), path.display());
    }
    Ok(())
}

fn oracle() -> Result<bool, Error> {
    let cases: [(&str, Vec<f64>, Vec<f64>, f64); 3] = [
        ("rising vs flat", vec![0.1, 0.2, 0.3, 0.4], vec![0.2; 4], 1.0),
        ("identical", vec![0.1, 0.2, 0.3, 0.4], vec![0.1, 0.2, 0.3, 0.4], 1.0),
        ("dominated", vec![0.5; 4], vec![0.9; 4], 3.6),
    ];
    let mut ok = true;
    for (name, a, b, expected) in cases {
        let o = proposition1_oracle(&a, &b, 4)?;
        let pass = o.constant_attains_max && (o.best_value - expected).abs() < 1e-9;
        ok &= pass;
        println!("{} oracle {name}: max {:.4}", if pass { "PASS" } else { "FAIL" }, o.best_value);
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { config, seed_offset, out } => load(&config).and_then(|cfg| {
            let cfg = ExperimentConfig { sweep: None, ..cfg };
            run_all(&[cfg], out, &RunOptions { seed_offset, parallel: false })
        }),
        Command::Sweep { config, parallel, out } => {
            load(&config).and_then(|cfg| run_all(&cfg.expand_sweep(), out, &RunOptions { seed_offset: 0, parallel }))
        }
        Command::Oracle => match oracle() {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
        Command::ListExperiments => {
            for (name, text) in BUNDLED_CONFIGS {
                let summary = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name:<22} {summary}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
