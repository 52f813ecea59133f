//! Scenario runner: loads a JSON experiment config, executes the requested
//! verification scenario(s), and writes deterministic JSON reports plus CSV
//! dumps. Exit code 0 iff every pass/fail flag passes, 1 on flag failures,
//! 2 on errors.

mod config;
mod context;
mod export;
mod report;
mod scenarios;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use context::Ctx;
use report::Report;

#[derive(Parser)]
#[command(
    name = "focklab",
    version,
    about = "Verification scenarios for Toeplitz operators on doubling Fock spaces"
)]
struct Cli {
    #[command(subcommand)]
    scenario: ScenarioCmd,
    /// path to the JSON experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// directory for reports and CSV exports
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,
    /// seed for the random test functions (recorded in reports)
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// max scenarios run in parallel (only `all` uses more than one)
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum ScenarioCmd {
    /// radius-function geometry: Lipschitz, disk comparison, sigma bounds
    Geometry,
    /// Carleson equivalences: averaging/Berezin sups and embedding bounds
    Carleson,
    /// operator norm against kernel-action statistics
    Toeplitz,
    /// Schatten norms against integral and lattice forms
    Schatten,
    /// trace identities and the atomic closed-sum oracle
    Trace,
    /// every scenario
    All,
}

impl ScenarioCmd {
    fn names(self) -> Vec<&'static str> {
        match self {
            ScenarioCmd::Geometry => vec!["geometry"],
            ScenarioCmd::Carleson => vec!["carleson"],
            ScenarioCmd::Toeplitz => vec!["toeplitz"],
            ScenarioCmd::Schatten => vec!["schatten"],
            ScenarioCmd::Trace => vec!["trace"],
            ScenarioCmd::All => scenarios::ALL.to_vec(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    });
}

fn run(cli: Cli) -> Result<bool> {
    let config_path = cli
        .config
        .context("--config PATH is required")?;
    let loaded = config::load(&config_path)?;
    let ctx = Ctx::build(loaded, cli.seed, cli.out.clone())?;

    let names = cli.scenario.names();
    let threads = cli.threads.max(1);
    let mut results: Vec<(&str, Result<Report>)> = Vec::with_capacity(names.len());
    let ctx_ref = &ctx;
    for chunk in names.chunks(threads) {
        let mut batch: Vec<(&str, Result<Report>)> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&name| s.spawn(move || (name, scenarios::run(name, ctx_ref))))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scenario thread panicked"))
                .collect()
        });
        results.append(&mut batch);
    }

    // report writing is serialized, in deterministic name order
    results.sort_by_key(|(name, _)| *name);
    let mut all_pass = true;
    for (name, res) in results {
        let rep = res.with_context(|| format!("scenario '{name}' failed"))?;
        let path = rep.write(&cli.out)?;
        let pass = rep.all_pass();
        let failed: Vec<&str> = rep
            .flags
            .iter()
            .filter(|(_, f)| !f.pass)
            .map(|(k, _)| k.as_str())
            .collect();
        if pass {
            println!("scenario {name}: PASS ({} flags) -> {}", rep.flags.len(), path.display());
        } else {
            println!(
                "scenario {name}: FAIL ({} of {} flags failed: {}) -> {}",
                failed.len(),
                rep.flags.len(),
                failed.join(", "),
                path.display()
            );
        }
        all_pass &= pass;
    }
    Ok(all_pass)
}
