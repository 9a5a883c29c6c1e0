use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use fuzzy_mococo::coevo::Hyperparams;
use fuzzy_mococo::environment::McConfig;
use fuzzy_mococo::experiment::{
    load_frbs_records, merge_fronts, run_experiment, run_oracle, select_record, write_front, write_histogram,
    RunConfig, MANIFEST_FILE,
};

#[derive(Parser)]
#[command(name = "mococo", version, about = "Evolve parsimonious fuzzy rule-based policies for Mountain Car")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded experiment and write its artifacts.
    Run {
        /// TOML config, or a run manifest (.json) to reproduce.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Suppress per-generation progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Solve the discretized task by value iteration and score the policy.
    Oracle {
        #[arg(long, default_value_t = 1000)]
        bins: usize,
        /// Seed of the initial-state set.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of initial states.
        #[arg(long, default_value_t = 30)]
        eta: usize,
        /// Directory for the report and the binary policy table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the rules of a saved FRBS.
    Render {
        /// best_frbs.json or front_frbs.json from a run directory.
        #[arg(long)]
        frbs: PathBuf,
        /// Pick a solution from a front file; defaults to the best one.
        #[arg(long)]
        solution_id: Option<String>,
    },
    /// Concatenate front CSVs of several runs.
    Merge {
        #[arg(required = true)]
        fronts: Vec<PathBuf>,
        /// Merged front CSV.
        #[arg(long)]
        out: PathBuf,
        /// Also write the complexity histogram as CSV.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Print a config template.
    Config {
        /// Template for the quick smoke settings instead of full scale.
        #[arg(long)]
        smoke: bool,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out, quiet } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let summary = run_experiment(&cfg, &out, |r| {
                if !quiet {
                    eprintln!(
                        "gen {:>3}  solutions {:>5}  failed {:>5}  best {:>8.2}  mean {:>8.2}  front {}",
                        r.generation, r.num_solutions, r.num_failed, r.best_perf, r.mean_perf, r.front_size
                    );
                }
            })?;
            println!("seed {}: {} front solutions", cfg.seed, summary.front.len());
            if let Some(best) = &summary.best {
                print!("best: {}", best.to_text());
            }
            println!("artifacts in {} (manifest: {})", out.display(), out.join(MANIFEST_FILE).display());
        }
        Command::Oracle { bins, seed, eta, out } => {
            anyhow::ensure!(bins >= 2, "--bins must be at least 2");
            anyhow::ensure!(eta >= 1, "--eta must be at least 1");
            let r = run_oracle(bins, seed, eta, &McConfig::default(), out.as_deref())?;
            println!(
                "bins {} seed {} eta {} iterations {} perf {:.4}{}",
                r.bins,
                r.seed,
                r.eta,
                r.iterations,
                r.perf,
                if r.failed { " (failed)" } else { "" }
            );
        }
        Command::Render { frbs, solution_id } => {
            let records = load_frbs_records(&frbs)?;
            let record = select_record(records, solution_id.as_deref(), &frbs)?;
            print!("{}", record.to_text());
        }
        Command::Merge { fronts, out, histogram } => {
            let merged = merge_fronts(&fronts)?;
            let file = fs::File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_front(file, &merged.rows).with_context(|| format!("writing {}", out.display()))?;
            if let Some(h) = &histogram {
                let file = fs::File::create(h).with_context(|| format!("creating {}", h.display()))?;
                write_histogram(file, &merged.histogram).with_context(|| format!("writing {}", h.display()))?;
            }
            println!("{} rows from {} fronts", merged.rows.len(), fronts.len());
            println!("complexity  count");
            for (c, n) in &merged.histogram {
                println!("{c:>10}  {n:>5}");
            }
        }
        Command::Config { smoke } => {
            let hp = if smoke { Hyperparams::smoke() } else { Hyperparams::default() };
            print!("{}", RunConfig::new(hp, 0).to_toml());
        }
    }
    Ok(())
}
