//! Config-file CLI for the clmem library. Exit codes: 0 success, 1 config
//! error, 2 run failure, 3 i/o error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use clmem::harness::{emit_results, run_grid, ExperimentConfig, GridOutcome, RunFailure};
use clmem::{cscore, Error};

/// Default output directory when neither `--out` nor the config sets one.
const OUT_ENV: &str = "CLMEM_OUT";

#[derive(Parser)]
#[command(name = "clmem", about = "Continual-learning memory population experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment across its seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed list, e.g. --seeds 1,2,3
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parallel worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the cartesian grid declared in the config's [grid] section.
    Grid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Estimate consistency scores for the configured dataset.
    EstimateCscores {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the buffer snapshot CSVs of one task from a run directory.
    SnapshotDump {
        /// Output directory of a previous run.
        run: PathBuf,
        #[arg(long)]
        task: usize,
        /// Restrict to one seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn resolve_out(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf, Error> {
    flag.or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .ok_or_else(|| {
            Error::Config(format!(
                "no output directory: pass --out, set `output` in the config, or set ${OUT_ENV}"
            ))
        })
}

fn configure_jobs(jobs: Option<usize>) -> Result<(), Error> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::Config("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            out,
            jobs,
        } => {
            configure_jobs(jobs)?;
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seeds) = seeds {
                if seeds.is_empty() {
                    return Err(Error::Config("--seeds needs at least one seed".into()));
                }
                cfg.seeds = seeds;
            }
            cfg.grid = None; // `run` executes the base cell only
            let out_dir = resolve_out(out, &cfg)?;
            execute(&cfg, &out_dir)
        }
        Command::Grid { config, out, jobs } => {
            configure_jobs(jobs)?;
            let cfg = ExperimentConfig::load(&config)?;
            let out_dir = resolve_out(out, &cfg)?;
            execute(&cfg, &out_dir)
        }
        Command::EstimateCscores { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (params, train_cfg) = cfg.scores.estimate_params().ok_or_else(|| {
                Error::Config("config must use a `kind = \"estimate\"` score source".into())
            })?;
            let (train, _) = cfg.dataset.load()?;
            let outcome = cscore::estimate_cscores(&train, &params, &train_cfg)?;
            if !outcome.fallback_indices.is_empty() {
                eprintln!(
                    "warning: {} of {} samples were never held out; their scores use the \
                     in-training fallback (raise k_models or lower subset_ratio)",
                    outcome.fallback_indices.len(),
                    train.len()
                );
            }
            cscore::export_scores(&outcome.scores, &out)?;
            println!("wrote {} scores to {}", outcome.scores.len(), out.display());
            Ok(0)
        }
        Command::SnapshotDump { run, task, seed } => snapshot_dump(&run, task, seed),
    }
}

fn execute(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32, Error> {
    let snapshot_root = out_dir.join("snapshots");
    let outcome = run_grid(cfg, Some(&snapshot_root))?;
    emit_results(&outcome, out_dir)?;
    print_summary(&outcome);
    println!("results: {}", out_dir.join("results.jsonl").display());
    if outcome.failures.is_empty() {
        Ok(0)
    } else {
        for RunFailure { cell, seed, error } in &outcome.failures {
            eprintln!("failed: {cell} seed {seed}: {error}");
        }
        Ok(2)
    }
}

fn print_summary(outcome: &GridOutcome) {
    println!("cell                                  seeds  mean_acc  sd_acc   mean_forget");
    for a in &outcome.aggregates {
        // Display clamps negative forgetting at zero; raw values stay in
        // the exports.
        let forget = a.mean_forgetting.max(0.0);
        println!(
            "{:<38}{:>5}  {:>7.2}%  {:>6.2}  {:>10.2}%",
            a.cell,
            a.num_seeds,
            100.0 * a.mean_acc,
            100.0 * a.sd_acc,
            100.0 * forget
        );
    }
}

fn snapshot_dump(run: &Path, task: usize, seed: Option<u64>) -> Result<i32, Error> {
    let mut matches = Vec::new();
    let needle = format!("-task{task}.csv");
    let roots = [run.join("snapshots"), run.to_path_buf()];
    for root in roots.iter().filter(|r| r.is_dir()) {
        collect_snapshots(root, &needle, seed, &mut matches)?;
    }
    if matches.is_empty() {
        return Err(Error::Usage(format!(
            "no snapshots for task {task} under {}",
            run.display()
        )));
    }
    matches.sort();
    for path in matches {
        println!("# {}", path.display());
        print!("{}", std::fs::read_to_string(&path)?);
    }
    Ok(0)
}

fn collect_snapshots(
    root: &Path,
    needle: &str,
    seed: Option<u64>,
    matches: &mut Vec<PathBuf>,
) -> Result<(), Error> {
    for entry in std::fs::read_dir(root)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_snapshots(&path, needle, seed, matches)?;
        } else if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
            let seed_ok = seed.is_none_or(|s| name.starts_with(&format!("seed{s}-")));
            if name.ends_with(needle) && seed_ok {
                matches.push(path);
            }
        }
    }
    Ok(())
}
