use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ticc_core::experiment::{replay, run_experiment, sweep, sweep_csv, RunFile, ScenarioRef, SweepAxis};
use ticc_core::{ExperimentConfig, PlannerMode, TiccError};

#[derive(Parser)]
#[command(name = "ticc", version, about = "Capability-calibrating collaborative planning: experiments and live sessions")]
struct Cli {
    /// Worker threads for running seeds in parallel (default: all cores).
    #[arg(long, global = true, env = "TICC_WORKERS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run learning and evaluation rounds for one planner and write tidy CSV.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<PlannerMode>,
        /// Write the summary (mean and standard error per round) here.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Write one replayable JSON file per run into this directory.
        #[arg(long)]
        save_runs: Option<PathBuf>,
    },
    /// Repeat an experiment over a range of sample budgets, item counts or list counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "ticc,std")]
        modes: Vec<PlannerMode>,
    },
    /// Re-execute a saved run and check that it reproduces exactly.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
    /// Serve the session API over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with experiment settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled scenario name (setup1, setup2-2..5, setup3-5..10, human-study).
    #[arg(long)]
    setup: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    learning_rounds: Option<usize>,
    #[arg(long)]
    evaluation_rounds: Option<usize>,
    #[arg(long)]
    particles: Option<usize>,
    /// Root-parallel search trees per planner call.
    #[arg(long)]
    search_workers: Option<usize>,
    /// Reduced fidelity: 10 runs at 10k samples.
    #[arg(long)]
    quick: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<PlannerMode, String> {
    s.parse().map_err(|e: TiccError| e.to_string())
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, TiccError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_toml(&fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        if self.quick {
            cfg = cfg.quick();
        }
        if let Some(s) = &self.setup {
            cfg.scenario = ScenarioRef::Named(s.clone());
        }
        if let Some(n) = self.samples {
            cfg.planner.num_samples = n;
        }
        if let Some(n) = self.runs {
            cfg.num_runs = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.learning_rounds {
            cfg.learning_rounds = n;
        }
        if let Some(n) = self.evaluation_rounds {
            cfg.evaluation_rounds = n;
        }
        if let Some(n) = self.particles {
            cfg.num_particles = n;
        }
        if let Some(n) = self.search_workers {
            cfg.planner.workers = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), TiccError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(command: Command) -> Result<ExitCode, TiccError> {
    match command {
        Command::Run { common, mode, summary, save_runs } => {
            let mut cfg = common.config()?;
            if let Some(mode) = mode {
                cfg = cfg.with_mode(mode);
            }
            let result = run_experiment(&cfg)?;
            for run in result.runs.iter().filter(|r| r.aborted.is_some()) {
                eprintln!("run {} (seed {}) aborted: {}", run.run_id, run.seed, run.aborted.as_deref().unwrap_or(""));
            }
            emit(common.out.as_deref(), &result.to_csv())?;
            if let Some(path) = summary {
                fs::write(path, result.summary.to_csv())?;
            }
            if let Some(dir) = save_runs {
                fs::create_dir_all(&dir)?;
                for run in &result.runs {
                    let file = RunFile { config: cfg.clone(), run: run.clone() };
                    let json = serde_json::to_string_pretty(&file).map_err(|e| TiccError::Io(e.to_string()))?;
                    fs::write(dir.join(format!("run-{}.json", run.run_id)), json)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, axis, values, modes } => {
            let cfg = common.config()?;
            let cells = sweep(&cfg, axis, &values, &modes)?;
            emit(common.out.as_deref(), &sweep_csv(axis, &cells))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { log } => {
            let text = fs::read_to_string(&log)?;
            let file: RunFile<f64> = serde_json::from_str(&text).map_err(|e| TiccError::Io(format!("{}: {e}", log.display())))?;
            let report = replay(&file.config, &file.run)?;
            if report.identical {
                println!("identical: run {} seed {} ({} rounds)", file.run.run_id, file.run.seed, file.run.rounds.len());
                Ok(ExitCode::SUCCESS)
            } else {
                match report.first_difference {
                    Some(round) => println!("differs at round {round}"),
                    None => println!("differs in abort status"),
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Serve { addr } => {
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on {addr}");
            rt.block_on(ticc::serve(&addr))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
