use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use privoffload::io::{load_config, RunManifest, MANIFEST_FILE};
use privoffload::optimizer::exhaustive::{optimum, random_instance};
use privoffload::optimizer::{branch_and_bound, AllocationPolicy, Quantum};
use privoffload::rng::stream;
use privoffload::sim::{task_multiplier, Algorithm, ExperimentKind, ExperimentTable, PrivacyMode, ScenarioConfig};
use privoffload::{Error, Result};

/// Privacy-aware task offloading simulator.
#[derive(Parser)]
#[command(name = "privoffload", version)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and its all-local baseline.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run experiment 1 (privacy modes), 2 (algorithms) or 3 (budget sweep).
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: u32,
        /// Uses seeds 0..N-1.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
    /// Cross-check branch-and-bound against exhaustive enumeration on random small instances.
    Oracle {
        #[arg(long, default_value_t = 200)]
        instances: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_tasks: usize,
        #[arg(long, default_value_t = 3)]
        max_servers: usize,
        #[arg(long, default_value_t = 4)]
        max_quanta: u32,
    },
    /// Re-execute a saved manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    privacy: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
}

impl Common {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(a) = &self.algorithm {
            cfg.optimizer.algorithm = a.parse::<Algorithm>()?;
        }
        if let Some(p) = &self.privacy {
            cfg.privacy.mode = p.parse::<PrivacyMode>()?;
        }
        if let Some(e) = self.epsilon {
            cfg.privacy.epsilon = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summarize(table: &ExperimentTable, out: &Path) {
    for cell in &table.cells {
        let l = &cell.label;
        let rate = cell.series.final_reduction_rate().map_or("-".into(), |r| format!("{r:.4}"));
        let mult = task_multiplier(&cell.series).map_or("-".into(), |m| format!("{m:.4}"));
        println!(
            "{} {} {} eps={} seed={}: avg reduction rate {rate}, task multiplier {mult}",
            l.experiment, l.algorithm, l.privacy, l.epsilon, l.seed
        );
    }
    println!("wrote results to {}", out.display());
}

fn oracle(instances: u32, seed: u64, max_tasks: usize, max_servers: usize, max_quanta: u32) -> Result<()> {
    const QUANTUM: f64 = 5e8;
    let policy = AllocationPolicy::Quantized(Quantum::Fixed(QUANTUM));
    let mut rng = stream(seed, "oracle", &[]);
    let mut mismatches = 0;
    for i in 0..instances {
        let problem = random_instance(&mut rng, max_tasks, max_servers, max_quanta, QUANTUM);
        let found = branch_and_bound(&problem, Quantum::Fixed(QUANTUM))?.objective;
        let (best, _) = optimum(&problem, policy)?;
        if found != best {
            mismatches += 1;
            println!("instance {i}: branch-and-bound {found} vs enumeration {best}");
        }
    }
    println!("{} of {instances} instances match the exhaustive optimum", instances - mismatches);
    if mismatches > 0 {
        return Err(Error::Invariant(format!("{mismatches} oracle mismatches")));
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, seed } => {
            let mut cfg = common.config()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let table = RunManifest::for_run(cfg)?.execute(&common.out)?;
            summarize(&table, &common.out);
        }
        Command::Experiment { common, kind, seeds } => {
            let kind = ExperimentKind::from_number(kind)?;
            let manifest = RunManifest::for_experiment(kind, common.config()?, (0..seeds).collect())?;
            info!("running experiment {} over {seeds} seed(s)", kind.number());
            let table = manifest.execute(&common.out)?;
            summarize(&table, &common.out);
        }
        Command::Oracle {
            instances,
            seed,
            max_tasks,
            max_servers,
            max_quanta,
        } => oracle(instances, seed, max_tasks, max_servers, max_quanta)?,
        Command::Replay { manifest, out } => {
            let m = RunManifest::load(&manifest)?;
            let out = out.unwrap_or_else(|| match manifest.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            });
            let table = m.execute(&out)?;
            info!("replayed {} into {}", manifest.display(), out.join(MANIFEST_FILE).display());
            summarize(&table, &out);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Invariant(_) => 3,
                ref e if e.is_config() => 2,
                _ => 1,
            })
        }
    }
}
