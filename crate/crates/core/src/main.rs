use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use socsched::engine::{write_trace_csv, RewardKind, SimConfig};
use socsched::harness::{
    load_job, load_platform, synthesize_to_dir, workload_set, write_metrics_csv, write_synth_csv, ExperimentSpec,
    HarnessError,
};
use socsched::neural::{write_training_log, Checkpoint, EpisodeLog, ModeKind, TrainConfig, TrainError, Trainer};
use socsched::platform::Platform;
use socsched::profiles::{synthetic_job, synthetic_platform};
use socsched::workload::{DagGenParams, JobDag};

/// Set to `info` for per-run progress on stderr.
const LOG_ENV: &str = "SOCSCHED_LOG";

#[derive(Parser)]
#[command(name = "socsched", version, about = "SoC task scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run heuristic (or checkpointed neural) schedulers over a sweep.
    Run(RunArgs),
    /// Train the actor-critic scheduler.
    Train(TrainArgs),
    /// Run a trained checkpoint greedily over a sweep.
    Eval(EvalArgs),
    /// Synthesize random job profiles.
    Synth(SynthArgs),
}

/// Workload, platform and episode settings. List-valued flags take
/// comma-separated values and form a sweep.
#[derive(Args)]
struct EnvArgs {
    /// Job profile; defaults to the bundled 10-task job.
    #[arg(long)]
    job: Option<PathBuf>,
    /// Resource profile; defaults to the bundled 4-PE platform.
    #[arg(long)]
    resource: Option<PathBuf>,
    /// Run config (`key = value`) providing episode defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    scale: Vec<f64>,
    #[arg(long)]
    sim_length: Option<u64>,
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long)]
    num_workloads: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    mu: Vec<f64>,
    /// Synthesize workloads with these shapes, using the job profile's costs.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    nu: Vec<f64>,
    #[arg(long)]
    reward: Option<RewardKind>,
    #[arg(long = "seeds", alias = "seed", value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, value_delimiter = ',', default_value = "heft_rt")]
    scheduler: Vec<String>,
    /// Checkpoint for the `neural` scheduler.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Metrics CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one event trace CSV per run here.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    env: EnvArgs,
    /// Episodes to train in this invocation.
    #[arg(long, default_value_t = 100)]
    episodes: u64,
    #[arg(long)]
    action_mode: Option<ModeKind>,
    #[arg(long)]
    a_max: Option<usize>,
    /// Per-action returns (default).
    #[arg(long, overrides_with = "no_eim")]
    eim: bool,
    /// Per-interaction returns.
    #[arg(long)]
    no_eim: bool,
    /// Training config (`key = value`) providing defaults.
    #[arg(long)]
    train_config: Option<PathBuf>,
    /// Continue from this checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Where to write the trained checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Training log CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Cost source; defaults to the bundled 10-task job.
    #[arg(long)]
    job: Option<PathBuf>,
    #[arg(long)]
    resource: Option<PathBuf>,
    /// Tasks per job; defaults to the cost source's size.
    #[arg(long)]
    v: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the profiles and `summary.csv`.
    #[arg(long)]
    out: PathBuf,
}

fn verbose() -> bool {
    std::env::var(LOG_ENV).is_ok_and(|v| matches!(v.as_str(), "info" | "debug"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn platform_and_job(resource: &Option<PathBuf>, job: &Option<PathBuf>) -> Result<(Platform, JobDag), HarnessError> {
    let platform = match resource {
        Some(p) => load_platform(p)?,
        None => synthetic_platform(),
    };
    let job = match job {
        Some(p) => load_job(p, &platform)?,
        None => synthetic_job(),
    };
    Ok((platform, job))
}

impl EnvArgs {
    fn sim(&self) -> Result<SimConfig, HarnessError> {
        let mut sim = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(io_err(p))?;
                SimConfig::from_toml(&text).map_err(|e| HarnessError::Invalid(format!("{}: {e}", p.display())))?
            }
            None => SimConfig::default(),
        };
        if let Some(v) = self.sim_length {
            sim.sim_length = v;
        }
        if let Some(v) = self.capacity {
            sim.capacity = v;
        }
        if let Some(v) = self.num_workloads {
            sim.num_workloads = v;
        }
        if let Some(v) = self.reward {
            sim.reward_kind = v;
        }
        if let [s] = self.scale[..] {
            sim.scale = s;
        }
        Ok(sim)
    }

    fn spec(&self, schedulers: Vec<String>, checkpoint: Option<Checkpoint>) -> Result<ExperimentSpec, HarnessError> {
        let (platform, job) = platform_and_job(&self.resource, &self.job)?;
        Ok(ExperimentSpec {
            job,
            platform,
            sim: self.sim()?,
            schedulers,
            alphas: self.alpha.clone(),
            nus: self.nu.clone(),
            mus: self.mu.clone(),
            scales: self.scale.clone(),
            seeds: self.seeds.clone(),
            checkpoint,
        })
    }
}

fn single<T: Copy>(name: &str, values: &[T]) -> Result<Option<T>, HarnessError> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(HarnessError::Invalid(format!("--{name} takes a single value here"))),
    }
}

fn run_sweep(spec: &ExperimentSpec, out: &Option<PathBuf>, trace_dir: &Option<PathBuf>) -> Result<(), HarnessError> {
    if let Some(dir) = trace_dir {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let rows = spec.run(|i, row, result| {
        if verbose() {
            eprintln!("[{i}] {} {} seed {}: {} jobs", row.sweep, row.scheduler, row.seed, row.completed_jobs);
        }
        if let Some(dir) = trace_dir {
            let path = dir.join(format!("run_{i:04}_{}_seed{}.csv", row.scheduler, row.seed));
            write_trace_csv(&result.trace, create(&path)?)?;
        }
        Ok(())
    })?;
    match out {
        Some(p) => write_metrics_csv(&rows, create(p)?),
        None => write_metrics_csv(&rows, std::io::stdout().lock()),
    }
}

fn cmd_run(a: RunArgs) -> Result<(), HarnessError> {
    let checkpoint = a.checkpoint.as_deref().map(Checkpoint::load).transpose()?;
    let spec = a.env.spec(a.scheduler, checkpoint)?;
    run_sweep(&spec, &a.out, &a.trace_dir)
}

fn cmd_eval(a: EvalArgs) -> Result<(), HarnessError> {
    let checkpoint = Checkpoint::load(&a.checkpoint)?;
    let spec = a.env.spec(vec!["neural".into()], Some(checkpoint))?;
    run_sweep(&spec, &a.out, &a.trace_dir)
}

fn cmd_train(a: TrainArgs) -> Result<(), HarnessError> {
    let e = &a.env;
    let (platform, job) = platform_and_job(&e.resource, &e.job)?;
    let sim = e.sim()?;
    sim.validate().map_err(|err| HarnessError::Invalid(err.to_string()))?;
    let seed = single("seeds", &e.seeds)?.unwrap_or(0);
    let platform = match single("mu", &e.mu)? {
        Some(mu) => platform.with_mu(mu)?,
        None => platform,
    };
    let alpha = single("alpha", &e.alpha)?;
    let nu = single("nu", &e.nu)?;
    if alpha.is_none() && nu.is_some() {
        return Err(HarnessError::Invalid("nu only applies to synthesized workloads; give alpha too".into()));
    }
    single("scale", &e.scale)?;
    let workloads = workload_set(&job, alpha, nu.unwrap_or(0.0), sim.num_workloads, seed)?;

    let mut trainer = match &a.resume {
        Some(p) => {
            let mut t = Trainer::from_checkpoint(Checkpoint::load(p)?);
            t.config.episodes = t.episodes_done + a.episodes;
            t
        }
        None => {
            let mut config = match &a.train_config {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(io_err(p))?;
                    toml::from_str::<TrainConfig>(&text)
                        .map_err(|err| HarnessError::Invalid(format!("{}: {}", p.display(), err.message())))?
                }
                None => TrainConfig::default(),
            };
            config.seed = seed;
            config.episodes = a.episodes;
            if let Some(m) = a.action_mode {
                config.action_mode = m;
            }
            if let Some(k) = a.a_max {
                config.a_max = k;
            }
            if a.no_eim {
                config.eim = false;
            } else if a.eim {
                config.eim = true;
            }
            let layout = Trainer::layout_for(&workloads, &platform, sim.capacity);
            Trainer::new(config, layout)?
        }
    };

    let mut logs: Vec<EpisodeLog> = Vec::new();
    let outcome = trainer.train(&workloads, &platform, &sim, |l| {
        if verbose() {
            eprintln!("episode {} reward {:.1} jobs {}", l.episode, l.total_reward, l.completed_jobs);
        }
        logs.push(l.clone());
    });
    let checkpoint = match &outcome {
        Err(TrainError::Diverged { last_good, .. }) => (**last_good).clone(),
        _ => trainer.checkpoint(),
    };
    checkpoint.save(&a.checkpoint)?;
    match &a.out {
        Some(p) => write_training_log(&logs, create(p)?)?,
        None => write_training_log(&logs, std::io::stdout().lock())?,
    }
    outcome?;
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<(), HarnessError> {
    let (platform, job) = platform_and_job(&a.resource, &a.job)?;
    let params = DagGenParams::new(a.v.unwrap_or(job.len()), a.alpha, a.nu);
    let rows = synthesize_to_dir(&params, &job, &platform, a.count, a.seed, &a.out)?;
    write_synth_csv(&rows, create(&a.out.join("summary.csv"))?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
