use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{run_episode, EngineError, EpisodeResult, SimConfig};
use crate::metrics::{average_latency, avg_slr, avg_speedup};
use crate::neural::{Checkpoint, CheckpointError, NeuralScheduler, Selection, TrainError};
use crate::platform::{parse_resource_profile, Platform, PlatformError};
use crate::sched::{heuristic_by_name, Scheduler, HEURISTICS};
use crate::workload::{
    ccr, chain_ratio, edge_density, parse_job_profile_for, write_job_profile, DagGenParams, JobDag, ProfileError,
    StructureError, SynthError,
};

use super::scenario::synthesize_workloads;

/// First line of every metrics CSV.
pub const METRICS_HEADER: &str = "# socsched metrics v1";
/// First line of every synthesis summary CSV.
pub const SYNTH_HEADER: &str = "# socsched synth v1";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Profile { path: String, source: ProfileError },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("unknown scheduler `{0}`")]
    UnknownScheduler(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_platform(path: &Path) -> Result<Platform, HarnessError> {
    parse_resource_profile(&read(path)?).map_err(|source| HarnessError::Profile {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_job(path: &Path, platform: &Platform) -> Result<JobDag, HarnessError> {
    parse_job_profile_for(&read(path)?, platform).map_err(|source| HarnessError::Profile {
        path: path.display().to_string(),
        source,
    })
}

/// The jobs an episode draws from: `count` random jobs shaped by `alpha` and
/// `nu` with costs taken from `job`, or `job` itself when `alpha` is `None`.
pub fn workload_set(
    job: &JobDag,
    alpha: Option<f64>,
    nu: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Arc<JobDag>>, SynthError> {
    match alpha {
        None => Ok(vec![Arc::new(job.clone())]),
        Some(alpha) => {
            let params = DagGenParams::new(job.len(), alpha, nu);
            Ok(synthesize_workloads(&params, job.tasks(), count, seed)?
                .into_iter()
                .map(Arc::new)
                .collect())
        }
    }
}

/// A batch of episodes: every combination of the sweep axes, each run once
/// per seed.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    /// Workload itself, or the cost source when `alphas` is non-empty.
    pub job: JobDag,
    pub platform: Platform,
    pub sim: SimConfig,
    pub schedulers: Vec<String>,
    /// Empty runs `job` as is.
    pub alphas: Vec<f64>,
    /// Empty means 0. Only meaningful with `alphas`.
    pub nus: Vec<f64>,
    /// Empty keeps the platform's scale.
    pub mus: Vec<f64>,
    /// Empty keeps `sim.scale`.
    pub scales: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Parameters for the `neural` scheduler.
    pub checkpoint: Option<Checkpoint>,
}

/// One combination of sweep values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub alpha: Option<f64>,
    pub nu: Option<f64>,
    pub mu: f64,
    pub scale: f64,
    pub scheduler: String,
}

impl SweepPoint {
    /// `key=value` pairs joined by `;`, scheduler excluded.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(a) = self.alpha {
            parts.push(format!("alpha={a}"));
        }
        if let Some(n) = self.nu {
            parts.push(format!("nu={n}"));
        }
        parts.push(format!("mu={}", self.mu));
        parts.push(format!("scale={}", self.scale));
        parts.join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub sweep: String,
    pub seed: u64,
    pub scheduler: String,
    pub avg_latency: Option<f64>,
    pub avg_slr: Option<f64>,
    pub avg_speedup: Option<f64>,
    pub completed_jobs: usize,
    pub total_reward: f64,
}

impl MetricsRow {
    pub fn new(point: &SweepPoint, seed: u64, result: &EpisodeResult, platform: &Platform) -> Self {
        Self {
            sweep: point.label(),
            seed,
            scheduler: point.scheduler.clone(),
            avg_latency: average_latency(&result.completed_jobs),
            avg_slr: avg_slr(&result.completed_jobs, platform),
            avg_speedup: avg_speedup(&result.completed_jobs, platform),
            completed_jobs: result.completed_jobs.len(),
            total_reward: result.total_reward(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        for s in &self.schedulers {
            if s == "neural" {
                if self.checkpoint.is_none() {
                    return Err(HarnessError::Invalid("scheduler `neural` needs a checkpoint".into()));
                }
            } else if !HEURISTICS.contains(&s.as_str()) {
                return Err(HarnessError::UnknownScheduler(s.clone()));
            }
        }
        if self.schedulers.is_empty() || self.seeds.is_empty() {
            return Err(HarnessError::Invalid("need at least one scheduler and one seed".into()));
        }
        if self.alphas.is_empty() && !self.nus.is_empty() {
            return Err(HarnessError::Invalid("nu only applies to synthesized workloads; give alpha too".into()));
        }
        self.sim.validate().map_err(|e| HarnessError::Invalid(e.to_string()))
    }

    /// Sweep points with alpha varying slowest, then nu, mu, scale and
    /// scheduler.
    pub fn points(&self) -> Vec<SweepPoint> {
        let alphas: Vec<Option<f64>> = if self.alphas.is_empty() {
            vec![None]
        } else {
            self.alphas.iter().copied().map(Some).collect()
        };
        let nus: Vec<Option<f64>> = match (self.alphas.is_empty(), self.nus.is_empty()) {
            (true, _) => vec![None],
            (false, true) => vec![Some(0.0)],
            (false, false) => self.nus.iter().copied().map(Some).collect(),
        };
        let mus = if self.mus.is_empty() { vec![self.platform.mu()] } else { self.mus.clone() };
        let scales = if self.scales.is_empty() { vec![self.sim.scale] } else { self.scales.clone() };
        let mut out = Vec::new();
        for &alpha in &alphas {
            for &nu in &nus {
                for &mu in &mus {
                    for &scale in &scales {
                        for s in &self.schedulers {
                            out.push(SweepPoint {
                                alpha,
                                nu,
                                mu,
                                scale,
                                scheduler: s.clone(),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Runs one episode of `point` with `seed`.
    pub fn run_point(&self, point: &SweepPoint, seed: u64) -> Result<(MetricsRow, EpisodeResult), HarnessError> {
        let platform = self.platform.clone().with_mu(point.mu)?;
        let workloads = workload_set(&self.job, point.alpha, point.nu.unwrap_or(0.0), self.sim.num_workloads, seed)?;
        let sim = SimConfig {
            scale: point.scale,
            seed,
            ..self.sim.clone()
        };
        let result = match (point.scheduler.as_str(), &self.checkpoint) {
            ("neural", Some(c)) => {
                let mut s = NeuralScheduler::new(&c.model, c.layout, c.config.mode(), Selection::Greedy);
                run_episode(&workloads, &platform, &mut s, &sim)?
            }
            (name, _) => {
                let mut s: Box<dyn Scheduler + Send> =
                    heuristic_by_name(name, seed).ok_or_else(|| HarnessError::UnknownScheduler(name.to_string()))?;
                run_episode(&workloads, &platform, s.as_mut(), &sim)?
            }
        };
        Ok((MetricsRow::new(point, seed, &result, &platform), result))
    }

    /// Every sweep point under every seed, seeds varying fastest. `on_run`
    /// sees each row with its episode and the row's index.
    pub fn run(
        &self,
        mut on_run: impl FnMut(usize, &MetricsRow, &EpisodeResult) -> Result<(), HarnessError>,
    ) -> Result<Vec<MetricsRow>, HarnessError> {
        self.validate()?;
        let mut rows = Vec::new();
        for point in self.points() {
            for &seed in &self.seeds {
                let (row, result) = self.run_point(&point, seed)?;
                on_run(rows.len(), &row, &result)?;
                rows.push(row);
            }
        }
        Ok(rows)
    }
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], mut out: W) -> Result<(), HarnessError> {
    writeln!(out, "{METRICS_HEADER}").map_err(csv::Error::from)?;
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "sweep",
            "seed",
            "scheduler",
            "avg_latency",
            "avg_slr",
            "avg_speedup",
            "completed_jobs",
            "total_reward",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Structure of one synthesized job.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthRow {
    pub file: String,
    pub tasks: usize,
    pub edges: usize,
    pub levels: usize,
    pub edge_density: f64,
    pub chain_ratio: f64,
    pub ccr: f64,
}

/// Synthesizes `count` jobs with costs from `cost_source`, writes each as a
/// job profile into `dir` and returns their summary rows.
pub fn synthesize_to_dir(
    params: &DagGenParams,
    cost_source: &JobDag,
    platform: &Platform,
    count: usize,
    seed: u64,
    dir: &Path,
) -> Result<Vec<SynthRow>, HarnessError> {
    let io_err = |path: &PathBuf| {
        let path = path.display().to_string();
        move |source| HarnessError::Io { path, source }
    };
    let dir = dir.to_path_buf();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let jobs = synthesize_workloads(params, cost_source.tasks(), count, seed)?;
    let mut rows = Vec::with_capacity(count);
    for (k, dag) in jobs.iter().enumerate() {
        let file = format!("job_{k:04}.txt");
        let path = dir.join(&file);
        fs::write(&path, write_job_profile(dag)).map_err(io_err(&path))?;
        rows.push(SynthRow {
            file,
            tasks: dag.len(),
            edges: dag.edges().len(),
            levels: dag.depth(),
            edge_density: edge_density(dag)?,
            chain_ratio: chain_ratio(dag),
            ccr: ccr(dag, platform)?,
        });
    }
    Ok(rows)
}

pub fn write_synth_csv<W: Write>(rows: &[SynthRow], mut out: W) -> Result<(), HarnessError> {
    writeln!(out, "{SYNTH_HEADER}").map_err(csv::Error::from)?;
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["file", "tasks", "edges", "levels", "edge_density", "chain_ratio", "ccr"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{synthetic_job, synthetic_platform};

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            job: synthetic_job(),
            platform: synthetic_platform(),
            sim: SimConfig {
                sim_length: 300,
                num_workloads: 5,
                ..SimConfig::default()
            },
            schedulers: vec!["stf".into(), "met".into()],
            alphas: vec![0.5, 0.8],
            nus: vec![],
            mus: vec![],
            scales: vec![],
            seeds: vec![1, 2],
            checkpoint: None,
        }
    }

    #[test]
    fn points_follow_axis_order() {
        let pts = spec().points();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].label(), "alpha=0.5;nu=0;mu=1;scale=25");
        assert_eq!((pts[1].alpha, pts[1].scheduler.as_str()), (Some(0.5), "met"));
        assert_eq!(pts[2].alpha, Some(0.8));
    }

    #[test]
    fn rows_per_point_and_seed() {
        let rows = spec().run(|_, _, _| Ok(())).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!((rows[0].seed, rows[1].seed), (1, 2));
        assert!(rows.iter().all(|r| r.completed_jobs > 0));
    }

    #[test]
    fn rejects_unknown_scheduler_and_orphan_nu() {
        let mut s = spec();
        s.schedulers.push("fifo".into());
        assert!(matches!(s.validate(), Err(HarnessError::UnknownScheduler(_))));
        let mut s = spec();
        s.alphas.clear();
        s.nus.push(1.0);
        assert!(s.validate().is_err());
        let mut s = spec();
        s.schedulers = vec!["neural".into()];
        assert!(s.validate().is_err());
    }

    #[test]
    fn metrics_csv_starts_with_version_line() {
        let mut buf = Vec::new();
        write_metrics_csv(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# socsched metrics v1\nsweep,seed,scheduler,avg_latency,avg_slr,avg_speedup,completed_jobs,total_reward\n"
        );
    }
}
