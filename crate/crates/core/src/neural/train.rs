use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::checkpoint::{config_hash, Checkpoint, CHECKPOINT_VERSION};
use super::model::{clip_grad_norm, Adam, Mlp};
use super::observation::ObsLayout;
use super::policy::{sample_loss, SampleLoss};
use super::returns::{discounted_window, standard_returns};
use super::scheduler::{NeuralScheduler, Sample, Selection};
use super::TrainConfig;
use crate::engine::{run_episode, EngineError, EpisodeResult, SimConfig};
use crate::metrics::{average_latency, explained_variance};
use crate::platform::Platform;
use crate::seeding;
use crate::workload::JobDag;

/// One row of the training log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeLog {
    pub episode: u64,
    pub total_reward: f64,
    /// Mean return before any standardization.
    pub mean_return: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub entropy: f64,
    /// Critic fit against the update targets.
    pub explained_variance: Option<f64>,
    pub avg_latency: Option<f64>,
    pub completed_jobs: usize,
    /// Samples that entered the update.
    pub samples: usize,
    pub grad_norm: f64,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("training diverged at episode {episode}: {reason}")]
    Diverged {
        episode: u64,
        reason: String,
        /// State before the failed update.
        last_good: Box<Checkpoint>,
    },
}

pub struct Trainer {
    pub config: TrainConfig,
    pub layout: ObsLayout,
    pub model: Mlp,
    pub optimizer: Adam,
    pub episodes_done: u64,
}

impl Trainer {
    pub fn new(config: TrainConfig, layout: ObsLayout) -> Result<Self, TrainError> {
        config.validate().map_err(TrainError::Config)?;
        let shape = config.shape(&layout);
        let model = Mlp::init(shape, &mut seeding::stream(config.seed, seeding::INIT));
        let optimizer = Adam::new(shape.num_params(), config.learning_rate);
        Ok(Self {
            config,
            layout,
            model,
            optimizer,
            episodes_done: 0,
        })
    }

    /// Layout sized for `workloads` on `platform` with room for `capacity`
    /// jobs.
    pub fn layout_for(workloads: &[Arc<JobDag>], platform: &Platform, capacity: usize) -> ObsLayout {
        ObsLayout {
            capacity,
            v_max: workloads.iter().map(|d| d.len()).max().unwrap_or(0),
            num_pes: platform.len(),
        }
    }

    pub fn from_checkpoint(c: Checkpoint) -> Self {
        Self {
            config: c.config,
            layout: c.layout,
            model: c.model,
            optimizer: c.optimizer,
            episodes_done: c.episodes_done,
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config_hash: config_hash(&self.config, &self.layout),
            config: self.config.clone(),
            layout: self.layout,
            model: self.model.clone(),
            optimizer: self.optimizer.clone(),
            episodes_done: self.episodes_done,
        }
    }

    /// Greedy evaluation episode with the current parameters.
    pub fn evaluate(
        &self,
        workloads: &[Arc<JobDag>],
        platform: &Platform,
        sim: &SimConfig,
    ) -> Result<EpisodeResult, EngineError> {
        let mut s = NeuralScheduler::new(&self.model, self.layout, self.config.mode(), Selection::Greedy);
        run_episode(workloads, platform, &mut s, sim)
    }

    /// Trains until `episodes_done` reaches the configured episode count,
    /// calling `on_episode` after every update.
    pub fn train(
        &mut self,
        workloads: &[Arc<JobDag>],
        platform: &Platform,
        sim: &SimConfig,
        mut on_episode: impl FnMut(&EpisodeLog),
    ) -> Result<Vec<EpisodeLog>, TrainError> {
        let mut logs = Vec::new();
        while self.episodes_done < self.config.episodes {
            let log = self.episode(workloads, platform, sim)?;
            on_episode(&log);
            logs.push(log);
        }
        Ok(logs)
    }

    /// One rollout and one optimizer step. The episode's engine and sampling
    /// seeds derive from the training seed and the episode index.
    pub fn episode(
        &mut self,
        workloads: &[Arc<JobDag>],
        platform: &Platform,
        sim: &SimConfig,
    ) -> Result<EpisodeLog, TrainError> {
        let ep = self.episodes_done;
        let ep_seed = seeding::child_seed(self.config.seed, ep);
        let sim = SimConfig {
            seed: ep_seed,
            ..sim.clone()
        };
        let rng = seeding::stream(ep_seed, seeding::SCHEDULER);
        let mut sched = NeuralScheduler::new(&self.model, self.layout, self.config.mode(), Selection::Sample(rng));
        let result = run_episode(workloads, platform, &mut sched, &sim)?;
        let samples = sched.into_samples();

        let batch = self.returns(&samples, &result);
        let n = batch.len();
        let raw_mean = batch.iter().map(|b| b.1).sum::<f64>() / n.max(1) as f64;
        let targets = if self.config.normalize_returns {
            standardize(batch.iter().map(|b| b.1))
        } else {
            batch.iter().map(|b| b.1).collect()
        };
        let mut grad = vec![0.0; self.model.params.len()];
        let mut sum = SampleLoss::default();
        let (mut rets, mut vals) = (Vec::with_capacity(n), Vec::with_capacity(n));
        let xi = self.config.entropy_coef;
        for ((s, _), &g) in batch.iter().zip(&targets) {
            let l = sample_loss(&self.model, &s.input, &s.picks, g, None, xi, Some((&mut grad, 1.0 / n as f64)));
            sum.actor += l.actor;
            sum.critic += l.critic;
            sum.entropy += l.entropy;
            sum.total += l.total;
            rets.push(g);
            vals.push(l.value);
        }

        let diverged = |reason: &str, this: &Self| TrainError::Diverged {
            episode: ep,
            reason: reason.to_string(),
            last_good: Box::new(this.checkpoint()),
        };
        if !sum.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(diverged("non-finite loss or gradient", self));
        }
        let grad_norm = if n > 0 {
            let norm = clip_grad_norm(&mut grad, self.config.grad_clip);
            let before = (self.model.params.clone(), self.optimizer.clone());
            self.optimizer.step(&mut self.model.params, &grad);
            if !self.model.is_finite() {
                (self.model.params, self.optimizer) = before;
                return Err(diverged("non-finite parameters after update", self));
            }
            norm
        } else {
            0.0
        };
        self.episodes_done += 1;

        let k = n.max(1) as f64;
        Ok(EpisodeLog {
            episode: ep,
            total_reward: result.total_reward(),
            mean_return: raw_mean,
            actor_loss: sum.actor / k,
            critic_loss: sum.critic / k,
            entropy: sum.entropy / k,
            explained_variance: explained_variance(&rets, &vals),
            avg_latency: average_latency(&result.completed_jobs),
            completed_jobs: result.completed_jobs.len(),
            samples: n,
            grad_norm,
        })
    }

    /// Pairs each sample with its return. Under per-action returns a sample
    /// covers the longest window among its tasks and is dropped if any of
    /// them was still running at the end of the episode.
    fn returns<'s>(&self, samples: &'s [Sample], result: &EpisodeResult) -> Vec<(&'s Sample, f64)> {
        let gamma = self.config.gamma;
        let rewards = &result.reward_stream;
        if self.config.eim {
            let done = result.completion_clocks();
            samples
                .iter()
                .filter_map(|s| {
                    let ends: Option<Vec<u64>> = s.tasks.iter().map(|t| done.get(t).copied()).collect();
                    let end = ends?.into_iter().max()?;
                    Some((s, discounted_window(rewards, s.clk, end, gamma)))
                })
                .collect()
        } else {
            let steps: Vec<u64> = samples
                .iter()
                .map(|s| s.clk)
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let by_step: BTreeMap<u64, f64> = steps.iter().copied().zip(standard_returns(&steps, rewards, gamma)).collect();
            samples.iter().map(|s| (s, by_step[&s.clk])).collect()
        }
    }
}

/// `(x - mean) / std` with the population standard deviation; a constant
/// input maps to zeros.
fn standardize(xs: impl Iterator<Item = f64> + Clone) -> Vec<f64> {
    let n = xs.clone().count().max(1) as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let sd = (xs.clone().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
    xs.map(|x| if sd > 0.0 { (x - mean) / sd } else { 0.0 }).collect()
}

/// Writes the training log as CSV.
pub fn write_training_log<W: Write>(logs: &[EpisodeLog], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for l in logs {
        w.serialize(l)?;
    }
    w.flush()?;
    Ok(())
}
