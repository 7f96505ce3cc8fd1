//! Actor-critic scheduler trained on per-action returns.
//!
//! Each scheduled task is credited with the rewards emitted while it was in
//! flight, from the clock it was scheduled until the clock it completed
//! ([`eim_returns`]). The ablation credits each interaction only with the
//! rewards up to the next interaction ([`standard_returns`]).

mod checkpoint;
mod model;
mod observation;
mod policy;
mod returns;
mod scheduler;
mod train;

use serde::{Deserialize, Serialize};

pub use checkpoint::{Checkpoint, CheckpointError, CHECKPOINT_VERSION};
pub use model::{clip_grad_norm, Adam, Forward, Mlp, Shape};
pub use observation::{remaining_depth, task_block, ObsLayout, TASK_FEATURES, TIME_NORM};
pub use policy::{entropy, greedy_index, masked_softmax, sample_index, sample_loss, Pick, SampleLoss};
pub use returns::{discounted_window, eim_returns, standard_returns, ActionWindow, ReturnError};
pub use scheduler::{NeuralScheduler, Sample, Selection};
pub use train::{write_training_log, EpisodeLog, TrainError, Trainer};

/// How ready tasks are turned into network queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    /// One query, and one distribution, per ready task.
    Independent,
    /// Up to `a_max` ready tasks per query; unused slots are zero.
    Group { a_max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Independent,
    Group,
}

impl std::str::FromStr for ModeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent" => Ok(Self::Independent),
            "group" => Ok(Self::Group),
            other => Err(format!("unknown action mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub entropy_coef: f64,
    pub grad_clip: f64,
    pub episodes: u64,
    pub action_mode: ModeKind,
    /// Task slots per query in group mode.
    pub a_max: usize,
    /// Per-action returns; `false` selects the per-interaction ablation.
    pub eim: bool,
    /// Standardize each episode's returns to zero mean and unit variance
    /// before the update.
    pub normalize_returns: bool,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.98,
            learning_rate: 3e-4,
            entropy_coef: 0.01,
            grad_clip: 1.0,
            episodes: 100,
            action_mode: ModeKind::Independent,
            a_max: 8,
            eim: true,
            normalize_returns: true,
            hidden: 128,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn mode(&self) -> ActionMode {
        match self.action_mode {
            ModeKind::Independent => ActionMode::Independent,
            ModeKind::Group => ActionMode::Group { a_max: self.a_max },
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(format!("gamma must be in [0, 1], got {}", self.gamma));
        }
        if !(self.grad_clip > 0.0) {
            return Err(format!("grad_clip must be positive, got {}", self.grad_clip));
        }
        if !(self.learning_rate >= 0.0 && self.entropy_coef.is_finite()) {
            return Err("learning_rate must be non-negative and entropy_coef finite".into());
        }
        if self.a_max == 0 || self.hidden == 0 {
            return Err("a_max and hidden must be positive".into());
        }
        Ok(())
    }

    /// Network shape for `layout` under this action mode.
    pub fn shape(&self, layout: &ObsLayout) -> Shape {
        let (input, output) = match self.mode() {
            ActionMode::Independent => (layout.query_dim(), layout.num_pes),
            ActionMode::Group { a_max } => (layout.group_dim(a_max), a_max * layout.num_pes),
        };
        Shape {
            input,
            hidden: self.hidden,
            output,
        }
    }
}
