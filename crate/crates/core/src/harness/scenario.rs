use std::sync::Arc;

use crate::engine::{RewardKind, SimConfig};
use crate::neural::TrainConfig;
use crate::platform::Platform;
use crate::profiles::{synthetic_job, synthetic_platform};
use crate::seeding;
use crate::workload::{synthesize_dag, DagGenParams, JobDag, SynthError, TaskTemplate};

/// `count` random jobs drawn from one workload stream of `seed`. Job `k` gets
/// job id `k`.
pub fn synthesize_workloads(
    params: &DagGenParams,
    cost_source: &[TaskTemplate],
    count: usize,
    seed: u64,
) -> Result<Vec<JobDag>, SynthError> {
    let mut rng = seeding::stream(seed, seeding::WORKLOADS);
    (0..count)
        .map(|k| synthesize_dag(params, cost_source, &mut rng).map(|s| s.dag.with_job_id(k as u32)))
        .collect()
}

/// A workload set, the platform it runs on and the episode settings.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub workloads: Vec<Arc<JobDag>>,
    pub platform: Platform,
    pub sim: SimConfig,
}

/// Small training setup: 200 ten-task jobs synthesized from the bundled
/// profile (`alpha` 0.8, unit edge weights), PE speed scale 0.5, two jobs in
/// the system, 2000-clock episodes with the dense reward.
pub fn tiny_scenario(seed: u64) -> Scenario {
    let platform = synthetic_platform().with_mu(0.5).expect("positive mu");
    let source = synthetic_job();
    let params = DagGenParams::new(10, 0.8, 0.0);
    let workloads = synthesize_workloads(&params, source.tasks(), 200, seed)
        .expect("valid parameters")
        .into_iter()
        .map(Arc::new)
        .collect();
    let sim = SimConfig {
        scale: 25.0,
        sim_length: 2000,
        capacity: 2,
        num_workloads: 200,
        quasi_steady: true,
        seed,
        reward_kind: RewardKind::Dense,
        ..SimConfig::default()
    };
    Scenario {
        workloads,
        platform,
        sim,
    }
}

/// Training settings for [`tiny_scenario`].
pub fn tiny_train_config(seed: u64, episodes: u64, eim: bool) -> TrainConfig {
    TrainConfig {
        episodes,
        eim,
        seed,
        ..TrainConfig::default()
    }
}
