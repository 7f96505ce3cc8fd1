//! Experiment orchestration: scenarios, sweeps and CSV export.

mod experiment;
mod scenario;

pub use experiment::{
    load_job, load_platform, synthesize_to_dir, workload_set, write_metrics_csv, write_synth_csv, ExperimentSpec,
    HarnessError, MetricsRow, SweepPoint, SynthRow, METRICS_HEADER, SYNTH_HEADER,
};
pub use scenario::{synthesize_workloads, tiny_scenario, tiny_train_config, Scenario};
