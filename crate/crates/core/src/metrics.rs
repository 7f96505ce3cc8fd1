//! Run-time metrics over completed jobs.
//!
//! Every average returns `None` for an empty input rather than a sentinel.

use crate::engine::JobRecord;
use crate::platform::Platform;
use crate::workload::JobDag;

/// Mean over jobs of the summed task execution times.
pub fn average_latency(records: &[JobRecord]) -> Option<f64> {
    mean(records.iter().map(JobRecord::total_exec_time))
}

/// Cheapest supported cost of task `i` on `platform`, unscaled.
fn min_cost(dag: &JobDag, i: usize, platform: &Platform) -> f64 {
    let t = dag.task(i);
    t.supported_pes()
        .filter(|&p| p < platform.len())
        .filter_map(|p| t.cost(p))
        .fold(f64::INFINITY, f64::min)
}

/// Length of the longest HEAD-to-TAIL path when every task costs its
/// cheapest PE time (scaled by the platform's `mu`) and edges cost nothing.
/// No schedule can finish the job faster.
pub fn critical_path_min(dag: &JobDag, platform: &Platform) -> f64 {
    let mut longest = vec![0.0f64; dag.len()];
    for &n in &dag.topo_order().expect("job DAGs are acyclic") {
        let before = dag.preds(n).iter().map(|&(p, _)| longest[p]).fold(0.0, f64::max);
        longest[n] = before + platform.mu() * min_cost(dag, n, platform);
    }
    longest.into_iter().fold(0.0, f64::max)
}

/// Schedule length ratio: makespan over [`critical_path_min`].
pub fn slr(record: &JobRecord, platform: &Platform) -> f64 {
    record.makespan() / critical_path_min(&record.dag, platform)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speedup {
    pub value: f64,
    /// No single PE supports every task; the sequential time is the sum of
    /// per-task cheapest costs instead.
    pub partial_support: bool,
}

/// Sequential execution time of the job on its best single PE, scaled by
/// `mu`. Falls back to summed per-task minima when no PE runs every task.
pub fn sequential_time(dag: &JobDag, platform: &Platform) -> (f64, bool) {
    let full = (0..platform.len())
        .filter_map(|p| dag.tasks().iter().map(|t| t.cost(p)).sum::<Option<f64>>())
        .fold(None, |best: Option<f64>, c| Some(best.map_or(c, |b| b.min(c))));
    match full {
        Some(c) => (platform.mu() * c, false),
        None => {
            let c: f64 = (0..dag.len()).map(|i| min_cost(dag, i, platform)).sum();
            (platform.mu() * c, true)
        }
    }
}

pub fn speedup(record: &JobRecord, platform: &Platform) -> Speedup {
    let (seq, partial_support) = sequential_time(&record.dag, platform);
    Speedup {
        value: seq / record.makespan(),
        partial_support,
    }
}

pub fn avg_slr(records: &[JobRecord], platform: &Platform) -> Option<f64> {
    mean(records.iter().map(|r| slr(r, platform)))
}

pub fn avg_speedup(records: &[JobRecord], platform: &Platform) -> Option<f64> {
    mean(records.iter().map(|r| speedup(r, platform).value))
}

/// `1 - Var[G - Ĝ] / Var[G]`; `None` for mismatched lengths, fewer than two
/// samples, or constant `G`.
pub fn explained_variance(returns: &[f64], predicted: &[f64]) -> Option<f64> {
    if returns.len() != predicted.len() || returns.len() < 2 {
        return None;
    }
    let var_g = variance(returns.iter().copied());
    if var_g == 0.0 {
        return None;
    }
    let var_r = variance(returns.iter().zip(predicted).map(|(g, p)| g - p));
    Some(1.0 - var_r / var_g)
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let Some(m) = mean(xs.clone()) else {
        return 0.0;
    };
    let (ss, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + (x - m) * (x - m), n + 1));
    ss / n as f64
}
