//! Structural statistics of job DAGs.

use thiserror::Error;

use super::dag::JobDag;
use crate::platform::Platform;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructureError {
    #[error("edge density needs at least 2 tasks (got {0})")]
    TooSmall(usize),
    #[error("platform has no inter-PE bandwidth entries")]
    NoBandwidth,
    #[error("task {0} has no supporting PE")]
    Unsupported(u32),
}

/// `2E / (V (V - 1))`.
pub fn edge_density(dag: &JobDag) -> Result<f64, StructureError> {
    let v = dag.len();
    if v < 2 {
        return Err(StructureError::TooSmall(v));
    }
    Ok(2.0 * dag.edges().len() as f64 / (v * (v - 1)) as f64)
}

/// Fraction of tasks with exactly one parent and exactly one child.
pub fn chain_ratio(dag: &JobDag) -> f64 {
    if dag.is_empty() {
        return 0.0;
    }
    let chained = (0..dag.len())
        .filter(|&i| dag.preds(i).len() == 1 && dag.succs(i).len() == 1)
        .count();
    chained as f64 / dag.len() as f64
}

/// Communication-to-computation ratio.
///
/// Communication is the mean edge weight divided by the mean inter-PE
/// bandwidth; computation is the mean over tasks of each task's mean cost over
/// its supporting PEs. A DAG without edges has ratio 0.
pub fn ccr(dag: &JobDag, platform: &Platform) -> Result<f64, StructureError> {
    let bw = platform.mean_bandwidth().ok_or(StructureError::NoBandwidth)?;
    let mut comp = 0.0;
    for t in dag.tasks() {
        comp += t.mean_cost().ok_or(StructureError::Unsupported(t.task_id))?;
    }
    let comp = comp / dag.len() as f64;
    if dag.edges().is_empty() {
        return Ok(0.0);
    }
    let comm = dag.edges().iter().map(|e| e.weight).sum::<f64>() / dag.edges().len() as f64 / bw;
    Ok(comm / comp)
}

/// Mean in-degree, which equals mean out-degree: `E / V`.
pub fn mean_degree(dag: &JobDag) -> f64 {
    if dag.is_empty() {
        0.0
    } else {
        dag.edges().len() as f64 / dag.len() as f64
    }
}
