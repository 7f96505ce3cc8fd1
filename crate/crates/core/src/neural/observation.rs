//! Fixed-size state encoding.
//!
//! For each job slot (jobs in injection order, up to `capacity`) and each task
//! slot (task index, up to `v_max`) six values:
//!
//! | offset | feature |
//! |---|---|
//! | 0 | assigned PE id, `-1` if unassigned |
//! | 1..4 | one-hot status: ready, running, outstanding (all zero once completed) |
//! | 4 | task waiting time / [`TIME_NORM`]: clocks between becoming ready and starting (or now) |
//! | 5 | parents not yet completed |
//!
//! then two values per job slot (remaining dependency depth, job waiting time
//! / [`TIME_NORM`]) and one global value, the number of tasks still waiting
//! on parents. Absent jobs and tasks are zero.

use serde::{Deserialize, Serialize};

use crate::engine::{ActiveJob, TaskRef, TaskStatus};
use crate::sched::SchedulerView;

/// Divisor applied to clock-valued features.
pub const TIME_NORM: f64 = 100.0;
/// Values per task.
pub const TASK_FEATURES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObsLayout {
    pub capacity: usize,
    pub v_max: usize,
    /// Number of PEs.
    pub num_pes: usize,
}

impl ObsLayout {
    pub fn state_dim(&self) -> usize {
        self.capacity * self.v_max * TASK_FEATURES + self.capacity * 2 + 1
    }

    /// Values per task slot of a query.
    pub fn slot_dim(&self) -> usize {
        TASK_FEATURES + self.num_pes
    }

    /// Per-task query: state, the task's feature block and its PE mask.
    pub fn query_dim(&self) -> usize {
        self.state_dim() + self.slot_dim()
    }

    /// Group query with `a_max` task slots.
    pub fn group_dim(&self, a_max: usize) -> usize {
        self.state_dim() + a_max * self.slot_dim()
    }

    /// Query values for task `t`: its feature block and its PE mask.
    pub fn slot(&self, view: &SchedulerView<'_>, t: TaskRef) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.slot_dim());
        out.extend(task_block(view.job(t.job), t.task, view.clk));
        out.extend(self.mask(view, t).iter().map(|&m| f64::from(u8::from(m))));
        out
    }

    pub fn check(&self, view: &SchedulerView<'_>) -> Result<(), String> {
        if view.jobs.len() > self.capacity {
            return Err(format!("{} jobs in the system, observation holds {}", view.jobs.len(), self.capacity));
        }
        if let Some(j) = view.jobs.iter().find(|j| j.tasks.len() > self.v_max) {
            return Err(format!("job with {} tasks, observation holds {}", j.tasks.len(), self.v_max));
        }
        if view.platform.len() != self.num_pes {
            return Err(format!("{} PEs, observation expects {}", view.platform.len(), self.num_pes));
        }
        Ok(())
    }

    /// Encodes the system state. Call [`ObsLayout::check`] first.
    pub fn observe(&self, view: &SchedulerView<'_>) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim()];
        let clk = view.clk;
        let job_base = self.capacity * self.v_max * TASK_FEATURES;
        let mut waiting = 0usize;
        for (slot, job) in view.jobs.iter().enumerate() {
            for i in 0..job.tasks.len() {
                let at = (slot * self.v_max + i) * TASK_FEATURES;
                out[at..at + TASK_FEATURES].copy_from_slice(&task_block(job, i, clk));
                waiting += usize::from(job.tasks[i].status == TaskStatus::Outstanding);
            }
            out[job_base + slot * 2] = remaining_depth(job) as f64;
            out[job_base + slot * 2 + 1] = (clk - job.injected_at) as f64 / TIME_NORM;
        }
        out[job_base + self.capacity * 2] = waiting as f64;
        out
    }

    /// Which PEs can run `t`.
    pub fn mask(&self, view: &SchedulerView<'_>, t: TaskRef) -> Vec<bool> {
        let tmpl = view.template(t);
        (0..self.num_pes).map(|p| tmpl.supports(p)).collect()
    }
}

/// The six features of task `i` of `job` at clock `clk`.
pub fn task_block(job: &ActiveJob, i: usize, clk: u64) -> [f64; TASK_FEATURES] {
    let t = &job.tasks[i];
    let pe = t.assigned_pe.map_or(-1.0, |p| p as f64);
    let (ready, running, outstanding) = match t.status {
        TaskStatus::Ready => (1.0, 0.0, 0.0),
        TaskStatus::Running => (0.0, 1.0, 0.0),
        TaskStatus::Outstanding => (0.0, 0.0, 1.0),
        TaskStatus::Completed => (0.0, 0.0, 0.0),
    };
    let wait = match (t.ready_clk, t.start_clk) {
        (Some(r), Some(s)) => s - r,
        (Some(r), None) => clk - r,
        _ => 0,
    };
    [pe, ready, running, outstanding, wait as f64 / TIME_NORM, t.remaining_preds as f64]
}

/// Tasks on the longest chain of not-yet-completed tasks.
pub fn remaining_depth(job: &ActiveJob) -> usize {
    let dag = &job.dag;
    let mut depth = vec![0usize; dag.len()];
    for &n in &dag.topo_order().expect("job DAGs are acyclic") {
        if job.tasks[n].status == TaskStatus::Completed {
            continue;
        }
        depth[n] = 1 + dag.preds(n).iter().map(|&(p, _)| depth[p]).max().unwrap_or(0);
    }
    depth.into_iter().max().unwrap_or(0)
}
