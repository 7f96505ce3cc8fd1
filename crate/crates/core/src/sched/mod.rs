//! Scheduling policies and the interface the engine drives them through.

mod heft;
mod heuristic;

use thiserror::Error;

pub use heft::{eft, insertion_slot, rank_u, HeftRt};
pub use heuristic::{Met, RandomPolicy, Stf};

use crate::engine::{ActiveJob, TaskRef};
use crate::platform::{Platform, PlatformError};
use crate::workload::{PeId, TaskTemplate};

/// Busy interval on a PE timeline, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

/// State of one PE at a scheduling call.
#[derive(Debug, Clone, PartialEq)]
pub struct PeView {
    /// A task is executing.
    pub busy: bool,
    /// Tasks assigned but not yet started.
    pub queued: usize,
    /// Earliest time the PE is free of committed work (never before `clk`).
    pub avail: f64,
    /// Running task followed by the projected queue, sorted and disjoint.
    pub timeline: Vec<Interval>,
}

impl PeView {
    pub fn has_work(&self) -> bool {
        self.busy || self.queued > 0
    }
}

/// Read-only snapshot handed to a scheduler.
#[derive(Debug, Clone, Copy)]
pub struct SchedulerView<'a> {
    pub clk: u64,
    pub platform: &'a Platform,
    /// Jobs in the system, ordered by instance (injection order).
    pub jobs: &'a [ActiveJob],
    /// Ready, unassigned tasks in the order they became ready.
    pub ready: &'a [TaskRef],
    pub pes: &'a [PeView],
}

impl<'a> SchedulerView<'a> {
    pub fn job(&self, instance: u64) -> &'a ActiveJob {
        let pos = self
            .jobs
            .binary_search_by_key(&instance, |j| j.instance)
            .expect("ready task belongs to a job in the system");
        &self.jobs[pos]
    }

    pub fn template(&self, t: TaskRef) -> &'a TaskTemplate {
        self.job(t.job).dag.task(t.task)
    }

    /// PEs of this platform that can run `t`, ascending.
    pub fn supported(&self, t: TaskRef) -> Vec<PeId> {
        let n = self.platform.len();
        self.template(t).supported_pes().filter(|&p| p < n).collect()
    }

    /// `(parent_pe, parent_completion_clk, edge_weight)` for every parent.
    pub fn parents(&self, t: TaskRef) -> impl Iterator<Item = (PeId, f64, f64)> + 'a {
        let job = self.job(t.job);
        job.dag.preds(t.task).iter().map(move |&(p, w)| {
            let rt = &job.tasks[p];
            (
                rt.assigned_pe.expect("parents of a ready task have run"),
                rt.completion_clk.expect("parents of a ready task have completed") as f64,
                w,
            )
        })
    }

    /// Execution time of `t` on `pe` given where its parents ran.
    pub fn exec_time(&self, t: TaskRef, pe: PeId) -> Result<f64, PlatformError> {
        let parents = self.parents(t).map(|(p, _, w)| (p, w));
        self.platform.exec_time(self.template(t), pe, parents)
    }

    /// Earliest time all of `t`'s input data can be on `pe`.
    pub fn data_ready(&self, t: TaskRef, pe: PeId) -> Result<f64, PlatformError> {
        let mut at = self.clk as f64;
        for (ppe, aft, w) in self.parents(t) {
            at = at.max(aft + self.platform.transfer_time(ppe, pe, w)?);
        }
        Ok(at)
    }
}

/// One scheduling decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub task: TaskRef,
    pub pe: PeId,
    /// Orders the PE queue when set (insertion slots); otherwise the task
    /// queues behind work assigned earlier.
    pub planned_start: Option<f64>,
}

impl Assignment {
    pub fn new(task: TaskRef, pe: PeId) -> Self {
        Self {
            task,
            pe,
            planned_start: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("task {0:?} has no supporting PE")]
    NoSupportingPe(TaskRef),
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error("policy fault: {0}")]
    Policy(String),
}

pub trait Scheduler {
    fn name(&self) -> &str;

    /// Called once per job, before any of its tasks become ready.
    fn job_injected(&mut self, _job: &ActiveJob, _platform: &Platform) {}

    fn job_completed(&mut self, _instance: u64) {}

    /// Maps some or all ready tasks to PEs. Tasks left out stay ready.
    fn schedule(&mut self, view: &SchedulerView<'_>) -> Result<Vec<Assignment>, ScheduleError>;
}

/// Names accepted by [`heuristic_by_name`].
pub const HEURISTICS: [&str; 5] = ["random", "stf", "met", "heft_rt", "heft_rt_noinsert"];

/// Builds a non-neural scheduler. `seed` feeds the random policy.
pub fn heuristic_by_name(name: &str, seed: u64) -> Option<Box<dyn Scheduler + Send>> {
    Some(match name {
        "random" => Box::new(RandomPolicy::new(seed)),
        "stf" => Box::new(Stf),
        "met" => Box::new(Met),
        "heft_rt" => Box::new(HeftRt::new(true)),
        "heft_rt_noinsert" => Box::new(HeftRt::new(false)),
        _ => return None,
    })
}

/// Supporting PE with the smallest execution time, lowest id on ties.
pub(crate) fn fastest_pe(view: &SchedulerView<'_>, t: TaskRef) -> Result<(PeId, f64), ScheduleError> {
    let mut best: Option<(PeId, f64)> = None;
    for pe in view.supported(t) {
        let e = view.exec_time(t, pe)?;
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((pe, e));
        }
    }
    best.ok_or(ScheduleError::NoSupportingPe(t))
}
