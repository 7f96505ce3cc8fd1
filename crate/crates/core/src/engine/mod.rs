//! Clocked discrete-event kernel.
//!
//! The clock advances in unit ticks. At every tick boundary `clk`:
//!
//! 1. tasks whose finish tick is `clk` complete (`ω = clk`), jobs whose last
//!    task completed leave the system, and the reward `R(clk)` is appended;
//! 2. a new job is injected if one is due and the system holds fewer than
//!    `capacity` jobs;
//! 3. tasks whose parents have all completed move to the ready queue;
//! 4. the scheduler maps ready tasks to PEs (each PE keeps its own queue);
//! 5. idle PEs start their next queued task, which runs non-preemptively for
//!    its execution time and finishes at the first tick at or after
//!    `start + duration`.
//!
//! Steps 2-5 do not run at the final boundary `clk = sim_length`.

mod config;
mod reward;
mod trace;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

pub use config::{ConfigError, SimConfig};
pub use reward::{reward, RewardKind};
pub use trace::{write_trace_csv, TraceEvent, TraceKind};

use crate::platform::{Platform, PlatformError};
use crate::sched::{Assignment, Interval, PeView, ScheduleError, Scheduler, SchedulerView};
use crate::seeding;
use crate::workload::{JobDag, PeId};

/// A task instance: `(job instance, task index within the job's DAG)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskRef {
    pub job: u64,
    pub task: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskStatus {
    Outstanding,
    Ready,
    Running,
    Completed,
}

/// Run-time state of one task instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRuntime {
    pub status: TaskStatus,
    pub assigned_pe: Option<PeId>,
    pub remaining_preds: usize,
    pub ready_clk: Option<u64>,
    pub assign_clk: Option<u64>,
    pub start_clk: Option<u64>,
    pub completion_clk: Option<u64>,
    /// Execution time (computation plus transfer delay); set at start.
    pub duration: f64,
}

/// A job currently in the system.
#[derive(Debug, Clone)]
pub struct ActiveJob {
    pub instance: u64,
    pub workload: usize,
    pub dag: Arc<JobDag>,
    pub injected_at: u64,
    pub tasks: Vec<TaskRuntime>,
    pub completed: usize,
}

impl ActiveJob {
    /// A freshly injected job: tasks outstanding, nothing assigned.
    pub fn new(instance: u64, workload: usize, dag: Arc<JobDag>, injected_at: u64) -> Self {
        let tasks = (0..dag.len())
            .map(|i| TaskRuntime {
                status: TaskStatus::Outstanding,
                assigned_pe: None,
                remaining_preds: dag.preds(i).len(),
                ready_clk: None,
                assign_clk: None,
                start_clk: None,
                completion_clk: None,
                duration: 0.0,
            })
            .collect();
        Self {
            instance,
            workload,
            dag,
            injected_at,
            tasks,
            completed: 0,
        }
    }
}

/// Per-task outcome of a completed job.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub pe: PeId,
    pub ready_clk: u64,
    pub start_clk: u64,
    pub completion_clk: u64,
    pub duration: f64,
}

/// A completed job.
#[derive(Debug, Clone)]
pub struct JobRecord {
    pub instance: u64,
    pub workload: usize,
    pub dag: Arc<JobDag>,
    pub injected_at: u64,
    pub completed_at: u64,
    /// Indexed like `dag.tasks()`.
    pub tasks: Vec<TaskRecord>,
}

impl JobRecord {
    pub fn makespan(&self) -> f64 {
        (self.completed_at - self.injected_at) as f64
    }

    /// Sum of task execution times.
    pub fn total_exec_time(&self) -> f64 {
        self.tasks.iter().map(|t| t.duration).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PeUsage {
    /// Tasks started on the PE.
    pub count: u64,
    /// Ticks spent executing.
    pub active_time: u64,
    /// Ticks spent executing while at least one other assigned task waited.
    pub blocking_time: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Snapshot {
    pub jobs: usize,
    pub ready: usize,
    pub running: usize,
}

/// One scheduled task inside an interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedAction {
    pub task: TaskRef,
    pub pe: PeId,
    /// Clock of the interaction (the action's start flag).
    pub start_clk: u64,
    /// Completion clock `ω`; `None` when the task had not finished at the end
    /// of the episode.
    pub completion: Option<u64>,
    pub truncated: bool,
}

/// One scheduler invocation that produced at least one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub clk: u64,
    pub snapshot: Snapshot,
    pub actions: Vec<LoggedAction>,
}

/// Task counts at the end of an episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Census {
    pub injected: usize,
    pub completed: usize,
    pub running: usize,
    pub ready: usize,
    pub outstanding: usize,
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub completed_jobs: Vec<JobRecord>,
    /// `reward_stream[k]` is `R(k + 1)`.
    pub reward_stream: Vec<f64>,
    pub interaction_log: Vec<Interaction>,
    pub pe_stats: Vec<PeUsage>,
    pub trace: Vec<TraceEvent>,
    pub census: Census,
    pub injected_jobs: u64,
}

impl EpisodeResult {
    pub fn total_reward(&self) -> f64 {
        self.reward_stream.iter().sum()
    }

    /// Completion clock of every task that finished, including tasks of jobs
    /// still in the system at the end.
    pub fn completion_clocks(&self) -> BTreeMap<TaskRef, u64> {
        self.interaction_log
            .iter()
            .flat_map(|i| &i.actions)
            .filter_map(|a| a.completion.map(|w| (a.task, w)))
            .collect()
    }
}

/// Per-PE usage counters of a finished episode.
pub fn pe_usage_stats(result: &EpisodeResult) -> &[PeUsage] {
    &result.pe_stats
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("workload {workload} task {task} has no PE on this platform")]
    UnsupportedWorkload { workload: usize, task: u32 },
    #[error("scheduler placed {task:?} on PE {pe}, which does not support it")]
    UnsupportedPe { task: TaskRef, pe: PeId },
    #[error("scheduler assigned {0:?}, which is not an unassigned ready task")]
    NotReady(TaskRef),
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error(transparent)]
    Scheduler(#[from] ScheduleError),
}

/// Job inter-arrival gaps: exponential with mean `scale`, rounded up to a
/// whole number of clocks (at least one).
#[derive(Debug, Clone, Copy)]
pub struct InterArrival {
    exp: Exp<f64>,
}

impl InterArrival {
    pub fn new(scale: f64) -> Self {
        Self {
            exp: Exp::new(1.0 / scale).expect("positive scale"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        (self.exp.sample(rng).ceil() as u64).max(1)
    }
}

#[derive(Debug, Clone)]
struct Running {
    task: TaskRef,
    start: u64,
    finish_tick: u64,
}

#[derive(Debug, Clone)]
struct Queued {
    task: TaskRef,
    key: f64,
    seq: u64,
}

#[derive(Debug, Clone, Default)]
struct PeRuntime {
    running: Option<Running>,
    queue: Vec<Queued>,
    usage: PeUsage,
}

impl PeRuntime {
    fn next_index(&self) -> Option<usize> {
        (0..self.queue.len()).min_by(|&a, &b| {
            let (qa, qb) = (&self.queue[a], &self.queue[b]);
            qa.key.total_cmp(&qb.key).then(qa.seq.cmp(&qb.seq))
        })
    }
}

/// Runs one episode.
///
/// `workloads` is the set jobs are drawn from (uniformly, per injection). An
/// empty set runs the clock with no jobs.
pub fn run_episode(
    workloads: &[Arc<JobDag>],
    platform: &Platform,
    scheduler: &mut dyn Scheduler,
    config: &SimConfig,
) -> Result<EpisodeResult, EngineError> {
    config.validate()?;
    for (w, dag) in workloads.iter().enumerate() {
        for t in dag.tasks() {
            if !t.supported_pes().any(|p| p < platform.len()) {
                return Err(EngineError::UnsupportedWorkload { workload: w, task: t.task_id });
            }
        }
    }
    let mut k = Kernel::new(workloads, platform, config);
    k.run(scheduler)?;
    Ok(k.finish())
}

struct Kernel<'a> {
    cfg: &'a SimConfig,
    platform: &'a Platform,
    workloads: &'a [Arc<JobDag>],
    rng: ChaCha8Rng,
    arrivals: InterArrival,
    clk: u64,
    jobs: Vec<ActiveJob>,
    ready: Vec<TaskRef>,
    pes: Vec<PeRuntime>,
    next_instance: u64,
    next_injection: u64,
    seq: u64,
    newly_completed: usize,
    completed_jobs: Vec<JobRecord>,
    rewards: Vec<f64>,
    log: Vec<Interaction>,
    action_at: BTreeMap<TaskRef, (usize, usize)>,
    trace: Vec<TraceEvent>,
}

impl<'a> Kernel<'a> {
    fn new(workloads: &'a [Arc<JobDag>], platform: &'a Platform, cfg: &'a SimConfig) -> Self {
        Self {
            cfg,
            platform,
            workloads,
            rng: seeding::stream(cfg.seed, seeding::ENGINE),
            arrivals: InterArrival::new(cfg.scale),
            clk: 0,
            jobs: Vec::new(),
            ready: Vec::new(),
            pes: vec![PeRuntime::default(); platform.len()],
            next_instance: 0,
            next_injection: 0,
            seq: 0,
            newly_completed: 0,
            completed_jobs: Vec::new(),
            rewards: Vec::with_capacity(cfg.sim_length as usize),
            log: Vec::new(),
            action_at: BTreeMap::new(),
            trace: Vec::new(),
        }
    }

    fn run(&mut self, scheduler: &mut dyn Scheduler) -> Result<(), EngineError> {
        if self.cfg.quasi_steady {
            while self.jobs.len() < self.cfg.capacity && !self.workloads.is_empty() {
                self.inject(scheduler);
            }
        } else {
            self.next_injection = self.arrivals.sample(&mut self.rng);
        }
        loop {
            if self.clk > 0 {
                self.complete_due(scheduler);
                let c = self.cfg;
                self.rewards.push(reward(
                    self.clk,
                    self.newly_completed,
                    c.reward_kind,
                    c.c1,
                    c.c2,
                    c.sparse_window,
                    c.sim_length,
                ));
            }
            if self.clk == self.cfg.sim_length {
                return Ok(());
            }
            self.inject_due(scheduler);
            self.promote();
            self.schedule(scheduler)?;
            self.start_idle()?;
            for pe in &mut self.pes {
                if pe.running.is_some() {
                    pe.usage.active_time += 1;
                    if !pe.queue.is_empty() {
                        pe.usage.blocking_time += 1;
                    }
                }
            }
            self.clk += 1;
        }
    }

    fn job_pos(&self, instance: u64) -> usize {
        self.jobs
            .binary_search_by_key(&instance, |j| j.instance)
            .expect("task refers to a job in the system")
    }

    fn event(&mut self, kind: TraceKind, job: u64, task: Option<usize>, pe: Option<PeId>, duration: Option<f64>) {
        self.trace.push(TraceEvent {
            clk: self.clk,
            kind,
            job,
            task,
            pe,
            duration,
        });
    }

    fn inject(&mut self, scheduler: &mut dyn Scheduler) {
        let workload = self.rng.random_range(0..self.workloads.len());
        let dag = Arc::clone(&self.workloads[workload]);
        let job = ActiveJob::new(self.next_instance, workload, dag, self.clk);
        self.next_instance += 1;
        scheduler.job_injected(&job, self.platform);
        self.event(TraceKind::Inject, job.instance, None, None, None);
        self.jobs.push(job);
    }

    fn inject_due(&mut self, scheduler: &mut dyn Scheduler) {
        if self.workloads.is_empty() {
            return;
        }
        if self.cfg.quasi_steady {
            while self.jobs.len() < self.cfg.capacity {
                self.inject(scheduler);
            }
        } else if self.clk >= self.next_injection && self.jobs.len() < self.cfg.capacity {
            self.inject(scheduler);
            self.next_injection = self.clk + self.arrivals.sample(&mut self.rng);
        }
    }

    fn promote(&mut self) {
        let clk = self.clk;
        let mut fresh = Vec::new();
        for job in &mut self.jobs {
            for (i, t) in job.tasks.iter_mut().enumerate() {
                if t.status == TaskStatus::Outstanding && t.remaining_preds == 0 {
                    t.status = TaskStatus::Ready;
                    t.ready_clk = Some(clk);
                    fresh.push(TaskRef { job: job.instance, task: i });
                }
            }
        }
        for r in fresh {
            self.event(TraceKind::Ready, r.job, Some(r.task), None, None);
            self.ready.push(r);
        }
    }

    fn pe_views(&self) -> Result<Vec<PeView>, EngineError> {
        let now = self.clk as f64;
        let mut out = Vec::with_capacity(self.pes.len());
        for (p, pe) in self.pes.iter().enumerate() {
            let mut timeline = Vec::new();
            let mut end = now;
            if let Some(r) = &pe.running {
                end = r.finish_tick as f64;
                timeline.push(Interval {
                    start: r.start as f64,
                    end,
                });
            }
            let mut order: Vec<&Queued> = pe.queue.iter().collect();
            order.sort_by(|a, b| a.key.total_cmp(&b.key).then(a.seq.cmp(&b.seq)));
            for q in order {
                let d = self.exec_time(q.task, p)?;
                let start = end.max(now);
                end = start + d;
                timeline.push(Interval { start, end });
            }
            out.push(PeView {
                busy: pe.running.is_some(),
                queued: pe.queue.len(),
                avail: end.max(now),
                timeline,
            });
        }
        Ok(out)
    }

    fn exec_time(&self, r: TaskRef, pe: PeId) -> Result<f64, EngineError> {
        let job = &self.jobs[self.job_pos(r.job)];
        let parents = job.dag.preds(r.task).iter().map(|&(p, w)| {
            (job.tasks[p].assigned_pe.expect("parents of a ready task are placed"), w)
        });
        Ok(self.platform.exec_time(job.dag.task(r.task), pe, parents)?)
    }

    fn schedule(&mut self, scheduler: &mut dyn Scheduler) -> Result<(), EngineError> {
        if self.ready.is_empty() {
            return Ok(());
        }
        let pes = self.pe_views()?;
        let view = SchedulerView {
            clk: self.clk,
            platform: self.platform,
            jobs: &self.jobs,
            ready: &self.ready,
            pes: &pes,
        };
        let assignments = scheduler.schedule(&view)?;
        if assignments.is_empty() {
            return Ok(());
        }

        let mut taken = vec![false; self.ready.len()];
        for a in &assignments {
            let pos = self
                .ready
                .iter()
                .position(|&r| r == a.task)
                .filter(|&i| !taken[i])
                .ok_or(EngineError::NotReady(a.task))?;
            taken[pos] = true;
            let job = &self.jobs[self.job_pos(a.task.job)];
            if a.pe >= self.platform.len() || !job.dag.task(a.task.task).supports(a.pe) {
                return Err(EngineError::UnsupportedPe { task: a.task, pe: a.pe });
            }
        }

        let snapshot = Snapshot {
            jobs: self.jobs.len(),
            ready: self.ready.len(),
            running: self.pes.iter().filter(|p| p.running.is_some()).count(),
        };
        let mut keep = taken.iter();
        self.ready.retain(|_| !keep.next().copied().unwrap_or(false));

        let idx = self.log.len();
        let mut actions = Vec::with_capacity(assignments.len());
        for (k, Assignment { task, pe, planned_start }) in assignments.into_iter().enumerate() {
            let pos = self.job_pos(task.job);
            let t = &mut self.jobs[pos].tasks[task.task];
            t.assigned_pe = Some(pe);
            t.assign_clk = Some(self.clk);
            self.pes[pe].queue.push(Queued {
                task,
                key: planned_start.unwrap_or(self.clk as f64),
                seq: self.seq,
            });
            self.seq += 1;
            self.action_at.insert(task, (idx, k));
            actions.push(LoggedAction {
                task,
                pe,
                start_clk: self.clk,
                completion: None,
                truncated: false,
            });
            self.event(TraceKind::Assign, task.job, Some(task.task), Some(pe), None);
        }
        self.log.push(Interaction {
            clk: self.clk,
            snapshot,
            actions,
        });
        Ok(())
    }

    fn start_idle(&mut self) -> Result<(), EngineError> {
        for p in 0..self.pes.len() {
            if self.pes[p].running.is_some() {
                continue;
            }
            let Some(i) = self.pes[p].next_index() else {
                continue;
            };
            let q = self.pes[p].queue.remove(i);
            let duration = self.exec_time(q.task, p)?;
            // Zero-length tasks still occupy the PE until the next boundary.
            let finish_tick = ((self.clk as f64 + duration).ceil() as u64).max(self.clk + 1);
            let pos = self.job_pos(q.task.job);
            let t = &mut self.jobs[pos].tasks[q.task.task];
            t.status = TaskStatus::Running;
            t.start_clk = Some(self.clk);
            t.duration = duration;
            self.pes[p].running = Some(Running {
                task: q.task,
                start: self.clk,
                finish_tick,
            });
            self.pes[p].usage.count += 1;
            self.event(TraceKind::Start, q.task.job, Some(q.task.task), Some(p), Some(duration));
        }
        Ok(())
    }

    fn complete_due(&mut self, scheduler: &mut dyn Scheduler) {
        self.newly_completed = 0;
        let mut finished_jobs = Vec::new();
        for p in 0..self.pes.len() {
            let due = matches!(&self.pes[p].running, Some(r) if r.finish_tick == self.clk);
            if !due {
                continue;
            }
            let r = self.pes[p].running.take().expect("checked above");
            let clk = self.clk;
            let pos = self.job_pos(r.task.job);
            let job = &mut self.jobs[pos];
            job.tasks[r.task.task].status = TaskStatus::Completed;
            job.tasks[r.task.task].completion_clk = Some(clk);
            for &(c, _) in job.dag.succs(r.task.task) {
                job.tasks[c].remaining_preds -= 1;
            }
            job.completed += 1;
            if job.completed == job.tasks.len() {
                finished_jobs.push(job.instance);
            }
            if let Some(&(i, k)) = self.action_at.get(&r.task) {
                self.log[i].actions[k].completion = Some(clk);
            }
            self.event(TraceKind::Complete, r.task.job, Some(r.task.task), Some(p), None);
        }
        for instance in finished_jobs {
            let pos = self.job_pos(instance);
            let job = self.jobs.remove(pos);
            let tasks = job
                .tasks
                .iter()
                .map(|t| TaskRecord {
                    pe: t.assigned_pe.expect("completed"),
                    ready_clk: t.ready_clk.expect("completed"),
                    start_clk: t.start_clk.expect("completed"),
                    completion_clk: t.completion_clk.expect("completed"),
                    duration: t.duration,
                })
                .collect();
            self.completed_jobs.push(JobRecord {
                instance,
                workload: job.workload,
                dag: job.dag,
                injected_at: job.injected_at,
                completed_at: self.clk,
                tasks,
            });
            self.newly_completed += 1;
            scheduler.job_completed(instance);
            self.event(TraceKind::JobComplete, instance, None, None, None);
        }
    }

    fn finish(mut self) -> EpisodeResult {
        for a in self.log.iter_mut().flat_map(|i| i.actions.iter_mut()) {
            a.truncated = a.completion.is_none();
        }
        let mut census = Census {
            completed: self.completed_jobs.iter().map(|j| j.tasks.len()).sum(),
            ..Census::default()
        };
        for job in &self.jobs {
            for t in &job.tasks {
                match t.status {
                    TaskStatus::Outstanding => census.outstanding += 1,
                    TaskStatus::Ready => census.ready += 1,
                    TaskStatus::Running => census.running += 1,
                    TaskStatus::Completed => census.completed += 1,
                }
            }
        }
        census.injected = census.completed + census.running + census.ready + census.outstanding;
        EpisodeResult {
            completed_jobs: self.completed_jobs,
            reward_stream: self.rewards,
            interaction_log: self.log,
            pe_stats: self.pes.iter().map(|p| p.usage).collect(),
            trace: self.trace,
            census,
            injected_jobs: self.next_instance,
        }
    }
}
