//! Run-time HEFT: upward ranks, earliest finish time, insertion slots.

use std::collections::HashMap;

use super::{Assignment, Interval, ScheduleError, Scheduler, SchedulerView};
use crate::engine::{ActiveJob, TaskRef};
use crate::platform::Platform;
use crate::workload::{JobDag, PeId};

/// Upward rank of every task, indexed like `dag.tasks()`.
///
/// `rank(n) = w̄(n) + max over successors s of (c̄(n, s) + rank(s))`, with
/// `w̄` the mean computation cost over supporting PEs and `c̄` the edge weight
/// over the platform's mean bandwidth.
pub fn rank_u(dag: &JobDag, platform: &Platform) -> Vec<f64> {
    let bw = platform.mean_bandwidth();
    let mut rank = vec![0.0; dag.len()];
    for &n in dag.topo_order().expect("job DAGs are acyclic").iter().rev() {
        let tail = dag
            .succs(n)
            .iter()
            .map(|&(s, w)| bw.map_or(0.0, |b| w / b) + rank[s])
            .fold(0.0, f64::max);
        rank[n] = dag.task(n).mean_cost().unwrap_or(0.0) + tail;
    }
    rank
}

/// Earliest start at or after `earliest` where `[start, start + duration)`
/// fits between the busy intervals of `timeline` (sorted, disjoint).
pub fn insertion_slot(duration: f64, earliest: f64, timeline: &[Interval]) -> f64 {
    let mut start = earliest;
    for iv in timeline {
        if iv.end <= start {
            continue;
        }
        if start + duration <= iv.start {
            return start;
        }
        start = start.max(iv.end);
    }
    start
}

/// `(start, finish)` of `t` on `pe`. Without insertion the task starts after
/// all committed work (`avail`); with it, in the first fitting gap.
pub fn eft(
    view: &SchedulerView<'_>,
    t: TaskRef,
    pe: PeId,
    avail: f64,
    timeline: &[Interval],
    insertion: bool,
) -> Result<(f64, f64), ScheduleError> {
    let comp = view
        .template(t)
        .cost(pe)
        .ok_or(ScheduleError::NoSupportingPe(t))?
        * view.platform.mu();
    let ready = view.data_ready(t, pe)?;
    let start = if insertion {
        insertion_slot(comp, ready, timeline)
    } else {
        avail.max(ready)
    };
    Ok((start, start + comp))
}

/// Schedules the ready set in descending upward rank, each task on the PE
/// with the earliest finish time. Ranks are computed once per job.
#[derive(Debug, Clone, Default)]
pub struct HeftRt {
    insertion: bool,
    ranks: HashMap<u64, Vec<f64>>,
}

impl HeftRt {
    pub fn new(insertion: bool) -> Self {
        Self {
            insertion,
            ranks: HashMap::new(),
        }
    }

    fn rank(&self, view: &SchedulerView<'_>, t: TaskRef) -> f64 {
        match self.ranks.get(&t.job) {
            Some(r) => r[t.task],
            None => rank_u(&view.job(t.job).dag, view.platform)[t.task],
        }
    }
}

impl Scheduler for HeftRt {
    fn name(&self) -> &str {
        if self.insertion {
            "heft_rt"
        } else {
            "heft_rt_noinsert"
        }
    }

    fn job_injected(&mut self, job: &ActiveJob, platform: &Platform) {
        self.ranks.insert(job.instance, rank_u(&job.dag, platform));
    }

    fn job_completed(&mut self, instance: u64) {
        self.ranks.remove(&instance);
    }

    fn schedule(&mut self, view: &SchedulerView<'_>) -> Result<Vec<Assignment>, ScheduleError> {
        let mut order: Vec<(TaskRef, f64)> = view.ready.iter().map(|&t| (t, self.rank(view, t))).collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut avail: Vec<f64> = view.pes.iter().map(|p| p.avail).collect();
        let mut timelines: Vec<Vec<Interval>> = view.pes.iter().map(|p| p.timeline.clone()).collect();
        let mut out = Vec::with_capacity(order.len());
        for (t, _) in order {
            let mut best: Option<(PeId, f64, f64)> = None;
            for pe in view.supported(t) {
                let (s, f) = eft(view, t, pe, avail[pe], &timelines[pe], self.insertion)?;
                if best.is_none_or(|(_, _, bf)| f < bf) {
                    best = Some((pe, s, f));
                }
            }
            let (pe, start, finish) = best.ok_or(ScheduleError::NoSupportingPe(t))?;
            let tl = &mut timelines[pe];
            let at = tl.partition_point(|iv| iv.start <= start);
            tl.insert(at, Interval { start, end: finish });
            avail[pe] = avail[pe].max(finish);
            out.push(Assignment {
                task: t,
                pe,
                planned_start: Some(start),
            });
        }
        Ok(out)
    }
}
