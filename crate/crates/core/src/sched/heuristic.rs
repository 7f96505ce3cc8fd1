use rand::seq::IndexedRandom;
use rand_chacha::ChaCha8Rng;

use super::{fastest_pe, Assignment, ScheduleError, Scheduler, SchedulerView};
use crate::engine::TaskRef;
use crate::seeding;

/// Ready tasks in ascending order of their best execution time, each paired
/// with its fastest PE. Ties keep `(job, task)` order.
fn shortest_first(view: &SchedulerView<'_>) -> Result<Vec<(TaskRef, usize, f64)>, ScheduleError> {
    let mut tasks = view
        .ready
        .iter()
        .map(|&t| fastest_pe(view, t).map(|(pe, e)| (t, pe, e)))
        .collect::<Result<Vec<_>, _>>()?;
    tasks.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    Ok(tasks)
}

/// Shortest task first: every ready task goes to its fastest PE, whether or
/// not that PE is free.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stf;

impl Scheduler for Stf {
    fn name(&self) -> &str {
        "stf"
    }

    fn schedule(&mut self, view: &SchedulerView<'_>) -> Result<Vec<Assignment>, ScheduleError> {
        Ok(shortest_first(view)?
            .into_iter()
            .map(|(t, pe, _)| Assignment::new(t, pe))
            .collect())
    }
}

/// Minimum execution time: as [`Stf`], but a task whose fastest PE is busy
/// moves to the fastest idle PE that supports it, if any.
///
/// A PE counts as busy when it is running a task, has queued work, or already
/// received a task earlier in the same call.
#[derive(Debug, Clone, Copy, Default)]
pub struct Met;

impl Scheduler for Met {
    fn name(&self) -> &str {
        "met"
    }

    fn schedule(&mut self, view: &SchedulerView<'_>) -> Result<Vec<Assignment>, ScheduleError> {
        let mut taken: Vec<bool> = view.pes.iter().map(|p| p.has_work()).collect();
        let mut out = Vec::with_capacity(view.ready.len());
        for (t, best, _) in shortest_first(view)? {
            let mut pe = best;
            if taken[best] {
                let mut alt: Option<(usize, f64)> = None;
                for p in view.supported(t) {
                    if taken[p] {
                        continue;
                    }
                    let e = view.exec_time(t, p)?;
                    if alt.is_none_or(|(_, b)| e < b) {
                        alt = Some((p, e));
                    }
                }
                if let Some((p, _)) = alt {
                    pe = p;
                }
            }
            taken[pe] = true;
            out.push(Assignment::new(t, pe));
        }
        Ok(out)
    }
}

/// Uniform choice among supporting PEs.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: seeding::stream(seed, seeding::SCHEDULER),
        }
    }
}

impl Scheduler for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn schedule(&mut self, view: &SchedulerView<'_>) -> Result<Vec<Assignment>, ScheduleError> {
        view.ready
            .iter()
            .map(|&t| {
                let pe = *view
                    .supported(t)
                    .choose(&mut self.rng)
                    .ok_or(ScheduleError::NoSupportingPe(t))?;
                Ok(Assignment::new(t, pe))
            })
            .collect()
    }
}
