use rand_chacha::ChaCha8Rng;

use super::model::Mlp;
use super::observation::ObsLayout;
use super::policy::{greedy_index, masked_softmax, sample_index, Pick};
use super::ActionMode;
use crate::engine::TaskRef;
use crate::sched::{Assignment, ScheduleError, Scheduler, SchedulerView};

/// One network evaluation and the actions drawn from it.
#[derive(Debug, Clone)]
pub struct Sample {
    pub clk: u64,
    pub input: Vec<f64>,
    pub picks: Vec<Pick>,
    /// Task of each pick, same order.
    pub tasks: Vec<TaskRef>,
}

/// How the scheduler turns a distribution into an action.
#[derive(Debug, Clone)]
pub enum Selection {
    /// Draw from the policy and keep every sample for training.
    Sample(ChaCha8Rng),
    /// Take the most probable PE.
    Greedy,
}

/// Actor-critic scheduler. In [`ActionMode::Independent`] each ready task is
/// a separate query; in [`ActionMode::Group`] up to `a_max` ready tasks share
/// one query and one value estimate.
pub struct NeuralScheduler<'m> {
    model: &'m Mlp,
    layout: ObsLayout,
    mode: ActionMode,
    selection: Selection,
    samples: Vec<Sample>,
}

impl<'m> NeuralScheduler<'m> {
    pub fn new(model: &'m Mlp, layout: ObsLayout, mode: ActionMode, selection: Selection) -> Self {
        Self {
            model,
            layout,
            mode,
            selection,
            samples: Vec::new(),
        }
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    fn choose(&mut self, p: &[f64]) -> usize {
        match &mut self.selection {
            Selection::Sample(rng) => sample_index(p, rng),
            Selection::Greedy => greedy_index(p),
        }
    }
}

impl Scheduler for NeuralScheduler<'_> {
    fn name(&self) -> &str {
        "neural"
    }

    fn schedule(&mut self, view: &SchedulerView<'_>) -> Result<Vec<Assignment>, ScheduleError> {
        self.layout.check(view).map_err(ScheduleError::Policy)?;
        let state = self.layout.observe(view);
        let q = self.layout.num_pes;
        let per_query = match self.mode {
            ActionMode::Independent => 1,
            ActionMode::Group { a_max } => a_max,
        };

        let mut out = Vec::with_capacity(view.ready.len());
        for chunk in view.ready.chunks(per_query) {
            let mut input = state.clone();
            input.reserve(per_query * self.layout.slot_dim());
            let mut masks = Vec::with_capacity(chunk.len());
            for &t in chunk {
                let mask = self.layout.mask(view, t);
                if !mask.iter().any(|&m| m) {
                    return Err(ScheduleError::NoSupportingPe(t));
                }
                input.extend(self.layout.slot(view, t));
                masks.push(mask);
            }
            input.resize(state.len() + per_query * self.layout.slot_dim(), 0.0);

            let logits = self.model.forward(&input).logits;
            let mut picks = Vec::with_capacity(chunk.len());
            for (slot, (&t, mask)) in chunk.iter().zip(masks).enumerate() {
                let p = masked_softmax(&logits[slot * q..(slot + 1) * q], &mask).expect("mask checked above");
                let action = self.choose(&p);
                out.push(Assignment::new(t, action));
                picks.push(Pick { slot, action, mask });
            }
            if matches!(self.selection, Selection::Sample(_)) {
                self.samples.push(Sample {
                    clk: view.clk,
                    input,
                    picks,
                    tasks: chunk.to_vec(),
                });
            }
        }
        Ok(out)
    }
}
