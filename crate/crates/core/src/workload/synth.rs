//! Layered random DAG construction.
//!
//! Depth is `round(sqrt(v) / alpha)` levels including the HEAD and TAIL
//! levels; every interior level starts at `floor(sqrt(v) * alpha)` nodes and
//! the total is then nudged to exactly `v` by adding or removing nodes on
//! random interior levels. Each node picks its parents from the level directly
//! above it, and any node left without a child is wired to a random node one
//! level down so that every node reaches TAIL.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use super::dag::{Edge, JobDag, TaskTemplate};

#[derive(Debug, Clone, PartialEq)]
pub struct DagGenParams {
    /// Number of tasks, including HEAD and TAIL.
    pub v: usize,
    /// Shape: large values give shallow and wide graphs.
    pub alpha: f64,
    /// Mean edge weight.
    pub nu: f64,
    pub nu_std: f64,
    /// Spread of the per-level width around its mean. Zero reproduces the
    /// deterministic construction.
    pub width_std: f64,
    /// Spread of the per-node parent count around `|level above| / 3`.
    pub pred_std: f64,
}

impl DagGenParams {
    pub fn new(v: usize, alpha: f64, nu: f64) -> Self {
        Self {
            v,
            alpha,
            nu,
            nu_std: 0.0,
            width_std: 0.0,
            pred_std: 0.0,
        }
    }

    /// `(levels, clamped)` for these parameters.
    pub fn planned_depth(&self) -> (usize, bool) {
        let raw = ((self.v as f64).sqrt() / self.alpha).round();
        let raw = if raw.is_finite() { raw as usize } else { usize::MAX };
        let depth = raw.clamp(3, self.v.max(3));
        (depth, depth != raw)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("v must be at least 3 (got {0})")]
    TooFewTasks(usize),
    #[error("alpha must be positive and finite (got {0})")]
    BadAlpha(f64),
    #[error("invalid {name}: {value}")]
    BadSpread { name: &'static str, value: f64 },
    #[error("cost source is empty")]
    NoCosts,
}

/// A synthesized DAG plus the level structure it was built from.
#[derive(Debug, Clone)]
pub struct SynthesizedDag {
    pub dag: JobDag,
    /// Node indices per level; level 0 is HEAD, the last level is TAIL.
    pub levels: Vec<Vec<usize>>,
    /// Set when the requested depth fell outside `[3, v]` and was clamped.
    pub depth_clamped: bool,
}

/// Builds one random job. Node `k` takes its cost table from
/// `cost_source[k % cost_source.len()]`.
pub fn synthesize_dag<R: Rng + ?Sized>(
    params: &DagGenParams,
    cost_source: &[TaskTemplate],
    rng: &mut R,
) -> Result<SynthesizedDag, SynthError> {
    let v = params.v;
    if v < 3 {
        return Err(SynthError::TooFewTasks(v));
    }
    if !(params.alpha.is_finite() && params.alpha > 0.0) {
        return Err(SynthError::BadAlpha(params.alpha));
    }
    for (name, value) in [
        ("nu", params.nu),
        ("nu_std", params.nu_std),
        ("width_std", params.width_std),
        ("pred_std", params.pred_std),
    ] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(SynthError::BadSpread { name, value });
        }
    }
    if cost_source.is_empty() {
        return Err(SynthError::NoCosts);
    }

    let (depth, depth_clamped) = params.planned_depth();
    let interior = depth - 2;
    let mean_width = ((v as f64).sqrt() * params.alpha).floor();

    let mut widths: Vec<usize> = (0..interior)
        .map(|_| {
            let w = normal_sample(mean_width, params.width_std, rng).round();
            (w.max(1.0)) as usize
        })
        .collect();

    let mut total = 2 + widths.iter().sum::<usize>();
    while total < v {
        let l = rng.random_range(0..interior);
        widths[l] += 1;
        total += 1;
    }
    while total > v {
        let shrinkable: Vec<usize> = (0..interior).filter(|&l| widths[l] > 1).collect();
        let l = shrinkable[rng.random_range(0..shrinkable.len())];
        widths[l] -= 1;
        total -= 1;
    }

    let mut levels: Vec<Vec<usize>> = Vec::with_capacity(depth);
    levels.push(vec![0]);
    let mut next = 1;
    for w in widths {
        levels.push((next..next + w).collect());
        next += w;
    }
    levels.push(vec![v - 1]);

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut has_child = vec![false; v];
    for l in 1..levels.len() {
        let above = &levels[l - 1];
        for &node in &levels[l] {
            let want = normal_sample(above.len() as f64 / 3.0, params.pred_std, rng).round();
            let k = (want.min(above.len() as f64).max(1.0)) as usize;
            let mut picked: Vec<usize> = sample(rng, above.len(), k).into_iter().map(|i| above[i]).collect();
            picked.sort_unstable();
            for p in picked {
                has_child[p] = true;
                pairs.push((p, node));
            }
        }
        for &p in above {
            if !has_child[p] {
                let below = &levels[l];
                let c = below[rng.random_range(0..below.len())];
                has_child[p] = true;
                pairs.push((p, c));
            }
        }
    }
    pairs.sort_unstable();

    let edges = pairs
        .into_iter()
        .map(|(src, dst)| {
            let w = normal_sample(params.nu, params.nu_std, rng);
            Edge {
                src,
                dst,
                weight: w.abs().floor().max(1.0),
            }
        })
        .collect();

    let tasks = (0..v)
        .map(|k| {
            let name = match k {
                0 => "head".to_string(),
                k if k == v - 1 => "tail".to_string(),
                k => format!("t{k}"),
            };
            TaskTemplate {
                task_id: k as u32,
                name,
                comp_cost: cost_source[k % cost_source.len()].comp_cost.clone(),
            }
        })
        .collect();

    Ok(SynthesizedDag {
        dag: JobDag::new(0, "synthetic", tasks, edges),
        levels,
        depth_clamped,
    })
}

fn normal_sample<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    if std == 0.0 {
        return mean;
    }
    Normal::new(mean, std).expect("validated spread").sample(rng)
}
