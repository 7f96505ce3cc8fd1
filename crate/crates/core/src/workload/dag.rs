use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

/// Index of a processing element within a [`Platform`](crate::platform::Platform).
pub type PeId = usize;

/// A task as described by a job profile: an opaque cost carrier.
///
/// A PE that is missing from `comp_cost` does not support the task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTemplate {
    pub task_id: u32,
    pub name: String,
    pub comp_cost: BTreeMap<PeId, f64>,
}

impl TaskTemplate {
    pub fn new(task_id: u32, name: impl Into<String>) -> Self {
        Self {
            task_id,
            name: name.into(),
            comp_cost: BTreeMap::new(),
        }
    }

    pub fn with_cost(mut self, pe: PeId, cost: f64) -> Self {
        self.comp_cost.insert(pe, cost);
        self
    }

    pub fn supports(&self, pe: PeId) -> bool {
        self.comp_cost.contains_key(&pe)
    }

    pub fn cost(&self, pe: PeId) -> Option<f64> {
        self.comp_cost.get(&pe).copied()
    }

    pub fn supported_pes(&self) -> impl Iterator<Item = PeId> + '_ {
        self.comp_cost.keys().copied()
    }

    /// Cheapest cost over supporting PEs, `None` for an unsupported task.
    pub fn min_cost(&self) -> Option<f64> {
        self.comp_cost.values().copied().reduce(f64::min)
    }

    pub fn mean_cost(&self) -> Option<f64> {
        if self.comp_cost.is_empty() {
            return None;
        }
        Some(self.comp_cost.values().sum::<f64>() / self.comp_cost.len() as f64)
    }
}

/// A directed dependency between two tasks, addressed by their index in the
/// owning [`JobDag`]. `weight` is the data transmission volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// A job: tasks plus weighted dependency edges.
///
/// Construction never fails; use [`validate_dag`] to check the structural
/// invariants (single HEAD/TAIL, acyclic, every node on a HEAD→TAIL path).
#[derive(Debug, Clone, PartialEq)]
pub struct JobDag {
    job_id: u32,
    name: String,
    tasks: Vec<TaskTemplate>,
    edges: Vec<Edge>,
    preds: Vec<Vec<(usize, f64)>>,
    succs: Vec<Vec<(usize, f64)>>,
}

impl JobDag {
    pub fn new(job_id: u32, name: impl Into<String>, tasks: Vec<TaskTemplate>, edges: Vec<Edge>) -> Self {
        let n = tasks.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for e in &edges {
            if e.src < n && e.dst < n {
                succs[e.src].push((e.dst, e.weight));
                preds[e.dst].push((e.src, e.weight));
            }
        }
        Self {
            job_id,
            name: name.into(),
            tasks,
            edges,
            preds,
            succs,
        }
    }

    pub fn job_id(&self) -> u32 {
        self.job_id
    }

    pub fn with_job_id(mut self, job_id: u32) -> Self {
        self.job_id = job_id;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tasks(&self) -> &[TaskTemplate] {
        &self.tasks
    }

    pub fn task(&self, idx: usize) -> &TaskTemplate {
        &self.tasks[idx]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Parents of `idx` with the weight of the connecting edge.
    pub fn preds(&self, idx: usize) -> &[(usize, f64)] {
        &self.preds[idx]
    }

    pub fn succs(&self, idx: usize) -> &[(usize, f64)] {
        &self.succs[idx]
    }

    pub fn index_of(&self, task_id: u32) -> Option<usize> {
        self.tasks.iter().position(|t| t.task_id == task_id)
    }

    /// The unique node with in-degree 0, if there is exactly one.
    pub fn head(&self) -> Option<usize> {
        let mut it = (0..self.len()).filter(|&i| self.preds[i].is_empty());
        match (it.next(), it.next()) {
            (Some(h), None) => Some(h),
            _ => None,
        }
    }

    pub fn tail(&self) -> Option<usize> {
        let mut it = (0..self.len()).filter(|&i| self.succs[i].is_empty());
        match (it.next(), it.next()) {
            (Some(t), None) => Some(t),
            _ => None,
        }
    }

    /// Kahn topological order; `None` when the graph has a cycle.
    pub fn topo_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut stack: Vec<usize> = (0..n).rev().filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = stack.pop() {
            order.push(u);
            for &(s, _) in self.succs[u].iter().rev() {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    stack.push(s);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Longest-path level of every node, counted in hops from the sources.
    /// `None` for cyclic graphs.
    pub fn levels(&self) -> Option<Vec<usize>> {
        let order = self.topo_order()?;
        let mut level = vec![0usize; self.len()];
        for u in order {
            for &(s, _) in &self.succs[u] {
                level[s] = level[s].max(level[u] + 1);
            }
        }
        Some(level)
    }

    /// Number of levels (longest path in nodes). Zero for an empty or cyclic graph.
    pub fn depth(&self) -> usize {
        self.levels()
            .and_then(|l| l.into_iter().max())
            .map_or(0, |m| m + 1)
    }
}

/// A broken structural invariant of a [`JobDag`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("graph has no tasks")]
    Empty,
    #[error("duplicate task id {0}")]
    DuplicateTaskId(u32),
    #[error("task {0} has no supporting PE")]
    Unsupported(u32),
    #[error("task {task} has invalid cost {cost} on PE {pe}")]
    InvalidCost { task: u32, pe: PeId, cost: f64 },
    #[error("edge #{0} references a missing task")]
    DanglingEdge(usize),
    #[error("self-loop on task {0}")]
    SelfLoop(u32),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(u32, u32),
    #[error("edge {src} -> {dst} has invalid weight {weight}")]
    InvalidWeight { src: u32, dst: u32, weight: f64 },
    #[error("cycle through tasks {0:?}")]
    Cycle(Vec<u32>),
    #[error("no HEAD (in-degree 0) task")]
    NoHead,
    #[error("multiple HEAD tasks {0:?}")]
    MultipleHeads(Vec<u32>),
    #[error("no TAIL (out-degree 0) task")]
    NoTail,
    #[error("multiple TAIL tasks {0:?}")]
    MultipleTails(Vec<u32>),
    #[error("task {0} is not on any HEAD -> TAIL path")]
    OffPath(u32),
}

/// Checks every [`JobDag`] invariant and returns the violations found.
pub fn validate_dag(dag: &JobDag) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = dag.len();
    if n == 0 {
        out.push(Violation::Empty);
        return out;
    }
    let id = |i: usize| dag.tasks[i].task_id;

    let mut seen = BTreeSet::new();
    for t in &dag.tasks {
        if !seen.insert(t.task_id) {
            out.push(Violation::DuplicateTaskId(t.task_id));
        }
        if t.comp_cost.is_empty() {
            out.push(Violation::Unsupported(t.task_id));
        }
        for (&pe, &cost) in &t.comp_cost {
            if !(cost.is_finite() && cost >= 0.0) {
                out.push(Violation::InvalidCost { task: t.task_id, pe, cost });
            }
        }
    }

    let mut pairs = BTreeSet::new();
    for (k, e) in dag.edges.iter().enumerate() {
        if e.src >= n || e.dst >= n {
            out.push(Violation::DanglingEdge(k));
            continue;
        }
        if e.src == e.dst {
            out.push(Violation::SelfLoop(id(e.src)));
        }
        if !pairs.insert((e.src, e.dst)) {
            out.push(Violation::DuplicateEdge(id(e.src), id(e.dst)));
        }
        if !(e.weight.is_finite() && e.weight >= 0.0) {
            out.push(Violation::InvalidWeight {
                src: id(e.src),
                dst: id(e.dst),
                weight: e.weight,
            });
        }
    }

    if dag.topo_order().is_none() {
        out.push(Violation::Cycle(cycle_members(dag).into_iter().map(id).collect()));
    }

    let heads: Vec<usize> = (0..n).filter(|&i| dag.preds(i).is_empty()).collect();
    let tails: Vec<usize> = (0..n).filter(|&i| dag.succs(i).is_empty()).collect();
    match heads.len() {
        0 => out.push(Violation::NoHead),
        1 => {}
        _ => out.push(Violation::MultipleHeads(heads.iter().map(|&i| id(i)).collect())),
    }
    match tails.len() {
        0 => out.push(Violation::NoTail),
        1 => {}
        _ => out.push(Violation::MultipleTails(tails.iter().map(|&i| id(i)).collect())),
    }

    if let ([h], [t]) = (heads.as_slice(), tails.as_slice()) {
        let from_head = reach(n, *h, |u| dag.succs(u));
        let to_tail = reach(n, *t, |u| dag.preds(u));
        for i in 0..n {
            if !(from_head[i] && to_tail[i]) {
                out.push(Violation::OffPath(id(i)));
            }
        }
    }
    out
}

fn reach<'a>(n: usize, start: usize, next: impl Fn(usize) -> &'a [(usize, f64)]) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for &(v, _) in next(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Nodes left over after repeatedly peeling sources and sinks; these lie on
/// (or between) cycles.
fn cycle_members(dag: &JobDag) -> Vec<usize> {
    let n = dag.len();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            let has_in = dag.preds(i).iter().any(|&(p, _)| alive[p]);
            let has_out = dag.succs(i).iter().any(|&(s, _)| alive[s]);
            if !has_in || !has_out {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&i| alive[i]).collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn unit_task(id: u32) -> TaskTemplate {
        TaskTemplate::new(id, format!("t{id}")).with_cost(0, 1.0)
    }

    /// HEAD -> ... -> TAIL with `n` unit-cost tasks on PE 0.
    pub fn chain(n: usize) -> JobDag {
        let tasks = (0..n as u32).map(unit_task).collect();
        let edges = (1..n).map(|i| Edge { src: i - 1, dst: i, weight: 1.0 }).collect();
        JobDag::new(0, "chain", tasks, edges)
    }

    /// HEAD -> {a, b} -> TAIL.
    pub fn diamond() -> JobDag {
        let tasks = (0..4).map(unit_task).collect();
        let edges = vec![
            Edge { src: 0, dst: 1, weight: 1.0 },
            Edge { src: 0, dst: 2, weight: 1.0 },
            Edge { src: 1, dst: 3, weight: 1.0 },
            Edge { src: 2, dst: 3, weight: 1.0 },
        ];
        JobDag::new(0, "diamond", tasks, edges)
    }
}
