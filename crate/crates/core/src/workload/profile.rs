//! Line-oriented job profile format.
//!
//! ```text
//! # comment
//! job <name>
//! task <id> <name>
//! edge <src_id> <dst_id> <weight>
//! comp <task_id> <pe_id> <cost>
//! ```
//!
//! Tasks must be declared before they are referenced. Writing and re-parsing
//! a profile yields a structurally equal [`JobDag`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::dag::{validate_dag, Edge, JobDag, TaskTemplate, Violation};
use crate::platform::Platform;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("profile describes an invalid DAG: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub(crate) fn syntax(line: usize, reason: impl Into<String>) -> ProfileError {
    ProfileError::Syntax {
        line,
        reason: reason.into(),
    }
}

/// Splits profile text into `(line number, tokens)` for non-blank,
/// non-comment lines.
pub(crate) fn directives(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub(crate) fn expect_args(line: usize, toks: &[&str], n: usize) -> Result<(), ProfileError> {
    if toks.len() != n + 1 {
        return Err(syntax(
            line,
            format!("`{}` takes {n} argument(s), found {}", toks[0], toks.len() - 1),
        ));
    }
    Ok(())
}

pub(crate) fn parse_num<T: std::str::FromStr>(line: usize, what: &str, tok: &str) -> Result<T, ProfileError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{tok}`")))
}

pub(crate) fn parse_nonneg(line: usize, what: &str, tok: &str) -> Result<f64, ProfileError> {
    let x: f64 = parse_num(line, what, tok)?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(syntax(line, format!("{what} must be finite and non-negative, got {tok}")));
    }
    Ok(x)
}

/// Parses a job profile without checking PE ids.
pub fn parse_job_profile(text: &str) -> Result<JobDag, ProfileError> {
    parse_inner(text, None)
}

/// Parses a job profile, rejecting `comp` lines that name PEs the platform
/// does not have.
pub fn parse_job_profile_for(text: &str, platform: &Platform) -> Result<JobDag, ProfileError> {
    parse_inner(text, Some(platform.len()))
}

fn parse_inner(text: &str, num_pes: Option<usize>) -> Result<JobDag, ProfileError> {
    let mut name: Option<String> = None;
    let mut tasks: Vec<TaskTemplate> = Vec::new();
    let mut decl_line: Vec<usize> = Vec::new();
    let mut index: BTreeMap<u32, usize> = BTreeMap::new();
    let mut edges: Vec<Edge> = Vec::new();

    let lookup = |index: &BTreeMap<u32, usize>, line: usize, tok: &str| -> Result<usize, ProfileError> {
        let id: u32 = parse_num(line, "task id", tok)?;
        index
            .get(&id)
            .copied()
            .ok_or_else(|| syntax(line, format!("undefined task {id}")))
    };

    for (line, toks) in directives(text) {
        match toks[0] {
            "job" => {
                expect_args(line, &toks, 1)?;
                if name.is_some() {
                    return Err(syntax(line, "duplicate `job` directive"));
                }
                name = Some(toks[1].to_string());
            }
            "task" => {
                expect_args(line, &toks, 2)?;
                let id: u32 = parse_num(line, "task id", toks[1])?;
                if index.insert(id, tasks.len()).is_some() {
                    return Err(syntax(line, format!("task {id} defined twice")));
                }
                tasks.push(TaskTemplate::new(id, toks[2]));
                decl_line.push(line);
            }
            "edge" => {
                expect_args(line, &toks, 3)?;
                let src = lookup(&index, line, toks[1])?;
                let dst = lookup(&index, line, toks[2])?;
                let weight = parse_nonneg(line, "edge weight", toks[3])?;
                edges.push(Edge { src, dst, weight });
            }
            "comp" => {
                expect_args(line, &toks, 3)?;
                let t = lookup(&index, line, toks[1])?;
                let pe: usize = parse_num(line, "PE id", toks[2])?;
                if let Some(q) = num_pes {
                    if pe >= q {
                        return Err(syntax(line, format!("undefined PE {pe}")));
                    }
                }
                let cost = parse_nonneg(line, "cost", toks[3])?;
                if tasks[t].comp_cost.insert(pe, cost).is_some() {
                    return Err(syntax(line, format!("duplicate cost for task {} on PE {pe}", tasks[t].task_id)));
                }
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    for (t, &line) in tasks.iter().zip(&decl_line) {
        if t.comp_cost.is_empty() {
            return Err(syntax(line, format!("task {} has no `comp` entry", t.task_id)));
        }
    }
    let dag = JobDag::new(0, name.unwrap_or_else(|| "job".into()), tasks, edges);
    let violations = validate_dag(&dag);
    if !violations.is_empty() {
        return Err(ProfileError::Invalid(violations));
    }
    Ok(dag)
}

/// Serializes a DAG in the profile format. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_job_profile(dag: &JobDag) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "job {}", dag.name());
    for t in dag.tasks() {
        let _ = writeln!(s, "task {} {}", t.task_id, t.name);
    }
    for e in dag.edges() {
        let _ = writeln!(
            s,
            "edge {} {} {}",
            dag.task(e.src).task_id,
            dag.task(e.dst).task_id,
            e.weight
        );
    }
    for t in dag.tasks() {
        for (pe, cost) in &t.comp_cost {
            let _ = writeln!(s, "comp {} {} {}", t.task_id, pe, cost);
        }
    }
    s
}

/// Human-readable adjacency listing, one task per line.
pub fn adjacency_dump(dag: &JobDag) -> String {
    let mut s = String::new();
    let levels = dag.levels();
    for (i, t) in dag.tasks().iter().enumerate() {
        let kids: Vec<String> = dag
            .succs(i)
            .iter()
            .map(|&(c, w)| format!("{}({w})", dag.task(c).task_id))
            .collect();
        let level = levels.as_ref().map_or("?".to_string(), |l| l[i].to_string());
        let _ = writeln!(s, "{} [{}] L{level} -> {}", t.task_id, t.name, kids.join(" "));
    }
    s
}
