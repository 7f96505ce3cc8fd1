use std::io::Write;

use serde::Serialize;

use crate::workload::PeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Inject,
    Ready,
    Assign,
    Start,
    Complete,
    JobComplete,
}

/// One kernel event. `duration` is set on `start` events only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub clk: u64,
    pub kind: TraceKind,
    pub job: u64,
    pub task: Option<usize>,
    pub pe: Option<PeId>,
    pub duration: Option<f64>,
}

/// Writes events as CSV with header `clk,kind,job,task,pe,duration`.
pub fn write_trace_csv<W: Write>(events: &[TraceEvent], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in events {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let events = [
            TraceEvent { clk: 0, kind: TraceKind::Inject, job: 0, task: None, pe: None, duration: None },
            TraceEvent { clk: 2, kind: TraceKind::Start, job: 0, task: Some(1), pe: Some(3), duration: Some(6.5) },
        ];
        let mut buf = Vec::new();
        write_trace_csv(&events, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "clk,kind,job,task,pe,duration\n0,inject,0,,,\n2,start,0,1,3,6.5\n"
        );
    }
}
