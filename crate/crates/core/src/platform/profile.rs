//! Resource profile format:
//!
//! ```text
//! pe <id> <name>
//! opp <pe_id> <voltage> <frequency>
//! bw <pe_i> <pe_j> <value>
//! mu <value>            # optional, defaults to 1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Platform, ProcessingElement};
use crate::workload::{directives, expect_args, parse_nonneg, parse_num, syntax, ProfileError};

pub fn parse_resource_profile(text: &str) -> Result<Platform, ProfileError> {
    let mut pes: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut bw: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut mu = 1.0;
    let mut last_line = 0;

    for (line, toks) in directives(text) {
        last_line = line;
        match toks[0] {
            "pe" => {
                expect_args(line, &toks, 2)?;
                let id: usize = parse_num(line, "PE id", toks[1])?;
                if id != pes.len() {
                    return Err(syntax(line, format!("expected PE id {}, found {id}", pes.len())));
                }
                pes.push((toks[2].to_string(), Vec::new()));
            }
            "opp" => {
                expect_args(line, &toks, 3)?;
                let id: usize = parse_num(line, "PE id", toks[1])?;
                let volt = parse_nonneg(line, "voltage", toks[2])?;
                let freq = parse_nonneg(line, "frequency", toks[3])?;
                let pe = pes
                    .get_mut(id)
                    .ok_or_else(|| syntax(line, format!("undefined PE {id}")))?;
                pe.1.push((volt, freq));
            }
            "bw" => {
                expect_args(line, &toks, 3)?;
                let i: usize = parse_num(line, "PE id", toks[1])?;
                let j: usize = parse_num(line, "PE id", toks[2])?;
                for id in [i, j] {
                    if id >= pes.len() {
                        return Err(syntax(line, format!("undefined PE {id}")));
                    }
                }
                if i == j {
                    return Err(syntax(line, "same-PE bandwidth is implicit"));
                }
                let value = parse_nonneg(line, "bandwidth", toks[3])?;
                if value == 0.0 {
                    return Err(syntax(line, "bandwidth must be positive"));
                }
                if bw.insert((i, j), value).is_some() {
                    return Err(syntax(line, format!("duplicate bandwidth {i} -> {j}")));
                }
            }
            "mu" => {
                expect_args(line, &toks, 1)?;
                mu = parse_nonneg(line, "mu", toks[1])?;
                if mu == 0.0 {
                    return Err(syntax(line, "mu must be positive"));
                }
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    let end = last_line + 1;
    if pes.is_empty() {
        return Err(syntax(end, "no `pe` directives"));
    }
    for (id, (_, opp)) in pes.iter().enumerate() {
        if opp.is_empty() {
            return Err(syntax(end, format!("PE {id} has no `opp` entry")));
        }
    }
    for i in 0..pes.len() {
        for j in 0..pes.len() {
            if i != j && !bw.contains_key(&(i, j)) {
                return Err(syntax(end, format!("missing `bw {i} {j}`")));
            }
        }
    }

    let pes = pes
        .into_iter()
        .enumerate()
        .map(|(id, (name, opp))| ProcessingElement::new(id, name, opp))
        .collect();
    Platform::new(pes, bw, mu).map_err(|e| syntax(end, e.to_string()))
}

pub fn write_resource_profile(platform: &Platform) -> String {
    let mut s = String::new();
    for pe in platform.pes() {
        let _ = writeln!(s, "pe {} {}", pe.pe_id, pe.name);
    }
    for pe in platform.pes() {
        for (v, f) in &pe.opp {
            let _ = writeln!(s, "opp {} {} {}", pe.pe_id, v, f);
        }
    }
    for ((i, j), b) in platform.bandwidth_map() {
        let _ = writeln!(s, "bw {i} {j} {b}");
    }
    let _ = writeln!(s, "mu {}", platform.mu());
    s
}
