//! Processing elements, bandwidth and the per-task timing model.
//!
//! A task placed on PE `p` runs for `mu * comp(task, p) + delay`, where the
//! delay is the slowest parent transfer `w / B(parent_pe, p)`. Transfers
//! between tasks on the same PE are free.

mod profile;

use std::collections::BTreeMap;

use thiserror::Error;

pub use profile::{parse_resource_profile, write_resource_profile};

use crate::workload::{PeId, TaskTemplate};

/// One operating performance point: `(voltage, frequency)`.
pub type Opp = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessingElement {
    pub pe_id: PeId,
    pub name: String,
    pub opp: Vec<Opp>,
    /// Always the highest OPP frequency; frequency scaling is not modelled.
    pub active_frequency: f64,
}

impl ProcessingElement {
    pub fn new(pe_id: PeId, name: impl Into<String>, opp: Vec<Opp>) -> Self {
        let active_frequency = opp.iter().map(|&(_, f)| f).fold(f64::NAN, f64::max);
        Self {
            pe_id,
            name: name.into(),
            opp,
            active_frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlatformError {
    #[error("platform has no PEs")]
    NoPes,
    #[error("PE ids must be 0..{expected}; found {found} at position {expected}")]
    PeIdOrder { expected: usize, found: PeId },
    #[error("PE {0} has no operating points")]
    NoOpp(PeId),
    #[error("missing bandwidth {0} -> {1}")]
    MissingBandwidth(PeId, PeId),
    #[error("bandwidth {from} -> {to} must be positive, got {value}")]
    BadBandwidth { from: PeId, to: PeId, value: f64 },
    #[error("mu must be positive, got {0}")]
    BadMu(f64),
    #[error("task {task} is not supported on PE {pe}")]
    Unsupported { task: u32, pe: PeId },
}

/// The SoC: PEs, the directed bandwidth matrix and the execution-time scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    pes: Vec<ProcessingElement>,
    bandwidth: BTreeMap<(PeId, PeId), f64>,
    mu: f64,
}

impl Platform {
    /// Builds a platform; PE ids must equal their position and every ordered
    /// pair of distinct PEs needs a positive bandwidth.
    pub fn new(
        pes: Vec<ProcessingElement>,
        bandwidth: BTreeMap<(PeId, PeId), f64>,
        mu: f64,
    ) -> Result<Self, PlatformError> {
        if pes.is_empty() {
            return Err(PlatformError::NoPes);
        }
        for (i, pe) in pes.iter().enumerate() {
            if pe.pe_id != i {
                return Err(PlatformError::PeIdOrder {
                    expected: i,
                    found: pe.pe_id,
                });
            }
            if pe.opp.is_empty() {
                return Err(PlatformError::NoOpp(i));
            }
        }
        for i in 0..pes.len() {
            for j in 0..pes.len() {
                if i == j {
                    continue;
                }
                let b = *bandwidth.get(&(i, j)).ok_or(PlatformError::MissingBandwidth(i, j))?;
                if !(b.is_finite() && b > 0.0) {
                    return Err(PlatformError::BadBandwidth { from: i, to: j, value: b });
                }
            }
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(PlatformError::BadMu(mu));
        }
        Ok(Self { pes, bandwidth, mu })
    }

    /// Every distinct pair gets the same bandwidth.
    pub fn uniform(pes: Vec<ProcessingElement>, bandwidth: f64, mu: f64) -> Result<Self, PlatformError> {
        let q = pes.len();
        let bw = (0..q)
            .flat_map(|i| (0..q).filter(move |&j| j != i).map(move |j| ((i, j), bandwidth)))
            .collect();
        Self::new(pes, bw, mu)
    }

    pub fn pes(&self) -> &[ProcessingElement] {
        &self.pes
    }

    pub fn len(&self) -> usize {
        self.pes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pes.is_empty()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self, PlatformError> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(PlatformError::BadMu(mu));
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn bandwidth_map(&self) -> &BTreeMap<(PeId, PeId), f64> {
        &self.bandwidth
    }

    /// `None` for `from == to` (same-PE transfers are free) and unknown pairs.
    pub fn bandwidth(&self, from: PeId, to: PeId) -> Option<f64> {
        if from == to {
            None
        } else {
            self.bandwidth.get(&(from, to)).copied()
        }
    }

    /// Mean over ordered pairs of distinct PEs.
    pub fn mean_bandwidth(&self) -> Option<f64> {
        if self.bandwidth.is_empty() {
            return None;
        }
        Some(self.bandwidth.values().sum::<f64>() / self.bandwidth.len() as f64)
    }

    /// Transfer time of `weight` units from `from` to `to`.
    pub fn transfer_time(&self, from: PeId, to: PeId, weight: f64) -> Result<f64, PlatformError> {
        if from == to {
            return Ok(0.0);
        }
        let b = self
            .bandwidth
            .get(&(from, to))
            .ok_or(PlatformError::MissingBandwidth(from, to))?;
        Ok(weight / b)
    }

    /// Slowest parent transfer into `pe`. `parents` yields
    /// `(parent_pe, edge_weight)`.
    pub fn comm_delay(
        &self,
        pe: PeId,
        parents: impl IntoIterator<Item = (PeId, f64)>,
    ) -> Result<f64, PlatformError> {
        let mut worst = 0.0f64;
        for (ppe, w) in parents {
            worst = worst.max(self.transfer_time(ppe, pe, w)?);
        }
        Ok(worst)
    }

    /// `mu * comp(task, pe) + comm_delay`.
    pub fn exec_time(
        &self,
        task: &TaskTemplate,
        pe: PeId,
        parents: impl IntoIterator<Item = (PeId, f64)>,
    ) -> Result<f64, PlatformError> {
        let comp = task.cost(pe).ok_or(PlatformError::Unsupported {
            task: task.task_id,
            pe,
        })?;
        Ok(self.mu * comp + self.comm_delay(pe, parents)?)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn pes(n: usize) -> Vec<ProcessingElement> {
        (0..n).map(|i| ProcessingElement::new(i, format!("pe{i}"), vec![(0.9, 1.0), (1.1, 2.0)])).collect()
    }

    fn task(cost: f64) -> TaskTemplate {
        TaskTemplate::new(0, "t").with_cost(0, cost).with_cost(1, cost)
    }

    #[test]
    fn active_frequency_is_max_opp() {
        assert_eq!(pes(1)[0].active_frequency, 2.0);
    }

    #[test]
    fn comm_delay_examples() {
        let p = Platform::uniform(pes(3), 2.0, 1.0).unwrap();
        assert_eq!(p.comm_delay(0, [(0, 16.0), (0, 3.0)]).unwrap(), 0.0);
        assert_eq!(p.comm_delay(1, [(0, 16.0)]).unwrap(), 8.0);
        assert_eq!(p.comm_delay(2, [(0, 16.0), (1, 8.0)]).unwrap(), 8.0);
        assert_eq!(p.comm_delay(2, []).unwrap(), 0.0);
    }

    #[test]
    fn exec_time_examples() {
        let half = Platform::uniform(pes(2), 2.0, 0.5).unwrap();
        assert_eq!(half.exec_time(&task(10.0), 0, []).unwrap(), 5.0);
        let one = Platform::uniform(pes(2), 2.0, 1.0).unwrap();
        assert_eq!(one.exec_time(&task(10.0), 1, [(0, 16.0)]).unwrap(), 18.0);
        let only0 = TaskTemplate::new(3, "x").with_cost(0, 1.0);
        assert_eq!(
            one.exec_time(&only0, 1, []),
            Err(PlatformError::Unsupported { task: 3, pe: 1 })
        );
    }

    #[test]
    fn construction_checks() {
        assert_eq!(Platform::uniform(vec![], 1.0, 1.0), Err(PlatformError::NoPes));
        assert!(matches!(Platform::uniform(pes(2), 0.0, 1.0), Err(PlatformError::BadBandwidth { .. })));
        assert_eq!(Platform::uniform(pes(2), 1.0, 0.0), Err(PlatformError::BadMu(0.0)));
        let mut bw = BTreeMap::new();
        bw.insert((0, 1), 1.0);
        assert_eq!(Platform::new(pes(2), bw, 1.0), Err(PlatformError::MissingBandwidth(1, 0)));
        let mut shuffled = pes(2);
        shuffled.swap(0, 1);
        assert!(matches!(Platform::uniform(shuffled, 1.0, 1.0), Err(PlatformError::PeIdOrder { .. })));
    }

    proptest! {
        #[test]
        fn exec_time_is_monotone(
            comp in 0.0f64..100.0, dcomp in 0.0f64..10.0,
            mu in 0.1f64..4.0, dmu in 0.0f64..1.0,
            w in 0.0f64..50.0, dw in 0.0f64..5.0,
            bw in 0.5f64..8.0, dbw in 0.0f64..4.0,
        ) {
            let t = |c: f64| TaskTemplate::new(0, "t").with_cost(1, c);
            let base = Platform::uniform(pes(2), bw, mu).unwrap();
            let e0 = base.exec_time(&t(comp), 1, [(0, w)]).unwrap();
            prop_assert!(base.exec_time(&t(comp + dcomp), 1, [(0, w)]).unwrap() >= e0);
            prop_assert!(base.exec_time(&t(comp), 1, [(0, w + dw)]).unwrap() >= e0);
            let slower = Platform::uniform(pes(2), bw, mu + dmu).unwrap();
            prop_assert!(slower.exec_time(&t(comp), 1, [(0, w)]).unwrap() >= e0);
            let wider = Platform::uniform(pes(2), bw + dbw, mu).unwrap();
            prop_assert!(wider.exec_time(&t(comp), 1, [(0, w)]).unwrap() <= e0);
            prop_assert_eq!(base.comm_delay(1, [(1, w), (1, w + dw)]).unwrap(), 0.0);
        }
    }
}
