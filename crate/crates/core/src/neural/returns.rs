//! Return post-processing.
//!
//! `rewards[k]` is the reward emitted at clock `k + 1`. An action taken at
//! clock `s` is credited with the rewards emitted after it, starting at
//! `s + 1`, each discounted by its distance from that first clock.

use thiserror::Error;

/// Clocks an action's credit runs over: from its interaction clock to its
/// completion clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionWindow {
    pub start: u64,
    pub completion: Option<u64>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReturnError {
    #[error("action {0} has no completion clock and is not marked truncated")]
    MissingCompletion(usize),
    #[error("window of action {index} ends at clock {end}, past the {len} recorded rewards")]
    OutOfRange { index: usize, end: u64, len: usize },
}

/// `Σ_{clk = from+1}^{to} γ^(clk - from - 1) r_clk`.
pub fn discounted_window(rewards: &[f64], from: u64, to: u64, gamma: f64) -> f64 {
    let mut g = 0.0;
    let mut d = 1.0;
    for clk in from + 1..=to {
        g += d * rewards[(clk - 1) as usize];
        d *= gamma;
    }
    g
}

/// Per-action returns over each action's own window `(start, completion]`.
/// Truncated actions get `None`.
pub fn eim_returns(windows: &[ActionWindow], rewards: &[f64], gamma: f64) -> Result<Vec<Option<f64>>, ReturnError> {
    windows
        .iter()
        .enumerate()
        .map(|(index, w)| match w.completion {
            None if w.truncated => Ok(None),
            None => Err(ReturnError::MissingCompletion(index)),
            Some(end) if end as usize > rewards.len() => Err(ReturnError::OutOfRange {
                index,
                end,
                len: rewards.len(),
            }),
            Some(end) => Ok(Some(discounted_window(rewards, w.start, end, gamma))),
        })
        .collect()
}

/// Per-interaction returns that stop at the next interaction: step `t` at
/// clock `c_t` collects `(c_t, c_{t+1}]`, the last step runs to the end of
/// the reward stream. `steps` must be ascending.
pub fn standard_returns(steps: &[u64], rewards: &[f64], gamma: f64) -> Vec<f64> {
    let end = rewards.len() as u64;
    steps
        .iter()
        .enumerate()
        .map(|(t, &c)| {
            let next = steps.get(t + 1).copied().unwrap_or(end).min(end);
            discounted_window(rewards, c, next, gamma)
        })
        .collect()
}
