use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Per-clock reward shapes. All of them pay `c1` per job completed at the
/// clock; they differ in when that is paid and whether a clock penalty applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    /// `c1 * completed + c2 * clk`
    Dense,
    /// `c1 * completed`
    Dense2,
    /// `c1 * completed` inside the final `m` clocks, else 0.
    Sparse,
    /// `c1 * completed` at the last clock only.
    Sparse2,
}

impl FromStr for RewardKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dense" => Ok(Self::Dense),
            "dense2" => Ok(Self::Dense2),
            "sparse" => Ok(Self::Sparse),
            "sparse2" => Ok(Self::Sparse2),
            other => Err(format!("unknown reward kind `{other}`")),
        }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dense => "dense",
            Self::Dense2 => "dense2",
            Self::Sparse => "sparse",
            Self::Sparse2 => "sparse2",
        })
    }
}

/// Reward emitted at clock `clk` (1-based) of an episode of `horizon` clocks.
pub fn reward(clk: u64, completed: usize, kind: RewardKind, c1: f64, c2: f64, window: u64, horizon: u64) -> f64 {
    debug_assert!((1..=horizon).contains(&clk));
    let bonus = c1 * completed as f64;
    match kind {
        RewardKind::Dense => bonus + c2 * clk as f64,
        RewardKind::Dense2 => bonus,
        RewardKind::Sparse if clk >= horizon.saturating_sub(window) => bonus,
        RewardKind::Sparse => 0.0,
        RewardKind::Sparse2 if clk == horizon => bonus,
        RewardKind::Sparse2 => 0.0,
    }
}
