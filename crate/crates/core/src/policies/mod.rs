//! Sample-allocation policies.
//!
//! Fixed allocations (vanilla SC, the Lagrangian closed form and greedy
//! allocation over per-question error curves), per-question stopping rules
//! (ASC, PPR-1v1, ESC) and the budgeted heap scheduler that drives ASC,
//! PPR-1v1 and Blend-ASC to an exact total budget.

mod fixed;
mod scheduler;
mod stopping;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fixed::{
    convexify_curve, greedy_fixed_allocation, lagrangian_allocation, lagrangian_budget,
    lagrangian_error, vanilla_sc, ConvexCurve, ErrorModel, LagrangianAllocation,
};
pub use scheduler::{
    blend_step, run_dynamic, DynamicPolicy, SchedulerState, Snapshot, Trajectory,
    BLEND_EXCLUSION_FACTOR,
};
pub use stopping::{
    asc_confidence, asc_stop, esc_run, ln_asc_statistic, ln_ppr_statistic, ppr_confidence,
    ppr_confidence_with, ppr_stop, run_ppr_uncapped, EscOutcome, PprOutcome,
};

/// How `K̂` enters the PPR-1v1 statistic `(K − 1) Beta(1/2; n1+1, n2+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KRule {
    /// `K = max(2, K̂)`.
    #[default]
    Max,
    /// `K = min(2, K̂)`, the literal reading; zero statistic once only one answer is seen.
    LiteralMin,
}

impl KRule {
    pub fn effective_k(self, distinct: usize) -> usize {
        match self {
            KRule::Max => distinct.max(2),
            KRule::LiteralMin => distinct.min(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingConfig {
    /// PPR-1v1 target error δ.
    pub delta: f64,
    /// ASC threshold τ.
    pub tau: f64,
    /// Per-question sample cap; `None` means uncapped.
    pub max_per_question: Option<u64>,
    pub k_rule: KRule,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            tau: 0.05,
            max_per_question: None,
            k_rule: KRule::Max,
        }
    }
}

impl StoppingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in (0,1), got {}", self.tau)));
        }
        if self.max_per_question == Some(0) {
            return Err(Error::Config("max_per_question must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscConfig {
    pub window: u64,
    pub max_per_question: u64,
}

impl Default for EscConfig {
    fn default() -> Self {
        Self {
            window: 8,
            max_per_question: 512,
        }
    }
}

impl EscConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::Config(format!("ESC window must be >= 2, got {}", self.window)));
        }
        if self.max_per_question == 0 {
            return Err(Error::Config("ESC max_per_question must be positive".into()));
        }
        Ok(())
    }
}

/// Per-question sample counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub counts: Vec<u64>,
    pub average: f64,
}

impl Allocation {
    pub fn new(counts: Vec<u64>) -> Self {
        let average = if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<u64>() as f64 / counts.len() as f64
        };
        Self { counts, average }
    }

    pub fn uniform(n: usize, x: u64) -> Self {
        Self::new(vec![x; n])
    }

    /// `total` samples spread as evenly as possible, extras to the lowest indices.
    pub fn even_split(n: usize, total: u64) -> Self {
        let base = total / n as u64;
        let extra = (total % n as u64) as usize;
        Self::new((0..n).map(|i| base + u64::from(i < extra)).collect())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_average_is_mean() {
        let a = Allocation::new(vec![1, 2, 6]);
        assert_eq!(a.average, 3.0);
        assert_eq!(a.total(), 9);
        let e = Allocation::even_split(3, 8);
        assert_eq!(e.counts, vec![3, 3, 2]);
    }

    #[test]
    fn config_validation() {
        assert!(StoppingConfig::default().validate().is_ok());
        assert!(StoppingConfig { delta: 1.0, ..Default::default() }.validate().is_err());
        assert!(StoppingConfig { max_per_question: Some(0), ..Default::default() }.validate().is_err());
        assert!(EscConfig { window: 1, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn k_rules() {
        assert_eq!(KRule::Max.effective_k(1), 2);
        assert_eq!(KRule::Max.effective_k(5), 5);
        assert_eq!(KRule::LiteralMin.effective_k(1), 1);
        assert_eq!(KRule::LiteralMin.effective_k(5), 2);
    }
}
