//! Bayesian rule lists fitted by Metropolis–Hastings over orderings of mined
//! rules.
//!
//! The posterior of a list `d` is `p(d) · p(Y | X, d)`. The prior draws the
//! list length from a Poisson(λ) truncated to the achievable lengths, and
//! for each position a rule cardinality from a Poisson(η) truncated to the
//! cardinalities that still have unused rules, then a rule uniformly among
//! the unused ones of that cardinality. Each clause's captured labels are
//! Dirichlet–multinomial with pseudo-counts α.
//!
//! Several chains run concurrently; every `check_interval` iterations the
//! coordinator computes the Gelman–Rubin statistic over their log-posterior
//! traces and stops once it drops to the threshold.

mod chain;
mod diagnostics;
mod proposal;
mod rule_list;
mod space;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use chain::{run_chain, Chain, ChainTrace, Sample};
pub use diagnostics::gelman_rubin;
pub use proposal::{propose, Move, Proposal, StandardMoves, StayPut};
pub use rule_list::{capture_counts, RuleList};
pub use space::{log_posterior, RuleSpace};
pub use train::{train, train_with, Diagnostics, StopReason, TrainOutcome};

#[derive(Debug, Error, PartialEq)]
pub enum BrlError {
    #[error("rule {0} is not in the mined rule set")]
    UnknownRule(String),
    #[error("the mined rule set is empty")]
    NoRules,
    #[error("no valid move from the current state")]
    NoValidMove,
    #[error("Gelman-Rubin needs at least 2 chains, got {0}")]
    TooFewChains(usize),
    #[error("traces must have equal length of at least 4 (got {0:?})")]
    BadTraceLengths(Vec<usize>),
    #[error("invalid BRL config: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BrlConfig {
    /// Prior expected list length.
    pub lambda: f64,
    /// Prior expected rule cardinality.
    pub eta_card: f64,
    /// Dirichlet pseudo-counts, one per label. `None` means all ones.
    pub alpha: Option<Vec<f64>>,
    pub n_chains: usize,
    pub max_iters: usize,
    pub check_interval: usize,
    pub rhat_threshold: f64,
    pub seed: u64,
    /// Upper bound on list length; `None` allows every mined rule.
    pub max_list_len: Option<usize>,
    /// Keep every `thin`-th state of each chain.
    pub thin: usize,
    /// Run chains on the rayon pool rather than one after another.
    pub parallel: bool,
}

impl Default for BrlConfig {
    fn default() -> Self {
        Self {
            lambda: 3.0,
            eta_card: 1.0,
            alpha: None,
            n_chains: 4,
            max_iters: 200_000,
            check_interval: 1_000,
            rhat_threshold: 1.05,
            seed: 0,
            max_list_len: None,
            thin: 10,
            parallel: true,
        }
    }
}

impl BrlConfig {
    pub fn alpha_for(&self, n_labels: usize) -> Result<Vec<f64>, BrlError> {
        match &self.alpha {
            None => Ok(vec![1.0; n_labels]),
            Some(a) if a.len() == n_labels && a.iter().all(|&v| v > 0.0) => Ok(a.clone()),
            Some(a) => Err(BrlError::InvalidConfig(format!(
                "alpha needs {n_labels} positive entries, got {a:?}"
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), BrlError> {
        if self.lambda.is_nan()
            || self.lambda <= 0.0
            || self.eta_card.is_nan()
            || self.eta_card <= 0.0
        {
            return Err(BrlError::InvalidConfig(
                "lambda and eta must be positive".into(),
            ));
        }
        if self.n_chains == 0 {
            return Err(BrlError::InvalidConfig("need at least one chain".into()));
        }
        if self.rhat_threshold.is_nan() || self.rhat_threshold <= 1.0 {
            return Err(BrlError::InvalidConfig(
                "rhat threshold must exceed 1".into(),
            ));
        }
        if self.check_interval == 0 || self.thin == 0 {
            return Err(BrlError::InvalidConfig(
                "check interval and thinning must be positive".into(),
            ));
        }
        Ok(())
    }
}
