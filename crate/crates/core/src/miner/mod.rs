//! Candidate rule mining.
//!
//! Every miner implements [`RuleMiner`] and is looked up by name through a
//! [`MinerRegistry`]; `mca` scores rules by correspondence-analysis cosines,
//! `apriori` is the frequency-based baseline.

mod apriori;
mod mca_miner;
mod registry;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::CategoricalDataset;
use crate::mca::{McaError, McaOptions};
use crate::rule::{Rule, ScoredRule};

pub use apriori::{apriori_mine, AprioriMiner};
pub use mca_miner::{mine, mine_with_scores, rule_score, score_bound, McaMiner};
pub use registry::MinerRegistry;

#[derive(Debug, Error)]
pub enum MineError {
    #[error("no rule passed the support and score floors")]
    EmptyResult,
    #[error("budget exceeded after {elapsed:?}: {reason}")]
    BudgetExceeded { elapsed: Duration, reason: String },
    #[error("label {0} has no samples")]
    EmptyLabelClass(usize),
    #[error("literal score undefined for {0:?}")]
    UndefinedScore(crate::dataset::Literal),
    #[error("invalid miner config: {0}")]
    InvalidConfig(String),
    #[error("unknown miner `{0}`")]
    UnknownMiner(String),
    #[error(transparent)]
    Mca(#[from] McaError),
}

/// Wall-clock and size limits; exceeding either aborts the run with
/// [`MineError::BudgetExceeded`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Budget {
    pub max_seconds: Option<f64>,
    /// Cap on candidate itemsets held at once.
    pub max_candidates: Option<usize>,
}

impl Budget {
    pub(crate) fn clock(&self) -> BudgetClock {
        BudgetClock {
            start: Instant::now(),
            limit: self.max_seconds.map(Duration::from_secs_f64),
            max_candidates: self.max_candidates,
        }
    }
}

pub(crate) struct BudgetClock {
    start: Instant,
    limit: Option<Duration>,
    max_candidates: Option<usize>,
}

impl BudgetClock {
    pub(crate) fn check_time(&self) -> Result<(), MineError> {
        let elapsed = self.start.elapsed();
        match self.limit {
            Some(limit) if elapsed > limit => Err(MineError::BudgetExceeded {
                elapsed,
                reason: format!("wall clock over {limit:?}"),
            }),
            _ => Ok(()),
        }
    }

    pub(crate) fn check_candidates(&self, held: usize) -> Result<(), MineError> {
        match self.max_candidates {
            Some(max) if held > max => Err(MineError::BudgetExceeded {
                elapsed: self.start.elapsed(),
                reason: format!("{held} candidates exceed the cap of {max}"),
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinerConfig {
    pub r_max: usize,
    pub s_min: f64,
    pub mu_min: f64,
    /// Rules kept per label (`M`).
    pub top_m: usize,
    /// Score literals by signed cosine. When false, `|ρ|` is used.
    pub signed: bool,
    pub mca: McaOptionsConfig,
    pub budget: Budget,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct McaOptionsConfig {
    pub components: Option<usize>,
}

impl From<&McaOptionsConfig> for McaOptions {
    fn from(c: &McaOptionsConfig) -> Self {
        McaOptions {
            components: c.components,
        }
    }
}

impl Default for MinerConfig {
    fn default() -> Self {
        Self {
            r_max: 2,
            s_min: 0.3,
            mu_min: 0.5,
            top_m: 70,
            signed: true,
            mca: McaOptionsConfig::default(),
            budget: Budget::default(),
        }
    }
}

impl MinerConfig {
    pub fn validate(&self) -> Result<(), MineError> {
        if self.r_max < 1 {
            return Err(MineError::InvalidConfig("r_max must be at least 1".into()));
        }
        if self.top_m < 1 {
            return Err(MineError::InvalidConfig("M must be at least 1".into()));
        }
        if self.s_min.is_nan() || self.s_min <= 0.0 {
            return Err(MineError::InvalidConfig("s_min must be positive".into()));
        }
        if self.mu_min.is_nan() {
            return Err(MineError::InvalidConfig("mu_min is NaN".into()));
        }
        Ok(())
    }
}

/// Output of a miner: the ranked rules of each label and their union with
/// duplicates removed (first occurrence in label order wins).
#[derive(Clone, Debug, PartialEq)]
pub struct MinedRules {
    per_label: Vec<Vec<ScoredRule>>,
    union: Vec<ScoredRule>,
}

impl MinedRules {
    pub fn from_per_label(per_label: Vec<Vec<ScoredRule>>) -> Self {
        let mut seen = HashSet::new();
        let union = per_label
            .iter()
            .flatten()
            .filter(|sr| seen.insert(sr.rule.clone()))
            .cloned()
            .collect();
        Self { per_label, union }
    }

    pub fn per_label(&self) -> &[Vec<ScoredRule>] {
        &self.per_label
    }

    pub fn rules(&self) -> &[ScoredRule] {
        &self.union
    }

    pub fn into_rules(self) -> Vec<ScoredRule> {
        self.union
    }

    pub fn len(&self) -> usize {
        self.union.len()
    }

    pub fn is_empty(&self) -> bool {
        self.union.is_empty()
    }
}

/// A named rule-mining strategy.
pub trait RuleMiner: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn mine(
        &self,
        dataset: &CategoricalDataset,
        config: &MinerConfig,
    ) -> Result<MinedRules, MineError>;
}

/// Fraction of class-`label` rows on which `rule` holds.
pub fn support(rule: &Rule, dataset: &CategoricalDataset, label: usize) -> Result<f64, MineError> {
    let mut in_class = 0usize;
    let mut hits = 0usize;
    for (row, &y) in dataset.rows().zip(dataset.labels()) {
        if y as usize == label {
            in_class += 1;
            if rule.matches(row) {
                hits += 1;
            }
        }
    }
    if in_class == 0 {
        return Err(MineError::EmptyLabelClass(label));
    }
    Ok(hits as f64 / in_class as f64)
}

/// Ranking used everywhere rules are cut to a top-`M` list: score
/// descending, then shorter rules, then canonical rule order.
pub(crate) fn rank_order(a: &ScoredRule, b: &ScoredRule) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.rule.len().cmp(&b.rule.len()))
        .then_with(|| a.rule.cmp(&b.rule))
}
