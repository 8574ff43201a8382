//! Rule mining driven by correspondence-analysis scores.
//!
//! For each label `k` the miner seeds a candidate set with single literals
//! whose cosine `ρ_{l,k}` and class support clear the floors, then grows
//! rules one literal at a time up to `r_max`. Two cuts keep the search small:
//! support is monotone under extension, and a rule whose mean score is below
//! `m_k(|r|)` cannot reach the current score floor even with the best
//! literal appended. The score floor rises to the `M`-th best score found so
//! far once `M` candidates exist.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rayon::prelude::*;

use super::{rank_order, BudgetClock, MineError, MinedRules, MinerConfig, RuleMiner};
use crate::bitset::RowSet;
use crate::dataset::{CategoricalDataset, Literal};
use crate::mca::{self, McaModel, ScoreTable};
use crate::rule::{Rule, ScoredRule};

/// Mean literal score of `rule` for `label`.
pub fn rule_score(rule: &Rule, scores: &ScoreTable, label: usize) -> Result<f64, MineError> {
    let mut sum = 0.0;
    for &l in rule.literals() {
        sum += scores.get(l, label).ok_or(MineError::UndefinedScore(l))?;
    }
    Ok(sum / rule.len() as f64)
}

/// `m_k(|r|) = ((|r| + 1) μ_min − ρ̄_k) / |r|`: the least mean score a rule
/// of length `current_len` needs for some one-literal extension to reach
/// `mu_min`.
pub fn score_bound(current_len: usize, mu_min: f64, rho_bar: f64) -> f64 {
    let len = current_len as f64;
    ((len + 1.0) * mu_min - rho_bar) / len
}

#[derive(Clone, Copy)]
struct Score(f64);

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The `M` largest scores seen so far.
struct TopScores {
    m: usize,
    heap: BinaryHeap<Reverse<Score>>,
}

impl TopScores {
    fn new(m: usize) -> Self {
        Self {
            m,
            heap: BinaryHeap::with_capacity(m + 1),
        }
    }

    fn push(&mut self, score: f64) {
        self.heap.push(Reverse(Score(score)));
        if self.heap.len() > self.m {
            self.heap.pop();
        }
    }

    fn mth(&self) -> Option<f64> {
        (self.heap.len() == self.m).then(|| self.heap.peek().expect("non-empty").0 .0)
    }
}

struct Candidate {
    rule: Rule,
    score: f64,
    support: f64,
    /// Class rows on which the rule holds.
    rows: RowSet,
}

struct LabelContext<'a> {
    literals: Vec<(Literal, f64, &'a RowSet)>,
    class_rows: RowSet,
    class_size: usize,
}

fn mine_label(
    ctx: &LabelContext<'_>,
    scores: &ScoreTable,
    label: usize,
    config: &MinerConfig,
    clock: &BudgetClock,
) -> Result<Vec<ScoredRule>, MineError> {
    if ctx.class_size == 0 {
        return Err(MineError::EmptyLabelClass(label));
    }
    let Some(rho_bar) = ctx.literals.iter().map(|l| l.1).reduce(f64::max) else {
        return Ok(Vec::new());
    };
    let floor = config.mu_min;
    let class_size = ctx.class_size as f64;
    let score_of = |rule: &Rule| -> Result<f64, MineError> {
        let s = rule_score(rule, scores, label)?;
        Ok(if config.signed { s } else { s.abs() })
    };

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut seen: HashSet<Rule> = HashSet::new();
    let mut top = TopScores::new(config.top_m);

    for &(literal, rho, rows) in &ctx.literals {
        let support = rows.intersection_count(&ctx.class_rows) as f64 / class_size;
        let rule = Rule::single(literal);
        seen.insert(rule.clone());
        if rho >= floor && support >= config.s_min {
            let mut class_rows = rows.clone();
            class_rows.intersect_with(&ctx.class_rows);
            top.push(rho);
            candidates.push(Candidate {
                rule,
                score: rho,
                support,
                rows: class_rows,
            });
        }
    }

    for eta in 1..config.r_max {
        let current: Vec<usize> = (0..candidates.len())
            .filter(|&i| candidates[i].rule.len() == eta)
            .collect();
        for idx in current {
            clock.check_time()?;
            let mu_min = top.mth().map_or(floor, |m| m.max(floor));
            if candidates[idx].score < score_bound(eta, mu_min, rho_bar) {
                continue;
            }
            for &(literal, _, rows) in &ctx.literals {
                let Some(extended) = candidates[idx].rule.extend(literal) else {
                    continue;
                };
                if !seen.insert(extended.clone()) {
                    continue;
                }
                let score = score_of(&extended)?;
                if score < mu_min {
                    continue;
                }
                let parent = &candidates[idx].rows;
                let hits = parent.intersection_count(rows);
                let support = hits as f64 / class_size;
                if support < config.s_min {
                    continue;
                }
                let mut ext_rows = parent.clone();
                ext_rows.intersect_with(rows);
                top.push(score);
                candidates.push(Candidate {
                    rule: extended,
                    score,
                    support,
                    rows: ext_rows,
                });
            }
        }
    }

    let mut ranked: Vec<ScoredRule> = candidates
        .into_iter()
        .map(|c| ScoredRule {
            rule: c.rule,
            label,
            score: c.score,
            support: c.support,
        })
        .collect();
    ranked.sort_by(rank_order);
    ranked.truncate(config.top_m);
    Ok(ranked)
}

/// Mines the top-`M` rules of every label from a fitted model.
///
/// Literals whose score is undefined for a label (zero-norm coordinates, or
/// a category absent from the data) never enter that label's rules.
pub fn mine(
    dataset: &CategoricalDataset,
    model: &McaModel,
    config: &MinerConfig,
) -> Result<MinedRules, MineError> {
    let scores = ScoreTable::new(model, dataset);
    mine_with_scores(dataset, &scores, config)
}

/// Same as [`mine`] with a precomputed (or hand-made) score table.
pub fn mine_with_scores(
    dataset: &CategoricalDataset,
    scores: &ScoreTable,
    config: &MinerConfig,
) -> Result<MinedRules, MineError> {
    config.validate()?;
    let clock = config.budget.clock();
    let literal_rows: Vec<RowSet> = scores
        .literals()
        .iter()
        .map(|&l| dataset.literal_rows(l))
        .collect();
    let per_label: Vec<Vec<ScoredRule>> = (0..dataset.n_labels())
        .into_par_iter()
        .map(|label| {
            let literals = scores
                .literals()
                .iter()
                .enumerate()
                .filter_map(|(i, &l)| {
                    scores.by_index(i, label).map(|rho| {
                        let rho = if config.signed { rho } else { rho.abs() };
                        (l, rho, &literal_rows[i])
                    })
                })
                .collect();
            let class_rows = dataset.label_rows(label);
            let ctx = LabelContext {
                literals,
                class_size: class_rows.count(),
                class_rows,
            };
            mine_label(&ctx, scores, label, config, &clock)
        })
        .collect::<Result<_, _>>()?;
    let mined = MinedRules::from_per_label(per_label);
    if mined.is_empty() {
        return Err(MineError::EmptyResult);
    }
    Ok(mined)
}

/// The correspondence-analysis miner.
#[derive(Clone, Copy, Debug, Default)]
pub struct McaMiner;

impl RuleMiner for McaMiner {
    fn name(&self) -> &'static str {
        "mca"
    }

    fn description(&self) -> &'static str {
        "cosine scores from correspondence analysis of [X Y], top M rules per label"
    }

    fn mine(
        &self,
        dataset: &CategoricalDataset,
        config: &MinerConfig,
    ) -> Result<MinedRules, MineError> {
        config.validate()?;
        let model = mca::fit_dataset(dataset, &(&config.mca).into())?;
        mine(dataset, &model, config)
    }
}
