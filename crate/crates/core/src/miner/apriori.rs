//! Level-wise frequent itemset mining, run separately on each label class.
//!
//! Candidates of size `k` are joined from frequent `(k-1)`-itemsets sharing a
//! `(k-2)`-prefix, pruned when any `(k-1)`-subset is infrequent, and counted
//! by enumerating the `k`-subsets of every transaction.

use std::collections::{HashMap, HashSet};

use super::{rank_order, BudgetClock, MineError, MinedRules, MinerConfig, RuleMiner};
use crate::dataset::{CategoricalDataset, Literal};
use crate::rule::{Rule, ScoredRule};

type Itemset = Vec<u32>;

struct ItemIndex {
    literals: Vec<Literal>,
    offsets: Vec<usize>,
}

impl ItemIndex {
    fn new(dataset: &CategoricalDataset) -> Self {
        let mut offsets = Vec::with_capacity(dataset.n_attributes());
        let mut acc = 0;
        for s in dataset.schemas() {
            offsets.push(acc);
            acc += s.categories.len();
        }
        Self {
            literals: dataset.literals(),
            offsets,
        }
    }

    fn item(&self, attribute: usize, category: u32) -> u32 {
        (self.offsets[attribute] + category as usize) as u32
    }

    fn attribute(&self, item: u32) -> usize {
        self.literals[item as usize].attribute
    }
}

/// Calls `f` on every `k`-subset of `items` (ascending), reusing `buf`.
fn for_each_subset(items: &[u32], k: usize, buf: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    fn rec(items: &[u32], start: usize, k: usize, buf: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        let need = k - buf.len();
        for i in start..=items.len().saturating_sub(need) {
            if i >= items.len() {
                break;
            }
            buf.push(items[i]);
            rec(items, i + 1, k, buf, f);
            buf.pop();
        }
    }
    buf.clear();
    rec(items, 0, k, buf, f);
}

fn generate_candidates(
    frequent: &[Itemset],
    index: &ItemIndex,
    clock: &BudgetClock,
) -> Result<Vec<Itemset>, MineError> {
    let known: HashSet<&[u32]> = frequent.iter().map(Vec::as_slice).collect();
    let mut out = Vec::new();
    for (i, a) in frequent.iter().enumerate() {
        let prefix = &a[..a.len() - 1];
        for b in &frequent[i + 1..] {
            if &b[..b.len() - 1] != prefix {
                break;
            }
            let (x, y) = (a[a.len() - 1], b[b.len() - 1]);
            if index.attribute(x) == index.attribute(y) {
                continue;
            }
            let mut cand = a.clone();
            cand.push(y);
            let all_subsets_frequent = (0..cand.len()).all(|skip| {
                let sub: Vec<u32> = cand
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &v)| v)
                    .collect();
                known.contains(sub.as_slice())
            });
            if all_subsets_frequent {
                out.push(cand);
                clock.check_candidates(out.len())?;
            }
        }
        if i % 256 == 0 {
            clock.check_time()?;
        }
    }
    Ok(out)
}

/// Frequent itemsets of one class, with their class counts.
fn frequent_itemsets(
    transactions: &[Vec<u32>],
    n_items: usize,
    min_count: impl Fn(usize) -> bool,
    r_max: usize,
    index: &ItemIndex,
    clock: &BudgetClock,
) -> Result<Vec<(Itemset, usize)>, MineError> {
    let mut counts = vec![0usize; n_items];
    for t in transactions {
        for &item in t {
            counts[item as usize] += 1;
        }
    }
    let mut level: Vec<Itemset> = (0..n_items as u32)
        .filter(|&i| min_count(counts[i as usize]))
        .map(|i| vec![i])
        .collect();
    let mut result: Vec<(Itemset, usize)> = level
        .iter()
        .map(|s| (s.clone(), counts[s[0] as usize]))
        .collect();
    let frequent_items: HashSet<u32> = level.iter().map(|s| s[0]).collect();
    let pruned: Vec<Vec<u32>> = transactions
        .iter()
        .map(|t| {
            t.iter()
                .copied()
                .filter(|i| frequent_items.contains(i))
                .collect()
        })
        .collect();

    let mut buf = Vec::new();
    for k in 2..=r_max {
        if level.len() < 2 {
            break;
        }
        let candidates = generate_candidates(&level, index, clock)?;
        if candidates.is_empty() {
            break;
        }
        let mut table: HashMap<Itemset, usize> = candidates.into_iter().map(|c| (c, 0)).collect();
        for (ti, t) in pruned.iter().enumerate() {
            if t.len() < k {
                continue;
            }
            for_each_subset(t, k, &mut buf, &mut |sub| {
                if let Some(c) = table.get_mut(sub) {
                    *c += 1;
                }
            });
            if ti % 64 == 0 {
                clock.check_time()?;
            }
        }
        let mut next: Vec<(Itemset, usize)> =
            table.into_iter().filter(|(_, c)| min_count(*c)).collect();
        next.sort();
        level = next.iter().map(|(s, _)| s.clone()).collect();
        result.extend(next);
    }
    Ok(result)
}

/// Emits every rule (up to `r_max` literals) whose support in some label
/// class reaches `s_min`, scored by confidence `P(label | rule)`.
pub fn apriori_mine(
    dataset: &CategoricalDataset,
    config: &MinerConfig,
) -> Result<MinedRules, MineError> {
    config.validate()?;
    let clock = config.budget.clock();
    let index = ItemIndex::new(dataset);
    let n_items = index.literals.len();
    let label_counts = dataset.label_counts();
    let mut per_label = Vec::with_capacity(dataset.n_labels());
    for (label, &class_size) in label_counts.iter().enumerate() {
        if class_size == 0 {
            return Err(MineError::EmptyLabelClass(label));
        }
        let transactions: Vec<Vec<u32>> = dataset
            .rows()
            .zip(dataset.labels())
            .filter(|(_, &y)| y as usize == label)
            .map(|(row, _)| {
                row.iter()
                    .enumerate()
                    .map(|(a, &c)| index.item(a, c))
                    .collect()
            })
            .collect();
        let class = class_size as f64;
        let s_min = config.s_min;
        let frequent = frequent_itemsets(
            &transactions,
            n_items,
            |count| count as f64 / class >= s_min,
            config.r_max,
            &index,
            &clock,
        )?;
        let mut rules: Vec<ScoredRule> = frequent
            .into_iter()
            .map(|(items, count)| {
                let rule = Rule::new(items.iter().map(|&i| index.literals[i as usize]).collect())
                    .expect("itemsets never repeat an attribute");
                let covered = rule.rows(dataset).count();
                ScoredRule {
                    label,
                    score: count as f64 / covered as f64,
                    support: count as f64 / class,
                    rule,
                }
            })
            .collect();
        rules.sort_by(rank_order);
        per_label.push(rules);
    }
    Ok(MinedRules::from_per_label(per_label))
}

/// The frequency-based baseline.
#[derive(Clone, Copy, Debug, Default)]
pub struct AprioriMiner;

impl RuleMiner for AprioriMiner {
    fn name(&self) -> &'static str {
        "apriori"
    }

    fn description(&self) -> &'static str {
        "level-wise frequent itemsets per label class, all frequent rules kept"
    }

    fn mine(
        &self,
        dataset: &CategoricalDataset,
        config: &MinerConfig,
    ) -> Result<MinedRules, MineError> {
        apriori_mine(dataset, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::schema;
    use crate::miner::{support, Budget};

    fn subsets(items: &[u32], k: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut buf = Vec::new();
        for_each_subset(items, k, &mut buf, &mut |s| out.push(s.to_vec()));
        out
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(
            subsets(&[1, 2, 3], 2),
            vec![vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(subsets(&[1, 2], 3), Vec::<Vec<u32>>::new());
        assert_eq!(subsets(&[4, 5, 6, 7], 4).len(), 1);
    }

    fn constant_per_label() -> CategoricalDataset {
        // Attribute values are fixed within each label, so every literal has
        // support 1.0 for one label.
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..6 {
            let k = (i % 2) as u32;
            x.extend_from_slice(&[k, k, k]);
            y.push(k);
        }
        CategoricalDataset::new(
            vec![
                schema("a", &["0", "1"]),
                schema("b", &["0", "1"]),
                schema("c", &["0", "1"]),
            ],
            "y",
            vec!["0".into(), "1".into()],
            x,
            y,
        )
        .unwrap()
    }

    #[test]
    fn no_pruning_emits_every_cross_attribute_pair() {
        let ds = constant_per_label();
        let mined = apriori_mine(&ds, &MinerConfig::default()).unwrap();
        // Per label: 3 singletons + 3 pairs; the pairs use that label's categories.
        for rules in mined.per_label() {
            assert_eq!(rules.iter().filter(|r| r.rule.len() == 1).count(), 3);
            assert_eq!(rules.iter().filter(|r| r.rule.len() == 2).count(), 3);
            for r in rules {
                assert_eq!(r.support, 1.0);
                assert_eq!(r.score, 1.0);
            }
        }
        assert_eq!(mined.len(), 12);
    }

    #[test]
    fn impossible_support_is_empty() {
        let ds = constant_per_label();
        let config = MinerConfig {
            s_min: 1.01,
            ..MinerConfig::default()
        };
        assert!(apriori_mine(&ds, &config).unwrap().is_empty());
    }

    #[test]
    fn supports_agree_with_direct_count() {
        let ds = constant_per_label().subset(&[0, 1, 2, 3, 5]);
        let mined = apriori_mine(
            &ds,
            &MinerConfig {
                r_max: 3,
                ..MinerConfig::default()
            },
        )
        .unwrap();
        for sr in mined.per_label().iter().flatten() {
            assert_eq!(sr.support, support(&sr.rule, &ds, sr.label).unwrap());
        }
    }

    #[test]
    fn candidate_budget_is_reported() {
        let ds = constant_per_label();
        let config = MinerConfig {
            budget: Budget {
                max_seconds: None,
                max_candidates: Some(1),
            },
            ..MinerConfig::default()
        };
        assert!(matches!(
            apriori_mine(&ds, &config),
            Err(MineError::BudgetExceeded { .. })
        ));
    }
}
