use serde::{Deserialize, Serialize};

use crate::dataset::CategoricalDataset;
use crate::rule::Rule;

/// Label counts captured by each clause under first-match semantics, by a
/// plain row scan. The last row is the default clause.
pub fn capture_counts(rules: &[Rule], dataset: &CategoricalDataset) -> Vec<Vec<usize>> {
    let mut counts = vec![vec![0; dataset.n_labels()]; rules.len() + 1];
    for (row, &y) in dataset.rows().zip(dataset.labels()) {
        let clause = rules
            .iter()
            .position(|r| r.matches(row))
            .unwrap_or(rules.len());
        counts[clause][y as usize] += 1;
    }
    counts
}

/// An ordered if / else-if / else classifier with per-clause label counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleList {
    pub rules: Vec<Rule>,
    /// `(m + 1) × ℓ`, default clause last.
    pub counts: Vec<Vec<usize>>,
    pub alpha: Vec<f64>,
}

impl RuleList {
    pub fn fit(rules: Vec<Rule>, dataset: &CategoricalDataset, alpha: Vec<f64>) -> Self {
        let counts = capture_counts(&rules, dataset);
        Self {
            rules,
            counts,
            alpha,
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Index of the first clause that fires, `len()` for the default.
    pub fn clause_for(&self, row: &[u32]) -> usize {
        self.rules
            .iter()
            .position(|r| r.matches(row))
            .unwrap_or(self.rules.len())
    }

    /// `(N_j + α) / Σ(N_j + α)` for clause `j`.
    pub fn clause_probabilities(&self, clause: usize) -> Vec<f64> {
        let smoothed: Vec<f64> = self.counts[clause]
            .iter()
            .zip(&self.alpha)
            .map(|(&c, &a)| c as f64 + a)
            .collect();
        let total: f64 = smoothed.iter().sum();
        smoothed.into_iter().map(|v| v / total).collect()
    }

    pub fn predict_proba(&self, row: &[u32]) -> Vec<f64> {
        self.clause_probabilities(self.clause_for(row))
    }

    /// Most probable label; ties go to the lower index.
    pub fn predict(&self, row: &[u32]) -> usize {
        let p = self.predict_proba(row);
        let mut best = 0;
        for (k, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = k;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::brl::BrlConfig;
    use crate::brl::RuleSpace;
    use crate::dataset::tests::schema;
    use crate::dataset::Literal;

    fn six_rows() -> CategoricalDataset {
        CategoricalDataset::new(
            vec![schema("a", &["p", "q"]), schema("b", &["u", "v", "w"])],
            "y",
            vec!["0".into(), "1".into()],
            vec![0, 0, 0, 1, 1, 2, 1, 0, 0, 2, 1, 1],
            vec![0, 0, 1, 1, 0, 1],
        )
        .unwrap()
    }

    #[test]
    fn empty_list_counts_are_global() {
        let ds = six_rows();
        assert_eq!(capture_counts(&[], &ds), vec![vec![3, 3]]);
    }

    #[test]
    fn rule_matching_nothing() {
        let ds = six_rows().subset(&[0, 1, 3]);
        let r = Rule::single(Literal::new(1, 2));
        assert_eq!(capture_counts(&[r], &ds), vec![vec![0, 0], vec![2, 1]]);
    }

    #[test]
    fn bitset_counts_match_row_scan() {
        let ds = six_rows();
        let rules = vec![
            Rule::single(Literal::new(1, 0)),
            Rule::single(Literal::new(0, 0)),
            Rule::new(vec![Literal::new(0, 1), Literal::new(1, 1)]).unwrap(),
        ];
        let space = RuleSpace::new(&ds, rules.clone(), &BrlConfig::default()).unwrap();
        for state in [vec![], vec![0], vec![0, 1], vec![1, 0], vec![2, 1, 0]] {
            let picked: Vec<Rule> = state.iter().map(|&i| rules[i].clone()).collect();
            let scanned = capture_counts(&picked, &ds);
            assert_eq!(space.capture_counts(&state), scanned);
            let total: usize = scanned.iter().flatten().sum();
            assert_eq!(total, ds.n_rows());
        }
    }

    #[test]
    fn smoothed_probabilities() {
        let list = RuleList {
            rules: vec![],
            counts: vec![vec![9, 1]],
            alpha: vec![1.0, 1.0],
        };
        let p = list.predict_proba(&[0, 0]);
        assert!((p[0] - 10.0 / 12.0).abs() < 1e-15);
        assert!((p[1] - 2.0 / 12.0).abs() < 1e-15);
        assert_eq!(list.predict(&[0, 0]), 0);
    }

    #[test]
    fn probabilities_are_distributions_and_first_match_wins() {
        let ds = six_rows();
        let rules = vec![
            Rule::single(Literal::new(1, 0)),
            Rule::single(Literal::new(0, 0)),
        ];
        let list = RuleList::fit(rules.clone(), &ds, vec![1.0, 2.0]);
        let mut extended = rules;
        extended.push(Rule::single(Literal::new(0, 1)));
        let longer = RuleList::fit(extended, &ds, vec![1.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let row = [rng.random_range(0..2), rng.random_range(0..3)];
            let p = list.predict_proba(&row);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v > 0.0));
            if list.clause_for(&row) < list.len() {
                assert_eq!(longer.predict_proba(&row), p);
            }
        }
    }
}
