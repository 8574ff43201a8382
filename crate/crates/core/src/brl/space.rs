use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::{BrlConfig, BrlError};
use crate::bitset::RowSet;
use crate::dataset::CategoricalDataset;
use crate::rule::Rule;

fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn log_poisson(k: usize, rate: f64) -> f64 {
    k as f64 * rate.ln() - rate - ln_gamma(k as f64 + 1.0)
}

/// Everything a chain needs to score rule lists on one training set: rule
/// coverage bitsets, label row sets, and precomputed prior/likelihood terms.
/// A list is a sequence of indices into the mined rules.
#[derive(Clone, Debug)]
pub struct RuleSpace {
    rules: Vec<Rule>,
    cover: Vec<RowSet>,
    label_rows: Vec<RowSet>,
    n_rows: usize,
    alpha: Vec<f64>,
    /// `lnΓ(N + α_k)` for `N = 0..=n`, per label.
    lgamma_label: Vec<Vec<f64>>,
    /// `lnΓ(N + Σα)` for `N = 0..=n`.
    lgamma_total: Vec<f64>,
    /// `lnΓ(Σα) − Σ_k lnΓ(α_k)`.
    log_norm_alpha: f64,
    rule_card: Vec<usize>,
    /// Number of mined rules of each cardinality.
    card_counts: Vec<usize>,
    max_len: usize,
    log_len_prior: Vec<f64>,
    eta_card: f64,
}

impl RuleSpace {
    pub fn new(
        dataset: &CategoricalDataset,
        rules: Vec<Rule>,
        config: &BrlConfig,
    ) -> Result<Self, BrlError> {
        config.validate()?;
        let alpha = config.alpha_for(dataset.n_labels())?;
        let n = dataset.n_rows();
        let cover = rules.iter().map(|r| r.rows(dataset)).collect();
        let label_rows = (0..dataset.n_labels())
            .map(|k| dataset.label_rows(k))
            .collect();
        let alpha_sum: f64 = alpha.iter().sum();
        let lgamma_label = alpha
            .iter()
            .map(|&a| (0..=n).map(|c| ln_gamma(c as f64 + a)).collect())
            .collect();
        let lgamma_total = (0..=n).map(|c| ln_gamma(c as f64 + alpha_sum)).collect();
        let log_norm_alpha = ln_gamma(alpha_sum) - alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>();
        let rule_card: Vec<usize> = rules.iter().map(Rule::len).collect();
        let max_card = rule_card.iter().copied().max().unwrap_or(0);
        let mut card_counts = vec![0; max_card + 1];
        for &c in &rule_card {
            card_counts[c] += 1;
        }
        let max_len = config
            .max_list_len
            .map_or(rules.len(), |cap| cap.min(rules.len()));
        let unnormalized: Vec<f64> = (0..=max_len)
            .map(|m| log_poisson(m, config.lambda))
            .collect();
        let z = log_sum_exp(unnormalized.iter().copied());
        let log_len_prior = unnormalized.iter().map(|v| v - z).collect();
        Ok(Self {
            rules,
            cover,
            label_rows,
            n_rows: n,
            alpha,
            lgamma_label,
            lgamma_total,
            log_norm_alpha,
            rule_card,
            card_counts,
            max_len,
            log_len_prior,
            eta_card: config.eta_card,
        })
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn n_labels(&self) -> usize {
        self.label_rows.len()
    }

    /// Longest list the prior allows.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn index_of(&self, rule: &Rule) -> Option<usize> {
        self.rules.iter().position(|r| r == rule)
    }

    /// `(m + 1) × ℓ` label counts captured by each clause of `state`, the
    /// default clause last.
    pub fn capture_counts(&self, state: &[usize]) -> Vec<Vec<usize>> {
        let mut remaining = RowSet::full(self.n_rows);
        let mut counts = Vec::with_capacity(state.len() + 1);
        for &r in state {
            let cover = &self.cover[r];
            counts.push(
                self.label_rows
                    .iter()
                    .map(|lr| remaining.intersection_count3(cover, lr))
                    .collect(),
            );
            remaining.remove_all(cover);
        }
        counts.push(
            self.label_rows
                .iter()
                .map(|lr| remaining.intersection_count(lr))
                .collect(),
        );
        counts
    }

    /// `Σ_j ln[B(N_j + α) / B(α)]`.
    pub fn log_likelihood(&self, counts: &[Vec<usize>]) -> f64 {
        counts
            .iter()
            .map(|clause| {
                let total: usize = clause.iter().sum();
                let mut v = self.log_norm_alpha - self.lgamma_total[total];
                for (k, &c) in clause.iter().enumerate() {
                    v += self.lgamma_label[k][c];
                }
                v
            })
            .sum()
    }

    /// Log prior of an ordered list of distinct rule indices.
    pub fn log_prior(&self, state: &[usize]) -> f64 {
        if state.len() > self.max_len {
            return f64::NEG_INFINITY;
        }
        let mut lp = self.log_len_prior[state.len()];
        let mut remaining = self.card_counts.clone();
        for &r in state {
            let c = self.rule_card[r];
            let z = log_sum_exp(
                remaining
                    .iter()
                    .enumerate()
                    .filter(|&(_, &left)| left > 0)
                    .map(|(card, _)| log_poisson(card, self.eta_card)),
            );
            lp += log_poisson(c, self.eta_card) - z - (remaining[c] as f64).ln();
            remaining[c] -= 1;
        }
        lp
    }

    pub fn log_posterior(&self, state: &[usize]) -> f64 {
        self.log_prior(state) + self.log_likelihood(&self.capture_counts(state))
    }

    /// Draws a list from the prior.
    pub fn sample_prior(&self, rng: &mut impl Rng) -> Vec<usize> {
        let m = sample_log_weights(&self.log_len_prior, rng);
        let mut used = vec![false; self.rules.len()];
        let mut remaining = self.card_counts.clone();
        let mut state = Vec::with_capacity(m);
        for _ in 0..m {
            let weights: Vec<f64> = remaining
                .iter()
                .enumerate()
                .map(|(card, &left)| {
                    if left > 0 {
                        log_poisson(card, self.eta_card)
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            let c = sample_log_weights(&weights, rng);
            let pick = rng.random_range(0..remaining[c]);
            let r = (0..self.rules.len())
                .filter(|&r| !used[r] && self.rule_card[r] == c)
                .nth(pick)
                .expect("count matches");
            used[r] = true;
            remaining[c] -= 1;
            state.push(r);
        }
        state
    }
}

fn sample_log_weights(log_weights: &[f64], rng: &mut impl Rng) -> usize {
    let z = log_sum_exp(log_weights.iter().copied());
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in log_weights.iter().enumerate() {
        if w == f64::NEG_INFINITY {
            continue;
        }
        acc += (w - z).exp();
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Log posterior (up to a constant) of `rule_list` built from `mined` on
/// `dataset`.
pub fn log_posterior(
    rule_list: &[Rule],
    mined: &[Rule],
    dataset: &CategoricalDataset,
    config: &BrlConfig,
) -> Result<f64, BrlError> {
    let space = RuleSpace::new(dataset, mined.to_vec(), config)?;
    let state = rule_list
        .iter()
        .map(|r| {
            space
                .index_of(r)
                .ok_or_else(|| BrlError::UnknownRule(format!("{:?}", r.literals())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(space.log_posterior(&state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::schema;
    use crate::dataset::Literal;

    fn three_one() -> CategoricalDataset {
        CategoricalDataset::new(
            vec![schema("a", &["p", "q"]), schema("b", &["u", "v"])],
            "y",
            vec!["0".into(), "1".into()],
            vec![0, 0, 0, 1, 1, 0, 1, 1],
            vec![0, 0, 0, 1],
        )
        .unwrap()
    }

    #[test]
    fn empty_list_likelihood_is_beta_ratio() {
        let ds = three_one();
        let space = RuleSpace::new(
            &ds,
            vec![Rule::single(Literal::new(0, 0))],
            &BrlConfig::default(),
        )
        .unwrap();
        let ll = space.log_likelihood(&space.capture_counts(&[]));
        assert!((ll - (1.0f64 / 20.0).ln()).abs() < 1e-12, "{ll}");
    }

    #[test]
    fn prior_of_lengths_normalizes() {
        let ds = three_one();
        let rules = vec![
            Rule::single(Literal::new(0, 0)),
            Rule::single(Literal::new(1, 1)),
            Rule::new(vec![Literal::new(0, 1), Literal::new(1, 0)]).unwrap(),
        ];
        let space = RuleSpace::new(&ds, rules, &BrlConfig::default()).unwrap();
        // Sum the prior over every ordered list of distinct rules.
        let mut total = 0.0;
        let n = space.n_rules();
        total += space.log_prior(&[]).exp();
        for a in 0..n {
            total += space.log_prior(&[a]).exp();
            for b in (0..n).filter(|&b| b != a) {
                total += space.log_prior(&[a, b]).exp();
                for c in (0..n).filter(|&c| c != a && c != b) {
                    total += space.log_prior(&[a, b, c]).exp();
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn unknown_rule_is_rejected() {
        let ds = three_one();
        let mined = vec![Rule::single(Literal::new(0, 0))];
        let err = log_posterior(
            &[Rule::single(Literal::new(1, 0))],
            &mined,
            &ds,
            &BrlConfig::default(),
        );
        assert!(matches!(err, Err(BrlError::UnknownRule(_))));
    }
}
