//! Exact posterior over every ordered rule list, by enumeration.

use rulelist::dataset::CategoricalDataset;
use rulelist::rule::Rule;
use statrs::distribution::{Discrete, Poisson};
use statrs::function::gamma::ln_gamma;

pub struct PriorParams {
    pub lambda: f64,
    pub eta: f64,
    pub alpha: Vec<f64>,
    pub max_len: usize,
}

/// Every ordered list of distinct rule indices up to `max_len` long.
pub fn all_lists(n_rules: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len.min(n_rules) {
        let mut next = Vec::new();
        for list in &frontier {
            for r in 0..n_rules {
                if !list.contains(&r) {
                    let mut l: Vec<usize> = list.clone();
                    l.push(r);
                    next.push(l);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Prior probability of `list`, built from plain pmf values.
pub fn prior(rules: &[Rule], list: &[usize], p: &PriorParams) -> f64 {
    let max_len = p.max_len.min(rules.len());
    let len_dist = Poisson::new(p.lambda).expect("positive rate");
    let len_z: f64 = (0..=max_len as u64).map(|m| len_dist.pmf(m)).sum();
    let mut prob = len_dist.pmf(list.len() as u64) / len_z;
    let card_dist = Poisson::new(p.eta).expect("positive rate");
    let mut used = vec![false; rules.len()];
    for &r in list {
        let unused_of = |c: usize| {
            (0..rules.len())
                .filter(|&q| !used[q] && rules[q].len() == c)
                .count()
        };
        let max_card = rules.iter().map(Rule::len).max().unwrap_or(0);
        let z: f64 = (0..=max_card)
            .filter(|&c| unused_of(c) > 0)
            .map(|c| card_dist.pmf(c as u64))
            .sum();
        let c = rules[r].len();
        prob *= card_dist.pmf(c as u64) / z / unused_of(c) as f64;
        used[r] = true;
    }
    prob
}

/// Log marginal likelihood with a Dirichlet prior on each clause's label
/// distribution, first matching rule capturing each row.
pub fn log_likelihood(
    dataset: &CategoricalDataset,
    rules: &[Rule],
    list: &[usize],
    alpha: &[f64],
) -> f64 {
    let mut counts = vec![vec![0usize; alpha.len()]; list.len() + 1];
    for i in 0..dataset.n_rows() {
        let row = dataset.row(i);
        let clause = list
            .iter()
            .position(|&r| rules[r].matches(row))
            .unwrap_or(list.len());
        counts[clause][dataset.labels()[i] as usize] += 1;
    }
    let a0: f64 = alpha.iter().sum();
    counts
        .iter()
        .map(|c| {
            let n: usize = c.iter().sum();
            ln_gamma(a0) - ln_gamma(n as f64 + a0)
                + c.iter()
                    .zip(alpha)
                    .map(|(&k, &a)| ln_gamma(k as f64 + a) - ln_gamma(a))
                    .sum::<f64>()
        })
        .sum()
}

/// `(list, probability)` for every list, probabilities summing to one.
pub fn posterior(
    dataset: &CategoricalDataset,
    rules: &[Rule],
    p: &PriorParams,
) -> Vec<(Vec<usize>, f64)> {
    let lists = all_lists(rules.len(), p.max_len);
    let logs: Vec<f64> = lists
        .iter()
        .map(|l| prior(rules, l, p).ln() + log_likelihood(dataset, rules, l, &p.alpha))
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|v| (v - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    lists
        .into_iter()
        .zip(weights)
        .map(|(l, w)| (l, w / z))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_count() {
        // 1 + 4 + 12
        assert_eq!(all_lists(4, 2).len(), 17);
        assert_eq!(all_lists(2, 5).len(), 5);
    }
}
