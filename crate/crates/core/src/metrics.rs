//! Classification metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("no samples to evaluate")]
    Empty,
    #[error("length mismatch: {0} labels vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("ROC-AUC needs both classes present")]
    SingleClass,
    #[error("label {0} is outside 0..{1}")]
    LabelOutOfRange(usize, usize),
}

fn check_lengths(a: usize, b: usize) -> Result<(), MetricError> {
    if a != b {
        return Err(MetricError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(MetricError::Empty);
    }
    Ok(())
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64, MetricError> {
    check_lengths(y_true.len(), y_pred.len())?;
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// Mann–Whitney AUC: the probability that a random positive outscores a
/// random negative, ties counting one half.
pub fn roc_auc(y_true: &[bool], scores: &[f64]) -> Result<f64, MetricError> {
    check_lengths(y_true.len(), scores.len())?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Midranks over tie groups.
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        rank_sum_pos += midrank * order[start..end].iter().filter(|&&i| y_true[i]).count() as f64;
        start = end;
    }
    let n_pos = y_true.iter().filter(|&&y| y).count() as f64;
    let n_neg = y_true.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(MetricError::SingleClass);
    }
    Ok((rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg))
}

/// Rows are true labels, columns predictions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(n_labels: usize) -> Self {
        Self {
            counts: vec![vec![0; n_labels]; n_labels],
        }
    }

    pub fn from_labels(
        y_true: &[usize],
        y_pred: &[usize],
        n_labels: usize,
    ) -> Result<Self, MetricError> {
        check_lengths(y_true.len(), y_pred.len())?;
        let mut m = Self::new(n_labels);
        for (&t, &p) in y_true.iter().zip(y_pred) {
            m.add(t, p)?;
        }
        Ok(m)
    }

    pub fn from_counts(counts: Vec<Vec<usize>>) -> Self {
        Self { counts }
    }

    pub fn add(&mut self, truth: usize, predicted: usize) -> Result<(), MetricError> {
        let l = self.counts.len();
        for v in [truth, predicted] {
            if v >= l {
                return Err(MetricError::LabelOutOfRange(v, l));
            }
        }
        self.counts[truth][predicted] += 1;
        Ok(())
    }

    /// Adds another matrix of the same shape cell by cell.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn n_labels(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> Result<f64, MetricError> {
        match self.total() {
            0 => Err(MetricError::Empty),
            t => Ok(self.trace() as f64 / t as f64),
        }
    }

    /// Agreement expected from the marginals alone.
    pub fn chance_agreement(&self) -> Result<f64, MetricError> {
        let total = self.total();
        if total == 0 {
            return Err(MetricError::Empty);
        }
        let t = total as f64;
        Ok((0..self.counts.len())
            .map(|k| {
                let row: usize = self.counts[k].iter().sum();
                let col: usize = self.counts.iter().map(|r| r[k]).sum();
                row as f64 * col as f64 / (t * t)
            })
            .sum())
    }

    /// Cohen's κ; 0 when chance agreement is 1.
    pub fn cohen_kappa(&self) -> Result<f64, MetricError> {
        let p_o = self.accuracy()?;
        let p_e = self.chance_agreement()?;
        if p_e >= 1.0 {
            return Ok(0.0);
        }
        Ok((p_o - p_e) / (1.0 - p_e))
    }
}

pub fn cohen_kappa(confusion: &ConfusionMatrix) -> Result<f64, MetricError> {
    confusion.cohen_kappa()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert_eq!(accuracy(&[], &[]), Err(MetricError::Empty));
        assert_eq!(
            accuracy(&[0], &[0, 1]),
            Err(MetricError::LengthMismatch(1, 2))
        );
    }

    #[test]
    fn auc_cases() {
        let y = [false, false, true, true];
        assert_eq!(roc_auc(&y, &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(roc_auc(&y, &[0.5; 4]).unwrap(), 0.5);
        assert_eq!(
            roc_auc(&[true, true], &[0.1, 0.2]),
            Err(MetricError::SingleClass)
        );
    }

    /// Area under the empirical ROC curve by the trapezoid rule, sweeping
    /// thresholds from high to low.
    fn trapezoid_auc(y: &[bool], s: &[f64]) -> f64 {
        let mut thresholds: Vec<f64> = s.to_vec();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let p = y.iter().filter(|&&v| v).count() as f64;
        let n = y.len() as f64 - p;
        let mut points = vec![(0.0, 0.0)];
        for t in thresholds {
            let tp = y.iter().zip(s).filter(|&(&yy, &ss)| yy && ss >= t).count() as f64;
            let fp = y.iter().zip(s).filter(|&(&yy, &ss)| !yy && ss >= t).count() as f64;
            points.push((fp / n, tp / p));
        }
        points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum()
    }

    #[test]
    fn auc_matches_trapezoid_on_small_instance() {
        let y = [true, false, true, true, false, false, true, false, false];
        let s = [0.9, 0.3, 0.3, 0.7, 0.8, 0.1, 0.5, 0.5, 0.2];
        let a = roc_auc(&y, &s).unwrap();
        assert!((a - trapezoid_auc(&y, &s)).abs() < 1e-12, "{a}");
    }

    #[test]
    fn kappa_cases() {
        let diag = ConfusionMatrix::from_counts(vec![vec![3, 0], vec![0, 5]]);
        assert_eq!(diag.cohen_kappa().unwrap(), 1.0);
        let uniform = ConfusionMatrix::from_counts(vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(uniform.cohen_kappa().unwrap(), 0.0);
        let single = ConfusionMatrix::from_counts(vec![vec![4, 0], vec![0, 0]]);
        assert_eq!(single.cohen_kappa().unwrap(), 0.0);
        assert_eq!(
            ConfusionMatrix::new(2).cohen_kappa(),
            Err(MetricError::Empty)
        );
    }

    proptest! {
        #[test]
        fn auc_matches_trapezoid(pairs in prop::collection::vec((any::<bool>(), 0u8..6), 2..40)) {
            let y: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let s: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            prop_assume!(y.iter().any(|&v| v) && y.iter().any(|&v| !v));
            let a = roc_auc(&y, &s).unwrap();
            prop_assert!((a - trapezoid_auc(&y, &s)).abs() < 1e-12);
        }

        #[test]
        fn auc_flips_with_negated_scores(y in prop::collection::vec(any::<bool>(), 2..40), seed in any::<u64>()) {
            prop_assume!(y.iter().any(|&v| v) && y.iter().any(|&v| !v));
            // Distinct scores from a seeded permutation.
            let mut s: Vec<f64> = (0..y.len()).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1_000_003) as f64 + i as f64 * 1e-7).collect();
            s.dedup();
            prop_assume!(s.len() == y.len());
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            prop_assert!((roc_auc(&y, &s).unwrap() + roc_auc(&y, &neg).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn accuracy_is_trace_over_total(pairs in prop::collection::vec((0usize..3, 0usize..3), 1..50)) {
            let t: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let p: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let m = ConfusionMatrix::from_labels(&t, &p, 3).unwrap();
            prop_assert_eq!(m.total(), t.len());
            prop_assert!((accuracy(&t, &p).unwrap() - m.accuracy().unwrap()).abs() < 1e-15);
        }

        #[test]
        fn kappa_is_permutation_invariant(cells in prop::collection::vec(0usize..10, 9), perm in Just([2usize, 0, 1])) {
            let counts: Vec<Vec<usize>> = cells.chunks(3).map(|c| c.to_vec()).collect();
            let m = ConfusionMatrix::from_counts(counts.clone());
            prop_assume!(m.total() > 0);
            let permuted: Vec<Vec<usize>> = (0..3).map(|i| (0..3).map(|j| counts[perm[i]][perm[j]]).collect()).collect();
            let k1 = m.cohen_kappa().unwrap();
            let k2 = ConfusionMatrix::from_counts(permuted).cohen_kappa().unwrap();
            prop_assert!((k1 - k2).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&k1));
        }
    }
}
