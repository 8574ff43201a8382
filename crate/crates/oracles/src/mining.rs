//! Exhaustive enumeration of every rule up to a length cap.

use rulelist::dataset::{CategoricalDataset, Literal};

#[derive(Clone, Debug, PartialEq)]
pub struct Found {
    /// Sorted by attribute.
    pub literals: Vec<Literal>,
    pub score: f64,
    pub support: f64,
}

/// All sets of literals over distinct attributes with `1..=r_max` members.
pub fn all_rules(dataset: &CategoricalDataset, r_max: usize) -> Vec<Vec<Literal>> {
    let mut out = Vec::new();
    fn rec(
        ds: &CategoricalDataset,
        start: usize,
        r_max: usize,
        cur: &mut Vec<Literal>,
        out: &mut Vec<Vec<Literal>>,
    ) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == r_max {
            return;
        }
        for a in start..ds.n_attributes() {
            for c in 0..ds.schemas()[a].categories.len() {
                cur.push(Literal::new(a, c));
                rec(ds, a + 1, r_max, cur, out);
                cur.pop();
            }
        }
    }
    rec(dataset, 0, r_max, &mut Vec::new(), &mut out);
    out
}

fn holds(dataset: &CategoricalDataset, i: usize, literals: &[Literal]) -> bool {
    literals
        .iter()
        .all(|l| dataset.row(i)[l.attribute] as usize == l.category)
}

/// Rows of class `label` where the rule holds, and rows where it holds at all.
pub fn counts(dataset: &CategoricalDataset, literals: &[Literal], label: usize) -> (usize, usize) {
    let mut in_class = 0;
    let mut covered = 0;
    for i in 0..dataset.n_rows() {
        if holds(dataset, i, literals) {
            covered += 1;
            if dataset.labels()[i] as usize == label {
                in_class += 1;
            }
        }
    }
    (in_class, covered)
}

fn class_size(dataset: &CategoricalDataset, label: usize) -> usize {
    dataset
        .labels()
        .iter()
        .filter(|&&y| y as usize == label)
        .count()
}

/// Score desc, then shorter first, then lexicographic literals.
pub fn rank(found: &mut [Found]) {
    found.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.literals.len().cmp(&b.literals.len()))
            .then(a.literals.cmp(&b.literals))
    });
}

/// Top-`top_m` rules per label whose mean literal score reaches `mu_min`
/// and whose class support reaches `s_min`. `score` returns `None` for
/// literals without a defined score; such literals are never used.
#[allow(clippy::too_many_arguments)]
pub fn top_rules_by_mean_score(
    dataset: &CategoricalDataset,
    score: impl Fn(Literal, usize) -> Option<f64>,
    r_max: usize,
    s_min: f64,
    mu_min: f64,
    top_m: usize,
    signed: bool,
) -> Vec<Vec<Found>> {
    let rules = all_rules(dataset, r_max);
    (0..dataset.n_labels())
        .map(|label| {
            let size = class_size(dataset, label) as f64;
            let mut found: Vec<Found> = rules
                .iter()
                .filter_map(|lits| {
                    let mut sum = 0.0;
                    for &l in lits {
                        sum += score(l, label)?;
                    }
                    let mean = sum / lits.len() as f64;
                    let mean = if signed { mean } else { mean.abs() };
                    let support = counts(dataset, lits, label).0 as f64 / size;
                    (mean >= mu_min && support >= s_min).then(|| Found {
                        literals: lits.clone(),
                        score: mean,
                        support,
                    })
                })
                .collect();
            rank(&mut found);
            found.truncate(top_m);
            found
        })
        .collect()
}

/// Every rule frequent within some class, scored by confidence.
pub fn frequent_rules(dataset: &CategoricalDataset, r_max: usize, s_min: f64) -> Vec<Vec<Found>> {
    let rules = all_rules(dataset, r_max);
    (0..dataset.n_labels())
        .map(|label| {
            let size = class_size(dataset, label) as f64;
            let mut found: Vec<Found> = rules
                .iter()
                .filter_map(|lits| {
                    let (in_class, covered) = counts(dataset, lits, label);
                    let support = in_class as f64 / size;
                    (support >= s_min).then(|| Found {
                        literals: lits.clone(),
                        score: in_class as f64 / covered as f64,
                        support,
                    })
                })
                .collect();
            rank(&mut found);
            found
        })
        .collect()
}
