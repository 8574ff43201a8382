//! Multiple correspondence analysis of the extended matrix `Z = [X Y]`.
//!
//! The indicator matrix of `Z` has one column per observed category of every
//! attribute plus one per label. Correspondence analysis of that matrix gives
//! each column a vector of principal coordinates; the cosine between a
//! literal's coordinates and a label's coordinates scores how strongly the
//! literal points at the label.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{CategoricalDataset, Literal};

/// Singular values at or below this are treated as zero. They come from
/// eigenvalues of `SᵀS`, whose rounding noise is around 1e-16, so the floor
/// sits well above its square root.
pub const SINGULAR_VALUE_FLOOR: f64 = 1e-6;

const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum McaError {
    #[error("indicator matrix has no rows")]
    EmptyIndicator,
    #[error("no column for {0:?}; the category never occurs")]
    UnknownColumn(ColumnOwner),
    #[error("score undefined: {0:?} has zero-norm principal coordinates")]
    ZeroNorm(ColumnOwner),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnOwner {
    Attribute { attribute: usize, category: usize },
    Label { label: usize },
}

impl From<Literal> for ColumnOwner {
    fn from(l: Literal) -> Self {
        ColumnOwner::Attribute {
            attribute: l.attribute,
            category: l.category,
        }
    }
}

/// One-hot encoding of `Z`, stored sparsely: every row has exactly `p + 1`
/// hot columns.
#[derive(Clone, Debug)]
pub struct IndicatorMatrix {
    n_rows: usize,
    columns: Vec<ColumnOwner>,
    dropped: Vec<ColumnOwner>,
    column_counts: Vec<usize>,
    /// Row-major `n × (p + 1)` hot column indices.
    hot: Vec<usize>,
    per_row: usize,
}

impl IndicatorMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ColumnOwner] {
        &self.columns
    }

    /// Categories that never occur and were left out.
    pub fn dropped(&self) -> &[ColumnOwner] {
        &self.dropped
    }

    pub fn column_counts(&self) -> &[usize] {
        &self.column_counts
    }

    pub fn hot_columns(&self, row: usize) -> &[usize] {
        &self.hot[row * self.per_row..(row + 1) * self.per_row]
    }

    /// Number of hot entries per row (`p + 1`).
    pub fn row_sum(&self) -> usize {
        self.per_row
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.columns.len());
        for i in 0..self.n_rows {
            for &c in self.hot_columns(i) {
                m[(i, c)] = 1.0;
            }
        }
        m
    }
}

/// One-hot encodes every attribute and the label, dropping zero-count
/// categories.
pub fn build_indicator(dataset: &CategoricalDataset) -> IndicatorMatrix {
    let mut owners = Vec::new();
    let mut counts = Vec::new();
    for (a, schema) in dataset.schemas().iter().enumerate() {
        let mut c = vec![0usize; schema.categories.len()];
        for i in 0..dataset.n_rows() {
            c[dataset.value(i, a) as usize] += 1;
        }
        for (category, &count) in c.iter().enumerate() {
            owners.push(ColumnOwner::Attribute {
                attribute: a,
                category,
            });
            counts.push(count);
        }
    }
    for (label, &count) in dataset.label_counts().iter().enumerate() {
        owners.push(ColumnOwner::Label { label });
        counts.push(count);
    }

    let mut remap = vec![usize::MAX; owners.len()];
    let mut columns = Vec::new();
    let mut dropped = Vec::new();
    let mut column_counts = Vec::new();
    for (full, (&owner, &count)) in owners.iter().zip(&counts).enumerate() {
        if count == 0 {
            dropped.push(owner);
        } else {
            remap[full] = columns.len();
            columns.push(owner);
            column_counts.push(count);
        }
    }

    let offsets: Vec<usize> = dataset
        .schemas()
        .iter()
        .scan(0, |acc, s| {
            let start = *acc;
            *acc += s.categories.len();
            Some(start)
        })
        .collect();
    let label_offset = dataset.n_categories();
    let per_row = dataset.n_attributes() + 1;
    let mut hot = Vec::with_capacity(dataset.n_rows() * per_row);
    for (i, row) in dataset.rows().enumerate() {
        for (a, &v) in row.iter().enumerate() {
            hot.push(remap[offsets[a] + v as usize]);
        }
        hot.push(remap[label_offset + dataset.labels()[i] as usize]);
    }
    IndicatorMatrix {
        n_rows: dataset.n_rows(),
        columns,
        dropped,
        column_counts,
        hot,
        per_row,
    }
}

#[derive(Clone, Debug, Default)]
pub struct McaOptions {
    /// Keep at most this many leading components.
    pub components: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct McaModel {
    columns: Vec<ColumnOwner>,
    column_masses: Vec<f64>,
    singular_values: Vec<f64>,
    /// `J × K` column principal coordinates, row-major.
    coords: Vec<f64>,
    #[serde(skip)]
    index: HashMap<ColumnOwner, usize>,
}

/// Standardized residuals `S = D_r^{-1/2} (P - r cᵀ) D_c^{-1/2}` of the
/// indicator matrix.
pub fn standardized_residuals(indicator: &IndicatorMatrix) -> DMatrix<f64> {
    let n = indicator.n_rows() as f64;
    let q = indicator.row_sum() as f64;
    let masses = column_masses(indicator);
    let r = 1.0 / n;
    let mut s = DMatrix::zeros(indicator.n_rows(), indicator.n_columns());
    for i in 0..indicator.n_rows() {
        for (j, &c) in masses.iter().enumerate() {
            s[(i, j)] = -r * c / (r * c).sqrt();
        }
        for &j in indicator.hot_columns(i) {
            let c = masses[j];
            s[(i, j)] = (1.0 / (n * q) - r * c) / (r * c).sqrt();
        }
    }
    s
}

fn column_masses(indicator: &IndicatorMatrix) -> Vec<f64> {
    let total = (indicator.n_rows() * indicator.row_sum()) as f64;
    indicator
        .column_counts()
        .iter()
        .map(|&c| c as f64 / total)
        .collect()
}

/// Thin SVD of the standardized residuals, sorted descending, with each
/// right singular vector signed so its largest-magnitude entry is positive.
/// Components with singular value at or below [`SINGULAR_VALUE_FLOOR`] are
/// discarded.
#[derive(Clone, Debug)]
pub struct ResidualSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn residual_svd(indicator: &IndicatorMatrix) -> ResidualSvd {
    let s = standardized_residuals(indicator);
    let (u, sv, v) = sorted_svd(s, true);
    ResidualSvd {
        u: u.expect("u requested"),
        singular_values: sv,
        v,
    }
}

// nalgebra's bidiagonal SVD loses about 1e-7 on some wide inputs when
// vectors are requested, so the decomposition goes through the symmetric
// eigenproblem of the (small) column Gram matrix instead.
fn sorted_svd(m: DMatrix<f64>, want_u: bool) -> (Option<DMatrix<f64>>, Vec<f64>, DMatrix<f64>) {
    let eig = (m.transpose() * &m).symmetric_eigen();
    let sigma = |k: usize| eig.eigenvalues[k].max(0.0).sqrt();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| sigma(k) > SINGULAR_VALUE_FLOOR)
        .collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let sv: Vec<f64> = order.iter().map(|&k| sigma(k)).collect();
    let mut v = DMatrix::zeros(m.ncols(), order.len());
    for (dst, &k) in order.iter().enumerate() {
        let col: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        let pivot = col.iter().enumerate().fold((0, 0.0f64), |best, (i, &x)| {
            if x.abs() > best.1.abs() {
                (i, x)
            } else {
                best
            }
        });
        let sign = if pivot.1 < 0.0 { -1.0 } else { 1.0 };
        v.set_column(dst, &(col * sign));
    }
    let u = want_u.then(|| {
        let mut u = &m * &v;
        for (k, &s) in sv.iter().enumerate() {
            u.column_mut(k).unscale_mut(s);
        }
        u
    });
    (u, sv, v)
}

/// Fits correspondence analysis on the indicator matrix.
///
/// Identical indicator rows are merged with weight `sqrt(multiplicity)`
/// before the SVD; this leaves `SᵀS`, and therefore the singular values and
/// column coordinates, unchanged.
pub fn fit(indicator: &IndicatorMatrix, options: &McaOptions) -> Result<McaModel, McaError> {
    if indicator.n_rows() == 0 {
        return Err(McaError::EmptyIndicator);
    }
    let n = indicator.n_rows() as f64;
    let q = indicator.row_sum() as f64;
    let masses = column_masses(indicator);
    let j_cols = indicator.n_columns();

    let mut multiplicity: HashMap<&[usize], usize> = HashMap::new();
    let mut distinct: Vec<&[usize]> = Vec::new();
    for i in 0..indicator.n_rows() {
        let key = indicator.hot_columns(i);
        let entry = multiplicity.entry(key).or_insert(0);
        if *entry == 0 {
            distinct.push(key);
        }
        *entry += 1;
    }

    let r = 1.0 / n;
    let mut s = DMatrix::zeros(distinct.len(), j_cols);
    for (row, key) in distinct.iter().enumerate() {
        let w = (multiplicity[key] as f64).sqrt();
        for (j, &c) in masses.iter().enumerate() {
            s[(row, j)] = w * (-r * c) / (r * c).sqrt();
        }
        for &j in key.iter() {
            let c = masses[j];
            s[(row, j)] = w * (1.0 / (n * q) - r * c) / (r * c).sqrt();
        }
    }

    let (_, mut singular_values, v) = sorted_svd(s, false);
    if let Some(k) = options.components {
        singular_values.truncate(k);
    }
    let k = singular_values.len();
    let mut coords = vec![0.0; j_cols * k];
    for j in 0..j_cols {
        let scale = masses[j].sqrt();
        for (c, &sigma) in singular_values.iter().enumerate() {
            coords[j * k + c] = v[(j, c)] * sigma / scale;
        }
    }
    let index = indicator
        .columns()
        .iter()
        .enumerate()
        .map(|(i, &o)| (o, i))
        .collect();
    Ok(McaModel {
        columns: indicator.columns().to_vec(),
        column_masses: masses,
        singular_values,
        coords,
        index,
    })
}

/// Convenience: indicator plus fit in one call.
pub fn fit_dataset(
    dataset: &CategoricalDataset,
    options: &McaOptions,
) -> Result<McaModel, McaError> {
    fit(&build_indicator(dataset), options)
}

impl McaModel {
    pub fn n_components(&self) -> usize {
        self.singular_values.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn column_masses(&self) -> &[f64] {
        &self.column_masses
    }

    pub fn columns(&self) -> &[ColumnOwner] {
        &self.columns
    }

    pub fn total_inertia(&self) -> f64 {
        self.singular_values.iter().map(|s| s * s).sum()
    }

    pub fn column_index(&self, owner: ColumnOwner) -> Option<usize> {
        self.index.get(&owner).copied()
    }

    /// Principal coordinates of column `j`.
    pub fn coords(&self, j: usize) -> &[f64] {
        let k = self.n_components();
        &self.coords[j * k..(j + 1) * k]
    }

    pub fn coords_of(&self, owner: ColumnOwner) -> Result<&[f64], McaError> {
        self.column_index(owner)
            .map(|j| self.coords(j))
            .ok_or(McaError::UnknownColumn(owner))
    }

    /// Cosine between the principal coordinates of `literal` and `label`.
    pub fn literal_label_score(&self, literal: Literal, label: usize) -> Result<f64, McaError> {
        let lit_owner = ColumnOwner::from(literal);
        let label_owner = ColumnOwner::Label { label };
        let v = self.coords_of(lit_owner)?;
        let w = self.coords_of(label_owner)?;
        let nv = norm(v);
        let nw = norm(w);
        if nv <= NORM_FLOOR {
            return Err(McaError::ZeroNorm(lit_owner));
        }
        if nw <= NORM_FLOOR {
            return Err(McaError::ZeroNorm(label_owner));
        }
        let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        Ok((dot / (nv * nw)).clamp(-1.0, 1.0))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Literal-label cosine table for a dataset: `None` where the score is
/// undefined (zero-norm coordinates or a category that never occurs).
#[derive(Clone, Debug)]
pub struct ScoreTable {
    n_labels: usize,
    literals: Vec<Literal>,
    scores: Vec<Option<f64>>,
}

impl ScoreTable {
    pub fn new(model: &McaModel, dataset: &CategoricalDataset) -> Self {
        let literals = dataset.literals();
        let n_labels = dataset.n_labels();
        let scores = literals
            .iter()
            .flat_map(|&l| (0..n_labels).map(move |k| model.literal_label_score(l, k).ok()))
            .collect();
        Self {
            n_labels,
            literals,
            scores,
        }
    }

    /// Builds a table directly from `(literal, per-label score)` pairs.
    pub fn from_scores(n_labels: usize, entries: Vec<(Literal, Vec<Option<f64>>)>) -> Self {
        let mut literals = Vec::with_capacity(entries.len());
        let mut scores = Vec::with_capacity(entries.len() * n_labels);
        for (l, s) in entries {
            assert_eq!(s.len(), n_labels);
            literals.push(l);
            scores.extend(s);
        }
        Self {
            n_labels,
            literals,
            scores,
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn get(&self, literal: Literal, label: usize) -> Option<f64> {
        self.literals
            .binary_search(&literal)
            .ok()
            .and_then(|i| self.scores[i * self.n_labels + label])
    }

    pub fn by_index(&self, literal_index: usize, label: usize) -> Option<f64> {
        self.scores[literal_index * self.n_labels + label]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::tests::schema;
    use crate::dataset::CategoricalDataset;

    fn correlated() -> CategoricalDataset {
        CategoricalDataset::new(
            vec![schema("a", &["c1", "c2"])],
            "y",
            vec!["0".into(), "1".into()],
            vec![0, 1],
            vec![0, 1],
        )
        .unwrap()
    }

    #[test]
    fn one_hot_of_two_rows() {
        let ind = build_indicator(&correlated());
        let dense = ind.to_dense();
        let expected = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(dense, expected);
        assert_eq!(ind.row_sum(), 2);
    }

    #[test]
    fn unused_category_is_dropped() {
        let ds = CategoricalDataset::new(
            vec![schema("a", &["c1", "c2", "c3"])],
            "y",
            vec!["0".into(), "1".into()],
            vec![0, 1, 0],
            vec![0, 1, 1],
        )
        .unwrap();
        let ind = build_indicator(&ds);
        assert_eq!(ind.n_columns(), 4);
        assert_eq!(
            ind.dropped(),
            &[ColumnOwner::Attribute {
                attribute: 0,
                category: 2
            }]
        );
    }

    #[test]
    fn correlated_pair_scores_plus_minus_one() {
        let model = fit_dataset(&correlated(), &McaOptions::default()).unwrap();
        assert_eq!(model.n_components(), 1);
        let lit = Literal::new(0, 0);
        assert!((model.literal_label_score(lit, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((model.literal_label_score(lit, 1).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_rows_have_no_components() {
        let ds = CategoricalDataset::new(
            vec![schema("a", &["c1", "c2"])],
            "y",
            vec!["0".into(), "1".into()],
            vec![0, 0, 0],
            vec![0, 0, 0],
        )
        .unwrap();
        let model = fit_dataset(&ds, &McaOptions::default()).unwrap();
        assert_eq!(model.n_components(), 0);
        assert!(matches!(
            model.literal_label_score(Literal::new(0, 0), 0),
            Err(McaError::ZeroNorm(_))
        ));
        assert!(matches!(
            model.literal_label_score(Literal::new(0, 1), 0),
            Err(McaError::UnknownColumn(_))
        ));
    }

    #[test]
    fn component_cap() {
        let ds = CategoricalDataset::new(
            vec![schema("a", &["p", "q", "r"]), schema("b", &["u", "v"])],
            "y",
            vec!["0".into(), "1".into()],
            vec![0, 0, 1, 1, 2, 0, 0, 1, 1, 0, 2, 1],
            vec![0, 1, 0, 1, 1, 0],
        )
        .unwrap();
        let full = fit_dataset(&ds, &McaOptions::default()).unwrap();
        assert!(full.n_components() > 1);
        let capped = fit_dataset(
            &ds,
            &McaOptions {
                components: Some(1),
            },
        )
        .unwrap();
        assert_eq!(capped.n_components(), 1);
        assert_eq!(capped.singular_values()[0], full.singular_values()[0]);
        assert!(capped.to_json().contains("singular_values"));
    }
}
