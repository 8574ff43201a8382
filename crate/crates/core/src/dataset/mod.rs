//! Categorical datasets: attribute schemas, literals, and the `X`/`Y`
//! matrices every other module reads from.
//!
//! A dataset is immutable once built. Category indices follow the order in
//! which categories first appear in the source file, except for quantized
//! numeric columns whose categories follow bin order.

mod csv_io;
mod folds;
mod quantize;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::RowSet;

pub use csv_io::{
    load_csv, load_csv_with_schema, load_features_with_schema, write_csv, LoadOptions,
};
pub use folds::{stratified_kfold, Fold};
pub use quantize::{bin_index, quantize_numeric, Bins, Quantized};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("file is empty or has no data rows")]
    Empty,
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("no attribute columns besides the label column")]
    NoAttributes,
    #[error("row {row}: empty cell in column `{column}` (use --missing-as-category to keep it)")]
    MissingCell { row: usize, column: String },
    #[error("row {row}: column `{column}` is declared numeric but holds `{value}`")]
    NotNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("column `{column}` has {distinct} distinct value(s), needs at least {needed}")]
    TooFewDistinct {
        column: String,
        distinct: usize,
        needed: usize,
    },
    #[error("label column has {0} distinct value(s), needs at least 2")]
    TooFewLabels(usize),
    #[error("row {row}: unknown category `{value}` for column `{column}`")]
    UnknownCategory {
        row: usize,
        column: String,
        value: String,
    },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("label `{label}` has {count} member(s), fewer than the {k} folds requested")]
    ClassTooSmall {
        label: String,
        count: usize,
        k: usize,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeKind {
    Categorical,
    /// Numeric column cut at `edges`; a value equal to an edge falls in the
    /// lower bin.
    QuantizedNumeric {
        edges: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub categories: Vec<String>,
    #[serde(flatten)]
    pub kind: AttributeKind,
}

impl AttributeSchema {
    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }

    /// Maps a raw cell to a category index. Numeric attributes bin the parsed
    /// value with the stored edges.
    pub fn encode(&self, raw: &str) -> Option<usize> {
        match &self.kind {
            AttributeKind::Categorical => self.category_index(raw),
            AttributeKind::QuantizedNumeric { edges } => {
                raw.trim().parse::<f64>().ok().map(|v| bin_index(v, edges))
            }
        }
    }
}

/// "attribute `attribute` takes category `category`".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub attribute: usize,
    pub category: usize,
}

impl Literal {
    pub fn new(attribute: usize, category: usize) -> Self {
        Self {
            attribute,
            category,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoricalDataset {
    schemas: Vec<AttributeSchema>,
    label_column: String,
    label_names: Vec<String>,
    /// Row-major `n × p` category indices.
    x: Vec<u32>,
    y: Vec<u32>,
}

impl CategoricalDataset {
    /// Builds a dataset from row-major category indices, validating every
    /// invariant.
    pub fn new(
        schemas: Vec<AttributeSchema>,
        label_column: impl Into<String>,
        label_names: Vec<String>,
        x: Vec<u32>,
        y: Vec<u32>,
    ) -> Result<Self, DatasetError> {
        if schemas.is_empty() {
            return Err(DatasetError::NoAttributes);
        }
        if y.is_empty() {
            return Err(DatasetError::Empty);
        }
        if label_names.len() < 2 {
            return Err(DatasetError::TooFewLabels(label_names.len()));
        }
        let p = schemas.len();
        if x.len() != y.len() * p {
            return Err(DatasetError::Invalid(format!(
                "matrix holds {} cells, expected {} rows × {} attributes",
                x.len(),
                y.len(),
                p
            )));
        }
        for schema in &schemas {
            if schema.categories.len() < 2 {
                return Err(DatasetError::TooFewDistinct {
                    column: schema.name.clone(),
                    distinct: schema.categories.len(),
                    needed: 2,
                });
            }
            let mut seen = std::collections::HashSet::new();
            if !schema.categories.iter().all(|c| seen.insert(c)) {
                return Err(DatasetError::Invalid(format!(
                    "attribute `{}` has duplicate category labels",
                    schema.name
                )));
            }
        }
        for row in x.chunks(p) {
            for (j, &v) in row.iter().enumerate() {
                if v as usize >= schemas[j].categories.len() {
                    return Err(DatasetError::Invalid(format!(
                        "category index {v} out of range for `{}`",
                        schemas[j].name
                    )));
                }
            }
        }
        if let Some(&bad) = y.iter().find(|&&v| v as usize >= label_names.len()) {
            return Err(DatasetError::Invalid(format!(
                "label index {bad} out of range"
            )));
        }
        Ok(Self {
            schemas,
            label_column: label_column.into(),
            label_names,
            x,
            y,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.schemas.len()
    }

    pub fn n_labels(&self) -> usize {
        self.label_names.len()
    }

    /// Σ|a_i| over all attributes.
    pub fn n_categories(&self) -> usize {
        self.schemas.iter().map(|s| s.categories.len()).sum()
    }

    pub fn schemas(&self) -> &[AttributeSchema] {
        &self.schemas
    }

    pub fn label_column(&self) -> &str {
        &self.label_column
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn labels(&self) -> &[u32] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let p = self.schemas.len();
        &self.x[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.x.chunks(self.schemas.len())
    }

    pub fn value(&self, i: usize, attribute: usize) -> u32 {
        self.x[i * self.schemas.len() + attribute]
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.label_names.len()];
        for &k in &self.y {
            counts[k as usize] += 1;
        }
        counts
    }

    /// Every literal in schema order.
    pub fn literals(&self) -> Vec<Literal> {
        self.schemas
            .iter()
            .enumerate()
            .flat_map(|(a, s)| (0..s.categories.len()).map(move |c| Literal::new(a, c)))
            .collect()
    }

    pub fn literal_holds(&self, i: usize, literal: Literal) -> bool {
        self.value(i, literal.attribute) as usize == literal.category
    }

    pub fn literal_rows(&self, literal: Literal) -> RowSet {
        RowSet::from_indices(
            self.n_rows(),
            (0..self.n_rows()).filter(|&i| self.literal_holds(i, literal)),
        )
    }

    pub fn label_rows(&self, label: usize) -> RowSet {
        RowSet::from_indices(
            self.n_rows(),
            self.y
                .iter()
                .enumerate()
                .filter(|(_, &k)| k as usize == label)
                .map(|(i, _)| i),
        )
    }

    /// Human-readable form, e.g. `sex is female`.
    pub fn describe_literal(&self, literal: Literal) -> LiteralDisplay<'_> {
        LiteralDisplay {
            schema: &self.schemas[literal.attribute],
            category: literal.category,
        }
    }

    /// Rows `indices` as a new dataset sharing this schema.
    pub fn subset(&self, indices: &[usize]) -> CategoricalDataset {
        let p = self.schemas.len();
        let mut x = Vec::with_capacity(indices.len() * p);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        CategoricalDataset {
            schemas: self.schemas.clone(),
            label_column: self.label_column.clone(),
            label_names: self.label_names.clone(),
            x,
            y,
        }
    }
}

pub struct LiteralDisplay<'a> {
    schema: &'a AttributeSchema,
    category: usize,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} is {}",
            self.schema.name, self.schema.categories[self.category]
        )
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn schema(name: &str, categories: &[&str]) -> AttributeSchema {
        AttributeSchema {
            name: name.to_string(),
            categories: categories.iter().map(|s| s.to_string()).collect(),
            kind: AttributeKind::Categorical,
        }
    }

    #[test]
    fn rejects_out_of_range_cells() {
        let err = CategoricalDataset::new(
            vec![schema("a", &["x", "y"])],
            "label",
            vec!["0".into(), "1".into()],
            vec![0, 2],
            vec![0, 1],
        );
        assert!(err.is_err());
    }

    #[test]
    fn rejects_single_label() {
        let err = CategoricalDataset::new(
            vec![schema("a", &["x", "y"])],
            "label",
            vec!["0".into()],
            vec![0, 1],
            vec![0, 0],
        );
        assert!(matches!(err, Err(DatasetError::TooFewLabels(1))));
    }

    #[test]
    fn literal_rows_and_subset() {
        let ds = CategoricalDataset::new(
            vec![schema("a", &["x", "y"]), schema("b", &["u", "v", "w"])],
            "label",
            vec!["n".into(), "p".into()],
            vec![0, 0, 1, 2, 0, 1, 1, 2],
            vec![0, 1, 0, 1],
        )
        .unwrap();
        assert_eq!(ds.n_categories(), 5);
        assert_eq!(ds.literals().len(), 5);
        let rows: Vec<_> = ds.literal_rows(Literal::new(1, 2)).iter().collect();
        assert_eq!(rows, vec![1, 3]);
        let sub = ds.subset(&[3, 0]);
        assert_eq!(sub.row(0), &[1, 2]);
        assert_eq!(sub.labels(), &[1, 0]);
        assert_eq!(
            ds.describe_literal(Literal::new(1, 0)).to_string(),
            "b is u"
        );
    }
}
