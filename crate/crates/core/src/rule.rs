//! Conjunctive rules over literals.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::RowSet;
use crate::dataset::{CategoricalDataset, Literal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("a rule needs at least one literal")]
    Empty,
    #[error("attribute {0} appears in more than one literal")]
    RepeatedAttribute(usize),
}

/// A conjunction of literals, at most one per attribute, kept sorted by
/// `(attribute, category)` so equal rules compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rule {
    literals: Vec<Literal>,
}

impl Rule {
    pub fn new(mut literals: Vec<Literal>) -> Result<Self, RuleError> {
        if literals.is_empty() {
            return Err(RuleError::Empty);
        }
        literals.sort();
        literals.dedup();
        for pair in literals.windows(2) {
            if pair[0].attribute == pair[1].attribute {
                return Err(RuleError::RepeatedAttribute(pair[0].attribute));
            }
        }
        Ok(Self { literals })
    }

    pub fn single(literal: Literal) -> Self {
        Self {
            literals: vec![literal],
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn uses_attribute(&self, attribute: usize) -> bool {
        self.literals.iter().any(|l| l.attribute == attribute)
    }

    /// `self ∪ {literal}`, or `None` if the attribute is already constrained.
    pub fn extend(&self, literal: Literal) -> Option<Rule> {
        if self.uses_attribute(literal.attribute) {
            return None;
        }
        let pos = self.literals.partition_point(|l| *l < literal);
        let mut literals = Vec::with_capacity(self.literals.len() + 1);
        literals.extend_from_slice(&self.literals[..pos]);
        literals.push(literal);
        literals.extend_from_slice(&self.literals[pos..]);
        Some(Rule { literals })
    }

    /// Whether every literal holds on a row of category indices.
    pub fn matches(&self, row: &[u32]) -> bool {
        self.literals
            .iter()
            .all(|l| row[l.attribute] as usize == l.category)
    }

    pub fn rows(&self, dataset: &CategoricalDataset) -> RowSet {
        RowSet::from_indices(
            dataset.n_rows(),
            dataset
                .rows()
                .enumerate()
                .filter(|(_, row)| self.matches(row))
                .map(|(i, _)| i),
        )
    }

    pub fn display<'a>(&'a self, dataset: &'a CategoricalDataset) -> RuleDisplay<'a> {
        RuleDisplay {
            rule: self,
            dataset,
        }
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a Rule,
    dataset: &'a CategoricalDataset,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &l) in self.rule.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{}", self.dataset.describe_literal(l))?;
        }
        Ok(())
    }
}

/// A rule mined for one label, with its score and per-label support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredRule {
    pub rule: Rule,
    pub label: usize,
    pub score: f64,
    pub support: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_and_validation() {
        let a = Rule::new(vec![Literal::new(2, 0), Literal::new(0, 1)]).unwrap();
        let b = Rule::new(vec![Literal::new(0, 1), Literal::new(2, 0)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            Rule::new(vec![Literal::new(1, 0), Literal::new(1, 1)]),
            Err(RuleError::RepeatedAttribute(1))
        );
        assert_eq!(Rule::new(vec![]), Err(RuleError::Empty));
    }

    #[test]
    fn extend_keeps_order() {
        let r = Rule::single(Literal::new(3, 1));
        let e = r.extend(Literal::new(1, 0)).unwrap();
        assert_eq!(e.literals(), &[Literal::new(1, 0), Literal::new(3, 1)]);
        assert!(e.extend(Literal::new(3, 0)).is_none());
        assert!(e.matches(&[9, 0, 9, 1]));
        assert!(!e.matches(&[9, 0, 9, 0]));
    }
}
