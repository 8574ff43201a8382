//! Rule-list classifiers for categorical data.
//!
//! The pipeline: load a [`dataset::CategoricalDataset`], fit
//! [`mca`] on the attributes and label together, mine candidate rules with a
//! [`miner::RuleMiner`], then fit a Bayesian rule list over those rules with
//! parallel Metropolis–Hastings chains ([`brl`]).

pub mod bitset;
pub mod brl;
pub mod dataset;
pub mod io;
pub mod mca;
pub mod metrics;
pub mod miner;
pub mod pipeline;
pub mod rule;
pub mod synth;

pub use dataset::{AttributeSchema, CategoricalDataset, Literal};
pub use rule::{Rule, ScoredRule};
