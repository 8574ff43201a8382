//! Cross-validated mine, fit and score runs, and the miner timing benchmark.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brl::{train, BrlConfig, BrlError, RuleList, StopReason};
use crate::dataset::{stratified_kfold, CategoricalDataset, DatasetError};
use crate::metrics::{roc_auc, ConfusionMatrix, MetricError};
use crate::miner::{MineError, MinerConfig, RuleMiner};
use crate::rule::Rule;
use crate::synth::{generate, SynthConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Mine(#[from] MineError),
    #[error(transparent)]
    Brl(#[from] BrlError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Scores of a fitted list on labelled rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Binary tasks only; `None` also when the rows hold a single class.
    pub roc_auc: Option<f64>,
    pub kappa: f64,
    pub confusion: ConfusionMatrix,
}

pub fn evaluate(
    list: &RuleList,
    dataset: &CategoricalDataset,
) -> Result<Evaluation, PipelineError> {
    let truth: Vec<usize> = dataset.labels().iter().map(|&y| y as usize).collect();
    let probs: Vec<Vec<f64>> = dataset.rows().map(|r| list.predict_proba(r)).collect();
    let predicted: Vec<usize> = dataset.rows().map(|r| list.predict(r)).collect();
    let confusion = ConfusionMatrix::from_labels(&truth, &predicted, dataset.n_labels())?;
    let roc_auc = if dataset.n_labels() == 2 {
        let positive: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
        let scores: Vec<f64> = probs.iter().map(|p| p[1]).collect();
        match roc_auc(&positive, &scores) {
            Ok(v) => Some(v),
            Err(MetricError::SingleClass) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    Ok(Evaluation {
        accuracy: confusion.accuracy()?,
        roc_auc,
        kappa: confusion.cohen_kappa()?,
        confusion,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_rules_mined: usize,
    pub list_length: usize,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub evaluation: Evaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    pub mean_accuracy: f64,
    pub mean_roc_auc: Option<f64>,
    pub mean_kappa: f64,
    /// Test-fold confusion matrices summed.
    pub confusion: ConfusionMatrix,
}

/// Stratified k-fold: on each training split, mine rules, fit a list, and
/// score it on the held-out split.
pub fn cross_validate(
    dataset: &CategoricalDataset,
    miner: &dyn RuleMiner,
    miner_config: &MinerConfig,
    brl_config: &BrlConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport, PipelineError> {
    let splits = stratified_kfold(dataset, k, seed)?;
    let mut folds = Vec::with_capacity(k);
    let mut confusion = ConfusionMatrix::new(dataset.n_labels());
    for (f, split) in splits.iter().enumerate() {
        let train_set = dataset.subset(&split.train);
        let test_set = dataset.subset(&split.test);
        let mined = miner.mine(&train_set, miner_config)?;
        let rules: Vec<Rule> = mined.rules().iter().map(|sr| sr.rule.clone()).collect();
        let outcome = train(&train_set, &rules, brl_config)?;
        let evaluation = evaluate(&outcome.rule_list, &test_set)?;
        confusion.merge(&evaluation.confusion);
        folds.push(FoldReport {
            fold: f,
            n_train: train_set.n_rows(),
            n_test: test_set.n_rows(),
            n_rules_mined: rules.len(),
            list_length: outcome.rule_list.len(),
            iterations: outcome.diagnostics.iterations,
            stop_reason: outcome.diagnostics.stop_reason,
            evaluation,
        });
    }
    let n = folds.len() as f64;
    let mean = |get: &dyn Fn(&FoldReport) -> f64| folds.iter().map(get).sum::<f64>() / n;
    let mean_roc_auc = folds
        .iter()
        .map(|f| f.evaluation.roc_auc)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / n);
    Ok(CvReport {
        mean_accuracy: mean(&|f| f.evaluation.accuracy),
        mean_kappa: mean(&|f| f.evaluation.kappa),
        mean_roc_auc,
        confusion,
        folds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchStatus {
    Completed,
    BudgetExceeded,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_attributes: usize,
    pub miner: String,
    pub repetition: usize,
    pub seconds: f64,
    pub status: BenchStatus,
    pub n_rules: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub attribute_grid: Vec<usize>,
    pub repetitions: usize,
    pub synth: SynthConfig,
}

/// Times each miner on a synthetic dataset per grid point. Only the
/// `mine` call is timed.
pub fn benchmark(
    config: &BenchConfig,
    miners: &[&dyn RuleMiner],
    miner_config: &MinerConfig,
    mut on_row: impl FnMut(&BenchRow),
) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &p in &config.attribute_grid {
        for rep in 0..config.repetitions {
            let data = generate(&SynthConfig {
                n_attributes: p,
                seed: config.synth.seed.wrapping_add(rep as u64),
                ..config.synth.clone()
            });
            for miner in miners {
                let start = Instant::now();
                let result = miner.mine(&data, miner_config);
                let seconds = start.elapsed().as_secs_f64();
                let (status, n_rules) = match result {
                    Ok(mined) => (BenchStatus::Completed, mined.len()),
                    Err(MineError::EmptyResult) => (BenchStatus::Completed, 0),
                    Err(MineError::BudgetExceeded { .. }) => (BenchStatus::BudgetExceeded, 0),
                    Err(_) => (BenchStatus::Failed, 0),
                };
                let row = BenchRow {
                    n_attributes: p,
                    miner: miner.name().to_string(),
                    repetition: rep,
                    seconds,
                    status,
                    n_rules,
                };
                on_row(&row);
                rows.push(row);
            }
        }
    }
    rows
}
