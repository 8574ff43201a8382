//! JSON artifacts (`rules.json`, `model.json`), atomic file writes, and the
//! plain-text rendering of a fitted rule list.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::brl::{BrlConfig, Diagnostics, RuleList, StopReason, TrainOutcome};
use crate::dataset::{AttributeSchema, CategoricalDataset, Literal};
use crate::miner::{MinedRules, MinerConfig};
use crate::rule::{Rule, RuleError, ScoredRule};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a valid artifact: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{attribute}` has no category `{category}`")]
    UnknownCategory { attribute: String, category: String },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<(), ArtifactError> {
    let path = path.as_ref();
    let io_err = |source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), ArtifactError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifacts serialize");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, ArtifactError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ArtifactError::Parse {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteralRecord {
    pub attribute: String,
    pub category: String,
}

fn literal_records(rule: &Rule, schemas: &[AttributeSchema]) -> Vec<LiteralRecord> {
    rule.literals()
        .iter()
        .map(|l| LiteralRecord {
            attribute: schemas[l.attribute].name.clone(),
            category: schemas[l.attribute].categories[l.category].clone(),
        })
        .collect()
}

/// Resolves named literals against `schemas`.
pub fn resolve_rule(
    literals: &[LiteralRecord],
    schemas: &[AttributeSchema],
) -> Result<Rule, ArtifactError> {
    let resolved = literals
        .iter()
        .map(|rec| {
            let attribute = schemas
                .iter()
                .position(|s| s.name == rec.attribute)
                .ok_or_else(|| ArtifactError::UnknownAttribute(rec.attribute.clone()))?;
            let category = schemas[attribute]
                .category_index(&rec.category)
                .ok_or_else(|| ArtifactError::UnknownCategory {
                    attribute: rec.attribute.clone(),
                    category: rec.category.clone(),
                })?;
            Ok(Literal::new(attribute, category))
        })
        .collect::<Result<Vec<_>, ArtifactError>>()?;
    Ok(Rule::new(resolved)?)
}

fn check_version(version: u32) -> Result<(), ArtifactError> {
    if version == FORMAT_VERSION {
        Ok(())
    } else {
        Err(ArtifactError::Version(version))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleRecord {
    pub label: String,
    pub score: f64,
    pub support: f64,
    pub literals: Vec<LiteralRecord>,
}

/// Mined rules with enough context to re-resolve them on another load of
/// the same data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RulesFile {
    pub version: u32,
    pub miner: String,
    pub label_column: String,
    pub label_names: Vec<String>,
    pub schemas: Vec<AttributeSchema>,
    pub config: MinerConfig,
    pub rules: Vec<RuleRecord>,
}

impl RulesFile {
    pub fn new(
        dataset: &CategoricalDataset,
        mined: &MinedRules,
        miner: &str,
        config: &MinerConfig,
    ) -> Self {
        let rules = mined
            .rules()
            .iter()
            .map(|sr| RuleRecord {
                label: dataset.label_names()[sr.label].clone(),
                score: sr.score,
                support: sr.support,
                literals: literal_records(&sr.rule, dataset.schemas()),
            })
            .collect();
        Self {
            version: FORMAT_VERSION,
            miner: miner.to_string(),
            label_column: dataset.label_column().to_string(),
            label_names: dataset.label_names().to_vec(),
            schemas: dataset.schemas().to_vec(),
            config: config.clone(),
            rules,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ArtifactError> {
        let file: Self = read_json(path)?;
        check_version(file.version)?;
        Ok(file)
    }

    /// Rules resolved against `dataset`, which must carry the same schema.
    pub fn scored_rules(
        &self,
        dataset: &CategoricalDataset,
    ) -> Result<Vec<ScoredRule>, ArtifactError> {
        if self.schemas != dataset.schemas() {
            return Err(ArtifactError::SchemaMismatch(
                "rules were mined on differently encoded data (check --bins and --missing-as-category)".into(),
            ));
        }
        self.rules
            .iter()
            .map(|rec| {
                let label = dataset
                    .label_names()
                    .iter()
                    .position(|l| *l == rec.label)
                    .ok_or_else(|| ArtifactError::UnknownLabel(rec.label.clone()))?;
                Ok(ScoredRule {
                    rule: resolve_rule(&rec.literals, dataset.schemas())?,
                    label,
                    score: rec.score,
                    support: rec.support,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseRecord {
    /// Empty for the default clause.
    pub literals: Vec<LiteralRecord>,
    pub counts: Vec<usize>,
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhatRecord {
    pub iteration: usize,
    /// `null` when infinite.
    pub rhat: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub iterations: usize,
    pub n_chains: usize,
    pub acceptance_rate: f64,
    pub stop_reason: StopReason,
    pub best_log_posterior: f64,
    pub rhat_history: Vec<RhatRecord>,
}

impl From<&Diagnostics> for DiagnosticsRecord {
    fn from(d: &Diagnostics) -> Self {
        Self {
            iterations: d.iterations,
            n_chains: d.n_chains,
            acceptance_rate: d.acceptance_rate,
            stop_reason: d.stop_reason,
            best_log_posterior: d.best_log_posterior,
            rhat_history: d
                .rhat_history
                .iter()
                .map(|&(iteration, r)| RhatRecord {
                    iteration,
                    rhat: r.is_finite().then_some(r),
                })
                .collect(),
        }
    }
}

/// A fitted rule list with its data schema, so new CSV files can be encoded
/// without the training data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub label_column: String,
    pub label_names: Vec<String>,
    pub schemas: Vec<AttributeSchema>,
    pub alpha: Vec<f64>,
    /// Rule clauses in order, then the default clause.
    pub clauses: Vec<ClauseRecord>,
    pub diagnostics: DiagnosticsRecord,
    pub config: BrlConfig,
}

impl ModelFile {
    pub fn new(dataset: &CategoricalDataset, outcome: &TrainOutcome, config: &BrlConfig) -> Self {
        let list = &outcome.rule_list;
        let clauses = (0..=list.len())
            .map(|j| ClauseRecord {
                literals: list
                    .rules
                    .get(j)
                    .map(|r| literal_records(r, dataset.schemas()))
                    .unwrap_or_default(),
                counts: list.counts[j].clone(),
                probabilities: list.clause_probabilities(j),
            })
            .collect();
        Self {
            version: FORMAT_VERSION,
            label_column: dataset.label_column().to_string(),
            label_names: dataset.label_names().to_vec(),
            schemas: dataset.schemas().to_vec(),
            alpha: list.alpha.clone(),
            clauses,
            diagnostics: (&outcome.diagnostics).into(),
            config: config.clone(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ArtifactError> {
        let file: Self = read_json(path)?;
        check_version(file.version)?;
        if file.clauses.is_empty() {
            return Err(ArtifactError::SchemaMismatch(
                "model has no default clause".into(),
            ));
        }
        let l = file.label_names.len();
        if file.alpha.len() != l || file.clauses.iter().any(|c| c.counts.len() != l) {
            return Err(ArtifactError::SchemaMismatch(
                "clause counts do not match the label set".into(),
            ));
        }
        Ok(file)
    }

    pub fn rule_list(&self) -> Result<RuleList, ArtifactError> {
        let (default, rule_clauses) = self.clauses.split_last().expect("validated on load");
        let rules = rule_clauses
            .iter()
            .map(|c| resolve_rule(&c.literals, &self.schemas))
            .collect::<Result<Vec<_>, _>>()?;
        let mut counts: Vec<Vec<usize>> = rule_clauses.iter().map(|c| c.counts.clone()).collect();
        counts.push(default.counts.clone());
        Ok(RuleList {
            rules,
            counts,
            alpha: self.alpha.clone(),
        })
    }

    /// The list as nested if / else if / else text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let (default, rule_clauses) = self.clauses.split_last().expect("validated on load");
        let outcome = |c: &ClauseRecord| {
            let mut best = 0;
            for (k, &p) in c.probabilities.iter().enumerate() {
                if p > c.probabilities[best] {
                    best = k;
                }
            }
            format!(
                "{} = {} (P = {:.2})",
                self.label_column, self.label_names[best], c.probabilities[best]
            )
        };
        for (j, clause) in rule_clauses.iter().enumerate() {
            let condition = clause
                .literals
                .iter()
                .map(|l| format!("{} is {}", l.attribute, display_category(&l.category)))
                .collect::<Vec<_>>()
                .join(" AND ");
            let keyword = if j == 0 { "if" } else { "else if" };
            let _ = writeln!(out, "{keyword} {condition} then {}", outcome(clause));
        }
        if rule_clauses.is_empty() {
            let _ = writeln!(out, "{}", outcome(default));
        } else {
            let _ = writeln!(out, "else {}", outcome(default));
        }
        out
    }
}

fn display_category(category: &str) -> &str {
    if category.is_empty() {
        "missing"
    } else {
        category
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brl::{train, BrlConfig};
    use crate::dataset::tests::schema;
    use crate::miner::{McaMiner, RuleMiner};

    fn toy() -> CategoricalDataset {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..30u32 {
            let k = u32::from(i % 3 == 0);
            x.extend_from_slice(&[k, i % 2]);
            y.push(k);
        }
        CategoricalDataset::new(
            vec![
                schema("sex", &["male", "female"]),
                schema("age", &["adult", "child"]),
            ],
            "survived",
            vec!["no".into(), "yes".into()],
            x,
            y,
        )
        .unwrap()
    }

    #[test]
    fn rules_round_trip() {
        let ds = toy();
        let config = MinerConfig::default();
        let mined = McaMiner.mine(&ds, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.json");
        write_json(&path, &RulesFile::new(&ds, &mined, "mca", &config)).unwrap();
        let back = RulesFile::load(&path).unwrap().scored_rules(&ds).unwrap();
        assert_eq!(back, mined.rules());
    }

    #[test]
    fn model_round_trip_and_render() {
        let ds = toy();
        let rules = vec![Rule::single(Literal::new(0, 1))];
        let config = BrlConfig {
            max_iters: 2_000,
            check_interval: 500,
            ..BrlConfig::default()
        };
        let outcome = train(&ds, &rules, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        write_json(&path, &ModelFile::new(&ds, &outcome, &config)).unwrap();
        let model = ModelFile::load(&path).unwrap();
        assert_eq!(model.rule_list().unwrap(), outcome.rule_list);
        let text = model.render();
        assert_eq!(
            text,
            "if sex is female then survived = yes (P = 0.92)\nelse survived = no (P = 0.95)\n"
        );
    }

    #[test]
    fn render_without_rules() {
        let ds = toy();
        let model = ModelFile {
            version: FORMAT_VERSION,
            label_column: "survived".into(),
            label_names: ds.label_names().to_vec(),
            schemas: ds.schemas().to_vec(),
            alpha: vec![1.0, 1.0],
            clauses: vec![ClauseRecord {
                literals: vec![],
                counts: vec![9, 1],
                probabilities: vec![10.0 / 12.0, 2.0 / 12.0],
            }],
            diagnostics: DiagnosticsRecord {
                iterations: 0,
                n_chains: 1,
                acceptance_rate: 0.0,
                stop_reason: StopReason::SingleChain,
                best_log_posterior: 0.0,
                rhat_history: vec![],
            },
            config: BrlConfig::default(),
        };
        assert_eq!(model.render(), "survived = no (P = 0.83)\n");
    }

    #[test]
    fn empty_model_file_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            ModelFile::load(&path),
            Err(ArtifactError::Parse { .. })
        ));
    }

    #[test]
    fn unknown_names_are_reported() {
        let ds = toy();
        let bad = [LiteralRecord {
            attribute: "sex".into(),
            category: "other".into(),
        }];
        assert!(matches!(
            resolve_rule(&bad, ds.schemas()),
            Err(ArtifactError::UnknownCategory { .. })
        ));
    }
}
