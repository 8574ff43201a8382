//! Random small instances and the comparisons between the fast code and
//! the oracles. Each check returns a description of the first mismatch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulelist::brl::{BrlConfig, Chain, RuleSpace, StandardMoves};
use rulelist::dataset::{AttributeKind, AttributeSchema, CategoricalDataset, Literal};
use rulelist::mca::{self, ColumnOwner, McaOptions, ScoreTable};
use rulelist::miner::{apriori_mine, mine_with_scores, MineError, MinedRules, MinerConfig};
use rulelist::rule::Rule;

use crate::brl::{self as exact, PriorParams};
use crate::ca::{self, Owner};
use crate::mining::{self, Found};

pub const CA_TOL: f64 = 1e-8;

/// `n_rows` rows over attributes with 2 to 4 categories, at most
/// `max_columns` indicator columns including the label ones. Every label
/// occurs.
pub fn random_dataset(
    rng: &mut impl Rng,
    n_rows: usize,
    max_columns: usize,
    n_labels: usize,
) -> CategoricalDataset {
    let mut cards = Vec::new();
    let mut used = n_labels;
    loop {
        let c = rng.random_range(2..=4);
        if used + c > max_columns {
            break;
        }
        cards.push(c);
        used += c;
    }
    if cards.is_empty() {
        cards.push(2);
    }
    let schemas = cards
        .iter()
        .enumerate()
        .map(|(a, &c)| AttributeSchema {
            name: format!("a{a}"),
            categories: (0..c).map(|v| format!("v{v}")).collect(),
            kind: AttributeKind::Categorical,
        })
        .collect();
    let y: Vec<u32> = (0..n_rows)
        .map(|i| {
            if i < n_labels {
                i as u32
            } else {
                rng.random_range(0..n_labels as u32)
            }
        })
        .collect();
    // Correlate attributes with the label a little so rules exist.
    let x = y
        .iter()
        .flat_map(|&label| {
            cards
                .iter()
                .map(|&c| {
                    if rng.random_bool(0.4) {
                        label % c as u32
                    } else {
                        rng.random_range(0..c as u32)
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let names = (0..n_labels).map(|k| format!("y{k}")).collect();
    CategoricalDataset::new(schemas, "label", names, x, y).expect("valid by construction")
}

fn owner(o: Owner) -> ColumnOwner {
    match o {
        Owner::Attribute {
            attribute,
            category,
        } => ColumnOwner::Attribute {
            attribute,
            category,
        },
        Owner::Label(label) => ColumnOwner::Label { label },
    }
}

/// Singular values, coordinates (per component up to sign, per cluster of
/// equal singular values up to rotation) and literal-label cosines.
pub fn check_ca(dataset: &CategoricalDataset) -> Result<(), String> {
    let model = mca::fit_dataset(dataset, &McaOptions::default()).map_err(|e| e.to_string())?;
    let oracle = ca::correspondence_analysis(dataset, 1e-6);
    let k = oracle.singular_values.len();
    if model.n_components() != k {
        return Err(format!(
            "{} components, oracle has {k}",
            model.n_components()
        ));
    }
    for (a, b) in model.singular_values().iter().zip(&oracle.singular_values) {
        if (a - b).abs() > CA_TOL {
            return Err(format!("singular value {a} vs {b}"));
        }
    }
    let cols: Vec<usize> = oracle
        .columns
        .iter()
        .map(|&o| {
            model
                .column_index(owner(o))
                .ok_or_else(|| format!("missing column {o:?}"))
        })
        .collect::<Result<_, _>>()?;
    if model.columns().len() != cols.len() {
        return Err("column sets differ".into());
    }
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && oracle.singular_values[end - 1] - oracle.singular_values[end] < 1e-6 {
            end += 1;
        }
        if end - start == 1 {
            let dot: f64 = cols
                .iter()
                .enumerate()
                .map(|(o, &m)| oracle.coords[o][start] * model.coords(m)[start])
                .sum();
            let sign = if dot < 0.0 { -1.0 } else { 1.0 };
            for (o, &m) in cols.iter().enumerate() {
                let d = (sign * model.coords(m)[start] - oracle.coords[o][start]).abs();
                if d > CA_TOL {
                    return Err(format!("component {start} column {o} differs by {d}"));
                }
            }
        } else {
            for (o1, &m1) in cols.iter().enumerate() {
                for (o2, &m2) in cols.iter().enumerate() {
                    let p_model: f64 = (start..end)
                        .map(|c| model.coords(m1)[c] * model.coords(m2)[c])
                        .sum();
                    let p_oracle: f64 = (start..end)
                        .map(|c| oracle.coords[o1][c] * oracle.coords[o2][c])
                        .sum();
                    if (p_model - p_oracle).abs() > CA_TOL {
                        return Err(format!(
                            "cluster {start}..{end} projector differs at ({o1}, {o2})"
                        ));
                    }
                }
            }
        }
        start = end;
    }
    for &lit in oracle
        .columns
        .iter()
        .filter(|o| matches!(o, Owner::Attribute { .. }))
    {
        for label in 0..dataset.n_labels() {
            let Some(expected) = oracle.cosine(lit, Owner::Label(label)) else {
                continue;
            };
            let Owner::Attribute {
                attribute,
                category,
            } = lit
            else {
                unreachable!()
            };
            match model.literal_label_score(Literal::new(attribute, category), label) {
                Ok(got) if (got - expected).abs() <= CA_TOL => {}
                Ok(got) => return Err(format!("cosine {lit:?}/{label}: {got} vs {expected}")),
                // Near-zero coordinates: the model refuses, the oracle may not.
                Err(_) => {}
            }
        }
    }
    Ok(())
}

fn found_of(
    mined: &Result<MinedRules, MineError>,
    n_labels: usize,
) -> Result<Vec<Vec<Found>>, String> {
    match mined {
        Ok(m) => Ok(m
            .per_label()
            .iter()
            .map(|rules| {
                rules
                    .iter()
                    .map(|sr| Found {
                        literals: sr.rule.literals().to_vec(),
                        score: sr.score,
                        support: sr.support,
                    })
                    .collect()
            })
            .collect()),
        Err(MineError::EmptyResult) => Ok(vec![Vec::new(); n_labels]),
        Err(e) => Err(e.to_string()),
    }
}

fn compare(got: &[Vec<Found>], want: &[Vec<Found>]) -> Result<(), String> {
    for (label, (g, w)) in got.iter().zip(want).enumerate() {
        if g != w {
            let at = (0..g.len().max(w.len()))
                .find(|&i| g.get(i) != w.get(i))
                .unwrap_or(0);
            return Err(format!(
                "label {label}: {} rules vs oracle {}; position {at}: {:?} vs {:?}",
                g.len(),
                w.len(),
                g.get(at),
                w.get(at)
            ));
        }
    }
    Ok(())
}

/// Runs the pruned miner and the exhaustive search on the same scores.
pub fn check_miner(
    dataset: &CategoricalDataset,
    scores: &ScoreTable,
    config: &MinerConfig,
) -> Result<(), String> {
    let got = found_of(
        &mine_with_scores(dataset, scores, config),
        dataset.n_labels(),
    )?;
    let want = mining::top_rules_by_mean_score(
        dataset,
        |l, k| scores.get(l, k),
        config.r_max,
        config.s_min,
        config.mu_min,
        config.top_m,
        config.signed,
    );
    compare(&got, &want)
}

/// A score table on a coarse grid (many ties), with some undefined entries.
pub fn random_scores(rng: &mut impl Rng, dataset: &CategoricalDataset) -> ScoreTable {
    let n_labels = dataset.n_labels();
    let entries = dataset
        .literals()
        .into_iter()
        .map(|l| {
            let s = (0..n_labels)
                .map(|_| {
                    (!rng.random_bool(0.1)).then(|| f64::from(rng.random_range(-8i32..=8)) / 8.0)
                })
                .collect();
            (l, s)
        })
        .collect();
    ScoreTable::from_scores(n_labels, entries)
}

pub fn random_miner_config(rng: &mut impl Rng) -> MinerConfig {
    MinerConfig {
        r_max: rng.random_range(1..=4),
        s_min: [0.01, 0.1, 0.2, 0.4][rng.random_range(0..4)],
        mu_min: [-0.25, 0.0, 0.25, 0.5][rng.random_range(0..4)],
        top_m: rng.random_range(1..=12),
        signed: rng.random_bool(0.5),
        ..MinerConfig::default()
    }
}

pub fn check_apriori(dataset: &CategoricalDataset, config: &MinerConfig) -> Result<(), String> {
    let got = found_of(&apriori_mine(dataset, config), dataset.n_labels())?;
    compare(
        &got,
        &mining::frequent_rules(dataset, config.r_max, config.s_min),
    )
}

/// Largest gap between the sampler's log posterior and the oracle's, both
/// taken relative to the empty list.
pub fn max_log_posterior_gap(
    dataset: &CategoricalDataset,
    rules: &[Rule],
    config: &BrlConfig,
) -> Result<f64, String> {
    let space = RuleSpace::new(dataset, rules.to_vec(), config).map_err(|e| e.to_string())?;
    let params = prior_params(rules, config, dataset.n_labels());
    let oracle = |l: &[usize]| {
        exact::prior(rules, l, &params).ln()
            + exact::log_likelihood(dataset, rules, l, &params.alpha)
    };
    let base_fast = space.log_posterior(&[]);
    let base_oracle = oracle(&[]);
    Ok(exact::all_lists(rules.len(), params.max_len)
        .iter()
        .map(|l| ((space.log_posterior(l) - base_fast) - (oracle(l) - base_oracle)).abs())
        .fold(0.0, f64::max))
}

fn prior_params(rules: &[Rule], config: &BrlConfig, n_labels: usize) -> PriorParams {
    PriorParams {
        lambda: config.lambda,
        eta: config.eta_card,
        alpha: config.alpha_for(n_labels).expect("valid alpha"),
        max_len: config.max_list_len.unwrap_or(rules.len()),
    }
}

/// Total variation between the pooled chain states (after `burn_in`) and
/// the enumerated posterior.
pub fn sampler_total_variation(
    dataset: &CategoricalDataset,
    rules: &[Rule],
    config: &BrlConfig,
    iterations: usize,
    burn_in: usize,
) -> Result<f64, String> {
    let space = RuleSpace::new(dataset, rules.to_vec(), config).map_err(|e| e.to_string())?;
    let posterior = exact::posterior(
        dataset,
        rules,
        &prior_params(rules, config, dataset.n_labels()),
    );
    let mut visits = vec![0usize; posterior.len()];
    let mut total = 0usize;
    let proposal = StandardMoves;
    for c in 0..config.n_chains {
        let mut chain = Chain::new(&space, &proposal, config.seed + c as u64, 1);
        chain.advance(iterations).map_err(|e| e.to_string())?;
        for s in chain
            .trace()
            .samples
            .iter()
            .filter(|s| s.iteration > burn_in)
        {
            let i = posterior
                .iter()
                .position(|(l, _)| *l == s.state)
                .ok_or_else(|| format!("chain visited {:?}, outside the support", s.state))?;
            visits[i] += 1;
            total += 1;
        }
    }
    Ok(0.5
        * posterior
            .iter()
            .zip(&visits)
            .map(|((_, p), &v)| (v as f64 / total as f64 - p).abs())
            .sum::<f64>())
}

/// A data set and seven rules (lengths 1 and 2) for the sampler check.
pub fn sampler_instance(seed: u64) -> (CategoricalDataset, Vec<Rule>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dataset = random_dataset(&mut rng, 24, 12, 2);
    let mut pool = mining::all_rules(&dataset, 2);
    let mut rules = Vec::new();
    while rules.len() < 7 && !pool.is_empty() {
        let lits = pool.swap_remove(rng.random_range(0..pool.len()));
        let want_len = if rules.len() < 4 { 1 } else { 2 };
        if lits.len() == want_len {
            rules.push(Rule::new(lits).expect("distinct attributes"));
        }
    }
    (dataset, rules)
}
