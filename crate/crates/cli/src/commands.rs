use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rulelist::brl::{train, BrlConfig, BrlError, StopReason};
use rulelist::dataset::{
    load_csv, load_csv_with_schema, load_features_with_schema, Bins, CategoricalDataset,
    LoadOptions,
};
use rulelist::io::{write_atomic, write_json, ModelFile, RulesFile};
use rulelist::miner::{Budget, McaOptionsConfig, MineError, MinerConfig, MinerRegistry, RuleMiner};
use rulelist::pipeline::{
    benchmark, cross_validate, evaluate, BenchConfig, BenchRow, BenchStatus, Evaluation,
    PipelineError,
};
use rulelist::rule::Rule;
use rulelist::synth::SynthConfig;

use crate::config::ConfigFile;
use crate::{BrlArgs, Cli, Command, DataArgs, Failure, MinerArgs};

type Outcome = Result<u8, Failure>;

fn mine_failure(e: MineError) -> Failure {
    match e {
        MineError::InvalidConfig(_) | MineError::UnknownMiner(_) => Failure::usage(e),
        _ => Failure::data(e),
    }
}

fn brl_failure(e: BrlError) -> Failure {
    match e {
        BrlError::InvalidConfig(_) => Failure::usage(e),
        _ => Failure::data(e),
    }
}

fn pipeline_failure(e: PipelineError) -> Failure {
    match e {
        PipelineError::Mine(e) => mine_failure(e),
        PipelineError::Brl(e) => brl_failure(e),
        other => Failure::data(other),
    }
}

pub fn run(cli: Cli) -> Outcome {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path).map_err(Failure::usage)?,
        None => ConfigFile::default(),
    };
    let threads = config
        .pick_opt(cli.threads, "threads")
        .map_err(Failure::usage)?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::usage)?;
    }
    let seed = config
        .pick(cli.seed, "seed", 0u64)
        .map_err(Failure::usage)?;
    let ctx = Session { config, seed };
    match cli.command {
        Command::Mine { data, miner, out } => ctx.mine(&data, &miner, &out),
        Command::Train {
            data,
            brl,
            rules,
            out,
        } => ctx.train(&data, &brl, &rules, &out),
        Command::Predict {
            model,
            data,
            missing_as_category,
            out,
        } => predict(&model, &data, missing_as_category, out.as_deref()),
        Command::Evaluate {
            model,
            cv,
            data,
            miner,
            brl,
            out,
        } => ctx.evaluate(model.as_deref(), cv, &data, &miner, &brl, out.as_deref()),
        Command::Render { model, out } => render(&model, out.as_deref()),
        Command::Benchmark {
            miner,
            attributes,
            rows,
            categories,
            repetitions,
            signal_fraction,
            signal_strength,
            miners,
            out,
        } => {
            let synth = SynthConfig {
                n_rows: rows,
                n_categories: categories,
                signal_fraction,
                signal_strength,
                seed: ctx.seed,
                ..SynthConfig::default()
            };
            let bench = BenchConfig {
                attribute_grid: attributes,
                repetitions,
                synth,
            };
            ctx.benchmark(&bench, &miner, &miners, &out)
        }
    }
}

struct Session {
    config: ConfigFile,
    seed: u64,
}

impl Session {
    fn load_options(&self, args: &DataArgs) -> Result<(PathBuf, LoadOptions), Failure> {
        let c = &self.config;
        let path: PathBuf = c
            .pick_opt(args.data.clone(), "data")
            .map_err(Failure::usage)?
            .ok_or_else(|| {
                Failure::usage(anyhow!("no input: pass --data or set `data` in the config"))
            })?;
        let label: String = c
            .pick_opt(args.label.clone(), "label")
            .map_err(Failure::usage)?
            .ok_or_else(|| {
                Failure::usage(anyhow!(
                    "no label column: pass --label or set `label` in the config"
                ))
            })?;
        let mut numeric_bins: BTreeMap<String, Bins> = BTreeMap::new();
        if args.bins.is_empty() {
            if let Some(spec) = c.raw("bins") {
                for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (col, bins) =
                        crate::parse_bins(item).map_err(|e| Failure::usage(anyhow!(e)))?;
                    numeric_bins.insert(col, bins);
                }
            }
        } else {
            numeric_bins.extend(args.bins.iter().cloned());
        }
        let missing_as_category = args.missing_as_category
            || c.get::<bool>("missing_as_category")
                .map_err(Failure::usage)?
                .unwrap_or(false);
        Ok((
            path,
            LoadOptions {
                label_column: label,
                numeric_bins,
                missing_as_category,
            },
        ))
    }

    fn load(&self, args: &DataArgs) -> Result<(CategoricalDataset, LoadOptions), Failure> {
        let (path, options) = self.load_options(args)?;
        let dataset = load_csv(&path, &options)
            .with_context(|| format!("loading {}", path.display()))
            .map_err(Failure::data)?;
        Ok((dataset, options))
    }

    fn miner(
        &self,
        args: &MinerArgs,
    ) -> Result<(std::sync::Arc<dyn RuleMiner>, MinerConfig), Failure> {
        self.miner_with_defaults(args, &MinerConfig::default())
    }

    fn miner_with_defaults(
        &self,
        args: &MinerArgs,
        defaults: &MinerConfig,
    ) -> Result<(std::sync::Arc<dyn RuleMiner>, MinerConfig), Failure> {
        let c = &self.config;
        let u = Failure::usage;
        let algo: String = c
            .pick(args.algo.clone(), "miner.algo", "mca".to_string())
            .map_err(u)?;
        let signed = if args.unsigned {
            false
        } else {
            c.get::<bool>("miner.signed")
                .map_err(u)?
                .unwrap_or(defaults.signed)
        };
        let config = MinerConfig {
            r_max: c
                .pick(args.r_max, "miner.r_max", defaults.r_max)
                .map_err(u)?,
            s_min: c
                .pick(args.s_min, "miner.s_min", defaults.s_min)
                .map_err(u)?,
            mu_min: c
                .pick(args.mu_min, "miner.mu_min", defaults.mu_min)
                .map_err(u)?,
            top_m: c.pick(args.top, "miner.top", defaults.top_m).map_err(u)?,
            signed,
            mca: McaOptionsConfig {
                components: c
                    .pick_opt(args.components, "miner.components")
                    .map_err(u)?
                    .or(defaults.mca.components),
            },
            budget: Budget {
                max_seconds: c
                    .pick_opt(args.max_seconds, "miner.max_seconds")
                    .map_err(u)?
                    .or(defaults.budget.max_seconds),
                max_candidates: c
                    .pick_opt(args.max_candidates, "miner.max_candidates")
                    .map_err(u)?
                    .or(defaults.budget.max_candidates),
            },
        };
        config.validate().map_err(mine_failure)?;
        let miner = MinerRegistry::builtin().get(&algo).map_err(mine_failure)?;
        Ok((miner, config))
    }

    fn brl(&self, args: &BrlArgs) -> Result<BrlConfig, Failure> {
        let c = &self.config;
        let u = Failure::usage;
        let d = BrlConfig::default();
        let alpha = match c.pick_opt(args.alpha.clone(), "brl.alpha").map_err(u)? {
            None => None,
            Some(text) => Some(
                text.split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Failure::usage(anyhow!("--alpha: {e}")))?,
            ),
        };
        let config = BrlConfig {
            lambda: c.pick(args.lambda, "brl.lambda", d.lambda).map_err(u)?,
            eta_card: c.pick(args.eta, "brl.eta", d.eta_card).map_err(u)?,
            alpha,
            n_chains: c.pick(args.chains, "brl.chains", d.n_chains).map_err(u)?,
            max_iters: c
                .pick(args.max_iters, "brl.max_iters", d.max_iters)
                .map_err(u)?,
            check_interval: c
                .pick(args.check_interval, "brl.check_interval", d.check_interval)
                .map_err(u)?,
            rhat_threshold: c.pick(args.rhat, "brl.rhat", d.rhat_threshold).map_err(u)?,
            seed: self.seed,
            max_list_len: c
                .pick_opt(args.max_list_len, "brl.max_list_len")
                .map_err(u)?,
            thin: c.pick(args.thin, "brl.thin", d.thin).map_err(u)?,
            parallel: !args.sequential,
        };
        config.validate().map_err(brl_failure)?;
        Ok(config)
    }

    fn mine(&self, data: &DataArgs, miner_args: &MinerArgs, out: &Path) -> Outcome {
        let (dataset, _) = self.load(data)?;
        let (miner, config) = self.miner(miner_args)?;
        let mined = miner.mine(&dataset, &config).map_err(mine_failure)?;
        write_json(
            out,
            &RulesFile::new(&dataset, &mined, miner.name(), &config),
        )
        .map_err(Failure::data)?;
        for (k, rules) in mined.per_label().iter().enumerate() {
            eprintln!("{}: {} rules", dataset.label_names()[k], rules.len());
        }
        eprintln!("wrote {} distinct rules to {}", mined.len(), out.display());
        Ok(0)
    }

    fn train(&self, data: &DataArgs, brl_args: &BrlArgs, rules_path: &Path, out: &Path) -> Outcome {
        let (dataset, _) = self.load(data)?;
        let config = self.brl(brl_args)?;
        let rules_file = RulesFile::load(rules_path).map_err(Failure::data)?;
        let rules: Vec<Rule> = rules_file
            .scored_rules(&dataset)
            .map_err(Failure::data)?
            .into_iter()
            .map(|sr| sr.rule)
            .collect();
        let outcome = train(&dataset, &rules, &config).map_err(brl_failure)?;
        let model = ModelFile::new(&dataset, &outcome, &config);
        write_json(out, &model).map_err(Failure::data)?;
        let d = &outcome.diagnostics;
        eprintln!(
            "{} chains, {} iterations each, acceptance {:.3}, R-hat {}, stop: {:?}",
            d.n_chains,
            d.iterations,
            d.acceptance_rate,
            d.final_rhat()
                .map_or("n/a".to_string(), |r| format!("{r:.4}")),
            d.stop_reason
        );
        eprint!("{}", model.render());
        if d.stop_reason == StopReason::MaxIterations {
            eprintln!(
                "warning: chains did not reach R-hat <= {} within {} iterations",
                config.rhat_threshold, config.max_iters
            );
            return Ok(3);
        }
        Ok(0)
    }

    fn evaluate(
        &self,
        model: Option<&Path>,
        cv: Option<usize>,
        data: &DataArgs,
        miner_args: &MinerArgs,
        brl_args: &BrlArgs,
        out: Option<&Path>,
    ) -> Outcome {
        let folds = self
            .config
            .pick_opt(cv, "cv.folds")
            .map_err(Failure::usage)?;
        let mut records = Vec::new();
        let confusion;
        let label_names;
        match (model, folds) {
            (Some(model_path), _) => {
                let model = ModelFile::load(model_path).map_err(Failure::data)?;
                let list = model.rule_list().map_err(Failure::data)?;
                let path = self
                    .config
                    .pick_opt(data.data.clone(), "data")
                    .map_err(Failure::usage)?
                    .ok_or_else(|| Failure::usage(anyhow!("no input: pass --data")))?;
                let missing = data.missing_as_category
                    || self
                        .config
                        .get::<bool>("missing_as_category")
                        .map_err(Failure::usage)?
                        .unwrap_or(false);
                let dataset = load_csv_with_schema(
                    &path,
                    &model.schemas,
                    &model.label_column,
                    &model.label_names,
                    missing,
                )
                .with_context(|| format!("loading {}", path.display()))
                .map_err(Failure::data)?;
                let ev = evaluate(&list, &dataset).map_err(pipeline_failure)?;
                records.push(MetricRecord::new(
                    "all",
                    dataset.n_rows(),
                    &ev,
                    list.len(),
                    None,
                    None,
                ));
                confusion = ev.confusion;
                label_names = model.label_names.clone();
            }
            (None, Some(k)) => {
                let (dataset, _) = self.load(data)?;
                let (miner, miner_config) = self.miner(miner_args)?;
                let brl_config = self.brl(brl_args)?;
                let report = cross_validate(
                    &dataset,
                    miner.as_ref(),
                    &miner_config,
                    &brl_config,
                    k,
                    self.seed,
                )
                .map_err(pipeline_failure)?;
                for f in &report.folds {
                    records.push(MetricRecord::new(
                        &f.fold.to_string(),
                        f.n_test,
                        &f.evaluation,
                        f.list_length,
                        Some(f.iterations),
                        Some(f.stop_reason),
                    ));
                }
                records.push(MetricRecord {
                    fold: "mean".into(),
                    n_test: dataset.n_rows(),
                    accuracy: report.mean_accuracy,
                    roc_auc: report.mean_roc_auc,
                    kappa: report.mean_kappa,
                    list_length: None,
                    iterations: None,
                    stop_reason: None,
                });
                confusion = report.confusion;
                label_names = dataset.label_names().to_vec();
            }
            (None, None) => return Err(Failure::usage(anyhow!("pass --model or --cv K"))),
        }

        print_table(&records);
        println!();
        println!("confusion (rows = true, columns = predicted):");
        let width = label_names
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(1)
            .max(6);
        print!("{:>width$}", "");
        for l in &label_names {
            print!(" {l:>width$}");
        }
        println!();
        for (l, row) in label_names.iter().zip(confusion.counts()) {
            print!("{l:>width$}");
            for c in row {
                print!(" {c:>width$}");
            }
            println!();
        }
        if confusion.chance_agreement().is_ok_and(|p| p >= 1.0) {
            eprintln!("warning: chance agreement is 1, kappa reported as 0");
        }
        if let Some(path) = out {
            write_atomic(path, &metrics_csv(&records)).map_err(Failure::data)?;
        }
        Ok(0)
    }

    fn benchmark(
        &self,
        bench: &BenchConfig,
        miner_args: &MinerArgs,
        names: &[String],
        out: &Path,
    ) -> Outcome {
        let defaults = MinerConfig {
            r_max: 3,
            s_min: 0.1,
            budget: Budget {
                max_seconds: Some(300.0),
                max_candidates: None,
            },
            ..MinerConfig::default()
        };
        let (_, config) = self.miner_with_defaults(miner_args, &defaults)?;
        let registry = MinerRegistry::builtin();
        let miners = names
            .iter()
            .map(|n| registry.get(n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(mine_failure)?;
        let refs: Vec<&dyn RuleMiner> = miners.iter().map(|m| m.as_ref()).collect();
        let rows = benchmark(bench, &refs, &config, |r| {
            eprintln!(
                "{:>4} attributes  {:<8} {:>10.4} s  {:?} ({} rules)",
                r.n_attributes, r.miner, r.seconds, r.status, r.n_rules
            );
        });
        write_atomic(out, &bench_csv(&rows)).map_err(Failure::data)?;
        print_bench_summary(&rows, names);
        Ok(0)
    }
}

fn predict(model_path: &Path, data: &Path, missing: bool, out: Option<&Path>) -> Outcome {
    let model = ModelFile::load(model_path).map_err(Failure::data)?;
    let list = model.rule_list().map_err(Failure::data)?;
    let rows = load_features_with_schema(data, &model.schemas, missing)
        .with_context(|| format!("loading {}", data.display()))
        .map_err(Failure::data)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["row".to_string(), "predicted".to_string()];
    header.extend(model.label_names.iter().map(|l| format!("p_{l}")));
    writer.write_record(&header).map_err(Failure::data)?;
    for (i, row) in rows.iter().enumerate() {
        let p = list.predict_proba(row);
        let mut record = vec![i.to_string(), model.label_names[list.predict(row)].clone()];
        record.extend(p.iter().map(|v| v.to_string()));
        writer.write_record(&record).map_err(Failure::data)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Failure::data(anyhow!("{e}")))?;
    emit(out, &bytes)
}

fn render(model_path: &Path, out: Option<&Path>) -> Outcome {
    let model = ModelFile::load(model_path).map_err(Failure::data)?;
    emit(out, model.render().as_bytes())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => write_atomic(path, bytes).map_err(Failure::data)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(Failure::data)?;
        }
    }
    Ok(0)
}

struct MetricRecord {
    fold: String,
    n_test: usize,
    accuracy: f64,
    roc_auc: Option<f64>,
    kappa: f64,
    list_length: Option<usize>,
    iterations: Option<usize>,
    stop_reason: Option<StopReason>,
}

impl MetricRecord {
    fn new(
        fold: &str,
        n_test: usize,
        ev: &Evaluation,
        list_length: usize,
        iterations: Option<usize>,
        stop_reason: Option<StopReason>,
    ) -> Self {
        Self {
            fold: fold.to_string(),
            n_test,
            accuracy: ev.accuracy,
            roc_auc: ev.roc_auc,
            kappa: ev.kappa,
            list_length: Some(list_length),
            iterations,
            stop_reason,
        }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::MaxIterations => "max_iterations",
        StopReason::SingleChain => "single_chain",
    }
}

fn metrics_csv(records: &[MetricRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "fold",
        "n_test",
        "accuracy",
        "roc_auc",
        "kappa",
        "list_length",
        "iterations",
        "stop_reason",
    ])
    .expect("in-memory write");
    for r in records {
        w.write_record([
            r.fold.clone(),
            r.n_test.to_string(),
            r.accuracy.to_string(),
            opt(r.roc_auc),
            r.kappa.to_string(),
            opt(r.list_length),
            opt(r.iterations),
            opt(r.stop_reason.map(stop_name)),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

fn print_table(records: &[MetricRecord]) {
    println!(
        "{:<6} {:>7} {:>9} {:>9} {:>9} {:>6}",
        "fold", "n", "accuracy", "roc_auc", "kappa", "rules"
    );
    for r in records {
        println!(
            "{:<6} {:>7} {:>9.4} {:>9} {:>9.4} {:>6}",
            r.fold,
            r.n_test,
            r.accuracy,
            r.roc_auc.map_or("-".to_string(), |v| format!("{v:.4}")),
            r.kappa,
            r.list_length.map_or("-".to_string(), |v| v.to_string())
        );
    }
}

fn bench_csv(rows: &[BenchRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n_attributes",
        "miner",
        "repetition",
        "seconds",
        "status",
        "n_rules",
    ])
    .expect("in-memory write");
    for r in rows {
        let status = match r.status {
            BenchStatus::Completed => "completed",
            BenchStatus::BudgetExceeded => "budget_exceeded",
            BenchStatus::Failed => "failed",
        };
        w.write_record([
            r.n_attributes.to_string(),
            r.miner.clone(),
            r.repetition.to_string(),
            format!("{:.6}", r.seconds),
            status.to_string(),
            r.n_rules.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

fn print_bench_summary(rows: &[BenchRow], names: &[String]) {
    let mut grid: Vec<usize> = rows.iter().map(|r| r.n_attributes).collect();
    grid.dedup();
    print!("{:>10}", "attributes");
    for n in names {
        print!(" {n:>14}");
    }
    println!();
    for p in grid {
        print!("{p:>10}");
        for n in names {
            let cell: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.n_attributes == p && &r.miner == n)
                .collect();
            let text = if cell.iter().any(|r| r.status != BenchStatus::Completed) {
                "over budget".to_string()
            } else {
                format!(
                    "{:.4} s",
                    cell.iter().map(|r| r.seconds).sum::<f64>() / cell.len() as f64
                )
            };
            print!(" {text:>14}");
        }
        println!();
    }
}
