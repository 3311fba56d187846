use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ami_ids::classifier::Classifier;
use ami_ids::config::RunConfig;
use ami_ids::dataset::{
    attack_category, build_encoding, encode_all, fit_standardization, parse_nslkdd, standardize_all, write_encoded_csv,
    EncodedRecord, EncodingTable, RawRecord, FEATURE_NAMES,
};
use ami_ids::experiments::{
    compare_algorithms, comparison_csv, cross_validate, emit_csv, evaluate, sweep_activations, sweep_architecture,
    sweep_csv, sweep_epochs, sweep_packets, AlgorithmSpec, CsvOptions, EvalReport, SweepResult,
};
use ami_ids::mlp::{self, ActivationKind};
use ami_ids::model_doc::ModelDocument;
use ami_ids::stream::{classify_stream, Clock, FrozenClock, MonotonicClock, SensorRole, StreamOptions};
use ami_ids::{derive_seed, write_atomic, Error, Result};

/// Seed tag for standalone training (`derive_seed(seed, TRAIN_SEED_TAG)`).
const TRAIN_SEED_TAG: u64 = 3;

/// Deep-learning intrusion detection for smart-meter networks, trained and
/// evaluated on NSL-KDD.
///
/// Settings come from a TOML file (--config) and are overridden by flags.
/// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.
#[derive(Parser, Debug)]
#[command(name = "ami-ids", version)]
struct Cli {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long, short = 'c', global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed; every random choice is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for all written artifacts.
    #[arg(long, short = 'o', global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Leave the train_seconds column empty so reports are byte-reproducible.
    #[arg(long, global = true)]
    no_timing: bool,

    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode NSL-KDD files and report record counts and feature statistics.
    Preprocess(DataArgs),
    /// Train the MLP on the whole pool and write the model document.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Model document destination (default: <output-dir>/model.json).
        #[arg(long, value_name = "FILE")]
        model_out: Option<PathBuf>,
    },
    /// Cross-validate one algorithm, or score a saved model on labeled files.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Classifier to cross-validate.
        #[arg(long, value_enum, default_value = "mlp")]
        algorithm: Algorithm,
        /// Score this model document instead of cross-validating.
        #[arg(long, value_name = "FILE")]
        model_file: Option<PathBuf>,
        /// Number of folds.
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Cross-validated sweep over one parameter.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Parameter to vary; the grid comes from the config unless --grid is given.
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated grid; architecture points are LAYERSxNODES (e.g. 2x5,2x300).
        #[arg(long, value_name = "LIST")]
        grid: Option<String>,
        /// Number of folds.
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Cross-validate MLP, random forest, SVM and naive Bayes on shared folds.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        /// Number of folds.
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Classify a record stream and write one alert line per detected attack.
    Monitor {
        /// Model document with its encoding and standardization tables.
        #[arg(long, value_name = "FILE")]
        model_file: Option<PathBuf>,
        /// NSL-KDD lines to classify; `-` reads standard input.
        #[arg(long, value_name = "FILE", default_value = "-")]
        input: PathBuf,
        /// Role stamped on alerts.
        #[arg(long, value_parser = parse_role)]
        role: Option<SensorRole>,
        /// Minimum attack confidence for an alert, in [0.5, 1].
        #[arg(long)]
        threshold: Option<f64>,
        /// Alert log destination; `-` writes standard output
        /// (default: <output-dir>/alerts.log).
        #[arg(long, value_name = "FILE")]
        alerts: Option<PathBuf>,
        /// Stamp every alert with time 0 for reproducible logs.
        #[arg(long)]
        frozen_clock: bool,
    },
}

#[derive(Args, Debug, Default)]
struct DataArgs {
    /// NSL-KDD file(s) forming the data pool (repeatable).
    #[arg(long = "input", short = 'i', value_name = "FILE")]
    inputs: Vec<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Hidden-layer activation.
    #[arg(long, value_parser = parse_activation)]
    activation: Option<ActivationKind>,
    /// Number of hidden layers.
    #[arg(long)]
    hidden_layers: Option<usize>,
    /// Units per hidden layer.
    #[arg(long)]
    nodes: Option<usize>,
    /// Passes over the training data.
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size.
    #[arg(long)]
    batch_size: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Algorithm {
    Mlp,
    RandomForest,
    NaiveBayes,
    Svm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SweepParam {
    Packets,
    Epochs,
    Architecture,
    Activation,
}

fn parse_activation(s: &str) -> std::result::Result<ActivationKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_role(s: &str) -> std::result::Result<SensorRole, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = cli.output_dir {
        config.output_dir = dir;
    }
    if cli.no_timing {
        config.output.timing = false;
    }
    let csv = CsvOptions {
        timing: config.output.timing,
    };

    match cli.command {
        Command::Preprocess(data) => {
            apply_data(&mut config, data);
            config.validate()?;
            cmd_preprocess(&config)
        }
        Command::Train { data, model, model_out } => {
            apply_data(&mut config, data);
            apply_model(&mut config, model);
            config.validate()?;
            let out = model_out.unwrap_or_else(|| config.output_dir.join("model.json"));
            cmd_train(&config, &out)
        }
        Command::Evaluate {
            data,
            model,
            algorithm,
            model_file,
            folds,
        } => {
            apply_data(&mut config, data);
            apply_model(&mut config, model);
            if let Some(k) = folds {
                config.cv.folds = k;
            }
            config.validate()?;
            match model_file {
                Some(path) => cmd_score(&config, &path),
                None => cmd_evaluate(&config, algorithm, csv),
            }
        }
        Command::Sweep {
            data,
            model,
            param,
            grid,
            folds,
        } => {
            apply_data(&mut config, data);
            apply_model(&mut config, model);
            if let Some(k) = folds {
                config.cv.folds = k;
            }
            if let Some(grid) = grid {
                apply_grid(&mut config, param, &grid)?;
            }
            config.validate()?;
            cmd_sweep(&config, param, csv)
        }
        Command::Compare { data, folds } => {
            apply_data(&mut config, data);
            if let Some(k) = folds {
                config.cv.folds = k;
            }
            config.validate()?;
            cmd_compare(&config, csv)
        }
        Command::Monitor {
            model_file,
            input,
            role,
            threshold,
            alerts,
            frozen_clock,
        } => {
            if let Some(m) = model_file {
                config.monitor.model = m;
            }
            if let Some(r) = role {
                config.monitor.role = r;
            }
            if let Some(t) = threshold {
                config.monitor.threshold = t;
            }
            config.validate()?;
            let alerts = alerts.unwrap_or_else(|| config.output_dir.join("alerts.log"));
            cmd_monitor(&config, &input, &alerts, frozen_clock)
        }
    }
}

fn apply_data(config: &mut RunConfig, data: DataArgs) {
    if !data.inputs.is_empty() {
        config.data.inputs = data.inputs;
    }
}

fn apply_model(config: &mut RunConfig, m: ModelArgs) {
    let t = &mut config.model;
    if let Some(a) = m.activation {
        t.activation = a;
    }
    if let Some(v) = m.hidden_layers {
        t.hidden_layers = v;
    }
    if let Some(v) = m.nodes {
        t.nodes = v;
    }
    if let Some(v) = m.epochs {
        t.epochs = v;
    }
    if let Some(v) = m.batch_size {
        t.batch_size = v;
    }
}

fn parse_list<T: std::str::FromStr>(grid: &str, what: &str) -> Result<Vec<T>> {
    grid.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("bad {what} grid value `{s}`")))
        })
        .collect()
}

fn apply_grid(config: &mut RunConfig, param: SweepParam, grid: &str) -> Result<()> {
    let sweep = &mut config.sweep;
    match param {
        SweepParam::Packets => sweep.packets = parse_list(grid, "packets")?,
        SweepParam::Epochs => sweep.epochs = parse_list(grid, "epochs")?,
        SweepParam::Activation => {
            sweep.activations = grid
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?;
        }
        SweepParam::Architecture => {
            sweep.architecture = grid
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    let bad = || Error::Config(format!("architecture point `{s}` is not LAYERSxNODES"));
                    let (l, n) = s.split_once(['x', 'X']).ok_or_else(bad)?;
                    Ok([
                        l.trim().parse().map_err(|_| bad())?,
                        n.trim().parse().map_err(|_| bad())?,
                    ])
                })
                .collect::<Result<_>>()?;
        }
    }
    Ok(())
}

struct Pool {
    per_file: Vec<(PathBuf, Vec<RawRecord>)>,
    encoding: EncodingTable,
    records: Vec<EncodedRecord>,
}

fn load_pool(config: &RunConfig) -> Result<Pool> {
    config.check_inputs()?;
    let mut per_file = Vec::new();
    for path in &config.data.inputs {
        let file = File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
        let records = parse_nslkdd(BufReader::new(file)).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })?;
        log::info!("{}: {} records", path.display(), records.len());
        per_file.push((path.clone(), records));
    }
    let all: Vec<RawRecord> = per_file.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    let encoding = build_encoding(&all)?;
    let records = encode_all(&all, &encoding)?;
    Ok(Pool {
        per_file,
        encoding,
        records,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn cmd_preprocess(config: &RunConfig) -> Result<()> {
    let pool = load_pool(config)?;
    let out = &config.output_dir;

    let mut encoded = Vec::new();
    write_encoded_csv(&pool.records, &mut encoded)?;
    write_atomic(&out.join("encoded.csv"), &encoded)?;

    let params = fit_standardization(&pool.records)?;
    let mut stats = String::from("index,feature,mean,std,min,max,constant\n");
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        let (lo, hi) = pool
            .records
            .iter()
            .map(|r| r.x[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let _ = writeln!(
            stats,
            "{},{name},{:.6},{:.6},{lo},{hi},{}",
            i + 1,
            params.mu[i],
            params.sigma[i],
            params.constant_mask[i]
        );
    }
    write_text(&out.join("feature_stats.csv"), &stats)?;

    let tables = serde_json::json!({ "encoding": pool.encoding, "standardization": params });
    let tables = serde_json::to_string_pretty(&tables).map_err(|e| Error::Format(e.to_string()))? + "\n";
    write_text(&out.join("preprocess_tables.json"), &tables)?;

    let mut summary = String::new();
    for (path, records) in &pool.per_file {
        let mut counts: BTreeMap<&str, usize> = ["normal", "dos", "probe", "r2l", "u2r", "unknown"]
            .into_iter()
            .map(|c| (c, 0))
            .collect();
        for r in records {
            *counts.entry(attack_category(&r.label)).or_default() += 1;
        }
        let _ = writeln!(summary, "{}", path.display());
        let _ = writeln!(summary, "  records: {}", records.len());
        for (category, n) in &counts {
            let _ = writeln!(summary, "  {category}: {n}");
        }
    }
    let constant = params.constant_mask.iter().filter(|&&c| c).count();
    let _ = writeln!(summary, "pool records: {}", pool.records.len());
    let _ = writeln!(summary, "services: {}", pool.encoding.service_map.len());
    let _ = writeln!(summary, "constant features: {constant}");
    write_text(&out.join("preprocess_summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn cmd_train(config: &RunConfig, model_out: &Path) -> Result<()> {
    let pool = load_pool(config)?;
    let params = fit_standardization(&pool.records)?;
    let data = standardize_all(&pool.records, &params);
    let train_config = mlp::TrainConfig {
        seed: derive_seed(config.seed, TRAIN_SEED_TAG),
        ..config.model.clone()
    };
    let (model, trace) = mlp::train(&data, &train_config)?;

    let doc = ModelDocument::new(Classifier::Mlp(model), pool.encoding, params);
    doc.save(model_out)?;
    let mut text = String::from("epoch,loss,accuracy\n");
    for t in &trace {
        let _ = writeln!(text, "{},{:.6},{:.6}", t.epoch, t.loss, t.accuracy);
    }
    write_text(&config.output_dir.join("train_trace.csv"), &text)?;
    let last = trace.last().expect("at least one epoch");
    println!(
        "trained {} epochs on {} records: accuracy {:.6}, loss {:.6}; model written to {}",
        last.epoch,
        data.len(),
        last.accuracy,
        last.loss,
        model_out.display()
    );
    Ok(())
}

fn spec_for(config: &RunConfig, algorithm: Algorithm) -> AlgorithmSpec {
    match algorithm {
        Algorithm::Mlp => AlgorithmSpec::Mlp(config.model.clone()),
        Algorithm::RandomForest => AlgorithmSpec::RandomForest(config.baselines.forest.clone()),
        Algorithm::NaiveBayes => AlgorithmSpec::NaiveBayes,
        Algorithm::Svm => AlgorithmSpec::Svm {
            config: config.baselines.svm.clone(),
            train_cap: config.baselines.svm_train_cap,
        },
    }
}

fn opt(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        let _ = write!(out, "{v:.6}");
    }
}

fn report_row(out: &mut String, label: &str, r: &EvalReport, csv: CsvOptions) {
    out.push_str(label);
    opt(out, Some(r.accuracy));
    opt(out, r.loss);
    opt(out, r.p_detection);
    opt(out, r.p_false_alarm);
    opt(out, r.p_miss);
    opt(out, csv.timing.then_some(r.train_seconds));
    out.push('\n');
}

const REPORT_HEADER: &str = "fold,accuracy,loss,p_detection,p_false_alarm,p_miss,train_seconds\n";

fn cmd_evaluate(config: &RunConfig, algorithm: Algorithm, csv: CsvOptions) -> Result<()> {
    let pool = load_pool(config)?;
    let spec = spec_for(config, algorithm);
    let cv = cross_validate(&spec, &pool.records, config.cv.folds, config.seed)?;
    let mut text = String::from(REPORT_HEADER);
    for (f, r) in cv.folds.iter().enumerate() {
        report_row(&mut text, &(f + 1).to_string(), r, csv);
    }
    let s = &cv.summary;
    text.push_str("mean");
    opt(&mut text, Some(s.accuracy.mean));
    opt(&mut text, s.loss.map(|m| m.mean));
    opt(&mut text, s.p_detection);
    opt(&mut text, s.p_false_alarm);
    opt(&mut text, s.p_miss);
    opt(&mut text, csv.timing.then_some(s.train_seconds));
    text.push('\n');
    let path = config.output_dir.join(format!("evaluate_{}.csv", spec.name()));
    write_text(&path, &text)?;
    println!(
        "{} {}-fold accuracy {:.6} ± {:.6}{}",
        spec.name(),
        s.folds,
        s.accuracy.mean,
        s.accuracy.std,
        s.loss.map_or(String::new(), |l| format!(", loss {:.6}", l.mean))
    );
    Ok(())
}

fn cmd_score(config: &RunConfig, model_path: &Path) -> Result<()> {
    if !model_path.is_file() {
        return Err(Error::Config(format!("model file not found: {}", model_path.display())));
    }
    config.check_inputs()?;
    let doc = ModelDocument::load(model_path)?;
    let mut predictions = Vec::new();
    let mut truths = Vec::new();
    let mut skipped = 0usize;
    for path in &config.data.inputs {
        let records = parse_nslkdd(BufReader::new(File::open(path)?))?;
        for r in &records {
            match doc.prepare(&r.features) {
                Ok(x) => {
                    predictions.push(doc.classifier.predict(&x)?);
                    truths.push(ami_ids::dataset::binarize_label(&r.label));
                }
                Err(Error::UnknownSymbol { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} records with unknown symbols were skipped");
    }
    let report = evaluate(&predictions, &truths)?;
    let mut text = String::from(REPORT_HEADER);
    report_row(&mut text, "holdout", &report, CsvOptions { timing: false });
    write_text(&config.output_dir.join("evaluate_model.csv"), &text)?;
    println!(
        "{} records: accuracy {:.6}{}",
        predictions.len(),
        report.accuracy,
        report.loss.map_or(String::new(), |l| format!(", loss {l:.6}"))
    );
    Ok(())
}

fn cmd_sweep(config: &RunConfig, param: SweepParam, csv: CsvOptions) -> Result<()> {
    let pool = load_pool(config)?;
    let cv = config.cv_settings();
    let name = match param {
        SweepParam::Packets => "packets",
        SweepParam::Epochs => "epochs",
        SweepParam::Architecture => "architecture",
        SweepParam::Activation => "activation",
    };
    let path = config.output_dir.join(format!("sweep_{name}.csv"));
    // rewrite the file after every grid point so an interrupted sweep keeps its rows
    let mut flush = |partial: &SweepResult| emit_csv(&sweep_csv(partial, csv), &path);
    let data = &pool.records;
    let model = &config.model;
    let result = match param {
        SweepParam::Packets => sweep_packets(data, &config.sweep.packets, model, cv, &mut flush)?,
        SweepParam::Epochs => sweep_epochs(data, &config.sweep.epochs, model, cv, &mut flush)?,
        SweepParam::Architecture => {
            let grid: Vec<(usize, usize)> = config.sweep.architecture.iter().map(|&[l, n]| (l, n)).collect();
            sweep_architecture(data, &grid, model, cv, &mut flush)?
        }
        SweepParam::Activation => sweep_activations(data, &config.sweep.activations, model, cv, &mut flush)?,
    };
    let text = sweep_csv(&result, csv);
    emit_csv(&text, &path)?;
    print!("{text}");
    Ok(())
}

fn cmd_compare(config: &RunConfig, csv: CsvOptions) -> Result<()> {
    let pool = load_pool(config)?;
    let comparison = compare_algorithms(&pool.records, &config.compare_config(), config.cv_settings())?;
    let text = comparison_csv(&comparison, csv);
    emit_csv(&text, &config.output_dir.join("comparison.csv"))?;
    print!("{text}");
    Ok(())
}

fn cmd_monitor(config: &RunConfig, input: &Path, alerts: &Path, frozen_clock: bool) -> Result<()> {
    let model_path = &config.monitor.model;
    if !model_path.is_file() {
        return Err(Error::Config(format!("model file not found: {}", model_path.display())));
    }
    let doc = ModelDocument::load(model_path)?;
    let source: Box<dyn BufRead> = if input.as_os_str() == "-" {
        Box::new(io::stdin().lock())
    } else {
        let file = File::open(input).map_err(|e| Error::Config(format!("cannot open {}: {e}", input.display())))?;
        Box::new(BufReader::new(file))
    };
    let options = StreamOptions {
        role: config.monitor.role,
        threshold: config.monitor.threshold,
    };
    let mut clock: Box<dyn Clock> = if frozen_clock {
        Box::new(FrozenClock)
    } else {
        Box::new(MonotonicClock::start())
    };

    let to_stdout = alerts.as_os_str() == "-";
    let mut log_text = String::new();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let summary = classify_stream(&doc, source, options, clock.as_mut(), &mut |alert| {
        if to_stdout {
            writeln!(out, "{}", alert.to_line())?;
        } else {
            log_text.push_str(&alert.to_line());
            log_text.push('\n');
        }
        Ok(())
    })?;
    if !to_stdout {
        write_text(alerts, &log_text)?;
    }
    eprintln!("{summary}");
    Ok(())
}
