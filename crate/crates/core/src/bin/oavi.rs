use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use oavi::harness::{
    fit_pipeline, load_csv, load_features, load_labels, run_experiment, EpsilonRule, ExperimentConfig, FitTemplate,
    Grids, HyperParams, SerializedModel,
};
use oavi::pipeline::error_percent;
use oavi::{Error, OracleKind, Result};

#[derive(Parser)]
#[command(
    name = "oavi",
    version,
    about = "Approximately vanishing ideal generators as classification features"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit generators and a classifier on a whole dataset and save the model.
    Fit(FitArgs),
    /// Report the error of a saved model on a labeled dataset.
    Evaluate(EvaluateArgs),
    /// Repeated splits with cross-validated hyperparameters.
    Experiment(ExperimentArgs),
    /// Write the generator features of a dataset as CSV.
    Transform(TransformArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "label")]
    label_col: String,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value = "pfw")]
    oracle: OracleKind,
    #[arg(long, default_value_t = 50.0)]
    tau: f64,
    #[arg(long, default_value_t = 10)]
    max_degree: u32,
    #[arg(long, default_value = "psi/2")]
    epsilon_rule: EpsilonRule,
    /// Do not clamp scaled non-training points into [-1, 1].
    #[arg(long)]
    no_clamp: bool,
}

impl OracleArgs {
    fn template(&self) -> FitTemplate {
        FitTemplate {
            oracle: self.oracle,
            tau: self.tau,
            max_degree: self.max_degree,
            epsilon_rule: self.epsilon_rule,
            ..FitTemplate::default()
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    oracle: OracleArgs,
    #[arg(long, default_value_t = 0.01)]
    psi: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Classifier loss weight.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value = "model.json")]
    model: PathBuf,
    /// Summary output; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "model.json")]
    model: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Replace the psi grid by this single value.
    #[arg(long)]
    psi: Option<f64>,
    /// Replace the lambda grid by this single value.
    #[arg(long)]
    lambda: Option<f64>,
    /// Replace the C grid by this single value.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.6)]
    train_frac: f64,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 3)]
    cv_folds: usize,
    /// JSON file with optional "psi", "lambda" and "c" arrays.
    #[arg(long)]
    grid_file: Option<PathBuf>,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// Where to save the model of the last repetition.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "model.json")]
    model: PathBuf,
    /// Feature CSV; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<()> {
    let dataset = load_csv(&args.data.data, &args.data.label_col)?;
    let params = HyperParams {
        psi: args.psi,
        lambda: args.lambda,
        c: args.c,
    };
    let fitted = fit_pipeline(
        &dataset.data,
        &dataset.feature_names,
        &args.oracle.template(),
        params,
        !args.oracle.no_clamp,
    )?;
    fitted.model.save(&args.model)?;
    let predicted = fitted.model.predict(dataset.data.points())?;
    let blocks = fitted.transformer.blocks();
    let summary = json!({
        "model": args.model,
        "samples": dataset.data.len(),
        "generators": blocks.iter().map(|b| b.generators().len()).collect::<Vec<_>>(),
        "order_ideal_terms": blocks.iter().map(|b| b.order_ideal().len()).collect::<Vec<_>>(),
        "degree_cap_hit": blocks.iter().any(|b| b.stats.degree_cap_hit),
        "best_effort_calls": blocks.iter().map(|b| b.stats.best_effort_calls).sum::<usize>(),
        "classifier_converged": fitted.classifier.converged(),
        "train_error": error_percent(&predicted, dataset.data.labels())?,
    });
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&summary)?)
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let model = SerializedModel::load(&args.model)?;
    let points = load_features(&args.data.data, &model.variables)?;
    let labels = load_labels(&args.data.data, &args.data.label_col, &model.classes)?;
    let predicted = model.predict(&points)?;
    let k = model.classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&l, &p) in labels.iter().zip(&predicted) {
        confusion[l][p] += 1;
    }
    let summary = json!({
        "samples": labels.len(),
        "classes": model.classes,
        "error": error_percent(&predicted, &labels)?,
        "confusion": confusion,
    });
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&summary)?)
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut grids = match &args.grid_file {
        Some(path) => Grids::from_file(path)?,
        None => Grids::default(),
    };
    if let Some(psi) = args.psi {
        grids.psi = vec![psi];
    }
    if let Some(lambda) = args.lambda {
        grids.lambda = vec![lambda];
    }
    if let Some(c) = args.c {
        grids.c = vec![c];
    }
    let cfg = ExperimentConfig {
        train_frac: args.train_frac,
        reps: args.reps,
        seed: args.seed,
        cv_folds: args.cv_folds,
        grids,
        template: args.oracle.template(),
        clamp: !args.oracle.no_clamp,
        ..ExperimentConfig::new(args.data.data, args.data.label_col)
    };
    let outcome = run_experiment(&cfg)?;
    std::fs::write(&args.out, serde_json::to_string_pretty(&outcome.report)?)?;
    if let Some(path) = &args.model {
        outcome.model.save(path)?;
    }
    let mean = &outcome.report.mean;
    eprintln!(
        "{} repetitions: test error {:.2}% (std {:.2}), train error {:.2}%, {:.1} generators, sparsity {:.3}",
        cfg.reps, mean.test_error, mean.test_error_std, mean.train_error, mean.generators, mean.sparsity
    );
    Ok(())
}

fn transform(args: TransformArgs) -> Result<()> {
    let model = SerializedModel::load(&args.model)?;
    let points = load_features(&args.data, &model.variables)?;
    let features = model.transform(&points)?;
    let mut header = Vec::new();
    for block in &model.blocks {
        for g in &block.generators {
            header.push(format!("{}: {}", block.class, g.render_with(&model.variables)));
        }
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Data(format!("cannot write CSV: {e}"));
    wtr.write_record(&header).map_err(csv_err)?;
    for i in 0..features.rows() {
        wtr.write_record(features.row(i).iter().map(|v| v.to_string()))
            .map_err(csv_err)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))?;
    write_output(args.out.as_deref(), text.trim_end())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
        Command::Transform(a) => transform(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
