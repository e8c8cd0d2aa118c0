//! Experiment orchestration: repeated splits, cross-validated
//! hyperparameters, refits, metrics and reports.

mod cv;
mod data;
mod model;

pub use cv::{cross_validate, CvEntry, CvResult, CvSettings, EpsilonRule, FitTemplate, Grids, HyperParams};
pub use data::{load_csv, load_features, load_labels, read_csv, split, CsvDataset};
pub use model::{ModelBlock, SerializedModel, MODEL_FORMAT_VERSION};

use std::path::PathBuf;
use std::time::Instant;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomials::TERM_ORDER;
use crate::pipeline::{
    compute_metrics, train_classifier, ClassTransformer, ClassifierConfig, LabeledDataset, LinearOvrClassifier,
    MetricsReport, SparsityStats, Split, Timing,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub label_col: String,
    pub train_frac: f64,
    pub reps: usize,
    pub seed: u64,
    pub cv_folds: usize,
    pub grids: Grids,
    pub template: FitTemplate,
    /// Clamp scaled non-training points into `[-1, 1]`.
    pub clamp: bool,
}

impl ExperimentConfig {
    pub fn new(data: impl Into<PathBuf>, label_col: impl Into<String>) -> Self {
        Self {
            data: data.into(),
            label_col: label_col.into(),
            train_frac: 0.6,
            reps: 10,
            seed: 0,
            cv_folds: 3,
            grids: Grids::default(),
            template: FitTemplate::default(),
            clamp: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_frac
            )));
        }
        if self.reps == 0 {
            return Err(Error::Config("need at least one repetition".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("need at least 2 cross-validation folds".into()));
        }
        self.grids.validate()?;
        for &psi in &self.grids.psi {
            for &lambda in &self.grids.lambda {
                self.template.config(psi, lambda)?;
            }
        }
        Ok(())
    }
}

/// Seed of stream `stream` derived from the master seed.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionReport {
    pub repetition: usize,
    pub split_seed: u64,
    pub cv_seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub best: HyperParams,
    pub metrics: MetricsReport,
    pub oracle_calls: usize,
    pub best_effort_calls: usize,
    pub degree_cap_hits: usize,
    pub warnings: Vec<String>,
    pub cv_table: Vec<CvEntry>,
}

/// Means over repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanReport {
    pub generators: f64,
    pub order_ideal_terms: f64,
    pub max_degree: f64,
    pub entries: f64,
    pub zeros: f64,
    pub nonzeros: f64,
    pub sparsity: f64,
    pub train_error: f64,
    pub test_error: f64,
    pub test_error_std: f64,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub scalar: String,
    pub term_order: String,
    pub rng: String,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            scalar: "f64".into(),
            term_order: TERM_ORDER.into(),
            rng: "ChaCha8".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub environment: Environment,
    pub dataset: DatasetSummary,
    pub repetitions: Vec<RepetitionReport>,
    pub mean: MeanReport,
    pub timing: ExperimentTiming,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub samples: usize,
    pub features: usize,
    pub classes: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTiming {
    pub total_secs: f64,
}

pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    /// Model of the last repetition.
    pub model: SerializedModel,
}

/// A transformer and classifier fitted on one dataset.
pub struct FittedPipeline {
    pub transformer: ClassTransformer<f64>,
    pub classifier: LinearOvrClassifier<f64>,
    pub model: SerializedModel,
}

/// Fits generators and a classifier on all of `data`.
pub fn fit_pipeline(
    data: &LabeledDataset<f64>,
    feature_names: &[String],
    template: &FitTemplate,
    params: HyperParams,
    clamp: bool,
) -> Result<FittedPipeline> {
    let cfg = template.config(params.psi, params.lambda)?;
    let transformer = ClassTransformer::fit(data, &cfg, clamp)?;
    let features = transformer.transform(data.points())?;
    let classifier = train_classifier(
        &features,
        data.labels(),
        data.num_classes(),
        &ClassifierConfig::new(params.c),
    )?;
    let model = SerializedModel::new(
        feature_names.to_vec(),
        data.class_names().to_vec(),
        cfg,
        &transformer,
        classifier.clone(),
    )?;
    Ok(FittedPipeline {
        transformer,
        classifier,
        model,
    })
}

/// Loads the dataset named in `cfg` and runs [`run_experiment_on`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let dataset = load_csv(&cfg.data, &cfg.label_col)?;
    run_experiment_on(cfg, &dataset)
}

/// For each repetition: split, cross-validate on the training part, refit
/// with the best hyperparameters and evaluate on both parts.
pub fn run_experiment_on(cfg: &ExperimentConfig, dataset: &CsvDataset) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let data = &dataset.data;
    if data.num_classes() < 2 {
        return Err(Error::Data("classification needs at least two classes".into()));
    }
    let started = Instant::now();
    let mut repetitions = Vec::with_capacity(cfg.reps);
    let mut last_model = None;
    for rep in 0..cfg.reps {
        let split_seed = sub_seed(cfg.seed, 2 * rep as u64);
        let cv_seed = sub_seed(cfg.seed, 2 * rep as u64 + 1);
        let context = |e: Error| annotate(e, rep);
        let (train, test) = split(data, cfg.train_frac, split_seed).map_err(context)?;
        let mut warnings = Vec::new();
        for (class, &count) in train.class_counts().iter().enumerate() {
            if count == 0 {
                warnings.push(format!("class '{}' has no training points", data.class_names()[class]));
            }
        }

        let t0 = Instant::now();
        let settings = CvSettings {
            folds: cfg.cv_folds,
            seed: cv_seed,
            clamp: cfg.clamp,
        };
        let cv = cross_validate(&train, &cfg.grids, &cfg.template, settings).map_err(context)?;
        if test.ids().iter().any(|id| cv.used_ids.contains(id)) {
            return Err(context(Error::Data("cross-validation saw test points".into())));
        }
        let search_secs = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let fitted =
            fit_pipeline(&train, &dataset.feature_names, &cfg.template, cv.best, cfg.clamp).map_err(context)?;
        let train_features = fitted.transformer.transform(train.points()).map_err(context)?;
        let train_secs = t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let test_features = fitted.transformer.transform(test.points()).map_err(context)?;
        fitted.classifier.predict(&test_features).map_err(context)?;
        let test_secs = t2.elapsed().as_secs_f64();

        let metrics = compute_metrics(
            &fitted.transformer,
            &fitted.classifier,
            Split {
                features: &train_features,
                labels: train.labels(),
            },
            Split {
                features: &test_features,
                labels: test.labels(),
            },
            Timing {
                search_secs,
                train_secs,
                test_secs,
            },
        )
        .map_err(context)?;

        let blocks = fitted.transformer.blocks();
        let oracle_calls = blocks.iter().map(|b| b.stats.oracle_calls).sum();
        let best_effort_calls = blocks.iter().map(|b| b.stats.best_effort_calls).sum();
        let degree_cap_hits = blocks.iter().filter(|b| b.stats.degree_cap_hit).count();
        for class in fitted.transformer.empty_blocks() {
            warnings.push(format!("class '{}' has no generators", data.class_names()[class]));
        }
        if !fitted.classifier.converged() {
            warnings.push("classifier did not reach its tolerance".into());
        }
        if best_effort_calls > 0 {
            warnings.push(format!(
                "{best_effort_calls} oracle calls ended without certified accuracy"
            ));
        }

        repetitions.push(RepetitionReport {
            repetition: rep,
            split_seed,
            cv_seed,
            train_size: train.len(),
            test_size: test.len(),
            best: cv.best,
            metrics,
            oracle_calls,
            best_effort_calls,
            degree_cap_hits,
            warnings,
            cv_table: cv.table,
        });
        last_model = Some(fitted.model);
    }
    let mean = mean_report(&repetitions);
    Ok(ExperimentOutcome {
        report: ExperimentReport {
            config: cfg.clone(),
            environment: Environment::default(),
            dataset: DatasetSummary {
                samples: data.len(),
                features: data.dim(),
                classes: data.class_names().to_vec(),
            },
            repetitions,
            mean,
            timing: ExperimentTiming {
                total_secs: started.elapsed().as_secs_f64(),
            },
        },
        model: last_model.expect("at least one repetition"),
    })
}

fn annotate(e: Error, rep: usize) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("repetition {rep}: {m}")),
        Error::Data(m) => Error::Data(format!("repetition {rep}: {m}")),
        Error::Numeric(m) => Error::Numeric(format!("repetition {rep}: {m}")),
        other => other,
    }
}

fn mean_report(reps: &[RepetitionReport]) -> MeanReport {
    let n = reps.len() as f64;
    let mean = |f: &dyn Fn(&RepetitionReport) -> f64| reps.iter().map(f).sum::<f64>() / n;
    let sparsity = |r: &RepetitionReport| -> SparsityStats { r.metrics.sparsity };
    let test_error = mean(&|r| r.metrics.test_error);
    let var = reps
        .iter()
        .map(|r| (r.metrics.test_error - test_error).powi(2))
        .sum::<f64>()
        / n;
    MeanReport {
        generators: mean(&|r| r.metrics.generators as f64),
        order_ideal_terms: mean(&|r| r.metrics.order_ideal_terms as f64),
        max_degree: mean(&|r| r.metrics.max_degree as f64),
        entries: mean(&|r| sparsity(r).entries as f64),
        zeros: mean(&|r| sparsity(r).zeros as f64),
        nonzeros: mean(&|r| sparsity(r).nonzeros as f64),
        sparsity: mean(&|r| sparsity(r).sparsity),
        train_error: mean(&|r| r.metrics.train_error),
        test_error,
        test_error_std: var.sqrt(),
        timing: Timing {
            search_secs: mean(&|r| r.metrics.timing.search_secs),
            train_secs: mean(&|r| r.metrics.timing.train_secs),
            test_secs: mean(&|r| r.metrics.timing.test_secs),
        },
    }
}

/// Removes every `timing` field from a JSON value, leaving the fields that
/// must be reproducible.
pub fn strip_timing(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.remove("timing");
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
