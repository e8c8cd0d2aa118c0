//! Hyperparameter grids and k-fold cross-validation.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::data::permutation;
use crate::error::{Error, Result};
use crate::oavi::{OaviConfig, OracleKind};
use crate::pipeline::{error_percent, train_classifier, ClassTransformer, ClassifierConfig, LabeledDataset};
use crate::solvers::DEFAULT_MAX_ITERATIONS;

/// How the oracle accuracy follows from `psi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonRule {
    /// `epsilon = psi / divisor`.
    PsiOver(f64),
    Fixed(f64),
}

impl Default for EpsilonRule {
    fn default() -> Self {
        EpsilonRule::PsiOver(2.0)
    }
}

impl EpsilonRule {
    pub fn epsilon(&self, psi: f64) -> f64 {
        match *self {
            EpsilonRule::PsiOver(d) => psi / d,
            EpsilonRule::Fixed(e) => e,
        }
    }
}

impl fmt::Display for EpsilonRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonRule::PsiOver(d) => write!(f, "psi/{d}"),
            EpsilonRule::Fixed(e) => write!(f, "{e}"),
        }
    }
}

impl FromStr for EpsilonRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("epsilon rule '{s}' is neither 'psi/<number>' nor a number"));
        let rule = if let Some(d) = s.strip_prefix("psi/") {
            EpsilonRule::PsiOver(d.trim().parse().map_err(|_| bad())?)
        } else if s == "psi" {
            EpsilonRule::PsiOver(1.0)
        } else {
            EpsilonRule::Fixed(s.parse().map_err(|_| bad())?)
        };
        match rule {
            EpsilonRule::PsiOver(d) if !(d >= 1.0) || !d.is_finite() => {
                Err(Error::Config(format!("epsilon divisor must be >= 1, got {d}")))
            }
            EpsilonRule::Fixed(e) if !(e >= 0.0) || !e.is_finite() => {
                Err(Error::Config(format!("fixed epsilon must be >= 0, got {e}")))
            }
            r => Ok(r),
        }
    }
}

impl Serialize for EpsilonRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EpsilonRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything of an [`OaviConfig`] except `psi` and `lambda`, which are
/// searched over.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitTemplate {
    pub oracle: OracleKind,
    pub tau: f64,
    pub max_degree: u32,
    pub epsilon_rule: EpsilonRule,
    pub max_iterations: usize,
}

impl Default for FitTemplate {
    fn default() -> Self {
        Self {
            oracle: OracleKind::Pfw,
            tau: 50.0,
            max_degree: 10,
            epsilon_rule: EpsilonRule::default(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl FitTemplate {
    pub fn config(&self, psi: f64, lambda: f64) -> Result<OaviConfig<f64>> {
        let cfg = OaviConfig::new(psi)
            .epsilon(self.epsilon_rule.epsilon(psi))
            .lambda(lambda)
            .tau(self.tau)
            .max_degree(self.max_degree)
            .oracle(self.oracle)
            .max_iterations(self.max_iterations);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Values tried for `psi`, `lambda` and the classifier's `C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default = "default_psi")]
    pub psi: Vec<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_c")]
    pub c: Vec<f64>,
}

fn default_psi() -> Vec<f64> {
    vec![0.1, 0.05, 0.01, 0.005, 0.001]
}

fn default_lambda() -> Vec<f64> {
    vec![0.0, 0.1, 1.0]
}

fn default_c() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            psi: default_psi(),
            lambda: default_lambda(),
            c: default_c(),
        }
    }
}

impl Grids {
    /// Reads a JSON object with optional `psi`, `lambda` and `c` arrays.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read grid file {}: {e}", path.display())))?;
        let grids: Grids = serde_json::from_str(&text)?;
        grids.validate()?;
        Ok(grids)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, values) in [("psi", &self.psi), ("lambda", &self.lambda), ("c", &self.c)] {
            if values.is_empty() {
                return Err(Error::Config(format!("{name} grid is empty")));
            }
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Config(format!("{name} grid needs finite non-negative values")));
            }
        }
        if self.c.contains(&0.0) {
            return Err(Error::Config("C must be positive".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.psi.len() * self.lambda.len() * self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub psi: f64,
    pub lambda: f64,
    pub c: f64,
}

impl HyperParams {
    /// Preference among equally good settings: larger `psi`, then larger
    /// `lambda`, then smaller `C`.
    fn simplicity(&self, other: &Self) -> Ordering {
        other
            .psi
            .total_cmp(&self.psi)
            .then(other.lambda.total_cmp(&self.lambda))
            .then(self.c.total_cmp(&other.c))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    #[serde(flatten)]
    pub params: HyperParams,
    /// Validation error per fold, in percent; `None` where the fit failed.
    pub fold_errors: Vec<Option<f64>>,
    /// Mean over folds, `None` if any fold failed.
    pub mean_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best: HyperParams,
    pub table: Vec<CvEntry>,
    /// Dataset ids of every point cross-validation looked at.
    #[serde(skip)]
    pub used_ids: BTreeSet<usize>,
}

/// Cross-validation settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvSettings {
    pub folds: usize,
    pub seed: u64,
    pub clamp: bool,
}

/// Full grid search with `folds`-fold cross-validation on `train`. The
/// scaler is fitted on each fold's training part. Generator fits are shared
/// by all values of `C`.
pub fn cross_validate(
    train: &LabeledDataset<f64>,
    grids: &Grids,
    template: &FitTemplate,
    settings: CvSettings,
) -> Result<CvResult> {
    grids.validate()?;
    let folds = settings.folds;
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if train.len() < folds {
        return Err(Error::Data(format!(
            "{} training points cannot fill {folds} folds",
            train.len()
        )));
    }
    let order = permutation(train.len(), settings.seed);
    let mut table: Vec<CvEntry> = Vec::with_capacity(grids.len());
    for &psi in &grids.psi {
        for &lambda in &grids.lambda {
            for &c in &grids.c {
                table.push(CvEntry {
                    params: HyperParams { psi, lambda, c },
                    fold_errors: Vec::with_capacity(folds),
                    mean_error: None,
                    failures: Vec::new(),
                });
            }
        }
    }
    let mut used_ids = BTreeSet::new();
    let base = train.len() / folds;
    let extra = train.len() % folds;
    let mut start = 0;
    for fold in 0..folds {
        let size = base + usize::from(fold < extra);
        let held: Vec<usize> = order[start..start + size].to_vec();
        let kept: Vec<usize> = order[..start].iter().chain(&order[start + size..]).copied().collect();
        start += size;
        let fit_part = train.select(&kept)?;
        let val_part = train.select(&held)?;
        used_ids.extend(fit_part.ids().iter().chain(val_part.ids()));

        let mut entry = 0;
        for &psi in &grids.psi {
            for &lambda in &grids.lambda {
                let prepared = template
                    .config(psi, lambda)
                    .and_then(|cfg| ClassTransformer::fit(&fit_part, &cfg, settings.clamp))
                    .and_then(|t| Ok((t.transform(fit_part.points())?, t.transform(val_part.points())?)));
                for &c in &grids.c {
                    let e = &mut table[entry];
                    entry += 1;
                    let result = prepared.as_ref().map_err(|e| e.to_string()).and_then(|(f_fit, f_val)| {
                        let clf =
                            train_classifier(f_fit, fit_part.labels(), train.num_classes(), &ClassifierConfig::new(c))
                                .map_err(|e| e.to_string())?;
                        let predicted = clf.predict(f_val).map_err(|e| e.to_string())?;
                        error_percent(&predicted, val_part.labels()).map_err(|e| e.to_string())
                    });
                    match result {
                        Ok(err) => e.fold_errors.push(Some(err)),
                        Err(msg) => {
                            e.fold_errors.push(None);
                            e.failures.push(format!("fold {fold}: {msg}"));
                        }
                    }
                }
            }
        }
    }
    for e in &mut table {
        e.mean_error = e
            .fold_errors
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.iter().sum::<f64>() / v.len() as f64);
    }
    let best = table
        .iter()
        .filter_map(|e| e.mean_error.map(|m| (m, e.params)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.simplicity(&b.1)))
        .map(|(_, p)| p)
        .ok_or_else(|| {
            let detail: Vec<String> = table
                .iter()
                .flat_map(|e| {
                    e.failures
                        .iter()
                        .map(move |f| format!("psi={} lambda={} C={}: {f}", e.params.psi, e.params.lambda, e.params.c))
                })
                .collect();
            Error::Numeric(format!("every grid point failed:\n{}", detail.join("\n")))
        })?;
    Ok(CvResult { best, table, used_ids })
}
