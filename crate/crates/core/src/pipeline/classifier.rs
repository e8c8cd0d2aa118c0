//! One-vs-rest linear classifier with l1 penalty and squared hinge loss.

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solver settings for [`train_classifier`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Weight of the loss term against the l1 penalty.
    pub c: f64,
    /// Stop once the summed optimality violation falls below
    /// `tolerance` times its value at the first pass.
    pub tolerance: f64,
    pub max_passes: usize,
}

impl ClassifierConfig {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            tolerance: 1e-4,
            max_passes: 1000,
        }
    }
}

/// Weights and bias of one binary problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct BinaryModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub converged: bool,
    pub passes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LinearOvrClassifier<T> {
    models: Vec<BinaryModel<T>>,
    pub config: ClassifierConfig,
}

impl<T: Scalar> LinearOvrClassifier<T> {
    pub fn from_parts(models: Vec<BinaryModel<T>>, config: ClassifierConfig) -> Result<Self> {
        if models.len() < 2 {
            return Err(Error::Data("a classifier needs at least two classes".into()));
        }
        let dim = models[0].weights.len();
        if models.iter().any(|m| m.weights.len() != dim) {
            return Err(Error::Data("class weight vectors differ in length".into()));
        }
        Ok(Self { models, config })
    }

    pub fn models(&self) -> &[BinaryModel<T>] {
        &self.models
    }

    pub fn num_classes(&self) -> usize {
        self.models.len()
    }

    pub fn dim(&self) -> usize {
        self.models[0].weights.len()
    }

    /// All binary problems met the tolerance within the pass limit.
    pub fn converged(&self) -> bool {
        self.models.iter().all(|m| m.converged)
    }

    /// Class scores `w_c . x + b_c` for every row, row-major.
    pub fn decision_function(&self, features: &FeatureMatrix<T>) -> Result<Vec<Vec<T>>> {
        if features.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: features.dim(),
            });
        }
        let mut scores = vec![Vec::with_capacity(self.models.len()); features.rows()];
        for model in &self.models {
            let mut s = vec![model.bias; features.rows()];
            for (col, &w) in features.columns().iter().zip(&model.weights) {
                if w == T::zero() {
                    continue;
                }
                for (si, &x) in s.iter_mut().zip(col) {
                    *si += w * x;
                }
            }
            for (row, v) in scores.iter_mut().zip(s) {
                row.push(v);
            }
        }
        Ok(scores)
    }

    /// Argmax of the class scores, lowest class index on ties.
    pub fn predict(&self, features: &FeatureMatrix<T>) -> Result<Vec<usize>> {
        Ok(self
            .decision_function(features)?
            .iter()
            .map(|row| {
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }
}

/// Trains one binary model per class (that class against the rest) by
/// minimizing `||w||_1 + |b| + C sum_i max(0, 1 - y_i (w.x_i + b))^2` with
/// coordinate descent: a one-dimensional Newton step per coordinate followed
/// by backtracking. The bias is treated as the weight of a constant feature.
pub fn train_classifier<T: Scalar>(
    features: &FeatureMatrix<T>,
    labels: &[usize],
    num_classes: usize,
    config: &ClassifierConfig,
) -> Result<LinearOvrClassifier<T>> {
    if num_classes < 2 {
        return Err(Error::Config("classification needs at least two classes".into()));
    }
    if labels.len() != features.rows() {
        return Err(Error::Dimension {
            expected: features.rows(),
            found: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::Data(format!(
            "label {bad} out of range for {num_classes} classes"
        )));
    }
    if !(config.c > 0.0) || !config.c.is_finite() {
        return Err(Error::Config(format!("C must be positive, got {}", config.c)));
    }
    if features.columns().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite feature value".into()));
    }
    let mut columns: Vec<&[T]> = features.columns().iter().map(Vec::as_slice).collect();
    let ones = vec![T::one(); features.rows()];
    columns.push(&ones);
    let models = (0..num_classes)
        .map(|class| {
            let y: Vec<T> = labels
                .iter()
                .map(|&l| if l == class { T::one() } else { -T::one() })
                .collect();
            let (mut w, converged, passes) = coordinate_descent(&columns, &y, config);
            let bias = w.pop().expect("bias coordinate");
            BinaryModel {
                weights: w,
                bias,
                converged,
                passes,
            }
        })
        .collect();
    Ok(LinearOvrClassifier {
        models,
        config: *config,
    })
}

const SIGMA: f64 = 0.01;
const MAX_BACKTRACKS: usize = 30;

/// Squared-hinge loss `C sum max(0, b_i)^2` for margins `b_i = 1 - y_i w.x_i`.
fn loss<T: Scalar>(margins: &[T], c: T) -> T {
    c * margins.iter().filter(|&&b| b > T::zero()).map(|&b| b * b).sum::<T>()
}

fn coordinate_descent<T: Scalar>(columns: &[&[T]], y: &[T], config: &ClassifierConfig) -> (Vec<T>, bool, usize) {
    let k = columns.len();
    let c = T::lit(config.c);
    let two = T::lit(2.0);
    let mut w = vec![T::zero(); k];
    let mut margins = vec![T::one(); y.len()];
    let mut initial_violation = None;
    let mut trial = vec![T::zero(); y.len()];

    for pass in 1..=config.max_passes {
        let mut violation = T::zero();
        for j in 0..k {
            let x = columns[j];
            let mut grad = T::zero();
            let mut hess = T::zero();
            for ((&b, &yi), &xi) in margins.iter().zip(y).zip(x) {
                if b > T::zero() {
                    grad -= two * c * yi * xi * b;
                    hess += two * c * xi * xi;
                }
            }
            let hess = hess.max(T::lit(1e-12));
            let wj = w[j];
            let gp = grad + T::one();
            let gn = grad - T::one();
            violation += if wj > T::zero() {
                gp.abs()
            } else if wj < T::zero() {
                gn.abs()
            } else {
                (-gp).max(gn).max(T::zero())
            };
            let d = if gp < hess * wj {
                -gp / hess
            } else if gn > hess * wj {
                -gn / hess
            } else {
                -wj
            };
            if d.abs() < T::lit(1e-12) {
                continue;
            }
            let base = loss(&margins, c) + wj.abs();
            let predicted = grad * d + (wj + d).abs() - wj.abs();
            let mut step = T::one();
            let mut accepted = false;
            for _ in 0..MAX_BACKTRACKS {
                for (((t, &b), &yi), &xi) in trial.iter_mut().zip(&margins).zip(y).zip(x) {
                    *t = b - step * d * yi * xi;
                }
                let value = loss(&trial, c) + (wj + step * d).abs();
                if value - base <= T::lit(SIGMA) * step * predicted {
                    accepted = true;
                    break;
                }
                step *= T::lit(0.5);
            }
            if accepted {
                w[j] = wj + step * d;
                margins.copy_from_slice(&trial);
            }
        }
        let init = *initial_violation.get_or_insert(violation);
        if violation <= T::lit(config.tolerance) * init {
            return (w, true, pass);
        }
    }
    (w, false, config.max_passes)
}
