//! Sparsity statistics and the per-run metric report.

use serde::{Deserialize, Serialize};

use super::{ClassTransformer, FeatureMatrix, LinearOvrClassifier};
use crate::error::{Error, Result};
use crate::evaluation::Polynomial;
use crate::scalar::Scalar;

/// Coefficients with magnitude below this count as zero.
pub const ZERO_COEFFICIENT_THRESHOLD: f64 = 1e-12;

/// Coefficient counts over a set of generators. The leading coefficient is
/// never counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparsityStats {
    /// Coefficient entries.
    pub entries: usize,
    pub zeros: usize,
    pub nonzeros: usize,
    /// `zeros / entries`, 0 for no entries.
    pub sparsity: f64,
}

impl SparsityStats {
    pub fn of<T: Scalar>(p: &Polynomial<T>) -> Self {
        Self::over(std::iter::once(p))
    }

    pub fn over<'a, T: Scalar>(generators: impl IntoIterator<Item = &'a Polynomial<T>>) -> Self {
        let threshold = T::lit(ZERO_COEFFICIENT_THRESHOLD);
        let (mut entries, mut zeros) = (0, 0);
        for g in generators {
            entries += g.coefficients().len();
            zeros += g.coefficients().iter().filter(|c| c.abs() < threshold).count();
        }
        Self {
            entries,
            zeros,
            nonzeros: entries - zeros,
            sparsity: if entries == 0 {
                0.0
            } else {
                zeros as f64 / entries as f64
            },
        }
    }
}

/// Wall-clock timings in seconds, kept apart from the deterministic fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub search_secs: f64,
    pub train_secs: f64,
    pub test_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub generators: usize,
    pub order_ideal_terms: usize,
    pub max_degree: u32,
    #[serde(flatten)]
    pub sparsity: SparsityStats,
    /// Misclassification rates in percent.
    pub train_error: f64,
    pub test_error: f64,
    pub timing: Timing,
}

/// Misclassification rate in percent.
pub fn error_percent(predicted: &[usize], labels: &[usize]) -> Result<f64> {
    if predicted.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            found: predicted.len(),
        });
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let wrong = predicted.iter().zip(labels).filter(|(p, l)| p != l).count();
    Ok(100.0 * wrong as f64 / labels.len() as f64)
}

/// Features and labels of one evaluation split.
#[derive(Clone, Copy, Debug)]
pub struct Split<'a, T> {
    pub features: &'a FeatureMatrix<T>,
    pub labels: &'a [usize],
}

pub fn compute_metrics<T: Scalar>(
    transformer: &ClassTransformer<T>,
    classifier: &LinearOvrClassifier<T>,
    train: Split<'_, T>,
    test: Split<'_, T>,
    timing: Timing,
) -> Result<MetricsReport> {
    let train_error = error_percent(&classifier.predict(train.features)?, train.labels)?;
    let test_error = error_percent(&classifier.predict(test.features)?, test.labels)?;
    Ok(MetricsReport {
        generators: transformer.dim(),
        order_ideal_terms: transformer.blocks().iter().map(|b| b.order_ideal().len()).sum(),
        max_degree: transformer
            .blocks()
            .iter()
            .map(|b| b.max_generator_degree())
            .max()
            .unwrap_or(0),
        sparsity: SparsityStats::over(transformer.generators()),
        train_error,
        test_error,
        timing,
    })
}
