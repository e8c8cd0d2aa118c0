//! Classification with generator features: per-class generators, the
//! feature map `x -> (|g(x)|)_g`, a linear one-vs-rest classifier and the
//! metric report.

mod classifier;
mod metrics;
mod scaling;

pub use classifier::{train_classifier, BinaryModel, ClassifierConfig, LinearOvrClassifier};
pub use metrics::{
    compute_metrics, error_percent, MetricsReport, SparsityStats, Split, Timing, ZERO_COEFFICIENT_THRESHOLD,
};
pub use scaling::{minmax_scale, MinMaxScaler};

use crate::error::{Error, Result};
use crate::evaluation::{evaluate_polynomial, EvaluationCache, PointSet, Polynomial};
use crate::monomials::Term;
use crate::oavi::{fit, GeneratorSet, OaviConfig};
use crate::scalar::Scalar;

/// Points with class labels `0..num_classes`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset<T> {
    points: PointSet<T>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    /// Row index of each point in the dataset it was loaded as.
    ids: Vec<usize>,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(points: PointSet<T>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::Dimension {
                expected: points.len(),
                found: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Data(format!("label {bad} has no class name")));
        }
        let ids = (0..labels.len()).collect();
        Ok(Self {
            points,
            labels,
            class_names,
            ids,
        })
    }

    pub fn points(&self) -> &PointSet<T> {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows with the given positions; class names are kept.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            points: self.points.select(indices)?,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            ids: indices.iter().map(|&i| self.ids[i]).collect(),
        })
    }

    /// Same labels with replaced points (e.g. after scaling).
    pub fn with_points(&self, points: PointSet<T>) -> Result<Self> {
        if points.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: points.len(),
            });
        }
        Ok(Self { points, ..self.clone() })
    }

    /// Points of class `class`, `None` if it has none.
    pub fn class_points(&self, class: usize) -> Result<Option<PointSet<T>>> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == class).collect();
        if idx.is_empty() {
            return Ok(None);
        }
        self.points.select(&idx).map(Some)
    }
}

/// Column-major feature matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix<T> {
    rows: usize,
    columns: Vec<Vec<T>>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(rows: usize, columns: Vec<Vec<T>>) -> Result<Self> {
        if let Some(c) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::Dimension {
                expected: rows,
                found: c.len(),
            });
        }
        Ok(Self { rows, columns })
    }

    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        let rows = columns
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Data("feature matrix needs a column".into()))?;
        Self::new(rows, columns)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.columns.iter().map(|c| c[i]).collect()
    }
}

/// Scaler plus one generator set per class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassTransformer<T> {
    scaler: MinMaxScaler<T>,
    blocks: Vec<GeneratorSet<T>>,
    missing_classes: Vec<usize>,
}

impl<T: Scalar> ClassTransformer<T> {
    /// Fits the scaler on all of `data` and then generators on each class
    /// of the scaled data. Classes without points get an empty block.
    pub fn fit(data: &LabeledDataset<T>, cfg: &OaviConfig<T>, clamp: bool) -> Result<Self> {
        let scaler = MinMaxScaler::fit(data.points())?.with_clamp(clamp);
        let scaled = data.with_points(scaler.transform(data.points())?)?;
        Self::fit_scaled(&scaled, scaler, cfg)
    }

    /// Fits generators on already scaled data.
    pub fn fit_scaled(scaled: &LabeledDataset<T>, scaler: MinMaxScaler<T>, cfg: &OaviConfig<T>) -> Result<Self> {
        if scaler.dim() != scaled.dim() {
            return Err(Error::Dimension {
                expected: scaler.dim(),
                found: scaled.dim(),
            });
        }
        let mut blocks = Vec::with_capacity(scaled.num_classes());
        let mut missing_classes = Vec::new();
        for class in 0..scaled.num_classes() {
            match scaled.class_points(class)? {
                Some(points) => blocks.push(fit(&points, cfg)?),
                None => {
                    missing_classes.push(class);
                    blocks.push(GeneratorSet::from_parts(vec![Term::one(scaled.dim())], Vec::new())?);
                }
            }
        }
        Ok(Self {
            scaler,
            blocks,
            missing_classes,
        })
    }

    pub fn from_parts(scaler: MinMaxScaler<T>, blocks: Vec<GeneratorSet<T>>) -> Result<Self> {
        if blocks.iter().any(|b| b.nvars() != scaler.dim()) {
            return Err(Error::Data("generator arity differs from scaler dimension".into()));
        }
        Ok(Self {
            scaler,
            blocks,
            missing_classes: Vec::new(),
        })
    }

    pub fn scaler(&self) -> &MinMaxScaler<T> {
        &self.scaler
    }

    pub fn blocks(&self) -> &[GeneratorSet<T>] {
        &self.blocks
    }

    /// Classes that had no training points.
    pub fn missing_classes(&self) -> &[usize] {
        &self.missing_classes
    }

    /// Classes whose block has no generators.
    pub fn empty_blocks(&self) -> Vec<usize> {
        (0..self.blocks.len())
            .filter(|&c| self.blocks[c].generators().is_empty())
            .collect()
    }

    pub fn generators(&self) -> impl Iterator<Item = &Polynomial<T>> {
        self.blocks.iter().flat_map(|b| b.generators())
    }

    /// Number of features: all generators of all classes.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.generators().len()).sum()
    }

    /// Features of points already scaled by [`scaler`](Self::scaler).
    pub fn features(&self, scaled: &PointSet<T>) -> Result<FeatureMatrix<T>> {
        if scaled.dim() != self.scaler.dim() {
            return Err(Error::Dimension {
                expected: self.scaler.dim(),
                found: scaled.dim(),
            });
        }
        let mut cache = EvaluationCache::new();
        let columns = self
            .generators()
            .map(|g| {
                Ok(evaluate_polynomial(g, scaled, &mut cache)?
                    .into_iter()
                    .map(T::abs)
                    .collect())
            })
            .collect::<Result<Vec<Vec<T>>>>()?;
        FeatureMatrix::new(scaled.len(), columns)
    }

    /// Scales raw points and computes their features.
    pub fn transform(&self, points: &PointSet<T>) -> Result<FeatureMatrix<T>> {
        self.features(&self.scaler.transform(points)?)
    }
}
