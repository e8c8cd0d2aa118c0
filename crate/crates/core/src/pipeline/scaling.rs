//! Min-max feature scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::PointSet;
use crate::scalar::Scalar;

/// Per-feature affine map sending the training range of each column onto
/// `[0, 1]`. Constant columns map to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct MinMaxScaler<T> {
    mins: Vec<T>,
    maxs: Vec<T>,
    /// Clamp transformed values into `[-1, 1]`.
    pub clamp: bool,
}

impl<T: Scalar> MinMaxScaler<T> {
    pub fn fit(train: &PointSet<T>) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Data("cannot fit a scaler on an empty point set".into()));
        }
        let (mins, maxs) = (0..train.dim())
            .map(|j| {
                let c = train.column(j);
                let lo = c.iter().copied().fold(T::infinity(), T::min);
                let hi = c.iter().copied().fold(T::neg_infinity(), T::max);
                (lo, hi)
            })
            .unzip();
        Ok(Self {
            mins,
            maxs,
            clamp: true,
        })
    }

    pub fn from_parts(mins: Vec<T>, maxs: Vec<T>, clamp: bool) -> Result<Self> {
        if mins.len() != maxs.len() {
            return Err(Error::Dimension {
                expected: mins.len(),
                found: maxs.len(),
            });
        }
        if mins
            .iter()
            .zip(&maxs)
            .any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(Error::Data("scaler bounds must be finite with min <= max".into()));
        }
        Ok(Self { mins, maxs, clamp })
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn mins(&self) -> &[T] {
        &self.mins
    }

    pub fn maxs(&self) -> &[T] {
        &self.maxs
    }

    #[inline]
    fn scale_value(&self, j: usize, v: T) -> T {
        let span = self.maxs[j] - self.mins[j];
        let s = if span > T::zero() {
            (v - self.mins[j]) / span
        } else {
            T::zero()
        };
        if self.clamp {
            s.max(-T::one()).min(T::one())
        } else {
            s
        }
    }

    pub fn transform(&self, points: &PointSet<T>) -> Result<PointSet<T>> {
        if points.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: points.dim(),
            });
        }
        points.map_columns(|j, c| c.iter().map(|&v| self.scale_value(j, v)).collect())
    }
}

/// Fits a scaler on `train` and applies it to both sets.
pub fn minmax_scale<T: Scalar>(
    train: &PointSet<T>,
    other: &PointSet<T>,
) -> Result<(PointSet<T>, PointSet<T>, MinMaxScaler<T>)> {
    let scaler = MinMaxScaler::fit(train)?;
    Ok((scaler.transform(train)?, scaler.transform(other)?, scaler))
}
