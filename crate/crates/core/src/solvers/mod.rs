//! Solvers for the regularized least-squares problems handed out by OAVI.
//!
//! Every solver minimizes
//! `f(v) = (1/m) ||A v + b||^2 + (lambda/2) ||v||^2`
//! over one of three regions: all of `R^k`, the l1-ball, or the l2-ball.
//! The leading coefficient of the resulting polynomial is fixed to one and
//! is not part of `v`, so it is neither constrained nor regularized.

mod agd;
mod fw;
mod pfw;

pub use agd::agd_solve;
pub use fw::fw_solve;
pub use pfw::{pfw_solve, ActiveSet, Atom, PairwiseFrankWolfe};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Gram;
use crate::scalar::{dot, norm_sq, Scalar};

/// Default iteration cap for all three solvers.
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;
/// Default relative objective decrease below which a solver reports a stall.
pub const DEFAULT_STALL_TOLERANCE: f64 = 1e-12;
/// Active-set weights below this are dropped.
pub const WEIGHT_DROP_THRESHOLD: f64 = 1e-12;

/// Feasible region of an oracle problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region<T> {
    Unconstrained,
    L1Ball { radius: T },
    L2Ball { radius: T },
}

impl<T: Scalar> Region<T> {
    /// l1-ball of radius `tau - 1`, so that `||(v, 1)||_1 <= tau`.
    pub fn l1_for_tau(tau: T) -> Result<Self> {
        check_tau(tau)?;
        Ok(Region::L1Ball { radius: tau - T::one() })
    }

    /// l2-ball of radius `tau - 1`.
    pub fn l2_for_tau(tau: T) -> Result<Self> {
        check_tau(tau)?;
        Ok(Region::L2Ball { radius: tau - T::one() })
    }

    pub fn radius(&self) -> Option<T> {
        match *self {
            Region::Unconstrained => None,
            Region::L1Ball { radius } | Region::L2Ball { radius } => Some(radius),
        }
    }
}

fn check_tau<T: Scalar>(tau: T) -> Result<()> {
    if !(tau >= T::lit(2.0)) || !tau.is_finite() {
        return Err(Error::Config(format!("tau must be a finite number >= 2, got {tau}")));
    }
    Ok(())
}

/// Why a solver stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Objective at or below the vanishing threshold `psi`.
    VanishingReached,
    /// Frank-Wolfe gap at or below `epsilon`.
    GapBelowEpsilon,
    /// No significant progress.
    Stalled,
    IterationCap,
}

/// A least-squares instance: minimize `(1/m)||A v + b||^2 + (lambda/2)||v||^2`.
///
/// `A^T A`, `A^T b` and `b^T b` are precomputed so that iterations cost
/// `O(k^2)` (or `O(k)` for pairwise steps) instead of `O(mk)`.
#[derive(Clone, Debug)]
pub struct OracleProblem<T> {
    columns: Arc<Vec<Vec<T>>>,
    target: Vec<T>,
    gram: Arc<Gram<T>>,
    atb: Vec<T>,
    btb: T,
    inv_m: T,
    pub lambda: T,
    pub region: Region<T>,
    pub epsilon: T,
    /// Early-stop threshold on the objective; `None` disables it.
    pub psi: Option<T>,
    pub max_iterations: usize,
    pub stall_tolerance: T,
    /// Record the objective at every iteration in [`OracleSolution::trace`].
    pub record_trace: bool,
}

impl<T: Scalar> OracleProblem<T> {
    /// Builds an unconstrained, unregularized problem from the columns of
    /// `A` and the target `b`.
    pub fn new(columns: Vec<Vec<T>>, target: Vec<T>) -> Result<Self> {
        let gram = Gram::from_columns(&columns);
        Self::with_gram(columns, target, gram)
    }

    /// Like [`new`](Self::new) but reuses an already computed `A^T A`.
    pub fn with_gram(columns: Vec<Vec<T>>, target: Vec<T>, gram: Gram<T>) -> Result<Self> {
        Self::shared(Arc::new(columns), Arc::new(gram), target)
    }

    /// Like [`with_gram`](Self::with_gram) but shares `A` and `A^T A` with
    /// the caller, which can keep growing them once the problem is dropped.
    pub fn shared(columns: Arc<Vec<Vec<T>>>, gram: Arc<Gram<T>>, target: Vec<T>) -> Result<Self> {
        let m = target.len();
        if m == 0 {
            return Err(Error::Data("oracle problem needs at least one point".into()));
        }
        if columns.is_empty() {
            return Err(Error::Data("oracle problem needs at least one column".into()));
        }
        for c in columns.iter() {
            if c.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    found: c.len(),
                });
            }
        }
        if gram.dim() != columns.len() {
            return Err(Error::Dimension {
                expected: columns.len(),
                found: gram.dim(),
            });
        }
        let atb = columns.iter().map(|c| dot(c, &target)).collect();
        let btb = norm_sq(&target);
        Ok(Self {
            columns,
            target,
            gram,
            atb,
            btb,
            inv_m: T::one() / T::from_usize(m).expect("m"),
            lambda: T::zero(),
            region: Region::Unconstrained,
            epsilon: T::zero(),
            psi: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            stall_tolerance: T::lit(DEFAULT_STALL_TOLERANCE),
            record_trace: false,
        })
    }

    pub fn lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn region(mut self, region: Region<T>) -> Self {
        self.region = region;
        self
    }

    pub fn epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn psi(mut self, psi: T) -> Self {
        self.psi = Some(psi);
        self
    }

    pub fn max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = cap;
        self
    }

    pub fn stall_tolerance(mut self, tol: T) -> Self {
        self.stall_tolerance = tol;
        self
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    /// Number of coefficients `k`.
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Number of points `m`.
    pub fn points(&self) -> usize {
        self.target.len()
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn target(&self) -> &[T] {
        &self.target
    }

    pub fn gram(&self) -> &Gram<T> {
        &self.gram
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero()) {
            return Err(Error::Config("lambda must be >= 0".into()));
        }
        if !(self.epsilon >= T::zero()) {
            return Err(Error::Config("epsilon must be >= 0".into()));
        }
        if let Some(r) = self.region.radius() {
            if !(r >= T::one()) || !r.is_finite() {
                return Err(Error::Config(format!("ball radius must be >= 1 (tau >= 2), got {r}")));
            }
        }
        Ok(())
    }

    fn check_dim(&self, v: &[T]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Objective from the residual `A v + b` (no cancellation).
    pub fn objective(&self, v: &[T]) -> Result<T> {
        self.check_dim(v)?;
        let mut r = self.target.clone();
        for (c, &vi) in self.columns.iter().zip(v) {
            if vi == T::zero() {
                continue;
            }
            for (ri, &ci) in r.iter_mut().zip(c) {
                *ri += vi * ci;
            }
        }
        Ok(norm_sq(&r) * self.inv_m + self.half_lambda() * norm_sq(v))
    }

    #[inline]
    fn half_lambda(&self) -> T {
        self.lambda * T::lit(0.5)
    }

    /// Objective from the Gram form, given `qv = A^T A v`.
    #[inline]
    pub(crate) fn objective_gram(&self, v: &[T], qv: &[T]) -> T {
        let two = T::lit(2.0);
        ((dot(v, qv) + two * dot(&self.atb, v) + self.btb) * self.inv_m).max(T::zero())
            + self.half_lambda() * norm_sq(v)
    }

    /// Gradient `(2/m)(A^T A v + A^T b) + lambda v`, given `qv = A^T A v`.
    #[inline]
    pub(crate) fn gradient_gram(&self, v: &[T], qv: &[T]) -> Vec<T> {
        let s = T::lit(2.0) * self.inv_m;
        qv.iter()
            .zip(&self.atb)
            .zip(v)
            .map(|((&q, &a), &x)| s * (q + a) + self.lambda * x)
            .collect()
    }

    /// Curvature `2 d^T A^T A d / m + lambda ||d||^2` of `gamma -> f(x + gamma d)`.
    pub(crate) fn curvature(&self, d: &[T]) -> T {
        let qd = self.gram.mul_vec(d);
        T::lit(2.0) * self.inv_m * dot(d, &qd) + self.lambda * norm_sq(d)
    }

    pub(crate) fn inv_m(&self) -> T {
        self.inv_m
    }
}

/// Result of a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct OracleSolution<T> {
    pub coefficients: Vec<T>,
    /// Objective at `coefficients`, computed from the residual.
    pub objective: T,
    /// Frank-Wolfe gap at `coefficients` (ball regions only).
    pub gap: Option<T>,
    pub termination: Termination,
    pub iterations: usize,
    /// Objective per iteration when [`OracleProblem::record_trace`] is set.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<T>,
}

/// Objective value and gradient at `v`.
pub fn objective_and_gradient<T: Scalar>(p: &OracleProblem<T>, v: &[T]) -> Result<(T, Vec<T>)> {
    p.check_dim(v)?;
    let qv = p.gram.mul_vec(v);
    Ok((p.objective(v)?, p.gradient_gram(v, &qv)))
}

/// Linear minimization over the l1-ball: the vertex `-radius * sign(g_i) e_i`
/// for the largest `|g_i|` (lowest index on ties). A zero gradient returns
/// `+radius e_1`.
pub fn lmo_l1<T: Scalar>(gradient: &[T], radius: T) -> (Atom, Vec<T>) {
    let atom = lmo_l1_atom(gradient);
    let mut s = vec![T::zero(); gradient.len()];
    s[atom.index] = atom.sign::<T>() * radius;
    (atom, s)
}

pub(crate) fn lmo_l1_atom<T: Scalar>(gradient: &[T]) -> Atom {
    let mut best = 0;
    let mut best_abs = T::zero();
    for (i, &g) in gradient.iter().enumerate() {
        if g.abs() > best_abs {
            best = i;
            best_abs = g.abs();
        }
    }
    Atom {
        index: best,
        negative: best_abs > T::zero() && gradient[best] > T::zero(),
    }
}

/// Linear minimization over the l2-ball: `-radius * g / ||g||`; the zero
/// vector for a zero gradient.
pub fn lmo_l2<T: Scalar>(gradient: &[T], radius: T) -> Vec<T> {
    let n = norm_sq(gradient).sqrt();
    if n == T::zero() {
        return vec![T::zero(); gradient.len()];
    }
    gradient.iter().map(|&g| -radius * g / n).collect()
}

/// Exact minimizer of `gamma -> f(x + gamma d)` on `[0, gamma_max]`.
pub fn line_search_quadratic<T: Scalar>(p: &OracleProblem<T>, x: &[T], d: &[T], gamma_max: T) -> Result<T> {
    p.check_dim(x)?;
    p.check_dim(d)?;
    if !(gamma_max >= T::zero()) {
        return Err(Error::Numeric(format!("gamma_max must be >= 0, got {gamma_max}")));
    }
    if x.iter().chain(d).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite line-search input".into()));
    }
    let qx = p.gram.mul_vec(x);
    let g = p.gradient_gram(x, &qx);
    Ok(clipped_step(dot(&g, d), p.curvature(d), gamma_max))
}

#[inline]
pub(crate) fn clipped_step<T: Scalar>(slope: T, curvature: T, gamma_max: T) -> T {
    if curvature > T::zero() {
        (-slope / curvature).max(T::zero()).min(gamma_max)
    } else if slope < T::zero() {
        gamma_max
    } else {
        T::zero()
    }
}

/// Relative decrease test shared by the solvers. `decrease` is passed
/// directly so that progress below the resolution of `before` still counts.
#[inline]
pub(crate) fn is_stalled<T: Scalar>(before: T, decrease: T, tol: T) -> bool {
    let scale = before.abs().max(T::min_positive_value());
    decrease <= tol * scale
}
