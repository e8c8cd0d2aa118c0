//! Generators of the approximately vanishing ideal of a point set, computed
//! with convex oracles (pairwise Frank-Wolfe over the l1-ball, Frank-Wolfe
//! over the l2-ball, or accelerated gradient descent), and their use as a
//! feature map for linear classification.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! harness and command line work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod harness;
pub mod linalg;
pub mod monomials;
pub mod oavi;
pub mod pipeline;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use evaluation::{EvaluationCache, PointSet, Polynomial};
pub use monomials::{deglex_compare, Term};
pub use oavi::{build_border, check_maximality, fit, oracle_call, GeneratorSet, OaviConfig, OracleKind};
pub use scalar::Scalar;
pub use solvers::{OracleProblem, OracleSolution, Region, Termination};

pub type PointSet64 = PointSet<f64>;
pub type Polynomial64 = Polynomial<f64>;
pub type GeneratorSet64 = GeneratorSet<f64>;
pub type OaviConfig64 = OaviConfig<f64>;
pub type OracleProblem64 = OracleProblem<f64>;
pub type PointSet32 = PointSet<f32>;
pub type Polynomial32 = Polynomial<f32>;
pub type GeneratorSet32 = GeneratorSet<f32>;
pub type OaviConfig32 = OaviConfig<f32>;
pub type OracleProblem32 = OracleProblem<f32>;
