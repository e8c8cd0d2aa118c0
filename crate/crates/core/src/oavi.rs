//! Oracle approximate vanishing ideal: fitting generators degree by degree.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{mean_square, EvaluationCache, PointSet, Polynomial};
use crate::linalg::{least_squares_residual, Gram};
use crate::monomials::Term;
use crate::scalar::Scalar;
use crate::solvers::{
    agd_solve, fw_solve, pfw_solve, OracleProblem, OracleSolution, Region, Termination, DEFAULT_MAX_ITERATIONS,
};

/// Which convex solver answers the oracle calls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Pairwise Frank-Wolfe over the l1-ball of radius `tau - 1`.
    #[default]
    Pfw,
    /// Vanilla Frank-Wolfe over the l2-ball of radius `tau - 1`.
    Cg,
    /// Accelerated gradient descent, unconstrained.
    Agd,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Pfw => "pfw",
            OracleKind::Cg => "cg",
            OracleKind::Agd => "agd",
        })
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pfw" => Ok(OracleKind::Pfw),
            "cg" => Ok(OracleKind::Cg),
            "agd" => Ok(OracleKind::Agd),
            other => Err(Error::Config(format!(
                "unknown oracle '{other}' (expected pfw, cg or agd)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct OaviConfig<T> {
    /// Vanishing tolerance.
    pub psi: T,
    /// Oracle accuracy.
    pub epsilon: T,
    pub lambda: T,
    /// Generators satisfy `||(c, 1)|| <= tau` for the ball oracles.
    pub tau: T,
    pub max_degree: u32,
    pub oracle: OracleKind,
    pub max_iterations: usize,
}

impl<T: Scalar> OaviConfig<T> {
    /// Defaults: `epsilon = psi / 2`, `lambda = 0`, `tau = 50`, degree cap
    /// 10, pairwise Frank-Wolfe.
    pub fn new(psi: T) -> Self {
        Self {
            psi,
            epsilon: psi * T::lit(0.5),
            lambda: T::zero(),
            tau: T::lit(50.0),
            max_degree: 10,
            oracle: OracleKind::Pfw,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn tau(mut self, tau: T) -> Self {
        self.tau = tau;
        self
    }

    pub fn max_degree(mut self, d: u32) -> Self {
        self.max_degree = d;
        self
    }

    pub fn oracle(mut self, oracle: OracleKind) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn max_iterations(mut self, cap: usize) -> Self {
        self.max_iterations = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.psi, self.epsilon, self.lambda, self.tau]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("psi, epsilon, lambda and tau must be finite".into()));
        }
        if !(self.psi >= self.epsilon && self.epsilon >= T::zero()) {
            return Err(Error::Config(format!(
                "need psi >= epsilon >= 0, got psi = {}, epsilon = {}",
                self.psi, self.epsilon
            )));
        }
        if !(self.lambda >= T::zero()) {
            return Err(Error::Config("lambda must be >= 0".into()));
        }
        if !(self.tau >= T::lit(2.0)) {
            return Err(Error::Config(format!("tau must be >= 2, got {}", self.tau)));
        }
        if self.max_degree < 1 {
            return Err(Error::Config("max degree must be >= 1".into()));
        }
        Ok(())
    }

    pub fn region(&self) -> Result<Region<T>> {
        match self.oracle {
            OracleKind::Pfw => Region::l1_for_tau(self.tau),
            OracleKind::Cg => Region::l2_for_tau(self.tau),
            OracleKind::Agd => Ok(Region::Unconstrained),
        }
    }
}

/// Counters collected while fitting.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    pub oracle_calls: usize,
    /// Border terms over all degrees.
    pub border_terms: usize,
    /// Highest degree whose border was processed.
    pub max_degree_reached: u32,
    /// The loop stopped because of the degree cap with a non-empty border left.
    pub degree_cap_hit: bool,
    /// Solver iterations summed over all oracle calls.
    pub solver_iterations: usize,
    /// Oracle calls that hit the iteration cap.
    pub iteration_cap_calls: usize,
    /// Calls whose accuracy is not certified: the iteration cap, or a ball
    /// solver that stalled with gap above epsilon and objective above psi.
    pub best_effort_calls: usize,
    pub wall_time_secs: f64,
}

/// Output of [`fit`]: generators `G` and the order ideal `O`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct GeneratorSet<T> {
    generators: Vec<Polynomial<T>>,
    order_ideal: Vec<Term>,
    /// Regularized objective of each generator at fit time.
    objectives: Vec<T>,
    /// Plain mean squared evaluation of each generator at fit time.
    mses: Vec<T>,
    pub stats: FitStats,
}

impl<T: Scalar> GeneratorSet<T> {
    /// Assembles a set from parts, e.g. when loading a saved model. Per
    /// generator objectives and statistics are left empty.
    pub fn from_parts(order_ideal: Vec<Term>, generators: Vec<Polynomial<T>>) -> Result<Self> {
        match order_ideal.first() {
            Some(t) if t.is_one() => {}
            _ => return Err(Error::Data("order ideal must start with the constant term".into())),
        }
        if !order_ideal.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Data("order ideal must be strictly ascending".into()));
        }
        let n = order_ideal[0].nvars();
        if order_ideal.iter().any(|t| t.nvars() != n) || generators.iter().any(|g| g.nvars() != n) {
            return Err(Error::Data("terms of differing arity in generator set".into()));
        }
        Ok(Self {
            generators,
            order_ideal,
            objectives: Vec::new(),
            mses: Vec::new(),
            stats: FitStats::default(),
        })
    }

    pub fn generators(&self) -> &[Polynomial<T>] {
        &self.generators
    }

    /// Non-leading terms, ascending, starting with the constant term.
    pub fn order_ideal(&self) -> &[Term] {
        &self.order_ideal
    }

    pub fn objectives(&self) -> &[T] {
        &self.objectives
    }

    pub fn mses(&self) -> &[T] {
        &self.mses
    }

    pub fn nvars(&self) -> usize {
        self.order_ideal[0].nvars()
    }

    pub fn leading_terms(&self) -> impl Iterator<Item = &Term> {
        self.generators.iter().map(|g| g.leading_term())
    }

    /// Largest generator degree, 0 without generators.
    pub fn max_generator_degree(&self) -> u32 {
        self.generators.iter().map(|g| g.degree()).max().unwrap_or(0)
    }
}

/// Degree-`degree` border of the order ideal `order_ideal`: the degree-`d`
/// terms all of whose divisors of degree `d - 1` lie in `order_ideal`,
/// ascending. For `d = 1` these are the variables.
///
/// `order_ideal` must be closed under division through degree `d - 1`
/// (as produced by [`fit`]); a term divisible by a generator's leading term
/// then has a divisor outside it and is filtered out.
pub fn build_border(order_ideal: &[Term], degree: u32) -> Result<Vec<Term>> {
    let n = match order_ideal.first() {
        Some(t) => t.nvars(),
        None => return Err(Error::Data("order ideal must contain the constant term".into())),
    };
    if degree == 0 {
        return Err(Error::Config("border degree must be >= 1".into()));
    }
    if degree == 1 {
        return Ok((0..n).map(|i| Term::variable(n, i)).collect());
    }
    let members: HashSet<&Term> = order_ideal.iter().collect();
    let linear: Vec<&Term> = order_ideal.iter().filter(|t| t.degree() == 1).collect();
    let previous: Vec<&Term> = order_ideal.iter().filter(|t| t.degree() == degree - 1).collect();
    let mut candidates = BTreeSet::new();
    for s in &linear {
        for t in &previous {
            candidates.insert(s.multiply(t)?);
        }
    }
    Ok(candidates
        .into_iter()
        .filter(|u| {
            (0..n).all(|i| match u.divide_by_variable(i) {
                Some(q) => members.contains(&q),
                None => true,
            })
        })
        .collect())
}

/// Result of a single oracle call.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome<T> {
    /// `sum_i d_i o_i + t` with `o_i` the order ideal it was solved against.
    pub polynomial: Polynomial<T>,
    /// Regularized objective `mse + (lambda/2)||d||^2`.
    pub objective: T,
    pub mse: T,
    pub termination: Termination,
    pub iterations: usize,
    /// Final Frank-Wolfe gap for the ball oracles.
    pub gap: Option<T>,
}

impl<T: Scalar> OracleOutcome<T> {
    /// The call is `psi`-approximately vanishing under the regularized
    /// criterion.
    pub fn vanishes(&self, psi: T) -> bool {
        self.objective <= psi
    }
}

/// Oracle call: the best polynomial with leading term `t` and other terms in
/// `order_ideal`, as found by the configured solver. Evaluations are taken
/// from (and added to) `cache`.
pub fn oracle_call<T: Scalar>(
    points: &PointSet<T>,
    order_ideal: &[Term],
    t: &Term,
    cfg: &OaviConfig<T>,
    cache: &mut EvaluationCache<T>,
) -> Result<OracleOutcome<T>> {
    cfg.validate()?;
    if order_ideal.is_empty() {
        return Err(Error::Data("order ideal must contain the constant term".into()));
    }
    if let Some(last) = order_ideal.last() {
        if last >= t {
            return Err(Error::Data(format!(
                "candidate {t} is not larger than every term of the order ideal"
            )));
        }
    }
    let columns: Vec<Vec<T>> = order_ideal
        .iter()
        .map(|o| cache.ensure_term(o, points).map(<[T]>::to_vec))
        .collect::<Result<_>>()?;
    let target = cache.ensure_term(t, points)?.to_vec();
    let gram = Gram::from_columns(&columns);
    let solution = solve(Arc::new(columns), Arc::new(gram), target, cfg)?;
    outcome(order_ideal.to_vec(), t.clone(), solution, cfg)
}

fn solve<T: Scalar>(
    columns: Arc<Vec<Vec<T>>>,
    gram: Arc<Gram<T>>,
    target: Vec<T>,
    cfg: &OaviConfig<T>,
) -> Result<OracleSolution<T>> {
    let problem = OracleProblem::shared(columns, gram, target)?
        .lambda(cfg.lambda)
        .region(cfg.region()?)
        .epsilon(cfg.epsilon)
        .psi(cfg.psi)
        .max_iterations(cfg.max_iterations);
    match cfg.oracle {
        OracleKind::Pfw => pfw_solve(&problem, 0),
        OracleKind::Cg => fw_solve(&problem),
        OracleKind::Agd => agd_solve(&problem),
    }
}

fn outcome<T: Scalar>(
    terms: Vec<Term>,
    leading: Term,
    solution: OracleSolution<T>,
    cfg: &OaviConfig<T>,
) -> Result<OracleOutcome<T>> {
    let penalty = cfg.lambda * T::lit(0.5) * solution.coefficients.iter().map(|&c| c * c).sum::<T>();
    let mse = (solution.objective - penalty).max(T::zero());
    Ok(OracleOutcome {
        polynomial: Polynomial::new(terms, solution.coefficients, leading)?,
        objective: solution.objective,
        mse,
        termination: solution.termination,
        iterations: solution.iterations,
        gap: solution.gap,
    })
}

/// Order ideal under construction together with its evaluations and Gram
/// matrix, both grown in place as terms are appended.
struct Basis<T> {
    terms: Vec<Term>,
    columns: Arc<Vec<Vec<T>>>,
    gram: Arc<Gram<T>>,
}

impl<T: Scalar> Basis<T> {
    fn new(n: usize, m: usize) -> Self {
        let mut b = Self {
            terms: Vec::new(),
            columns: Arc::new(Vec::new()),
            gram: Arc::new(Gram::empty()),
        };
        b.push(Term::one(n), vec![T::one(); m]);
        b
    }

    fn push(&mut self, t: Term, column: Vec<T>) {
        let columns = Arc::make_mut(&mut self.columns);
        Arc::make_mut(&mut self.gram).push_column(columns, &column);
        columns.push(column);
        self.terms.push(t);
    }
}

/// Fits generators of the approximately vanishing ideal of `points`.
///
/// Starting from `O = {1}`, the border of each degree is processed in
/// ascending order; each border term `u` is handed to the oracle against the
/// current `O`. If the regularized objective is at most `psi` the polynomial
/// becomes a generator, otherwise `u` joins `O`. Stops when the border is
/// empty or the degree cap is exceeded.
pub fn fit<T: Scalar>(points: &PointSet<T>, cfg: &OaviConfig<T>) -> Result<GeneratorSet<T>> {
    cfg.validate()?;
    if points.is_empty() {
        return Err(Error::Data("cannot fit on an empty point set".into()));
    }
    let slack = T::lit(1e-12);
    for j in 0..points.dim() {
        if points.column(j).iter().any(|v| !(v.abs() <= T::one() + slack)) {
            return Err(Error::Data(format!(
                "feature {j} has values outside [-1, 1]; scale the data first"
            )));
        }
    }
    let start = Instant::now();
    let n = points.dim();
    let mut cache = EvaluationCache::new();
    let mut basis = Basis::new(n, points.len());
    let mut generators = Vec::new();
    let mut objectives = Vec::new();
    let mut mses = Vec::new();
    let mut stats = FitStats::default();

    let mut degree = 1;
    loop {
        let border = build_border(&basis.terms, degree)?;
        if border.is_empty() {
            break;
        }
        if degree > cfg.max_degree {
            stats.degree_cap_hit = true;
            break;
        }
        stats.max_degree_reached = degree;
        stats.border_terms += border.len();
        for u in border {
            let target = cache.ensure_term(&u, points)?.to_vec();
            let solution = solve(basis.columns.clone(), basis.gram.clone(), target.clone(), cfg)?;
            stats.oracle_calls += 1;
            stats.solver_iterations += solution.iterations;
            if solution.termination == Termination::IterationCap {
                stats.iteration_cap_calls += 1;
                stats.best_effort_calls += 1;
            } else if solution.termination == Termination::Stalled
                && solution.objective > cfg.psi
                && solution.gap.is_some_and(|g| g > cfg.epsilon)
            {
                stats.best_effort_calls += 1;
            }
            if solution.objective <= cfg.psi {
                let out = outcome(basis.terms.clone(), u, solution, cfg)?;
                generators.push(out.polynomial);
                objectives.push(out.objective);
                mses.push(out.mse);
            } else {
                basis.push(u, target);
            }
        }
        degree += 1;
    }
    stats.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(GeneratorSet {
        generators,
        order_ideal: basis.terms,
        objectives,
        mses,
        stats,
    })
}

/// Checks that no term of the order ideal could have been a generator: for
/// each `t` in `O` other than 1, the exact least-squares fit of `t` by the
/// terms of `O` below it leaves a mean squared residual above
/// `psi - epsilon`. Only meaningful without regularization.
pub fn check_maximality<T: Scalar>(
    result: &GeneratorSet<T>,
    points: &PointSet<T>,
    cfg: &OaviConfig<T>,
) -> Result<bool> {
    if cfg.lambda != T::zero() {
        return Err(Error::Config("maximality is only defined for lambda = 0".into()));
    }
    let threshold = cfg.psi - cfg.epsilon;
    let mut cache = EvaluationCache::new();
    let mut columns: Vec<Vec<T>> = Vec::with_capacity(result.order_ideal.len());
    for t in &result.order_ideal {
        let column = cache.ensure_term(t, points)?.to_vec();
        if !columns.is_empty() {
            let residual = least_squares_residual(&columns, &column);
            if !(mean_square(&residual) > threshold) {
                return Ok(false);
            }
        }
        columns.push(column);
    }
    Ok(true)
}
