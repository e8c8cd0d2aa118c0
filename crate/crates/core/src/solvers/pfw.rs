//! Pairwise Frank-Wolfe over the l1-ball.
//!
//! The iterate is kept as a convex combination of signed, scaled unit
//! vectors `±r e_i`. Each step moves weight from the away vertex (the
//! active atom most aligned with the gradient) to the Frank-Wolfe vertex,
//! so at most two coordinates change and the gradient is updated from two
//! rows of `A^T A` in `O(k)`.

use serde::{Deserialize, Serialize};

use super::{
    clipped_step, is_stalled, lmo_l1_atom, OracleProblem, OracleSolution, Region, Termination, WEIGHT_DROP_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::scalar::{dot, norm_l1, Scalar};

/// The incrementally updated gradient is recomputed from scratch this often.
const GRADIENT_REFRESH: usize = 1024;

const NO_SLOT: usize = usize::MAX;

/// A vertex `±r e_index` of the l1-ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub index: usize,
    pub negative: bool,
}

impl Atom {
    /// Atoms are numbered `2 * index + negative`.
    pub fn from_id(id: usize) -> Self {
        Atom {
            index: id / 2,
            negative: id % 2 == 1,
        }
    }

    pub fn id(&self) -> usize {
        2 * self.index + usize::from(self.negative)
    }

    pub fn sign<T: Scalar>(&self) -> T {
        if self.negative {
            -T::one()
        } else {
            T::one()
        }
    }

    fn opposite(&self) -> Atom {
        Atom {
            index: self.index,
            negative: !self.negative,
        }
    }
}

/// Atoms with positive weight; weights sum to one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActiveSet<T> {
    entries: Vec<(Atom, T)>,
    /// Position in `entries` by atom id.
    slots: Vec<usize>,
}

impl<T: Scalar> ActiveSet<T> {
    pub fn singleton(atom: Atom) -> Self {
        let mut set = Self {
            entries: Vec::new(),
            slots: Vec::new(),
        };
        set.add(atom, T::one());
        set
    }

    pub fn entries(&self) -> &[(Atom, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight_sum(&self) -> T {
        self.entries.iter().map(|&(_, w)| w).sum()
    }

    fn slot(&self, atom: Atom) -> Option<usize> {
        self.slots.get(atom.id()).copied().filter(|&s| s != NO_SLOT)
    }

    pub fn weight(&self, atom: Atom) -> T {
        self.slot(atom).map(|s| self.entries[s].1).unwrap_or_else(T::zero)
    }

    pub fn contains(&self, atom: Atom) -> bool {
        self.slot(atom).is_some()
    }

    /// `sum_v lambda_v * v` for vertices of radius `radius`.
    pub fn reconstruct(&self, dim: usize, radius: T) -> Vec<T> {
        let mut x = vec![T::zero(); dim];
        for &(a, w) in &self.entries {
            x[a.index] += a.sign::<T>() * radius * w;
        }
        x
    }

    fn add(&mut self, atom: Atom, delta: T) {
        match self.slot(atom) {
            Some(s) => self.entries[s].1 += delta,
            None => {
                let id = atom.id();
                if self.slots.len() <= id {
                    self.slots.resize(id + 1, NO_SLOT);
                }
                self.slots[id] = self.entries.len();
                self.entries.push((atom, delta));
            }
        }
    }

    /// Drops `atom` if its weight fell below the threshold; returns true if
    /// the dropped weight was nonzero (the iterate then needs rebuilding).
    fn prune_atom(&mut self, atom: Atom) -> bool {
        let Some(s) = self.slot(atom) else {
            return false;
        };
        let w = self.entries[s].1;
        if w >= T::lit(WEIGHT_DROP_THRESHOLD) {
            return false;
        }
        self.slots[atom.id()] = NO_SLOT;
        self.entries.swap_remove(s);
        if let Some(&(moved, _)) = self.entries.get(s) {
            self.slots[moved.id()] = s;
        }
        if w != T::zero() {
            self.normalize();
            return true;
        }
        false
    }

    fn normalize(&mut self) {
        let s = self.weight_sum();
        if s > T::zero() {
            for (_, w) in self.entries.iter_mut() {
                *w /= s;
            }
        }
    }
}

/// Iteration state of pairwise Frank-Wolfe, exposed so that callers can
/// inspect the active set between steps.
#[derive(Clone, Debug)]
pub struct PairwiseFrankWolfe<'a, T> {
    problem: &'a OracleProblem<T>,
    radius: T,
    x: Vec<T>,
    /// Gradient at `x`, updated incrementally.
    grad: Vec<T>,
    active: ActiveSet<T>,
    objective: T,
    gap: T,
    iterations: usize,
    trace: Vec<T>,
}

impl<'a, T: Scalar> PairwiseFrankWolfe<'a, T> {
    /// Starts at atom `start_atom` (numbered as in [`Atom::from_id`]).
    pub fn new(problem: &'a OracleProblem<T>, start_atom: usize) -> Result<Self> {
        problem.validate()?;
        let radius = match problem.region {
            Region::L1Ball { radius } => radius,
            _ => return Err(Error::Config("pairwise Frank-Wolfe needs an l1-ball region".into())),
        };
        let k = problem.dim();
        if start_atom >= 2 * k {
            return Err(Error::Config(format!(
                "start atom {start_atom} is not a vertex of the {k}-dimensional l1-ball"
            )));
        }
        let active = ActiveSet::singleton(Atom::from_id(start_atom));
        let mut state = Self {
            problem,
            radius,
            x: active.reconstruct(k, radius),
            grad: Vec::new(),
            active,
            objective: T::zero(),
            gap: T::infinity(),
            iterations: 0,
            trace: Vec::new(),
        };
        state.refresh();
        Ok(state)
    }

    /// Recomputes gradient and objective from `x`.
    fn refresh(&mut self) {
        let qx = self.problem.gram().mul_vec(&self.x);
        self.grad = self.problem.gradient_gram(&self.x, &qx);
        self.objective = self.sparse_objective();
    }

    /// Objective from the gradient, summing only over the support of `x`:
    /// `f = x.g / 2 + (A^T b).x / m + b.b / m`.
    fn sparse_objective(&self) -> T {
        let p = self.problem;
        let (mut xg, mut ax, mut xx) = (T::zero(), T::zero(), T::zero());
        for &(a, _) in &self.active.entries {
            if a.negative && self.active.contains(a.opposite()) {
                continue;
            }
            let i = a.index;
            xg += self.x[i] * self.grad[i];
            ax += p.atb[i] * self.x[i];
            xx += self.x[i] * self.x[i];
        }
        let half_lambda = p.lambda * T::lit(0.5);
        let data = (xg * T::lit(0.5) - half_lambda * xx + (ax + p.btb) * p.inv_m).max(T::zero());
        data + half_lambda * xx
    }

    pub fn iterate(&self) -> &[T] {
        &self.x
    }

    pub fn active_set(&self) -> &ActiveSet<T> {
        &self.active
    }

    /// Objective at the current iterate (Gram form).
    pub fn objective(&self) -> T {
        self.objective
    }

    /// Frank-Wolfe gap computed at the start of the last step.
    pub fn gap(&self) -> T {
        self.gap
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Performs one iteration; returns `Some(reason)` once a stopping
    /// criterion holds. The iterate is left unchanged by the call that
    /// reports [`Termination::VanishingReached`] or
    /// [`Termination::GapBelowEpsilon`].
    pub fn step(&mut self) -> Option<Termination> {
        let p = self.problem;
        if p.record_trace {
            self.trace.push(self.objective);
        }
        if let Some(psi) = p.psi {
            if self.objective <= psi {
                return Some(Termination::VanishingReached);
            }
        }
        if self.iterations >= p.max_iterations {
            return Some(Termination::IterationCap);
        }
        let g = &self.grad;
        let fw = lmo_l1_atom(g);
        let r = self.radius;
        let fw_value = fw.sign::<T>() * r * g[fw.index];

        // Away vertex: largest <g, v> over the active set, lowest atom id on
        // ties. The same pass gives <g, x>.
        let mut away: Option<(Atom, T, T)> = None;
        let mut gx = T::zero();
        for &(a, w) in &self.active.entries {
            let val = a.sign::<T>() * r * g[a.index];
            gx += w * val;
            match away {
                Some((ba, _, bv)) if bv > val || (bv == val && ba.id() < a.id()) => {}
                _ => away = Some((a, w, val)),
            }
        }
        let (away, away_weight, _) = away.expect("active set is never empty");
        self.gap = gx - fw_value;
        if self.gap <= p.epsilon {
            return Some(Termination::GapBelowEpsilon);
        }

        self.iterations += 1;
        if away == fw {
            return Some(Termination::Stalled);
        }

        // d = s - v has at most two nonzero entries.
        let d = [(fw.index, fw.sign::<T>() * r), (away.index, -away.sign::<T>() * r)];
        let slope = d.iter().fold(T::zero(), |acc, &(i, di)| acc + g[i] * di);
        let gram = p.gram();
        let mut dqd = T::zero();
        for &(i, di) in &d {
            for &(j, dj) in &d {
                dqd += di * dj * gram.get(i, j);
            }
        }
        let dd = d.iter().fold(T::zero(), |acc, &(_, di)| acc + di * di)
            + if fw.index == away.index {
                // Same coordinate: the two entries combine into one.
                T::lit(2.0) * d[0].1 * d[1].1
            } else {
                T::zero()
            };
        let curvature = T::lit(2.0) * p.inv_m() * dqd + p.lambda * dd;
        let gamma = clipped_step(slope, curvature, away_weight);
        if gamma == T::zero() {
            return Some(Termination::Stalled);
        }

        let scale = T::lit(2.0) * p.inv_m();
        for &(i, di) in &d {
            let delta = gamma * di;
            self.x[i] += delta;
            let coef = scale * delta;
            for (gj, &qij) in self.grad.iter_mut().zip(gram.row(i)) {
                *gj += coef * qij;
            }
            self.grad[i] += p.lambda * delta;
        }
        self.active.add(fw, gamma);
        self.active.add(away, -gamma);
        let drop_step = gamma >= away_weight;
        let lost = self.active.prune_atom(away) | self.active.prune_atom(fw);
        let before = self.objective;
        // Exact decrease of the quadratic, free of cancellation.
        let decrease = -(gamma * slope + gamma * gamma * curvature * T::lit(0.5));
        if lost {
            self.x = self.active.reconstruct(p.dim(), r);
            self.refresh();
        } else if self.iterations.is_multiple_of(GRADIENT_REFRESH) {
            self.refresh();
        } else {
            self.objective = (before - decrease).max(T::zero());
        }

        if !drop_step && is_stalled(before, decrease, p.stall_tolerance) {
            return Some(Termination::Stalled);
        }
        None
    }

    /// Final solution: the iterate is rebuilt from the normalized active set
    /// and the objective recomputed from the residual.
    pub fn finish(mut self, termination: Termination) -> Result<OracleSolution<T>> {
        let p = self.problem;
        self.active.normalize();
        let mut x = self.active.reconstruct(p.dim(), self.radius);
        let l1 = norm_l1(&x);
        if l1 > self.radius {
            for v in x.iter_mut() {
                *v = *v * self.radius / l1;
            }
        }
        let qx = p.gram().mul_vec(&x);
        let g = p.gradient_gram(&x, &qx);
        let fw = lmo_l1_atom(&g);
        let gap = dot(&g, &x) - fw.sign::<T>() * self.radius * g[fw.index];
        let objective = p.objective(&x)?;
        if !objective.is_finite() {
            return Err(Error::Numeric(
                "pairwise Frank-Wolfe produced a non-finite objective".into(),
            ));
        }
        Ok(OracleSolution {
            coefficients: x,
            objective,
            gap: Some(gap),
            termination,
            iterations: self.iterations,
            trace: self.trace,
        })
    }
}

/// Runs pairwise Frank-Wolfe from atom `start_atom` until one of: objective
/// `<= psi`, Frank-Wolfe gap `<= epsilon`, a non-drop step with relative
/// decrease below the stall tolerance, or the iteration cap.
pub fn pfw_solve<T: Scalar>(p: &OracleProblem<T>, start_atom: usize) -> Result<OracleSolution<T>> {
    let mut state = PairwiseFrankWolfe::new(p, start_atom)?;
    let reason = loop {
        if let Some(reason) = state.step() {
            break reason;
        }
    };
    state.finish(reason)
}
