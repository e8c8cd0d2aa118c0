//! Nesterov's accelerated gradient descent for the unconstrained problem.

use std::collections::VecDeque;

use super::{is_stalled, OracleProblem, OracleSolution, Region, Termination};
use crate::error::{Error, Result};
use crate::linalg::Gram;
use crate::scalar::{dot, norm_sq, Scalar};

/// Number of consecutive iterations over which progress is measured.
const STALL_WINDOW: usize = 5;

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration.
pub(crate) fn largest_eigenvalue<T: Scalar>(g: &Gram<T>) -> T {
    let k = g.dim();
    if k == 0 {
        return T::zero();
    }
    // Slightly uneven start so that it is not orthogonal to the top eigenvector
    // for structured matrices.
    let mut v: Vec<T> = (0..k)
        .map(|i| T::one() + T::lit(1e-3) * T::from_usize(i).expect("index"))
        .collect();
    let mut estimate = T::zero();
    for _ in 0..500 {
        let n = norm_sq(&v).sqrt();
        if n == T::zero() {
            return T::zero();
        }
        for x in v.iter_mut() {
            *x /= n;
        }
        let w = g.mul_vec(&v);
        let next = dot(&v, &w);
        v = w;
        if (next - estimate).abs() <= T::lit(1e-10) * next.abs() {
            estimate = next;
            break;
        }
        estimate = next;
    }
    // The Rayleigh quotient never exceeds the true maximum and Gershgorin never
    // falls below it.
    let gershgorin = (0..k)
        .map(|i| g.row(i).iter().fold(T::zero(), |acc, &x| acc + x.abs()))
        .fold(T::zero(), T::max);
    (estimate * T::lit(1.01)).min(gershgorin).max(estimate)
}

/// Accelerated gradient descent from the origin with step `1/L`,
/// `L = 2 sigma_max(A)^2 / m + lambda`. Momentum is reset whenever the
/// objective would increase, so the objective is non-increasing. Stops on
/// objective `<= psi`, relative progress below the stall tolerance over five
/// consecutive iterations, or the iteration cap.
pub fn agd_solve<T: Scalar>(p: &OracleProblem<T>) -> Result<OracleSolution<T>> {
    p.validate()?;
    if p.region != Region::Unconstrained {
        return Err(Error::Config(
            "accelerated gradient descent is for unconstrained problems".into(),
        ));
    }
    let k = p.dim();
    let gram = p.gram();
    let lipschitz = T::lit(2.0) * p.inv_m() * largest_eigenvalue(gram) + p.lambda;

    let mut x = vec![T::zero(); k];
    let mut qx = vec![T::zero(); k];
    let mut objective = p.objective_gram(&x, &qx);
    let mut y = x.clone();
    let mut qy = qx.clone();
    let mut momentum = T::one();
    let mut restarted = true;
    let mut history: VecDeque<T> = VecDeque::with_capacity(STALL_WINDOW + 1);
    history.push_back(objective);
    let mut trace = Vec::new();
    let mut iterations = 0;

    let termination = loop {
        if p.record_trace {
            trace.push(objective);
        }
        if let Some(psi) = p.psi {
            if objective <= psi {
                break Termination::VanishingReached;
            }
        }
        if iterations >= p.max_iterations {
            break Termination::IterationCap;
        }
        if lipschitz <= T::zero() {
            break Termination::Stalled;
        }
        iterations += 1;
        let g = p.gradient_gram(&y, &qy);
        let step = T::one() / lipschitz;
        let x_new: Vec<T> = y.iter().zip(&g).map(|(&yi, &gi)| yi - step * gi).collect();
        let qx_new = gram.mul_vec(&x_new);
        let f_new = p.objective_gram(&x_new, &qx_new);

        if f_new > objective {
            if restarted {
                // A plain gradient step from x did not decrease: numerical floor.
                break Termination::Stalled;
            }
            y.clone_from(&x);
            qy.clone_from(&qx);
            momentum = T::one();
            restarted = true;
            continue;
        }

        let next_momentum = (T::one() + (T::one() + T::lit(4.0) * momentum * momentum).sqrt()) * T::lit(0.5);
        let beta = (momentum - T::one()) / next_momentum;
        for i in 0..k {
            y[i] = x_new[i] + beta * (x_new[i] - x[i]);
            qy[i] = qx_new[i] + beta * (qx_new[i] - qx[i]);
        }
        x = x_new;
        qx = qx_new;
        objective = f_new;
        momentum = next_momentum;
        restarted = false;

        history.push_back(objective);
        if history.len() > STALL_WINDOW + 1 {
            history.pop_front();
        }
        if history.len() == STALL_WINDOW + 1 && is_stalled(history[0], history[0] - objective, p.stall_tolerance) {
            break Termination::Stalled;
        }
    };

    let objective = p.objective(&x)?;
    if !objective.is_finite() {
        return Err(Error::Numeric("accelerated gradient descent diverged".into()));
    }
    Ok(OracleSolution {
        coefficients: x,
        objective,
        gap: None,
        termination,
        iterations,
        trace,
    })
}
