//! Vanilla Frank-Wolfe (conditional gradients) over the l2-ball.

use super::{clipped_step, is_stalled, lmo_l2, OracleProblem, OracleSolution, Region, Termination};
use crate::error::{Error, Result};
use crate::scalar::{dot, norm_sq, Scalar};

/// Vanilla Frank-Wolfe with exact line search, started at `radius * e_1`.
/// Stops on objective `<= psi`, gap `<= epsilon`, a stall, or the cap.
pub fn fw_solve<T: Scalar>(p: &OracleProblem<T>) -> Result<OracleSolution<T>> {
    p.validate()?;
    let radius = match p.region {
        Region::L2Ball { radius } => radius,
        _ => return Err(Error::Config("vanilla Frank-Wolfe needs an l2-ball region".into())),
    };
    let k = p.dim();
    let gram = p.gram();
    let mut x = vec![T::zero(); k];
    x[0] = radius;
    let mut qx = gram.mul_vec(&x);
    let mut objective = p.objective_gram(&x, &qx);
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
        let g = p.gradient_gram(&x, &qx);
        let s = lmo_l2(&g, radius);
        let d: Vec<T> = s.iter().zip(&x).map(|(&si, &xi)| si - xi).collect();
        let gap = -dot(&g, &d);
        if gap <= p.epsilon {
            break Termination::GapBelowEpsilon;
        }
        iterations += 1;
        let qs = gram.mul_vec(&s);
        let qd: Vec<T> = qs.iter().zip(&qx).map(|(&a, &b)| a - b).collect();
        let curvature = T::lit(2.0) * p.inv_m() * dot(&d, &qd) + p.lambda * norm_sq(&d);
        let gamma = clipped_step(-gap, curvature, T::one());
        if gamma == T::zero() {
            break Termination::Stalled;
        }
        for ((xi, qi), (&di, &qdi)) in x.iter_mut().zip(qx.iter_mut()).zip(d.iter().zip(&qd)) {
            *xi += gamma * di;
            *qi += gamma * qdi;
        }
        let before = objective;
        objective = p.objective_gram(&x, &qx);
        let decrease = gamma * gap - gamma * gamma * curvature * T::lit(0.5);
        if is_stalled(before, decrease, p.stall_tolerance) {
            break Termination::Stalled;
        }
    };

    let n = norm_sq(&x).sqrt();
    if n > radius {
        for v in x.iter_mut() {
            *v = *v * radius / n;
        }
        qx = gram.mul_vec(&x);
    }
    let g = p.gradient_gram(&x, &qx);
    let s = lmo_l2(&g, radius);
    let gap = dot(&g, &x) - dot(&g, &s);
    let objective = p.objective(&x)?;
    if !objective.is_finite() {
        return Err(Error::Numeric("Frank-Wolfe produced a non-finite objective".into()));
    }
    Ok(OracleSolution {
        coefficients: x,
        objective,
        gap: Some(gap),
        termination,
        iterations,
        trace,
    })
}
