//! Least-energy initial guess by constrained minimization of the Dirichlet
//! energy on the unit `L^{p+1}` sphere.

use crate::numerics::sparse::dot;

use super::{Problem, SolverError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitOptions {
    /// Stop when `‖g‖_K / ‖v‖_K` falls below this.
    pub gradient_tol: f64,
    pub max_iter: usize,
}

impl Default for InitOptions {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-6,
            max_iter: 5000,
        }
    }
}

/// Projected Sobolev gradient descent for `min ½vᵀKv` subject to
/// `∫v₊^{p+1} = 1`, started from the torsion function, followed by the
/// rescaling `u = μ^{1/(p−1)} v` with the multiplier `μ = vᵀKv`.
pub fn least_energy_init(
    problem: &Problem,
    p: f64,
    opts: &InitOptions,
) -> Result<Vec<f64>, SolverError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(SolverError::InvalidParameter(format!(
            "exponent must exceed 1, got {p}"
        )));
    }
    let disc = problem.disc();
    let k = disc.stiffness();
    let fixed = disc.fixed();
    let energy = |v: &[f64]| 0.5 * dot(v, &k.matvec(v));
    let normalize = |v: &mut Vec<f64>| -> Result<bool, SolverError> {
        let n = dot(v, &disc.load(v, p)?);
        if !(n > 0.0 && n.is_finite()) {
            return Ok(false);
        }
        let s = n.powf(-1.0 / (p + 1.0));
        v.iter_mut().for_each(|x| *x *= s);
        Ok(true)
    };

    let mut v = disc.solve_dirichlet(&disc.lumped_mass())?;
    if !normalize(&mut v)? {
        return Err(SolverError::CollapsedToZero { m: 0.0 });
    }
    let mut j = energy(&v);
    let mut converged = false;
    for iteration in 0..opts.max_iter {
        let f = disc.load(&v, p)?;
        let w = disc.solve_dirichlet(&f)?;
        let mu = 1.0 / dot(&w, &f);
        let g: Vec<f64> = v
            .iter()
            .zip(&w)
            .zip(fixed)
            .map(|((vi, wi), &b)| if b { 0.0 } else { vi - mu * wi })
            .collect();
        let g_norm = dot(&g, &k.matvec(&g)).max(0.0).sqrt();
        if g_norm <= opts.gradient_tol * (2.0 * j).sqrt() {
            converged = true;
            break;
        }
        let mut tau = 1.0;
        let mut accepted = false;
        while tau >= 1e-12 {
            let mut cand: Vec<f64> = v
                .iter()
                .zip(&g)
                .zip(fixed)
                .map(|((vi, gi), &b)| if b { 0.0 } else { (vi - tau * gi).max(0.0) })
                .collect();
            if normalize(&mut cand)? {
                let jc = energy(&cand);
                if jc < j {
                    v = cand;
                    j = jc;
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
        }
        if !accepted {
            return Err(SolverError::LineSearchFailure { iteration });
        }
    }
    if !converged {
        return Err(SolverError::NotConverged {
            iterations: opts.max_iter,
            residual: f64::NAN,
        });
    }
    let mu = 2.0 * j;
    let c = mu.powf(1.0 / (p - 1.0));
    Ok(v.into_iter().map(|x| c * x).collect())
}
