use crate::fem::Field;
use crate::numerics::sparse::norm2;
use crate::numerics::{LdlFactor, Pivoting};

use super::{Problem, SolveRecord, SolverError};

/// Iterates with maximum below this are treated as the trivial solution.
pub const COLLAPSE_THRESHOLD: f64 = 1e-6;
/// Converged fields may dip this far below zero.
pub const NEGATIVITY_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Converged when `‖r‖ ≤ tol·(1 + ‖Ku‖)`.
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 30,
            tol: 1e-9,
            max_halvings: 30,
        }
    }
}

/// Damped Newton for `K u = F(u)` from `u0`.
pub fn newton_refine(
    problem: &Problem,
    u0: &[f64],
    p: f64,
    opts: &NewtonOptions,
) -> Result<SolveRecord, SolverError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(SolverError::InvalidParameter(format!(
            "exponent must exceed 1, got {p}"
        )));
    }
    let disc = problem.disc();
    let mesh = disc.mesh();
    let fixed = disc.fixed();
    let mut u: Vec<f64> = u0
        .iter()
        .zip(fixed)
        .map(|(&v, &b)| if b { 0.0 } else { v })
        .collect();
    let max_of = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max_of(&u) >= COLLAPSE_THRESHOLD) {
        return Err(SolverError::CollapsedToZero { m: max_of(&u) });
    }

    let mut r = disc.residual(&u, p)?;
    let mut r_norm = norm2(&r);
    let mut history = vec![r_norm];
    let mut iterations = 0;
    loop {
        let ku_norm = norm2(&disc.stiffness().matvec(&u));
        if r_norm <= opts.tol * (1.0 + ku_norm) {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(SolverError::NotConverged {
                iterations,
                residual: r_norm,
            });
        }
        iterations += 1;
        let jac = disc.jacobian_dirichlet(&u, p)?;
        let factor = LdlFactor::factor(disc.symbolic(), &jac, Pivoting::Nonzero)?;
        let delta = factor.solve_refined(&jac, &r, 2);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a - t * d).collect();
            if let Ok(rc) = disc.residual(&cand, p) {
                let rc_norm = norm2(&rc);
                if rc_norm < r_norm {
                    u = cand;
                    r = rc;
                    r_norm = rc_norm;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(SolverError::NotConverged {
                iterations,
                residual: r_norm,
            });
        }
        history.push(r_norm);
        if max_of(&u) < COLLAPSE_THRESHOLD {
            return Err(SolverError::CollapsedToZero { m: max_of(&u) });
        }
    }

    let field = Field::from_values(mesh, u)?;
    let (peak_node, m) = field.max();
    if m < COLLAPSE_THRESHOLD {
        return Err(SolverError::CollapsedToZero { m });
    }
    let min = field.min();
    if min < NEGATIVITY_FLOOR {
        return Err(SolverError::NegativeSolution { min });
    }
    let x_max = mesh.node(peak_node);
    Ok(SolveRecord {
        p,
        m,
        peak_node,
        x_max,
        clearance: problem.domain().distance_to_boundary(x_max),
        residual_norm: r_norm,
        residual_history: history,
        iterations,
        h: mesh.h(),
        u: field,
    })
}
