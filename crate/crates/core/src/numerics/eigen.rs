//! Principal Dirichlet eigenpair by shift-free inverse iteration.

use super::ldl::{LdlFactor, Pivoting};
use super::sparse::{dot, norm2, SparseOperator};
use super::NumericsError;

const MAX_ITERATIONS: usize = 1000;
const RAYLEIGH_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-8;

/// How the eigenvector was scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `Σ_i (M·1)_i |φ_i| = 1` (lumped-mass L¹ norm).
    LumpedL1,
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: Vec<f64>,
    pub normalization: Normalization,
    pub iterations: usize,
    /// `‖Kφ − λMφ‖ / ‖Kφ‖` at exit.
    pub relative_residual: f64,
}

/// Smallest eigenvalue of `K φ = λ M φ` with `φ = 0` on fixed nodes.
///
/// `stiffness` and `mass` are the unconstrained operators; the boundary is
/// removed here (identity rows in K, zero rows in M).
pub fn principal_eigenpair(
    stiffness: &SparseOperator,
    mass: &SparseOperator,
    fixed: &[bool],
) -> Result<EigenPair, NumericsError> {
    let k = super::sparse::eliminate_dirichlet(stiffness, fixed);
    let factor = LdlFactor::new(&k, Pivoting::Positive)?;
    principal_eigenpair_with_factor(stiffness, mass, fixed, &factor)
}

/// Same as [`principal_eigenpair`] with a precomputed factorization of the
/// Dirichlet-eliminated stiffness.
pub fn principal_eigenpair_with_factor(
    stiffness: &SparseOperator,
    mass: &SparseOperator,
    fixed: &[bool],
    factor: &LdlFactor,
) -> Result<EigenPair, NumericsError> {
    let n = stiffness.dim();
    if mass.dim() != n || fixed.len() != n {
        return Err(NumericsError::DimensionMismatch {
            expected: n,
            found: mass.dim().min(fixed.len()),
        });
    }
    let m = super::sparse::eliminate_dirichlet_with_diagonal(mass, fixed, 0.0);
    let k = super::sparse::eliminate_dirichlet(stiffness, fixed);

    let mut x: Vec<f64> = fixed.iter().map(|&f| if f { 0.0 } else { 1.0 }).collect();
    let mut lambda_prev = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let mx = m.matvec(&x);
        let mut y = factor.solve(&mx);
        for (yi, &f) in y.iter_mut().zip(fixed) {
            if f {
                *yi = 0.0;
            }
        }
        let my = m.matvec(&y);
        let scale = dot(&y, &my).sqrt();
        if !(scale > 0.0) {
            return Err(NumericsError::NotConverged {
                iterations: it,
                residual: f64::NAN,
            });
        }
        y.iter_mut().for_each(|v| *v /= scale);
        let ky = k.matvec(&y);
        let my: Vec<f64> = my.iter().map(|v| v / scale).collect();
        let lambda = dot(&y, &ky);
        let r: Vec<f64> = ky
            .iter()
            .zip(&my)
            .zip(fixed)
            .map(|((a, b), &f)| if f { 0.0 } else { a - lambda * b })
            .collect();
        residual = norm2(&r) / norm2(&ky);
        x = y;
        let stalled = (lambda - lambda_prev).abs() < RAYLEIGH_TOL * lambda.abs();
        if stalled && residual <= RESIDUAL_TOL {
            let lumped = mass.row_sums();
            let l1: f64 = lumped.iter().zip(&x).map(|(w, v)| w * v.abs()).sum();
            let sign = if x.iter().sum::<f64>() < 0.0 {
                -1.0
            } else {
                1.0
            };
            let phi = x.iter().map(|v| sign * v / l1).collect();
            return Ok(EigenPair {
                lambda,
                phi,
                normalization: Normalization::LumpedL1,
                iterations: it,
                relative_residual: residual,
            });
        }
        lambda_prev = lambda;
    }
    Err(NumericsError::NotConverged {
        iterations: MAX_ITERATIONS,
        residual,
    })
}
