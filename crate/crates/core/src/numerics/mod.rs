//! Sparse symmetric linear algebra: storage, factorization, iterative solves
//! and the principal generalized eigenpair.

pub mod cg;
pub mod eigen;
pub mod ldl;
pub mod ordering;
pub mod sparse;

pub use eigen::{principal_eigenpair, EigenPair, Normalization};
pub use ldl::{LdlFactor, LdlSymbolic, Pivoting};
pub use sparse::{
    eliminate_dirichlet, eliminate_dirichlet_with_diagonal, SparseOperator, TripletBuilder,
};

/// Above this many unknowns `spd_solve` switches from LDLᵀ to CG.
pub const DIRECT_SOLVE_LIMIT: usize = 200_000;

/// Relative residual target of iterative solves.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotSpd { row: usize, pivot: f64 },
    #[error("matrix is numerically singular at row {row}")]
    Singular { row: usize },
    #[error("matrix pattern is not covered by the symbolic analysis")]
    PatternMismatch,
    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn spd_solve(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if b.len() != a.dim() {
        return Err(NumericsError::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    if a.dim() < DIRECT_SOLVE_LIMIT {
        let factor = LdlFactor::new(a, Pivoting::Positive)?;
        Ok(factor.solve_refined(a, b, 1))
    } else {
        cg::pcg(a, b, SOLVE_TOLERANCE, 20 * a.dim().max(100))
    }
}

/// Mesh L² inner product `fᵀ M g`.
pub fn dot_l2(mass: &SparseOperator, f: &[f64], g: &[f64]) -> Result<f64, NumericsError> {
    mass.bilinear(f, g)
}
