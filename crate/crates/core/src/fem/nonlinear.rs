//! The discrete Lane–Emden operator `r(u) = K u − F(u)` and its Jacobian.

use std::sync::{Arc, OnceLock};

use crate::geometry::Mesh;
use crate::numerics::{
    cg, eliminate_dirichlet, LdlFactor, LdlSymbolic, NumericsError, Pivoting, SparseOperator,
    DIRECT_SOLVE_LIMIT, SOLVE_TOLERANCE,
};

use super::{assemble_mass, assemble_stiffness, assemble_weighted_mass, FemError, QuadratureRule};

/// Nodal `(u₊)^p` above this is reported as overflow.
pub const OVERFLOW_LIMIT: f64 = 1e300;

fn check_overflow(u: &[f64], p: f64) -> Result<(), FemError> {
    for (node, &v) in u.iter().enumerate() {
        let value = v.max(0.0).powf(p);
        if !(value <= OVERFLOW_LIMIT) {
            return Err(FemError::Overflow { node, value });
        }
    }
    Ok(())
}

/// `F_i = ∫(u₊)^p φ_i` with the three-point rule on the interpolant.
pub fn nonlinear_load(mesh: &Mesh, u: &[f64], p: f64) -> Result<Vec<f64>, FemError> {
    if u.len() != mesh.node_count() {
        return Err(FemError::DimensionMismatch {
            expected: mesh.node_count(),
            found: u.len(),
        });
    }
    check_overflow(u, p)?;
    let rule = QuadratureRule::order2();
    let mut f = vec![0.0; u.len()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.signed_area(t);
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let uq = lam[0] * u[tri[0]] + lam[1] * u[tri[1]] + lam[2] * u[tri[2]];
            if uq <= 0.0 {
                continue;
            }
            let s = area * w * uq.powf(p);
            for i in 0..3 {
                f[tri[i]] += s * lam[i];
            }
        }
    }
    Ok(f)
}

/// `K u − F(u)` with boundary rows set to zero.
pub fn nonlinear_residual(mesh: &Mesh, u: &[f64], p: f64) -> Result<Vec<f64>, FemError> {
    let k = assemble_stiffness(mesh)?;
    residual_with(mesh, &k, u, p)
}

fn residual_with(mesh: &Mesh, k: &SparseOperator, u: &[f64], p: f64) -> Result<Vec<f64>, FemError> {
    let f = nonlinear_load(mesh, u, p)?;
    let mut r = k.matvec(u);
    for ((ri, fi), &b) in r.iter_mut().zip(&f).zip(mesh.boundary_flags()) {
        *ri = if b { 0.0 } else { *ri - fi };
    }
    Ok(r)
}

/// `K − p·W(u)` with `W` weighted by `(u₊)^{p−1}`, before boundary
/// elimination.
pub fn nonlinear_jacobian(mesh: &Mesh, u: &[f64], p: f64) -> Result<SparseOperator, FemError> {
    let k = assemble_stiffness(mesh)?;
    jacobian_with(mesh, &k, u, p)
}

fn jacobian_with(
    mesh: &Mesh,
    k: &SparseOperator,
    u: &[f64],
    p: f64,
) -> Result<SparseOperator, FemError> {
    check_overflow(u, p)?;
    let w = assemble_weighted_mass(mesh, u, QuadratureRule::order2(), |v| {
        if v > 0.0 {
            v.powf(p - 1.0)
        } else {
            0.0
        }
    })?;
    Ok(k.add_scaled(1.0, &w, -p))
}

/// Everything about a mesh that the solvers reuse: the operators, the
/// Dirichlet-eliminated stiffness with its symbolic analysis, and a lazily
/// computed factorization of it.
#[derive(Debug)]
pub struct Discretization {
    mesh: Arc<Mesh>,
    stiffness: SparseOperator,
    mass: SparseOperator,
    stiffness_dirichlet: SparseOperator,
    symbolic: Arc<LdlSymbolic>,
    factor: OnceLock<Result<LdlFactor, NumericsError>>,
}

impl Discretization {
    pub fn new(mesh: Arc<Mesh>) -> Result<Self, FemError> {
        let stiffness = assemble_stiffness(&mesh)?;
        let mass = assemble_mass(&mesh)?;
        let stiffness_dirichlet = eliminate_dirichlet(&stiffness, mesh.boundary_flags());
        let symbolic = LdlSymbolic::analyze(&stiffness_dirichlet);
        Ok(Self {
            mesh,
            stiffness,
            mass,
            stiffness_dirichlet,
            symbolic,
            factor: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn stiffness(&self) -> &SparseOperator {
        &self.stiffness
    }

    pub fn mass(&self) -> &SparseOperator {
        &self.mass
    }

    pub fn stiffness_dirichlet(&self) -> &SparseOperator {
        &self.stiffness_dirichlet
    }

    pub fn symbolic(&self) -> &Arc<LdlSymbolic> {
        &self.symbolic
    }

    pub fn fixed(&self) -> &[bool] {
        self.mesh.boundary_flags()
    }

    pub fn dim(&self) -> usize {
        self.mesh.node_count()
    }

    pub fn stiffness_factor(&self) -> Result<&LdlFactor, NumericsError> {
        self.factor
            .get_or_init(|| {
                LdlFactor::factor(
                    &self.symbolic,
                    &self.stiffness_dirichlet,
                    Pivoting::Positive,
                )
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Solves `K u = rhs` with `u = 0` on the boundary (boundary entries of
    /// `rhs` are ignored).
    pub fn solve_dirichlet(&self, rhs: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let b: Vec<f64> = rhs
            .iter()
            .zip(self.fixed())
            .map(|(&v, &f)| if f { 0.0 } else { v })
            .collect();
        if self.dim() < DIRECT_SOLVE_LIMIT {
            Ok(self
                .stiffness_factor()?
                .solve_refined(&self.stiffness_dirichlet, &b, 1))
        } else {
            cg::pcg(
                &self.stiffness_dirichlet,
                &b,
                SOLVE_TOLERANCE,
                20 * self.dim().max(100),
            )
        }
    }

    /// Discrete harmonic extension: `K u = 0` at interior nodes with
    /// `u = boundary[i]` at boundary nodes (interior entries are ignored).
    pub fn harmonic_extension(&self, boundary: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let fixed = self.fixed();
        let lift: Vec<f64> = boundary
            .iter()
            .zip(fixed)
            .map(|(&v, &f)| if f { v } else { 0.0 })
            .collect();
        let k_lift = self.stiffness.matvec(&lift);
        let b: Vec<f64> = k_lift
            .iter()
            .zip(&lift)
            .zip(fixed)
            .map(|((&kl, &l), &f)| if f { l } else { -kl })
            .collect();
        if self.dim() < DIRECT_SOLVE_LIMIT {
            Ok(self
                .stiffness_factor()?
                .solve_refined(&self.stiffness_dirichlet, &b, 1))
        } else {
            cg::pcg(
                &self.stiffness_dirichlet,
                &b,
                SOLVE_TOLERANCE,
                20 * self.dim().max(100),
            )
        }
    }

    /// Nodal `M·1`, the lumped mass.
    pub fn lumped_mass(&self) -> Vec<f64> {
        self.mass.row_sums()
    }

    pub fn load(&self, u: &[f64], p: f64) -> Result<Vec<f64>, FemError> {
        nonlinear_load(&self.mesh, u, p)
    }

    pub fn residual(&self, u: &[f64], p: f64) -> Result<Vec<f64>, FemError> {
        residual_with(&self.mesh, &self.stiffness, u, p)
    }

    /// Jacobian with boundary rows and columns replaced by the identity.
    pub fn jacobian_dirichlet(&self, u: &[f64], p: f64) -> Result<SparseOperator, FemError> {
        let j = jacobian_with(&self.mesh, &self.stiffness, u, p)?;
        Ok(eliminate_dirichlet(&j, self.fixed()))
    }
}
