use serde::Serialize;

use crate::fem::{
    dirichlet_energy, integrate_power, integrate_power_checked, integrate_power_weighted,
    normal_derivative,
};
use crate::geometry::Domain;
use crate::numerics::{dot_l2, EigenPair};
use crate::solver::{Problem, SolveRecord};

use super::DiagnosticsError;

/// Two sides of an identity with their absolute and relative mismatch.
/// The relative gap is taken against `|lhs|`; when `lhs` vanishes the
/// absolute gap is reported instead (0 for `u = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Identity {
    pub lhs: f64,
    pub rhs: f64,
    pub absolute: f64,
    pub relative: f64,
}

impl Identity {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let absolute = (lhs - rhs).abs();
        let relative = if lhs != 0.0 {
            absolute / lhs.abs()
        } else {
            absolute
        };
        Self {
            lhs,
            rhs,
            absolute,
            relative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyQuantities {
    /// `p·uᵀKu`.
    pub beta: f64,
    /// `p∫u^{p+1}` with the degree-4 rule.
    pub p_int_u_p1: f64,
    pub gap: f64,
    pub relative: f64,
    pub clipped_nodes: usize,
}

pub fn energy_quantities(
    problem: &Problem,
    rec: &SolveRecord,
) -> Result<EnergyQuantities, DiagnosticsError> {
    let mesh = problem.mesh();
    let u = rec.u.values();
    let beta = rec.p * dirichlet_energy(mesh, u)?;
    let (pow, clipped_nodes) = integrate_power_checked(mesh, u, rec.p + 1.0)?;
    let p_int_u_p1 = rec.p * pow;
    let id = Identity::new(beta, p_int_u_p1);
    Ok(EnergyQuantities {
        beta,
        p_int_u_p1,
        gap: id.absolute,
        relative: id.relative,
        clipped_nodes,
    })
}

/// `4/(p+1)∫u^{p+1}` against `Σ (x,ν) u_ν² |e|` over boundary edges.
pub fn pohozaev_residual(
    problem: &Problem,
    rec: &SolveRecord,
) -> Result<Identity, DiagnosticsError> {
    let mesh = problem.mesh();
    let u = rec.u.values();
    let lhs = 4.0 / (rec.p + 1.0) * integrate_power(mesh, u, rec.p + 1.0)?;
    let trace = normal_derivative(mesh, u)?;
    let rhs = trace
        .edges
        .iter()
        .map(|e| {
            let xn = e.midpoint[0] * e.normal[0] + e.midpoint[1] * e.normal[1];
            xn * e.u_nu * e.u_nu * e.length
        })
        .sum();
    Ok(Identity::new(lhs, rhs))
}

/// `λ∫uφ` (mass matrix) against `∫u^pφ` (degree-4 rule).
pub fn eigen_identity_gap(
    problem: &Problem,
    rec: &SolveRecord,
    eig: &EigenPair,
) -> Result<Identity, DiagnosticsError> {
    let u = rec.u.values();
    let lhs = eig.lambda * dot_l2(problem.disc().mass(), u, &eig.phi)?;
    let rhs = integrate_power_weighted(problem.mesh(), u, rec.p, &eig.phi)?;
    Ok(Identity::new(lhs, rhs))
}

/// `∫u^p` against the outward flux `Σ(−u_ν)|e|`.
pub fn flux_gap(problem: &Problem, rec: &SolveRecord) -> Result<Identity, DiagnosticsError> {
    let mesh = problem.mesh();
    let u = rec.u.values();
    let lhs = integrate_power(mesh, u, rec.p)?;
    let rhs = -normal_derivative(mesh, u)?.flux();
    Ok(Identity::new(lhs, rhs))
}

/// `∫u^p`.
pub fn mass_bound(problem: &Problem, rec: &SolveRecord) -> Result<f64, DiagnosticsError> {
    Ok(integrate_power(problem.mesh(), rec.u.values(), rec.p)?)
}

pub fn peak_clearance(domain: &Domain, rec: &SolveRecord) -> f64 {
    domain.distance_to_boundary(rec.x_max)
}
