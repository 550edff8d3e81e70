//! Integral identities and blow-up statistics of computed solutions.

mod green;
mod identities;
mod profile;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::fem::FemError;
use crate::geometry::Point;
use crate::numerics::{eigen::principal_eigenpair_with_factor, EigenPair, NumericsError};
use crate::solver::{Problem, SolveRecord};

pub use green::{green_representation_gap, GreenReport};
pub use identities::{
    eigen_identity_gap, energy_quantities, flux_gap, mass_bound, peak_clearance, pohozaev_residual,
    EnergyQuantities, Identity,
};
pub use profile::{
    bubble_distance, concentration_candidates, epsilon_p, liouville_profile, v_transform_report,
    Candidate, Concentration, VTransformReport,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("pole clearance {clearance} is below {limit}")]
    PoleTooCloseToBoundary { clearance: f64, limit: f64 },
    #[error("only {nodes} nodes in the sampling disk, {required} required")]
    InsufficientResolution { nodes: usize, required: usize },
    #[error("rescaling needs p ≥ {min}, got {p}")]
    ExponentTooSmall { p: f64, min: f64 },
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsOptions {
    /// Candidates must reach this fraction of the maximum.
    pub concentration_threshold: f64,
    /// Candidates closer than this many `ε_p` are merged.
    pub merge_factor: f64,
    /// Bubble comparison disk radius in units of `ε_p`.
    pub bubble_radius: f64,
    pub min_bubble_nodes: usize,
    pub min_bubble_exponent: f64,
    /// Green exclusion radius as a multiple of the largest edge at the pole.
    pub green_exclusion_factor: f64,
    /// Minimum pole clearance as a multiple of `h`.
    pub green_clearance_factor: f64,
    /// Radii sampled for the quadratic growth statistic of `v`.
    pub v_grid_points: usize,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            concentration_threshold: 0.5,
            merge_factor: 10.0,
            bubble_radius: 5.0,
            min_bubble_nodes: 50,
            min_bubble_exponent: 10.0,
            green_exclusion_factor: 2.0,
            green_clearance_factor: 5.0,
            v_grid_points: 16,
        }
    }
}

/// Every identity and asymptotic statistic for one solution. Metrics that
/// could not be evaluated are `None`, with the reason in `unavailable`.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsBundle {
    pub p: f64,
    pub m: f64,
    pub x_max: Point,
    pub clearance: f64,
    pub eps_p: f64,
    /// `p∫|∇u|²`.
    pub beta: f64,
    pub p_int_u_p1: f64,
    pub int_u_p: f64,
    pub energy_gap: f64,
    pub energy_gap_rel: f64,
    pub pohozaev: Identity,
    pub eigen: Identity,
    pub flux: Identity,
    pub green: Option<GreenReport>,
    pub bubble_distance: Option<f64>,
    pub v_transform: VTransformReport,
    pub concentration: Concentration,
    pub unavailable: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl DiagnosticsBundle {
    pub fn corrector_range(&self) -> Option<(f64, f64)> {
        self.green
            .as_ref()
            .map(|g| (g.corrector_min, g.corrector_max))
    }
}

/// Principal Dirichlet eigenpair of the problem's mesh, reusing the cached
/// stiffness factorization.
pub fn principal_eigenpair_for(problem: &Problem) -> Result<EigenPair, NumericsError> {
    let disc = problem.disc();
    principal_eigenpair_with_factor(
        disc.stiffness(),
        disc.mass(),
        disc.fixed(),
        disc.stiffness_factor()?,
    )
}

pub fn compute_diagnostics(
    problem: &Problem,
    rec: &SolveRecord,
    eig: &EigenPair,
    opts: &DiagnosticsOptions,
) -> Result<DiagnosticsBundle, DiagnosticsError> {
    let mut unavailable = BTreeMap::new();
    let mut warnings = Vec::new();
    let energy = energy_quantities(problem, rec)?;
    if energy.clipped_nodes > 0 {
        warnings.push(format!(
            "{} negative nodal values clipped to zero",
            energy.clipped_nodes
        ));
    }
    let green = match green_representation_gap(problem, rec, opts) {
        Ok(g) => Some(g),
        Err(e @ DiagnosticsError::PoleTooCloseToBoundary { .. }) => {
            unavailable.insert("green".to_string(), e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let bubble = match bubble_distance(problem, rec, opts) {
        Ok(d) => Some(d),
        Err(
            e @ (DiagnosticsError::InsufficientResolution { .. }
            | DiagnosticsError::ExponentTooSmall { .. }),
        ) => {
            unavailable.insert("bubble_distance".to_string(), e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    Ok(DiagnosticsBundle {
        p: rec.p,
        m: rec.m,
        x_max: rec.x_max,
        clearance: peak_clearance(problem.domain(), rec),
        eps_p: epsilon_p(rec.p, rec.m),
        beta: energy.beta,
        p_int_u_p1: energy.p_int_u_p1,
        int_u_p: mass_bound(problem, rec)?,
        energy_gap: energy.gap,
        energy_gap_rel: energy.relative,
        pohozaev: pohozaev_residual(problem, rec)?,
        eigen: eigen_identity_gap(problem, rec, eig)?,
        flux: flux_gap(problem, rec)?,
        green,
        bubble_distance: bubble,
        v_transform: v_transform_report(problem, rec, opts),
        concentration: concentration_candidates(
            problem,
            rec,
            opts.concentration_threshold,
            opts.merge_factor,
        ),
        unavailable,
        warnings,
    })
}

/// Diagnostics for many records of one problem on up to `workers` scoped
/// threads; results keep the input order.
pub fn compute_many(
    problem: &Problem,
    eig: &EigenPair,
    records: &[&SolveRecord],
    opts: &DiagnosticsOptions,
    workers: usize,
) -> Vec<Result<DiagnosticsBundle, DiagnosticsError>> {
    let workers = workers.clamp(1, records.len().max(1));
    let chunk = records.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = records
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|rec| compute_diagnostics(problem, rec, eig, opts))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("diagnostics worker panicked"))
            .collect()
    })
}
