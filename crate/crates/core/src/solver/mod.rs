//! Solution constructors: the radial oracle, the least-energy initializer,
//! damped Newton and continuation in the exponent.

mod init;
mod newton;
mod radial;
mod sweep;

use std::sync::Arc;

use serde::Serialize;

use crate::fem::{Discretization, FemError, Field};
use crate::geometry::{generate_mesh_with, Domain, GeometryError, Mesh, MeshOptions, Point};
use crate::numerics::NumericsError;

pub use init::{least_energy_init, InitOptions};
pub use newton::{newton_refine, NewtonOptions, COLLAPSE_THRESHOLD, NEGATIVITY_FLOOR};
pub use radial::{radial_shoot, radial_shoot_fixed_step, radial_shoot_on_radius, RadialSolution};
pub use sweep::{continuation_sweep, locate_peak, rescaled_seed, SweepItem, SweepOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shooting interval [{low}, {high}] does not bracket the boundary")]
    NoBracket { low: f64, high: f64 },
    #[error("line search found no decrease at iteration {iteration}")]
    LineSearchFailure { iteration: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("iterate collapsed to the trivial solution (max {m:e})")]
    CollapsedToZero { m: f64 },
    #[error("converged field is negative somewhere (min {min:e})")]
    NegativeSolution { min: f64 },
    #[error("every exponent of the sweep failed")]
    SweepEmpty,
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl SolverError {
    /// Short machine-readable tag.
    pub fn status(&self) -> &'static str {
        match self {
            Self::InvalidParameter(_) => "invalid_parameter",
            Self::NoBracket { .. } => "no_bracket",
            Self::LineSearchFailure { .. } => "line_search_failure",
            Self::NotConverged { .. } => "not_converged",
            Self::CollapsedToZero { .. } => "collapsed_to_zero",
            Self::NegativeSolution { .. } => "negative_solution",
            Self::SweepEmpty => "sweep_empty",
            Self::Fem(FemError::Overflow { .. }) => "overflow",
            Self::Fem(_) => "fem_error",
            Self::Numerics(_) => "linear_solver_error",
            Self::Geometry(_) => "geometry_error",
        }
    }
}

/// A domain together with its mesh and assembled operators.
#[derive(Debug)]
pub struct Problem {
    domain: Domain,
    disc: Discretization,
}

impl Problem {
    pub fn new(domain: Domain, mesh: Mesh) -> Result<Self, SolverError> {
        let disc = Discretization::new(Arc::new(mesh))?;
        Ok(Self { domain, disc })
    }

    pub fn generate(domain: Domain, options: &MeshOptions) -> Result<Self, SolverError> {
        let mesh = generate_mesh_with(&domain, options)?;
        Self::new(domain, mesh)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.disc.mesh()
    }
}

/// One converged solution.
#[derive(Debug, Clone, Serialize)]
pub struct SolveRecord {
    pub p: f64,
    #[serde(skip)]
    pub u: Field,
    /// Largest nodal value.
    pub m: f64,
    pub peak_node: usize,
    pub x_max: Point,
    /// Distance from `x_max` to the boundary.
    pub clearance: f64,
    pub residual_norm: f64,
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub h: f64,
}
