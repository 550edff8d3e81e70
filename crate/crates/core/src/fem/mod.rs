//! P1 finite elements on triangular meshes.

mod assembly;
mod nonlinear;
mod quadrature;
mod trace;

use std::io::{self, Write};

use crate::geometry::{Mesh, Point};

pub use assembly::{
    assemble_mass, assemble_stiffness, assemble_weighted_mass, dirichlet_energy, element_gradients,
    integrate_interpolants, integrate_power, integrate_power_checked, integrate_power_weighted,
    ElementGeometry, DEGENERATE_AREA,
};
pub use nonlinear::{
    nonlinear_jacobian, nonlinear_load, nonlinear_residual, Discretization, OVERFLOW_LIMIT,
};
pub use quadrature::QuadratureRule;
pub use trace::{normal_derivative, BoundaryTrace, TraceEdge};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("nonlinear term overflowed at node {node} (value {value:e})")]
    Overflow { node: usize, value: f64 },
    #[error("field has {found} values, mesh has {expected} nodes")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Nodal values of a P1 function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            values: vec![0.0; mesh.node_count()],
        }
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        Self {
            values: vec![value; mesh.node_count()],
        }
    }

    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<Self, FemError> {
        if values.len() != mesh.node_count() {
            return Err(FemError::DimensionMismatch {
                expected: mesh.node_count(),
                found: values.len(),
            });
        }
        Ok(Self { values })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        Self {
            values: mesh.nodes().iter().map(|&p| f(p)).collect(),
        }
    }

    /// Interpolant of `f` with boundary nodes set to exactly zero.
    pub fn interpolate_dirichlet(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        Self {
            values: mesh
                .nodes()
                .iter()
                .zip(mesh.boundary_flags())
                .map(|(&p, &b)| if b { 0.0 } else { f(p) })
                .collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest nodal value and its node.
    pub fn max(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn vanishes_on_boundary(&self, mesh: &Mesh) -> bool {
        self.values
            .iter()
            .zip(mesh.boundary_flags())
            .all(|(&v, &b)| !b || v == 0.0)
    }

    /// Plain-text export, one `node_index value` line per node.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i} {v:e}")?;
        }
        Ok(())
    }
}
