use serde::Serialize;

use crate::geometry::{Mesh, Point};

use super::{ElementGeometry, FemError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEdge {
    pub u_nu: f64,
    pub length: f64,
    pub midpoint: Point,
    pub normal: Point,
}

/// Outward normal derivative on each boundary edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTrace {
    pub edges: Vec<TraceEdge>,
}

impl BoundaryTrace {
    /// `∮ u_ν ds`.
    pub fn flux(&self) -> f64 {
        self.edges.iter().map(|e| e.u_nu * e.length).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.edges.iter().map(|e| e.u_nu.abs()).fold(0.0, f64::max)
    }
}

/// Recovers `u_ν` from the gradient of the triangle adjacent to each
/// boundary edge (first order accurate).
pub fn normal_derivative(mesh: &Mesh, u: &[f64]) -> Result<BoundaryTrace, FemError> {
    if u.len() != mesh.node_count() {
        return Err(FemError::DimensionMismatch {
            expected: mesh.node_count(),
            found: u.len(),
        });
    }
    let edges = mesh
        .boundary_edges()
        .iter()
        .map(|e| {
            let tri = mesh.triangles()[e.triangle];
            let g = ElementGeometry::checked(mesh, e.triangle)?;
            let grad = g.gradient([u[tri[0]], u[tri[1]], u[tri[2]]]);
            Ok(TraceEdge {
                u_nu: grad[0] * e.normal[0] + grad[1] * e.normal[1],
                length: e.length,
                midpoint: e.midpoint(mesh),
                normal: e.normal,
            })
        })
        .collect::<Result<_, FemError>>()?;
    Ok(BoundaryTrace { edges })
}
