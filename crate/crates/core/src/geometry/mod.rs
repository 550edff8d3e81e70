//! Star-shaped planar domains and their triangulations.

mod domain;
mod mesh;

pub use domain::{wrap_angle, Domain, DomainKind, DENSE_SAMPLES};
pub use mesh::{
    generate_mesh, generate_mesh_with, BoundaryEdge, Mesh, MeshOptions, PeakRefinement,
    MIN_ANGLE_DEG,
};

/// A point or vector in the plane.
pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid domain parameter: {0}")]
    InvalidParameter(String),
    #[error("domain is not strictly star-shaped about the origin (margin {margin})")]
    NotStarShaped { margin: f64 },
    #[error("mesh size h = {h} outside (0, {limit})")]
    InvalidMeshSize { h: f64, limit: f64 },
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
}
