//! Element matrices, global assembly and quadrature of nodal fields.

use crate::geometry::{Mesh, Point};
use crate::numerics::{SparseOperator, TripletBuilder};

use super::{FemError, QuadratureRule};

/// A triangle counts as degenerate when its area is at most this multiple
/// of its longest edge squared.
pub const DEGENERATE_AREA: f64 = 1e-14;

/// Area and barycentric gradient data of one triangle.
///
/// `∇λ_i = (b[i], c[i]) / (2·area)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub b: [f64; 3],
    pub c: [f64; 3],
}

impl ElementGeometry {
    pub fn new(p: [Point; 3]) -> Self {
        let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
        let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
        let area = 0.5 * (b[0] * c[1] - b[1] * c[0]);
        Self { area, b, c }
    }

    pub fn checked(mesh: &Mesh, t: usize) -> Result<Self, FemError> {
        let pts = mesh.triangle_points(t);
        let g = Self::new(pts);
        let longest = (0..3)
            .map(|e| {
                let (a, b) = (pts[e], pts[(e + 1) % 3]);
                (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
            })
            .fold(0.0, f64::max);
        if !(g.area > DEGENERATE_AREA * longest) {
            return Err(FemError::DegenerateTriangle {
                triangle: t,
                area: g.area,
            });
        }
        Ok(g)
    }

    pub fn stiffness(&self) -> [[f64; 3]; 3] {
        let s = 1.0 / (4.0 * self.area);
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = s * (self.b[i] * self.b[j] + self.c[i] * self.c[j]);
            }
        }
        k
    }

    pub fn mass(&self) -> [[f64; 3]; 3] {
        let d = self.area / 6.0;
        let o = self.area / 12.0;
        [[d, o, o], [o, d, o], [o, o, d]]
    }

    /// Gradient of the linear interpolant of nodal values `u`.
    pub fn gradient(&self, u: [f64; 3]) -> Point {
        let s = 0.5 / self.area;
        [
            s * (self.b[0] * u[0] + self.b[1] * u[1] + self.b[2] * u[2]),
            s * (self.c[0] * u[0] + self.c[1] * u[1] + self.c[2] * u[2]),
        ]
    }
}

fn check_len(mesh: &Mesh, u: &[f64]) -> Result<(), FemError> {
    if u.len() != mesh.node_count() {
        return Err(FemError::DimensionMismatch {
            expected: mesh.node_count(),
            found: u.len(),
        });
    }
    Ok(())
}

fn assemble(
    mesh: &Mesh,
    mut element: impl FnMut(usize, &ElementGeometry) -> [[f64; 3]; 3],
) -> Result<SparseOperator, FemError> {
    let mut builder = TripletBuilder::with_capacity(mesh.node_count(), 9 * mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = ElementGeometry::checked(mesh, t)?;
        let m = element(t, &g);
        for i in 0..3 {
            for j in 0..3 {
                builder.push(tri[i], tri[j], m[i][j]);
            }
        }
    }
    Ok(builder.build(true))
}

/// `K_ij = ∫∇φ_i·∇φ_j`, without boundary conditions.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<SparseOperator, FemError> {
    assemble(mesh, |_, g| g.stiffness())
}

/// `M_ij = ∫φ_iφ_j`, without boundary conditions.
pub fn assemble_mass(mesh: &Mesh) -> Result<SparseOperator, FemError> {
    assemble(mesh, |_, g| g.mass())
}

/// `W_ij = ∫ weight(u_h) φ_iφ_j` evaluated with `rule` on the interpolant of `u`.
pub fn assemble_weighted_mass(
    mesh: &Mesh,
    u: &[f64],
    rule: &QuadratureRule,
    weight: impl Fn(f64) -> f64,
) -> Result<SparseOperator, FemError> {
    check_len(mesh, u)?;
    let tris = mesh.triangles();
    assemble(mesh, |t, g| {
        let tri = tris[t];
        let mut m = [[0.0; 3]; 3];
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let uq = lam[0] * u[tri[0]] + lam[1] * u[tri[1]] + lam[2] * u[tri[2]];
            let f = g.area * w * weight(uq);
            if f == 0.0 {
                continue;
            }
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += f * lam[i] * lam[j];
                }
            }
        }
        m
    })
}

/// Gradient of the interpolant of `u` on every triangle.
pub fn element_gradients(mesh: &Mesh, u: &[f64]) -> Result<Vec<Point>, FemError> {
    check_len(mesh, u)?;
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let g = ElementGeometry::checked(mesh, t)?;
            Ok(g.gradient([u[tri[0]], u[tri[1]], u[tri[2]]]))
        })
        .collect()
}

/// `∫ f(x, u_1(x), …, u_k(x)) dx` where each `u_j` is the interpolant of
/// `fields[j]`, using `rule` on every triangle.
pub fn integrate_interpolants(
    mesh: &Mesh,
    rule: &QuadratureRule,
    fields: &[&[f64]],
    mut f: impl FnMut(Point, &[f64]) -> f64,
) -> Result<f64, FemError> {
    for u in fields {
        check_len(mesh, u)?;
    }
    let mut vals = vec![0.0; fields.len()];
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let pts = mesh.triangle_points(t);
        let area = ElementGeometry::new(pts).area;
        let mut local = 0.0;
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = [
                lam[0] * pts[0][0] + lam[1] * pts[1][0] + lam[2] * pts[2][0],
                lam[0] * pts[0][1] + lam[1] * pts[1][1] + lam[2] * pts[2][1],
            ];
            for (v, u) in vals.iter_mut().zip(fields) {
                *v = lam[0] * u[tri[0]] + lam[1] * u[tri[1]] + lam[2] * u[tri[2]];
            }
            local += w * f(x, &vals);
        }
        total += area * local;
    }
    Ok(total)
}

/// `∫(u₊)^q` with the degree-4 rule; negative nodal values are clipped
/// and counted.
pub fn integrate_power_checked(mesh: &Mesh, u: &[f64], q: f64) -> Result<(f64, usize), FemError> {
    check_len(mesh, u)?;
    let clipped = u.iter().filter(|&&v| v < 0.0).count();
    let plus: Vec<f64> = u.iter().map(|&v| v.max(0.0)).collect();
    let value = integrate_interpolants(mesh, QuadratureRule::order4(), &[&plus], |_, v| {
        v[0].max(0.0).powf(q)
    })?;
    Ok((value, clipped))
}

pub fn integrate_power(mesh: &Mesh, u: &[f64], q: f64) -> Result<f64, FemError> {
    integrate_power_checked(mesh, u, q).map(|(v, _)| v)
}

/// `∫(u₊)^q·g` with the degree-4 rule.
pub fn integrate_power_weighted(
    mesh: &Mesh,
    u: &[f64],
    q: f64,
    g: &[f64],
) -> Result<f64, FemError> {
    integrate_interpolants(mesh, QuadratureRule::order4(), &[u, g], |_, v| {
        v[0].max(0.0).powf(q) * v[1]
    })
}

/// `∫|∇u_h|²`, equal to `uᵀKu`.
pub fn dirichlet_energy(mesh: &Mesh, u: &[f64]) -> Result<f64, FemError> {
    check_len(mesh, u)?;
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = ElementGeometry::checked(mesh, t)?;
        let d = g.gradient([u[tri[0]], u[tri[1]], u[tri[2]]]);
        total += g.area * (d[0] * d[0] + d[1] * d[1]);
    }
    Ok(total)
}
