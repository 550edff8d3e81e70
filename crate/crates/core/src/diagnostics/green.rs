//! Green representation `u(x₀) = ∫G(x₀,y)u^p(y)dy` with
//! `G = −(1/2π)log|y − x₀| − g(y)` and `g` harmonic.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::fem::{integrate_interpolants, QuadratureRule};
use crate::geometry::Point;
use crate::numerics::sparse::norm2;
use crate::solver::{Problem, SolveRecord};

use super::{DiagnosticsError, DiagnosticsOptions, Identity};

/// Triangles near the pole are split into `4^SUBDIVISION` pieces so the
/// exclusion disk is resolved by the quadrature.
const SUBDIVISION: u32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenReport {
    /// `lhs = u(x_max)`, `rhs = ∫G u^p`.
    pub identity: Identity,
    pub corrector_min: f64,
    pub corrector_max: f64,
    pub exclusion_radius: f64,
    /// `‖K g‖` over interior rows.
    pub harmonic_residual: f64,
}

fn for_each_point(
    pts: [Point; 3],
    vals: [f64; 3],
    level: u32,
    rule: &QuadratureRule,
    f: &mut impl FnMut(Point, f64, f64),
) {
    if level == 0 {
        let area = 0.5
            * ((pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1])
                - (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]));
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let x = [
                lam[0] * pts[0][0] + lam[1] * pts[1][0] + lam[2] * pts[2][0],
                lam[0] * pts[0][1] + lam[1] * pts[1][1] + lam[2] * pts[2][1],
            ];
            let v = lam[0] * vals[0] + lam[1] * vals[1] + lam[2] * vals[2];
            f(x, v, area * w);
        }
        return;
    }
    let mid = |a: usize, b: usize| {
        (
            [0.5 * (pts[a][0] + pts[b][0]), 0.5 * (pts[a][1] + pts[b][1])],
            0.5 * (vals[a] + vals[b]),
        )
    };
    let (p01, v01) = mid(0, 1);
    let (p12, v12) = mid(1, 2);
    let (p20, v20) = mid(2, 0);
    for (tp, tv) in [
        ([pts[0], p01, p20], [vals[0], v01, v20]),
        ([p01, pts[1], p12], [v01, vals[1], v12]),
        ([p20, p12, pts[2]], [v20, v12, vals[2]]),
        ([p01, p12, p20], [v01, v12, v20]),
    ] {
        for_each_point(tp, tv, level - 1, rule, f);
    }
}

/// Evaluates the representation at the peak. The logarithm is integrated
/// outside a disk of radius `ρ` (a multiple of the largest edge at the
/// pole); inside it contributes `(1/2π)·πρ²(1/2 + log(1/ρ))` times the mean
/// of `u^p` over the disk.
pub fn green_representation_gap(
    problem: &Problem,
    rec: &SolveRecord,
    opts: &DiagnosticsOptions,
) -> Result<GreenReport, DiagnosticsError> {
    let mesh = problem.mesh();
    let disc = problem.disc();
    let limit = opts.green_clearance_factor * mesh.h();
    let clearance = problem.domain().distance_to_boundary(rec.x_max);
    if clearance < limit {
        return Err(DiagnosticsError::PoleTooCloseToBoundary { clearance, limit });
    }
    let x0 = rec.x_max;
    let dist = |y: Point| (y[0] - x0[0]).hypot(y[1] - x0[1]);
    let data: Vec<f64> = mesh
        .nodes()
        .iter()
        .zip(mesh.boundary_flags())
        .map(|(&y, &b)| if b { -dist(y).ln() / TAU } else { 0.0 })
        .collect();
    let g = disc.harmonic_extension(&data)?;
    let kg = disc.stiffness().matvec(&g);
    let interior: Vec<f64> = kg
        .iter()
        .zip(disc.fixed())
        .map(|(&v, &f)| if f { 0.0 } else { v })
        .collect();
    let harmonic_residual = norm2(&interior);
    let corrector_min = g.iter().copied().fold(f64::INFINITY, f64::min);
    let corrector_max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let u = rec.u.values();
    let p = rec.p;
    let smooth = integrate_interpolants(mesh, QuadratureRule::order4(), &[u, &g], |_, v| {
        v[0].max(0.0).powf(p) * v[1]
    })?;

    let rho = opts.green_exclusion_factor * mesh.local_size(rec.peak_node);
    let rule = QuadratureRule::order4();
    let mut log_part = 0.0;
    let mut inside = 0.0;
    let mut inside_area = 0.0;
    let mut visit = |y: Point, v: f64, w: f64| {
        let r = dist(y);
        let up = v.max(0.0).powf(p);
        if r < rho {
            inside += w * up;
            inside_area += w;
        } else {
            log_part -= w * r.ln() / TAU * up;
        }
    };
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let pts = mesh.triangle_points(t);
        let vals = [u[tri[0]], u[tri[1]], u[tri[2]]];
        let longest = (0..3)
            .map(|e| dist_pts(pts[e], pts[(e + 1) % 3]))
            .fold(0.0, f64::max);
        let near = pts.iter().any(|&q| dist(q) < rho + longest);
        let level = if near { SUBDIVISION } else { 0 };
        for_each_point(pts, vals, level, rule, &mut visit);
    }
    let mean = if inside_area > 0.0 {
        inside / inside_area
    } else {
        u[rec.peak_node].max(0.0).powf(p)
    };
    let analytic = PI * rho * rho * (0.5 - rho.ln()) / TAU * mean;
    let rhs = log_part + analytic - smooth;
    Ok(GreenReport {
        identity: Identity::new(u[rec.peak_node], rhs),
        corrector_min,
        corrector_max,
        exclusion_radius: rho,
        harmonic_residual,
    })
}

fn dist_pts(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
