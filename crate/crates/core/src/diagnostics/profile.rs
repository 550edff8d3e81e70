//! Rescaled profiles near the peak: the `v` transform, the Liouville
//! bubble comparison and concentration points.

use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::Point;
use crate::solver::{Problem, SolveRecord};

use super::{DiagnosticsError, DiagnosticsOptions};

/// `ε_p = (p·M^{p−1})^{−1/2}`.
pub fn epsilon_p(p: f64, m: f64) -> f64 {
    (p * m.powf(p - 1.0)).powf(-0.5)
}

/// `U(s) = −2 log(1 + s²/8)`, the radial solution of `−ΔU = e^U` with
/// `U(0) = 0`.
pub fn liouville_profile(s: f64) -> f64 {
    -2.0 * (s * s / 8.0).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VTransformReport {
    pub min_v: f64,
    pub v_peak: f64,
    /// `max_r sup_{B_r} v / r²` over the sampled radii.
    pub q: f64,
}

/// `v = 1 − u/M` on the coordinates `x = M^{(p−1)/2}(y − x_max)`; radii
/// are sampled log-uniformly in `[p^{−1/2}, 10·p^{−1/2}]`, which is
/// `[ε_p, 10ε_p]` in physical units.
pub fn v_transform_report(
    problem: &Problem,
    rec: &SolveRecord,
    opts: &DiagnosticsOptions,
) -> VTransformReport {
    let mesh = problem.mesh();
    let m = rec.m;
    let p = rec.p;
    let v: Vec<f64> = rec.u.values().iter().map(|&u| 1.0 - u / m).collect();
    let min_v = v.iter().copied().fold(f64::INFINITY, f64::min);
    let v_peak = v[rec.peak_node];
    let scale = m.powf((p - 1.0) / 2.0);
    let x0 = rec.x_max;
    let mut by_dist: Vec<(f64, f64)> = mesh
        .nodes()
        .iter()
        .zip(&v)
        .map(|(y, &vi)| (scale * (y[0] - x0[0]).hypot(y[1] - x0[1]), vi))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let r_min = p.powf(-0.5);
    let n = opts.v_grid_points.max(2);
    let mut q: f64 = 0.0;
    let mut k = 0;
    let mut sup: f64 = 0.0;
    for j in 0..n {
        let r = r_min * 10f64.powf(j as f64 / (n - 1) as f64);
        while k < by_dist.len() && by_dist[k].0 <= r {
            sup = sup.max(by_dist[k].1);
            k += 1;
        }
        q = q.max(sup / (r * r));
    }
    VTransformReport { min_v, v_peak, q }
}

/// `sup |w_p − U|` over nodes with `|y − x_max| ≤ R·ε_p`, where
/// `w_p = p(u − M)/M` at `x = (y − x_max)/ε_p`.
pub fn bubble_distance(
    problem: &Problem,
    rec: &SolveRecord,
    opts: &DiagnosticsOptions,
) -> Result<f64, DiagnosticsError> {
    if rec.p < opts.min_bubble_exponent {
        return Err(DiagnosticsError::ExponentTooSmall {
            p: rec.p,
            min: opts.min_bubble_exponent,
        });
    }
    let eps = epsilon_p(rec.p, rec.m);
    let x0 = rec.x_max;
    let mut count = 0;
    let mut sup: f64 = 0.0;
    for (y, &u) in problem.mesh().nodes().iter().zip(rec.u.values()) {
        let s = (y[0] - x0[0]).hypot(y[1] - x0[1]) / eps;
        if s <= opts.bubble_radius {
            count += 1;
            let w = rec.p * (u - rec.m) / rec.m;
            sup = sup.max((w - liouville_profile(s)).abs());
        }
    }
    if count < opts.min_bubble_nodes {
        return Err(DiagnosticsError::InsufficientResolution {
            nodes: count,
            required: opts.min_bubble_nodes,
        });
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub x: Point,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Concentration {
    pub candidates: Vec<Candidate>,
    /// `8π Σ m_j²`.
    pub beta_pred: f64,
    pub merge_radius: f64,
}

/// Nodal local maxima at or above `threshold·M`, merged within
/// `merge_factor·ε_p` (a plateau of equal values counts once).
pub fn concentration_candidates(
    problem: &Problem,
    rec: &SolveRecord,
    threshold: f64,
    merge_factor: f64,
) -> Concentration {
    let mesh = problem.mesh();
    let u = rec.u.values();
    let neighbors = mesh.node_neighbors();
    let level = threshold * rec.m;
    let mut peaks: Vec<usize> = (0..u.len())
        .filter(|&i| u[i] >= level && u[i] > 0.0 && neighbors[i].iter().all(|&j| u[j] <= u[i]))
        .collect();
    peaks.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    let merge_radius = merge_factor * epsilon_p(rec.p, rec.m);
    let mut candidates: Vec<Candidate> = Vec::new();
    for i in peaks {
        let x = mesh.node(i);
        let close = candidates
            .iter()
            .any(|c| (c.x[0] - x[0]).hypot(c.x[1] - x[1]) <= merge_radius);
        if !close {
            candidates.push(Candidate { x, m: u[i] });
        }
    }
    let beta_pred = 8.0 * PI * candidates.iter().map(|c| c.m * c.m).sum::<f64>();
    Concentration {
        candidates,
        beta_pred,
        merge_radius,
    }
}
