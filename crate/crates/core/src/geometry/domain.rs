use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point};

/// Number of θ samples used for margins, distances and positivity checks.
pub const DENSE_SAMPLES: usize = 4096;
const REFINE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainKind {
    Disk {
        radius: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// `ρ(θ) = 1 + Σ_k (cos[k−1]·cos kθ + sin[k−1]·sin kθ)`.
    Fourier {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

/// A bounded planar domain, strictly star-shaped about the origin, whose
/// boundary is the polar curve `r = ρ(θ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    kind: DomainKind,
    margin: f64,
}

impl Domain {
    pub fn new(kind: DomainKind) -> Result<Self, GeometryError> {
        match &kind {
            DomainKind::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(GeometryError::InvalidParameter(format!(
                        "disk radius must be positive, got {radius}"
                    )));
                }
            }
            DomainKind::Ellipse { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(GeometryError::InvalidParameter(format!(
                        "ellipse semi-axes must be positive, got ({a}, {b})"
                    )));
                }
            }
            DomainKind::Fourier { cos, sin } => {
                if cos.iter().chain(sin).any(|c| !c.is_finite()) {
                    return Err(GeometryError::InvalidParameter(
                        "Fourier coefficients must be finite".into(),
                    ));
                }
            }
        }
        let mut domain = Self { kind, margin: 0.0 };
        let min_rho = (0..DENSE_SAMPLES)
            .map(|i| domain.rho(TAU * i as f64 / DENSE_SAMPLES as f64))
            .fold(f64::INFINITY, f64::min);
        if !(min_rho > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "boundary radius must stay positive (minimum {min_rho})"
            )));
        }
        let margin = domain.compute_margin();
        if !(margin > 0.0) {
            return Err(GeometryError::NotStarShaped { margin });
        }
        domain.margin = margin;
        Ok(domain)
    }

    pub fn disk(radius: f64) -> Result<Self, GeometryError> {
        Self::new(DomainKind::Disk { radius })
    }

    pub fn unit_disk() -> Self {
        Self::disk(1.0).expect("unit disk is valid")
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self, GeometryError> {
        Self::new(DomainKind::Ellipse { a, b })
    }

    pub fn fourier(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self, GeometryError> {
        Self::new(DomainKind::Fourier { cos, sin })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    /// Boundary radius ρ(θ).
    pub fn rho(&self, theta: f64) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius } => *radius,
            DomainKind::Ellipse { a, b } => {
                let (s, c) = theta.sin_cos();
                a * b / (b * b * c * c + a * a * s * s).sqrt()
            }
            DomainKind::Fourier { cos, sin } => {
                let mut r = 1.0;
                for (k, ak) in cos.iter().enumerate() {
                    r += ak * ((k + 1) as f64 * theta).cos();
                }
                for (k, bk) in sin.iter().enumerate() {
                    r += bk * ((k + 1) as f64 * theta).sin();
                }
                r
            }
        }
    }

    /// dρ/dθ.
    pub fn rho_prime(&self, theta: f64) -> f64 {
        match &self.kind {
            DomainKind::Disk { .. } => 0.0,
            DomainKind::Ellipse { a, b } => {
                let (s, c) = theta.sin_cos();
                let q = b * b * c * c + a * a * s * s;
                -0.5 * a * b * q.powf(-1.5) * (a * a - b * b) * (2.0 * theta).sin()
            }
            DomainKind::Fourier { cos, sin } => {
                let mut d = 0.0;
                for (k, ak) in cos.iter().enumerate() {
                    let m = (k + 1) as f64;
                    d -= m * ak * (m * theta).sin();
                }
                for (k, bk) in sin.iter().enumerate() {
                    let m = (k + 1) as f64;
                    d += m * bk * (m * theta).cos();
                }
                d
            }
        }
    }

    pub fn boundary_point(&self, theta: f64) -> Point {
        let r = self.rho(theta);
        let (s, c) = theta.sin_cos();
        [r * c, r * s]
    }

    /// Unit outer normal at `boundary_point(θ)`: the tangent rotated by −90°.
    pub fn outward_normal(&self, theta: f64) -> Point {
        let r = self.rho(theta);
        let dr = self.rho_prime(theta);
        let (s, c) = theta.sin_cos();
        let norm = (r * r + dr * dr).sqrt();
        [(dr * s + r * c) / norm, (r * s - dr * c) / norm]
    }

    /// `(x(θ), ν(θ)) = ρ² / √(ρ² + ρ'²)`.
    pub fn support(&self, theta: f64) -> f64 {
        let r = self.rho(theta);
        let dr = self.rho_prime(theta);
        r * r / (r * r + dr * dr).sqrt()
    }

    /// Star-shape margin α = min over the boundary of (x, ν).
    pub fn star_shape_margin(&self) -> f64 {
        self.margin
    }

    fn compute_margin(&self) -> f64 {
        let step = TAU / DENSE_SAMPLES as f64;
        let (imin, _) = (0..DENSE_SAMPLES)
            .map(|i| (i, self.support(i as f64 * step)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let t0 = imin as f64 * step;
        let (_, v) = golden_min(|t| self.support(t), t0 - step, t0 + step, REFINE_TOL);
        v.min(self.support(t0))
    }

    pub fn min_radius(&self) -> f64 {
        (0..DENSE_SAMPLES)
            .map(|i| self.rho(TAU * i as f64 / DENSE_SAMPLES as f64))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        (0..DENSE_SAMPLES)
            .map(|i| self.rho(TAU * i as f64 / DENSE_SAMPLES as f64))
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, x: Point) -> bool {
        let r = x[0].hypot(x[1]);
        r < self.rho(x[1].atan2(x[0]))
    }

    /// Euclidean distance from `x` to the boundary curve.
    pub fn distance_to_boundary(&self, x: Point) -> f64 {
        let step = TAU / DENSE_SAMPLES as f64;
        let dist = |t: f64| {
            let b = self.boundary_point(t);
            (x[0] - b[0]).hypot(x[1] - b[1])
        };
        let mut best = (0.0, f64::INFINITY);
        for i in 0..DENSE_SAMPLES {
            let t = i as f64 * step;
            let d = dist(t);
            if d < best.1 {
                best = (t, d);
            }
        }
        let (_, refined) = golden_min(dist, best.0 - step, best.0 + step, REFINE_TOL);
        refined.min(best.1)
    }

    /// Area enclosed by the boundary, `½∫ρ² dθ` (periodic trapezoid rule).
    pub fn area(&self) -> f64 {
        let n = 4 * DENSE_SAMPLES;
        let step = TAU / n as f64;
        0.5 * step
            * (0..n)
                .map(|i| self.rho(i as f64 * step).powi(2))
                .sum::<f64>()
    }

    /// Cumulative arc length on a uniform θ grid: returns `(θ_j, s_j)`
    /// with `j = 0..=n` and `s_n` the perimeter.
    pub(crate) fn arc_length_table(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let step = TAU / n as f64;
        let speed = |t: f64| self.rho(t).hypot(self.rho_prime(t));
        let mut thetas = Vec::with_capacity(n + 1);
        let mut s = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        thetas.push(0.0);
        s.push(0.0);
        for j in 0..n {
            let a = j as f64 * step;
            let b = a + step;
            // Simpson on each cell.
            acc += step / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
            thetas.push(b);
            s.push(acc);
        }
        (thetas, s)
    }

    pub fn perimeter(&self) -> f64 {
        let (_, s) = self.arc_length_table(4 * DENSE_SAMPLES);
        *s.last().unwrap()
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Normalizes an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a[0] - b[0]).abs() < tol && (a[1] - b[1]).abs() < tol
    }

    #[test]
    fn boundary_points() {
        assert!(close(
            Domain::unit_disk().boundary_point(0.0),
            [1.0, 0.0],
            1e-15
        ));
        let e = Domain::ellipse(2.0, 1.0).unwrap();
        assert!(close(e.boundary_point(PI / 2.0), [0.0, 1.0], 1e-15));
        let f = Domain::fourier(vec![0.0, 0.0, 0.1], vec![]).unwrap();
        assert!(close(f.boundary_point(0.0), [1.1, 0.0], 1e-15));
    }

    #[test]
    fn normals_of_disk_and_ellipse() {
        let d = Domain::unit_disk();
        for i in 0..16 {
            let t = i as f64 * 0.39;
            assert!(close(d.outward_normal(t), [t.cos(), t.sin()], 1e-15));
        }
        let e = Domain::ellipse(2.0, 1.0).unwrap();
        assert!(close(e.outward_normal(0.0), [1.0, 0.0], 1e-15));
    }

    #[test]
    fn margins() {
        assert!((Domain::unit_disk().star_shape_margin() - 1.0).abs() < 1e-12);
        assert!((Domain::disk(2.5).unwrap().star_shape_margin() - 2.5).abs() < 1e-12);
        let e = Domain::ellipse(2.0, 1.0).unwrap();
        assert!((e.star_shape_margin() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn distances() {
        let d = Domain::unit_disk();
        assert!((d.distance_to_boundary([0.0, 0.0]) - 1.0).abs() < 1e-8);
        assert!((d.distance_to_boundary([0.5, 0.0]) - 0.5).abs() < 1e-8);
        let e = Domain::ellipse(2.0, 1.0).unwrap();
        assert!((e.distance_to_boundary([0.0, 0.0]) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_domains_are_rejected() {
        assert!(matches!(
            Domain::disk(0.0),
            Err(GeometryError::InvalidParameter(_))
        ));
        assert!(matches!(
            Domain::ellipse(1.0, -1.0),
            Err(GeometryError::InvalidParameter(_))
        ));
        assert!(matches!(
            Domain::fourier(vec![1.5], vec![]),
            Err(GeometryError::InvalidParameter(_))
        ));
        // A polar curve with ρ > 0 is always star-shaped about the origin,
        // even when strongly lobed.
        let lobed = Domain::fourier(vec![0.0; 7].into_iter().chain([0.45]).collect(), vec![]);
        assert!(lobed.unwrap().star_shape_margin() > 0.0);
    }

    #[test]
    fn wrap() {
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert_eq!(wrap_angle(0.0), 0.0);
    }
}
