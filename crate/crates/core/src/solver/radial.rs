//! Radial shooting for `u″ + u′/r + u^p = 0`, `u′(0) = 0`, `u(R) = 0`.

use serde::Serialize;

use super::SolverError;

const SHOOT_LOW: f64 = 0.1;
const SHOOT_HIGH: f64 = 10.0;
const RK_RTOL: f64 = 1e-12;
const MAX_STEPS: usize = 2_000_000;

/// Positive radial solution on the disk of radius `radius`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub p: f64,
    pub radius: f64,
    /// `u(0)`, the maximum.
    pub m: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `u′(R)`.
    pub boundary_slope: f64,
    /// `∫ u^{p+1}` over the disk.
    pub int_u_p1: f64,
    /// `∫ |∇u|²` over the disk.
    pub int_grad2: f64,
    /// `∫ u^p` over the disk.
    pub int_u_p: f64,
    /// `∫ G(0, y) u^p(y) dy` with the Dirichlet Green function of the disk.
    pub green_center: f64,
    /// Shooting iterations used.
    pub iterations: usize,
}

impl RadialSolution {
    /// `u(r)` by cubic Hermite interpolation; zero outside the disk.
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.radius {
            return 0.0;
        }
        if r <= self.r[0] {
            // Series region.
            let p = self.p;
            let a = self.m;
            return a - a.powf(p) * r * r / 4.0 + p * a.powf(2.0 * p - 1.0) * r.powi(4) / 64.0;
        }
        let k = self.r.partition_point(|&x| x <= r).min(self.r.len() - 1);
        let (r0, r1) = (self.r[k - 1], self.r[k]);
        let h = r1 - r0;
        let t = (r - r0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.u[k - 1] + h10 * h * self.du[k - 1] + h01 * self.u[k] + h11 * h * self.du[k]
    }

    /// The Pohozaev identity on the disk: `4/(p+1)∫u^{p+1}` and
    /// `2πR·R·u′(R)²` (since `(x,ν) = R`).
    pub fn pohozaev_sides(&self) -> (f64, f64) {
        let lhs = 4.0 / (self.p + 1.0) * self.int_u_p1;
        let rhs = std::f64::consts::TAU * self.radius * self.radius * self.boundary_slope.powi(2);
        (lhs, rhs)
    }
}

/// State: u, u′, ∫u^{p+1}r, ∫u′²r, ∫u^p r, ∫log(1/r)u^p r.
type State = [f64; 6];

fn rhs(p: f64, r: f64, y: &State) -> State {
    let u = y[0].max(0.0);
    let up = u.powf(p);
    [
        y[1],
        -y[1] / r - up,
        up * u * r,
        y[1] * y[1] * r,
        up * r,
        -r.ln() * up * r,
    ]
}

fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..6 {
            out[i] += c * k[i];
        }
    }
    out
}

/// One Dormand–Prince step; returns the 5th order solution and an error
/// estimate.
fn dp_step(p: f64, r: f64, y: &State, h: f64) -> (State, State) {
    let k1 = rhs(p, r, y);
    let k2 = rhs(p, r + h / 5.0, &axpy(y, &[(h / 5.0, &k1)]));
    let k3 = rhs(
        p,
        r + 3.0 * h / 10.0,
        &axpy(y, &[(3.0 * h / 40.0, &k1), (9.0 * h / 40.0, &k2)]),
    );
    let k4 = rhs(
        p,
        r + 4.0 * h / 5.0,
        &axpy(
            y,
            &[
                (44.0 * h / 45.0, &k1),
                (-56.0 * h / 15.0, &k2),
                (32.0 * h / 9.0, &k3),
            ],
        ),
    );
    let k5 = rhs(
        p,
        r + 8.0 * h / 9.0,
        &axpy(
            y,
            &[
                (19372.0 * h / 6561.0, &k1),
                (-25360.0 * h / 2187.0, &k2),
                (64448.0 * h / 6561.0, &k3),
                (-212.0 * h / 729.0, &k4),
            ],
        ),
    );
    let k6 = rhs(
        p,
        r + h,
        &axpy(
            y,
            &[
                (9017.0 * h / 3168.0, &k1),
                (-355.0 * h / 33.0, &k2),
                (46732.0 * h / 5247.0, &k3),
                (49.0 * h / 176.0, &k4),
                (-5103.0 * h / 18656.0, &k5),
            ],
        ),
    );
    let y5 = axpy(
        y,
        &[
            (35.0 * h / 384.0, &k1),
            (500.0 * h / 1113.0, &k3),
            (125.0 * h / 192.0, &k4),
            (-2187.0 * h / 6784.0, &k5),
            (11.0 * h / 84.0, &k6),
        ],
    );
    let k7 = rhs(p, r + h, &y5);
    let e = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
    let mut err = [0.0; 6];
    for i in 0..6 {
        err[i] = h * ks.iter().zip(&e).map(|(k, c)| c * k[i]).sum::<f64>();
    }
    (y5, err)
}

/// Width of the core where the series start is accurate.
fn core_width(p: f64, a: f64) -> f64 {
    (p * a.powf(p - 1.0)).powf(-0.5)
}

fn series_start(p: f64, a: f64, r0: f64) -> State {
    // Written through k = a^{p−1}·r0 and s = k·r0 so that large `p` does
    // not overflow intermediate powers.
    let k = a.powf(p - 1.0) * r0;
    let s = k * r0;
    let u = a * (1.0 - s / 4.0 + p * s * s / 64.0);
    let du = a * k * (-0.5 + p * s / 16.0);
    [
        u,
        du,
        a * a * s / 2.0,
        a * a * s * s / 16.0,
        a * s / 2.0,
        a * s * (0.25 - 0.5 * r0.ln()),
    ]
}

struct Trajectory {
    r: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    zero: f64,
    end: State,
}

/// Integrates from `u(0) = a` to the first zero of `u`.
fn integrate(p: f64, a: f64, keep_profile: bool) -> Result<Trajectory, SolverError> {
    let width = core_width(p, a);
    let r0 = 1e-4 * width.min(1.0);
    let mut r = r0;
    let mut y = series_start(p, a, r0);
    let mut h = 0.1 * r0.max(1e-3 * width);
    let mut traj = Trajectory {
        r: vec![r],
        u: vec![y[0]],
        du: vec![y[1]],
        zero: f64::NAN,
        end: y,
    };
    let atol = 1e-15 * a;
    for _ in 0..MAX_STEPS {
        let (ynew, err) = dp_step(p, r, &y, h);
        let mut ratio: f64 = 0.0;
        for i in 0..2 {
            let scale = atol + RK_RTOL * y[i].abs().max(ynew[i].abs());
            ratio = ratio.max(err[i].abs() / scale);
        }
        if !ratio.is_finite() {
            h *= 0.25;
            continue;
        }
        if ratio > 1.0 {
            h *= (0.9 * ratio.powf(-0.2)).max(0.2);
            continue;
        }
        if ynew[0] <= 0.0 {
            let (t, yz) = locate_zero(p, r, &y, h, ynew[0]);
            traj.zero = r + t;
            traj.end = yz;
            if keep_profile {
                traj.r.push(traj.zero);
                traj.u.push(0.0);
                traj.du.push(yz[1]);
            }
            return Ok(traj);
        }
        r += h;
        y = ynew;
        if keep_profile {
            traj.r.push(r);
            traj.u.push(y[0]);
            traj.du.push(y[1]);
        }
        let grow = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).min(5.0)
        };
        h *= grow;
    }
    Err(SolverError::NotConverged {
        iterations: MAX_STEPS,
        residual: y[0],
    })
}

/// Finds `t ∈ (0, h]` with `u(r + t) = 0` by Newton on the step length.
fn locate_zero(p: f64, r: f64, y: &State, h: f64, u_end: f64) -> (f64, State) {
    let mut t = h * y[0] / (y[0] - u_end);
    let mut yt = dp_step(p, r, y, t).0;
    for _ in 0..50 {
        let dt = -yt[0] / yt[1];
        t = (t + dt).clamp(0.0, h);
        yt = dp_step(p, r, y, t).0;
        if dt.abs() <= 1e-15 * (r + t) {
            break;
        }
    }
    (t, yt)
}

/// Shooting solution of the Lane–Emden problem on the unit disk.
pub fn radial_shoot(p: f64, tol: f64) -> Result<RadialSolution, SolverError> {
    radial_shoot_on_radius(p, 1.0, tol)
}

/// Shooting solution on the disk of radius `radius`: the shot `a = u(0)`
/// is searched in `[0.1, 10]` until the first zero lies at `radius` within
/// `tol` (relative), then the profile is rescaled onto the exact radius.
pub fn radial_shoot_on_radius(
    p: f64,
    radius: f64,
    tol: f64,
) -> Result<RadialSolution, SolverError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(SolverError::InvalidParameter(format!(
            "exponent must exceed 1, got {p}"
        )));
    }
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(SolverError::InvalidParameter(format!(
            "shooting tolerance {tol} outside [1e-14, 1e-6]"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(SolverError::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    // g(s) = log(z(e^s)/R), decreasing in s.
    let g = |s: f64| -> Result<f64, SolverError> {
        Ok((integrate(p, s.exp(), false)?.zero / radius).ln())
    };
    let (mut s0, mut s1) = (SHOOT_LOW.ln(), SHOOT_HIGH.ln());
    let (mut g0, mut g1) = (g(s0)?, g(s1)?);
    if !(g0 > 0.0 && g1 < 0.0) {
        return Err(SolverError::NoBracket {
            low: SHOOT_LOW,
            high: SHOOT_HIGH,
        });
    }
    let mut iterations = 0;
    let mut side = 0i8;
    let s = loop {
        iterations += 1;
        let s = (s0 * g1 - s1 * g0) / (g1 - g0);
        let gs = g(s)?;
        if gs.abs() <= tol || iterations >= 200 {
            break s;
        }
        if gs > 0.0 {
            s0 = s;
            g0 = gs;
            if side == 1 {
                g1 *= 0.5;
            }
            side = 1;
        } else {
            s1 = s;
            g1 = gs;
            if side == -1 {
                g0 *= 0.5;
            }
            side = -1;
        }
    };
    let a = s.exp();
    let traj = integrate(p, a, true)?;
    let scale = traj.zero / radius;
    let c = scale.powf(2.0 / (p - 1.0));
    let tau = std::f64::consts::TAU;
    let end = traj.end;
    Ok(RadialSolution {
        p,
        radius,
        m: a * c,
        r: traj.r.iter().map(|r| r / scale).collect(),
        u: traj.u.iter().map(|u| u * c).collect(),
        du: traj.du.iter().map(|d| d * c * scale).collect(),
        boundary_slope: end[1] * c * scale,
        int_u_p1: tau * c * c * end[2],
        int_grad2: tau * c * c * end[3],
        int_u_p: tau * c * end[4],
        green_center: c * (traj.zero.ln() * end[4] + end[5]),
        iterations,
    })
}

/// Independent estimate of `u(0)` on the unit disk: fixed-step classical
/// Runge–Kutta for `w(0) = 1` at steps `h` and `h/2`, Richardson
/// extrapolation of the first zero `z`, then `M = z^{2/(p−1)}`.
pub fn radial_shoot_fixed_step(p: f64, h: f64) -> Result<f64, SolverError> {
    if !(p > 1.0 && h > 0.0) {
        return Err(SolverError::InvalidParameter(format!(
            "need p > 1 and h > 0, got p = {p}, h = {h}"
        )));
    }
    let z1 = fixed_step_zero(p, h)?;
    let z2 = fixed_step_zero(p, h / 2.0)?;
    let z = (16.0 * z2 - z1) / 15.0;
    Ok(z.powf(2.0 / (p - 1.0)))
}

fn fixed_step_zero(p: f64, h: f64) -> Result<f64, SolverError> {
    let f = |r: f64, y: [f64; 2]| [y[1], -y[1] / r - y[0].max(0.0).powf(p)];
    let mut r = h;
    let mut y = [
        1.0 - h * h / 4.0 + p * h.powi(4) / 64.0,
        -h / 2.0 + p * h.powi(3) / 16.0,
    ];
    let max_steps = (1e4 / h) as usize;
    for _ in 0..max_steps {
        let k1 = f(r, y);
        let k2 = f(
            r + h / 2.0,
            [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]],
        );
        let k3 = f(
            r + h / 2.0,
            [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]],
        );
        let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        let next = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if next[0] <= 0.0 {
            // Root of the cubic Hermite interpolant on [r, r + h].
            let herm = |t: f64| {
                let (t2, t3) = (t * t, t * t * t);
                (2.0 * t3 - 3.0 * t2 + 1.0) * y[0]
                    + (t3 - 2.0 * t2 + t) * h * y[1]
                    + (-2.0 * t3 + 3.0 * t2) * next[0]
                    + (t3 - t2) * h * next[1]
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if herm(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(r + h * 0.5 * (lo + hi));
        }
        y = next;
        r += h;
    }
    Err(SolverError::NotConverged {
        iterations: max_steps,
        residual: y[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_start_matches_ode_residual() {
        let (p, a) = (3.0, 2.0);
        let r = 1e-3;
        let y = series_start(p, a, r);
        assert!((y[0] - a).abs() < 1e-5);
        assert!(y[1] < 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(radial_shoot(0.5, 1e-10).is_err());
        assert!(radial_shoot(3.0, 1e-3).is_err());
    }
}
