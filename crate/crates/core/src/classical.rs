//! Quasiclassical reference trajectories.
//!
//! Nonrelativistically the electron leaves the barrier at `x_e = Ip/E0`
//! with zero velocity and accelerates towards `+x`. In the crossed field
//! the same sign conventions put the exit at negative `x` and the motion
//! towards `-x`. Each regime keeps its own convention; under the barrier
//! the classical motion is instantaneous.

use crate::error::{Error, Result};

/// Tunnel exit `Ip/E0` in a constant field.
pub fn exit_nonrel(ip: f64, e0: f64) -> f64 {
    ip / e0
}

/// Position `x_e + E0 t^2/2` after leaving the exit at rest.
pub fn traj_nonrel(t: f64, x_e: f64, e0: f64) -> f64 {
    x_e + 0.5 * e0 * t * t
}

/// Arrival time at `x`: zero up to the exit, then the inverted parabola.
pub fn time_nonrel(x: f64, x_e: f64, e0: f64) -> f64 {
    if x <= x_e || e0 == 0.0 {
        0.0
    } else {
        (2.0 * (x - x_e) / e0).sqrt()
    }
}

/// Crossed-field tunnel exit for canonical momentum `pz`, the root of
/// `(c^2 - Ip - x E0)^2 = c^2 (pz - x E0/c)^2 + c^4`.
pub fn exit_rel(pz: f64, ip: f64, e0: f64, c: f64) -> Result<f64> {
    let den = 2.0 * e0 * (c * c - ip - c * pz);
    let scale = 2.0 * e0 * c * c;
    if !(den.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateDenominator(den));
    }
    let x_e = (ip * ip - c * c * (2.0 * ip + pz * pz)) / den;
    let lhs = (c * c - ip - x_e * e0).powi(2);
    let q = pz - x_e * e0 / c;
    let rhs = c * c * q * q + c.powi(4);
    if (lhs - rhs).abs() > 1e-9 * rhs {
        return Err(Error::DegenerateDenominator(den));
    }
    Ok(x_e)
}

/// The exit at the most probable momentum `pz = -2 Ip/(3c)`:
/// `-(Ip/E0)(18 c^2 - 5 Ip)/(18 c^2 - 6 Ip)`.
pub fn exit_rel_most_probable(ip: f64, e0: f64, c: f64) -> f64 {
    let c2 = c * c;
    -(ip / e0) * (18.0 * c2 - 5.0 * ip) / (18.0 * c2 - 6.0 * ip)
}

/// The printed relation between the exit kinetic momentum and the initial
/// coordinate velocity, `c q / sqrt(c^2 + q^2)`.
pub fn vz0_from_qz(qz: f64, c: f64) -> f64 {
    c * qz / (c * c + qz * qz).sqrt()
}

/// Position and four-velocity along a crossed-field trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalStateRel {
    /// Lab time `x^0/c`.
    pub x0_over_c: f64,
    pub x1: f64,
    pub x3: f64,
    pub u0: f64,
    pub u1: f64,
    pub u3: f64,
}

impl ClassicalStateRel {
    /// `u.u`, equal to `c^2` on every physical trajectory.
    pub fn norm(&self) -> f64 {
        self.u0 * self.u0 - self.u1 * self.u1 - self.u3 * self.u3
    }

    fn axpy(&self, h: f64, d: &ClassicalStateRel) -> ClassicalStateRel {
        ClassicalStateRel {
            x0_over_c: self.x0_over_c + h * d.x0_over_c,
            x1: self.x1 + h * d.x1,
            x3: self.x3 + h * d.x3,
            u0: self.u0 + h * d.u0,
            u1: self.u1 + h * d.u1,
            u3: self.u3 + h * d.u3,
        }
    }

    fn as_array(&self) -> [f64; 6] {
        [self.x0_over_c, self.x1, self.x3, self.u0, self.u1, self.u3]
    }
}

/// Closed-form proper-time solution starting at `(0, x_e, 0)` with
/// four-velocity `(sqrt(c^2 + vz0^2), 0, vz0)`. `vz0` is therefore the
/// proper velocity `dz/dtau`.
pub fn traj_rel_proper(tau: f64, vz0: f64, x_e: f64, e0: f64, c: f64) -> ClassicalStateRel {
    let g = (c * c + vz0 * vz0).sqrt();
    // u0 - u3 is conserved; writing it as c^2/(g + vz0) avoids cancellation
    let lambda = if vz0 > 0.0 { c * c / (g + vz0) } else { g - vz0 };
    let a = e0 * e0 * tau * tau * lambda / (2.0 * c * c);
    ClassicalStateRel {
        x0_over_c: tau * g / c + e0 * e0 * tau.powi(3) * lambda / (6.0 * c.powi(3)),
        x1: x_e - e0 * tau * tau * lambda / (2.0 * c),
        x3: vz0 * tau + e0 * e0 * tau.powi(3) * lambda / (6.0 * c * c),
        u0: g + a,
        u1: -e0 * tau * lambda / c,
        u3: vz0 + a,
    }
}

/// Proper time at which the closed-form trajectory reaches lab time `t`.
pub fn proper_time_at(t: f64, vz0: f64, x_e: f64, e0: f64, c: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InversionFailure(format!("lab time must be non-negative, got {t}")));
    }
    let g = (c * c + vz0 * vz0).sqrt();
    let f = |tau: f64| traj_rel_proper(tau, vz0, x_e, e0, c).x0_over_c - t;
    // x0/c >= tau g/c, so the root is below t c/g
    let (mut lo, mut hi) = (0.0, t * c / g);
    if f(hi) < 0.0 {
        return Err(Error::InversionFailure(format!("root not bracketed for t = {t}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    // Newton polish with d(x0/c)/dtau = u0/c
    let mut tau = 0.5 * (lo + hi);
    for _ in 0..3 {
        let s = traj_rel_proper(tau, vz0, x_e, e0, c);
        let step = (s.x0_over_c - t) / (s.u0 / c);
        if step.is_finite() {
            tau -= step;
        }
    }
    Ok(tau.max(0.0))
}

/// `(x^1, x^3)` at lab time `t`.
pub fn traj_rel_lab(t: f64, vz0: f64, x_e: f64, e0: f64, c: f64) -> Result<(f64, f64)> {
    let tau = proper_time_at(t, vz0, x_e, e0, c)?;
    let s = traj_rel_proper(tau, vz0, x_e, e0, c);
    Ok((s.x1, s.x3))
}

/// Lab time and `z` when the trajectory passes `x`. Between the entry and
/// the exit both are zero.
pub fn arrival_rel(x: f64, vz0: f64, x_e: f64, e0: f64, c: f64) -> (f64, f64) {
    // the motion is towards -x: beyond the exit means x < x_e
    if x >= x_e || e0 == 0.0 {
        return (0.0, 0.0);
    }
    let g = (c * c + vz0 * vz0).sqrt();
    let lambda = if vz0 > 0.0 { c * c / (g + vz0) } else { g - vz0 };
    let tau = (2.0 * c * (x_e - x) / (e0 * lambda)).sqrt();
    let s = traj_rel_proper(tau, vz0, x_e, e0, c);
    (s.x0_over_c, s.x3)
}

/// Right-hand side of the proper-time Lorentz equation in the crossed field
/// (`E` along `x`, `B` along `y`, both `E0`), with the charge sign of the
/// closed-form solution.
pub fn lorentz_ode_step(s: &ClassicalStateRel, e0: f64, c: f64) -> ClassicalStateRel {
    let k = e0 / c;
    ClassicalStateRel { x0_over_c: s.u0 / c, x1: s.u1, x3: s.u3, u0: -k * s.u1, u1: -k * (s.u0 - s.u3), u3: -k * s.u1 }
}

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrates the Lorentz equation from `start` over proper time `[0, tau_end]`
/// with an adaptive Dormand-Prince 5(4) scheme. Returns the accepted states
/// with their proper times.
pub fn integrate_lorentz(
    start: ClassicalStateRel,
    tau_end: f64,
    e0: f64,
    c: f64,
    rtol: f64,
) -> Vec<(f64, ClassicalStateRel)> {
    let mut out = vec![(0.0, start)];
    if tau_end <= 0.0 {
        return out;
    }
    let mut tau = 0.0;
    let mut y = start;
    let mut h = tau_end * 1e-3;
    while tau < tau_end {
        h = h.min(tau_end - tau);
        let mut k = [y; 7];
        k[0] = lorentz_ode_step(&y, e0, c);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys = ys.axpy(h * A[s - 1][j], kj);
            }
            k[s] = lorentz_ode_step(&ys, e0, c);
        }
        let mut y5 = y;
        let mut y4 = y;
        for j in 0..7 {
            y5 = y5.axpy(h * B5[j], &k[j]);
            y4 = y4.axpy(h * B4[j], &k[j]);
        }
        let scale: Vec<f64> = y.as_array().iter().zip(y5.as_array()).map(|(a, b)| a.abs().max(b.abs())).collect();
        let floor = c * 1e-3;
        let err = y5
            .as_array()
            .iter()
            .zip(y4.as_array())
            .zip(&scale)
            .map(|((a, b), s)| (a - b).abs() / (rtol * s.max(floor)))
            .fold(0.0, f64::max);
        if err <= 1.0 {
            tau += h;
            y = y5;
            out.push((tau, y));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    out
}
