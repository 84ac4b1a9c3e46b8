//! Relativistic propagator in a constant crossed field at fixed energy and
//! fixed transversal momenta.
//!
//! The field points along `x`, the wave vector along `z` and the magnetic
//! field along `y`, all of strength `E0`. After the transversal Fourier
//! transforms the proper-time representation reduces to one integral,
//!
//! ```text
//! G = -e^{3 i pi/4}/(2c) int_0^inf (2 pi tau)^{-1/2} e^{i (A/tau + B tau - C tau^3)} dtau
//! A = x^2/2
//! B = -(c^2 + py^2 + pz^2)/2 + (c E0 pz x + eps (eps - E0 x))/(2 c^2)
//! C = E0^2 (eps - c pz)^2 / (24 c^4)
//! ```
//!
//! which has exactly the structure of the nonrelativistic fixed-energy
//! integral and is evaluated with the same contours.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::propagator_nr::{airy_green_nr, ScaledGreen};
use crate::quadrature::{phase_moments, ComplexValue, ContourSpec, CubicPhase};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelPropArgs {
    /// Position along the polarization.
    pub x: f64,
    /// Energy including the rest energy.
    pub eps: f64,
    /// Canonical momentum along the propagation direction.
    pub pz: f64,
    /// Momentum along the magnetic field; zero for the most probable path.
    pub py: f64,
    pub e0: f64,
    pub c: f64,
}

impl RelPropArgs {
    pub fn new(x: f64, eps: f64, pz: f64, e0: f64, c: f64) -> Self {
        RelPropArgs { x, eps, pz, py: 0.0, e0, c }
    }

    fn check(&self) -> Result<()> {
        let all = [self.x, self.eps, self.pz, self.py, self.e0, self.c];
        if all.iter().any(|v| !v.is_finite()) || self.c <= 0.0 || self.e0 < 0.0 {
            return Err(Error::Domain(format!("invalid propagator arguments {self:?}")));
        }
        Ok(())
    }
}

/// `-e^{3 i pi/4}/(2c)`, equal to `e^{-i pi/4}/(2c)`.
fn prefactor(c: f64) -> Complex64 {
    Complex64::from_polar(0.5 / c, -FRAC_PI_4)
}

/// Coefficients of the exponent. The rest energies cancel in `B`; it is
/// evaluated as `(eps/c - c)(eps/c + c)/2` to keep the digits.
pub fn phase_rel(a: &RelPropArgs) -> CubicPhase {
    let c = a.c;
    let r = a.eps / c;
    let lin =
        0.5 * (r - c) * (r + c) - 0.5 * (a.py * a.py + a.pz * a.pz) + a.e0 * a.x * (c * a.pz - a.eps) / (2.0 * c * c);
    let w = a.eps - c * a.pz;
    let cub = a.e0 * a.e0 * w * w / (24.0 * c * c * c * c);
    CubicPhase::new(0.5 * a.x * a.x, lin, cub)
}

/// The full integrand at complex proper time `tau`.
pub fn integrand_rel(tau: Complex64, a: &RelPropArgs) -> ComplexValue {
    let ph = phase_rel(a);
    let v = prefactor(a.c) * ph.exponent(tau).exp() / (2.0 * std::f64::consts::PI * tau).sqrt();
    ComplexValue::exact(v)
}

/// `G`, `dG/deps` and `dG/dpz` from one contour, with a common scale factor.
pub fn green_rel_scaled(a: &RelPropArgs, contour: &ContourSpec) -> Result<ScaledGreen> {
    a.check()?;
    let m = phase_moments(&phase_rel(a), contour)?;
    let c = a.c;
    let p = prefactor(c);
    let ip = p * Complex64::i();
    let w = a.eps - c * a.pz;
    let e2 = a.e0 * a.e0;
    // d(phase)/d eps = tau (2 eps - E0 x)/(2c^2) - tau^3 E0^2 (eps - c pz)/(12 c^4)
    let (e1, e3) = ((2.0 * a.eps - a.e0 * a.x) / (2.0 * c * c), -e2 * w / (12.0 * c * c * c * c));
    // d(phase)/d pz = tau (-pz + E0 x/(2c)) + tau^3 E0^2 (eps - c pz)/(12 c^3)
    let (p1, p3) = (-a.pz + a.e0 * a.x / (2.0 * c), e2 * w / (12.0 * c * c * c));
    let combo = |k1: f64, k3: f64| {
        ComplexValue::new(ip * (k1 * m.m[1] + k3 * m.m[2]), p.norm() * (k1.abs() * m.err[1] + k3.abs() * m.err[2]))
    };
    Ok(ScaledGreen {
        log_scale: m.log_scale,
        g: ComplexValue::new(p * m.m[0], p.norm() * m.err[0]),
        d_eps: combo(e1, e3),
        d_pz: Some(combo(p1, p3)),
    })
}

fn unscale(v: ComplexValue, log_scale: f64) -> ComplexValue {
    let s = log_scale.exp();
    ComplexValue::new(v.value * s, v.err_abs * s)
}

pub fn green_rel(a: &RelPropArgs, contour: &ContourSpec) -> Result<ComplexValue> {
    Ok(green_rel_scaled(a, contour)?.value())
}

pub fn dgreen_deps_rel(a: &RelPropArgs, contour: &ContourSpec) -> Result<ComplexValue> {
    let s = green_rel_scaled(a, contour)?;
    Ok(unscale(s.d_eps, s.log_scale))
}

pub fn dgreen_dpz_rel(a: &RelPropArgs, contour: &ContourSpec) -> Result<ComplexValue> {
    let s = green_rel_scaled(a, contour)?;
    Ok(unscale(s.d_pz.expect("relativistic propagator carries d/dpz"), s.log_scale))
}

/// Closed form of the proper-time integral in Airy functions, returned as
/// `(value e^{-log_scale}, log_scale)`.
///
/// The exponent is that of the nonrelativistic fixed-energy integral with
/// field `E' = sqrt(24 C)`, position `|x|` and energy `B - E'|x|/2`, and the
/// prefactors differ by `i/(2c)`. Needs `E0 > 0` and `eps != c pz`.
pub fn airy_green_rel(a: &RelPropArgs) -> Result<(Complex64, f64)> {
    a.check()?;
    let ph = phase_rel(a);
    let field = (24.0 * ph.cub).sqrt();
    if field <= 0.0 {
        return Err(Error::Domain("the Airy form needs a nonzero cubic term".into()));
    }
    let x = a.x.abs();
    let nr = airy_green_nr(x, ph.lin - 0.5 * field * x, field)?;
    Ok((Complex64::new(0.0, 0.5 / a.c) * nr.g, nr.log_scale))
}

pub fn green_rel_airy_oracle(a: &RelPropArgs) -> Result<ComplexValue> {
    let (g, s) = airy_green_rel(a)?;
    let v = g * s.exp();
    Ok(ComplexValue::new(v, 1e-14 * v.norm()))
}
