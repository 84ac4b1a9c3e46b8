//! Nonrelativistic propagator of an electron in a constant electric field
//! (length gauge, `H = p^2/2 - E0 x`) and its fixed-energy transform.
//!
//! The spacetime kernel is exact because the action is quadratic:
//!
//! ```text
//! K(x, 0; t) = (2 pi i t)^{-1/2} exp(i x^2/(2t) + i E0 t x/2 - i E0^2 t^3/24)
//! ```
//!
//! and the fixed-energy propagator is the resolvent
//! `G(x, 0; eps) = (eps - H + i0)^{-1}(x, 0) = -i int_0^inf e^{i eps t} K dt`.
//! The source sits at the origin, which is also the tunnel entry point.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{phase_moments, ComplexValue, ContourSpec, CubicPhase};
use crate::special::airy;

/// A point of the spacetime kernel; `t` may be complex on a deformed contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPointNR {
    pub x: f64,
    pub t: Complex64,
    pub e0: f64,
}

/// A Green function and its derivatives, all multiplied by `e^{-log_scale}`.
///
/// Phase derivatives only need ratios, which are independent of the common
/// scale, so they stay finite deep under the barrier where `|G|` underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledGreen {
    pub log_scale: f64,
    pub g: ComplexValue,
    pub d_eps: ComplexValue,
    /// Only for the relativistic propagator.
    pub d_pz: Option<ComplexValue>,
}

impl ScaledGreen {
    /// `ln |G|`, finite even when `|G|` itself is not representable.
    pub fn ln_abs(&self) -> f64 {
        self.g.value.norm().ln() + self.log_scale
    }

    /// The unscaled value of `G`.
    pub fn value(&self) -> ComplexValue {
        let s = self.log_scale.exp();
        ComplexValue::new(self.g.value * s, self.g.err_abs * s)
    }

    /// Multiplies every component by the same constant, as a change of the
    /// propagator's overall phase convention would.
    pub fn rotated(&self, factor: Complex64) -> ScaledGreen {
        let m = |v: ComplexValue| ComplexValue::new(v.value * factor, v.err_abs * factor.norm());
        ScaledGreen { log_scale: self.log_scale, g: m(self.g), d_eps: m(self.d_eps), d_pz: self.d_pz.map(m) }
    }
}

/// The kernel `K(x, 0; t)`. The square root is taken as
/// `e^{-i pi/4} (2 pi t)^{-1/2}` with the principal branch of `t^{1/2}`,
/// which is continuous on every contour that avoids the negative real axis.
pub fn kernel_nr(p: KernelPointNR) -> ComplexValue {
    let t = p.t;
    let i = Complex64::i();
    let arg = i * (p.x * p.x / (2.0 * t) + 0.5 * p.e0 * p.x * t - p.e0 * p.e0 * t * t * t / 24.0);
    let pref = Complex64::from_polar(1.0, -FRAC_PI_4) / (2.0 * PI * t).sqrt();
    ComplexValue::exact(pref * arg.exp())
}

/// Exponent `e^{i eps t} K` written as `i (A/t + B t - C t^3)`.
pub fn phase_nr(x: f64, eps: f64, e0: f64) -> CubicPhase {
    CubicPhase::new(0.5 * x * x, eps + 0.5 * e0 * x, e0 * e0 / 24.0)
}

fn check_inputs(x: f64, eps: f64, e0: f64) -> Result<()> {
    if !(x.is_finite() && eps.is_finite() && e0.is_finite()) {
        return Err(Error::Domain(format!("non-finite input x = {x}, eps = {eps}, E0 = {e0}")));
    }
    if e0 < 0.0 {
        return Err(Error::Domain(format!("field must be non-negative, got {e0}")));
    }
    Ok(())
}

/// `G` and `dG/deps` from one contour.
pub fn green_nr_scaled(x: f64, eps: f64, e0: f64, contour: &ContourSpec) -> Result<ScaledGreen> {
    check_inputs(x, eps, e0)?;
    let m = phase_moments(&phase_nr(x, eps, e0), contour)?;
    // -i e^{-i pi/4} = e^{-3i pi/4}
    let pref = Complex64::from_polar(1.0, -3.0 * FRAC_PI_4);
    let g = ComplexValue::new(pref * m.m[0], m.err[0]);
    // d/deps brings down i t
    let d_eps = ComplexValue::new(pref * Complex64::i() * m.m[1], m.err[1]);
    Ok(ScaledGreen { log_scale: m.log_scale, g, d_eps, d_pz: None })
}

/// The fixed-energy propagator `G(x, 0; eps)`.
pub fn green_nr(x: f64, eps: f64, e0: f64, contour: &ContourSpec) -> Result<ComplexValue> {
    Ok(green_nr_scaled(x, eps, e0, contour)?.value())
}

/// `dG/deps`, from differentiating under the integral.
pub fn dgreen_deps_nr(x: f64, eps: f64, e0: f64, contour: &ContourSpec) -> Result<ComplexValue> {
    let s = green_nr_scaled(x, eps, e0, contour)?;
    let f = s.log_scale.exp();
    Ok(ComplexValue::new(s.d_eps.value * f, s.d_eps.err_abs * f))
}

/// Closed-form Green function and derivatives in terms of Airy functions,
/// all multiplied by `e^{-log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryGreen {
    pub log_scale: f64,
    pub g: Complex64,
    pub d_eps: Complex64,
    /// `dG/dx`, the derivative from the right at `x = 0`.
    pub d_x: Complex64,
}

impl AiryGreen {
    pub fn value(&self) -> Complex64 {
        self.g * self.log_scale.exp()
    }
}

/// `G` of `H = p^2/2 - E0 x` from Airy functions.
///
/// With `s = (2 E0)^{1/3}` and `xi(y) = -s (y + eps/E0)` the solution regular
/// on the barrier side is `Ai(xi)` and the outgoing one is `Ai(xi) - i Bi(xi)`.
/// Their Wronskian fixes the jump `dG/dx(0+) - dG/dx(0-) = 2`:
///
/// ```text
/// G(x, 0) = -(2 pi i / s) Ai(xi(min(x, 0))) (Ai - i Bi)(xi(max(x, 0)))
/// ```
pub fn airy_green_nr(x: f64, eps: f64, e0: f64) -> Result<AiryGreen> {
    check_inputs(x, eps, e0)?;
    if e0 <= 0.0 {
        return Err(Error::Domain("the Airy form needs a positive field".into()));
    }
    let s = (2.0 * e0).cbrt();
    let xi = |y: f64| -s * (y + eps / e0);
    let (lo, hi) = if x < 0.0 { (x, 0.0) } else { (0.0, x) };
    let a = airy(xi(lo));
    let b = airy(xi(hi));
    // Ai(xi_lo) = a.ai e^{-za}; (Ai - i Bi)(xi_hi) = e^{zb} (b.ai e^{-2 zb} - i b.bi)
    let w = (-2.0 * b.zeta).exp();
    let out = Complex64::new(b.ai * w, -b.bi);
    let out_p = Complex64::new(b.aip * w, -b.bip);
    let pref = Complex64::new(0.0, -2.0 * PI / s);
    let g = pref * a.ai * out;
    // d xi / d eps = -s / E0 for both factors
    let d_eps = pref * (-s / e0) * (a.aip * out + a.ai * out_p);
    // only the factor at x moves with x, d xi / dx = -s
    let d_x = if x < 0.0 { pref * (-s) * a.aip * out } else { pref * (-s) * a.ai * out_p };
    Ok(AiryGreen { log_scale: b.zeta - a.zeta, g, d_eps, d_x })
}

/// The Airy form of `G` as an unscaled value; exact up to rounding.
pub fn green_nr_airy_oracle(x: f64, eps: f64, e0: f64) -> Result<ComplexValue> {
    let a = airy_green_nr(x, eps, e0)?;
    Ok(ComplexValue::new(a.value(), 1e-14 * a.value().norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm()
    }

    #[test]
    fn free_kernel_value() {
        let k = kernel_nr(KernelPointNR { x: 1.0, t: 1.0.into(), e0: 0.0 });
        assert!(close(k.value, Complex64::new(0.38280491754448324, -0.11231802257721920), 1e-15));
    }

    #[test]
    fn kernel_at_the_source() {
        let e0 = 1.0 / 7.0;
        let k = kernel_nr(KernelPointNR { x: 0.0, t: 1.0.into(), e0 });
        assert!(close(k.value, Complex64::new(0.28185481329085743, -0.28233456628027542), 1e-15));
    }

    #[test]
    fn semigroup_property() {
        // int K(x, y; t1) K(y, 0; t2) dy = K(x, 0; t1 + t2) for the free kernel;
        // t slightly below the real axis makes the y integral converge
        let (t1, t2) = (Complex64::new(0.7, -0.2), Complex64::new(1.1, -0.3));
        let x = 0.8;
        let n = 40000;
        let (lo, hi) = (-25.0, 25.0);
        let h = (hi - lo) / n as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let y = lo + k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            let a = kernel_nr(KernelPointNR { x: x - y, t: t1, e0: 0.0 }).value;
            let b = kernel_nr(KernelPointNR { x: y, t: t2, e0: 0.0 }).value;
            sum += w * h * a * b;
        }
        let direct = kernel_nr(KernelPointNR { x, t: t1 + t2, e0: 0.0 }).value;
        assert!(close(sum, direct, 1e-10), "{sum} vs {direct}");
    }

    #[test]
    fn free_bound_green_function() {
        let spec = ContourSpec::default();
        let g = green_nr(2.0, -0.5, 0.0, &spec).unwrap();
        assert!(close(g.value, Complex64::new(-(-2.0f64).exp(), 0.0), 1e-12));
        let d = dgreen_deps_nr(2.0, -0.5, 0.0, &spec).unwrap();
        assert!(close(d.value, Complex64::new(-3.0 * (-2.0f64).exp(), 0.0), 1e-12));
    }

    #[test]
    fn free_outgoing_green_function() {
        let spec = ContourSpec::default();
        let g = green_nr(0.0, 0.5, 0.0, &spec).unwrap();
        assert!(close(g.value, Complex64::new(0.0, -1.0), 1e-12));
        let d = dgreen_deps_nr(0.0, 0.5, 0.0, &spec).unwrap();
        assert!(close(d.value, Complex64::new(0.0, 1.0), 1e-12));
    }

    // (x, eps, G, dG/deps) at E0 = 1/7, Airy form in mpmath at 40 digits
    const AIRY_REFERENCE: [(f64, f64, [f64; 4]); 5] = [
        (1.0, -0.5, [-0.45195195196400671, -0.012100723128608252, -1.1183618537966565, -0.16844439387177357]),
        (3.0, -0.5, [-0.15833584238840582, -0.056104323266182474, -0.71344558177083666, -0.64813604716304514]),
        (-1.0, -0.5, [-0.33020247566877973, -0.0014529000330189067, -0.64256248216939532, -0.022844437021477115]),
        (0.0, -0.5, [-1.0161589557198362, -0.0044711275326679737, -1.1100749068960051, -0.066484747840499096]),
        (0.3, -0.25, [-1.2527895892808084, -0.15311345401924237, -2.7683734693847168, -1.6890900227618709]),
    ];

    #[test]
    fn airy_form_matches_reference() {
        for &(x, eps, v) in &AIRY_REFERENCE {
            let a = airy_green_nr(x, eps, 1.0 / 7.0).unwrap();
            let s = a.log_scale.exp();
            assert!(close(a.g * s, Complex64::new(v[0], v[1]), 1e-12), "x = {x}");
            assert!(close(a.d_eps * s, Complex64::new(v[2], v[3]), 1e-12), "x = {x}");
        }
    }

    #[test]
    fn quadrature_matches_reference() {
        let spec = ContourSpec::default();
        for &(x, eps, v) in &AIRY_REFERENCE {
            let s = green_nr_scaled(x, eps, 1.0 / 7.0, &spec).unwrap();
            let f = s.log_scale.exp();
            assert!(close(s.g.value * f, Complex64::new(v[0], v[1]), 1e-10), "x = {x}");
            assert!(close(s.d_eps.value * f, Complex64::new(v[2], v[3]), 1e-10), "x = {x}");
        }
    }

    #[test]
    fn remote_phase_slopes() {
        // Im(dG/G) at remote points, mpmath at 40 digits
        let spec = ContourSpec::default();
        for &(x, e0, want) in &[
            (70.0, 1.0 / 7.0, 30.512349343582393),
            (35.0, 1.0 / 7.0, 21.000367289031614),
            (10.0, 1.0, 4.3592953369851621),
            (-3.0, 1.0 / 7.0, 0.060619644791682123),
        ] {
            let s = green_nr_scaled(x, -0.5, e0, &spec).unwrap();
            let slope = (s.d_eps.value / s.g.value).im;
            assert!((slope - want).abs() < 1e-9 * want.abs().max(1.0), "x = {x}: {slope}");
        }
    }

    #[test]
    fn turning_point_matches_airy_form() {
        for (eps, e0) in [(-0.5, 1.0 / 7.0), (-0.5, 1.0), (-3.0, 0.2), (-0.01, 2.0)] {
            let x = -eps / e0;
            for x in [x, x * (1.0 + 1e-9), x * (1.0 - 1e-9)] {
                let s = green_nr_scaled(x, eps, e0, &ContourSpec::default()).unwrap();
                let a = airy_green_nr(x, eps, e0).unwrap();
                let r = s.g.value.ln() + s.log_scale - a.g.ln() - a.log_scale;
                let r = Complex64::new(r.re, (r.im + PI).rem_euclid(2.0 * PI) - PI);
                assert!(r.norm() < 1e-9, "eps {eps}, E {e0}: {r}");
            }
        }
    }

    #[test]
    fn jump_condition() {
        for &(eps, e0) in &[(-0.5, 1.0 / 7.0), (-0.5, 1.0), (0.3, 0.2)] {
            let right = airy_green_nr(0.0, eps, e0).unwrap();
            let left = airy_green_nr(-1e-300, eps, e0).unwrap();
            let jump = right.d_x * right.log_scale.exp() - left.d_x * left.log_scale.exp();
            assert!((jump - 2.0).norm() < 1e-12, "{jump}");
        }
    }

    #[test]
    fn weak_field_limit() {
        let a = airy_green_nr(2.0, -0.5, 1e-4).unwrap();
        assert!(close(a.value(), Complex64::new(-(-2.0f64).exp(), 0.0), 1e-3));
    }

    #[test]
    fn schroedinger_residual() {
        // (eps - H) G = eps G + G''/2 + E0 x G = 0 away from the source; G'' from
        // an 8th-order stencil on the analytic dG/dx
        let (eps, e0) = (-0.5, 1.0 / 7.0);
        let h = 1e-3;
        let c = [1.0 / 280.0, -4.0 / 105.0, 1.0 / 5.0, -4.0 / 5.0];
        for k in 1..40 {
            let x = -4.0 + 0.25 * k as f64;
            if x.abs() < 0.05 {
                continue;
            }
            let dx = |y: f64| airy_green_nr(y, eps, e0).map(|a| a.d_x * a.log_scale.exp()).unwrap();
            let mut d2 = Complex64::new(0.0, 0.0);
            for (j, &w) in c.iter().enumerate() {
                let m = (4 - j) as f64;
                d2 += w * (dx(x - m * h) - dx(x + m * h));
            }
            let d2 = d2 / h;
            let g = airy_green_nr(x, eps, e0).unwrap().value();
            let residual = eps * g + 0.5 * d2 + e0 * x * g;
            assert!(residual.norm() < 1e-10, "x = {x}: {residual}");
        }
    }

    #[test]
    fn field_free_phase_is_flat_under_the_barrier() {
        let spec = ContourSpec::default();
        let slope = |x: f64| {
            let s = green_nr_scaled(x, -0.5, 0.0, &spec).unwrap();
            (s.d_eps.value / s.g.value).im
        };
        let s0 = slope(0.0);
        for x in [0.5, 2.0, 7.0, 20.0] {
            assert!((slope(x) - s0).abs() < 1e-9);
        }
    }
}
