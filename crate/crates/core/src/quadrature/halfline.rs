//! Half-line integrals `int_0^inf f(t) dt` of analytic, oscillatory
//! integrands by rotating the integration ray into the sector where the
//! integrand decays.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauss_kronrod::{self, Estimate, Tolerance};
use crate::error::{Error, Result};

/// How a propagator integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourMethod {
    /// Polyline through the relevant saddle points along the paths of
    /// steepest descent of the exponent.
    SteepestDescent,
    /// Straight ray `t = r e^{-+i delta}` from the origin.
    RotatedRay,
    /// Real axis with the energy shifted to `eps + i eta`.
    ImaginaryShift,
}

/// Direction in which the ray is rotated away from the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationSense {
    /// `t -> t e^{-i delta}`: integrands such as `e^{i eps t}` with `eps < 0`.
    Clockwise,
    /// `t -> t e^{+i delta}`.
    Counterclockwise,
    /// Probe the integrand far out along both rays and keep the decaying one.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourSpec {
    pub method: ContourMethod,
    /// Rotation angle of the ray in radians, `0 < delta < pi/2`.
    pub rotation_angle: f64,
    pub sense: RotationSense,
    /// End of the first panel, where `t = u^2` removes a `t^{-1/2}` endpoint singularity.
    pub t_split: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Imaginary energy shift for [`ContourMethod::ImaginaryShift`].
    pub eta: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            method: ContourMethod::SteepestDescent,
            rotation_angle: std::f64::consts::FRAC_PI_6,
            sense: RotationSense::Auto,
            t_split: 1.0,
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            eta: 1e-3,
        }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidContour(what.to_string()));
        if !(self.rotation_angle > 0.0 && self.rotation_angle < FRAC_PI_2) {
            return bad("rotation_angle must lie in (0, pi/2)");
        }
        if !(self.t_split > 0.0 && self.t_split.is_finite()) {
            return bad("t_split must be positive");
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_subdivisions == 0 {
            return bad("max_subdivisions must be at least 1");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta must be positive");
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.abs_tol, rel: self.rel_tol, max_subdivisions: self.max_subdivisions }
    }
}

/// A complex number with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub value: Complex64,
    pub err_abs: f64,
}

impl ComplexValue {
    pub fn new(value: Complex64, err_abs: f64) -> Self {
        ComplexValue { value, err_abs }
    }

    pub fn exact(value: Complex64) -> Self {
        ComplexValue { value, err_abs: 0.0 }
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }
}

const MAX_TAIL_PANELS: usize = 80;

fn ray_direction<const N: usize, F>(f: &F, spec: &ContourSpec) -> Complex64
where
    F: Fn(Complex64) -> [Complex64; N],
{
    let cw = Complex64::from_polar(1.0, -spec.rotation_angle);
    let ccw = Complex64::from_polar(1.0, spec.rotation_angle);
    match spec.sense {
        RotationSense::Clockwise => cw,
        RotationSense::Counterclockwise => ccw,
        RotationSense::Auto => {
            let size = |w: Complex64| {
                [8.0, 32.0, 128.0]
                    .iter()
                    .map(|&m| {
                        let v = f(w * (m * spec.t_split));
                        v.iter().map(|z| z.norm()).fold(0.0, f64::max)
                    })
                    .map(|s| if s.is_finite() { s } else { f64::INFINITY })
                    .fold(0.0, f64::max)
            };
            if size(ccw) < size(cw) {
                ccw
            } else {
                cw
            }
        }
    }
}

/// Vector-valued version of [`integrate_halfline`]: all components share
/// the ray and the panel subdivision.
pub fn integrate_halfline_n<const N: usize, F>(f: &F, spec: &ContourSpec) -> Result<Estimate<N>>
where
    F: Fn(Complex64) -> [Complex64; N],
{
    spec.validate()?;
    let tol = spec.tolerance();
    let (w, damping) = match spec.method {
        ContourMethod::ImaginaryShift => (Complex64::new(1.0, 0.0), spec.eta),
        _ => (ray_direction(f, spec), 0.0),
    };
    let g = |t: Complex64| {
        let mut v = f(t);
        if damping > 0.0 {
            let d = (-damping * t.re).exp();
            for z in v.iter_mut() {
                *z *= d;
            }
        }
        v
    };

    // first panel: t = w u^2
    let u_max = spec.t_split.sqrt();
    let head = |u: f64| {
        let mut v = g(w * (u * u));
        let jac = w * (2.0 * u);
        for z in v.iter_mut() {
            *z *= jac;
        }
        v
    };
    let mut total = gauss_kronrod::integrate(&head, 0.0, u_max, &tol)?;

    // tail: panels of doubling length until the envelope is negligible
    let panel_tol = Tolerance { abs: 0.1 * tol.abs, ..tol };
    let along = |s: f64| {
        let mut v = g(w * s);
        for z in v.iter_mut() {
            *z *= w;
        }
        v
    };
    let envelope = |s: f64| g(w * s).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut lo = spec.t_split;
    let mut len = spec.t_split;
    for _ in 0..MAX_TAIL_PANELS {
        let hi = lo + len;
        let est = gauss_kronrod::integrate(&along, lo, hi, &panel_tol)?;
        total.accumulate(&est);
        // remainder bounded by envelope * decay length, with the decay length
        // taken as the distance travelled so far (or 1/eta on the real axis)
        let reach = if damping > 0.0 { hi.min(1.0 / damping) } else { hi };
        let bound = envelope(hi).max(envelope(0.5 * (lo + hi))) * reach;
        if !bound.is_finite() {
            return Err(Error::SingularIntegrand { re: (w * hi).re, im: (w * hi).im });
        }
        if bound < 1e-2 * tol.abs && (damping == 0.0 || hi * damping > 40.0) {
            for e in total.err.iter_mut() {
                *e += bound;
            }
            return Ok(total);
        }
        lo = hi;
        len *= 2.0;
    }
    let worst = total.err.iter().cloned().fold(0.0, f64::max);
    Err(Error::NonConvergence { subdivisions: MAX_TAIL_PANELS, err: worst })
}

/// Evaluates `int_0^inf f(t) dt` for an integrand analytic in the sector
/// swept by the rotation. A `t^{-1/2}` singularity at the origin is allowed.
///
/// With [`ContourMethod::ImaginaryShift`] the integral is taken along the
/// real axis with an extra factor `e^{-eta t}`, which is the shift
/// `eps -> eps + i eta` for integrands carrying `e^{i eps t}`.
pub fn integrate_halfline<F>(f: F, spec: &ContourSpec) -> Result<ComplexValue>
where
    F: Fn(Complex64) -> Complex64,
{
    let est = integrate_halfline_n(&|t| [f(t)], spec)?;
    Ok(ComplexValue::new(est.value[0], est.err[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ray() -> ContourSpec {
        ContourSpec { method: ContourMethod::RotatedRay, ..ContourSpec::default() }
    }

    #[test]
    fn unit_exponential() {
        let v = integrate_halfline(|t| (-t).exp(), &ray()).unwrap();
        assert!((v.value - 1.0).norm() < 1e-12);
        assert!(v.err_abs >= 0.0 && v.err_abs.is_finite());
    }

    #[test]
    fn gamma_one_half() {
        let v = integrate_halfline(|t| (-t).exp() / t.sqrt(), &ray()).unwrap();
        assert!((v.value - PI.sqrt()).norm() < 1e-11);
    }

    #[test]
    fn oscillatory_inverse_sqrt() {
        let v = integrate_halfline(|t| (Complex64::i() * t).exp() / t.sqrt(), &ray()).unwrap();
        // sqrt(pi) e^{i pi/4}
        let expected = Complex64::from_polar(PI.sqrt(), PI / 4.0);
        assert!((v.value - expected).norm() < 1e-11, "{v:?}");
    }

    #[test]
    fn clockwise_ray_picks_lower_half_plane() {
        let spec = ContourSpec { sense: RotationSense::Clockwise, ..ray() };
        let v = integrate_halfline(|t| (-Complex64::i() * t).exp() / t.sqrt(), &spec).unwrap();
        let expected = Complex64::from_polar(PI.sqrt(), -PI / 4.0);
        assert!((v.value - expected).norm() < 1e-11);
    }

    #[test]
    fn imaginary_shift_is_order_eta() {
        let spec = ContourSpec { method: ContourMethod::ImaginaryShift, eta: 1e-3, ..ContourSpec::default() };
        let spec = ContourSpec { max_subdivisions: 20000, ..spec };
        let v = integrate_halfline(|t| (-(1.0 - Complex64::i()) * t).exp(), &spec).unwrap();
        // int e^{-(1 - i + eta) t} = 1 / (1 + eta - i)
        let expected = 1.0 / Complex64::new(1.0 + 1e-3, -1.0);
        assert!((v.value - expected).norm() < 1e-10);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for spec in [
            ContourSpec { rotation_angle: 0.0, ..ray() },
            ContourSpec { rotation_angle: 2.0, ..ray() },
            ContourSpec { rel_tol: 0.0, ..ray() },
            ContourSpec { t_split: -1.0, ..ray() },
        ] {
            assert!(matches!(spec.validate(), Err(Error::InvalidContour(_))));
        }
    }

    #[test]
    fn growing_integrand_does_not_converge() {
        let spec = ContourSpec { sense: RotationSense::Clockwise, ..ray() };
        // e^{t} grows on every ray near the real axis
        let r = integrate_halfline(|t| t.exp(), &spec);
        assert!(r.is_err());
    }
}
