//! The three integrals `M_k = int_0^inf (2 pi t)^{-1/2} t^k e^{i Phi(t)} dt`,
//! `k = 0, 1, 3`, over one shared contour.
//!
//! Every propagator value and its energy and momentum derivatives are
//! linear combinations of these, so a single contour and a single
//! subdivision serve all three. The results carry a common factor
//! `e^{-log_scale}`; ratios such as `dG/G` never see it, which is what keeps
//! phase derivatives finite where `|G|` itself underflows.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::halfline::{integrate_halfline_n, ContourMethod, ContourSpec};
use super::steepest::{descent_contour, integrate_moments, CubicPhase};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// `[M_0, M_1, M_3]` multiplied by `e^{-log_scale}`.
    pub m: [Complex64; 3],
    pub err: [f64; 3],
    pub log_scale: f64,
}

/// Evaluates `[M_0, M_1, M_3]` with the method selected in `spec`.
pub fn phase_moments(phase: &CubicPhase, spec: &ContourSpec) -> Result<Moments> {
    spec.validate()?;
    match spec.method {
        ContourMethod::SteepestDescent => {
            let contour = descent_contour(phase)?;
            let est = integrate_moments(phase, &contour, &spec.tolerance())?;
            Ok(Moments { m: est.value, err: est.err, log_scale: contour.log_scale })
        }
        ContourMethod::RotatedRay | ContourMethod::ImaginaryShift => {
            let f = |t: Complex64| {
                let e = phase.exponent(t).exp() / (2.0 * PI * t).sqrt();
                [e, e * t, e * t * t * t]
            };
            let est = integrate_halfline_n(&f, spec)?;
            Ok(Moments { m: est.value, err: est.err, log_scale: 0.0 })
        }
    }
}
