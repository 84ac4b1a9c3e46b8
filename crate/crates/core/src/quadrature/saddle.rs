//! Leading-order saddle-point approximation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `A(t*) sqrt(2 pi / (-i phi''(t*))) e^{i phi(t*)}` for the integral
/// `int A(t) e^{i phi(t)} dt` dominated by the saddle `t*`.
///
/// The square root is taken on the branch whose direction of steepest
/// descent points into the right half plane (or downwards when it is
/// vertical), which is the orientation of a contour leaving the origin
/// towards large positive times.
pub fn saddle_value(amplitude: Complex64, phase: Complex64, phase_dd: Complex64) -> Result<Complex64> {
    let q = -Complex64::i() * phase_dd;
    if !(q.norm() > 0.0 && q.re.is_finite() && q.im.is_finite()) {
        return Err(Error::DegenerateSaddle(phase_dd.norm()));
    }
    let mut root = (2.0 * PI / q).sqrt();
    if root.re < 0.0 || (root.re == 0.0 && root.im > 0.0) {
        root = -root;
    }
    Ok(amplitude * root * (Complex64::i() * phase).exp())
}
