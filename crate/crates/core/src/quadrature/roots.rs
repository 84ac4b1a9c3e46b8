//! Stationary points of Laurent phases `Phi(t) = inv/t + c0 + c1 t + c2 t^2 + c3 t^3`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `Phi(t) = inv/t + c[0] + c[1] t + c[2] t^2 + c[3] t^3` with complex coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaurentPhase {
    pub inv: Complex64,
    pub c: [Complex64; 4],
}

impl LaurentPhase {
    pub fn new(inv: Complex64, c: [Complex64; 4]) -> Self {
        LaurentPhase { inv, c }
    }

    pub fn real(inv: f64, c: [f64; 4]) -> Self {
        LaurentPhase { inv: inv.into(), c: c.map(Complex64::from) }
    }

    pub fn value(&self, t: Complex64) -> Complex64 {
        self.inv / t + self.c[0] + t * (self.c[1] + t * (self.c[2] + t * self.c[3]))
    }

    pub fn d1(&self, t: Complex64) -> Complex64 {
        -self.inv / (t * t) + self.c[1] + t * (2.0 * self.c[2] + t * 3.0 * self.c[3])
    }

    pub fn d2(&self, t: Complex64) -> Complex64 {
        2.0 * self.inv / (t * t * t) + 2.0 * self.c[2] + 6.0 * self.c[3] * t
    }
}

fn horner(p: &[Complex64], t: Complex64) -> (Complex64, Complex64) {
    // p[k] multiplies t^k
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &a in p.iter().rev() {
        d = d * t + v;
        v = v * t + a;
    }
    (v, d)
}

/// All roots of the polynomial `sum p[k] t^k` (Aberth iteration followed
/// by Newton polishing). `p` must have a nonzero leading coefficient.
fn poly_roots(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n];
    // Cauchy bound for the initial circle
    let radius = 1.0 + p[..n].iter().map(|a| (a / lead).norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let (v, d) = horner(p, z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let sum: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * sum);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] -= w;
                moved = moved.max(w.norm() / z[k].norm().max(1e-300));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..5 {
            let (v, d) = horner(p, *r);
            let step = v / d;
            if !(step.re.is_finite() && step.im.is_finite()) || step.norm() == 0.0 {
                break;
            }
            *r -= step;
        }
    }
    z
}

/// Stationary points of `phase`, the roots of `t^2 Phi'(t)` that are roots
/// of `Phi'` itself.
///
/// Fails with [`Error::Degenerate`] when `Phi'` vanishes identically.
pub fn stationary_points(phase: &LaurentPhase) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let c = phase.c;
    let mut p: Vec<Complex64> = if phase.inv == zero {
        vec![c[1], 2.0 * c[2], 3.0 * c[3]]
    } else {
        vec![-phase.inv, zero, c[1], 2.0 * c[2], 3.0 * c[3]]
    };
    while p.len() > 1 && *p.last().unwrap() == zero {
        p.pop();
    }
    if p.len() == 1 {
        return if p[0] == zero { Err(Error::Degenerate) } else { Ok(Vec::new()) };
    }
    let mut roots = poly_roots(&p);
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bound_state_saddle_on_imaginary_axis() {
        // Phi = 1/t - t/2: Phi' = -1/t^2 - 1/2 = 0 at t = +- i sqrt(2)
        let roots = stationary_points(&LaurentPhase::real(1.0, [0.0, -0.5, 0.0, 0.0])).unwrap();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert!(r.re.abs() < 1e-14);
            assert!((r.im.abs() - 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn quartic_case() {
        // 3 t^4 - 5 t^2 + 2 = 0 -> t^2 in {1, 2/3}
        let roots = stationary_points(&LaurentPhase::real(2.0, [0.0, -5.0, 0.0, 1.0])).unwrap();
        // Phi' t^2 = -2 - 5 t^2 + 3 t^4: t^2 = (5 +- sqrt(49))/6 = 2 or -1/3
        let mut found2 = 0;
        for r in &roots {
            let t2 = r * r;
            if (t2 - 2.0).norm() < 1e-13 || (t2 + 1.0 / 3.0).norm() < 1e-13 {
                found2 += 1;
            }
        }
        assert_eq!(found2, 4);
    }

    #[test]
    fn zero_derivative_is_degenerate() {
        let p = LaurentPhase::real(0.0, [3.0, 0.0, 0.0, 0.0]);
        assert!(matches!(stationary_points(&p), Err(Error::Degenerate)));
    }

    #[test]
    fn linear_phase_has_no_stationary_point() {
        let p = LaurentPhase::real(0.0, [0.0, 2.0, 0.0, 0.0]);
        assert!(stationary_points(&p).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn roots_satisfy_derivative(
            inv in 0.1f64..10.0, c1 in -5.0f64..5.0, c2i in -1.0f64..1.0, c3 in 0.01f64..2.0,
        ) {
            let p = LaurentPhase::new(c(inv, 0.0), [c(0.0, 0.0), c(c1, 0.0), c(0.0, c2i), c(c3, 0.0)]);
            let roots = stationary_points(&p).unwrap();
            prop_assert_eq!(roots.len(), 4);
            for r in roots {
                let scale = (inv / r.norm_sqr()).max(3.0 * c3 * r.norm_sqr()).max(c1.abs()).max(1.0);
                prop_assert!(p.d1(r).norm() < 1e-10 * scale);
            }
        }
    }
}
