//! Globally adaptive Gauss-Kronrod (7, 15) quadrature on a finite real
//! interval for vector-valued complex integrands.
//!
//! Several integrands that share the same path (a Green function and its
//! energy and momentum derivatives) are integrated together so the
//! subdivision is common to all of them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances and the subdivision budget of one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

/// Values and absolute error estimates, one per integrand component.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<const N: usize> {
    pub value: [Complex64; N],
    pub err: [f64; N],
}

impl<const N: usize> Estimate<N> {
    pub fn zero() -> Self {
        Estimate { value: [Complex64::new(0.0, 0.0); N], err: [0.0; N] }
    }

    pub fn accumulate(&mut self, other: &Estimate<N>) {
        for k in 0..N {
            self.value[k] += other.value[k];
            self.err[k] += other.err[k];
        }
    }

    fn within(&self, tol: &Tolerance) -> bool {
        (0..N).all(|k| self.err[k] <= tol.abs.max(tol.rel * self.value[k].norm()))
    }
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    est: Estimate<N>,
    // largest component error relative to its own target, used for ordering
    badness: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.badness == other.badness
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.badness.total_cmp(&other.badness)
    }
}

fn check_finite<const N: usize>(v: &[Complex64; N], s: f64) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::SingularIntegrand { re: s, im: 0.0 })
    }
}

/// One 15-point Kronrod evaluation with the embedded 7-point Gauss rule.
pub fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> Result<Estimate<N>>
where
    F: Fn(f64) -> [Complex64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let zero = Complex64::new(0.0, 0.0);
    let mut kron = [zero; N];
    let mut gauss = [zero; N];

    let fc = f(center);
    check_finite(&fc, center)?;
    for k in 0..N {
        kron[k] = fc[k] * WGK[7];
        gauss[k] = fc[k] * WG[3];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        check_finite(&f1, center - dx)?;
        let f2 = f(center + dx);
        check_finite(&f2, center + dx)?;
        for k in 0..N {
            let s = f1[k] + f2[k];
            kron[k] += s * WGK[j];
            if j % 2 == 1 {
                gauss[k] += s * WG[j / 2];
            }
        }
    }
    let mut est = Estimate::zero();
    for k in 0..N {
        est.value[k] = kron[k] * half;
        est.err[k] = ((kron[k] - gauss[k]) * half).norm();
    }
    Ok(est)
}

fn badness<const N: usize>(est: &Estimate<N>, tol: &Tolerance, scale: &[f64; N]) -> f64 {
    (0..N).map(|k| est.err[k] / tol.abs.max(tol.rel * scale[k]).max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}

/// Integrates `f` over `[a, b]`, bisecting the worst panel until the summed
/// error of every component is below `max(abs, rel * |value|)`.
pub fn integrate<const N: usize, F>(f: &F, a: f64, b: f64, tol: &Tolerance) -> Result<Estimate<N>>
where
    F: Fn(f64) -> [Complex64; N],
{
    let first = gk15(f, a, b)?;
    if first.within(tol) {
        return Ok(first);
    }
    let mut total = first;
    let scale = |t: &Estimate<N>| t.value.map(|v| v.norm());
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, badness: badness(&first, tol, &scale(&first)), est: first });

    let mut subdivisions = 0;
    while subdivisions < tol.max_subdivisions {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        subdivisions += 1;
        let sc = scale(&total);
        heap.push(Panel { a: worst.a, b: mid, badness: badness(&left, tol, &sc), est: left });
        heap.push(Panel { a: mid, b: worst.b, badness: badness(&right, tol, &sc), est: right });

        // summed afresh from the panels: incremental updates drift
        total = Estimate::zero();
        for p in heap.iter() {
            total.accumulate(&p.est);
        }
        if total.within(tol) {
            return Ok(total);
        }
        // panels too narrow to split further in double precision
        if (mid - worst.a).abs() <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let worst_err = total.err.iter().cloned().fold(0.0, f64::max);
    Err(Error::NonConvergence { subdivisions, err: worst_err })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerance = Tolerance { abs: 1e-14, rel: 1e-12, max_subdivisions: 500 };

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        let est = gk15(&|x: f64| [Complex64::new(x.powi(10), 0.0)], 0.0, 1.0).unwrap();
        assert!((est.value[0].re - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        // two very different tolerances must agree
        let f = |x: f64| [Complex64::new(0.0, x * x).exp()];
        let coarse = integrate(&f, 0.0, 20.0, &Tolerance { rel: 1e-8, ..TOL }).unwrap();
        let fine = integrate(&f, 0.0, 20.0, &TOL).unwrap();
        assert!((coarse.value[0] - fine.value[0]).norm() < 1e-7);
        assert!(fine.err[0] < 1e-11);
    }

    #[test]
    fn vector_components_share_subdivision() {
        let f = |x: f64| [Complex64::new(x.sin(), 0.0), Complex64::new(0.0, x.cos())];
        let est = integrate(&f, 0.0, std::f64::consts::PI, &TOL).unwrap();
        assert!((est.value[0].re - 2.0).abs() < 1e-13);
        assert!(est.value[1].norm() < 1e-13);
    }

    #[test]
    fn nan_is_reported() {
        let f = |x: f64| [Complex64::new(if x > 0.5 { f64::NAN } else { 1.0 }, 0.0)];
        assert!(matches!(integrate(&f, 0.0, 1.0, &TOL), Err(Error::SingularIntegrand { .. })));
    }
}
