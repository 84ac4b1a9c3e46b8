//! Airy functions of a real argument, exponentially scaled on the positive
//! axis.
//!
//! Values near the origin come from Taylor steps of `y'' = z y` started at
//! `z = 0`; beyond `|z| = 9` (positive side) or `|z| = 10` (negative side) the
//! asymptotic expansions are used. `Ai` on `[0, 9]` is stepped backwards
//! from its asymptotic value so that it is always propagated in the
//! direction in which it grows.

use std::f64::consts::{FRAC_PI_4, PI};

const AI0: f64 = 0.355_028_053_887_817_239_260_063_186_004_183_176;
const AIP0: f64 = -0.258_819_403_792_806_798_405_183_560_189_203_963;
const BI0: f64 = 0.614_926_627_446_000_735_150_922_369_093_613_553;
const BIP0: f64 = 0.448_288_357_353_826_357_914_823_710_398_828_390;

const POS_SWITCH: f64 = 9.0;
const NEG_SWITCH: f64 = 10.0;
const STEP: f64 = 0.25;

/// `Ai, Ai', Bi, Bi'` at one point. For `z > 0` the stored values are
/// scaled: `Ai = ai e^{-zeta}`, `Bi = bi e^{zeta}` with `zeta = 2/3 z^{3/2}`
/// (and likewise for the derivatives). For `z <= 0`, `zeta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Airy {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
    pub zeta: f64,
}

impl Airy {
    /// Unscaled `(Ai, Ai', Bi, Bi')`; overflows for large positive `z`.
    pub fn unscaled(&self) -> (f64, f64, f64, f64) {
        let d = (-self.zeta).exp();
        let g = self.zeta.exp();
        (self.ai * d, self.aip * d, self.bi * g, self.bip * g)
    }
}

/// One Taylor step of `y'' = z y` from `z0` to `z0 + h`.
fn taylor_step(z0: f64, h: f64, y: f64, yp: f64) -> (f64, f64) {
    // a_{k+2} = (z0 a_k + a_{k-1}) / ((k+2)(k+1))
    let mut a = [y, yp, 0.5 * z0 * y];
    let mut sum = a[0] + h * a[1] + h * h * a[2];
    let mut dsum = a[1] + 2.0 * h * a[2];
    let mut hk = h * h;
    let scale = y.abs() + yp.abs();
    for k in 1..120 {
        let next = (z0 * a[1] + a[0]) / (((k + 2) * (k + 1)) as f64);
        let kk = k + 2;
        dsum += kk as f64 * next * hk;
        hk *= h;
        let term = next * hk;
        sum += term;
        a = [a[1], a[2], next];
        if term.abs() < 1e-18 * scale && (a[1] * hk / h).abs() < 1e-18 * scale {
            break;
        }
    }
    (sum, dsum)
}

fn propagate(z0: f64, z1: f64, mut y: f64, mut yp: f64) -> (f64, f64) {
    let n = ((z1 - z0).abs() / STEP).ceil().max(1.0) as usize;
    let h = (z1 - z0) / n as f64;
    for k in 0..n {
        let z = z0 + k as f64 * h;
        (y, yp) = taylor_step(z, h, y, yp);
    }
    (y, yp)
}

/// Coefficients `u_k` and `v_k` of the asymptotic expansions.
fn uv(k: usize) -> (f64, f64) {
    let mut u = 1.0;
    for j in 1..=k {
        let jf = j as f64;
        u *= (6.0 * jf - 5.0) * (6.0 * jf - 3.0) * (6.0 * jf - 1.0) / ((2.0 * jf - 1.0) * 216.0 * jf);
    }
    let kf = k as f64;
    let v = if k == 0 { 1.0 } else { -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u };
    (u, v)
}

/// `sum sign^k c_k zeta^{-k}` truncated at the smallest term.
fn series(zeta: f64, alternate: bool, pick_v: bool) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut zk = 1.0;
    for k in 0..60 {
        let (u, v) = uv(k);
        let c = if pick_v { v } else { u };
        let term = if alternate && k % 2 == 1 { -c * zk } else { c * zk };
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if prev < 1e-17 * sum.abs() {
            break;
        }
        zk /= zeta;
    }
    sum
}

/// Scaled asymptotic values for large positive `z`.
fn asymptotic_positive(z: f64) -> Airy {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let q = z.powf(0.25);
    let sp = PI.sqrt();
    Airy {
        ai: series(zeta, true, false) / (2.0 * sp * q),
        aip: -q * series(zeta, true, true) / (2.0 * sp),
        bi: series(zeta, false, false) / (sp * q),
        bip: q * series(zeta, false, true) / sp,
        zeta,
    }
}

/// Oscillatory asymptotics for `z = -x`, `x` large.
fn asymptotic_negative(x: f64) -> Airy {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    // P, Q from u_k; R, S from v_k with alternating even / odd parts
    let (mut p, mut q, mut r, mut s) = (0.0, 0.0, 0.0, 0.0);
    let mut zk = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        let (u, v) = uv(k);
        let size = (u * zk).abs();
        if size > prev {
            break;
        }
        prev = size;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * u * zk;
            r += sign * v * zk;
        } else {
            q += sign * u * zk;
            s += sign * v * zk;
        }
        if size < 1e-17 {
            break;
        }
        zk /= zeta;
    }
    let theta = zeta - FRAC_PI_4;
    let (sn, cs) = theta.sin_cos();
    let sp = PI.sqrt();
    let m = x.powf(-0.25) / sp;
    let mp = x.powf(0.25) / sp;
    Airy {
        ai: m * (cs * p + sn * q),
        aip: mp * (sn * r - cs * s),
        bi: m * (-sn * p + cs * q),
        bip: mp * (cs * r + sn * s),
        zeta: 0.0,
    }
}

/// Airy functions `Ai, Ai', Bi, Bi'` at real `z`.
pub fn airy(z: f64) -> Airy {
    if z.is_nan() {
        return Airy { ai: f64::NAN, aip: f64::NAN, bi: f64::NAN, bip: f64::NAN, zeta: 0.0 };
    }
    if z >= POS_SWITCH {
        return asymptotic_positive(z);
    }
    if z <= -NEG_SWITCH {
        return asymptotic_negative(-z);
    }
    if z <= 0.0 {
        let (ai, aip) = propagate(0.0, z, AI0, AIP0);
        let (bi, bip) = propagate(0.0, z, BI0, BIP0);
        return Airy { ai, aip, bi, bip, zeta: 0.0 };
    }
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let far = asymptotic_positive(POS_SWITCH);
    // the stepped Ai carries the scale of the far point, e^{zeta(9)}
    let (ai, aip) = propagate(POS_SWITCH, z, far.ai, far.aip);
    let (bi, bip) = propagate(0.0, z, BI0, BIP0);
    let g = (zeta - far.zeta).exp();
    let d = (-zeta).exp();
    Airy { ai: ai * g, aip: aip * g, bi: bi * d, bip: bip * d, zeta }
}
