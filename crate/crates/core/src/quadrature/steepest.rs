//! Steepest-descent contours for `int_0^inf t^{-1/2} w(t) e^{i Phi(t)} dt`
//! with the Laurent phase `Phi(t) = A/t + B t - C t^3`, `A, C >= 0`.
//!
//! Both propagators reduce to this family. Far from the source the
//! integrand oscillates with an amplitude that is exponentially large
//! compared to the result, so a fixed ray loses every significant digit
//! to cancellation. The contour built here runs from the origin through
//! the relevant saddle points along paths where `Re(i Phi)` only falls,
//! which keeps the integrand non-oscillatory and the result well
//! conditioned at any distance.
//!
//! The contour starts in the valley of `e^{iA/t}` at the origin
//! (`-pi < arg t < 0`) and ends in the valley at infinity that the
//! positive real axis can be rotated into: `-pi/3 < arg t < 0` when
//! `C > 0`, the lower or upper half plane when `C = 0` and `B < 0` or
//! `B > 0`.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use num_complex::Complex64;

use super::gauss_kronrod::{self, Estimate, Tolerance};
use crate::error::{Error, Result};

/// Depth, in units of the exponent, at which a descent path is cut off.
/// `e^{-46}` is about `1e-20` relative to the dominant saddle.
const DROP: f64 = 46.0;
const MAX_TRACE_STEPS: usize = 20_000;

/// Coefficients of `Phi(t) = inv/t + lin t - cub t^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicPhase {
    pub inv: f64,
    pub lin: f64,
    pub cub: f64,
}

impl CubicPhase {
    pub fn new(inv: f64, lin: f64, cub: f64) -> Self {
        CubicPhase { inv, lin, cub }
    }

    /// The exponent `i Phi(t)`.
    pub fn exponent(&self, t: Complex64) -> Complex64 {
        Complex64::i() * (self.inv / t + self.lin * t - self.cub * t * t * t)
    }

    fn d1(&self, t: Complex64) -> Complex64 {
        Complex64::i() * (-self.inv / (t * t) + self.lin - 3.0 * self.cub * t * t)
    }

    fn d2(&self, t: Complex64) -> Complex64 {
        Complex64::i() * (2.0 * self.inv / (t * t * t) - 6.0 * self.cub * t)
    }

    fn d3(&self, t: Complex64) -> Complex64 {
        Complex64::i() * (-6.0 * self.inv / (t * t * t * t) - 6.0 * self.cub)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.inv.is_finite() && self.lin.is_finite() && self.cub.is_finite();
        if !ok || self.inv < 0.0 || self.cub < 0.0 {
            return Err(Error::InvalidContour(format!(
                "phase coefficients out of range: A = {}, B = {}, C = {}",
                self.inv, self.lin, self.cub
            )));
        }
        if self.cub == 0.0 && self.lin == 0.0 {
            return Err(Error::InvalidContour("integral diverges for B = C = 0".into()));
        }
        Ok(())
    }
}

/// One piece of a contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        from: Complex64,
        to: Complex64,
    },
    /// `t = from + dir * r`, `r` from 0 to infinity; `scale` sets the
    /// compactification `r = scale * s / (1 - s)`.
    Ray {
        from: Complex64,
        dir: Complex64,
        scale: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentContour {
    pub segments: Vec<Segment>,
    /// `Re(i Phi)` at the dominant saddle; integrands are evaluated with
    /// `e^{i Phi - log_scale}` so that values near the saddle are O(1).
    pub log_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Valley {
    Origin,
    /// The target valley at infinity.
    Target,
    /// Any other valley at infinity.
    Other,
}

fn polar(r: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(r, theta)
}

/// Valley of the descent path through `end`. Near a saddle the terms of
/// the phase balance, so the flow is followed (without recording it)
/// until one side clearly dominates.
fn settle(ph: &CubicPhase, mut t: Complex64) -> Valley {
    for _ in 0..MAX_TRACE_STEPS {
        let r = t.norm();
        let near = ph.inv / r;
        let far = ph.lin.abs() * r + ph.cub * r * r * r;
        if near > 4.0 * far || far > 4.0 * near {
            break;
        }
        let g = ph.d1(t);
        if !(g.norm() > 0.0 && g.norm().is_finite()) {
            break;
        }
        let h = (0.5 / g.norm()).min(0.2 * r);
        t -= g.conj() / g.norm() * h;
    }
    classify(ph, t)
}

fn classify(ph: &CubicPhase, end: Complex64) -> Valley {
    let r = end.norm();
    if ph.inv / r > ph.lin.abs() * r + ph.cub * r * r * r {
        return Valley::Origin;
    }
    let arg = end.arg();
    let target = if ph.cub > 0.0 {
        arg > -FRAC_PI_3 && arg < 0.0
    } else if ph.lin < 0.0 {
        arg < 0.0
    } else {
        arg > 0.0
    };
    if target {
        Valley::Target
    } else {
        Valley::Other
    }
}

/// Radius at which the local Taylor expansion around `t` stops being
/// quadratic.
fn local_radius(ph: &CubicPhase, t: Complex64) -> f64 {
    let mut h = 0.25 * t.norm();
    let f2 = ph.d2(t).norm();
    if f2 > 0.0 {
        h = h.min(0.5 / f2.sqrt());
    }
    let f3 = ph.d3(t).norm();
    if f3 > 0.0 {
        h = h.min((3.0 / f3).cbrt());
    }
    h
}

/// Directions of steepest descent leaving `t0`, deepest first.
fn descent_directions(ph: &CubicPhase, t0: Complex64, h: f64) -> Vec<Complex64> {
    const M: usize = 144;
    let f0 = ph.exponent(t0).re;
    let vals: Vec<f64> = (0..M).map(|k| ph.exponent(t0 + polar(h, 2.0 * PI * k as f64 / M as f64)).re).collect();
    let mut minima: Vec<(f64, Complex64)> = (0..M)
        .filter(|&k| {
            let prev = vals[(k + M - 1) % M];
            let next = vals[(k + 1) % M];
            vals[k] < prev && vals[k] <= next && vals[k] < f0
        })
        .map(|k| {
            // parabolic refinement of the angle
            let (a, b, c) = (vals[(k + M - 1) % M], vals[k], vals[(k + 1) % M]);
            let den = a - 2.0 * b + c;
            let off = if den > 0.0 { 0.5 * (a - c) / den } else { 0.0 };
            let theta = 2.0 * PI * (k as f64 + off) / M as f64;
            (vals[k], polar(1.0, theta))
        })
        .collect();
    minima.sort_by(|x, y| x.0.total_cmp(&y.0));
    minima.into_iter().map(|m| m.1).collect()
}

/// Follows the path of steepest descent of `Re(i Phi)` from `start` in
/// the initial direction `dir` until the exponent has fallen `DROP` below
/// `f_ref`. Returns the polyline including `start`.
fn trace(ph: &CubicPhase, start: Complex64, dir: Complex64, h0: f64, f_ref: f64) -> Result<Vec<Complex64>> {
    let mut pts = vec![start];
    let mut t = start + dir * h0;
    pts.push(t);
    let flow = |t: Complex64| {
        let g = ph.d1(t);
        -g.conj() / g.norm()
    };
    for _ in 0..MAX_TRACE_STEPS {
        if ph.exponent(t).re < f_ref - DROP {
            return Ok(pts);
        }
        let g = ph.d1(t).norm();
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidContour(format!("descent path stalled at {t}")));
        }
        let h = (0.5 / g).min(0.2 * t.norm()).min(4.0 * (t - start).norm().max(h0));
        let mid = t + flow(t) * (0.5 * h);
        t += flow(mid) * h;
        pts.push(t);
    }
    Err(Error::InvalidContour(format!("descent path from {start} did not terminate")))
}

fn crosses_branch_cut(path: &[Complex64]) -> bool {
    path.windows(2).any(|w| {
        let (p, q) = (w[0], w[1]);
        if (p.im > 0.0 && q.im > 0.0) || (p.im < 0.0 && q.im < 0.0) {
            return false;
        }
        if p.im == q.im {
            return p.re < 0.0 || q.re < 0.0;
        }
        let s = p.im / (p.im - q.im);
        p.re + s * (q.re - p.re) < 0.0
    })
}

/// Both descent branches through the saddle `ts`, oriented so that the
/// returned polyline runs from the valley of the first branch, through the
/// saddle, into the valley of the second.
fn through_saddle(ph: &CubicPhase, ts: Complex64, f_ref: f64) -> Result<(Valley, Vec<Complex64>, Valley)> {
    let h0 = local_radius(ph, ts);
    let dirs = descent_directions(ph, ts, h0);
    if dirs.len() < 2 {
        return Err(Error::InvalidContour(format!("no descent directions at saddle {ts}")));
    }
    // the two valleys of a simple saddle are opposite; take the deepest and
    // the direction most nearly opposite to it
    let d1 = dirs[0];
    let d2 = *dirs[1..].iter().min_by(|a, b| (**a + d1).norm().total_cmp(&(**b + d1).norm())).unwrap();
    let b1 = trace(ph, ts, d1, h0, f_ref)?;
    let b2 = trace(ph, ts, d2, h0, f_ref)?;
    let v1 = settle(ph, *b1.last().unwrap());
    let v2 = settle(ph, *b2.last().unwrap());
    let mut path: Vec<Complex64> = b1.into_iter().rev().collect();
    path.extend_from_slice(&b2[1..]);
    Ok((v1, path, v2))
}

fn reversed(path: Vec<Complex64>) -> Vec<Complex64> {
    path.into_iter().rev().collect()
}

/// Descent branch from `t0` leaving in the direction closest to `want`.
fn branch_toward(ph: &CubicPhase, t0: Complex64, want: Complex64, f_ref: f64) -> Result<Vec<Complex64>> {
    let h0 = local_radius(ph, t0);
    let dirs = descent_directions(ph, t0, h0);
    let dir = dirs
        .into_iter()
        .min_by(|a, b| (*a - want).norm().total_cmp(&(*b - want).norm()))
        .ok_or_else(|| Error::InvalidContour(format!("no descent direction at {t0}")))?;
    trace(ph, t0, dir, h0, f_ref)
}

fn target_direction(ph: &CubicPhase) -> Complex64 {
    if ph.cub > 0.0 {
        polar(1.0, -FRAC_PI_6)
    } else if ph.lin < 0.0 {
        -Complex64::i()
    } else {
        Complex64::i()
    }
}

/// Turns a polyline from near the origin to deep in the target valley into
/// segments: closed to the origin by a straight line and continued to
/// infinity by a ray.
fn close(ph: &CubicPhase, path: Vec<Complex64>, log_scale: f64) -> Result<DescentContour> {
    if crosses_branch_cut(&path) {
        return Err(Error::InvalidContour("descent path crosses the negative real axis".into()));
    }
    let first = path[0];
    let last = *path.last().unwrap();
    let mut segments = Vec::with_capacity(path.len() + 1);
    if first != Complex64::new(0.0, 0.0) {
        segments.push(Segment::Line { from: Complex64::new(0.0, 0.0), to: first });
    }
    for w in path.windows(2) {
        if w[0] != w[1] {
            segments.push(Segment::Line { from: w[0], to: w[1] });
        }
    }
    let scale = 0.25 * last.norm().max(local_radius(ph, last));
    segments.push(Segment::Ray { from: last, dir: target_direction(ph), scale });
    Ok(DescentContour { segments, log_scale })
}

fn straight(dir: Complex64, len: f64) -> DescentContour {
    let end = dir * len;
    DescentContour {
        segments: vec![
            Segment::Line { from: Complex64::new(0.0, 0.0), to: end },
            Segment::Ray { from: end, dir, scale: len },
        ],
        log_scale: 0.0,
    }
}

/// Newton polish of a root of `Phi'(t)`.
fn polish(ph: &CubicPhase, mut t: Complex64) -> Complex64 {
    for _ in 0..50 {
        let step = ph.d1(t) / ph.d2(t);
        // near a double root Phi'' vanishes and Newton would jump to
        // another root
        if !(step.re.is_finite() && step.im.is_finite()) || step.norm() > 0.1 * t.norm() {
            break;
        }
        t -= step;
        if step.norm() <= 1e-15 * t.norm() {
            break;
        }
    }
    t
}

/// Builds the steepest-descent contour for `phase`.
pub fn descent_contour(ph: &CubicPhase) -> Result<DescentContour> {
    ph.validate()?;
    let (a, b, c) = (ph.inv, ph.lin, ph.cub);
    let i = Complex64::i();

    if c == 0.0 {
        if b < 0.0 {
            if a == 0.0 {
                return Ok(straight(-i, 1.0 / -b));
            }
            // single saddle on the negative imaginary axis
            let s = (a / -b).sqrt();
            let mut con = straight(-i, s);
            con.log_scale = -2.0 * (a * -b).sqrt();
            return Ok(con);
        }
        if a == 0.0 {
            return Ok(straight(i, 1.0 / b));
        }
        let ts = polish(ph, Complex64::new((a / b).sqrt(), 0.0));
        let (v1, path, v2) = through_saddle(ph, ts, 0.0)?;
        return match (v1, v2) {
            (Valley::Origin, Valley::Target) => close(ph, path, 0.0),
            (Valley::Target, Valley::Origin) => close(ph, reversed(path), 0.0),
            _ => Err(Error::InvalidContour(format!("unexpected valleys {v1:?}, {v2:?} at {ts}"))),
        };
    }

    if a == 0.0 {
        if b == 0.0 {
            return Ok(straight(polar(1.0, -FRAC_PI_6), c.powf(-1.0 / 3.0)));
        }
        if b < 0.0 {
            let s2 = (-b / (3.0 * c)).sqrt();
            let t2 = Complex64::new(0.0, -s2);
            let mut path = vec![Complex64::new(0.0, 0.0)];
            path.extend(branch_toward(ph, t2, Complex64::new(1.0, 0.0), 0.0)?);
            return close(ph, path, 0.0);
        }
        // up the imaginary axis into the other valley, back through the real saddle
        let r = (b / (3.0 * c)).sqrt();
        let (v1, path, v2) = through_saddle(ph, Complex64::new(r, 0.0), 0.0)?;
        let path = match (v1, v2) {
            (Valley::Other, Valley::Target) => path,
            (Valley::Target, Valley::Other) => reversed(path),
            _ => return Err(Error::InvalidContour(format!("unexpected valleys {v1:?}, {v2:?}"))),
        };
        return join_through_other_valley(ph, &[Complex64::new(0.0, 0.0)], path, 0.0);
    }

    let d = b * b - 12.0 * a * c;
    // nearly coalescing saddles (the classical turning point) are treated
    // as a double saddle on the imaginary axis
    let coalescing = b < 0.0 && d.abs() <= 1e-6 * b * b;
    if d < 0.0 && !coalescing {
        // complex saddle in the fourth quadrant dominates
        let t2 = Complex64::new(b, -(-d).sqrt()) / (6.0 * c);
        let ts = polish(ph, t2.sqrt());
        let f_ref = ph.exponent(ts).re;
        let (v1, path, v2) = through_saddle(ph, ts, f_ref)?;
        return match (v1, v2) {
            (Valley::Origin, Valley::Target) => close(ph, path, f_ref),
            (Valley::Target, Valley::Origin) => close(ph, reversed(path), f_ref),
            _ => Err(Error::InvalidContour(format!("unexpected valleys {v1:?}, {v2:?} at {ts}"))),
        };
    }

    let sd = d.max(0.0).sqrt();
    if b < 0.0 {
        // both saddles on the negative imaginary axis; the contour follows
        // the axis down to the lower one and turns into the target valley
        let s1 = ((-b - sd) / (6.0 * c)).sqrt();
        let s2 = ((-b + sd) / (6.0 * c)).sqrt();
        let f_ref = ph.exponent(Complex64::new(0.0, -s1)).re;
        let t2 = polish(ph, Complex64::new(0.0, -s2));
        let mut path = vec![Complex64::new(0.0, 0.0)];
        path.extend(branch_toward(ph, t2, Complex64::new(1.0, 0.0), f_ref)?);
        return close(ph, path, f_ref);
    }

    // two real saddles: origin -> r1 -> other valley -> r2 -> target
    let r1 = polish(ph, Complex64::new(((b - sd) / (6.0 * c)).sqrt(), 0.0));
    let r2 = polish(ph, Complex64::new(((b + sd) / (6.0 * c)).sqrt(), 0.0));
    if (r1 - r2).norm() < 1e-6 * r2.norm() {
        return Err(Error::InvalidContour(format!("coalescing saddles at {r1}")));
    }
    let (u1, p1, u2) = through_saddle(ph, r1, 0.0)?;
    let p1 = match (u1, u2) {
        (Valley::Origin, Valley::Other) => p1,
        (Valley::Other, Valley::Origin) => reversed(p1),
        _ => return Err(Error::InvalidContour(format!("unexpected valleys {u1:?}, {u2:?} at {r1}"))),
    };
    let (w1, p2, w2) = through_saddle(ph, r2, 0.0)?;
    let p2 = match (w1, w2) {
        (Valley::Other, Valley::Target) => p2,
        (Valley::Target, Valley::Other) => reversed(p2),
        _ => return Err(Error::InvalidContour(format!("unexpected valleys {w1:?}, {w2:?} at {r2}"))),
    };
    join_through_other_valley(ph, &p1, p2, 0.0)
}

/// Connects a path that ends deep in the upper valley with one that starts
/// there. The junction is an arc at constant radius, on which the integrand
/// is negligible.
fn join_through_other_valley(
    ph: &CubicPhase,
    head: &[Complex64],
    tail: Vec<Complex64>,
    log_scale: f64,
) -> Result<DescentContour> {
    let i = Complex64::i();
    let mut path: Vec<Complex64> = head.to_vec();
    let start = tail[0];
    // a single point means we come straight up the imaginary axis
    let from = if head.len() == 1 { i * start.norm() } else { *head.last().unwrap() };
    if head.len() == 1 {
        path.push(from);
    }
    let (a0, a1) = (from.arg(), start.arg());
    let n = 32;
    for k in 0..=n {
        let s = k as f64 / n as f64;
        let rho = from.norm() + s * (start.norm() - from.norm());
        path.push(polar(rho, a0 + s * (a1 - a0)));
    }
    path.extend_from_slice(&tail);
    let f_max = path.iter().map(|&t| ph.exponent(t).re).fold(f64::NEG_INFINITY, f64::max);
    if f_max > log_scale + 1.0 {
        return Err(Error::InvalidContour(format!("junction climbs to {f_max} above the saddles")));
    }
    close(ph, path, log_scale)
}

/// Integrates `t^{-1/2} w(t) e^{i Phi(t) - log_scale}` along `contour`,
/// where the weights are `[1, t, t^3]`. The square root is the principal
/// branch, continuous on a contour that avoids the negative real axis.
pub fn integrate_moments(ph: &CubicPhase, contour: &DescentContour, tol: &Tolerance) -> Result<Estimate<3>> {
    let integrand = |t: Complex64| {
        let e = (ph.exponent(t) - contour.log_scale).exp() / (2.0 * PI * t).sqrt();
        [e, e * t, e * t * t * t]
    };
    integrate_along(&contour.segments, &integrand, tol)
}

/// Integrates a vector integrand along a list of segments.
pub fn integrate_along<const N: usize, F>(segments: &[Segment], f: &F, tol: &Tolerance) -> Result<Estimate<N>>
where
    F: Fn(Complex64) -> [Complex64; N],
{
    let mut total = Estimate::zero();
    let zero = Complex64::new(0.0, 0.0);
    for seg in segments {
        let est = match *seg {
            Segment::Line { from, to } if from == zero => {
                // t = to v^2 absorbs t^{-1/2}
                let g = |v: f64| {
                    let mut y = f(to * (v * v));
                    let jac = to * (2.0 * v);
                    y.iter_mut().for_each(|z| *z *= jac);
                    y
                };
                gauss_kronrod::integrate(&g, 0.0, 1.0, tol)?
            }
            Segment::Line { from, to } => {
                let d = to - from;
                let g = |s: f64| {
                    let mut y = f(from + d * s);
                    y.iter_mut().for_each(|z| *z *= d);
                    y
                };
                gauss_kronrod::integrate(&g, 0.0, 1.0, tol)?
            }
            Segment::Ray { from, dir, scale } => {
                let g = |s: f64| {
                    if s >= 1.0 {
                        return [zero; N];
                    }
                    let u = 1.0 - s;
                    let mut y = f(from + dir * (scale * s / u));
                    let jac = dir * (scale / (u * u));
                    y.iter_mut().for_each(|z| {
                        *z = if z.norm() == 0.0 { zero } else { *z * jac };
                    });
                    y
                };
                gauss_kronrod::integrate(&g, 0.0, 1.0, tol)?
            }
        };
        total.accumulate(&est);
    }
    Ok(total)
}
