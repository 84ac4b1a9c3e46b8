//! Wigner trajectories from the phase of the fixed-energy propagator.
//!
//! The arrival time at `x` is the energy slope of the phase of `G(x, 0; eps)`
//! minus the same slope at the entry `x = 0`. In the crossed field the
//! momentum slope gives the drift along the propagation direction.
//! Slopes are always taken pointwise as `Im(dG/G)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{arrival_rel, exit_nonrel, exit_rel_most_probable, time_nonrel};
use crate::error::{Error, Result};
use crate::params::{Regime, ScenarioParams};
use crate::propagator_nr::{green_nr_scaled, ScaledGreen};
use crate::propagator_rel::{green_rel_scaled, RelPropArgs};
use crate::quadrature::{stationary_points, ComplexValue, ContourSpec, LaurentPhase};
use crate::tunneling::kinetic_momentum;

/// Smallest `|G|` (after scaling) a slope is taken from.
pub const AMPLITUDE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    WignerTime,
    WignerZ,
    ClassicalTime,
    ClassicalZ,
    SaddleTime,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::WignerTime => "wigner_time",
            CurveKind::WignerZ => "wigner_z",
            CurveKind::ClassicalTime => "classical_time",
            CurveKind::ClassicalZ => "classical_z",
            CurveKind::SaddleTime => "saddle_time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleFlag {
    Ok,
    /// `|G|` fell below [`AMPLITUDE_FLOOR`]; no value.
    Underflow,
    /// Two saddles nearly coalesce (the classical turning point).
    DegenerateSaddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub value: Option<f64>,
    pub flag: SampleFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryCurve {
    pub kind: CurveKind,
    pub params: ScenarioParams,
    pub samples: Vec<Sample>,
}

impl TrajectoryCurve {
    pub fn xs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.samples.iter().map(|s| s.value).collect()
    }
}

/// How `dG/deps` and `dG/dpz` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    /// Differentiating under the integral.
    #[default]
    Integrand,
    /// Central differences of the phase, `h = 1e-4 Ip` in energy and
    /// `1e-4 Ip/c` in momentum.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WignerOptions {
    pub contour: ContourSpec,
    pub derivative: DerivativeMethod,
    /// Constant phase multiplied into every propagator value. Physical
    /// results must not depend on it.
    pub phase_offset: f64,
}

impl From<ContourSpec> for WignerOptions {
    fn from(contour: ContourSpec) -> Self {
        WignerOptions { contour, ..WignerOptions::default() }
    }
}

/// `Im(dG/G)`, the slope of the phase of `G`.
pub fn phase_slope(g: ComplexValue, dg: ComplexValue) -> Result<f64> {
    let n = g.value.norm();
    if !(n >= AMPLITUDE_FLOOR) {
        return Err(Error::ZeroAmplitude(n));
    }
    Ok((dg.value / g.value).im)
}

/// `-2 Ip/(3c)`.
pub fn most_probable_pz(params: &ScenarioParams) -> f64 {
    -2.0 * params.ip / (3.0 * params.c)
}

/// Tunnel exit used by the trajectories of either regime.
pub fn exit_point(params: &ScenarioParams) -> f64 {
    match params.regime {
        Regime::Nonrelativistic => exit_nonrel(params.ip, params.e0),
        Regime::Relativistic => exit_rel_most_probable(params.ip, params.e0, params.c),
    }
}

/// Phase slopes at one point: energy, and momentum in the crossed field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slopes {
    pub eps: f64,
    pub pz: Option<f64>,
}

fn green_at(x: f64, eps: f64, pz: f64, params: &ScenarioParams, opts: &WignerOptions) -> Result<ScaledGreen> {
    let g = match params.regime {
        Regime::Nonrelativistic => green_nr_scaled(x, eps, params.e0, &opts.contour)?,
        Regime::Relativistic => green_rel_scaled(&RelPropArgs::new(x, eps, pz, params.e0, params.c), &opts.contour)?,
    };
    Ok(if opts.phase_offset == 0.0 { g } else { g.rotated(Complex64::from_polar(1.0, opts.phase_offset)) })
}

fn fd_slope(minus: &ScaledGreen, mid: &ScaledGreen, plus: &ScaledGreen, h: f64) -> Result<f64> {
    for s in [minus, mid, plus] {
        let n = s.g.value.norm();
        if !(n >= AMPLITUDE_FLOOR) {
            return Err(Error::ZeroAmplitude(n));
        }
    }
    // each ratio stays within one branch, so no unwrapping across the grid
    let up = (plus.g.value / mid.g.value).arg();
    let down = (mid.g.value / minus.g.value).arg();
    Ok((up + down) / (2.0 * h))
}

/// Slopes at `x` for the evaluation point of `params`: `eps0`, and in the
/// crossed field `pz = -2 Ip/(3c)`.
pub fn slopes_at(x: f64, params: &ScenarioParams, opts: &WignerOptions) -> Result<Slopes> {
    let eps = params.eps0;
    let pz = most_probable_pz(params);
    let rel = params.regime == Regime::Relativistic;
    let mid = green_at(x, eps, pz, params, opts)?;
    match opts.derivative {
        DerivativeMethod::Integrand => Ok(Slopes {
            eps: phase_slope(mid.g, mid.d_eps)?,
            pz: match mid.d_pz {
                Some(d) if rel => Some(phase_slope(mid.g, d)?),
                _ => None,
            },
        }),
        DerivativeMethod::FiniteDifference => {
            let h = 1e-4 * params.ip;
            let e =
                fd_slope(&green_at(x, eps - h, pz, params, opts)?, &mid, &green_at(x, eps + h, pz, params, opts)?, h)?;
            let p = if rel {
                let hp = h / params.c;
                Some(fd_slope(
                    &green_at(x, eps, pz - hp, params, opts)?,
                    &mid,
                    &green_at(x, eps, pz + hp, params, opts)?,
                    hp,
                )?)
            } else {
                None
            };
            Ok(Slopes { eps: e, pz: p })
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("grid must be nonempty and finite".into()));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::Domain("grid must be strictly monotone".into()));
    }
    Ok(())
}

/// Time and (in the crossed field) `z` Wigner curves from one set of
/// propagator evaluations.
pub fn wigner_curves(
    grid: &[f64],
    params: &ScenarioParams,
    opts: &WignerOptions,
) -> Result<(TrajectoryCurve, Option<TrajectoryCurve>)> {
    check_grid(grid)?;
    let origin = slopes_at(0.0, params, opts)?;
    let raw: Vec<Result<Slopes>> = grid.par_iter().map(|&x| slopes_at(x, params, opts)).collect();
    let mut time = Vec::with_capacity(grid.len());
    let mut z = Vec::with_capacity(grid.len());
    for (&x, r) in grid.iter().zip(raw) {
        match r {
            Ok(s) => {
                let (t, dz) = if x == 0.0 {
                    (0.0, 0.0)
                } else {
                    (s.eps - origin.eps, origin.pz.unwrap_or(0.0) - s.pz.unwrap_or(0.0))
                };
                time.push(Sample { x, value: Some(t), flag: SampleFlag::Ok });
                z.push(Sample { x, value: Some(dz), flag: SampleFlag::Ok });
            }
            Err(Error::ZeroAmplitude(_)) => {
                let s = Sample { x, value: None, flag: SampleFlag::Underflow };
                time.push(s);
                z.push(s);
            }
            Err(e) => return Err(e),
        }
    }
    let time = TrajectoryCurve { kind: CurveKind::WignerTime, params: *params, samples: time };
    let z = (params.regime == Regime::Relativistic).then_some(TrajectoryCurve {
        kind: CurveKind::WignerZ,
        params: *params,
        samples: z,
    });
    Ok((time, z))
}

pub fn wigner_time_curve(grid: &[f64], params: &ScenarioParams, opts: &WignerOptions) -> Result<TrajectoryCurve> {
    Ok(wigner_curves(grid, params, opts)?.0)
}

/// Crossed field only.
pub fn wigner_z_curve(grid: &[f64], params: &ScenarioParams, opts: &WignerOptions) -> Result<TrajectoryCurve> {
    if params.regime != Regime::Relativistic {
        return Err(Error::Domain("the z drift needs the crossed field".into()));
    }
    wigner_curves(grid, params, opts)?.1.ok_or(Error::Degenerate)
}

/// Classical arrival time and (crossed field) `z` on `grid`. In the crossed
/// field the motion starts at the exit with proper velocity
/// `q_z(x_e)` along `z`.
pub fn classical_curves(grid: &[f64], params: &ScenarioParams) -> Result<(TrajectoryCurve, Option<TrajectoryCurve>)> {
    check_grid(grid)?;
    let x_e = exit_point(params);
    let ok = |x: f64, v: f64| Sample { x, value: Some(v), flag: SampleFlag::Ok };
    match params.regime {
        Regime::Nonrelativistic => {
            let samples = grid.iter().map(|&x| ok(x, time_nonrel(x, x_e, params.e0))).collect();
            Ok((TrajectoryCurve { kind: CurveKind::ClassicalTime, params: *params, samples }, None))
        }
        Regime::Relativistic => {
            let vz0 = kinetic_momentum(x_e, most_probable_pz(params), params.e0, params.c);
            let (t, z): (Vec<_>, Vec<_>) = grid
                .iter()
                .map(|&x| {
                    let (t, z) = arrival_rel(x, vz0, x_e, params.e0, params.c);
                    (ok(x, t), ok(x, z))
                })
                .unzip();
            Ok((
                TrajectoryCurve { kind: CurveKind::ClassicalTime, params: *params, samples: t },
                Some(TrajectoryCurve { kind: CurveKind::ClassicalZ, params: *params, samples: z }),
            ))
        }
    }
}

/// Plateau test: converged when the spread is below
/// `max(rel_fraction |tau_w|, abs_floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauCriterion {
    pub rel_fraction: f64,
    pub abs_floor: f64,
}

impl Default for PlateauCriterion {
    fn default() -> Self {
        PlateauCriterion { rel_fraction: 0.01, abs_floor: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub tau_w: f64,
    pub plateau_window: (f64, f64),
    pub plateau_spread: f64,
    pub converged: bool,
    /// Number of samples averaged.
    pub samples: usize,
}

/// Mean and spread of `wigner - classical` on the window, whose ends may
/// be given in either order.
pub fn wigner_delay(wigner: &TrajectoryCurve, classical: &TrajectoryCurve, window: (f64, f64)) -> Result<DelayReport> {
    wigner_delay_with(wigner, classical, window, PlateauCriterion::default())
}

pub fn wigner_delay_with(
    wigner: &TrajectoryCurve,
    classical: &TrajectoryCurve,
    window: (f64, f64),
    criterion: PlateauCriterion,
) -> Result<DelayReport> {
    if wigner.samples.len() != classical.samples.len()
        || wigner.samples.iter().zip(&classical.samples).any(|(a, b)| a.x != b.x)
    {
        return Err(Error::Domain("curves are not on a common grid".into()));
    }
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let delta: Vec<f64> = wigner
        .samples
        .iter()
        .zip(&classical.samples)
        .filter(|(a, _)| a.x >= lo && a.x <= hi)
        .filter_map(|(a, b)| Some(a.value? - b.value?))
        .collect();
    if delta.is_empty() {
        return Err(Error::Domain(format!("no valid samples in window [{lo}, {hi}]")));
    }
    let tau_w = delta.iter().sum::<f64>() / delta.len() as f64;
    let max = delta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = delta.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    Ok(DelayReport {
        tau_w,
        plateau_window: (lo, hi),
        plateau_spread: spread,
        converged: spread < (criterion.rel_fraction * tau_w.abs()).max(criterion.abs_floor),
        samples: delta.len(),
    })
}

/// Below this value of `|Phi''| |t|^2` relative to the largest phase term
/// a saddle is flagged as degenerate.
const DEGENERATE_SADDLE: f64 = 1e-2;

fn physical_saddle(x: f64, eps: f64, e0: f64) -> Option<(f64, bool)> {
    let phase = LaurentPhase::real(0.5 * x * x, [0.0, eps + 0.5 * e0 * x, 0.0, -e0 * e0 / 24.0]);
    let roots = stationary_points(&phase).ok()?;
    // the saddle crossed by the decaying contour: closed fourth quadrant,
    // nearest to the origin
    let t = roots
        .into_iter()
        .filter(|t| t.im <= 1e-9 * t.norm() && t.re >= -1e-9 * t.norm())
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))?;
    let terms = [phase.inv / t, phase.c[1] * t, phase.c[3] * t * t * t];
    let size = terms.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let q = (phase.d2(t) * t * t).norm() / size;
    Some((t.re, q < DEGENERATE_SADDLE))
}

/// Leading-order saddle-point Wigner curve (nonrelativistic): the energy
/// slope of the stationary phase is `Re t*` by the envelope theorem.
pub fn saddle_mode_curve(grid: &[f64], params: &ScenarioParams) -> Result<TrajectoryCurve> {
    if params.regime != Regime::Nonrelativistic {
        return Err(Error::Domain("the saddle curve is built for the constant field".into()));
    }
    check_grid(grid)?;
    let (eps, e0) = (params.eps0, params.e0);
    let origin = physical_saddle(0.0, eps, e0).map_or(0.0, |s| s.0);
    let samples = grid
        .iter()
        .map(|&x| match physical_saddle(x, eps, e0) {
            Some((re, degenerate)) => Sample {
                x,
                value: Some(if x == 0.0 { 0.0 } else { re - origin }),
                flag: if degenerate { SampleFlag::DegenerateSaddle } else { SampleFlag::Ok },
            },
            None => Sample { x, value: None, flag: SampleFlag::DegenerateSaddle },
        })
        .collect();
    Ok(TrajectoryCurve { kind: CurveKind::SaddleTime, params: *params, samples })
}

/// Continuous phase along `grid`, for diagnostics only. Fails when
/// neighbouring samples differ by `pi` or more.
pub fn unwrapped_phase(values: &[Complex64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for w in values.windows(2) {
        let step = (w[1] / w[0]).arg();
        if !(step.abs() < std::f64::consts::PI * (1.0 - 1e-12)) {
            return Err(Error::Domain(format!("phase jump {step} between neighbours")));
        }
        if out.is_empty() {
            out.push(w[0].arg());
        }
        let last = *out.last().unwrap();
        out.push(last + step);
    }
    if values.len() == 1 {
        out.push(values[0].arg());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_params, SPEED_OF_LIGHT};

    fn cv(v: Complex64) -> ComplexValue {
        ComplexValue::exact(v)
    }

    fn nonrel(ratio: f64) -> ScenarioParams {
        derive_params(Regime::Nonrelativistic, 1.0, ratio, SPEED_OF_LIGHT).unwrap()
    }

    fn rel(ratio: f64) -> ScenarioParams {
        derive_params(Regime::Relativistic, 90.0, ratio, SPEED_OF_LIGHT).unwrap()
    }

    #[test]
    fn slope_of_simple_phases() {
        let i = Complex64::i();
        assert!((phase_slope(cv(i), cv(i * i)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(phase_slope(cv(Complex64::new(0.3, -2.0)), cv(Complex64::new(0.6, -4.0))).unwrap(), 0.0);
        assert!(matches!(phase_slope(cv(0.0.into()), cv(1.0.into())), Err(Error::ZeroAmplitude(_))));
    }

    #[test]
    fn slope_of_synthetic_pair() {
        // A = 2 + sin e, phi = e^2 + cos 3e
        for e in [-1.3, 0.2, 0.7, 2.5] {
            let (a, da) = (2.0 + f64::sin(e), f64::cos(e));
            let (p, dp) = (e * e + f64::cos(3.0 * e), 2.0 * e - 3.0 * f64::sin(3.0 * e));
            let g = Complex64::from_polar(a, p);
            let dg = g * Complex64::new(da / a, dp);
            assert!((phase_slope(cv(g), cv(dg)).unwrap() - dp).abs() < 1e-14 * (1.0 + dp.abs()));
        }
    }

    #[test]
    fn curves_start_at_zero() {
        let p = nonrel(1.0);
        let x_e = exit_point(&p);
        let grid: Vec<f64> = (0..6).map(|k| k as f64 * x_e).collect();
        let c = wigner_time_curve(&grid, &p, &WignerOptions::default()).unwrap();
        assert_eq!(c.samples[0].value, Some(0.0));
        assert!(c.samples.iter().all(|s| s.value.unwrap().is_finite()));

        let p = rel(1.0);
        let x_e = exit_point(&p);
        let grid: Vec<f64> = (0..6).map(|k| k as f64 * x_e).collect();
        let (t, z) = wigner_curves(&grid, &p, &WignerOptions::default()).unwrap();
        assert_eq!(t.samples[0].value, Some(0.0));
        assert_eq!(z.unwrap().samples[0].value, Some(0.0));
    }

    #[test]
    fn field_free_curves_are_flat() {
        let p = ScenarioParams { e0: 0.0, ratio: 0.0, ..rel(1.0) };
        let grid = [-0.3, -0.2, -0.1, 0.0];
        let (t, z) = wigner_curves(&grid, &p, &WignerOptions::default()).unwrap();
        for s in t.samples.iter().chain(&z.unwrap().samples) {
            assert!(s.value.unwrap().abs() < 1e-9, "{s:?}");
        }
    }

    #[test]
    fn constant_phase_is_invisible() {
        let p = rel(1.0);
        let x_e = exit_point(&p);
        let grid: Vec<f64> = (0..5).map(|k| 3.0 * k as f64 * x_e).collect();
        let plain = wigner_curves(&grid, &p, &WignerOptions::default()).unwrap();
        let turned =
            wigner_curves(&grid, &p, &WignerOptions { phase_offset: 2.1, ..WignerOptions::default() }).unwrap();
        let all = |c: &(TrajectoryCurve, Option<TrajectoryCurve>)| {
            let mut v = c.0.values();
            v.extend(c.1.as_ref().unwrap().values());
            v
        };
        for (a, b) in all(&plain).into_iter().zip(all(&turned)) {
            let (a, b) = (a.unwrap(), b.unwrap());
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn finite_differences_agree() {
        for p in [nonrel(1.0 / 7.0), nonrel(1.0), rel(1.0), rel(10.0)] {
            let x_e = exit_point(&p);
            let grid: Vec<f64> = [0.5, 2.0, 15.0].iter().map(|m| m * x_e).collect();
            let a = wigner_curves(&grid, &p, &WignerOptions::default()).unwrap();
            let fd = WignerOptions { derivative: DerivativeMethod::FiniteDifference, ..WignerOptions::default() };
            let b = wigner_curves(&grid, &p, &fd).unwrap();
            for (u, v) in a.0.values().iter().zip(b.0.values()) {
                assert!((u.unwrap() - v.unwrap()).abs() < 1e-5, "{:?}: {u:?} vs {v:?}", p.ratio);
            }
            if let (Some(za), Some(zb)) = (a.1, b.1) {
                for (u, v) in za.values().iter().zip(zb.values()) {
                    assert!((u.unwrap() - v.unwrap()).abs() < 1e-5, "z: {u:?} vs {v:?}");
                }
            }
        }
    }

    #[test]
    fn identical_curves_have_no_delay() {
        let p = nonrel(1.0);
        let grid = [0.0, 1.0, 2.0, 3.0];
        let (c, _) = classical_curves(&grid, &p).unwrap();
        let r = wigner_delay(&c, &c, (1.0, 3.0)).unwrap();
        assert_eq!((r.tau_w, r.plateau_spread, r.samples), (0.0, 0.0, 3));
        assert!(r.converged);
    }

    #[test]
    fn delay_needs_a_common_grid() {
        let p = nonrel(1.0);
        let (a, _) = classical_curves(&[0.0, 1.0], &p).unwrap();
        let (b, _) = classical_curves(&[0.0, 1.5], &p).unwrap();
        assert!(wigner_delay(&a, &b, (0.0, 2.0)).is_err());
        assert!(wigner_delay(&a, &a, (5.0, 6.0)).is_err());
    }

    #[test]
    fn saddle_curve_is_classical() {
        for ratio in [1.0 / 7.0, 1.0] {
            let p = nonrel(ratio);
            let x_e = exit_point(&p);
            let grid: Vec<f64> = (0..=80).map(|k| k as f64 * 0.0625 * x_e).collect();
            let s = saddle_mode_curve(&grid, &p).unwrap();
            let (c, _) = classical_curves(&grid, &p).unwrap();
            for (a, b) in s.samples.iter().zip(&c.samples) {
                if a.x < x_e {
                    assert!(a.value.unwrap().abs() < 1e-12, "{a:?}");
                } else if a.x >= 1.05 * x_e {
                    assert_eq!(a.flag, SampleFlag::Ok);
                    assert!((a.value.unwrap() - b.value.unwrap()).abs() < 1e-6, "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn saddle_at_the_exit_is_flagged() {
        let p = nonrel(1.0);
        let x_e = exit_point(&p);
        let s = saddle_mode_curve(&[x_e * (1.0 + 1e-7)], &p).unwrap();
        assert_eq!(s.samples[0].flag, SampleFlag::DegenerateSaddle);
        assert!(s.samples[0].value.unwrap().abs() < 1e-3);
    }

    #[test]
    fn non_monotone_grid_is_rejected() {
        let p = nonrel(1.0);
        assert!(classical_curves(&[0.0, 1.0, 1.0], &p).is_err());
        assert!(saddle_mode_curve(&[], &p).is_err());
    }

    #[test]
    fn unwrapping_guards_jumps() {
        let v: Vec<Complex64> = (0..10).map(|k| Complex64::from_polar(1.0, 0.9 * k as f64)).collect();
        let u = unwrapped_phase(&v).unwrap();
        assert!((u[9] - 8.1).abs() < 1e-12);
        let w = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!(unwrapped_phase(&w).is_err());
    }
}
