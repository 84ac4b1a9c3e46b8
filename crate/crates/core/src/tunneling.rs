//! Crossed-field transmission `|G(x_e)|^2 / |G(0)|^2` and the momentum along
//! the propagation direction picked up while tunneling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::exit_rel;
use crate::error::{Error, Result};
use crate::params::ScenarioParams;
use crate::propagator_rel::{green_rel_scaled, RelPropArgs};
use crate::quadrature::ContourSpec;

/// Kinetic momentum `q_z(x) = pz - x E0/c`.
pub fn kinetic_momentum(x: f64, pz: f64, e0: f64, c: f64) -> f64 {
    pz - x * e0 / c
}

/// `ln |T|^2` at canonical momentum `pz`, from the logarithms of both
/// magnitudes so that deep-barrier values do not underflow.
pub fn ln_transmission(pz: f64, params: &ScenarioParams, contour: &ContourSpec) -> Result<f64> {
    let x_e = exit_rel(pz, params.ip, params.e0, params.c)?;
    if x_e == 0.0 {
        return Ok(0.0);
    }
    let at = |x: f64| green_rel_scaled(&RelPropArgs::new(x, params.eps0, pz, params.e0, params.c), contour);
    let exit = at(x_e)?;
    let entry = at(0.0)?;
    Ok(2.0 * (exit.ln_abs() - entry.ln_abs()))
}

pub fn transmission(pz: f64, params: &ScenarioParams, contour: &ContourSpec) -> Result<f64> {
    ln_transmission(pz, params, contour).map(f64::exp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumScan {
    pub pz_grid: Vec<f64>,
    /// Transmission normalized to its largest grid value.
    pub t2: Vec<f64>,
    pub pz_star: f64,
    /// Exit point at `pz_star`.
    pub x_e: f64,
    pub qz_entry: f64,
    pub qz_exit: f64,
    pub transfer: f64,
    /// The maximum sits on the first or last grid point.
    pub edge_peak: bool,
}

/// Position of the maximum of sampled `ln f`, refined by the parabola
/// through the largest sample and its neighbours. The flag is set when the
/// largest sample is at either end.
pub fn refine_peak(grid: &[f64], ln_values: &[f64]) -> (f64, bool) {
    let k = ln_values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap_or(0);
    if k == 0 || k + 1 >= grid.len() {
        return (grid[k], true);
    }
    let (x0, x1, x2) = (grid[k - 1], grid[k], grid[k + 1]);
    let (y0, y1, y2) = (ln_values[k - 1], ln_values[k], ln_values[k + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return (x1, false);
    }
    (x1 - 0.5 * num / den, false)
}

/// Scans `pz` over `range` on `n` equidistant points.
pub fn scan_pz(params: &ScenarioParams, range: (f64, f64), n: usize, contour: &ContourSpec) -> Result<MomentumScan> {
    if n < 3 || !(range.1 > range.0) {
        return Err(Error::Domain(format!("scan needs n >= 3 and a nonempty range, got {n}, {range:?}")));
    }
    let pz_grid: Vec<f64> = (0..n).map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64).collect();
    let ln_t2: Vec<f64> = pz_grid.par_iter().map(|&pz| ln_transmission(pz, params, contour)).collect::<Result<_>>()?;
    let top = ln_t2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let t2 = ln_t2.iter().map(|v| (v - top).exp()).collect();
    let (pz_star, edge_peak) = refine_peak(&pz_grid, &ln_t2);
    let x_e = exit_rel(pz_star, params.ip, params.e0, params.c)?;
    let qz_exit = kinetic_momentum(x_e, pz_star, params.e0, params.c);
    Ok(MomentumScan { pz_grid, t2, pz_star, x_e, qz_entry: pz_star, qz_exit, transfer: qz_exit - pz_star, edge_peak })
}

/// Default scan range `[-3 Ip/(2c), Ip/c]`.
pub fn default_pz_range(params: &ScenarioParams) -> (f64, f64) {
    (-1.5 * params.ip / params.c, params.ip / params.c)
}
