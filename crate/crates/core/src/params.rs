//! Physical parameters of a tunneling scenario in atomic units.
//!
//! A scenario is fixed by the atomic momentum `kappa`, the barrier
//! suppression ratio `E0/Ea` and the regime. Everything else follows:
//! the atomic field `Ea = kappa^3`, the ionization potential and the
//! bound-state energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in atomic units.
pub const SPEED_OF_LIGHT: f64 = 137.035999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Nonrelativistic,
    Relativistic,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Nonrelativistic => "nonrelativistic",
            Regime::Relativistic => "relativistic",
        }
    }
}

/// Derived quantities of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub regime: Regime,
    pub kappa: f64,
    pub c: f64,
    /// Ionization potential.
    pub ip: f64,
    /// Energy of the incoming state: `-Ip` nonrelativistically, `c^2 - Ip` otherwise.
    pub eps0: f64,
    /// Atomic field `kappa^3`.
    pub ea: f64,
    /// Field strength `ratio * Ea`.
    pub e0: f64,
    pub ratio: f64,
}

/// Derives the scenario parameters from `(kappa, E0/Ea)` and the regime.
///
/// The relativistic ionization potential is the ground-state binding
/// energy of an H-like ion, `c^2 - sqrt(c^4 - c^2 kappa^2)`, evaluated in
/// the cancellation-free form `kappa^2 / (1 + sqrt(1 - kappa^2/c^2))`.
pub fn derive_params(regime: Regime, kappa: f64, ratio: f64, c: f64) -> Result<ScenarioParams> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::Domain(format!("field ratio must be positive, got {ratio}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain(format!("speed of light must be positive, got {c}")));
    }
    let ea = kappa * kappa * kappa;
    let e0 = ratio * ea;
    let (ip, eps0) = match regime {
        Regime::Nonrelativistic => {
            let ip = 0.5 * kappa * kappa;
            (ip, -ip)
        }
        Regime::Relativistic => {
            if kappa >= c {
                return Err(Error::Domain(format!(
                    "relativistic ionization potential undefined for kappa = {kappa} >= c = {c}"
                )));
            }
            let beta2 = (kappa / c) * (kappa / c);
            let ip = kappa * kappa / (1.0 + (1.0 - beta2).sqrt());
            (ip, c * c - ip)
        }
    };
    Ok(ScenarioParams { regime, kappa, c, ip, eps0, ea, e0, ratio })
}

/// Keldysh parameter `omega sqrt(2 Ip) / E0`. Only a diagnostic: the
/// static and crossed fields treated here correspond to `gamma -> 0`.
pub fn keldysh_gamma(omega: f64, ip: f64, e0: f64) -> f64 {
    omega * (2.0 * ip).sqrt() / e0
}
