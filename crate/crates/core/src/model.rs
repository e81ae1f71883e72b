//! System parameters and the closed-form linear response of a resonantly
//! pumped, one-sided optomechanical cavity.
//!
//! All frequencies and rates are expressed in units of the cavity energy
//! decay rate, so [`make_params`] always returns `kappa = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the linearized optomechanical system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Mechanical resonance frequency.
    pub omega_m: f64,
    /// Cavity energy decay rate.
    pub kappa: f64,
    /// Mechanical energy decay rate.
    pub gamma_m: f64,
    /// Thermal phonon occupation of the mechanical bath.
    pub nbar: f64,
    /// Dressed optomechanical coupling.
    pub g: f64,
    /// Pump detuning from the cavity resonance. Only zero is supported.
    pub delta: f64,
}

/// Either form of specifying the optomechanical coupling strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    G(f64),
    Cooperativity(f64),
}

impl Coupling {
    /// Resolves the `(G, C_OM)` option pair used by config files and flags.
    pub fn from_options(g: Option<f64>, cooperativity: Option<f64>) -> Result<Self> {
        match (g, cooperativity) {
            (Some(g), None) => Ok(Coupling::G(g)),
            (None, Some(c)) => Ok(Coupling::Cooperativity(c)),
            (Some(_), Some(_)) => Err(Error::AmbiguousCoupling("both")),
            (None, None) => Err(Error::AmbiguousCoupling("neither")),
        }
    }
}

/// Builds parameters in cavity-linewidth units (`kappa = 1`, `delta = 0`).
pub fn make_params(
    omega_m: f64,
    gamma_m: f64,
    nbar: f64,
    coupling: Coupling,
) -> Result<SystemParams> {
    let mut p = SystemParams {
        omega_m,
        kappa: 1.0,
        gamma_m,
        nbar,
        g: 0.0,
        delta: 0.0,
    };
    p.check_rates()?;
    p.g = match coupling {
        Coupling::G(g) => g,
        Coupling::Cooperativity(c) => {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::param(
                    "cooperativity",
                    format!("must be finite and >= 0, got {c}"),
                ));
            }
            g_from_cooperativity(c, p.kappa, p.gamma_m)
        }
    };
    p.validate()?;
    Ok(p)
}

/// `C_OM = 2 G^2 / (kappa gamma_m)`.
pub fn cooperativity(params: &SystemParams) -> f64 {
    2.0 * params.g * params.g / (params.kappa * params.gamma_m)
}

pub fn g_from_cooperativity(c_om: f64, kappa: f64, gamma_m: f64) -> f64 {
    (0.5 * c_om * kappa * gamma_m).sqrt()
}

impl SystemParams {
    fn check_rates(&self) -> Result<()> {
        for (name, v) in [
            ("omega_m", self.omega_m),
            ("kappa", self.kappa),
            ("gamma_m", self.gamma_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(Error::param(
                "nbar",
                format!("must be finite and >= 0, got {}", self.nbar),
            ));
        }
        Ok(())
    }

    /// Checks every invariant, including the resonant-pumping restriction.
    pub fn validate(&self) -> Result<()> {
        self.check_rates()?;
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::param(
                "g",
                format!("must be finite and >= 0, got {}", self.g),
            ));
        }
        if self.delta != 0.0 {
            return Err(Error::UnsupportedDetuning(self.delta));
        }
        Ok(())
    }

    pub fn cooperativity(&self) -> f64 {
        cooperativity(self)
    }

    /// Copy of `self` with the coupling set from a cooperativity.
    pub fn with_cooperativity(&self, c_om: f64) -> Self {
        SystemParams {
            g: g_from_cooperativity(c_om, self.kappa, self.gamma_m),
            ..*self
        }
    }
}

/// Response functions evaluated at a single frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseSet {
    pub omega: f64,
    pub chi_m: Complex64,
    pub chi_ba: Complex64,
    pub t_q: Complex64,
    pub t_p: Complex64,
}

/// Mechanical susceptibility `1 / (gamma_m^2/4 + omega_m^2 - omega^2 + i omega gamma_m)`.
pub fn mech_susceptibility(params: &SystemParams, omega: f64) -> Complex64 {
    let g = params.gamma_m;
    let re = 0.25 * g * g + params.omega_m * params.omega_m - omega * omega;
    Complex64::new(re, omega * g).inv()
}

/// Back-action and transduction functions sharing one susceptibility evaluation.
pub fn responses(params: &SystemParams, omega: f64) -> ResponseSet {
    let chi_m = mech_susceptibility(params, omega);
    let k = params.kappa;
    let gm = params.gamma_m;
    let cavity = Complex64::new(0.5 * k, omega);
    let lead = params.g * (k * gm).sqrt();

    let t_q = lead * Complex64::new(0.5 * gm, omega) / cavity * chi_m;
    let t_p = lead * params.omega_m / cavity * chi_m;
    let chi_ba = back_action_prefactor(params, omega) * chi_m;

    ResponseSet {
        omega,
        chi_m,
        chi_ba,
        t_q,
        t_p,
    }
}

/// Real prefactor `G^2 kappa omega_m / (kappa^2/4 + omega^2)` relating the
/// back-action response to the susceptibility.
pub fn back_action_prefactor(params: &SystemParams, omega: f64) -> f64 {
    let k = params.kappa;
    params.g * params.g * k * params.omega_m / (0.25 * k * k + omega * omega)
}

/// Cavity all-pass factor `(kappa/2 - i omega) / (kappa/2 + i omega)`.
///
/// The closed-form responses absorb this phase into the optical input
/// noise; it reappears only when comparing against an explicit state-space
/// realization.
#[cfg(test)]
pub(crate) fn cavity_all_pass(params: &SystemParams, omega: f64) -> Complex64 {
    let half = 0.5 * params.kappa;
    Complex64::new(half, -omega) / Complex64::new(half, omega)
}
