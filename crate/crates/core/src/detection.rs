//! Two-tone local oscillators and the detector figures of merit.
//!
//! A two-tone LO with amplitudes `alpha_plus`, `alpha_minus` at the carrier
//! plus/minus `omega_s` measures the normalized spinor
//! `alpha_am = (alpha_plus + conj(alpha_minus)) / sqrt(2 I)`,
//! `alpha_pm = i (conj(alpha_plus) - alpha_minus) / sqrt(2 I)` with
//! `I = |alpha_plus|^2 + |alpha_minus|^2`. With `omega_s = omega_m` the
//! mechanical sidebands fold onto dc, where the detector noise is
//! [`synodyne_psd_dc`]. All figures of merit here use `omega_s = omega_m`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::{covariance_at, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::model::{responses, SystemParams};
use crate::numeric::{bracket_minimum, brent_minimize};

const NORM_TOL: f64 = 1e-12;

/// Complex amplitudes of the two LO tones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoTones {
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    pub omega_s: f64,
}

impl LoTones {
    pub fn new(alpha_plus: Complex64, alpha_minus: Complex64, omega_s: f64) -> Result<Self> {
        let tones = LoTones {
            alpha_plus,
            alpha_minus,
            omega_s,
        };
        if !(omega_s.is_finite() && omega_s > 0.0) {
            return Err(Error::param(
                "omega_s",
                format!("must be finite and > 0, got {omega_s}"),
            ));
        }
        if tones.intensity() == 0.0 {
            return Err(Error::ZeroIntensity);
        }
        Ok(tones)
    }

    pub fn intensity(&self) -> f64 {
        self.alpha_plus.norm_sqr() + self.alpha_minus.norm_sqr()
    }

    /// LO envelope `alpha(t) = alpha_plus e^{+i omega_s t} + alpha_minus e^{-i omega_s t}`
    /// in the time convention where the susceptibility carries `+i omega gamma_m`.
    ///
    /// With this orientation the dc output of a detector measuring
    /// `Re(alpha) X_AM + Im(alpha) X_PM` has exactly the noise of
    /// [`synodyne_psd_dc`] once divided by `sqrt(I)`.
    pub fn envelope(&self, t: f64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, self.omega_s * t);
        self.alpha_plus * rot + self.alpha_minus * rot.conj()
    }
}

/// Normalized measurement spinor `(alpha_am, alpha_pm)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoSpinor {
    pub alpha_am: Complex64,
    pub alpha_pm: Complex64,
}

impl LoSpinor {
    /// Accepts a spinor that is already normalized to `1e-12`.
    pub fn new(alpha_am: Complex64, alpha_pm: Complex64) -> Result<Self> {
        let s = LoSpinor { alpha_am, alpha_pm };
        let n = s.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "spinor norm^2 is {n}, expected 1"
            )));
        }
        Ok(s)
    }

    /// Rescales any nonzero pair onto the unit sphere.
    pub fn normalized(alpha_am: Complex64, alpha_pm: Complex64) -> Result<Self> {
        let n = (alpha_am.norm_sqr() + alpha_pm.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput("cannot normalize a zero spinor".into()));
        }
        Ok(LoSpinor {
            alpha_am: alpha_am / n,
            alpha_pm: alpha_pm / n,
        })
    }

    pub fn amplitude() -> Self {
        LoSpinor {
            alpha_am: Complex64::new(1.0, 0.0),
            alpha_pm: Complex64::new(0.0, 0.0),
        }
    }

    pub fn phase() -> Self {
        LoSpinor {
            alpha_am: Complex64::new(0.0, 0.0),
            alpha_pm: Complex64::new(1.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha_am.norm_sqr() + self.alpha_pm.norm_sqr()
    }

    pub fn pow_am(&self) -> f64 {
        self.alpha_am.norm_sqr()
    }

    pub fn pow_pm(&self) -> f64 {
        self.alpha_pm.norm_sqr()
    }

    /// Multiplies both components by `e^{i phi}`.
    pub fn rephased(&self, phi: f64) -> Self {
        let r = Complex64::from_polar(1.0, phi);
        LoSpinor {
            alpha_am: self.alpha_am * r,
            alpha_pm: self.alpha_pm * r,
        }
    }
}

pub fn spinor_from_tones(tones: &LoTones) -> Result<LoSpinor> {
    let intensity = tones.intensity();
    if intensity == 0.0 {
        return Err(Error::ZeroIntensity);
    }
    let scale = (2.0 * intensity).sqrt();
    let (p, m) = (tones.alpha_plus, tones.alpha_minus);
    Ok(LoSpinor {
        alpha_am: (p + m.conj()) / scale,
        alpha_pm: Complex64::i() * (p.conj() - m) / scale,
    })
}

/// Inverse of [`spinor_from_tones`] at a chosen total intensity.
pub fn tones_from_spinor(spinor: &LoSpinor, intensity: f64, omega_s: f64) -> Result<LoTones> {
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(Error::param(
            "intensity",
            format!("must be finite and > 0, got {intensity}"),
        ));
    }
    let spinor = LoSpinor::new(spinor.alpha_am, spinor.alpha_pm)?;
    let scale = (0.5 * intensity).sqrt();
    let i = Complex64::i();
    let alpha_plus = scale * (spinor.alpha_am + i * spinor.alpha_pm.conj());
    let alpha_minus = scale * (spinor.alpha_am.conj() + i * spinor.alpha_pm);
    LoTones::new(alpha_plus, alpha_minus, omega_s)
}

/// Noise spectral density of the synodyne output at dc:
/// `|a|^2 c11 + |b|^2 c22 + 2 Re(conj(a) conj(b) c12)`.
pub fn synodyne_psd_dc(cov: &CovarianceMatrix, spinor: &LoSpinor) -> f64 {
    let a = spinor.alpha_am;
    let b = spinor.alpha_pm;
    a.norm_sqr() * cov.c11 + b.norm_sqr() * cov.c22 + 2.0 * (a.conj() * b.conj() * cov.c12).re
}

/// `|T_p(omega_m)|^2`, the phase-quadrature transduction of a resonant force.
pub fn resonant_transduction(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    if params.g == 0.0 {
        return Err(Error::NoTransduction);
    }
    Ok(responses(params, params.omega_m).t_p.norm_sqr())
}

/// Force imprecision of the dc synodyne signal,
/// `S_syn(0) / (2 |alpha_pm|^2 |T_p(omega_m)|^2)`, in units of the thermal
/// input noise of the oscillator.
pub fn force_imprecision(params: &SystemParams, spinor: &LoSpinor) -> Result<f64> {
    if spinor.pow_pm() == 0.0 {
        return Err(Error::NoSignal);
    }
    let tp2 = resonant_transduction(params)?;
    let cov = covariance_at(params, params.omega_m)?;
    Ok(synodyne_psd_dc(&cov, spinor) / (2.0 * spinor.pow_pm() * tp2))
}

/// Imprecision of a phase-quadrature homodyne measurement on resonance,
/// `c22 / (2 |T_p|^2)`.
pub fn homodyne_imprecision(params: &SystemParams) -> Result<f64> {
    force_imprecision(params, &LoSpinor::phase())
}

/// Standard quantum limit: the phase-quadrature homodyne imprecision
/// minimized over the cooperativity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqlPoint {
    pub c_om_star: f64,
    pub s_sql: f64,
}

/// Minimizes [`homodyne_imprecision`] over `C_OM > 0` with Brent's method
/// in `ln C_OM`. The coupling of `template` is ignored.
pub fn sql(template: &SystemParams) -> Result<SqlPoint> {
    template.validate()?;
    let mut bad = None;
    let mut objective = |u: f64| match homodyne_imprecision(&template.with_cooperativity(u.exp())) {
        Ok(v) => v,
        Err(e) => {
            bad = Some(e);
            f64::NAN
        }
    };
    let bracket = bracket_minimum(&mut objective, 0.0, 0.5, 200)?;
    let (u, s) = brent_minimize(&mut objective, bracket, 1e-10, 500)?;
    if let Some(e) = bad {
        return Err(e);
    }
    Ok(SqlPoint {
        c_om_star: u.exp(),
        s_sql: s,
    })
}
