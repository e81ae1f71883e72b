//! Resonant force estimation from the demodulated synodyne signal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::demod::SynodyneDemodulator;
use super::simulate::{ForceProfile, SimConfig, Simulator};
use super::state_space::StateSpace;
use crate::detection::{spinor_from_tones, LoTones};
use crate::error::{Error, Result};

/// Noiseless response of the mean demodulated signal to a unit force at
/// phase 0 and at phase pi/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceCalibration {
    pub gain_cos: f64,
    pub gain_sin: f64,
}

fn mean_xi(ss: &StateSpace, cfg: &SimConfig, demod: &SynodyneDemodulator) -> Result<f64> {
    let mut sim = Simulator::new(ss, cfg)?;
    let n = cfg.samples();
    let mut sum = 0.0;
    for k in 0..n as u64 {
        let t = sim.time_of(k);
        let [am, pm] = sim.next_sample();
        sum += demod.xi(t, am, pm);
    }
    let mean = sum / n as f64;
    if !mean.is_finite() {
        return Err(Error::NumericalFailure(
            "non-finite demodulated mean".into(),
        ));
    }
    Ok(mean)
}

impl ForceCalibration {
    /// Calibrate against the record length and step of `cfg`, with the force
    /// at `cfg.force`'s frequency (the tone frequency if absent).
    pub fn measure(ss: &StateSpace, cfg: &SimConfig, tones: &LoTones) -> Result<Self> {
        let quiet = ss.without_noise();
        let demod = SynodyneDemodulator::new(tones);
        let frequency = cfg.force.map_or(tones.omega_s, |f| f.frequency);
        let unit = |phase: f64| {
            cfg.with_force(Some(ForceProfile {
                amplitude: 1.0,
                frequency,
                phase,
            }))
        };
        let gain_cos = mean_xi(&quiet, &unit(0.0), &demod)?;
        let gain_sin = mean_xi(&quiet, &unit(std::f64::consts::FRAC_PI_2), &demod)?;
        Ok(ForceCalibration { gain_cos, gain_sin })
    }

    /// Force phase the detector is most sensitive to.
    pub fn detection_phase(&self) -> f64 {
        self.gain_sin.atan2(self.gain_cos)
    }

    pub fn gain(&self) -> f64 {
        self.gain_cos.hypot(self.gain_sin)
    }

    /// Response to a unit force at `phase`.
    pub fn gain_at(&self, phase: f64) -> f64 {
        self.gain_cos * phase.cos() + self.gain_sin * phase.sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceEstimate {
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// Mean plus or minus three standard errors.
    pub interval: (f64, f64),
    pub record_time: f64,
    /// `Var(F) T / 4`, comparable with the single-sided-amplitude imprecision.
    pub normalized_variance: f64,
    pub calibration: ForceCalibration,
}

/// Independent force estimates over `repetitions` runs of `cfg`, each read
/// out at the calibrated detection phase. A force at another temporal phase
/// contributes only its component along the detection phase. Run `r` uses
/// RNG run index `cfg.run + r`.
pub fn estimate_force(
    ss: &StateSpace,
    cfg: &SimConfig,
    tones: &LoTones,
    calibration: &ForceCalibration,
    repetitions: usize,
) -> Result<ForceEstimate> {
    if repetitions < 2 {
        return Err(Error::param("repetitions", "need at least 2"));
    }
    if spinor_from_tones(tones)?.pow_pm() == 0.0 {
        return Err(Error::NoSignal);
    }
    let gain = calibration.gain();
    if !(gain > 0.0) {
        return Err(Error::NoSignal);
    }
    let demod = SynodyneDemodulator::new(tones);
    let estimates = (0..repetitions as u64)
        .into_par_iter()
        .map(|r| mean_xi(ss, &cfg.with_run(cfg.run + r), &demod).map(|m| m / gain))
        .collect::<Result<Vec<f64>>>()?;
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std_error = (var / n).sqrt();
    let record_time = cfg.samples() as f64 * cfg.dt;
    Ok(ForceEstimate {
        estimates,
        mean,
        std_error,
        interval: (mean - 3.0 * std_error, mean + 3.0 * std_error),
        record_time,
        normalized_variance: var * record_time / 4.0,
        calibration: *calibration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{tones_from_spinor, LoSpinor};
    use crate::langevin::build_state_space;
    use crate::model::{make_params, responses, Coupling};
    use num_complex::Complex64;

    #[test]
    fn calibration_matches_transduction() {
        let p = make_params(0.2, 0.01, 0.0, Coupling::Cooperativity(0.9)).unwrap();
        let ss = build_state_space(&p).unwrap();
        let spinor =
            LoSpinor::normalized(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let tones = tones_from_spinor(&spinor, 1.0, 0.2).unwrap();
        let cfg = SimConfig::new(0.125, 20000.0, 0);
        let cal = ForceCalibration::measure(&ss, &cfg, &tones).unwrap();
        let expected = spinor.pow_pm().sqrt() * responses(&p, 0.2).t_p.norm() / 2.0f64.sqrt();
        assert!(
            (cal.gain() / expected - 1.0).abs() < 2e-3,
            "{} vs {expected}",
            cal.gain()
        );
    }

    #[test]
    fn amplitude_only_tones_have_no_signal() {
        let p = make_params(0.2, 0.01, 0.0, Coupling::Cooperativity(0.9)).unwrap();
        let ss = build_state_space(&p).unwrap();
        let tones = tones_from_spinor(&LoSpinor::amplitude(), 1.0, 0.2).unwrap();
        let cfg = SimConfig::new(0.125, 1000.0, 0);
        let cal = ForceCalibration {
            gain_cos: 1.0,
            gain_sin: 0.0,
        };
        assert_eq!(
            estimate_force(&ss, &cfg, &tones, &cal, 4),
            Err(Error::NoSignal)
        );
    }

    #[test]
    fn noiseless_estimate_recovers_force() {
        let p = make_params(0.2, 0.01, 0.0, Coupling::Cooperativity(0.9)).unwrap();
        let ss = build_state_space(&p).unwrap().without_noise();
        let tones = tones_from_spinor(&LoSpinor::phase(), 1.0, 0.2).unwrap();
        let base = SimConfig::new(0.125, 5000.0, 0);
        let cal = ForceCalibration::measure(&ss, &base, &tones).unwrap();
        let cfg = base.with_force(Some(ForceProfile {
            amplitude: 2.5,
            frequency: 0.2,
            phase: cal.detection_phase(),
        }));
        let est = estimate_force(&ss, &cfg, &tones, &cal, 2).unwrap();
        assert!((est.mean - 2.5).abs() < 1e-9);
        assert!(est.std_error < 1e-12);

        let orthogonal = base.with_force(Some(ForceProfile {
            amplitude: 2.5,
            frequency: 0.2,
            phase: cal.detection_phase() + std::f64::consts::FRAC_PI_2,
        }));
        let est = estimate_force(&ss, &orthogonal, &tones, &cal, 2).unwrap();
        assert!(est.mean.abs() < 1e-9);
    }
}
