//! Two-tone demodulation of simulated output quadratures.

use std::f64::consts::PI;

use super::{TimeSeries, AM_OUT, PM_OUT, XI};
use crate::detection::LoTones;
use crate::error::{Error, Result};

/// Projects `(X_AM, X_PM)` onto the normalized LO envelope:
/// `xi(t) = (Re alpha(t) X_AM + Im alpha(t) X_PM) / sqrt(I)`.
#[derive(Debug, Clone, Copy)]
pub struct SynodyneDemodulator {
    tones: LoTones,
    inv_sqrt_i: f64,
}

impl SynodyneDemodulator {
    pub fn new(tones: &LoTones) -> Self {
        SynodyneDemodulator {
            tones: *tones,
            inv_sqrt_i: 1.0 / tones.intensity().sqrt(),
        }
    }

    pub fn xi(&self, t: f64, am: f64, pm: f64) -> f64 {
        let a = self.tones.envelope(t) * self.inv_sqrt_i;
        a.re * am + a.im * pm
    }
}

/// Single-channel series `xi` from a record holding both output quadratures.
pub fn demodulate_synodyne(ts: &TimeSeries, tones: &LoTones) -> Result<TimeSeries> {
    let am = ts
        .channel(AM_OUT)
        .ok_or_else(|| Error::InvalidInput(format!("record lacks channel {AM_OUT}")))?;
    let pm = ts
        .channel(PM_OUT)
        .ok_or_else(|| Error::InvalidInput(format!("record lacks channel {PM_OUT}")))?;
    let d = SynodyneDemodulator::new(tones);
    let xi = am
        .iter()
        .zip(pm)
        .enumerate()
        .map(|(k, (&a, &p))| d.xi(ts.time(k), a, p))
        .collect();
    Ok(TimeSeries {
        dt: ts.dt,
        t0: ts.t0,
        names: vec![XI.to_string()],
        channels: vec![xi],
    })
}

/// `int r(t) cos(omega t - xi) dt` over the record for each `xi` in the grid.
pub fn temporal_phase_components(
    record: &[f64],
    dt: f64,
    t0: f64,
    omega: f64,
    xi_grid: &[f64],
) -> Result<Vec<f64>> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::param("omega", "must be positive and finite"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", "must be positive and finite"));
    }
    let duration = record.len() as f64 * dt;
    if duration < 100.0 * 2.0 * PI / omega {
        return Err(Error::InvalidInput(format!(
            "record of length {duration} spans fewer than 100 periods at omega = {omega}"
        )));
    }
    let (mut c, mut s) = (0.0, 0.0);
    for (k, &r) in record.iter().enumerate() {
        let (sn, cs) = (omega * (t0 + k as f64 * dt)).sin_cos();
        c += r * cs;
        s += r * sn;
    }
    Ok(xi_grid
        .iter()
        .map(|x| dt * (c * x.cos() + s * x.sin()))
        .collect())
}
