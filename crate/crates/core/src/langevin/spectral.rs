//! Welch power and cross spectral density estimation.
//!
//! Densities are two-sided, `S(omega) = int <X(t) X(0)> e^{-i omega t} dt`,
//! reported on the non-negative frequency bins. Vacuum noise reads 1/2.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use super::demod::SynodyneDemodulator;
use super::simulate::{SimConfig, Simulator};
use super::state_space::StateSpace;
use crate::detection::LoTones;
use crate::error::{Error, Result};

/// Single-channel spectrum with per-bin standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub psd: Vec<f64>,
    pub stderr: Vec<f64>,
    pub segments: usize,
    pub effective_segments: f64,
}

impl Spectrum {
    /// `sum_k S_k d_omega` over the full two-sided grid; equals
    /// `2 pi` times the variance for a stationary record.
    pub fn total_power(&self) -> f64 {
        let n = self.psd.len();
        if n < 2 {
            return 0.0;
        }
        let d_omega = self.omega[1] - self.omega[0];
        let full_len = 2 * (n - 1);
        let interior: f64 = self.psd[1..n - 1].iter().sum();
        let nyquist = self.psd[n - 1] * if full_len.is_multiple_of(2) { 1.0 } else { 2.0 };
        (self.psd[0] + 2.0 * interior + nyquist) * d_omega
    }

    pub fn nearest_bin(&self, omega: f64) -> usize {
        nearest(&self.omega, omega)
    }
}

fn nearest(grid: &[f64], omega: f64) -> usize {
    let d = grid.get(1).map_or(1.0, |g1| g1 - grid[0]);
    ((omega / d).round().max(0.0) as usize).min(grid.len() - 1)
}

/// Averaged cross spectral matrix of several channels.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSpectrum {
    pub omega: Vec<f64>,
    pub n_channels: usize,
    pub segments: usize,
    pub effective_segments: f64,
    pub segment_length: usize,
    values: Vec<Complex64>,
}

impl CrossSpectrum {
    pub fn bins(&self) -> usize {
        self.omega.len()
    }

    /// `S_ij` at `bin`, the average of `X_i conj(X_j)`.
    pub fn get(&self, bin: usize, i: usize, j: usize) -> Complex64 {
        self.values[(bin * self.n_channels + i) * self.n_channels + j]
    }

    pub fn auto(&self, i: usize) -> Vec<f64> {
        (0..self.bins()).map(|b| self.get(b, i, i).re).collect()
    }

    /// Dc and Nyquist bins carry real Fourier coefficients.
    fn is_real_bin(&self, bin: usize) -> bool {
        bin == 0 || (self.segment_length.is_multiple_of(2) && bin == self.segment_length / 2)
    }

    pub fn auto_stderr(&self, i: usize, bin: usize) -> f64 {
        let s = self.get(bin, i, i).re;
        let factor = if self.is_real_bin(bin) {
            2.0f64.sqrt()
        } else {
            1.0
        };
        factor * s / self.effective_segments.sqrt()
    }

    /// Standard errors of the real and imaginary parts of `S_ij`.
    pub fn cross_stderr(&self, i: usize, j: usize, bin: usize) -> (f64, f64) {
        let sii = self.get(bin, i, i).re;
        let sjj = self.get(bin, j, j).re;
        let c = self.get(bin, i, j);
        let m = self.effective_segments;
        if self.is_real_bin(bin) {
            (((sii * sjj + c.re * c.re) / m).sqrt(), 0.0)
        } else {
            let var_re = (sii * sjj + c.re * c.re - c.im * c.im) / (2.0 * m);
            let var_im = (sii * sjj - c.re * c.re + c.im * c.im) / (2.0 * m);
            (var_re.max(0.0).sqrt(), var_im.max(0.0).sqrt())
        }
    }

    pub fn nearest_bin(&self, omega: f64) -> usize {
        nearest(&self.omega, omega)
    }

    pub fn spectrum(&self, i: usize) -> Spectrum {
        Spectrum {
            omega: self.omega.clone(),
            psd: self.auto(i),
            stderr: (0..self.bins()).map(|b| self.auto_stderr(i, b)).collect(),
            segments: self.segments,
            effective_segments: self.effective_segments,
        }
    }
}

/// Streaming Welch accumulator with a periodic Hann window.
pub struct WelchEstimator {
    n_channels: usize,
    seg_len: usize,
    hop: usize,
    dt: f64,
    window: Vec<f64>,
    window_power: f64,
    buffers: Vec<Vec<f64>>,
    fft: Arc<dyn RealToComplex<f64>>,
    input: Vec<f64>,
    spectra: Vec<Vec<Complex64>>,
    scratch: Vec<Complex64>,
    accum: Vec<Complex64>,
    segments: usize,
}

impl WelchEstimator {
    pub fn new(n_channels: usize, dt: f64, segment_length: usize, overlap: f64) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::param("channels", "need at least one channel"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", "must be positive and finite"));
        }
        if segment_length < 2 {
            return Err(Error::param("segment_length", "must be at least 2"));
        }
        if !(0.0..=0.9).contains(&overlap) {
            return Err(Error::param("overlap", "must lie in [0, 0.9]"));
        }
        let hop =
            ((segment_length as f64 * (1.0 - overlap)).round() as usize).clamp(1, segment_length);
        let window: Vec<f64> = (0..segment_length)
            .map(|n| 0.5 * (1.0 - (2.0 * PI * n as f64 / segment_length as f64).cos()))
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = RealFftPlanner::<f64>::new().plan_fft_forward(segment_length);
        let scratch = fft.make_scratch_vec();
        let bins = segment_length / 2 + 1;
        Ok(WelchEstimator {
            n_channels,
            seg_len: segment_length,
            hop,
            dt,
            window,
            window_power,
            buffers: vec![Vec::with_capacity(segment_length); n_channels],
            input: fft.make_input_vec(),
            spectra: vec![fft.make_output_vec(); n_channels],
            fft,
            scratch,
            accum: vec![Complex64::default(); bins * n_channels * n_channels],
            segments: 0,
        })
    }

    pub fn push(&mut self, sample: &[f64]) {
        debug_assert_eq!(sample.len(), self.n_channels);
        for (buf, &v) in self.buffers.iter_mut().zip(sample) {
            buf.push(v);
        }
        if self.buffers[0].len() == self.seg_len {
            self.process();
            for buf in &mut self.buffers {
                buf.drain(..self.hop);
            }
        }
    }

    pub fn push_record(&mut self, channels: &[&[f64]]) -> Result<()> {
        if channels.len() != self.n_channels {
            return Err(Error::InvalidInput(format!(
                "expected {} channels, got {}",
                self.n_channels,
                channels.len()
            )));
        }
        let n = channels[0].len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput("channels differ in length".into()));
        }
        let mut sample = vec![0.0; self.n_channels];
        for k in 0..n {
            for (s, c) in sample.iter_mut().zip(channels) {
                *s = c[k];
            }
            self.push(&sample);
        }
        Ok(())
    }

    fn process(&mut self) {
        for (buf, out) in self.buffers.iter().zip(self.spectra.iter_mut()) {
            for ((v, &x), &h) in self.input.iter_mut().zip(buf).zip(&self.window) {
                *v = x * h;
            }
            self.fft
                .process_with_scratch(&mut self.input, out, &mut self.scratch)
                .expect("buffer lengths fixed at construction");
        }
        let n = self.n_channels;
        let bins = self.seg_len / 2 + 1;
        for b in 0..bins {
            for i in 0..n {
                let yi = self.spectra[i][b];
                for j in i..n {
                    self.accum[(b * n + i) * n + j] += yi * self.spectra[j][b].conj();
                }
            }
        }
        self.segments += 1;
    }

    /// Segment count corrected for the overlap correlation of the window.
    fn effective_segments(&self) -> f64 {
        let m = self.segments as f64;
        let mut sum = 0.0;
        let mut j = 1usize;
        while j < self.segments && j * self.hop < self.seg_len {
            let shift = j * self.hop;
            let rho: f64 = (0..self.seg_len - shift)
                .map(|n| self.window[n] * self.window[n + shift])
                .sum::<f64>()
                / self.window_power;
            sum += (1.0 - j as f64 / m) * rho * rho;
            j += 1;
        }
        m / (1.0 + 2.0 * sum)
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn finish(&self) -> Result<CrossSpectrum> {
        if self.segments == 0 {
            return Err(Error::InvalidInput(
                "record shorter than one segment".into(),
            ));
        }
        let n = self.n_channels;
        let bins = self.seg_len / 2 + 1;
        let norm = self.dt / (self.window_power * self.segments as f64);
        let mut values = vec![Complex64::default(); self.accum.len()];
        for b in 0..bins {
            for i in 0..n {
                for j in i..n {
                    let v = self.accum[(b * n + i) * n + j] * norm;
                    values[(b * n + i) * n + j] = v;
                    values[(b * n + j) * n + i] = v.conj();
                }
            }
        }
        let d_omega = 2.0 * PI / (self.seg_len as f64 * self.dt);
        Ok(CrossSpectrum {
            omega: (0..bins).map(|b| b as f64 * d_omega).collect(),
            n_channels: n,
            segments: self.segments,
            effective_segments: self.effective_segments(),
            segment_length: self.seg_len,
            values,
        })
    }
}

/// Welch estimate of a single record's PSD.
pub fn psd_welch(record: &[f64], dt: f64, segment_length: usize, overlap: f64) -> Result<Spectrum> {
    if record.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "record contains non-finite samples".into(),
        ));
    }
    let mut est = WelchEstimator::new(1, dt, segment_length, overlap)?;
    est.push_record(&[record])?;
    Ok(est.finish()?.spectrum(0))
}

/// Simulate and estimate the cross spectra of `(X_AM_out, X_PM_out)` and,
/// when tones are given, of the demodulated synodyne signal as a third
/// channel, without storing the record. Blocks of `cfg.segment_samples()`
/// are averaged at 50% overlap.
pub fn simulate_spectra(
    ss: &StateSpace,
    cfg: &SimConfig,
    tones: Option<&LoTones>,
) -> Result<CrossSpectrum> {
    let mut sim = Simulator::new(ss, cfg)?;
    let demod = tones.map(SynodyneDemodulator::new);
    let n_ch = if demod.is_some() { 3 } else { 2 };
    let mut est = WelchEstimator::new(n_ch, cfg.dt, cfg.segment_samples(), 0.5)?;
    let mut sample = [0.0; 3];
    for k in 0..cfg.samples() as u64 {
        let t = sim.time_of(k);
        let [am, pm] = sim.next_sample();
        sample[0] = am;
        sample[1] = pm;
        if let Some(d) = &demod {
            sample[2] = d.xi(t, am, pm);
        }
        est.push(&sample[..n_ch]);
    }
    est.finish()
}
