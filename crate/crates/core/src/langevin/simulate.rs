//! Stochastic integration of the state-space model.

use nalgebra::{DMatrix, Matrix4, SMatrix, SVector, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::state_space::{StateSpace, CAV_AM, CAV_PM, P};
use super::{TimeSeries, AM_OUT, PM_OUT};
use crate::error::{Error, Result};

/// Largest `|lambda| dt` accepted for any drift eigenvalue.
pub const STEP_MARGIN: f64 = 0.1;

const STREAMS_PER_RUN: u64 = 16;
const INIT_CHANNEL: u64 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exact discretization of the linear SDE. Outputs are averages over each
    /// step, stamped at the step midpoint.
    #[default]
    Exact,
    /// First-order Euler-Maruyama with per-step white noise of variance
    /// `psd / dt`, shared between state update and reflected output.
    #[serde(alias = "euler")]
    EulerMaruyama,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Scheme::Exact),
            "euler" | "euler_maruyama" | "euler-maruyama" => Ok(Scheme::EulerMaruyama),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Classical force `F cos(omega t - phase)` on the momentum, in units of the
/// thermal input noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceProfile {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    /// Run index; selects an independent family of RNG streams under `seed`.
    pub run: u64,
    /// Number of non-overlapping blocks the record is split into for spectra.
    pub segments: usize,
    pub force: Option<ForceProfile>,
    pub scheme: Scheme,
}

impl SimConfig {
    pub fn new(dt: f64, duration: f64, seed: u64) -> Self {
        SimConfig {
            dt,
            duration,
            seed,
            run: 0,
            segments: 1,
            force: None,
            scheme: Scheme::Exact,
        }
    }

    pub fn with_run(&self, run: u64) -> Self {
        SimConfig {
            run,
            ..self.clone()
        }
    }

    pub fn with_force(&self, force: Option<ForceProfile>) -> Self {
        SimConfig {
            force,
            ..self.clone()
        }
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Samples per spectral block.
    pub fn segment_samples(&self) -> usize {
        self.samples() / self.segments.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", "must be positive and finite"));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::param("duration", "must be positive and finite"));
        }
        if self.segments == 0 {
            return Err(Error::param("segments", "must be at least 1"));
        }
        if self.samples() < self.segments.max(1) {
            return Err(Error::param(
                "duration",
                "shorter than one sample per segment",
            ));
        }
        if let Some(f) = &self.force {
            if !(f.amplitude.is_finite() && f.frequency.is_finite() && f.phase.is_finite()) {
                return Err(Error::param("force", "must be finite"));
            }
            if f.amplitude < 0.0 {
                return Err(Error::param("force", "amplitude must be non-negative"));
            }
            if f.frequency < 0.0 {
                return Err(Error::param("force", "frequency must be non-negative"));
            }
        }
        Ok(())
    }
}

fn check_step(ss: &StateSpace, dt: f64, scheme: Scheme) -> Result<()> {
    let poles = ss.poles();
    let margin = poles.iter().map(|l| l.norm() * dt).fold(0.0, f64::max);
    if margin > STEP_MARGIN {
        return Err(Error::StepTooLarge { dt, margin });
    }
    if scheme == Scheme::EulerMaruyama && poles.iter().any(|l| (1.0 + l * dt).norm() >= 1.0) {
        return Err(Error::StepTooLarge { dt, margin });
    }
    Ok(())
}

/// Square-root factor `L` with `L L^T = m`, tolerant of semidefinite input.
fn psd_factor<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let sym = 0.5 * (m + m.transpose());
    if let Some(ch) = sym.cholesky() {
        return ch.l();
    }
    let eig = DMatrix::from_iterator(N, N, sym.iter().copied()).symmetric_eigen();
    let mut l = eig.eigenvectors;
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        l.column_mut(j).scale_mut(lam.max(0.0).sqrt());
    }
    SMatrix::from_iterator(l.iter().copied())
}

enum Kernel {
    Exact {
        // state (Q, P, X_AM, X_PM, u, v) with u + i v = e^{i(omega_f t - phase)}
        phi: SMatrix<f64, 6, 6>,
        psi: SMatrix<f64, 2, 6>,
        noise: SMatrix<f64, 6, 6>,
        z: SVector<f64, 6>,
    },
    Euler {
        a: Matrix4<f64>,
        b: Vector4<f64>,
        sd: Vector4<f64>,
        sqrt_kappa: f64,
        force: Option<(f64, f64, f64)>,
        x: Vector4<f64>,
    },
}

/// Streaming integrator yielding `(X_AM_out, X_PM_out)` one sample at a time.
pub struct Simulator {
    kernel: Kernel,
    rngs: Vec<ChaCha8Rng>,
    noisy: bool,
    k: u64,
    dt: f64,
    t0: f64,
}

impl Simulator {
    pub fn new(ss: &StateSpace, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        check_step(ss, cfg.dt, cfg.scheme)?;
        let dt = cfg.dt;
        let stream = |ch: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(cfg.run.wrapping_mul(STREAMS_PER_RUN).wrapping_add(ch));
            rng
        };
        let rngs: Vec<ChaCha8Rng> = (0..6).map(stream).collect();
        let noisy = ss.input_psd.iter().any(|&d| d != 0.0);

        let (f_amp, f_freq, f_phase) = cfg
            .force
            .map_or((0.0, 0.0, 0.0), |f| (f.amplitude, f.frequency, f.phase));

        let mut x0 = Vector4::zeros();
        if noisy {
            let sigma = ss.stationary_covariance()?;
            let l = psd_factor(&sigma);
            let mut init = stream(INIT_CHANNEL);
            let zeta = Vector4::from_fn(|_, _| init.sample::<f64, _>(StandardNormal));
            x0 += l * zeta;
        }
        if f_amp != 0.0 {
            let resp = ss.force_state_response(f_freq)?;
            let rot = num_complex::Complex64::from_polar(f_amp, -f_phase);
            x0 += resp.map(|c| (c * rot).re);
        }

        let kernel = match cfg.scheme {
            Scheme::Exact => exact_kernel(ss, dt, f_amp, f_freq, f_phase, x0)?,
            Scheme::EulerMaruyama => Kernel::Euler {
                a: ss.drift,
                b: ss.noise_map.diagonal(),
                sd: ss.input_psd.map(|d| (d / dt).sqrt()),
                sqrt_kappa: ss.kappa.sqrt(),
                force: (f_amp != 0.0).then_some((ss.force_gain * f_amp, f_freq, f_phase)),
                x: x0,
            },
        };
        let t0 = match cfg.scheme {
            Scheme::Exact => 0.5 * dt,
            Scheme::EulerMaruyama => 0.0,
        };
        Ok(Simulator {
            kernel,
            rngs,
            noisy,
            k: 0,
            dt,
            t0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Time stamp of the first sample.
    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Index of the next sample.
    pub fn position(&self) -> u64 {
        self.k
    }

    pub fn time_of(&self, k: u64) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn next_sample(&mut self) -> [f64; 2] {
        let noisy = self.noisy;
        let rngs = &mut self.rngs;
        let out = match &mut self.kernel {
            Kernel::Exact { phi, psi, noise, z } => {
                let w = if noisy {
                    let zeta =
                        SVector::<f64, 6>::from_fn(|i, _| rngs[i].sample::<f64, _>(StandardNormal));
                    *noise * zeta
                } else {
                    SVector::zeros()
                };
                let s = *psi * *z;
                let zn = *phi * *z;
                *z = zn;
                for i in 0..4 {
                    z[i] += w[i];
                }
                [(s[0] + w[4]) / self.dt, (s[1] + w[5]) / self.dt]
            }
            Kernel::Euler {
                a,
                b,
                sd,
                sqrt_kappa,
                force,
                x,
            } => {
                let xi = if noisy {
                    Vector4::from_fn(|i, _| sd[i] * rngs[i].sample::<f64, _>(StandardNormal))
                } else {
                    Vector4::zeros()
                };
                let y = [
                    *sqrt_kappa * x[CAV_AM] - xi[CAV_AM],
                    *sqrt_kappa * x[CAV_PM] - xi[CAV_PM],
                ];
                let mut dx = *a * *x + b.component_mul(&xi);
                if let Some((amp, w, ph)) = force {
                    let t = self.k as f64 * self.dt;
                    dx[P] += *amp * (*w * t - *ph).cos();
                }
                *x += dx * self.dt;
                y
            }
        };
        self.k += 1;
        out
    }
}

fn exact_kernel(
    ss: &StateSpace,
    dt: f64,
    f_amp: f64,
    f_freq: f64,
    f_phase: f64,
    x0: Vector4<f64>,
) -> Result<Kernel> {
    // augmented continuous model: (x[4], u, v, s_am, s_pm), s' = sqrt(kappa) x_cav - xi
    const N: usize = 8;
    let mut a = DMatrix::<f64>::zeros(N, N);
    a.view_mut((0, 0), (4, 4)).copy_from(&ss.drift_dyn());
    a[(P, 4)] = ss.force_gain * f_amp;
    a[(4, 5)] = -f_freq;
    a[(5, 4)] = f_freq;
    let sk = ss.kappa.sqrt();
    a[(6, CAV_AM)] = sk;
    a[(7, CAV_PM)] = sk;

    let mut b = DMatrix::<f64>::zeros(N, 4);
    for i in 0..4 {
        b[(i, i)] = ss.noise_map[(i, i)];
    }
    b[(6, CAV_AM)] = -1.0;
    b[(7, CAV_PM)] = -1.0;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        4,
        ss.input_psd.iter().copied(),
    ));
    let qc = &b * d * b.transpose();

    let mut m = DMatrix::<f64>::zeros(2 * N, 2 * N);
    m.view_mut((0, 0), (N, N)).copy_from(&(-&a * dt));
    m.view_mut((0, N), (N, N)).copy_from(&(&qc * dt));
    m.view_mut((N, N), (N, N)).copy_from(&(a.transpose() * dt));
    let e = m.exp();
    let phi_full = e.view((N, N), (N, N)).transpose();
    let qd_full = &phi_full * e.view((0, N), (N, N));
    if phi_full
        .iter()
        .chain(qd_full.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::NumericalFailure("non-finite discretization".into()));
    }

    let idx = [0usize, 1, 2, 3, 6, 7];
    let phi = SMatrix::<f64, 6, 6>::from_fn(|i, j| phi_full[(i, j)]);
    let psi = SMatrix::<f64, 2, 6>::from_fn(|i, j| phi_full[(6 + i, j)]);
    let qd = SMatrix::<f64, 6, 6>::from_fn(|i, j| qd_full[(idx[i], idx[j])]);
    let noise = psd_factor(&qd);
    let mut z = SVector::<f64, 6>::zeros();
    z.fixed_rows_mut::<4>(0).copy_from(&x0);
    z[4] = f_phase.cos();
    z[5] = -f_phase.sin();
    Ok(Kernel::Exact { phi, psi, noise, z })
}

/// Full record of both output quadratures.
pub fn simulate(ss: &StateSpace, cfg: &SimConfig) -> Result<TimeSeries> {
    let mut sim = Simulator::new(ss, cfg)?;
    let n = cfg.samples();
    let mut am = Vec::with_capacity(n);
    let mut pm = Vec::with_capacity(n);
    for _ in 0..n {
        let [a, p] = sim.next_sample();
        am.push(a);
        pm.push(p);
    }
    Ok(TimeSeries {
        dt: cfg.dt,
        t0: sim.t0(),
        names: vec![AM_OUT.to_string(), PM_OUT.to_string()],
        channels: vec![am, pm],
    })
}
