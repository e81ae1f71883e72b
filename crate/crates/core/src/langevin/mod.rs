//! Time-domain Langevin simulation of the linearized optomechanical system,
//! with the spectral and force estimators that check the closed-form results.

mod demod;
mod force;
mod record;
mod simulate;
mod spectral;
mod state_space;

pub use demod::{demodulate_synodyne, temporal_phase_components, SynodyneDemodulator};
pub use force::{estimate_force, ForceCalibration, ForceEstimate};
pub use record::{dump_records, read_records, RecordMeta};
pub use simulate::{simulate, ForceProfile, Scheme, SimConfig, Simulator};
pub use spectral::{psd_welch, simulate_spectra, CrossSpectrum, Spectrum, WelchEstimator};
pub use state_space::{build_state_space, transfer_function_check, StateSpace};

use serde::{Deserialize, Serialize};

/// Equally spaced samples on one or more named channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub dt: f64,
    /// Time stamp of the first sample.
    pub t0: f64,
    pub names: Vec<String>,
    pub channels: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.channels[i].as_slice())
    }
}

pub const AM_OUT: &str = "x_am_out";
pub const PM_OUT: &str = "x_pm_out";
pub const XI: &str = "xi";
