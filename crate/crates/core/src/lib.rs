//! Complex squeezing of light from a cavity optomechanical system and its
//! detection with two-tone ("synodyne") local oscillators.
//!
//! The closed-form side lives in [`model`], [`covariance`], [`detection`]
//! and [`optimize`]. [`langevin`] is an independent time-domain simulation
//! of the same linear system, used to check every closed-form result.
//! [`figures`] assembles the plot-ready datasets.

pub mod covariance;
pub mod detection;
pub mod error;
pub mod figures;
pub mod langevin;
pub mod model;
pub mod numeric;
pub mod optimize;
pub mod table;

pub use covariance::{covariance_at, CovarianceMatrix};
pub use detection::{
    force_imprecision, homodyne_imprecision, spinor_from_tones, sql, synodyne_psd_dc,
    tones_from_spinor, LoSpinor, LoTones, SqlPoint,
};
pub use error::{Error, Result};
pub use model::{
    cooperativity, make_params, mech_susceptibility, responses, Coupling, ResponseSet, SystemParams,
};
pub use optimize::{optimal_force_spinor, optimal_noise_spinor, sweep, Objective, SweepRow};

/// Mechanical frequency of the figure presets, in cavity linewidths.
pub const FIG_OMEGA_M: f64 = 0.2;
/// Mechanical linewidth of the figure presets.
pub const FIG_GAMMA_M: f64 = 0.002;
/// Thermal occupation of the figure presets.
pub const FIG_NBAR: f64 = 0.0;
