//! Optimal LO spinors and cooperativity sweeps.
//!
//! Both optimizers fix the phase gauge by making `alpha_am` real and
//! non-negative. The cross term `2 Re(conj(a) conj(b) c12)` is then most
//! negative when `arg(a) + arg(b) = arg(c12) + pi`, which reduces the
//! problem to the real symmetric matrix `[[c11, -|c12|], [-|c12|, c22]]`.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{covariance_at, sym2_eigenvalues, CovarianceMatrix};
use crate::detection::{
    force_imprecision, homodyne_imprecision, resonant_transduction, synodyne_psd_dc, LoSpinor,
};
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Spinor minimizing the dc synodyne noise, and that minimum (`c_minus`).
///
/// A degenerate matrix (`c11 = c22`, `c12 = 0`) yields the pure amplitude
/// spinor.
pub fn optimal_noise_spinor(cov: &CovarianceMatrix) -> (LoSpinor, f64) {
    let m = cov.c12.norm();
    let (lambda, _) = sym2_eigenvalues(cov.c11, cov.c22, m);
    if m == 0.0 {
        let spinor = if cov.c11 <= cov.c22 {
            LoSpinor::amplitude()
        } else {
            LoSpinor::phase()
        };
        return (spinor, lambda);
    }
    // eigenvector of [[c11, -m], [-m, c22]] with non-negative entries
    let v1 = (m, cov.c11 - lambda);
    let v2 = (cov.c22 - lambda, m);
    let (x, y) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
        v1
    } else {
        v2
    };
    let n = x.hypot(y);
    (gauge_fixed(x / n, y / n, cov.c12), lambda)
}

/// Spinor with real `alpha_am = cos` and `alpha_pm = -sin * e^{i arg(c12)}`.
fn gauge_fixed(cos: f64, sin: f64, c12: Complex64) -> LoSpinor {
    let phase = if c12.norm() > 0.0 {
        c12 / c12.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    LoSpinor {
        alpha_am: Complex64::new(cos, 0.0),
        alpha_pm: -sin * phase,
    }
}

/// Spinor minimizing the force imprecision on resonance and the minimum,
/// `(c22 - |c12|^2 / c11) / (2 |T_p|^2)`.
///
/// The optimal weights satisfy `|alpha_am| / |alpha_pm| = |c12| / c11`.
pub fn optimal_force_spinor(params: &SystemParams) -> Result<(LoSpinor, f64)> {
    let tp2 = resonant_transduction(params)?;
    let cov = covariance_at(params, params.omega_m)?;
    let ratio = cov.c12.norm() / cov.c11;
    let n = ratio.hypot(1.0);
    let spinor = gauge_fixed(ratio / n, 1.0 / n, cov.c12);
    let s_ff = (cov.c22 - cov.c12.norm_sqr() / cov.c11) / (2.0 * tp2);
    Ok((spinor, s_ff))
}

/// What a sweep optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// dc synodyne noise; the reference column is `c_minus`.
    Noise,
    /// Force imprecision; the reference column is the phase-quadrature
    /// homodyne imprecision.
    Force,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise" => Ok(Objective::Noise),
            "force" => Ok(Objective::Force),
            other => Err(Error::InvalidInput(format!(
                "unknown objective `{other}` (noise|force)"
            ))),
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::Noise => "noise",
            Objective::Force => "force",
        })
    }
}

/// One point of a cooperativity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c_om: f64,
    pub pow_am: f64,
    pub pow_pm: f64,
    pub objective: f64,
    pub reference: f64,
}

/// Optimal spinor and resulting row at one cooperativity.
pub fn sweep_point(
    template: &SystemParams,
    c_om: f64,
    objective: Objective,
) -> Result<(LoSpinor, SweepRow)> {
    let params = template.with_cooperativity(c_om);
    let (spinor, objective_value, reference) = match objective {
        Objective::Noise => {
            let cov = covariance_at(&params, params.omega_m)?;
            let (spinor, c_minus) = optimal_noise_spinor(&cov);
            (spinor, synodyne_psd_dc(&cov, &spinor), c_minus)
        }
        Objective::Force => {
            let (spinor, _) = optimal_force_spinor(&params)?;
            (
                spinor,
                force_imprecision(&params, &spinor)?,
                homodyne_imprecision(&params)?,
            )
        }
    };
    let row = SweepRow {
        c_om,
        pow_am: spinor.pow_am(),
        pow_pm: spinor.pow_pm(),
        objective: objective_value,
        reference,
    };
    Ok((spinor, row))
}

/// Optimizes the spinor at every cooperativity of `grid`.
///
/// Rows are computed in parallel and returned in grid order.
pub fn sweep(template: &SystemParams, grid: &[f64], objective: Objective) -> Result<Vec<SweepRow>> {
    template.validate()?;
    check_grid(grid)?;
    grid.par_iter()
        .map(|&c| sweep_point(template, c, objective).map(|(_, row)| row))
        .collect()
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty cooperativity grid".into()));
    }
    if grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(Error::InvalidInput(
            "cooperativity grid must be finite and positive".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "cooperativity grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// `n` logarithmically spaced points from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || n < 2 {
        return Err(Error::InvalidInput(format!(
            "bad log grid [{lo}, {hi}] x {n}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// The default cooperativity grid: 32 log-spaced points over `[1e-2, 1e2]`.
pub fn default_cooperativity_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 32).expect("static grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_params, Coupling};

    fn fig2(c: f64) -> SystemParams {
        make_params(0.2, 0.002, 0.0, Coupling::Cooperativity(c)).unwrap()
    }

    #[test]
    fn quieter_quadrature_without_correlation() {
        let cov = CovarianceMatrix::from_entries(0.0, 0.5, Complex64::new(0.0, 0.0), 2.0).unwrap();
        let (s, v) = optimal_noise_spinor(&cov);
        assert_eq!(s, LoSpinor::amplitude());
        assert_eq!(v, 0.5);
        let cov = CovarianceMatrix::from_entries(0.0, 0.7, Complex64::new(0.0, 0.0), 0.7).unwrap();
        assert_eq!(optimal_noise_spinor(&cov).0, LoSpinor::amplitude());
        let cov = CovarianceMatrix::from_entries(0.0, 0.9, Complex64::new(0.0, 0.0), 0.6).unwrap();
        assert_eq!(optimal_noise_spinor(&cov), (LoSpinor::phase(), 0.6));
    }

    #[test]
    fn noise_optimum_on_resonance() {
        let cov = covariance_at(&fig2(0.9), 0.2).unwrap();
        let (s, v) = optimal_noise_spinor(&cov);
        assert!((v - 0.2965723714291315).abs() < 1e-12);
        assert!((synodyne_psd_dc(&cov, &s) - v).abs() < 1e-13);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
        let phase = s.alpha_am.arg() + s.alpha_pm.arg() - cov.c12.arg() - std::f64::consts::PI;
        assert!((phase.sin()).abs() < 1e-12 && phase.cos() > 0.0);
    }

    #[test]
    fn force_optimum_figure_point() {
        let p = fig2(0.9);
        let (s, v) = optimal_force_spinor(&p).unwrap();
        assert!((v - 0.6611183680555558).abs() < 1e-12);
        assert!((s.alpha_am.norm() / s.alpha_pm.norm() - 1.5517192888158338).abs() < 1e-12);
        assert!((force_imprecision(&p, &s).unwrap() - v).abs() < 1e-13);
        assert!(v <= homodyne_imprecision(&p).unwrap());
        let (_, v2) = optimal_force_spinor(&fig2(2.0)).unwrap();
        assert!(v2 < v);
    }

    #[test]
    fn force_optimum_needs_coupling() {
        let p = make_params(0.2, 0.002, 0.0, Coupling::G(0.0)).unwrap();
        assert_eq!(optimal_force_spinor(&p), Err(Error::NoTransduction));
    }

    #[test]
    fn weak_measurement_puts_power_in_phase() {
        let (s, _) = optimal_force_spinor(&fig2(1e-6)).unwrap();
        assert!(s.pow_am() < 1e-5);
        let (s08, _) = optimal_force_spinor(&fig2(0.08)).unwrap();
        let (s2, _) = optimal_force_spinor(&fig2(2.0)).unwrap();
        assert!(s08.pow_pm() > s2.pow_pm());
    }

    #[test]
    fn sweep_rows() {
        let rows = sweep(&fig2(1.0), &[0.9], Objective::Noise).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].objective - 0.2965723714291315).abs() < 1e-12);
        assert!((rows[0].reference - 0.2965723714291315).abs() < 1e-12);

        let rows = sweep(&fig2(1.0), &[0.08, 2.0], Objective::Force).unwrap();
        assert!(rows[0].pow_pm > rows[1].pow_pm);
        for r in &rows {
            assert!((r.pow_am + r.pow_pm - 1.0).abs() < 1e-12);
            assert!(r.objective <= r.reference + 1e-12);
        }
    }

    #[test]
    fn sweep_grid_validation() {
        let p = fig2(1.0);
        assert!(sweep(&p, &[], Objective::Noise).is_err());
        assert!(sweep(&p, &[1.0, 1.0], Objective::Noise).is_err());
        assert!(sweep(&p, &[-1.0, 1.0], Objective::Noise).is_err());
    }

    #[test]
    fn grids() {
        let g = default_cooperativity_grid();
        assert_eq!(g.len(), 32);
        assert_eq!(g[0], 1e-2);
        assert_eq!(g[31], 1e2);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!("force".parse::<Objective>().unwrap(), Objective::Force);
        assert!("both".parse::<Objective>().is_err());
    }
}
