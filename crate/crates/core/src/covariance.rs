//! Output-field covariance matrix, its eigenvalues, and homodyne spectra.
//!
//! Index 1 is the amplitude (AM) quadrature and index 2 the phase (PM)
//! quadrature. The matrix is the symmetrized cross-spectral density of the
//! reflected light; the vacuum level of each quadrature is 1/2.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{responses, SystemParams};

/// Hermitian 2x2 covariance of the output quadratures at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub omega: f64,
    pub c11: f64,
    pub c12: Complex64,
    pub c22: f64,
}

/// Covariance of the reflected light for vacuum optical input and a thermal
/// mechanical bath.
///
/// `c11 = 1/2`, `c12 = conj(chi_ba)/2` and
/// `c22 = 1/2 + |chi_ba|^2/2 + (nbar + 1/2)(|T_q|^2 + |T_p|^2)`.
/// The symmetrized Q/P cross-correlator of the bath vanishes, so no mixed
/// mechanical term appears.
pub fn covariance_at(params: &SystemParams, omega: f64) -> Result<CovarianceMatrix> {
    params.validate()?;
    let r = responses(params, omega);
    let thermal = params.nbar + 0.5;
    Ok(CovarianceMatrix {
        omega,
        c11: 0.5,
        c12: 0.5 * r.chi_ba.conj(),
        c22: 0.5 + 0.5 * r.chi_ba.norm_sqr() + thermal * (r.t_q.norm_sqr() + r.t_p.norm_sqr()),
    })
}

/// Eigenvalues of a real symmetric 2x2 matrix `[[a, b], [b, d]]` given `|b|`.
pub(crate) fn sym2_eigenvalues(a: f64, d: f64, b_abs: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (d - a)).hypot(b_abs);
    (mean - radius, mean + radius)
}

impl CovarianceMatrix {
    /// Builds a matrix from raw entries, checking it is Hermitian positive
    /// semidefinite.
    pub fn from_entries(omega: f64, c11: f64, c12: Complex64, c22: f64) -> Result<Self> {
        let finite = [omega, c11, c12.re, c12.im, c22]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput(
                "covariance entries must be finite".into(),
            ));
        }
        if c11 < 0.0 || c22 < 0.0 || c12.norm_sqr() > c11 * c22 * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "covariance is not positive semidefinite (c11={c11}, |c12|={}, c22={c22})",
                c12.norm()
            )));
        }
        Ok(CovarianceMatrix {
            omega,
            c11,
            c12,
            c22,
        })
    }

    /// `(c_minus, c_plus)`, ordered.
    pub fn eigenvalues(&self) -> (f64, f64) {
        sym2_eigenvalues(self.c11, self.c22, self.c12.norm())
    }

    pub fn trace(&self) -> f64 {
        self.c11 + self.c22
    }

    /// Homodyne spectral density at LO phase `theta`. Only `Re(c12)`
    /// contributes.
    pub fn homodyne_psd(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.c11 + s * s * self.c22 + 2.0 * s * c * self.c12.re
    }

    /// Minimum of [`homodyne_psd`](Self::homodyne_psd) over the LO phase,
    /// as `(theta_star, value)` with `theta_star` in `[0, pi)`.
    ///
    /// When every phase is optimal the smallest one, zero, is returned.
    pub fn min_homodyne(&self) -> (f64, f64) {
        let half_diff = 0.5 * (self.c22 - self.c11);
        let re = self.c12.re;
        let (value, _) = sym2_eigenvalues(self.c11, self.c22, re.abs());
        if half_diff == 0.0 && re == 0.0 {
            return (0.0, value);
        }
        let two_theta = (-re).atan2(half_diff);
        let theta = (0.5 * two_theta).rem_euclid(PI) + 0.0;
        // rem_euclid can round up to exactly pi
        let theta = if theta >= PI { 0.0 } else { theta };
        (theta, value)
    }

    /// True when the matrix is the vacuum (`1/2` times identity).
    pub fn is_vacuum(&self) -> bool {
        self.c11 == 0.5 && self.c22 == 0.5 && self.c12 == Complex64::new(0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_params, Coupling};

    fn fig2(c: f64, nbar: f64) -> SystemParams {
        make_params(0.2, 0.002, nbar, Coupling::Cooperativity(c)).unwrap()
    }

    #[test]
    fn figure_two_point() {
        let c = covariance_at(&fig2(0.9, 0.0), 0.2).unwrap();
        assert_eq!(c.c11, 0.5);
        assert!((c.c12.norm() - 0.7758596444079169).abs() < 1e-12);
        assert!((c.c22 - 3.2556502117878425).abs() < 1e-12);
        let (lo, hi) = c.eigenvalues();
        assert!((lo - 0.2965723714291315).abs() < 1e-12);
        assert!((hi - 3.4590778403587112).abs() < 1e-12);
        let (_, hom) = c.min_homodyne();
        assert!((hom - 0.4999986347275571).abs() < 1e-12);
    }

    #[test]
    fn vacuum_when_uncoupled() {
        let p = make_params(0.2, 0.002, 0.0, Coupling::G(0.0)).unwrap();
        for w in [0.0, 0.1, 0.2, 3.0] {
            let c = covariance_at(&p, w).unwrap();
            assert!(c.is_vacuum());
            assert_eq!(c.eigenvalues(), (0.5, 0.5));
            assert_eq!(c.min_homodyne(), (0.0, 0.5));
        }
    }

    #[test]
    fn rejects_detuning() {
        let mut p = fig2(0.9, 0.0);
        p.delta = -0.3;
        assert_eq!(
            covariance_at(&p, 0.2),
            Err(Error::UnsupportedDetuning(-0.3))
        );
    }

    #[test]
    fn conjugation_symmetry() {
        let p = fig2(1.3, 0.4);
        for i in 0..50 {
            let w = 0.01 + 0.6 * i as f64 / 49.0;
            let a = covariance_at(&p, w).unwrap();
            let b = covariance_at(&p, -w).unwrap();
            assert!((a.c12.conj() - b.c12).norm() <= 1e-14 * a.c12.norm());
            assert!((a.c22 - b.c22).abs() <= 1e-14 * a.c22);
            assert_eq!(a.c11, b.c11);
        }
    }

    #[test]
    fn homodyne_quadratures() {
        let c = covariance_at(&fig2(0.9, 0.0), 0.17).unwrap();
        assert_eq!(c.homodyne_psd(0.0), 0.5);
        assert!((c.homodyne_psd(PI / 2.0) - c.c22).abs() < 1e-14);
    }

    #[test]
    fn min_homodyne_ties_and_diagonal() {
        let c = CovarianceMatrix::from_entries(0.0, 0.5, Complex64::new(0.0, 0.3), 2.0).unwrap();
        assert_eq!(c.min_homodyne(), (0.0, 0.5));
        let c = CovarianceMatrix::from_entries(0.0, 2.0, Complex64::new(0.0, -0.3), 0.5).unwrap();
        let (t, v) = c.min_homodyne();
        assert!((t - PI / 2.0).abs() < 1e-15);
        assert_eq!(v, 0.5);
        let c = CovarianceMatrix::from_entries(0.0, 1.0, Complex64::new(0.0, 0.5), 1.0).unwrap();
        assert_eq!(c.min_homodyne(), (0.0, 1.0));
        assert_eq!(c.eigenvalues(), (0.5, 1.5));
    }

    #[test]
    fn min_homodyne_is_attained() {
        let c = covariance_at(&fig2(0.9, 0.0), 0.1).unwrap();
        let (t, v) = c.min_homodyne();
        assert!(v < 0.5);
        assert!((c.homodyne_psd(t) - v).abs() < 1e-13);
        for i in 0..1000 {
            let th = PI * i as f64 / 1000.0;
            assert!(c.homodyne_psd(th) >= v - 1e-13);
        }
    }

    #[test]
    fn rejects_non_psd() {
        assert!(CovarianceMatrix::from_entries(0.0, 0.5, Complex64::new(1.0, 0.0), 0.5).is_err());
        assert!(
            CovarianceMatrix::from_entries(0.0, f64::NAN, Complex64::new(0.0, 0.0), 0.5).is_err()
        );
    }
}
