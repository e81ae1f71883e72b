//! Linear state-space realization of the Langevin equations.
//!
//! State `(Q, P, X_cav_AM, X_cav_PM)`, inputs `(Q_in, P_in, X_AM_in, X_PM_in)`:
//!
//! ```text
//! dQ      = (-gamma_m/2 Q + omega_m P) dt                   + sqrt(gamma_m) dQ_in
//! dP      = (-gamma_m/2 P - omega_m Q - G X_cav_AM + f) dt   + sqrt(gamma_m) dP_in
//! dX_AM   = (-kappa/2 X_AM) dt                               + sqrt(kappa) dX_AM_in
//! dX_PM   = (-kappa/2 X_PM - G Q) dt                         + sqrt(kappa) dX_PM_in
//! X_out   = sqrt(kappa) X_cav - X_in
//! ```
//!
//! Its input-output gains equal the closed-form responses up to a sign on the
//! mechanical inputs and the cavity all-pass factor on the optical inputs;
//! neither changes any spectral density.

use nalgebra::{DMatrix, Matrix2x4, Matrix4, SMatrix, Vector4};
use num_complex::Complex64;

use crate::covariance::{covariance_at, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::model::{responses, SystemParams};

pub const Q: usize = 0;
pub const P: usize = 1;
pub const CAV_AM: usize = 2;
pub const CAV_PM: usize = 3;

/// Drift, noise and output maps of the linearized dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub drift: Matrix4<f64>,
    pub noise_map: Matrix4<f64>,
    /// Two-sided white-noise spectral densities of the four inputs.
    pub input_psd: Vector4<f64>,
    pub kappa: f64,
    /// Coefficient of a force, in units of the thermal input, in `dP`.
    pub force_gain: f64,
}

pub fn build_state_space(params: &SystemParams) -> Result<StateSpace> {
    params.validate()?;
    let (gm, wm, k, g) = (params.gamma_m, params.omega_m, params.kappa, params.g);
    #[rustfmt::skip]
    let drift = Matrix4::new(
        -0.5 * gm, wm,        0.0,       0.0,
        -wm,       -0.5 * gm, -g,        0.0,
        0.0,       0.0,       -0.5 * k,  0.0,
        -g,        0.0,       0.0,       -0.5 * k,
    );
    let noise_map = Matrix4::from_diagonal(&Vector4::new(gm.sqrt(), gm.sqrt(), k.sqrt(), k.sqrt()));
    let thermal = params.nbar + 0.5;
    Ok(StateSpace {
        drift,
        noise_map,
        input_psd: Vector4::new(thermal, thermal, 0.5, 0.5),
        kappa: k,
        force_gain: gm.sqrt(),
    })
}

impl StateSpace {
    /// Same dynamics with every input noise switched off.
    pub fn without_noise(&self) -> Self {
        StateSpace {
            input_psd: Vector4::zeros(),
            ..self.clone()
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.drift.complex_eigenvalues().iter().copied().collect()
    }

    pub fn is_hurwitz(&self) -> bool {
        self.poles().iter().all(|l| l.re < 0.0)
    }

    /// `C` in `y = C x - E xi`.
    pub fn output_map(&self) -> Matrix2x4<f64> {
        let s = self.kappa.sqrt();
        Matrix2x4::new(0.0, 0.0, s, 0.0, 0.0, 0.0, 0.0, s)
    }

    /// `E` in `y = C x - E xi`: the reflected optical inputs.
    pub fn feedthrough(&self) -> Matrix2x4<f64> {
        Matrix2x4::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    }

    fn resolvent(&self, omega: f64) -> Result<nalgebra::LU<Complex64, nalgebra::U4, nalgebra::U4>> {
        let a: Matrix4<Complex64> = self.drift.map(|v| Complex64::new(v, 0.0));
        let m = Matrix4::<Complex64>::identity() * Complex64::new(0.0, omega) - a;
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::NumericalFailure(format!(
                "singular resolvent at omega = {omega}"
            )));
        }
        Ok(lu)
    }

    /// Input-to-output gains `C (i omega - A)^{-1} B - E`, outputs
    /// `(X_AM_out, X_PM_out)` by inputs `(Q_in, P_in, X_AM_in, X_PM_in)`.
    pub fn frequency_response(&self, omega: f64) -> Result<Matrix2x4<Complex64>> {
        let lu = self.resolvent(omega)?;
        let b: Matrix4<Complex64> = self.noise_map.map(|v| Complex64::new(v, 0.0));
        let x = lu.solve(&b).ok_or_else(|| {
            Error::NumericalFailure(format!("resolvent solve failed at omega = {omega}"))
        })?;
        let c: Matrix2x4<Complex64> = self.output_map().map(|v| Complex64::new(v, 0.0));
        let e: Matrix2x4<Complex64> = self.feedthrough().map(|v| Complex64::new(v, 0.0));
        Ok(c * x - e)
    }

    /// Complex state amplitude driven by a unit force `e^{i omega t}`.
    pub fn force_state_response(&self, omega: f64) -> Result<Vector4<Complex64>> {
        let lu = self.resolvent(omega)?;
        let mut rhs = Vector4::<Complex64>::zeros();
        rhs[P] = Complex64::new(self.force_gain, 0.0);
        lu.solve(&rhs).ok_or_else(|| {
            Error::NumericalFailure(format!("resolvent solve failed at omega = {omega}"))
        })
    }

    /// Output covariance implied by the realization, `H D H^dagger`.
    pub fn implied_covariance(&self, omega: f64) -> Result<CovarianceMatrix> {
        let h = self.frequency_response(omega)?;
        let mut s = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in s.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..4)
                    .map(|n| h[(i, n)] * h[(j, n)].conj() * self.input_psd[n])
                    .sum();
            }
        }
        Ok(CovarianceMatrix {
            omega,
            c11: s[0][0].re,
            c12: s[0][1],
            c22: s[1][1].re,
        })
    }

    /// Stationary state covariance `Sigma` solving
    /// `A Sigma + Sigma A^T + B D B^T = 0`.
    pub fn stationary_covariance(&self) -> Result<Matrix4<f64>> {
        let a = self.drift;
        let q =
            self.noise_map * Matrix4::from_diagonal(&self.input_psd) * self.noise_map.transpose();
        let eye = Matrix4::<f64>::identity();
        // column-major vec: vec(A S + S A^T) = (I (x) A + A (x) I) vec(S)
        let lhs: SMatrix<f64, 16, 16> = eye.kronecker(&a) + a.kronecker(&eye);
        let rhs = SMatrix::<f64, 16, 1>::from_iterator(q.iter().map(|v| -v));
        let sol = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NumericalFailure("Lyapunov equation is singular".into()))?;
        let s = Matrix4::from_iterator(sol.iter().copied());
        Ok(0.5 * (s + s.transpose()))
    }

    pub(crate) fn drift_dyn(&self) -> DMatrix<f64> {
        DMatrix::from_iterator(4, 4, self.drift.iter().copied())
    }
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn rel_dev_c(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Largest relative deviation, over `grid`, between the realization's gains
/// and implied covariance and the closed-form responses and covariance.
pub fn transfer_function_check(
    ss: &StateSpace,
    params: &SystemParams,
    grid: &[f64],
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty frequency grid".into()));
    }
    let mut worst: f64 = 0.0;
    for &w in grid {
        let h = ss.frequency_response(w)?;
        let r = responses(params, w);
        let checks = [
            rel_dev(h[(1, Q)].norm(), r.t_q.norm()),
            rel_dev(h[(1, P)].norm(), r.t_p.norm()),
            rel_dev(h[(1, CAV_AM)].norm(), r.chi_ba.norm()),
            rel_dev(h[(0, CAV_AM)].norm(), 1.0),
            rel_dev(h[(1, CAV_PM)].norm(), 1.0),
            h[(0, Q)].norm(),
            h[(0, P)].norm(),
            h[(0, CAV_PM)].norm(),
        ];
        let implied = ss.implied_covariance(w)?;
        let closed = covariance_at(params, w)?;
        let cov_checks = [
            rel_dev(implied.c11, closed.c11),
            rel_dev(implied.c22, closed.c22),
            rel_dev_c(implied.c12, closed.c12),
        ];
        for d in checks.iter().chain(&cov_checks) {
            if !d.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "non-finite deviation at omega = {w}"
                )));
            }
            worst = worst.max(*d);
        }
    }
    Ok(worst)
}
