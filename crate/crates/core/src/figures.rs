//! Plot-ready datasets for the frequency and cooperativity figures.
//!
//! All presets use `omega_m = 0.2`, `gamma_m = 0.002`, `nbar = 0` in units of
//! the cavity linewidth.

use std::f64::consts::PI;

use crate::covariance::covariance_at;
use crate::detection::{force_imprecision, homodyne_imprecision, sql, tones_from_spinor};
use crate::error::Result;
use crate::model::{make_params, Coupling, SystemParams};
use crate::optimize::{
    check_grid, default_cooperativity_grid, sweep, sweep_point, Objective, SweepRow,
};
use crate::table::{Cell, Table};
use crate::{FIG_GAMMA_M, FIG_NBAR, FIG_OMEGA_M};

/// Cooperativity of the frequency-resolved figure.
pub const FIG2A_COOPERATIVITY: f64 = 0.9;
/// Cooperativities of the two LO waveform insets.
pub const FIG3B_WAVEFORM_COOPERATIVITIES: [f64; 2] = [0.08, 2.0];
/// Samples per mechanical cycle in the waveform insets, endpoints included.
pub const WAVEFORM_POINTS: usize = 101;

pub const SPECTRUM_COLUMNS: [&str; 9] = [
    "omega",
    "c11",
    "re_c12",
    "im_c12",
    "c22",
    "eig_minus",
    "eig_plus",
    "hom_theta_star",
    "hom_min",
];

pub const SWEEP_COLUMNS: [&str; 5] = ["c_om", "pow_am", "pow_pm", "objective", "reference"];

/// Figure parameters at cooperativity `c_om`.
pub fn figure_params(c_om: f64) -> SystemParams {
    make_params(
        FIG_OMEGA_M,
        FIG_GAMMA_M,
        FIG_NBAR,
        Coupling::Cooperativity(c_om),
    )
    .expect("figure preset is valid")
}

/// Covariance entries, eigenvalues and optimal homodyne noise per frequency.
/// The homodyne angle is optimized independently at every frequency.
pub fn spectrum_table(params: &SystemParams, omegas: &[f64]) -> Result<Table> {
    params.validate()?;
    let mut t = Table::new(&SPECTRUM_COLUMNS);
    for &w in omegas {
        let cov = covariance_at(params, w)?;
        let (lo, hi) = cov.eigenvalues();
        let (theta, hom) = cov.min_homodyne();
        t.push_nums(&[
            w, cov.c11, cov.c12.re, cov.c12.im, cov.c22, lo, hi, theta, hom,
        ])?;
    }
    Ok(t)
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for r in rows {
        t.push_nums(&[r.c_om, r.pow_am, r.pow_pm, r.objective, r.reference])
            .expect("fixed width");
    }
    t
}

/// `n + 1` evenly spaced frequencies from 0 to `hi`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

/// Frequency sweep over `[0, 2 omega_m]` at `C_OM = 0.9`.
pub fn fig2a() -> Result<Table> {
    spectrum_table(
        &figure_params(FIG2A_COOPERATIVITY),
        &linear_grid(0.0, 2.0 * FIG_OMEGA_M, 400),
    )
}

/// Noise-optimal LO power split against cooperativity; `reference` is the
/// lower covariance eigenvalue on resonance.
pub fn fig2b() -> Result<Table> {
    Ok(sweep_table(&sweep(
        &figure_params(1.0),
        &default_cooperativity_grid(),
        Objective::Noise,
    )?))
}

/// Optimal synodyne and phase-quadrature homodyne force imprecision against
/// cooperativity, both divided by the homodyne SQL.
pub fn fig3a() -> Result<Table> {
    imprecision_table(&figure_params(1.0), &default_cooperativity_grid())
}

pub fn imprecision_table(template: &SystemParams, grid: &[f64]) -> Result<Table> {
    check_grid(grid)?;
    let s_sql = sql(template)?.s_sql;
    let mut t = Table::new(&["c_om", "synodyne", "homodyne"]);
    for &c in grid {
        let p = template.with_cooperativity(c);
        let (spinor, _) = crate::optimize::optimal_force_spinor(&p)?;
        let syn = force_imprecision(&p, &spinor)?;
        let hom = homodyne_imprecision(&p)?;
        t.push_nums(&[c, syn / s_sql, hom / s_sql])?;
    }
    Ok(t)
}

/// Force-optimal LO power split against cooperativity (`section = sweep`),
/// followed by the unit-intensity LO envelope over one mechanical cycle at
/// each inset cooperativity (`section = waveform`).
pub fn fig3b() -> Result<Table> {
    let template = figure_params(1.0);
    let mut t = Table::new(&[
        "section", "c_om", "pow_am", "pow_pm", "t", "re_alpha", "im_alpha",
    ]);
    for r in sweep(&template, &default_cooperativity_grid(), Objective::Force)? {
        t.push(vec![
            "sweep".into(),
            r.c_om.into(),
            r.pow_am.into(),
            r.pow_pm.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ])?;
    }
    let period = 2.0 * PI / template.omega_m;
    for c in FIG3B_WAVEFORM_COOPERATIVITIES {
        let (spinor, row) = sweep_point(&template, c, Objective::Force)?;
        let tones = tones_from_spinor(&spinor, 1.0, template.omega_m)?;
        for time in linear_grid(0.0, period, WAVEFORM_POINTS - 1) {
            let a = tones.envelope(time);
            t.push(vec![
                "waveform".into(),
                c.into(),
                row.pow_am.into(),
                row.pow_pm.into(),
                time.into(),
                a.re.into(),
                a.im.into(),
            ])?;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2a_resonance_row() {
        let t = fig2a().unwrap();
        assert_eq!(t.len(), 401);
        let omega = t.numbers("omega").unwrap();
        let k = omega.iter().position(|w| (w - 0.2).abs() < 1e-15).unwrap();
        let row = &t.rows[k];
        let get = |name: &str| row[t.column_index(name).unwrap()].as_f64().unwrap();
        assert!((get("eig_minus") - 0.2965723714291315).abs() < 1e-10);
        assert!((get("hom_min") - 0.4999986347275571).abs() < 1e-10);
        assert!((get("c22") - 3.2556502117878425).abs() < 1e-10);
        assert_eq!(get("c11"), 0.5);
    }

    #[test]
    fn fig2b_reference_is_reached() {
        let t = fig2b().unwrap();
        assert_eq!(t.len(), 32);
        // the quadratic form cancels terms of order c22, which grows with C_OM
        for (o, r) in t
            .numbers("objective")
            .unwrap()
            .iter()
            .zip(t.numbers("reference").unwrap())
        {
            assert!((o - r).abs() <= 1e-10 * r, "{o} {r}");
        }
    }

    #[test]
    fn fig3a_crosses_below_homodyne() {
        let t = fig3a().unwrap();
        let syn = t.numbers("synodyne").unwrap();
        let hom = t.numbers("homodyne").unwrap();
        assert!(syn.windows(2).all(|w| w[1] < w[0]));
        assert!(syn.iter().zip(&hom).all(|(s, h)| s <= h));
        // the homodyne curve touches 1 near the SQL cooperativity
        let min_hom = hom.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((1.0..1.05).contains(&min_hom));
    }

    #[test]
    fn fig3b_sections() {
        let t = fig3b().unwrap();
        let sec = t.column_index("section").unwrap();
        let sweep_rows = t
            .rows
            .iter()
            .filter(|r| r[sec] == Cell::Text("sweep".into()))
            .count();
        let wave_rows = t
            .rows
            .iter()
            .filter(|r| r[sec] == Cell::Text("waveform".into()))
            .count();
        assert_eq!(sweep_rows, 32);
        assert_eq!(wave_rows, 2 * WAVEFORM_POINTS);
        // unit intensity: the envelope's mean square over a cycle is 1
        let re = t.numbers("re_alpha").unwrap();
        let im = t.numbers("im_alpha").unwrap();
        let first: f64 = (0..WAVEFORM_POINTS - 1)
            .map(|i| re[i] * re[i] + im[i] * im[i])
            .sum::<f64>()
            / (WAVEFORM_POINTS - 1) as f64;
        assert!((first - 1.0).abs() < 1e-12, "{first}");
    }

    #[test]
    fn figures_are_reproducible() {
        assert_eq!(fig3b().unwrap(), fig3b().unwrap());
        assert_eq!(fig2a().unwrap(), fig2a().unwrap());
    }
}
