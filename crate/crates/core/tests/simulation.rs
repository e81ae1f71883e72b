use std::f64::consts::PI;

use num_complex::Complex64;
use synodyne::detection::{LoSpinor, LoTones};
use synodyne::langevin::{
    build_state_space, demodulate_synodyne, dump_records, psd_welch, read_records, simulate,
    simulate_spectra, temporal_phase_components, ForceProfile, Scheme, SimConfig, AM_OUT, PM_OUT,
};
use synodyne::{
    covariance_at, make_params, optimal_noise_spinor, tones_from_spinor, Coupling, SystemParams,
};

fn params(gamma_m: f64, c: f64, nbar: f64) -> SystemParams {
    make_params(0.2, gamma_m, nbar, Coupling::Cooperativity(c)).unwrap()
}

fn cfg(dt: f64, seg: usize, segments: usize, seed: u64) -> SimConfig {
    let mut c = SimConfig::new(dt, (seg * segments) as f64 * dt, seed);
    c.segments = segments;
    c
}

// Mean of estimate/expected over the bins in [lo, hi].
fn band_ratio(omega: &[f64], est: &[f64], expected: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let r: Vec<f64> = omega
        .iter()
        .zip(est)
        .filter(|(w, _)| (lo..=hi).contains(*w))
        .map(|(&w, &s)| s / expected(w))
        .collect();
    assert!(r.len() > 10);
    r.iter().sum::<f64>() / r.len() as f64
}

// Mean and rms of (estimate - expected) / se over the bins in [lo, hi].
fn z_stats(omega: &[f64], z: impl Fn(usize) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let zs: Vec<f64> = (0..omega.len())
        .filter(|&b| (lo..=hi).contains(&omega[b]))
        .map(z)
        .collect();
    assert!(zs.len() > 10);
    let n = zs.len() as f64;
    (
        zs.iter().sum::<f64>() / n,
        (zs.iter().map(|z| z * z).sum::<f64>() / n).sqrt(),
    )
}

#[test]
fn uncoupled_output_is_vacuum() {
    let p = params(0.01, 0.0, 2.0);
    let ss = build_state_space(&p).unwrap();
    let cs = simulate_spectra(&ss, &cfg(0.125, 4096, 64, 1), None).unwrap();
    for ch in 0..2 {
        let s = cs.auto(ch);
        let n = s.len() - 2;
        let mean = s[1..=n].iter().sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "channel {ch}: {mean}");
    }
    let cross =
        (1..cs.bins() - 1).map(|b| cs.get(b, 0, 1).re).sum::<f64>() / (cs.bins() - 2) as f64;
    assert!(cross.abs() < 0.005);
}

#[test]
fn phase_quadrature_follows_closed_form_near_resonance() {
    let p = params(0.01, 0.9, 0.0);
    let ss = build_state_space(&p).unwrap();
    let cs = simulate_spectra(&ss, &cfg(0.125, 1 << 15, 64, 2), None).unwrap();
    let cov = |b: usize| covariance_at(&p, cs.omega[b]).unwrap();
    let (mean, rms) = z_stats(
        &cs.omega,
        |b| (cs.get(b, 1, 1).re - cov(b).c22) / cs.auto_stderr(1, b),
        0.16,
        0.24,
    );
    assert!(
        mean.abs() < 0.5 && rms < 1.5,
        "c22 z mean {mean}, rms {rms}"
    );
    let (mean, rms) = z_stats(
        &cs.omega,
        |b| (cs.get(b, 0, 1).im - cov(b).c12.im) / cs.cross_stderr(0, 1, b).1,
        0.16,
        0.24,
    );
    assert!(
        mean.abs() < 0.5 && rms < 1.5,
        "Im c12 z mean {mean}, rms {rms}"
    );
    let (mean, rms) = z_stats(
        &cs.omega,
        |b| (cs.get(b, 0, 1).re - cov(b).c12.re) / cs.cross_stderr(0, 1, b).0,
        0.16,
        0.24,
    );
    assert!(
        mean.abs() < 0.5 && rms < 1.5,
        "Re c12 z mean {mean}, rms {rms}"
    );
}

#[test]
fn euler_scheme_reproduces_spectrum() {
    let p = make_params(0.2, 0.05, 0.0, Coupling::Cooperativity(0.9)).unwrap();
    let ss = build_state_space(&p).unwrap();
    let mut c = cfg(0.01, 1 << 17, 48, 3);
    c.scheme = Scheme::EulerMaruyama;
    let ts = simulate(&ss, &c).unwrap();
    assert_eq!(ts.t0, 0.0);
    let pm = psd_welch(ts.channel(PM_OUT).unwrap(), c.dt, 1 << 17, 0.5).unwrap();
    let c22 = |b: usize| covariance_at(&p, pm.omega[b]).unwrap().c22;
    let (mean, rms) = z_stats(
        &pm.omega,
        |b| (pm.psd[b] - c22(b)) / pm.stderr[b],
        0.12,
        0.28,
    );
    assert!(
        mean.abs() < 0.5 && rms < 1.5,
        "c22 z mean {mean}, rms {rms}"
    );
    let am = psd_welch(ts.channel(AM_OUT).unwrap(), c.dt, 1 << 17, 0.5).unwrap();
    let ratio = band_ratio(&am.omega, &am.psd, |_| 0.5, 0.1, 1.0);
    assert!((ratio - 1.0).abs() < 0.02, "vacuum ratio {ratio}");
}

#[test]
fn demodulated_vacuum_reads_half() {
    let p = params(0.01, 0.0, 0.0);
    let ss = build_state_space(&p).unwrap();
    let tones = LoTones::new(Complex64::new(0.3, 0.8), Complex64::new(-0.5, 0.1), 0.2).unwrap();
    let cs = simulate_spectra(&ss, &cfg(0.125, 4096, 64, 4), Some(&tones)).unwrap();
    let xi = cs.auto(2);
    let lo = xi[..200].iter().sum::<f64>() / 200.0;
    assert!((lo - 0.5).abs() < 0.02, "{lo}");
}

#[test]
fn demodulated_dc_matches_optimal_noise() {
    let p = params(0.01, 0.9, 0.0);
    let ss = build_state_space(&p).unwrap();
    let (spinor, c_minus) = optimal_noise_spinor(&covariance_at(&p, p.omega_m).unwrap());
    let tones = tones_from_spinor(&spinor, 1.0, p.omega_m).unwrap();
    let cs = simulate_spectra(&ss, &cfg(0.125, 1 << 16, 256, 5), Some(&tones)).unwrap();
    let dc = cs.get(0, 2, 2).re;
    assert!(
        (dc - c_minus).abs() < 3.0 * cs.auto_stderr(2, 0),
        "{dc} vs {c_minus}"
    );

    let ts = simulate(&ss, &cfg(0.125, 1 << 12, 4, 6)).unwrap();
    let xi_ts = demodulate_synodyne(&ts, &tones).unwrap();
    assert_eq!(xi_ts.len(), ts.len());
    assert_eq!(xi_ts.t0, ts.t0);
}

#[test]
fn temporal_phase_tracks_force_phase() {
    let p = params(0.01, 0.9, 0.0);
    let ss = build_state_space(&p).unwrap().without_noise();
    let grid: Vec<f64> = (0..360).map(|k| k as f64 * PI / 180.0).collect();
    let peak = |phase: f64| {
        let c = cfg(0.125, 1 << 15, 1, 7).with_force(Some(ForceProfile {
            amplitude: 1.0,
            frequency: p.omega_m,
            phase,
        }));
        let ts = simulate(&ss, &c).unwrap();
        let v =
            temporal_phase_components(ts.channel(PM_OUT).unwrap(), ts.dt, ts.t0, p.omega_m, &grid)
                .unwrap();
        let k = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        (grid[k], v[k])
    };
    let (x0, v0) = peak(0.0);
    for shift in [0.5, 1.0, 2.0] {
        let (x, v) = peak(shift);
        let d = (x - x0 - shift).rem_euclid(2.0 * PI);
        let d = d.min(2.0 * PI - d);
        assert!(d <= 1.5 * PI / 180.0, "shift {shift}: moved by {}", x - x0);
        assert!((v / v0 - 1.0).abs() < 1e-3);
    }
}

#[test]
fn temporal_components_are_linear_in_record() {
    let p = params(0.01, 0.9, 0.0);
    let ss = build_state_space(&p).unwrap();
    let a = simulate(&ss, &cfg(0.125, 1 << 15, 1, 8)).unwrap();
    let b = simulate(&ss, &cfg(0.125, 1 << 15, 1, 9)).unwrap();
    let (ra, rb) = (a.channel(PM_OUT).unwrap(), b.channel(PM_OUT).unwrap());
    let sum: Vec<f64> = ra.iter().zip(rb).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
    let grid = [0.0, 0.7, 2.0];
    let f = |r: &[f64]| temporal_phase_components(r, a.dt, a.t0, 0.2, &grid).unwrap();
    let (fa, fb, fs) = (f(ra), f(rb), f(&sum));
    for i in 0..grid.len() {
        let lin = 2.0 * fa[i] - 3.0 * fb[i];
        assert!((fs[i] - lin).abs() <= 1e-9 * (fa[i].abs() + fb[i].abs()).max(1.0));
    }
}

#[test]
fn noise_phase_components_have_expected_spread() {
    // each component of vacuum noise has variance S T / 2 with S = 1/2
    let p = params(0.01, 0.0, 0.0);
    let ss = build_state_space(&p).unwrap();
    let n = 1 << 15;
    let reps = 200;
    let vals: Vec<f64> = (0..reps)
        .map(|r| {
            let ts = simulate(&ss, &cfg(0.125, n, 1, 10).with_run(r)).unwrap();
            temporal_phase_components(ts.channel(AM_OUT).unwrap(), ts.dt, ts.t0, 0.2, &[0.3])
                .unwrap()[0]
        })
        .collect();
    let t = n as f64 * 0.125;
    let var = vals.iter().map(|v| v * v).sum::<f64>() / reps as f64;
    let ratio = var / (0.25 * t);
    // 200 samples: relative spread 0.1
    assert!((ratio - 1.0).abs() < 0.35, "{ratio}");
}

#[test]
fn dumped_record_reads_back() {
    let p = params(0.01, 0.9, 0.5);
    let ss = build_state_space(&p).unwrap();
    let ts = simulate(&ss, &cfg(0.125, 1000, 1, 11)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rec.bin");
    dump_records(&ts, 11, 0, Some(&p), &path).unwrap();
    let (back, meta) = read_records(&path).unwrap();
    assert_eq!(back.channels, ts.channels);
    assert_eq!(back.names, ts.names);
    assert_eq!(meta.samples, ts.len());
    assert_eq!(meta.params, Some(p));
    assert_eq!(meta.seed, 11);
}

#[test]
fn amplitude_lo_ignores_mechanics() {
    let p = params(0.01, 5.0, 3.0);
    let ss = build_state_space(&p).unwrap();
    let tones = tones_from_spinor(&LoSpinor::amplitude(), 2.0, 0.2).unwrap();
    let cs = simulate_spectra(&ss, &cfg(0.125, 4096, 64, 12), Some(&tones)).unwrap();
    let xi = cs.auto(2);
    let mean = xi[1..1000].iter().sum::<f64>() / 999.0;
    assert!((mean - 0.5).abs() < 0.01, "{mean}");
}
