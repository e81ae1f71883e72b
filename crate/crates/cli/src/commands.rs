//! Subcommand implementations. Each returns a table or a single record.

use anyhow::{anyhow, bail, Result};
use serde_json::Value;

use synodyne::covariance::covariance_at;
use synodyne::figures::{fig2a, fig2b, fig3a, fig3b, spectrum_table, sweep_table};
use synodyne::langevin::{
    build_state_space, demodulate_synodyne, dump_records, simulate, simulate_spectra, ForceProfile,
};
use synodyne::table::Table;
use synodyne::{
    optimal_force_spinor, optimal_noise_spinor, sql, sweep, synodyne_psd_dc, tones_from_spinor,
    LoSpinor,
};

use crate::config::{LoChoice, RunConfig};

pub enum Output {
    Table(Table),
    Record(Vec<(&'static str, Value)>),
}

pub const FIGURES: [&str; 4] = ["fig2a", "fig2b", "fig3a", "fig3b"];

pub fn run(cfg: &RunConfig) -> Result<Output> {
    match cfg.subcommand.as_str() {
        "spectrum" => Ok(Output::Table(spectrum_table(
            &cfg.params()?,
            &cfg.omega_grid()?,
        )?)),
        "optimize" => {
            let rows = sweep(&cfg.params()?, &cfg.cooperativity_grid()?, cfg.objective)?;
            Ok(Output::Table(sweep_table(&rows)))
        }
        "sql" => {
            let p = sql(&cfg.params()?)?;
            Ok(Output::Record(vec![
                ("c_om_star", Value::from(p.c_om_star)),
                ("s_sql", Value::from(p.s_sql)),
            ]))
        }
        "simulate" => run_simulation(cfg),
        "figure" => {
            let name = cfg
                .figure
                .as_deref()
                .ok_or_else(|| anyhow!("figure name missing"))?;
            let table = match name {
                "fig2a" => fig2a()?,
                "fig2b" => fig2b()?,
                "fig3a" => fig3a()?,
                "fig3b" => fig3b()?,
                other => bail!(
                    "unknown figure `{other}` (expected one of {})",
                    FIGURES.join(", ")
                ),
            };
            Ok(Output::Table(table))
        }
        other => bail!("unknown subcommand `{other}`"),
    }
}

fn lo_spinor(cfg: &RunConfig, params: &synodyne::SystemParams) -> Result<LoSpinor> {
    Ok(match cfg.lo {
        LoChoice::Noise => optimal_noise_spinor(&covariance_at(params, params.omega_m)?).0,
        LoChoice::Force => optimal_force_spinor(params)?.0,
        LoChoice::Amplitude => LoSpinor::amplitude(),
        LoChoice::Phase => LoSpinor::phase(),
    })
}

/// Welch estimate of the dc noise of the demodulated signal against the
/// closed form. A nonzero force adds a dc tone the reference does not
/// include.
fn run_simulation(cfg: &RunConfig) -> Result<Output> {
    let params = cfg.params()?;
    let ss = build_state_space(&params)?;
    let spinor = lo_spinor(cfg, &params)?;
    let tones = tones_from_spinor(&spinor, 1.0, params.omega_m)?;
    let force = (cfg.force_amplitude != 0.0).then_some(ForceProfile {
        amplitude: cfg.force_amplitude,
        frequency: params.omega_m,
        phase: cfg.force_phase,
    });
    let sim_cfg = cfg.sim_config().with_force(force);
    let cs = simulate_spectra(&ss, &sim_cfg, Some(&tones))?;
    let psd_dc = cs.get(0, 2, 2).re;
    let stderr = cs.auto_stderr(2, 0);
    let reference = synodyne_psd_dc(&covariance_at(&params, params.omega_m)?, &spinor);

    if let Some(path) = &cfg.dump {
        let ts = simulate(&ss, &sim_cfg)?;
        let xi = demodulate_synodyne(&ts, &tones)?;
        let mut all = ts;
        all.names.extend(xi.names);
        all.channels.extend(xi.channels);
        dump_records(
            &all,
            sim_cfg.seed,
            sim_cfg.run,
            Some(&params),
            std::path::Path::new(path),
        )?;
    }

    Ok(Output::Record(vec![
        ("psd_dc", Value::from(psd_dc)),
        ("stderr", Value::from(stderr)),
        ("analytic_reference", Value::from(reference)),
        ("z_score", Value::from((psd_dc - reference) / stderr)),
        ("seed", Value::from(sim_cfg.seed)),
        ("run", Value::from(sim_cfg.run)),
        ("samples", Value::from(sim_cfg.samples() as u64)),
        ("welch_segments", Value::from(cs.segments as u64)),
        ("effective_segments", Value::from(cs.effective_segments)),
        ("pow_am", Value::from(spinor.pow_am())),
        ("pow_pm", Value::from(spinor.pow_pm())),
    ]))
}
