//! `synodyne`: closed-form spectra, LO optimization, SQL, Langevin
//! simulation and figure datasets from the command line.

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use config::{load_config_file, resolve, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "synodyne",
    version,
    about = "Complex squeezing and two-tone detection of an optomechanical cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` file (or JSON object) of run settings; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Covariance matrix, its eigenvalues and the optimal homodyne noise per frequency.
    Spectrum,
    /// Optimal LO power split over a cooperativity sweep.
    Optimize,
    /// Homodyne standard quantum limit and the cooperativity reaching it.
    Sql,
    /// Langevin simulation of the dc synodyne noise against the closed form.
    Simulate,
    /// Dataset behind one of the preset figures.
    Figure {
        #[arg(value_parser = commands::FIGURES)]
        name: String,
    },
}

/// Every run setting as an optional flag, named like its config key.
#[derive(clap::Args, Debug, Serialize)]
struct Overrides {
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_m: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_m: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    nbar: Option<f64>,
    /// Coupling G; give this or --cooperativity.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    cooperativity: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_min: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_max: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_points: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c_min: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c_max: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c_points: Option<usize>,
    /// noise | force
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    segments: Option<usize>,
    /// exact | euler_maruyama
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<String>,
    /// noise | force | amplitude | phase
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lo: Option<String>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    force_amplitude: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    force_phase: Option<f64>,
    /// Write the raw simulated record here (plus a `.json` sidecar).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dump: Option<String>,
    /// csv | json
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    #[arg(long, short = 'o', global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<synodyne::Error>() {
            Some(inner) if inner.is_numerical() => Failure::Numerical(e),
            _ => Failure::Usage(e),
        }
    }
}

fn configure(cli: &Cli) -> Result<RunConfig> {
    let mut layers = Vec::new();
    if let Some(path) = &cli.config {
        layers.push(load_config_file(path)?);
    }
    let mut flags = match serde_json::to_value(&cli.overrides)? {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    let (sub, figure) = match &cli.command {
        Command::Spectrum => ("spectrum", None),
        Command::Optimize => ("optimize", None),
        Command::Sql => ("sql", None),
        Command::Simulate => ("simulate", None),
        Command::Figure { name } => ("figure", Some(name.clone())),
    };
    flags.insert("subcommand".into(), Value::from(sub));
    if let Some(f) = figure {
        flags.insert("figure".into(), Value::from(f));
    }
    layers.push(flags);
    resolve(&layers)
}

fn thread_cap() -> Result<()> {
    if let Ok(raw) = std::env::var("SYNODYNE_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .with_context(|| format!("SYNODYNE_THREADS must be a positive integer, got `{raw}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    thread_cap()?;
    let cfg = configure(cli)?;
    let out = commands::run(&cfg)?;
    match &cfg.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {path}"))?;
            let mut w = BufWriter::new(file);
            output::write(&out, &cfg, &mut w)?;
            w.flush().context("writing output")?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            output::write(&out, &cfg, &mut lock)?;
        }
    }
    Ok(())
}

// A reader such as `head` closing stdout early is not an error.
fn closed_pipe(e: &anyhow::Error) -> bool {
    use std::io::ErrorKind::BrokenPipe;
    e.chain().any(|c| {
        if let Some(io) = c.downcast_ref::<std::io::Error>() {
            return io.kind() == BrokenPipe;
        }
        if let Some(csv) = c.downcast_ref::<csv::Error>() {
            return matches!(csv.kind(), csv::ErrorKind::Io(io) if io.kind() == BrokenPipe);
        }
        c.downcast_ref::<serde_json::Error>()
            .is_some_and(|j| j.io_error_kind() == Some(BrokenPipe))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) if closed_pipe(&e) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}
