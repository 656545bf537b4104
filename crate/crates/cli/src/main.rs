//! `abpeakon`: run colliding 2-peakon cases, certify the approach to the
//! collision profile, and sweep the `(a, b)` quadrants.

mod certify;
mod config;
mod output;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use config::{read_settings, ExperimentConfig, Settings};

#[derive(Parser)]
#[command(name = "abpeakon", version, about = "Two-peakon collisions in the cubic ab-family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one case to its first event and export the time series
    RunCase(RunArgs),
    /// Check finite collision time, bounded momenta, H^s convergence and reversibility
    Certify(RunArgs),
    /// Run the colliding construction over a parameter grid
    Sweep(SweepArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value file, or a manifest.json from an earlier run
    #[arg(long)]
    config: Option<PathBuf>,
    /// case1..case4, forq, novikov-reduced or custom
    #[arg(long)]
    case: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    c: Option<String>,
    /// Sobolev index; repeat or separate with commas
    #[arg(long = "s", allow_hyphen_values = true)]
    s: Vec<String>,
    #[arg(long)]
    rel_tol: Option<String>,
    #[arg(long)]
    abs_tol: Option<String>,
    /// Certificate bound on the final distance
    #[arg(long)]
    threshold: Option<String>,
    /// Any other config key
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    set: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Values of a; repeat or separate with commas
    #[arg(long, allow_hyphen_values = true)]
    a: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Vec<String>,
    #[arg(long)]
    alpha: Vec<String>,
    #[arg(long)]
    delta: Vec<String>,
    #[arg(long)]
    rel_tol: Option<String>,
    #[arg(long)]
    abs_tol: Option<String>,
    /// Worker threads (0 picks the number of cores)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    format: Option<String>,
}

fn base_settings(path: &Option<PathBuf>) -> Result<Settings> {
    path.as_deref().map_or(Ok(Settings::new()), read_settings)
}

fn put(m: &mut Settings, k: &str, v: &Option<String>) {
    if let Some(v) = v {
        m.insert(k.into(), v.clone());
    }
}

fn put_list(m: &mut Settings, k: &str, v: &[String]) {
    if !v.is_empty() {
        m.insert(k.into(), v.join(","));
    }
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let mut m = base_settings(&self.config)?;
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else { bail!("--set expects KEY=VALUE, got '{kv}'") };
            let extra = config::parse_settings(&format!("{k}={v}"))?;
            m.extend(extra);
        }
        put(&mut m, "case", &self.case);
        put(&mut m, "a", &self.a);
        put(&mut m, "b", &self.b);
        put(&mut m, "alpha", &self.alpha);
        put(&mut m, "delta", &self.delta);
        put(&mut m, "mu", &self.mu);
        put(&mut m, "c", &self.c);
        put_list(&mut m, "s", &self.s);
        put(&mut m, "rel_tol", &self.rel_tol);
        put(&mut m, "abs_tol", &self.abs_tol);
        put(&mut m, "threshold", &self.threshold);
        put(&mut m, "format", &self.format);
        Ok(m)
    }
}

impl SweepArgs {
    fn settings(&self) -> Result<Settings> {
        let mut m = base_settings(&self.config)?;
        put_list(&mut m, "a", &self.a);
        put_list(&mut m, "b", &self.b);
        put_list(&mut m, "alpha", &self.alpha);
        put_list(&mut m, "delta", &self.delta);
        put(&mut m, "rel_tol", &self.rel_tol);
        put(&mut m, "abs_tol", &self.abs_tol);
        put(&mut m, "format", &self.format);
        Ok(m)
    }
}

const CERTIFY_S: [f64; 3] = [0.5, 1.0, 1.4];

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::RunCase(args) => {
            let cfg = ExperimentConfig::resolve(&args.settings()?, &[])?;
            run::run_case(&cfg, &args.out)
        }
        Command::Certify(args) => {
            let cfg = ExperimentConfig::resolve(&args.settings()?, &CERTIFY_S)?;
            certify::certify(&cfg, &args.out)
        }
        Command::Sweep(args) => {
            let cfg = sweep::SweepConfig::resolve(&args.settings()?)?;
            sweep::sweep(&cfg, &args.out, args.jobs)
        }
    }
}
