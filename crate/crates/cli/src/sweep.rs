use std::path::Path;

use ab_peakon::{integrate, ABParams64, CaseSpec, EventKind, IntegrationConfig};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{fmt_list, parse_list, parse_real, Format, Settings};
use crate::output::{write_json, Cell, Table};
use crate::run::manifest;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub event_tol: f64,
    pub format: Format,
}

const SWEEP_KEYS: &[&str] = &["a", "b", "alpha", "delta", "rel_tol", "abs_tol", "event_tol", "format"];

impl SweepConfig {
    pub fn resolve(settings: &Settings) -> Result<Self> {
        if let Some(k) = settings.keys().find(|k| !SWEEP_KEYS.contains(&k.as_str())) {
            bail!("key '{k}' does not apply to sweep");
        }
        let list = |k: &str, default: &[f64]| -> Result<Vec<f64>> {
            match settings.get(k) {
                Some(v) => parse_list(v).with_context(|| format!("key '{k}'")),
                None => Ok(default.to_vec()),
            }
        };
        let real = |k: &str, default: f64| -> Result<f64> {
            settings.get(k).map_or(Ok(default), |v| parse_real(v).with_context(|| format!("key '{k}'")))
        };
        let base = IntegrationConfig::<f64>::default();
        let cfg = Self {
            a: list("a", &[])?,
            b: list("b", &[])?,
            alpha: list("alpha", &[ab_peakon::params::DEFAULT_ALPHA])?,
            delta: list("delta", &[ab_peakon::params::DEFAULT_DELTA])?,
            rel_tol: real("rel_tol", base.rel_tol)?,
            abs_tol: real("abs_tol", base.abs_tol)?,
            event_tol: real("event_tol", base.event_tol)?,
            format: match settings.get("format").map(String::as_str) {
                None | Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some(other) => bail!("unknown format '{other}'"),
            },
        };
        if cfg.a.contains(&0.0) {
            bail!("grid contains a = 0; every point needs a != 0");
        }
        if cfg.b.contains(&2.0) {
            bail!("grid contains b = 2; every point needs b != 2");
        }
        Ok(cfg)
    }

    pub fn to_settings(&self) -> Settings {
        let mut m = Settings::new();
        m.insert("a".into(), fmt_list(&self.a));
        m.insert("b".into(), fmt_list(&self.b));
        m.insert("alpha".into(), fmt_list(&self.alpha));
        m.insert("delta".into(), fmt_list(&self.delta));
        m.insert("rel_tol".into(), self.rel_tol.to_string());
        m.insert("abs_tol".into(), self.abs_tol.to_string());
        m.insert("event_tol".into(), self.event_tol.to_string());
        m.insert("format".into(), self.format.name().into());
        m
    }

    pub fn points(&self) -> Vec<[f64; 4]> {
        let mut pts = Vec::new();
        for &a in &self.a {
            for &b in &self.b {
                for &alpha in &self.alpha {
                    for &delta in &self.delta {
                        pts.push([a, b, alpha, delta]);
                    }
                }
            }
        }
        pts
    }
}

struct PointResult {
    case: String,
    mu: f64,
    c: f64,
    epsilon: f64,
    time: f64,
    time_bound: f64,
    bound_ok: bool,
    event: String,
    error: String,
}

impl PointResult {
    fn failed(error: String) -> Self {
        Self {
            case: String::new(),
            mu: f64::NAN,
            c: f64::NAN,
            epsilon: f64::NAN,
            time: f64::NAN,
            time_bound: f64::NAN,
            bound_ok: false,
            event: String::new(),
            error,
        }
    }
}

fn run_point(cfg: &SweepConfig, [a, b, alpha, delta]: [f64; 4]) -> PointResult {
    let params = ABParams64::new(a, b);
    let spec = match CaseSpec::preset(&params, alpha, delta) {
        Ok(s) => s,
        Err(e) => return PointResult::failed(e.to_string()),
    };
    let ic = IntegrationConfig { event_tol: cfg.event_tol, ..IntegrationConfig::for_case(&spec, &params) }
        .with_tolerances(cfg.rel_tol, cfg.abs_tol);
    let eps = spec.epsilon(&params);
    let bound = spec.time_bound(&params);
    let mut r = PointResult {
        case: spec.case_id.name().into(),
        mu: spec.mu,
        c: spec.c.unwrap_or(f64::NAN),
        epsilon: eps,
        time_bound: bound,
        ..PointResult::failed(String::new())
    };
    match integrate(&ab_peakon::make_initial_profile(&spec), &params, &ic) {
        Ok(traj) => {
            let ev = traj.terminal_event();
            r.time = ev.time;
            r.event = ev.kind.name().into();
            r.bound_ok = ev.kind != EventKind::Horizon && ev.time <= bound * (1.0 + 1e-9);
        }
        Err(e) => r.error = e.to_string(),
    }
    r
}

pub fn sweep(cfg: &SweepConfig, out: &Path, jobs: usize) -> Result<()> {
    let points = cfg.points();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let results: Vec<PointResult> = pool.install(|| points.par_iter().map(|&p| run_point(cfg, p)).collect());

    let mut table = Table::new([
        "a", "b", "alpha", "delta", "case", "mu", "c", "epsilon", "T", "time_bound", "bound_ok", "event", "error",
    ]);
    for (p, r) in points.iter().zip(&results) {
        table.push(vec![
            Cell::Num(p[0]),
            Cell::Num(p[1]),
            Cell::Num(p[2]),
            Cell::Num(p[3]),
            Cell::Text(r.case.clone()),
            Cell::Num(r.mu),
            Cell::Num(r.c),
            Cell::Num(r.epsilon),
            Cell::Num(r.time),
            Cell::Num(r.time_bound),
            Cell::Bool(r.bound_ok),
            Cell::Text(r.event.clone()),
            Cell::Text(r.error.clone()),
        ]);
    }
    let name = table.write(out, "sweep", cfg.format)?;
    let failures = results.iter().filter(|r| !r.bound_ok).count();
    let summary = json!({ "points": points.len(), "failures": failures });
    let m = manifest("sweep", &cfg.to_settings(), summary, &[name, "manifest.json".into()], &[]);
    write_json(&out.join("manifest.json"), &m)?;
    println!("{} points, {} failures", points.len(), failures);
    for (p, r) in points.iter().zip(&results).filter(|(_, r)| !r.bound_ok) {
        println!("  (a, b, alpha, delta) = {p:?}: {}", if r.error.is_empty() { &r.event } else { &r.error });
    }
    Ok(())
}
