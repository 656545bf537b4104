use std::path::Path;

use ab_peakon::{hs_distance, integrate_reversed, CollisionFunction, EventKind, SobolevIndex, Trajectory64};
use anyhow::{bail, Result};
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::output::write_json;
use crate::run::{approach_times, manifest, resolved_summary, simulate};

pub const FINITE_T: &str = "finite T";
pub const BOUNDED_MOMENTA: &str = "bounded momenta";
pub const DISTANCES: &str = "distances decreasing below threshold";
pub const ROUND_TRIP: &str = "round trip";

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct DistanceSeries {
    pub s: f64,
    pub k: Vec<u32>,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub decreasing: bool,
    pub below_threshold: bool,
}

fn finite_time(cfg: &ExperimentConfig, traj: &Trajectory64) -> Check {
    let ev = traj.terminal_event();
    let finite = ev.kind != EventKind::Horizon && ev.time.is_finite();
    let (passed, detail) = match &cfg.spec {
        Some(spec) => {
            let bound = spec.time_bound(&cfg.params);
            let ok = finite && ev.time <= bound * (1.0 + 1e-9);
            (ok, format!("{} at T = {:e}, bound mu/eps = {bound:e}", ev.kind.name(), ev.time))
        }
        None => (finite, format!("{} at T = {:e}", ev.kind.name(), ev.time)),
    };
    Check { name: FINITE_T, passed, detail }
}

fn bounded_momenta(traj: &Trajectory64) -> Check {
    let m = traj.maxima();
    let passed = m[0].is_finite() && m[1].is_finite();
    Check { name: BOUNDED_MOMENTA, passed, detail: format!("max |p1| = {:e}, max |p2| = {:e}", m[0], m[1]) }
}

fn distances(cfg: &ExperimentConfig, traj: &Trajectory64) -> Result<(Check, Vec<DistanceSeries>)> {
    let c = match CollisionFunction::from_event(traj.terminal_event()) {
        Ok(c) => c,
        Err(e) => return Ok((Check { name: DISTANCES, passed: false, detail: e.to_string() }, Vec::new())),
    };
    let times = approach_times(traj.end_time(), cfg.k_min, cfg.k_max);
    let mut series = Vec::new();
    for &s in &cfg.s {
        let idx = SobolevIndex::new(s)?;
        let d = times
            .iter()
            .map(|&(_, t)| hs_distance(&traj.state_at(t)?, &c, idx))
            .collect::<ab_peakon::Result<Vec<f64>>>()?;
        let decreasing = d.windows(2).all(|w| w[1] < w[0]);
        let below_threshold = d.last().is_some_and(|&x| x <= cfg.threshold);
        series.push(DistanceSeries {
            s,
            k: times.iter().map(|&(k, _)| k).collect(),
            times: times.iter().map(|&(_, t)| t).collect(),
            distances: d,
            decreasing,
            below_threshold,
        });
    }
    let failed: Vec<String> = series
        .iter()
        .filter(|d| !(d.decreasing && d.below_threshold))
        .map(|d| format!("s = {} (final {:e})", d.s, d.distances.last().copied().unwrap_or(f64::NAN)))
        .collect();
    let passed = failed.is_empty() && !series.is_empty() && times.len() >= 2;
    let detail = if passed {
        format!("threshold {:e}", cfg.threshold)
    } else if series.is_empty() {
        "no Sobolev index requested".to_string()
    } else {
        format!("threshold {:e} missed for {}", cfg.threshold, failed.join(", "))
    };
    Ok((Check { name: DISTANCES, passed, detail }, series))
}

fn round_trip(cfg: &ExperimentConfig, traj: &Trajectory64) -> Result<Check> {
    let end = traj.end_time();
    let t1 = if end > 1e-3 { end - 1e-3 } else { 0.5 * end };
    let back = integrate_reversed(&traj.state_at(t1)?, &cfg.params, &cfg.integration, t1)?;
    let err = back.final_state().max_abs_diff(&cfg.initial);
    Ok(Check {
        name: ROUND_TRIP,
        passed: err <= cfg.round_trip_tol,
        detail: format!("reversed from t = {t1:e}: error {err:e}, tolerance {:e}", cfg.round_trip_tol),
    })
}

pub fn certify(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let traj = simulate(cfg)?;
    let (dist, series) = distances(cfg, &traj)?;
    let checks = vec![finite_time(cfg, &traj), bounded_momenta(&traj), dist, round_trip(cfg, &traj)?];
    let passed = checks.iter().all(|c| c.passed);
    let ev = traj.terminal_event();
    let report = json!({
        "case": cfg.preset.name(),
        "a": cfg.params.a,
        "b": cfg.params.b,
        "event": ev.kind.name(),
        "T": ev.time,
        "collision_function": CollisionFunction::from_event(ev).ok().map(|c| json!({ "p_star": c.p_star, "q_star": c.q_star })),
        "threshold": cfg.threshold,
        "checks": checks,
        "distances": series,
        "verdict": if passed { "PASS" } else { "FAIL" },
    });
    write_json(&out.join("report.json"), &report)?;
    let outputs = vec!["report.json".to_string(), "manifest.json".to_string()];
    let m = manifest("certify", &cfg.to_settings(), resolved_summary(cfg, &traj), &outputs, &cfg.notes());
    write_json(&out.join("manifest.json"), &m)?;

    for c in &checks {
        println!("{}: {} ({})", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    if !passed {
        let names: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        bail!("certificate failed: {}", names.join(", "));
    }
    println!("{}: PASS", cfg.preset.name());
    Ok(())
}
