use std::path::Path;

use ab_peakon::{
    hs_distance, integrate, CollisionFunction, EventKind, InvariantContext, PeakonState64, SobolevIndex,
    Trajectory64,
};
use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Settings};
use crate::output::{write_json, Cell, Table};

pub fn simulate(cfg: &ExperimentConfig) -> Result<Trajectory64> {
    integrate(&cfg.initial, &cfg.params, &cfg.integration).context("integration failed")
}

/// `samples` uniform points on `[0, T]` merged with the approach times
/// `T - 10^-k`.
pub fn time_grid(end: f64, samples: usize, k_min: u32, k_max: u32) -> Vec<f64> {
    let n = samples.max(2) - 1;
    let mut ts: Vec<f64> = (0..=n).map(|i| end * i as f64 / n as f64).collect();
    ts.extend(approach_times(end, k_min, k_max).into_iter().map(|(_, t)| t));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

pub fn approach_times(end: f64, k_min: u32, k_max: u32) -> Vec<(u32, f64)> {
    (k_min..=k_max)
        .map(|k| (k, end - 10f64.powi(-(k as i32))))
        .filter(|&(_, t)| t > 0.0)
        .collect()
}

pub fn manifest(command: &str, settings: &Settings, resolved: Value, outputs: &[String], notes: &[String]) -> Value {
    json!({
        "tool": "abpeakon",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": settings,
        "resolved": resolved,
        "outputs": outputs,
        "notes": notes,
    })
}

pub fn resolved_summary(cfg: &ExperimentConfig, traj: &Trajectory64) -> Value {
    let ev = traj.terminal_event();
    let (case_id, eps, bound) = match &cfg.spec {
        Some(s) => (Some(s.case_id.name()), Some(s.epsilon(&cfg.params)), Some(s.time_bound(&cfg.params))),
        None => (None, None, None),
    };
    json!({
        "case_id": case_id,
        "epsilon": eps,
        "time_bound": bound,
        "terminal_event": ev.kind.name(),
        "event_time": ev.time,
    })
}

fn event_table(traj: &Trajectory64) -> Table {
    let mut t = Table::new(["kind", "time", "p1", "p2", "q1", "q2", "simultaneous"]);
    for ev in traj.events() {
        let s = &ev.state_at_event;
        let sim = ev.simultaneous.iter().map(|k| k.name()).collect::<Vec<_>>().join(";");
        t.push(vec![
            Cell::Text(ev.kind.name().into()),
            Cell::Num(ev.time),
            Cell::Num(s.p1),
            Cell::Num(s.p2),
            Cell::Num(s.q1),
            Cell::Num(s.q2),
            Cell::Text(sim),
        ]);
    }
    t
}

fn trajectory_table(cfg: &ExperimentConfig, traj: &Trajectory64) -> Result<Table> {
    let mut columns: Vec<String> =
        ["t", "q1", "q2", "p1", "p2", "q", "h", "w", "z", "z_closed_form"].map(String::from).to_vec();
    columns.extend(cfg.s.iter().map(|s| format!("hs_{s}")));
    let mut table = Table::new(columns);

    let ctx = InvariantContext::from_initial(cfg.params, &cfg.initial).ok();
    let collision = match traj.terminal_event().kind {
        EventKind::Horizon => None,
        _ => Some(CollisionFunction::from_event(traj.terminal_event())?),
    };
    let indices = cfg.s.iter().map(|&s| SobolevIndex::new(s)).collect::<ab_peakon::Result<Vec<_>>>()?;

    let grid = time_grid(traj.end_time(), cfg.samples, cfg.k_min, cfg.k_max);
    let rows = grid
        .par_iter()
        .map(|&t| {
            let st: PeakonState64 = traj.state_at(t)?;
            let (q, h, w, z) = (st.q2 - st.q1, st.p2 - st.p1, st.p1 + st.p2, st.p1 * st.p2);
            let zc = ctx.as_ref().map_or(f64::NAN, |c| c.z_closed_form(q));
            let mut row = vec![t, st.q1, st.q2, st.p1, st.p2, q, h, w, z, zc];
            for &idx in &indices {
                row.push(match &collision {
                    Some(c) => hs_distance(&st, c, idx)?,
                    None => f64::NAN,
                });
            }
            Ok(row.into_iter().map(Cell::Num).collect())
        })
        .collect::<ab_peakon::Result<Vec<Vec<Cell>>>>()?;
    table.rows = rows;
    Ok(table)
}

pub fn run_case(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let traj = simulate(cfg)?;
    let mut outputs = vec![
        trajectory_table(cfg, &traj)?.write(out, "trajectory", cfg.format)?,
        event_table(&traj).write(out, "events", cfg.format)?,
    ];
    outputs.push("manifest.json".into());
    let m = manifest("run-case", &cfg.to_settings(), resolved_summary(cfg, &traj), &outputs, &cfg.notes());
    write_json(&out.join("manifest.json"), &m)?;
    let ev = traj.terminal_event();
    println!("{}: {} at t = {:.16e}", cfg.preset.name(), ev.kind.name(), ev.time);
    Ok(())
}
