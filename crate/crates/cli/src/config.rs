//! Experiment configuration: flat `key = value` files, command-line
//! overrides, and resolution of every default into an [`ExperimentConfig`].
//!
//! Recognised keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `case` | `case1`..`case4`, `forq`, `novikov-reduced`, `custom` | from `a`, `b` |
//! | `a`, `b` | equation parameters (`1/3` style fractions allowed) | preset |
//! | `alpha`, `delta` | magnitude scale and asymmetry | `1`, `0.5` |
//! | `mu`, `c` | initial separation, design constant (`none` for absent) | resolved |
//! | `p1`, `p2`, `q1`, `q2` | explicit initial state (all four) | preset profile |
//! | `rel_tol`, `abs_tol`, `event_tol` | integrator tolerances | `1e-10`, `1e-12`, `1e-12` |
//! | `max_time`, `max_steps` | integration horizon and step budget | `10 mu/eps` or `10`, `1000000` |
//! | `representation` | `full` or `reduced` | `full` |
//! | `samples` | uniform export points on `[0, T]` | `400` |
//! | `k_min`, `k_max` | approach times `T - 10^-k` | `2`, `6` |
//! | `s` | comma-separated Sobolev indices | command dependent |
//! | `format` | `csv` or `json` | `csv` |
//! | `threshold` | certificate bound on the final distance | `1e-3` |
//! | `round_trip_tol` | certificate bound on the reversal error | `1e-6` |
//!
//! A JSON manifest written by an earlier run is accepted in place of a
//! key-value file; its `config` object is read.

use std::collections::BTreeMap;
use std::path::Path;

use ab_peakon::{
    make_initial_profile, resolve_separation, ABParams64, CaseId, CaseSpec, CaseSpec64, Classification,
    IntegrationConfig, IntegrationConfig64, PeakonState64, Representation, SobolevIndex,
};
use anyhow::{anyhow, bail, Context, Result};

pub type Settings = BTreeMap<String, String>;

const KEYS: &[&str] = &[
    "case",
    "a",
    "b",
    "alpha",
    "delta",
    "mu",
    "c",
    "p1",
    "p2",
    "q1",
    "q2",
    "rel_tol",
    "abs_tol",
    "event_tol",
    "max_time",
    "max_steps",
    "representation",
    "samples",
    "k_min",
    "k_max",
    "s",
    "format",
    "threshold",
    "round_trip_tol",
];

pub fn read_settings(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        return settings_from_manifest(&text).with_context(|| format!("parsing manifest {}", path.display()));
    }
    parse_settings(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_settings(text: &str) -> Result<Settings> {
    let mut out = Settings::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
        let k = k.trim().replace('-', "_");
        check_key(&k).with_context(|| format!("line {}", n + 1))?;
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn settings_from_manifest(text: &str) -> Result<Settings> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let cfg = v
        .get("config")
        .and_then(|c| c.as_object())
        .ok_or_else(|| anyhow!("manifest has no config object"))?;
    let mut out = Settings::new();
    for (k, v) in cfg {
        check_key(k)?;
        let s = match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        out.insert(k.clone(), s);
    }
    Ok(out)
}

fn check_key(k: &str) -> Result<()> {
    if KEYS.contains(&k) {
        Ok(())
    } else {
        bail!("unknown key '{k}'")
    }
}

/// Parses a real number, allowing `n/d` fractions.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => n.trim().parse::<f64>()? / d.trim().parse::<f64>()?,
        None => s.parse::<f64>()?,
    };
    if !v.is_finite() {
        bail!("'{s}' is not a finite number");
    }
    Ok(v)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| parse_real(x).with_context(|| format!("bad list entry '{x}'")))
        .collect()
}

pub fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn parse_format(s: &str) -> Result<Format> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => bail!("unknown format '{other}' (expected csv or json)"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Case(CaseId),
    Forq,
    NovikovReduced,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Case(id) => id.name(),
            Preset::Forq => "forq",
            Preset::NovikovReduced => "novikov-reduced",
            Preset::Custom => "custom",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "forq" => Preset::Forq,
            "novikov-reduced" | "novikov" => Preset::NovikovReduced,
            "custom" => Preset::Custom,
            other => Preset::Case(other.parse::<CaseId>()?),
        })
    }

    fn default_ab(self) -> Option<(f64, f64)> {
        match self {
            Preset::Case(CaseId::Case1) => Some((1.0 / 3.0, 3.0)),
            Preset::Case(CaseId::Case2) => Some((1.0 / 3.0, 1.0)),
            Preset::Case(CaseId::Case3) => Some((-1.0, 3.0)),
            Preset::Case(CaseId::Case4) => Some((-1.0, 0.0)),
            Preset::Forq => Some((1.0 / 3.0, 2.0)),
            Preset::NovikovReduced => Some((0.0, 3.0)),
            Preset::Custom => None,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub params: ABParams64,
    pub alpha: f64,
    pub delta: f64,
    pub mu: f64,
    pub c: Option<f64>,
    /// Present when the initial data come from a nonuniqueness construction.
    pub spec: Option<CaseSpec64>,
    pub initial: PeakonState64,
    pub integration: IntegrationConfig64,
    pub samples: usize,
    pub k_min: u32,
    pub k_max: u32,
    pub s: Vec<f64>,
    pub format: Format,
    pub threshold: f64,
    pub round_trip_tol: f64,
}

struct Lookup<'a>(&'a Settings);

impl Lookup<'_> {
    fn raw(&self, k: &str) -> Option<&str> {
        self.0.get(k).map(String::as_str)
    }

    fn real(&self, k: &str) -> Result<Option<f64>> {
        self.raw(k)
            .map(|v| parse_real(v).with_context(|| format!("key '{k}'")))
            .transpose()
    }

    fn real_or(&self, k: &str, default: f64) -> Result<f64> {
        Ok(self.real(k)?.unwrap_or(default))
    }

    fn int_or<N: std::str::FromStr>(&self, k: &str, default: N) -> Result<N>
    where
        N::Err: std::error::Error + Send + Sync + 'static,
    {
        match self.raw(k) {
            Some(v) => v.trim().parse::<N>().with_context(|| format!("key '{k}'")),
            None => Ok(default),
        }
    }
}

impl ExperimentConfig {
    /// Resolves settings into a validated config. `default_s` applies when
    /// the settings carry no `s` key.
    pub fn resolve(settings: &Settings, default_s: &[f64]) -> Result<Self> {
        let l = Lookup(settings);
        let a_in = l.real("a")?;
        let b_in = l.real("b")?;
        let preset = match l.raw("case") {
            Some(name) => Preset::parse(name)?,
            None if a_in.is_some() && b_in.is_some() => Preset::Custom,
            None => bail!("select a case with --case or give both --a and --b"),
        };
        let (a, b) = match (preset.default_ab(), a_in, b_in) {
            (_, Some(a), Some(b)) => (a, b),
            (Some((a0, b0)), a, b) => (a.unwrap_or(a0), b.unwrap_or(b0)),
            (None, _, _) => bail!("case 'custom' needs both a and b"),
        };
        let params = ABParams64::new(a, b);
        let alpha = l.real_or("alpha", ab_peakon::params::DEFAULT_ALPHA)?;
        let delta = l.real_or("delta", ab_peakon::params::DEFAULT_DELTA)?;
        let c_in = match l.raw("c") {
            Some("none") => Some(None),
            Some(_) => Some(l.real("c")?),
            None => None,
        };
        let mu_in = l.real("mu")?;

        let spec = match preset {
            Preset::Case(_) | Preset::Custom => {
                let case_id = match params.classify()? {
                    Classification::Case(id) => id,
                    Classification::DegenerateB => {
                        bail!("b = 2 has frozen momenta and no colliding construction; use --case forq")
                    }
                };
                if let Preset::Case(want) = preset {
                    if want != case_id {
                        bail!("{} needs a and b in its quadrant, got (a, b) = ({a}, {b}) which is {}", want.name(), case_id.name());
                    }
                }
                let (mu, c) = match (mu_in, c_in) {
                    (Some(mu), Some(c)) => (mu, c),
                    (Some(mu), None) => (mu, None),
                    (None, Some(Some(c))) => (ab_peakon::compute_mu(a, c)?, Some(c)),
                    (None, _) => {
                        let sep = resolve_separation(&params)?;
                        (sep.mu, sep.c)
                    }
                };
                let spec = CaseSpec { case_id, alpha, delta, mu, c };
                spec.validate(&params)?;
                Some(spec)
            }
            Preset::Forq | Preset::NovikovReduced => None,
        };
        let (mu, c) = match &spec {
            Some(s) => (s.mu, s.c),
            None => (mu_in.unwrap_or(ab_peakon::params::DEFAULT_MU), c_in.flatten()),
        };

        let explicit = ["p1", "p2", "q1", "q2"].map(|k| l.real(k));
        let explicit = explicit.into_iter().collect::<Result<Vec<_>>>()?;
        let initial = match explicit.as_slice() {
            [Some(p1), Some(p2), Some(q1), Some(q2)] => PeakonState64::new(*p1, *p2, *q1, *q2),
            [None, None, None, None] => match (&spec, preset) {
                (Some(s), _) => make_initial_profile(s),
                // two peakons, larger one behind
                _ => PeakonState64::new(alpha + delta, alpha, 0.0, mu),
            },
            _ => bail!("an explicit initial state needs all of p1, p2, q1, q2"),
        };
        if !initial.is_finite() {
            bail!("initial state is not finite");
        }

        let base = match &spec {
            Some(s) => IntegrationConfig::for_case(s, &params),
            None => IntegrationConfig::default().with_max_time(10.0),
        };
        let representation = match l.raw("representation") {
            Some("full") => Representation::Full,
            Some("reduced") => Representation::Reduced,
            Some(other) => bail!("unknown representation '{other}' (expected full or reduced)"),
            None if preset == Preset::NovikovReduced => Representation::Reduced,
            None => Representation::Full,
        };
        let integration = IntegrationConfig {
            rel_tol: l.real_or("rel_tol", base.rel_tol)?,
            abs_tol: l.real_or("abs_tol", base.abs_tol)?,
            event_tol: l.real_or("event_tol", base.event_tol)?,
            max_time: l.real_or("max_time", base.max_time)?,
            max_steps: l.int_or("max_steps", base.max_steps)?,
            representation,
        };
        integration.validate()?;

        let s = match l.raw("s") {
            Some(v) => parse_list(v).context("key 's'")?,
            None => default_s.to_vec(),
        };
        for &si in &s {
            let idx = SobolevIndex::new(si)?;
            if !idx.is_subcritical() {
                return Err(ab_peakon::Error::SobolevIndexTooLarge { s: si }.into());
            }
        }

        let samples = l.int_or("samples", 400usize)?;
        if samples < 2 {
            bail!("samples must be at least 2");
        }
        let k_min = l.int_or("k_min", 2u32)?;
        let k_max = l.int_or("k_max", 6u32)?;
        if k_min > k_max || k_max > 15 {
            bail!("approach exponents need k_min <= k_max <= 15");
        }
        let format = parse_format(l.raw("format").unwrap_or("csv"))?;
        let threshold = l.real_or("threshold", 1e-3)?;
        let round_trip_tol = l.real_or("round_trip_tol", 1e-6)?;

        Ok(Self {
            preset,
            params,
            alpha,
            delta,
            mu,
            c,
            spec,
            initial,
            integration,
            samples,
            k_min,
            k_max,
            s,
            format,
            threshold,
            round_trip_tol,
        })
    }

    /// Every resolved value as flat settings; resolving them again gives
    /// the same config.
    pub fn to_settings(&self) -> Settings {
        let f = |x: f64| x.to_string();
        let mut m = Settings::new();
        m.insert("case".into(), self.preset.name().into());
        m.insert("a".into(), f(self.params.a));
        m.insert("b".into(), f(self.params.b));
        m.insert("alpha".into(), f(self.alpha));
        m.insert("delta".into(), f(self.delta));
        m.insert("mu".into(), f(self.mu));
        m.insert("c".into(), self.c.map_or("none".into(), f));
        m.insert("p1".into(), f(self.initial.p1));
        m.insert("p2".into(), f(self.initial.p2));
        m.insert("q1".into(), f(self.initial.q1));
        m.insert("q2".into(), f(self.initial.q2));
        let ic = &self.integration;
        m.insert("rel_tol".into(), f(ic.rel_tol));
        m.insert("abs_tol".into(), f(ic.abs_tol));
        m.insert("event_tol".into(), f(ic.event_tol));
        m.insert("max_time".into(), f(ic.max_time));
        m.insert("max_steps".into(), ic.max_steps.to_string());
        let repr = match ic.representation {
            Representation::Full => "full",
            Representation::Reduced => "reduced",
        };
        m.insert("representation".into(), repr.into());
        m.insert("samples".into(), self.samples.to_string());
        m.insert("k_min".into(), self.k_min.to_string());
        m.insert("k_max".into(), self.k_max.to_string());
        m.insert("s".into(), fmt_list(&self.s));
        m.insert("format".into(), self.format.name().into());
        m.insert("threshold".into(), f(self.threshold));
        m.insert("round_trip_tol".into(), f(self.round_trip_tol));
        m
    }

    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        match self.preset {
            Preset::Case(CaseId::Case2) => notes.push(
                "the two peakons leapfrog each other after the first q = 0; continuation past the first event is out of scope"
                    .to_string(),
            ),
            Preset::Forq => notes.push("b = 2: momenta are constant along the flow".to_string()),
            Preset::NovikovReduced => notes.push(
                "a = 0: no colliding construction exists; reduced flow with two-peakon data, z_closed_form unavailable"
                    .to_string(),
            ),
            _ => {}
        }
        notes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Settings {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parses_key_values_with_comments() {
        let s = parse_settings("# header\ncase = case3\nrel-tol=1e-9 # tighter\n\ns = 0.5, 1.0\n").unwrap();
        assert_eq!(s["case"], "case3");
        assert_eq!(s["rel_tol"], "1e-9");
        assert_eq!(parse_list(&s["s"]).unwrap(), vec![0.5, 1.0]);
        assert!(parse_settings("bogus = 1").is_err());
        assert!(parse_settings("no equals sign").is_err());
    }

    #[test]
    fn fractions() {
        assert_eq!(parse_real("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_real(" -1/3 ").unwrap(), -1.0 / 3.0);
        assert!(parse_real("1/0").is_err());
        assert!(parse_list("").unwrap().is_empty());
    }

    #[test]
    fn presets_resolve_and_round_trip() {
        for name in ["case1", "case2", "case3", "case4", "forq", "novikov-reduced"] {
            let cfg = ExperimentConfig::resolve(&settings(&[("case", name)]), &[]).unwrap();
            let again = ExperimentConfig::resolve(&cfg.to_settings(), &[]).unwrap();
            assert_eq!(cfg.to_settings(), again.to_settings(), "{name}");
            assert_eq!(cfg.initial, again.initial);
        }
        let c3 = ExperimentConfig::resolve(&settings(&[("case", "case3")]), &[]).unwrap();
        assert_eq!(c3.c, Some(1.5));
        assert!((c3.mu - 0.066765696).abs() < 1e-8);
    }

    #[test]
    fn rejections() {
        let bad = |pairs: &[(&str, &str)]| ExperimentConfig::resolve(&settings(pairs), &[]).is_err();
        assert!(bad(&[("case", "case1"), ("s", "1.6")]));
        assert!(bad(&[("case", "case1"), ("a", "-1")]));
        assert!(bad(&[("a", "0"), ("b", "3")]));
        assert!(bad(&[("a", "1"), ("b", "2")]));
        assert!(bad(&[("case", "case1"), ("p1", "1")]));
        assert!(bad(&[("case", "case1"), ("format", "xml")]));
        assert!(bad(&[]));
    }

    #[test]
    fn custom_classifies() {
        let cfg = ExperimentConfig::resolve(&settings(&[("a", "1"), ("b", "0")]), &[]).unwrap();
        assert_eq!(cfg.spec.unwrap().case_id, CaseId::Case2);
        assert_eq!(cfg.preset, Preset::Custom);
    }
}
