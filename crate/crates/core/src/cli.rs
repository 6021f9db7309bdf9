//! Scenario runner: reads a flat JSON config, runs one experiment, and writes
//! `trajectory.csv`, `report.json` and `manifest.json` into `out_dir`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::conservation::{self, ConservationReport};
use crate::error::{Error, Result};
use crate::flow::{self, Field, IntegrateOptions, Trajectory};
use crate::io::SymbolSpec;
use crate::symbol::{rational_to_fourier_auto, FourierSymbol, RationalSymbol};
use crate::{corpus, inverse, poisson, C64};

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    V3Turbulence,
    V4Turbulence,
    V4ExampleScan,
    Involution,
    InverseRoundtrip,
    SeriesIdentity,
    LaxResidual,
}

fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-13
}
fn default_s_list() -> Vec<f64> {
    vec![1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub initial: Option<SymbolSpec>,
    #[serde(rename = "T", default)]
    pub t: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default)]
    pub sample_dt: Option<f64>,
    #[serde(default = "default_s_list")]
    pub s_list: Vec<f64>,
    #[serde(default)]
    pub x_grid: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Scan interval for `v4_example_scan` (`|p|²`).
    #[serde(default)]
    pub r_range: Option<[f64; 2]>,
    #[serde(default)]
    pub points: Option<usize>,
    /// Corpus classes `d` and samples per class for the corpus scenarios.
    #[serde(default)]
    pub classes: Option<Vec<usize>>,
    #[serde(default)]
    pub count: Option<usize>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if self.sample_dt.is_some_and(|d| !(d > 0.0)) {
            return bad("sample_dt must be positive");
        }
        if self.t.is_some_and(|t| !t.is_finite()) {
            return bad("T must be finite");
        }
        if self.s_list.iter().any(|s| !(*s >= 0.0)) {
            return bad("Sobolev exponents must be nonnegative");
        }
        let needs_initial = matches!(self.scenario, Scenario::V3Turbulence | Scenario::V4Turbulence | Scenario::LaxResidual);
        if needs_initial && self.initial.is_none() {
            return bad("this scenario needs an initial symbol");
        }
        if let Some([a, b]) = self.r_range {
            if !(0.0 < a && a < b && b < 1.0) {
                return bad("r_range must satisfy 0 < a < b < 1");
            }
        }
        if self.points.is_some_and(|p| p < 2) || self.count == Some(0) {
            return bad("points must be ≥ 2 and count ≥ 1");
        }
        if let Some(cl) = &self.classes {
            if cl.is_empty() || cl.iter().any(|d| *d < 2 || *d > 12) {
                return bad("classes must lie in 2..=12");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `"le"`, `"ge"` or `"gt"` comparison of `value` against `tolerance`.
    pub relation: String,
    pub passed: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, relation: "le".into(), passed: value <= tolerance }
    }

    pub fn gt(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, relation: "gt".into(), passed: value > tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
    pub error: Option<ErrorInfo>,
}

/// Rows of the run CSV with their header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

struct Outcome {
    checks: Vec<Check>,
    details: serde_json::Value,
    table: Table,
    initial: Option<SymbolSpec>,
    field: Option<Field>,
}

fn t_or(cfg: &ScenarioConfig, d: f64) -> f64 {
    cfg.t.unwrap_or(d)
}

fn integrate_opts(cfg: &ScenarioConfig, dt: f64, pole_class: Option<usize>) -> IntegrateOptions {
    IntegrateOptions {
        rtol: cfg.rtol,
        atol: cfg.atol,
        sample_dt: cfg.sample_dt.unwrap_or(dt),
        s_list: cfg.s_list.clone(),
        pole_class,
        analyze: true,
    }
}

/// Trajectory table: `t, Q, M, reJ, imJ, H{s}.., sigma2_k.., ell_k.., ell_inf, pole_abs_k..`.
pub fn trajectory_table(traj: &Trajectory) -> Table {
    let nk = traj.reports.iter().map(|r| r.ells.len()).max().unwrap_or(0);
    let np = traj.poles.iter().map(|p| p.len()).max().unwrap_or(0);
    let mut columns: Vec<String> = ["t", "Q", "M", "reJ", "imJ"].iter().map(|s| s.to_string()).collect();
    columns.extend(traj.sobolev.iter().map(|(s, _)| format!("H{s}")));
    columns.extend((1..=nk).map(|k| format!("sigma2_{k}")));
    columns.extend((1..=nk).map(|k| format!("ell_{k}")));
    columns.push("ell_inf".into());
    columns.extend((1..=np).map(|k| format!("pole_abs_{k}")));
    let rows = (0..traj.times.len())
        .map(|i| {
            let r = &traj.reports[i];
            let mut row = vec![traj.times[i], r.q, r.m, r.j.re, r.j.im];
            row.extend(traj.sobolev.iter().map(|(_, v)| v[i].sqrt()));
            row.extend((0..nk).map(|k| r.ells.get(k).map_or(f64::NAN, |e| e.0)));
            row.extend((0..nk).map(|k| r.ells.get(k).map_or(f64::NAN, |e| e.1)));
            row.push(r.ell_inf);
            let mut abs: Vec<f64> = traj.poles[i].iter().map(|p| p.inv().norm()).collect();
            abs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            row.extend((0..np).map(|k| abs.get(k).copied().unwrap_or(f64::NAN)));
            row
        })
        .collect();
    Table { columns, rows }
}

fn drift_checks(traj: &Trajectory, tol: f64) -> Vec<Check> {
    flow::drift(traj).entries.into_iter().map(|(n, v)| Check::le(format!("drift_{n}"), v, tol)).collect()
}

fn initial_symbol(cfg: &ScenarioConfig) -> Result<(SymbolSpec, FourierSymbol)> {
    let spec = cfg.initial.clone().ok_or_else(|| Error::Config("missing initial symbol".into()))?;
    let u = spec.to_fourier(None)?;
    Ok((spec, u))
}

fn growth_checks(traj: &Trajectory, resonant: bool, checks: &mut Vec<Check>) -> Result<serde_json::Value> {
    if resonant {
        let g = flow::growth_and_poles(traj, &[1.0, 2.0])?;
        let (s1, s2) = (g.sobolev[0].1, g.sobolev[1].1);
        checks.push(Check::gt("slope_H1", s1, 0.0));
        checks.push(Check::gt("slope_H2", s2, 0.0));
        checks.push(Check::le("slope_ratio_vs_3", (s2 / s1 / 3.0 - 1.0).abs(), 0.10));
        if let Some(e) = g.escaping {
            checks.push(Check::le("pole_vs_H1_slope", (g.poles[e].0 + s1).abs() / s1.abs(), 0.15));
        } else {
            checks.push(Check::le("pole_vs_H1_slope", f64::INFINITY, 0.15));
        }
        Ok(serde_json::to_value(&g).expect("growth report serializes"))
    } else {
        let g = flow::growth_and_poles(traj, &[1.0])?;
        checks.push(Check::le("abs_slope_H1", g.sobolev[0].1.abs(), flow::BOUNDED_SLOPE));
        Ok(serde_json::to_value(&g).expect("growth report serializes"))
    }
}

fn v4_turbulence(cfg: &ScenarioConfig) -> Result<Outcome> {
    let (spec, u) = initial_symbol(cfg)?;
    let traj = flow::integrate(&u, Field::Hamiltonian, t_or(cfg, 8.0), &integrate_opts(cfg, 0.01, Some(4)))?;
    let mut checks = drift_checks(&traj, 1e-7);
    let mut details = serde_json::Map::new();
    details.insert("step_stats".into(), serde_json::to_value(&traj.step_stats).unwrap());
    let resonant = match flow::v4_closed_form(&u) {
        Ok(cf) => {
            let worst = traj
                .times
                .iter()
                .zip(&traj.reports)
                .filter(|(t, _)| t.abs() <= 6.0 + 1e-12)
                .map(|(t, r)| (r.u_norms2[0] - cf.u1_norm2(*t)).abs() / cf.u1_norm2(*t))
                .fold(0.0, f64::max);
            checks.push(Check::le("closed_form_u1", worst, 1e-4));
            details.insert("closed_form".into(), serde_json::to_value(&cf).unwrap());
            true
        }
        Err(Error::NotOnResonantLeaf(_)) => false,
        Err(e) => return Err(e),
    };
    details.insert("growth".into(), growth_checks(&traj, resonant, &mut checks)?);
    Ok(Outcome {
        checks,
        details: details.into(),
        table: trajectory_table(&traj),
        initial: Some(spec),
        field: Some(Field::Hamiltonian),
    })
}

/// Relative distance to the 𝒱(3) resonance `|J|² = Q³`.
pub fn v3_resonance_defect(rep: &ConservationReport) -> f64 {
    (rep.j.norm_sqr() - rep.q.powi(3)).abs() / rep.q.powi(3)
}

fn v3_turbulence(cfg: &ScenarioConfig) -> Result<Outcome> {
    let (spec, u) = initial_symbol(cfg)?;
    let rep = conservation::report(&u)?;
    let defect = v3_resonance_defect(&rep);
    let resonant = defect < 1e-8;
    let traj = flow::integrate(&u, Field::Hamiltonian, t_or(cfg, 8.0), &integrate_opts(cfg, 0.01, Some(3)))?;
    let mut checks = drift_checks(&traj, 1e-7);
    let growth = growth_checks(&traj, resonant, &mut checks)?;
    Ok(Outcome {
        checks,
        details: serde_json::json!({ "resonance_defect": defect, "resonant": resonant, "growth": growth }),
        table: trajectory_table(&traj),
        initial: Some(spec),
        field: Some(Field::Hamiltonian),
    })
}

/// `ℓ₁` and the rest of the report for `z/(1 − pz)²` with `|p|² = r`.
pub fn example_point(r: f64) -> Result<ConservationReport> {
    let u = rational_to_fourier_auto(&RationalSymbol::double_pole(C64::new(r.sqrt(), 0.0)))?;
    conservation::report(&u)
}

/// Bisection on `ℓ₁(r)` inside a sign-change bracket.
pub fn locate_resonance(mut lo: f64, mut hi: f64) -> Result<f64> {
    let f = |r: f64| example_point(r).map(|rep| rep.ells[0].1);
    let mut flo = f(lo)?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn v4_example_scan(cfg: &ScenarioConfig) -> Result<Outcome> {
    let [a, b] = cfg.r_range.unwrap_or([0.2, 0.3]);
    let pts = cfg.points.unwrap_or(101);
    let mut table = Table {
        columns: ["r", "Q", "absJ2", "sigma2_1", "sigma2_2", "ell_1", "ell_2", "ell_inf"].iter().map(|s| s.to_string()).collect(),
        rows: Vec::new(),
    };
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..pts {
        let r = a + (b - a) * i as f64 / (pts - 1) as f64;
        let rep = example_point(r)?;
        if rep.ells.len() != 2 {
            return Err(Error::RankMismatch { expected: 2, found: rep.ells.len() });
        }
        let l1 = rep.ells[0].1;
        table.rows.push(vec![r, rep.q, rep.j.norm_sqr(), rep.ells[0].0, rep.ells[1].0, l1, rep.ells[1].1, rep.ell_inf]);
        if let Some((r0, l0)) = prev {
            if bracket.is_none() && (l0 > 0.0) != (l1 > 0.0) {
                bracket = Some((r0, r));
            }
        }
        prev = Some((r, l1));
    }
    let expected = 3.0 * 2f64.sqrt() - 4.0;
    let (root, err) = match bracket {
        Some((lo, hi)) => {
            let root = locate_resonance(lo, hi)?;
            (Some(root), (root - expected).abs())
        }
        None => (None, f64::INFINITY),
    };
    Ok(Outcome {
        checks: vec![Check::le("resonance_location", err, 1e-6)],
        details: serde_json::json!({ "root": root, "expected": expected, "bracket": bracket }),
        table,
        initial: None,
        field: None,
    })
}

fn corpus_of(cfg: &ScenarioConfig, classes: &[usize], count: usize) -> Result<Vec<corpus::Sample>> {
    corpus::corpus(cfg.seed, cfg.classes.as_deref().unwrap_or(classes), cfg.count.unwrap_or(count))
}

fn involution(cfg: &ScenarioConfig) -> Result<Outcome> {
    let samples = corpus_of(cfg, &[4], 1)?;
    let mut table = Table {
        columns: vec!["index".into(), "class".into(), "max_normalized_entry".into(), "tolerance".into()],
        rows: Vec::new(),
    };
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let d = s.rational.class_d();
        let tol = if d <= 4 { 1e-5 } else { 1e-4 };
        let rep = poisson::involution_report(&s.u)?;
        table.rows.push(vec![i as f64, d as f64, rep.max_normalized_entry, tol]);
        checks.push(Check::le(format!("involution_{i}_V{d}"), rep.max_normalized_entry, tol));
        reports.push(rep);
    }
    Ok(Outcome {
        checks,
        details: serde_json::json!({ "brackets": reports }),
        table,
        initial: None,
        field: None,
    })
}

fn inverse_roundtrip(cfg: &ScenarioConfig) -> Result<Outcome> {
    let mut items: Vec<(String, FourierSymbol, usize)> = Vec::new();
    if let Some(spec) = &cfg.initial {
        let u = spec.to_fourier(None)?;
        items.push(("initial".into(), u, 0));
    }
    for (i, s) in corpus_of(cfg, &[4, 6], 50)?.into_iter().enumerate() {
        items.push((format!("corpus_{i}"), s.u, s.rational.class_d()));
    }
    let mut table = Table { columns: vec!["index".into(), "class".into(), "residual".into()], rows: Vec::new() };
    let mut worst: f64 = 0.0;
    for (i, (_, u, d)) in items.iter().enumerate() {
        let r = inverse::roundtrip(u)?;
        worst = worst.max(r);
        table.rows.push(vec![i as f64, *d as f64, r]);
    }
    Ok(Outcome {
        checks: vec![Check::le("roundtrip_max", worst, 1e-7)],
        details: serde_json::json!({ "samples": items.len() }),
        table,
        initial: cfg.initial.clone(),
        field: None,
    })
}

fn series_identity(cfg: &ScenarioConfig) -> Result<Outcome> {
    let samples = corpus_of(cfg, &[4, 6], 25)?;
    let mut columns: Vec<String> = vec!["index".into(), "class".into()];
    let mut table_rows = Vec::new();
    let mut worst: Vec<(String, f64)> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let sd = crate::hankel::spectrum(&s.u)?;
        let xs = if cfg.x_grid.is_empty() { conservation::default_x_grid(&sd) } else { cfg.x_grid.clone() };
        let rep = conservation::identity_suite(&s.u, &xs)?;
        if i == 0 {
            columns.extend(rep.entries.iter().map(|e| e.0.clone()));
            worst = rep.entries.iter().map(|e| (e.0.clone(), 0.0)).collect();
        }
        for (w, e) in worst.iter_mut().zip(&rep.entries) {
            w.1 = w.1.max(e.1);
        }
        let mut row = vec![i as f64, s.rational.class_d() as f64];
        row.extend(rep.entries.iter().map(|e| e.1));
        table_rows.push(row);
    }
    let checks = worst.iter().map(|(n, v)| Check::le(n.clone(), *v, 1e-8)).collect();
    Ok(Outcome {
        checks,
        details: serde_json::json!({ "samples": samples.len() }),
        table: Table { columns, rows: table_rows },
        initial: None,
        field: None,
    })
}

fn lax_residual(cfg: &ScenarioConfig) -> Result<Outcome> {
    let (spec, u) = initial_symbol(cfg)?;
    let traj = flow::integrate(&u, Field::Hamiltonian, t_or(cfg, 1.0), &integrate_opts(cfg, 1e-3, None))?;
    let mut checks = vec![Check::le("lax_residual", flow::lax_residual(&traj), 1e-3)];
    let nk = traj.reports[0].ells.len();
    for k in 0..nk {
        checks.push(Check::le(format!("projection_evolution_{}", k + 1), flow::projection_evolution_residual(&traj, k)?, 1e-4));
        let simple_k = traj.reports.iter().all(|r| r.psis.get(k).is_some_and(|p| p.is_some()));
        if simple_k {
            let (_, res) = flow::blaschke_angle_trace(&traj, k)?;
            checks.push(Check::le(format!("blaschke_angle_{}", k + 1), res, 1e-3));
        }
    }
    Ok(Outcome {
        checks,
        details: serde_json::json!({ "step_stats": traj.step_stats }),
        table: trajectory_table(&traj),
        initial: Some(spec),
        field: Some(Field::Hamiltonian),
    })
}

fn dispatch(cfg: &ScenarioConfig) -> Result<Outcome> {
    match cfg.scenario {
        Scenario::V3Turbulence => v3_turbulence(cfg),
        Scenario::V4Turbulence => v4_turbulence(cfg),
        Scenario::V4ExampleScan => v4_example_scan(cfg),
        Scenario::Involution => involution(cfg),
        Scenario::InverseRoundtrip => inverse_roundtrip(cfg),
        Scenario::SeriesIdentity => series_identity(cfg),
        Scenario::LaxResidual => lax_residual(cfg),
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(&table.columns).map_err(|e| Error::Io(e.to_string()))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub exit_code: i32,
    pub report: RunReport,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Runs a validated config and writes its artifacts.
pub fn run(cfg: &ScenarioConfig) -> Result<RunResult> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let start = Instant::now();
    let outcome = dispatch(cfg);
    let wall = start.elapsed().as_secs_f64();
    let (report, table, initial, field, code) = match outcome {
        Ok(o) => {
            let passed = o.checks.iter().all(|c| c.passed);
            let code = if passed { EXIT_PASS } else { EXIT_CHECK_FAILED };
            let rep = RunReport { scenario: cfg.scenario, passed, checks: o.checks, details: o.details, error: None };
            (rep, o.table, o.initial, o.field, code)
        }
        Err(e) => {
            let rep = RunReport {
                scenario: cfg.scenario,
                passed: false,
                checks: vec![],
                details: serde_json::Value::Null,
                error: Some(ErrorInfo { name: e.name().into(), message: e.to_string() }),
            };
            (rep, Table::default(), cfg.initial.clone(), None, exit_code_for(&e))
        }
    };
    write_csv(&cfg.out_dir.join("trajectory.csv"), &table)?;
    write_json(&cfg.out_dir.join("report.json"), &report)?;
    let manifest = serde_json::json!({
        "tool": "szego-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": cfg.scenario,
        "config": cfg,
        "initial": initial,
        "field": field,
        "tolerances": { "rtol": cfg.rtol, "atol": cfg.atol },
        "seed": cfg.seed,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "csv_columns": table.columns,
        "csv_notes": "sigma2_k are eigenvalues of K_u^2 (squared singular values); H<s> is the H^s norm; pole_abs_k are moduli of the fitted inverse poles, largest first",
        "threads": crate::worker_threads(),
        "wall_time_s": wall,
    });
    write_json(&cfg.out_dir.join("manifest.json"), &manifest)?;
    Ok(RunResult { exit_code: code, report })
}

/// Parses and runs a config file; config problems map to exit code 2.
pub fn run_file(path: &Path) -> (i32, Option<RunReport>, Option<Error>) {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return (EXIT_CONFIG, None, Some(Error::Config(format!("{}: {e}", path.display())))),
    };
    let cfg = match ScenarioConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return (EXIT_CONFIG, None, Some(e)),
    };
    match run(&cfg) {
        Ok(r) => (r.exit_code, Some(r.report), None),
        Err(e) => (exit_code_for(&e), None, Some(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let ok = ScenarioConfig::parse(r#"{"scenario":"v4_example_scan","out_dir":"/tmp/x"}"#).unwrap();
        assert_eq!(ok.rtol, 1e-10);
        for bad in [
            r#"{"scenario":"v4_turbulence","out_dir":"/tmp/x"}"#,
            r#"{"scenario":"nope","out_dir":"/tmp/x"}"#,
            r#"{"scenario":"v4_example_scan","out_dir":"/tmp/x","rtol":-1}"#,
            r#"{"scenario":"v4_example_scan","out_dir":"/tmp/x","extra":1}"#,
        ] {
            assert!(matches!(ScenarioConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn resonance_bisection() {
        let r = locate_resonance(0.24, 0.25).unwrap();
        assert!((r - (3.0 * 2f64.sqrt() - 4.0)).abs() < 1e-9);
    }
}
