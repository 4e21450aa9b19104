//! The four subcommands. Each returns the text for stdout and an exit code,
//! or a [`CliError`] carrying its own code.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chemolab_core::analysis::{
    classify, equilibria, hyperbolic_factor, linearize, Equilibrium, EquilibriumKind,
};
use chemolab_core::dde::{integrate, Trajectory};
use chemolab_core::exec;
use chemolab_core::models::Model;
use chemolab_core::verification::suites::{run_suite, Suite, SuiteConfig};
use chemolab_core::verification::{asymptotic_state, lyapunov_v, VERDICT_TOL};

use crate::config::Scenario;
use crate::output::{csv_bytes, fmt_f64, write_atomic};
use crate::report::{
    to_toml, AnalyzeReport, EquilibriumEntry, LyapunovSummary, ModelEcho, PropertyEntry, SimulateReport,
    VerifyReport,
};
use crate::CliError;

/// Rows written when no stride is configured.
pub const DEFAULT_ROWS: usize = 1000;

/// Length of the window used to fit the Lyapunov decay rate.
const DECAY_FIT_WINDOW: f64 = 10.0;

/// `|V|` below this is left out of the decay fit.
const DECAY_FIT_FLOOR: f64 = 1e-6;

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn ok(stdout: String) -> Result<Outcome, CliError> {
    Ok(Outcome { code: 0, stdout })
}

fn default_path(config: &Path, suffix: &str) -> PathBuf {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    config.with_file_name(format!("{stem}{suffix}"))
}

/// Output times: the stride grid on `[0, horizon]` merged with every
/// breakpoint.
pub fn output_times(horizon: f64, stride: Option<f64>, breakpoints: &[f64]) -> Vec<f64> {
    let mut times: Vec<f64> = match stride {
        None => (0..=DEFAULT_ROWS)
            .map(|i| horizon * i as f64 / DEFAULT_ROWS as f64)
            .collect(),
        Some(h) => {
            let n = (horizon / h * (1.0 + 1e-12)).floor() as usize;
            let mut v: Vec<f64> = (0..=n).map(|i| i as f64 * h).filter(|&t| t <= horizon).collect();
            v.push(horizon);
            v
        }
    };
    times.extend(
        breakpoints
            .iter()
            .copied()
            .filter(|&t| (0.0..=horizon).contains(&t)),
    );
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// Least-squares slope of `ln |V|` over `[from, to]`.
fn decay_rate(traj: &Trajectory, p: &chemolab_core::models::DimensionlessParams, from: f64, to: f64) -> f64 {
    const N: usize = 200;
    let pts: Vec<(f64, f64)> = (0..=N)
        .map(|i| from + (to - from) * i as f64 / N as f64)
        .filter_map(|t| {
            let v = lyapunov_v(traj, p, t).ok()?;
            (v.abs() > DECAY_FIT_FLOOR).then(|| (t, v.abs().ln()))
        })
        .collect();
    if pts.len() < 10 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mt) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mt) * (q.0 - mt)).sum();
    sxy / sxx
}

pub fn simulate(config: &Path) -> Result<Outcome, CliError> {
    let scenario = Scenario::load(config)?;
    let model = scenario.model()?;
    let phi = scenario.history(&model)?;
    let opts = scenario.solver_options(&model)?;
    let traj = integrate(&model, &phi, scenario.horizon, &opts).map_err(CliError::from_solver)?;

    let times = output_times(scenario.horizon, scenario.stride, traj.breakpoints());
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let y = traj.eval(t).map_err(CliError::from_solver)?;
        let mut row = vec![fmt_f64(t)];
        row.extend(y.as_slice().iter().map(|&v| fmt_f64(v)));
        rows.push(row);
    }
    let header: &[&str] = if model.dim() == 2 {
        &["t", "s", "x"]
    } else {
        &["t", "x"]
    };
    let csv_path = scenario
        .csv
        .clone()
        .unwrap_or_else(|| default_path(config, ".csv"));
    let report_path = scenario
        .report
        .clone()
        .unwrap_or_else(|| default_path(config, ".summary.toml"));

    let lyapunov = match model {
        Model::Chemostat(p) => {
            let fit_start = p.r.min(scenario.horizon);
            let fit_end = (fit_start + DECAY_FIT_WINDOW).min(scenario.horizon);
            let v = |t| lyapunov_v(&traj, &p, t).map_err(CliError::from_solver);
            Some(LyapunovSummary {
                v0: v(0.0)?,
                v_end: v(scenario.horizon)?,
                decay_rate: decay_rate(&traj, &p, fit_start, fit_end),
                fit_start,
                fit_end,
            })
        }
        _ => None,
    };
    let end = traj.eval(traj.t_end()).map_err(CliError::from_solver)?;
    let stats = traj.stats();
    let report = SimulateReport {
        command: "simulate",
        horizon: scenario.horizon,
        rows: rows.len(),
        final_time: traj.t_end(),
        final_state: end.as_slice().to_vec(),
        steps_accepted: stats.accepted,
        steps_rejected: stats.rejected,
        model: ModelEcho::of(&scenario),
        lyapunov,
    };
    let text = to_toml(&report)?;
    write_atomic(&csv_path, &csv_bytes(header, &rows)?)?;
    write_atomic(&report_path, text.as_bytes())?;
    ok(text)
}

/// Linearization used for stability: the scalar factor for the chemostat,
/// the model's own linearization otherwise.
fn stability_linearization(
    model: &Model,
    eq: &Equilibrium,
) -> chemolab_core::Result<chemolab_core::analysis::Linearization> {
    match model {
        Model::Chemostat(p) => hyperbolic_factor(p, eq),
        m => linearize(m, eq),
    }
}

fn equilibrium_entry(model: &Model, eq: &Equilibrium) -> Result<EquilibriumEntry, CliError> {
    let lin = stability_linearization(model, eq).map_err(|e| CliError::Config(e.to_string()))?;
    let rep = classify(&lin).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(EquilibriumEntry {
        kind: eq.kind.to_string(),
        value: eq.value.as_slice().to_vec(),
        reported_via: matches!(model, Model::Chemostat(_))
            .then(|| "hyperbolic factor; the remaining eigenvalue is -1".to_string()),
        a_lin: lin.a_lin,
        b_lin: lin.b_lin,
        case: rep.case.to_string(),
        critical_delay: rep.critical_delay,
        omega: rep.omega,
        leading_re: rep.leading_root.re,
        leading_im: rep.leading_root.im,
        behavior: rep.local_behavior().to_string(),
    })
}

pub fn analyze(config: &Path) -> Result<Outcome, CliError> {
    let scenario = Scenario::load(config)?;
    let model = scenario.model()?;
    let entries = equilibria(&model)
        .iter()
        .map(|eq| equilibrium_entry(&model, eq))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = match entries.as_slice() {
        [only] if only.kind == "washout" => format!("washout unique, {}", only.behavior),
        all => all
            .iter()
            .map(|e| format!("{} {}", e.kind, e.behavior))
            .collect::<Vec<_>>()
            .join("; "),
    };
    let report = AnalyzeReport {
        command: "analyze",
        delay: model.delay(),
        summary,
        model: ModelEcho::of(&scenario),
        equilibria: entries,
    };
    let text = to_toml(&report)?;
    if let Some(path) = &scenario.report {
        write_atomic(path, text.as_bytes())?;
    }
    ok(text)
}

/// Real part of the leading root at the survival state, or at the washout
/// state when there is no survival state.
fn leading_re(model: &Model) -> Option<f64> {
    let eqs = equilibria(model);
    let eq = eqs
        .iter()
        .find(|e| e.kind == EquilibriumKind::Survival)
        .or_else(|| eqs.first())?;
    let lin = stability_linearization(model, eq).ok()?;
    classify(&lin).ok().map(|r| r.leading_root.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub verdict: String,
    pub amplitude: Option<f64>,
    pub period: Option<f64>,
    pub leading_re: Option<f64>,
}

fn sweep_point(base: &Scenario, parameter: &str, value: f64, verdict: bool, horizon: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        verdict: String::new(),
        amplitude: None,
        period: None,
        leading_re: None,
    };
    let built = base.with_parameter(parameter, value).and_then(|s| {
        let model = s.model()?;
        let phi = s.history(&model)?;
        let opts = s.solver_options(&model)?;
        Ok((model, phi, opts))
    });
    let (model, phi, opts) = match built {
        Ok(b) => b,
        Err(e) => {
            row.verdict = format!("invalid: {e}");
            return row;
        }
    };
    row.leading_re = leading_re(&model);
    if verdict {
        let h = horizon.max(50.0 * model.delay().max(1.0));
        match asymptotic_state(&model, &phi, h, VERDICT_TOL, &opts) {
            Ok(v) => {
                row.verdict = v.state.to_string();
                row.amplitude = v.evidence.amplitude;
                row.period = v.evidence.period;
            }
            Err(e) => {
                row.verdict = match CliError::from_solver(e) {
                    CliError::Diverged(m) => format!("diverged: {m}"),
                    other => format!("failed: {other}"),
                }
            }
        }
    }
    row
}

/// Evaluates every grid point; rows come back in grid order.
pub fn sweep_rows(scenario: &Scenario) -> Result<Vec<SweepRow>, CliError> {
    let spec = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep: missing [sweep] section".into()))?;
    let horizon = spec.horizon.unwrap_or(scenario.horizon);
    let points = spec.grid.points();
    Ok(exec::map(&points, None, |&v| {
        sweep_point(scenario, &spec.parameter, v, spec.verdict, horizon)
    }))
}

pub fn sweep(config: &Path) -> Result<Outcome, CliError> {
    let scenario = Scenario::load(config)?;
    let rows = sweep_rows(&scenario)?;
    let parameter = scenario
        .sweep
        .as_ref()
        .map(|s| s.parameter.clone())
        .unwrap_or_default();
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.value),
                r.verdict.clone(),
                opt(r.amplitude),
                opt(r.period),
                opt(r.leading_re),
            ]
        })
        .collect();
    let path = scenario
        .csv
        .clone()
        .unwrap_or_else(|| default_path(config, ".sweep.csv"));
    write_atomic(
        &path,
        &csv_bytes(&["value", "verdict", "amplitude", "period", "leading_re"], &table)?,
    )?;
    let mut out = String::new();
    for r in &rows {
        let v = if r.verdict.is_empty() { "-" } else { &r.verdict };
        let _ = writeln!(
            out,
            "{parameter} = {}: {v}, leading Re = {}",
            fmt_f64(r.value),
            opt(r.leading_re)
        );
    }
    ok(out)
}

pub fn verify_report(suite: Suite, seed: u64) -> VerifyReport {
    let rep = run_suite(suite, &SuiteConfig { seed, threads: None });
    VerifyReport {
        command: "verify",
        suite: suite.name().to_string(),
        seed,
        passed: rep.passed(),
        properties: rep
            .properties
            .into_iter()
            .map(|p| PropertyEntry {
                name: p.name,
                passed: p.passed,
                cases: p.cases,
                failures: p.failures,
                metric: p.metric,
                worst: p.worst,
                notes: p.notes,
            })
            .collect(),
    }
}

pub fn verify(suite: &str, seed: u64, out: Option<&Path>) -> Result<Outcome, CliError> {
    let suite: Suite = suite
        .parse()
        .map_err(|e: chemolab_core::Error| CliError::Config(e.to_string()))?;
    let report = verify_report(suite, seed);
    let mut text = String::new();
    for p in &report.properties {
        let _ = writeln!(
            text,
            "{} {}: {}/{} cases pass, worst {} = {}",
            if p.passed { "PASS" } else { "FAIL" },
            p.name,
            p.cases - p.failures,
            p.cases,
            p.metric,
            fmt_f64(p.worst)
        );
    }
    let _ = writeln!(
        text,
        "suite {} (seed {}): {}",
        report.suite,
        seed,
        if report.passed { "PASS" } else { "FAIL" }
    );
    if let Some(path) = out {
        write_atomic(path, to_toml(&report)?.as_bytes())?;
    }
    Ok(Outcome {
        code: if report.passed { 0 } else { 1 },
        stdout: text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_grid_includes_breakpoints() {
        let t = output_times(2.0, Some(0.3), &[0.0, 0.7, 1.4]);
        assert_eq!(t.first(), Some(&0.0));
        assert_eq!(t.last(), Some(&2.0));
        assert!(t.contains(&0.7) && t.contains(&1.4));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        let d = output_times(5.0, None, &[0.0, 1.0, 2.0]);
        assert_eq!(d.len(), DEFAULT_ROWS + 1);
        assert_eq!(d[200], 1.0);
    }

    #[test]
    fn default_paths_sit_next_to_the_config() {
        assert_eq!(
            default_path(Path::new("/x/run.toml"), ".csv"),
            Path::new("/x/run.csv")
        );
    }
}
