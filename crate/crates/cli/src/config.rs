//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! [model]
//! family = "hutchinson"      # chemostat, hyperbolic, chemo-logistic,
//!                            # hutchinson, wright or linear
//! [model.dimensionless]      # or [model.dimensional] with C, D, A, B, M, R
//! a = 1.0
//! m = 2.0
//! r = 1.0
//!
//! [history]
//! constant = 0.5             # or polynomial = [c0, c1, ...] in powers of t
//!
//! [run]
//! horizon = 100.0
//! ```
//!
//! Wright's equation takes `rho` and the linear equation takes `a_lin`,
//! `b_lin` and `r` directly under `[model]`. Optional sections: `[solver]`
//! (`abs_tol`, `rel_tol`, `max_step`, `initial_step`), `[output]` (`csv`,
//! `report`) and, for sweeps, `[sweep]`. Relative output paths are resolved
//! against the directory of the scenario file.

use std::path::{Path, PathBuf};

use chemolab_core::dde::{History, SolverOptions};
use chemolab_core::models::{DimensionalParams, DimensionlessParams, Model};
use chemolab_core::State;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub model: RawModel,
    pub history: RawHistory,
    #[serde(default)]
    pub solver: RawSolver,
    pub run: RawRun,
    #[serde(default)]
    pub output: RawOutput,
    pub sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub family: String,
    pub rho: Option<f64>,
    pub a_lin: Option<f64>,
    pub b_lin: Option<f64>,
    pub r: Option<f64>,
    pub dimensionless: Option<RawDimensionless>,
    pub dimensional: Option<RawDimensional>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDimensionless {
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    pub m: f64,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RawDimensional {
    pub C: f64,
    pub D: f64,
    pub A: f64,
    pub B: f64,
    pub M: f64,
    pub R: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHistory {
    pub constant: Option<Value>,
    pub polynomial: Option<Vec<Value>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolver {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub horizon: f64,
    pub stride: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub parameter: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub values: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub verdict: bool,
    pub horizon: Option<f64>,
}

fn yes() -> bool {
    true
}

/// Parameters as given in the file, kept so a sweep can substitute one of
/// them and rebuild the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamSpec {
    Dimensionless(DimensionlessParams),
    Dimensional(DimensionalParams),
    Wright { rho: f64 },
    Linear { a_lin: f64, b_lin: f64, r: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyName {
    Chemostat,
    Hyperbolic,
    ChemoLogistic,
    Hutchinson,
    Wright,
    Linear,
}

impl FamilyName {
    fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "chemostat" => FamilyName::Chemostat,
            "hyperbolic" => FamilyName::Hyperbolic,
            "chemo-logistic" => FamilyName::ChemoLogistic,
            "hutchinson" => FamilyName::Hutchinson,
            "wright" => FamilyName::Wright,
            "linear" => FamilyName::Linear,
            other => {
                return Err(CliError::Config(format!(
                    "model.family: unknown family `{other}` (expected chemostat, hyperbolic, \
                     chemo-logistic, hutchinson, wright or linear)"
                )))
            }
        })
    }
}

#[derive(Clone, Debug)]
pub enum HistorySpec {
    Constant(Value),
    Polynomial(Vec<Value>),
}

#[derive(Clone, Debug)]
pub struct SolverOverrides {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
}

impl SolverOverrides {
    /// Defaults for delay `r` with the configured fields replaced.
    pub fn options(&self, r: f64) -> Result<SolverOptions, CliError> {
        let mut o = SolverOptions::for_delay(r);
        if let Some(v) = self.abs_tol {
            o.abs_tol = v;
        }
        if let Some(v) = self.rel_tol {
            o.rel_tol = v;
        }
        if let Some(v) = self.max_step {
            o.max_step = v;
        }
        if let Some(v) = self.initial_step {
            o.initial_step = v;
        }
        o.validate()
            .map_err(|e| CliError::Config(format!("solver: {e}")))?;
        Ok(o)
    }
}

#[derive(Clone, Debug)]
pub enum Grid {
    Range { min: f64, max: f64, count: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Range { min, max, count } => (0..*count)
                .map(|i| {
                    let n = (*count - 1) as f64;
                    (min * (n - i as f64) + max * i as f64) / n
                })
                .collect(),
            Grid::Values(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub parameter: String,
    pub grid: Grid,
    pub verdict: bool,
    pub horizon: Option<f64>,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub family: FamilyName,
    pub params: ParamSpec,
    pub history: HistorySpec,
    pub solver: SolverOverrides,
    pub horizon: f64,
    pub stride: Option<f64>,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name}: must be a positive number, got {v}"
        )))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Scenario::parse(&text, &base).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Scenario, CliError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let family = FamilyName::parse(&raw.model.family)?;
        let params = param_spec(family, &raw.model)?;
        let history = match (raw.history.constant, raw.history.polynomial) {
            (Some(c), None) => HistorySpec::Constant(c),
            (None, Some(p)) if !p.is_empty() => HistorySpec::Polynomial(p),
            (None, Some(_)) => {
                return Err(CliError::Config(
                    "history.polynomial: needs at least one coefficient".into(),
                ))
            }
            _ => {
                return Err(CliError::Config(
                    "history: give exactly one of `constant` or `polynomial`".into(),
                ))
            }
        };
        let horizon = positive("run.horizon", raw.run.horizon)?;
        let stride = raw.run.stride.map(|s| positive("run.stride", s)).transpose()?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let sweep = raw.sweep.map(|s| sweep_spec(s, family, &params)).transpose()?;
        let scenario = Scenario {
            family,
            params,
            history,
            solver: SolverOverrides {
                abs_tol: raw.solver.abs_tol,
                rel_tol: raw.solver.rel_tol,
                max_step: raw.solver.max_step,
                initial_step: raw.solver.initial_step,
            },
            horizon,
            stride,
            csv: raw.output.csv.map(resolve),
            report: raw.output.report.map(resolve),
            sweep,
        };
        // build once so that bad values surface as configuration errors
        let model = scenario.model()?;
        scenario.solver_options(&model)?;
        scenario.history(&model)?;
        Ok(scenario)
    }

    pub fn model(&self) -> Result<Model, CliError> {
        build_model(self.family, &self.params)
    }

    pub fn solver_options(&self, model: &Model) -> Result<SolverOptions, CliError> {
        self.solver.options(model.delay())
    }

    pub fn history(&self, model: &Model) -> Result<History, CliError> {
        let dim = model.dim();
        let state = |v: &Value, what: &str| -> Result<State, CliError> {
            let comps = match v {
                Value::Scalar(x) => vec![*x],
                Value::Vector(xs) => xs.clone(),
            };
            if comps.len() != dim {
                return Err(CliError::Config(format!(
                    "history.{what}: expected {dim} component(s) for the {} family, got {}",
                    model.family(),
                    comps.len()
                )));
            }
            if comps.iter().any(|c| !c.is_finite()) {
                return Err(CliError::Config(format!("history.{what}: values must be finite")));
            }
            Ok(State::from_slice(&comps))
        };
        let r = model.delay();
        let built = match &self.history {
            HistorySpec::Constant(v) => History::constant(state(v, "constant")?, r),
            HistorySpec::Polynomial(cs) => {
                let coeffs = cs
                    .iter()
                    .map(|c| state(c, "polynomial"))
                    .collect::<Result<Vec<_>, _>>()?;
                History::polynomial(coeffs, r)
            }
        };
        built.map_err(|e| CliError::Config(format!("history: {e}")))
    }

    /// Dimensionless parameters when the family has them.
    pub fn dimensionless(&self) -> Option<DimensionlessParams> {
        match self.params {
            ParamSpec::Dimensionless(p) => Some(p),
            ParamSpec::Dimensional(q) => Some(q.nondimensionalize()),
            _ => None,
        }
    }

    /// Copy of the scenario with one parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Scenario, CliError> {
        let mut s = self.clone();
        s.params = substitute(&self.params, name, value)?;
        Ok(s)
    }
}

fn param_spec(family: FamilyName, m: &RawModel) -> Result<ParamSpec, CliError> {
    let stray = |fields: &[(&str, bool)]| -> Result<(), CliError> {
        for (name, present) in fields {
            if *present {
                return Err(CliError::Config(format!(
                    "model.{name}: not used by the {} family",
                    m.family
                )));
            }
        }
        Ok(())
    };
    match family {
        FamilyName::Wright => {
            stray(&[
                ("a_lin", m.a_lin.is_some()),
                ("b_lin", m.b_lin.is_some()),
                ("r", m.r.is_some()),
                ("dimensionless", m.dimensionless.is_some()),
                ("dimensional", m.dimensional.is_some()),
            ])?;
            let rho = m
                .rho
                .ok_or_else(|| CliError::Config("model.rho: required for the wright family".into()))?;
            Ok(ParamSpec::Wright { rho })
        }
        FamilyName::Linear => {
            stray(&[
                ("rho", m.rho.is_some()),
                ("dimensionless", m.dimensionless.is_some()),
                ("dimensional", m.dimensional.is_some()),
            ])?;
            let need = |v: Option<f64>, n: &str| {
                v.ok_or_else(|| CliError::Config(format!("model.{n}: required for the linear family")))
            };
            Ok(ParamSpec::Linear {
                a_lin: need(m.a_lin, "a_lin")?,
                b_lin: need(m.b_lin, "b_lin")?,
                r: need(m.r, "r")?,
            })
        }
        _ => {
            stray(&[
                ("rho", m.rho.is_some()),
                ("a_lin", m.a_lin.is_some()),
                ("b_lin", m.b_lin.is_some()),
                ("r", m.r.is_some()),
            ])?;
            match (m.dimensionless, m.dimensional) {
                (Some(d), None) => Ok(ParamSpec::Dimensionless(DimensionlessParams {
                    a: d.a,
                    b: d.b,
                    m: d.m,
                    r: d.r,
                })),
                (None, Some(q)) => Ok(ParamSpec::Dimensional(DimensionalParams {
                    c: q.C,
                    d: q.D,
                    a: q.A,
                    b: q.B,
                    m: q.M,
                    r: q.R,
                })),
                _ => Err(CliError::Config(
                    "model: give exactly one of [model.dimensionless] or [model.dimensional]".into(),
                )),
            }
        }
    }
}

pub fn build_model(family: FamilyName, params: &ParamSpec) -> Result<Model, CliError> {
    let model = match (*params, family) {
        (ParamSpec::Wright { rho }, _) => Model::Wright { rho },
        (ParamSpec::Linear { a_lin, b_lin, r }, _) => Model::Linear { a_lin, b_lin, r },
        (spec, fam) => {
            let p = match spec {
                ParamSpec::Dimensionless(p) => p,
                ParamSpec::Dimensional(q) => {
                    q.validate()
                        .map_err(|e| CliError::Config(format!("model.dimensional: {e}")))?;
                    q.nondimensionalize()
                }
                _ => unreachable!(),
            };
            match fam {
                FamilyName::Chemostat => Model::Chemostat(p),
                FamilyName::Hyperbolic => Model::Hyperbolic(p),
                FamilyName::ChemoLogistic => Model::ChemoLogistic(p),
                FamilyName::Hutchinson => Model::Hutchinson(p),
                _ => unreachable!(),
            }
        }
    };
    model
        .validate()
        .map_err(|e| CliError::Config(format!("model: {e}")))?;
    Ok(model)
}

fn parameter_names(params: &ParamSpec) -> &'static [&'static str] {
    match params {
        ParamSpec::Dimensionless(_) => &["a", "b", "m", "r"],
        ParamSpec::Dimensional(_) => &["C", "D", "A", "B", "M", "R"],
        ParamSpec::Wright { .. } => &["rho"],
        ParamSpec::Linear { .. } => &["a_lin", "b_lin", "r"],
    }
}

fn substitute(params: &ParamSpec, name: &str, v: f64) -> Result<ParamSpec, CliError> {
    let mut out = *params;
    let slot: Option<&mut f64> = match &mut out {
        ParamSpec::Dimensionless(p) => match name {
            "a" => Some(&mut p.a),
            "b" => Some(&mut p.b),
            "m" => Some(&mut p.m),
            "r" => Some(&mut p.r),
            _ => None,
        },
        ParamSpec::Dimensional(q) => match name {
            "C" => Some(&mut q.c),
            "D" => Some(&mut q.d),
            "A" => Some(&mut q.a),
            "B" => Some(&mut q.b),
            "M" => Some(&mut q.m),
            "R" => Some(&mut q.r),
            _ => None,
        },
        ParamSpec::Wright { rho } => (name == "rho").then_some(rho),
        ParamSpec::Linear { a_lin, b_lin, r } => match name {
            "a_lin" => Some(a_lin),
            "b_lin" => Some(b_lin),
            "r" => Some(r),
            _ => None,
        },
    };
    match slot {
        Some(x) => *x = v,
        None => {
            return Err(CliError::Config(format!(
                "sweep.parameter: `{name}` is not a parameter of this scenario (expected one of {})",
                parameter_names(params).join(", ")
            )))
        }
    }
    Ok(out)
}

fn sweep_spec(s: RawSweep, family: FamilyName, params: &ParamSpec) -> Result<SweepSpec, CliError> {
    let grid = match (s.values, s.min, s.max, s.count) {
        (Some(v), None, None, None) => {
            if v.len() < 2 {
                return Err(CliError::Config("sweep.values: need at least 2 points".into()));
            }
            Grid::Values(v)
        }
        (None, Some(min), Some(max), Some(count)) => {
            if count < 2 {
                return Err(CliError::Config("sweep.count: need at least 2 points".into()));
            }
            if !(min.is_finite() && max.is_finite()) {
                return Err(CliError::Config("sweep.min/max: must be finite".into()));
            }
            Grid::Range { min, max, count }
        }
        _ => {
            return Err(CliError::Config(
                "sweep: give either `values` or all of `min`, `max` and `count`".into(),
            ))
        }
    };
    // fails for names that do not belong to the scenario
    let probe = substitute(params, &s.parameter, grid.points()[0])?;
    build_model(family, &probe)?;
    let horizon = s.horizon.map(|h| positive("sweep.horizon", h)).transpose()?;
    Ok(SweepSpec {
        parameter: s.parameter,
        grid,
        verdict: s.verdict,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario, CliError> {
        Scenario::parse(text, Path::new("/tmp"))
    }

    const WRIGHT: &str = r#"
        [model]
        family = "wright"
        rho = 1.0
        [history]
        constant = 0.5
        [run]
        horizon = 200.0
    "#;

    #[test]
    fn parses_a_minimal_scenario() {
        let s = parse(WRIGHT).unwrap();
        assert_eq!(s.model().unwrap(), Model::Wright { rho: 1.0 });
        assert_eq!(s.history(&s.model().unwrap()).unwrap().span(), (-1.0, 0.0));
        assert!(s.csv.is_none() && s.sweep.is_none());
    }

    #[test]
    fn dimensional_block_is_nondimensionalized() {
        let s = parse(
            r#"
            [model]
            family = "chemostat"
            [model.dimensional]
            C = 2.0
            D = 0.5
            A = 1.0
            B = 0.25
            M = 3.0
            R = 2.0
            [history]
            constant = [0.5, 0.1]
            [run]
            horizon = 10.0
            [output]
            csv = "out.csv"
        "#,
        )
        .unwrap();
        assert_eq!(
            s.dimensionless().unwrap(),
            DimensionlessParams {
                a: 4.0,
                b: 0.5,
                m: 3.0,
                r: 1.0
            }
        );
        assert_eq!(s.csv.as_deref(), Some(Path::new("/tmp/out.csv")));
    }

    #[test]
    fn errors_name_the_field() {
        let msg = |t: &str| match parse(t) {
            Err(CliError::Config(m)) => m,
            other => panic!("{other:?}"),
        };
        assert!(msg(&WRIGHT.replace("rho = 1.0", "")).contains("model.rho"));
        assert!(msg(&WRIGHT.replace("wright", "wrong")).contains("model.family"));
        assert!(msg(&WRIGHT.replace("horizon = 200.0", "horizon = -1.0")).contains("run.horizon"));
        assert!(msg(&WRIGHT.replace("constant = 0.5", "constant = [0.5, 1.0]")).contains("history.constant"));
        let typo = msg(&WRIGHT.replace("horizon = 200.0", "horizon = 200.0\nhorizn = 3.0"));
        assert!(typo.contains("horizn") && typo.contains("line"), "{typo}");
        let both = WRIGHT.replace("[run]", "[model.dimensionless]\na = 1.0\nm = 1.0\nr = 1.0\n[run]");
        assert!(msg(&both).contains("model.dimensionless"));
    }

    #[test]
    fn sweep_grids() {
        let s = parse(&format!(
            "{WRIGHT}\n[sweep]\nparameter = \"rho\"\nmin = 1.0\nmax = 2.2\ncount = 13\n"
        ))
        .unwrap();
        let pts = s.sweep.unwrap().grid.points();
        assert_eq!(pts.len(), 13);
        assert_eq!((pts[0], pts[12]), (1.0, 2.2));
        assert!(matches!(
            parse(&format!(
                "{WRIGHT}\n[sweep]\nparameter = \"m\"\nvalues = [1.0, 2.0]\n"
            )),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            parse(&format!(
                "{WRIGHT}\n[sweep]\nparameter = \"rho\"\nmin = 1.0\nmax = 2.0\ncount = 1\n"
            )),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn polynomial_history() {
        let s = parse(&WRIGHT.replace("constant = 0.5", "polynomial = [0.5, 0.25]")).unwrap();
        let phi = s.history(&s.model().unwrap()).unwrap();
        assert_eq!(phi.eval(-1.0).unwrap()[0], 0.25);
    }
}
