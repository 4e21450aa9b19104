//! Report documents, serialized as TOML.
//!
//! Every report starts with `command` and carries the scenario's `[model]`
//! table; a dimensional scenario is echoed with both its `[model.dimensional]`
//! block and the computed `[model.dimensionless]` block.
//!
//! * `simulate`: `horizon`, `rows`, `final_time`, `final_state`, step
//!   counts, and for the chemostat a `[lyapunov]` table with `v0`, `v_end`
//!   and the `decay_rate` fitted to `ln |V|` on `[fit_start, fit_end]`.
//! * `analyze`: `delay`, `summary` and one `[[equilibria]]` entry per
//!   equilibrium with its linearization, `case`, `critical_delay` and
//!   `omega` (case C only), the leading root and the predicted `behavior`.
//! * `verify`: `suite`, `seed`, `passed` and one `[[properties]]` entry per
//!   property with `cases`, `failures`, the `worst` value of `metric` and
//!   free-form `notes`.

use serde::Serialize;

use crate::config::{ParamSpec, Scenario};
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct DimensionlessEcho {
    pub a: f64,
    pub b: f64,
    pub m: f64,
    pub r: f64,
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
pub struct DimensionalEcho {
    pub C: f64,
    pub D: f64,
    pub A: f64,
    pub B: f64,
    pub M: f64,
    pub R: f64,
}

#[derive(Debug, Serialize)]
pub struct ModelEcho {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_lin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_lin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimensional: Option<DimensionalEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimensionless: Option<DimensionlessEcho>,
}

impl ModelEcho {
    pub fn of(s: &Scenario) -> ModelEcho {
        let mut echo = ModelEcho {
            family: s
                .model()
                .map(|m| m.family().name().to_string())
                .unwrap_or_default(),
            rho: None,
            a_lin: None,
            b_lin: None,
            r: None,
            dimensional: None,
            dimensionless: None,
        };
        match s.params {
            ParamSpec::Wright { rho } => echo.rho = Some(rho),
            ParamSpec::Linear { a_lin, b_lin, r } => {
                echo.a_lin = Some(a_lin);
                echo.b_lin = Some(b_lin);
                echo.r = Some(r);
            }
            ParamSpec::Dimensional(q) => {
                echo.dimensional = Some(DimensionalEcho {
                    C: q.c,
                    D: q.d,
                    A: q.a,
                    B: q.b,
                    M: q.m,
                    R: q.r,
                });
            }
            ParamSpec::Dimensionless(_) => {}
        }
        if let Some(p) = s.dimensionless() {
            echo.dimensionless = Some(DimensionlessEcho {
                a: p.a,
                b: p.b,
                m: p.m,
                r: p.r,
            });
        }
        echo
    }
}

#[derive(Debug, Serialize)]
pub struct LyapunovSummary {
    pub v0: f64,
    pub v_end: f64,
    pub decay_rate: f64,
    pub fit_start: f64,
    pub fit_end: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub command: &'static str,
    pub horizon: f64,
    pub rows: usize,
    pub final_time: f64,
    pub final_state: Vec<f64>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub model: ModelEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovSummary>,
}

#[derive(Debug, Serialize)]
pub struct EquilibriumEntry {
    pub kind: String,
    pub value: Vec<f64>,
    /// Present for the chemostat, whose spectrum is `-1` plus the roots of
    /// the scalar factor reported here.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reported_via: Option<String>,
    pub a_lin: f64,
    pub b_lin: f64,
    pub case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_delay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub leading_re: f64,
    pub leading_im: f64,
    pub behavior: String,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub command: &'static str,
    pub delay: f64,
    pub summary: String,
    pub model: ModelEcho,
    pub equilibria: Vec<EquilibriumEntry>,
}

#[derive(Debug, Serialize)]
pub struct PropertyEntry {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    pub metric: String,
    pub worst: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub properties: Vec<PropertyEntry>,
}

pub fn to_toml<T: Serialize>(doc: &T) -> Result<String, CliError> {
    toml::to_string(doc).map_err(|e| CliError::Io(format!("report serialization: {e}")))
}
