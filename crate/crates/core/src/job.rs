//! JSON job files and the reports produced from them.
//!
//! ```json
//! {
//!   "expression": "exp(x1)",
//!   "mean": [0.0],
//!   "covariance": [[0.1]],
//!   "family": "gaussian",
//!   "methods": ["taylor1", "taylor2", "mc"],
//!   "mc_count": 1000000,
//!   "seed": 7,
//!   "bridge": { "rho": [[1.0]], "alphas": [0.2, 0.1] }
//! }
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bridge::{self, ConvergenceRow, DensityAnalog, LineFit, ScanOptions};
use crate::error::{Error, Result};
use crate::expr::{self, Expression};
use crate::linalg::Matrix;
use crate::model::{Family, StochasticModel};
use crate::oracle;
use crate::taylor;

pub const DEFAULT_MC_COUNT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Taylor1,
    Taylor2,
    Trace,
    Mc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Taylor1 => "taylor1",
            Method::Taylor2 => "taylor2",
            Method::Trace => "trace",
            Method::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeConfig {
    pub rho: Matrix,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
}

fn default_alphas() -> Vec<f64> {
    bridge::DEFAULT_ALPHAS.to_vec()
}

fn default_mc_count() -> u64 {
    DEFAULT_MC_COUNT
}

fn default_family() -> Family {
    Family::Gaussian
}

/// One job. `mean`, `covariance` and `methods` are needed by `estimate`,
/// `bridge` by the bridge scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub expression: String,
    #[serde(default)]
    pub mean: Option<Vec<f64>>,
    #[serde(default)]
    pub covariance: Option<Matrix>,
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default = "default_mc_count")]
    pub mc_count: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub bridge: Option<BridgeConfig>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<JobConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<JobConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        JobConfig::from_json(&text)
    }

    fn model(&self) -> Result<StochasticModel> {
        let mean = self.mean.clone().ok_or_else(|| Error::Config("missing field `mean`".into()))?;
        let cov = self
            .covariance
            .clone()
            .ok_or_else(|| Error::Config("missing field `covariance`".into()))?;
        StochasticModel::validate(mean, cov, self.family)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub method: Method,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_term: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction_term: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta {
    pub a: Method,
    pub b: Method,
    /// `value(a) - value(b)`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub expression: String,
    pub dimension: usize,
    pub family: Family,
    pub seed: u64,
    pub covariance_symmetrized: bool,
    pub results: Vec<MethodResult>,
    pub deltas: Vec<Delta>,
}

pub fn run_estimate(config: &JobConfig) -> Result<EstimateReport> {
    if config.methods.is_empty() {
        return Err(Error::Config("`methods` must be nonempty".into()));
    }
    let f = expr::parse(&config.expression)?;
    let model = config.model()?;
    if config.methods.contains(&Method::Trace) {
        taylor::check_trace_preconditions(&f, &model)?;
    }
    let mut methods = config.methods.clone();
    dedup_in_order(&mut methods);

    let mut results = Vec::with_capacity(methods.len());
    for &method in &methods {
        let r = match method {
            Method::Taylor1 => {
                let e = taylor::first_order_mean(&f, &model)?;
                MethodResult::plain(method, e.value())
            }
            Method::Taylor2 => {
                let e = taylor::second_order_mean(&f, &model)?;
                MethodResult {
                    constant_term: Some(e.constant_term()),
                    correction_term: Some(e.correction_term()),
                    ..MethodResult::plain(method, e.value())
                }
            }
            Method::Trace => MethodResult::plain(method, taylor::symmetric_trace_mean(&f, &model)?),
            Method::Mc => {
                let e = oracle::estimate_mean(&f, &model, config.mc_count, config.seed)?;
                MethodResult {
                    std_error: Some(e.std_error),
                    count: Some(e.count),
                    ..MethodResult::plain(method, e.mean)
                }
            }
        };
        results.push(r);
    }
    let mut deltas = Vec::new();
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            deltas.push(Delta {
                a: a.method,
                b: b.method,
                delta: a.value - b.value,
            });
        }
    }
    Ok(EstimateReport {
        expression: f.to_string(),
        dimension: model.dim(),
        family: model.family(),
        seed: config.seed,
        covariance_symmetrized: model.was_symmetrized(),
        results,
        deltas,
    })
}

fn dedup_in_order(methods: &mut Vec<Method>) {
    let mut seen = Vec::new();
    methods.retain(|m| {
        if seen.contains(m) {
            false
        } else {
            seen.push(*m);
            true
        }
    });
}

impl MethodResult {
    fn plain(method: Method, value: f64) -> MethodResult {
        MethodResult {
            method,
            value,
            constant_term: None,
            correction_term: None,
            std_error: None,
            count: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeReport {
    pub expression: String,
    pub family: Family,
    pub seed: u64,
    pub base_count: u64,
    pub rows: Vec<ConvergenceRow>,
    /// Log-log fit of gap against alpha; `None` unless every gap is resolved
    /// above Monte Carlo noise.
    pub gap_slope: Option<LineFit>,
    pub slope_significant: bool,
    /// Linear fit of the rescaled mean against alpha.
    pub rescaled_fit: Option<LineFit>,
}

pub fn run_bridge(config: &JobConfig) -> Result<BridgeReport> {
    let bridge_cfg = config
        .bridge
        .as_ref()
        .ok_or_else(|| Error::Config("missing `bridge` section".into()))?;
    let f: Expression = expr::parse(&config.expression)?;
    let rho = DensityAnalog::new(bridge_cfg.rho.clone())?;
    let options = ScanOptions {
        family: config.family,
        ..ScanOptions::default()
    };
    let rows = bridge::convergence_scan_with(&f, &rho, &bridge_cfg.alphas, config.mc_count, config.seed, options)?;
    let alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let rescaled: Vec<f64> = rows.iter().map(|r| r.rescaled).collect();
    let slope_significant = rows.iter().all(ConvergenceRow::gap_resolved);
    let gap_slope = if slope_significant {
        bridge::fit_log_log(&alphas, &gaps)
    } else {
        None
    };
    Ok(BridgeReport {
        expression: f.to_string(),
        family: config.family,
        seed: config.seed,
        base_count: config.mc_count,
        rows,
        gap_slope,
        slope_significant: gap_slope.is_some(),
        rescaled_fit: bridge::fit_line(&alphas, &rescaled),
    })
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Shortest decimal that reads back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

impl EstimateReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "expression: {}", self.expression);
        let _ = writeln!(out, "dimension:  {}", self.dimension);
        let _ = writeln!(out, "family:     {}", self.family);
        let _ = writeln!(out, "seed:       {}", self.seed);
        if self.covariance_symmetrized {
            let _ = writeln!(out, "note:       covariance replaced by (B + B^T)/2");
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<8} {:>24} {:>24} {:>24} {:>24} {:>12}",
            "method", "value", "constant", "correction", "std_error", "count"
        );
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), num);
        for r in &self.results {
            let _ = writeln!(
                out,
                "{:<8} {:>24} {:>24} {:>24} {:>24} {:>12}",
                r.method.name(),
                num(r.value),
                opt(r.constant_term),
                opt(r.correction_term),
                opt(r.std_error),
                r.count.map_or_else(|| "-".to_string(), |c| c.to_string()),
            );
        }
        if !self.deltas.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "{:<20} {:>24}", "difference", "value");
            for d in &self.deltas {
                let label = format!("{} - {}", d.a.name(), d.b.name());
                let _ = writeln!(out, "{:<20} {:>24}", label, num(d.delta));
            }
        }
        out
    }
}

impl BridgeReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "expression: {}", self.expression);
        let _ = writeln!(out, "family:     {}", self.family);
        let _ = writeln!(out, "seed:       {}", self.seed);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:>8} {:>24} {:>24} {:>24} {:>24} {:>24} {:>10}",
            "alpha", "classical_mean", "rescaled", "quantum_value", "gap", "mc_std_error", "count"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>8} {:>24} {:>24} {:>24} {:>24} {:>24} {:>10}",
                num(r.alpha),
                num(r.classical_mean),
                num(r.rescaled),
                num(r.quantum_value),
                num(r.gap),
                num(r.mc_std_error),
                r.mc_count
            );
        }
        let _ = writeln!(out);
        match self.gap_slope {
            Some(fit) => {
                let _ = writeln!(out, "gap log-log slope: {}", num(fit.slope));
            }
            None => {
                let _ = writeln!(out, "gap log-log slope: not significant (gaps within Monte Carlo noise)");
            }
        }
        if let Some(fit) = self.rescaled_fit {
            let _ = writeln!(
                out,
                "rescaled fit: {} + {} * alpha",
                num(fit.intercept),
                num(fit.slope)
            );
        }
        out
    }
}
