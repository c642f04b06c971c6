//! Nonlinear least-squares fits: cosine fringes, exponential decays and the
//! optical pumping rates.

mod cosine;
mod exponential;
mod lm;
mod rates;

pub use cosine::{cosine_model, fit_cosine, CosineParams};
pub use exponential::{exponential_model, fit_exponential};
pub use lm::{levenberg_marquardt, standard_errors, LmOptions, LmReport};
pub use rates::{fit_rate_params, rate_curves, rate_curves_jacobian};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("x and y lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("data contain non-finite values")]
    NonFinite,
    #[error("sigma must be positive and match the data length")]
    BadSigma,
    #[error("x values do not span a positive range")]
    NoSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub name: String,
    pub unit: String,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub params: Vec<FitParam>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.param(name).map(|p| p.value)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.param(name).map(|p| p.std_error)
    }

    pub fn param(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.value).collect()
    }

    fn flag(mut self, msg: impl Into<String>) -> Self {
        self.converged = false;
        self.message = Some(msg.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitOptions {
    /// Per-point standard deviations; residuals are divided by them.
    pub sigma: Option<Vec<f64>>,
    pub lm: LmOptions,
}

pub(crate) fn check_xy(x: &[f64], y: &[f64], min: usize, opts: &FitOptions) -> Result<(), FitError> {
    if x.len() != y.len() {
        return Err(FitError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < min {
        return Err(FitError::TooFewPoints {
            need: min,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    check_sigma(opts, x.len())?;
    let (lo, hi) = min_max(x);
    if !(hi > lo) {
        return Err(FitError::NoSpan);
    }
    Ok(())
}

pub(crate) fn check_sigma(opts: &FitOptions, n: usize) -> Result<(), FitError> {
    if let Some(s) = &opts.sigma {
        if s.len() != n || s.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(FitError::BadSigma);
        }
    }
    Ok(())
}

pub(crate) fn weights(opts: &FitOptions, n: usize) -> Vec<f64> {
    match &opts.sigma {
        Some(s) => s.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; n],
    }
}

pub(crate) fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

pub(crate) fn spread(v: &[f64]) -> f64 {
    let (a, b) = min_max(v);
    b - a
}

pub(crate) fn build_result(
    model: &str,
    names: &[(&str, &str)],
    rep: &LmReport,
    values: Vec<f64>,
) -> FitResult {
    let errs = standard_errors(&rep.jacobian, rep.rss);
    let mut r = FitResult {
        model: model.to_string(),
        params: names
            .iter()
            .zip(values)
            .zip(errs.iter().chain(std::iter::repeat(&0.0)))
            .map(|((&(n, u), v), &e)| FitParam {
                name: n.to_string(),
                unit: u.to_string(),
                value: v,
                std_error: e,
            })
            .collect(),
        rss: rep.rss,
        converged: rep.converged,
        iterations: rep.iterations,
        message: None,
    };
    if !rep.converged {
        r.message = Some(format!("no convergence after {} iterations", rep.iterations));
    } else if errs.iter().any(|e| e.is_infinite()) {
        r = r.flag("parameters are not identifiable from these data");
    }
    r
}
