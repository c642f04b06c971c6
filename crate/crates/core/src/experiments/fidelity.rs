use serde::{Deserialize, Serialize};

use crate::fitkit::{fit_cosine, FitOptions, FitResult};

use super::{ExperimentError, SweepResult};

/// Fringe parameters from a windowed single-oscillation cosine fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fringe {
    /// Peak-to-peak amplitude, clamped to `[0, 1]`.
    pub delta: f64,
    /// `(1 + Δ) / 2`.
    pub fidelity: f64,
    /// Fringe phase at the window centre (rad).
    pub phase: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFidelity {
    pub label: String,
    pub phi: f64,
    pub delta: f64,
    pub fidelity: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub states: Vec<StateFidelity>,
    pub mean_fidelity: f64,
    /// Peak-to-peak amplitude of the lossless reference pipeline that
    /// normalizes each `Δ`.
    pub reference_delta: f64,
}

/// `F = (1 + Δ)/2`.
pub fn fidelity_from_delta(delta: f64) -> f64 {
    (1.0 + delta) / 2.0
}

/// One full fringe period centred on `centre` for fringes at `frequency`.
pub fn fidelity_window(centre: f64, frequency: f64) -> (f64, f64) {
    let half = 0.5 / frequency.abs();
    (centre - half, centre + half)
}

/// Fits a single oscillation inside `window` and converts the
/// peak-to-peak amplitude to a fidelity.
pub fn extract_fidelity(sweep: &SweepResult, window: (f64, f64)) -> Result<Fringe, ExperimentError> {
    let (x, y) = sweep.window(window.0, window.1);
    let fit = fit_cosine(&x, &y, None, &FitOptions::default())?;
    let a = fit.get("amplitude").unwrap_or(0.0);
    let centre = 0.5 * (window.0 + window.1);
    let f = fit.get("frequency").unwrap_or(0.0);
    let mut phase = fit.get("phase").unwrap_or(0.0) + 2.0 * std::f64::consts::PI * f * centre;
    if a < 0.0 {
        phase += std::f64::consts::PI;
    }
    let delta = (2.0 * a.abs()).min(1.0);
    Ok(Fringe {
        delta,
        fidelity: fidelity_from_delta(delta),
        phase: phase.rem_euclid(std::f64::consts::TAU),
        fit,
    })
}
