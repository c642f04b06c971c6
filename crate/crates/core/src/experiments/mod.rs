//! End-to-end protocols: Rabi, FID, initialization tomography, repeated
//! purification, transfer and storage, CPMG and extended decoupling.

mod engine;
mod fidelity;
mod init;
mod nuclear;
mod storage;
mod transfer;

pub use engine::{Engine, PrefixCache};
pub use fidelity::{extract_fidelity, fidelity_from_delta, fidelity_window, FidelityReport, Fringe, StateFidelity};
pub use init::{
    initialized_state, optimal_cycle_laser, run_init_tomography, run_repeated_init, PurificationPoint,
};
pub use nuclear::{run_fid, run_rabi};
pub use storage::{
    no_flip_residual, run_cpmg_storage, run_extended_dd, run_periodic_cpmg, single_flip_bound,
    single_flip_phase_errors, StorageFit, StorageOptions,
};
pub use transfer::{run_transfer_storage, transfer_fidelity, LossBudget, STATES};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dissipation::{FlipModel, LaserOptions, RateError, RateParams};
use crate::fitkit::{FitError, FitResult};
use crate::sequence::{parse_sequence, ResolveOptions, SequenceError, SequenceIR};
use crate::spin::{Register, RegisterParams, SpinError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("{0}")]
    Invalid(String),
}

/// Everything a protocol needs besides its own grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub register: RegisterParams,
    pub rates: RateParams,
    /// Effective MW Rabi frequency (Hz).
    pub mw_rabi: f64,
    /// Effective RF Rabi frequency (Hz).
    pub rf_rabi: f64,
    /// Initial long laser pulse (s).
    pub init_laser: f64,
    /// Laser pulse inside each purification cycle (s).
    pub cycle_laser: f64,
    pub cycles: u32,
    pub laser_coherence_threshold: f64,
    pub flip_model: FlipModel,
}

impl Default for Setup {
    fn default() -> Self {
        Setup {
            register: RegisterParams::default(),
            rates: RateParams::reference(),
            mw_rabi: 10e6,
            rf_rabi: 4.3e6,
            init_laser: 10e-6,
            cycle_laser: 150e-9,
            cycles: 10,
            laser_coherence_threshold: 0.0,
            flip_model: FlipModel::Symmetric,
        }
    }
}

impl Setup {
    pub fn register(&self) -> Result<Register, ExperimentError> {
        Ok(Register::new(self.register)?)
    }

    pub fn resolve_options(&self) -> ResolveOptions {
        ResolveOptions {
            mw_rabi: self.mw_rabi,
            rf_rabi: self.rf_rabi,
        }
    }

    pub fn laser_options(&self) -> LaserOptions {
        LaserOptions {
            coherence_threshold: self.laser_coherence_threshold,
        }
    }

    pub(crate) fn engine<'a>(&self, reg: &'a Register) -> Engine<'a> {
        let mut e = Engine::new(reg, self.rates);
        e.laser = self.laser_options();
        e
    }

    pub(crate) fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Metadata {
    pub experiment: String,
    pub seed: Option<u64>,
    pub params: serde_json::Value,
    /// Headline numbers, e.g. a fitted frequency.
    pub summary: BTreeMap<String, f64>,
    pub fits: Vec<FitResult>,
}

/// One experiment curve. `y` is the bright-state signal in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_err: Option<Vec<f64>>,
    pub metadata: Metadata,
}

impl SweepResult {
    pub(crate) fn new(name: &str, setup: &Setup, x: Vec<f64>, y: Vec<f64>) -> Self {
        SweepResult {
            name: name.to_string(),
            x,
            y,
            y_err: None,
            metadata: Metadata {
                experiment: name.to_string(),
                seed: None,
                params: setup.snapshot(),
                summary: BTreeMap::new(),
                fits: Vec::new(),
            },
        }
    }

    pub fn summary(&self, key: &str) -> Option<f64> {
        self.metadata.summary.get(key).copied()
    }

    /// Points with `lo ≤ x ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        self.x
            .iter()
            .zip(&self.y)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .map(|(x, y)| (*x, *y))
            .unzip()
    }
}

/// The golden sequences shipped with the crate.
pub mod corpus {
    pub const RABI: &str = include_str!("../../sequences/rabi.seq");
    pub const FID: &str = include_str!("../../sequences/fid.seq");
    pub const PURIFICATION: &str = include_str!("../../sequences/purification.seq");
    pub const TRANSFER: &str = include_str!("../../sequences/transfer.seq");
    pub const EXTENDED_DD: &str = include_str!("../../sequences/extended_dd.seq");

    pub const ALL: [(&str, &str); 5] = [
        ("rabi", RABI),
        ("fid", FID),
        ("purification", PURIFICATION),
        ("transfer", TRANSFER),
        ("extended_dd", EXTENDED_DD),
    ];
}

pub(crate) fn load(src: &str) -> Result<SequenceIR, ExperimentError> {
    Ok(parse_sequence(src)?)
}

pub(crate) fn check_grid(x: &[f64], what: &str) -> Result<(), ExperimentError> {
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(ExperimentError::Invalid(format!("{what} grid must be finite and non-negative")));
    }
    if x.windows(2).any(|w| w[1] < w[0]) {
        return Err(ExperimentError::Invalid(format!("{what} grid must be ascending")));
    }
    Ok(())
}
