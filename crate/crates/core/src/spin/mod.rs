//! Two-spin register: an S=1 NV electron coupled to an I=1/2 ¹³C nucleus.
//!
//! Everything here is a pure function of [`RegisterParams`]. The density
//! matrix is stored in the product basis
//! `|-1,↑⟩, |-1,↓⟩, |0,↑⟩, |0,↓⟩, |+1,↑⟩, |+1,↓⟩`; pulses and free evolution
//! are carried out in the eigenbasis of the static Hamiltonian and mapped back.

mod eigen;
mod evolution;
mod hamiltonian;
pub mod lab;
mod operators;
mod params;
mod register;
mod state;

pub use eigen::{eigensystem, Eigensystem};
pub use evolution::{Dephasing, Driven, Frame, LevelShifts};
pub use hamiltonian::{build_hamiltonian, drive_operator};
pub use operators::{kron, C64, Mat6};
pub use params::{calibrate_a_par, RegisterParams, RF1_TARGET_HZ};
pub use register::{
    enhancement_factor_analytic, enhancement_factor_numeric, Nuclear, ProductLabel, Register,
    Transition, TransitionLabel,
};
pub use state::QuantumState;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("invalid register parameter: {0}")]
    InvalidParams(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("eigenstates cannot be assigned unique product labels")]
    AmbiguousLabels,
    #[error("transition {0} connects degenerate levels; identification is ambiguous")]
    DegenerateTransition(TransitionLabel),
    #[error("negative duration {0:e} s")]
    NegativeDuration(f64),
    #[error("electron spin projection must be -1, 0 or +1 (got {0})")]
    InvalidMs(i32),
    #[error("calibration did not converge: {0}")]
    Calibration(String),
}
