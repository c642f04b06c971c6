//! Optical pumping, storage decay and electron spin flips.

mod decay;
pub mod expm;
mod laser;
mod rates;
mod telegraph;

pub use decay::{storage_decay_envelope, DecayParams};
pub use laser::{apply_laser, laser_generator, LaserOptions};
pub use rates::{analytic_populations, propagate_rates, rate_matrix, Populations, RateParams};

pub use telegraph::{sample_flips_with, sample_t1_flips, ElectronHistory, FlipModel};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("rate {0} must be finite and non-negative (got {1})")]
    InvalidRate(&'static str, f64),
    #[error("populations must be non-negative and sum to one (got {0:?})")]
    InvalidPopulations([f64; 4]),
    #[error("decay times must be positive (T1e={0}, T2C={1})")]
    InvalidDecay(f64, f64),
    #[error("negative time {0:e} s")]
    NegativeTime(f64),
}
