use nalgebra::{Matrix6, Vector6};

use super::expm::expm;
use super::rates::RateParams;
use super::RateError;
use crate::spin::{Nuclear, ProductLabel, QuantumState, Register};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserOptions {
    /// Coherences are erased for pulses longer than this (s).
    pub coherence_threshold: f64,
}

impl Default for LaserOptions {
    fn default() -> Self {
        LaserOptions {
            coherence_threshold: 0.0,
        }
    }
}

/// Six-level extension of the pumping model over eigen indices: the four
/// modelled levels follow the rate matrix, and `mS=−1` is pumped into
/// `mS=0` with the same nuclear-conserving and nuclear-flipping rates.
pub fn laser_generator(reg: &Register, r: &RateParams) -> Matrix6<f64> {
    use Nuclear::*;
    let idx = |ms, n| reg.eigen_index(ProductLabel::new(ms, n));
    let (zu, zd) = (idx(0, Up), idx(0, Down));
    let mut m = Matrix6::zeros();
    let mut link = |from: usize, to: usize, rate: f64| {
        m[(to, from)] += rate;
        m[(from, from)] -= rate;
    };
    link(zu, zd, r.gamma);
    link(zd, zu, r.gamma);
    for ms in [1, -1] {
        link(idx(ms, Up), zu, r.alpha);
        link(idx(ms, Up), zd, r.beta);
        link(idx(ms, Down), zd, r.alpha);
        link(idx(ms, Down), zu, r.beta);
    }
    m
}

/// Laser pulse of the given duration: eigen populations evolve under the
/// pumping model and coherences are erased.
pub fn apply_laser(
    reg: &Register,
    s: &QuantumState,
    r: &RateParams,
    duration: f64,
    opts: &LaserOptions,
) -> Result<QuantumState, RateError> {
    r.validate()?;
    if !(duration >= 0.0) {
        return Err(RateError::NegativeTime(duration));
    }
    if duration == 0.0 {
        return Ok(s.clone());
    }
    let mut rho_e = s.to_eigenbasis(reg);
    let pops = Vector6::from_fn(|k, _| rho_e[(k, k)].re);
    let next = expm(&(laser_generator(reg, r) * duration)) * pops;
    let erase = duration > opts.coherence_threshold;
    for i in 0..6 {
        for j in 0..6 {
            if i == j {
                rho_e[(i, i)] = next[i].into();
            } else if erase {
                rho_e[(i, j)] = 0.0.into();
            }
        }
    }
    Ok(QuantumState::from_eigenbasis(reg, &rho_e))
}
