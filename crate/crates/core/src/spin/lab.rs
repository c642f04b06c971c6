//! Fixed-step lab-frame integration of a linearly polarised drive.
//!
//! Exists only to cross-check the rotating-wave drive and the dressed
//! coupling: no rotating-wave approximation, no eigenbasis truncation.

use nalgebra::Vector6;
use std::f64::consts::PI;

use super::hamiltonian::drive_operator;
use super::operators::{Mat6, C64};
use super::register::{Register, TransitionLabel};
use super::SpinError;

pub type Ket = Vector6<C64>;

#[derive(Debug, Clone, Copy)]
pub struct LabDrive {
    pub transition: TransitionLabel,
    /// Peak transverse field (T).
    pub amplitude: f64,
    pub phase: f64,
    /// Carrier offset from the transition frequency (Hz).
    pub detuning: f64,
}

impl LabDrive {
    /// Field amplitude that gives a bare nuclear Rabi frequency `rabi`
    /// (`γn B₁ / 2`).
    pub fn for_bare_nuclear_rabi(reg: &Register, transition: TransitionLabel, rabi: f64) -> Self {
        LabDrive {
            transition,
            amplitude: 2.0 * rabi / reg.params().gamma_n,
            phase: 0.0,
            detuning: 0.0,
        }
    }
}

/// Largest step allowed for a register: 1/(50 f_max), with f_max the widest
/// energy excursion from the mean level.
pub fn max_step(reg: &Register) -> f64 {
    let e = &reg.eigen().values;
    let mean = e.mean();
    let fmax = e.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    1.0 / (50.0 * fmax)
}

/// Integrates `i dψ/dt = 2π [H₀ + B₁ cos(2π f t + φ) H₁] ψ` with classical
/// RK4 and returns the state at each sample time (`samples` equally spaced
/// points over `duration`, including both ends).
pub fn integrate(
    reg: &Register,
    psi0: &Ket,
    drive: &LabDrive,
    duration: f64,
    samples: usize,
    steps_per_max: usize,
) -> Result<Vec<Ket>, SpinError> {
    if !(duration >= 0.0) {
        return Err(SpinError::NegativeDuration(duration));
    }
    let mean = reg.eigen().values.mean();
    let h0 = reg.hamiltonian() - Mat6::identity() * C64::new(mean, 0.0);
    let h1 = drive_operator(reg.params()) * C64::new(drive.amplitude, 0.0);
    let carrier = reg.transition(drive.transition).frequency + drive.detuning;

    let intervals = samples.max(2) - 1;
    let seg = duration / intervals as f64;
    let dt_max = max_step(reg) * 50.0 / steps_per_max.max(50) as f64;
    let n_sub = (seg / dt_max).ceil().max(1.0) as usize;
    let dt = seg / n_sub as f64;

    let minus_i2pi = C64::new(0.0, -2.0 * PI);
    let rhs = |t: f64, psi: &Ket| -> Ket {
        let c = (2.0 * PI * carrier * t + drive.phase).cos();
        (h0 * psi + h1 * psi * C64::new(c, 0.0)) * minus_i2pi
    };

    let mut out = Vec::with_capacity(intervals + 1);
    let mut psi = *psi0;
    let mut t = 0.0;
    out.push(psi);
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    for _ in 0..intervals {
        for _ in 0..n_sub {
            let k1 = rhs(t, &psi);
            let k2 = rhs(t + 0.5 * dt, &(psi + k1 * half));
            let k3 = rhs(t + 0.5 * dt, &(psi + k2 * half));
            let k4 = rhs(t + dt, &(psi + k3 * full));
            psi += (k1 + k2 * two + k3 * two + k4) * sixth;
            t += dt;
        }
        out.push(psi);
    }
    Ok(out)
}

/// Eigenvector of a labelled level as a ket.
pub fn eigen_ket(reg: &Register, label: super::ProductLabel) -> Ket {
    reg.eigen().vectors.column(reg.eigen_index(label)).into_owned()
}

/// `|⟨label|ψ⟩|²` in the eigenbasis.
pub fn level_population(reg: &Register, psi: &Ket, label: super::ProductLabel) -> f64 {
    (eigen_ket(reg, label).adjoint() * psi)[(0, 0)].norm_sqr()
}
