use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::expm::expm;
use super::RateError;

/// Optical pumping rates under laser illumination (1/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// Nuclear-spin-conserving pumping `mS=1 → mS=0`.
    pub alpha: f64,
    /// Nuclear-spin-flipping pumping `mS=1 → mS=0`.
    pub beta: f64,
    /// Depolarisation within the `mS=0` ground states.
    pub gamma: f64,
}

impl RateParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, RateError> {
        let r = RateParams { alpha, beta, gamma };
        r.validate()?;
        Ok(r)
    }

    /// Rates fitted to the laser-duration tomography:
    /// `1/α = 0.17 µs`, `1/β = 0.92 µs`, `1/γ = 1.6 µs`.
    pub fn reference() -> Self {
        RateParams {
            alpha: 1.0 / 0.17e-6,
            beta: 1.0 / 0.92e-6,
            gamma: 1.0 / 1.6e-6,
        }
    }

    pub fn validate(&self) -> Result<(), RateError> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(RateError::InvalidRate(name, v));
            }
        }
        Ok(())
    }
}

/// Populations `(P|0,↑⟩, P|0,↓⟩, P|1,↑⟩, P|1,↓⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations(pub [f64; 4]);

impl Populations {
    pub const ZERO_UP: usize = 0;
    pub const ZERO_DOWN: usize = 1;
    pub const ONE_UP: usize = 2;
    pub const ONE_DOWN: usize = 3;

    /// Nuclear spin ↑, electron depolarised over `mS ∈ {0, 1}`: the state
    /// right after the swap that precedes the tomography laser pulse.
    pub const SWAPPED: Populations = Populations([0.5, 0.0, 0.5, 0.0]);

    pub fn new(p: [f64; 4]) -> Result<Self, RateError> {
        let sum: f64 = p.iter().sum();
        if p.iter().any(|&x| !(x >= -1e-12)) || (sum - 1.0).abs() > 1e-12 {
            return Err(RateError::InvalidPopulations(p));
        }
        Ok(Populations(p))
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `P|0,↑⟩ + P|0,↓⟩`.
    pub fn bright(&self) -> f64 {
        self.0[0] + self.0[1]
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::from(self.0)
    }
}

/// Transition matrix of `dP/dt = M P` in the [`Populations`] ordering.
/// Columns sum to zero.
pub fn rate_matrix(r: &RateParams) -> Matrix4<f64> {
    let (a, b, g) = (r.alpha, r.beta, r.gamma);
    let k = a + b;
    Matrix4::new(
        -g, g, a, b, //
        g, -g, b, a, //
        0.0, 0.0, -k, 0.0, //
        0.0, 0.0, 0.0, -k,
    )
}

/// `(e^{−kt} − e^{−st}) / (k − s)`, continuous through `k = s`.
///
/// Within `|k − s| ≤ 1e-6·k` the second-order expansion about `k = s`
/// (leading term `−t·e^{−st}`) is used.
pub(crate) fn decay_difference(k: f64, s: f64, t: f64) -> f64 {
    let d = k - s;
    let es = (-s * t).exp();
    if d.abs() <= 1e-6 * k {
        let x = d * t;
        -t * es * (1.0 - x / 2.0 + x * x / 6.0)
    } else if d > 0.0 {
        es * (-d * t).exp_m1() / d
    } else {
        -(-k * t).exp() * (d * t).exp_m1() / d
    }
}

/// Closed-form populations starting from [`Populations::SWAPPED`].
pub fn analytic_populations(r: &RateParams, t: f64) -> Result<Populations, RateError> {
    r.validate()?;
    if !(t >= 0.0) {
        return Err(RateError::NegativeTime(t));
    }
    let (a, b, g) = (r.alpha, r.beta, r.gamma);
    let k = a + b;
    let s = 2.0 * g;
    let phi = decay_difference(k, s, t);
    let p0u = 0.5 - 0.5 * (a - g) * phi;
    let p0d = 0.5 - 0.5 * (b - g) * phi - 0.5 * (-s * t).exp();
    let p1u = 0.5 * (-k * t).exp();
    Ok(Populations([p0u, p0d, p1u, 0.0]))
}

/// General initial condition via the matrix exponential of the rate matrix.
pub fn propagate_rates(p0: &Populations, r: &RateParams, t: f64) -> Result<Populations, RateError> {
    r.validate()?;
    if !(t >= 0.0) {
        return Err(RateError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(*p0);
    }
    let p = expm(&(rate_matrix(r) * t)) * p0.as_vector();
    Ok(Populations([p[0], p[1], p[2], p[3]]))
}
