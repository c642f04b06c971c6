use std::f64::consts::PI;

use super::operators::{Mat6, C64};
use super::register::{Nuclear, Register, TransitionLabel};
use super::state::QuantumState;
use super::SpinError;

/// Reference frame for free evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// Full static Hamiltonian.
    Lab,
    /// Interaction picture of the static Hamiltonian: every transition is
    /// on resonance and free evolution is the identity.
    Interaction,
    /// Interaction picture except that the upper level of `transition` is
    /// referenced to a drive detuned by `detuning` Hz; coherences on that
    /// transition precess at the detuning.
    Rotating {
        transition: TransitionLabel,
        detuning: f64,
    },
}

/// Exponential dephasing envelopes applied to coherences during free
/// evolution. Nuclear envelopes act on pairs of levels with different
/// nuclear labels, electron envelopes on pairs with different `mS`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dephasing {
    pub nuclear_t2star: Option<f64>,
    pub electron_t2star: Option<f64>,
}

impl Dephasing {
    pub const NONE: Dephasing = Dephasing {
        nuclear_t2star: None,
        electron_t2star: None,
    };

    pub fn nuclear(t2star: f64) -> Self {
        Dephasing {
            nuclear_t2star: Some(t2star),
            electron_t2star: None,
        }
    }

    fn is_none(&self) -> bool {
        self.nuclear_t2star.is_none() && self.electron_t2star.is_none()
    }
}

/// Static energy offsets (Hz) of each eigenlevel, e.g. from quasi-static
/// field noise. Indexed by eigen index.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LevelShifts(pub [f64; 6]);

impl LevelShifts {
    /// Offsets `δe·mS + δn·m_I` for an electron detuning `δe` and a nuclear
    /// detuning `δn`.
    pub fn static_noise(reg: &Register, electron: f64, nuclear: f64) -> Self {
        LevelShifts(std::array::from_fn(|k| {
            let l = reg.label_of(k);
            let mi = match l.nuclear {
                Nuclear::Up => 0.5,
                Nuclear::Down => -0.5,
            };
            electron * f64::from(l.ms) + nuclear * mi
        }))
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&s| s == 0.0)
    }
}

/// Result of a driven segment.
#[derive(Debug, Clone)]
pub struct Driven {
    pub state: QuantumState,
    pub effective_rabi: f64,
    /// False when the effective Rabi frequency exceeds the spacing to the
    /// nearest other transition, i.e. the pulse would not be selective.
    pub resolved: bool,
}

fn conjugate_diag(rho_e: &mut Mat6, u: &[C64; 6]) {
    for i in 0..6 {
        for j in 0..6 {
            rho_e[(i, j)] *= u[i] * u[j].conj();
        }
    }
}

fn apply_envelope(reg: &Register, rho_e: &mut Mat6, duration: f64, d: &Dephasing) {
    if d.is_none() || duration == 0.0 {
        return;
    }
    let fn_ = d.nuclear_t2star.map_or(1.0, |t| (-duration / t).exp());
    let fe = d.electron_t2star.map_or(1.0, |t| (-duration / t).exp());
    for i in 0..6 {
        for j in 0..6 {
            let (li, lj) = (reg.label_of(i), reg.label_of(j));
            let mut f = 1.0;
            if li.nuclear != lj.nuclear {
                f *= fn_;
            }
            if li.ms != lj.ms {
                f *= fe;
            }
            rho_e[(i, j)] *= f;
        }
    }
}

/// `exp(−2πi h t)` for a 2×2 Hermitian `h = [[ha, conj(c)], [c, hb]]`.
fn expm_2x2(ha: f64, hb: f64, c: C64, t: f64) -> [[C64; 2]; 2] {
    let tau = 2.0 * PI * t;
    let m = 0.5 * (ha + hb);
    let d = 0.5 * (ha - hb);
    let w = (d * d + c.norm_sqr()).sqrt();
    let global = C64::from_polar(1.0, -tau * m);
    let (cw, sw) = ((w * tau).cos(), (w * tau).sin());
    let i = C64::new(0.0, 1.0);
    if w == 0.0 {
        return [[global, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), global]];
    }
    let s = sw / w;
    [
        [global * (cw - i * s * d), global * (-i * s * c.conj())],
        [global * (-i * s * c), global * (cw + i * s * d)],
    ]
}

impl Register {
    /// Selective rotation by `angle` within the two eigenstates of a
    /// transition: `|from⟩ → cos(θ/2)|from⟩ + e^{iφ} sin(θ/2)|to⟩`.
    /// Every other eigenstate is untouched.
    pub fn apply_ideal_pulse(
        &self,
        s: &QuantumState,
        label: TransitionLabel,
        angle: f64,
        phase: f64,
    ) -> QuantumState {
        // A resonant drive of Rabi frequency 1 Hz for angle/2π seconds.
        self.rotate(s, label, 1.0, phase, angle / (2.0 * PI), &LevelShifts::default())
    }

    fn rotate(
        &self,
        s: &QuantumState,
        label: TransitionLabel,
        rabi: f64,
        phase: f64,
        duration: f64,
        shifts: &LevelShifts,
    ) -> QuantumState {
        let (a, b) = self.transition(label).levels;
        // Generator (Hz) restricted to {a, b}: shifts on the diagonal and
        // (Ω/2)·i·(e^{iφ}|b⟩⟨a| − e^{−iφ}|a⟩⟨b|) off the diagonal.
        let c = C64::new(0.0, 0.5 * rabi) * C64::from_polar(1.0, phase);
        let block = expm_2x2(shifts.0[a], shifts.0[b], c, duration);
        let mut u = Mat6::zeros();
        for k in 0..6 {
            if k != a && k != b {
                u[(k, k)] = C64::from_polar(1.0, -2.0 * PI * shifts.0[k] * duration);
            }
        }
        u[(a, a)] = block[0][0];
        u[(a, b)] = block[0][1];
        u[(b, a)] = block[1][0];
        u[(b, b)] = block[1][1];
        let rho_e = s.to_eigenbasis(self);
        QuantumState::from_eigenbasis(self, &(u * rho_e * u.adjoint()))
    }

    /// Free evolution for `duration` seconds in the given frame, with
    /// optional dephasing envelopes.
    pub fn evolve_free(
        &self,
        s: &QuantumState,
        duration: f64,
        frame: Frame,
        dephasing: &Dephasing,
    ) -> Result<QuantumState, SpinError> {
        if !(duration >= 0.0) {
            return Err(SpinError::NegativeDuration(duration));
        }
        let mut rho_e = s.to_eigenbasis(self);
        let one = C64::new(1.0, 0.0);
        let mut u = [one; 6];
        match frame {
            Frame::Lab => {
                // Energies relative to their mean; the global phase drops out.
                let mean = self.eigen().values.mean();
                for (k, uk) in u.iter_mut().enumerate() {
                    let e = self.eigen().values[k] - mean;
                    *uk = C64::from_polar(1.0, -2.0 * PI * e * duration);
                }
            }
            Frame::Interaction => {}
            Frame::Rotating {
                transition,
                detuning,
            } => {
                let b = self.transition(transition).levels.1;
                let sign = self.signed_frequency(transition).signum();
                u[b] = C64::from_polar(1.0, 2.0 * PI * sign * detuning * duration);
            }
        }
        conjugate_diag(&mut rho_e, &u);
        apply_envelope(self, &mut rho_e, duration, dephasing);
        Ok(QuantumState::from_eigenbasis(self, &rho_e))
    }

    /// Free evolution in the interaction frame under static level offsets.
    pub fn evolve_free_shifted(
        &self,
        s: &QuantumState,
        duration: f64,
        shifts: &LevelShifts,
        dephasing: &Dephasing,
    ) -> Result<QuantumState, SpinError> {
        if !(duration >= 0.0) {
            return Err(SpinError::NegativeDuration(duration));
        }
        let mut rho_e = s.to_eigenbasis(self);
        if !shifts.is_zero() {
            let u: [C64; 6] =
                std::array::from_fn(|k| C64::from_polar(1.0, -2.0 * PI * shifts.0[k] * duration));
            conjugate_diag(&mut rho_e, &u);
        }
        apply_envelope(self, &mut rho_e, duration, dephasing);
        Ok(QuantumState::from_eigenbasis(self, &rho_e))
    }

    /// Rotating-wave drive of a transition at its resonance. `rabi` is the
    /// bare Rabi frequency (what the spin species would see without
    /// hyperfine mixing); the effective rate includes the dressed coupling.
    pub fn evolve_driven(
        &self,
        s: &QuantumState,
        label: TransitionLabel,
        rabi: f64,
        phase: f64,
        duration: f64,
    ) -> Result<Driven, SpinError> {
        if !(rabi >= 0.0) {
            return Err(SpinError::InvalidParams(format!(
                "Rabi frequency must be non-negative (got {rabi})"
            )));
        }
        let effective = rabi * self.coupling(label)?;
        let state = self.drive(s, label, effective, phase, duration, &LevelShifts::default())?;
        Ok(Driven {
            state,
            effective_rabi: effective,
            resolved: effective < self.neighbour_spacing(label),
        })
    }

    /// Rotating-wave drive at a given effective Rabi frequency, with static
    /// level offsets active during the pulse.
    pub fn drive(
        &self,
        s: &QuantumState,
        label: TransitionLabel,
        effective_rabi: f64,
        phase: f64,
        duration: f64,
        shifts: &LevelShifts,
    ) -> Result<QuantumState, SpinError> {
        if !(duration >= 0.0) {
            return Err(SpinError::NegativeDuration(duration));
        }
        Ok(self.rotate(s, label, effective_rabi, phase, duration, shifts))
    }
}
