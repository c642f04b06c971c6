use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::sequence::{resolve, Bindings, Channel, PulseEvent};
use crate::spin::{Dephasing, Frame, LevelShifts, Nuclear, ProductLabel, QuantumState, TransitionLabel};

use super::fidelity::{extract_fidelity, fidelity_window, FidelityReport, StateFidelity};
use super::init::initialized_state;
use super::{check_grid, corpus, load, ExperimentError, PrefixCache, Setup, SweepResult};

/// Loss channels enabled in the transfer simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBudget {
    /// Start from the purified state (initial laser plus purification
    /// cycles) instead of a pure `|0,↑⟩`.
    pub purified_init: bool,
    /// Average over quasi-static electron detuning with the register's
    /// electron `T2*` during the write sequence.
    pub electron_dephasing: bool,
    /// Gauss–Hermite nodes for the electron detuning average.
    pub quadrature_nodes: usize,
}

impl LossBudget {
    /// Purification impurity plus electron `T2*` dephasing over the
    /// read-write window.
    pub fn preset() -> Self {
        LossBudget {
            purified_init: true,
            electron_dephasing: true,
            quadrature_nodes: 16,
        }
    }

    /// Lossless pipeline used as the fidelity reference.
    pub fn none() -> Self {
        LossBudget {
            purified_init: false,
            electron_dephasing: false,
            quadrature_nodes: 1,
        }
    }
}

impl Default for LossBudget {
    fn default() -> Self {
        Self::preset()
    }
}

/// Nodes and weights for `E[f(X)]`, `X ~ N(0, 1)` (Golub–Welsch).
pub(crate) fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    if n <= 1 {
        return vec![(0.0, 1.0)];
    }
    let j = DMatrix::from_fn(n, n, |r, c| {
        if r + 1 == c || c + 1 == r {
            (r.max(c) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = j.symmetric_eigen();
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Write, storage and read events of the transfer sequence, starting at
/// the first MW2 pulse and shifted to begin at zero.
fn transfer_events(setup: &Setup, phi: f64, delay: f64) -> Result<Vec<PulseEvent>, ExperimentError> {
    let ir = load(corpus::TRANSFER)?;
    let b: Bindings = [("phi".to_string(), phi), ("t".to_string(), delay)].into();
    let ev = resolve(&ir, &b, &setup.resolve_options())?;
    let first = ev
        .iter()
        .position(|e| e.channel == Channel::Mw2)
        .ok_or_else(|| ExperimentError::Invalid("transfer sequence has no MW2 pulse".into()))?;
    let t0 = ev[first].start;
    Ok(ev[first..]
        .iter()
        .map(|e| PulseEvent {
            start: e.start - t0,
            ..e.clone()
        })
        .collect())
}

/// Transfer of the electron superposition set by `phi` into the nucleus,
/// storage for each delay with the RF reference detuned by `detuning`,
/// and readout.
pub fn run_transfer_storage(
    setup: &Setup,
    budget: &LossBudget,
    phi: f64,
    delays: &[f64],
    detuning: f64,
) -> Result<SweepResult, ExperimentError> {
    if !(0.0..2.0 * PI).contains(&phi) {
        return Err(ExperimentError::Invalid(format!("phase {phi} outside [0, 2π)")));
    }
    check_grid(delays, "delay")?;
    let reg = setup.register()?;
    let start = if budget.purified_init {
        initialized_state(setup, &reg)?
    } else {
        QuantumState::eigenstate(&reg, ProductLabel::new(0, Nuclear::Up))
    };
    let mut engine = setup.engine(&reg);
    engine.frame = Frame::Rotating {
        transition: TransitionLabel::Rf1,
        detuning,
    };
    engine.dephasing = Dephasing::nuclear(setup.register.t2star_n);
    let nodes = if budget.electron_dephasing {
        let sigma = 1.0 / (2f64.sqrt() * PI * setup.register.t2star_e);
        gauss_hermite(budget.quadrature_nodes)
            .into_iter()
            .map(|(x, w)| (sigma * x, w))
            .collect()
    } else {
        vec![(0.0, 1.0)]
    };
    let mut caches = vec![PrefixCache::default(); nodes.len()];
    let mut y = Vec::with_capacity(delays.len());
    for &t in delays {
        let ev = transfer_events(setup, phi, t)?;
        let mut acc = 0.0;
        for ((de, w), cache) in nodes.iter().zip(caches.iter_mut()) {
            engine.shifts = LevelShifts::static_noise(&reg, *de, 0.0);
            acc += w * engine.measure(&start, &ev, Some(cache))?;
        }
        y.push(acc);
    }
    let mut out = SweepResult::new("transfer", setup, delays.to_vec(), y);
    out.metadata.summary.insert("phi_rad".into(), phi);
    out.metadata.summary.insert("detuning_hz".into(), detuning);
    Ok(out)
}

/// Storage-time grid covering one fringe period around `centre`.
fn window_grid(centre: f64, detuning: f64, points: usize) -> (Vec<f64>, (f64, f64)) {
    let w = fidelity_window(centre, detuning);
    let n = points.max(8);
    let x = (0..n)
        .map(|i| w.0 + (w.1 - w.0) * i as f64 / (n - 1) as f64)
        .collect();
    (x, w)
}

pub const STATES: [(&str, f64); 4] = [("+X", 0.0), ("-X", PI), ("+Y", PI / 2.0), ("-Y", 3.0 * PI / 2.0)];

/// Fidelity of the four equatorial states: `Δ` from a one-period fringe
/// fit around `centre`, normalized by the lossless pipeline.
pub fn transfer_fidelity(
    setup: &Setup,
    budget: &LossBudget,
    detuning: f64,
    centre: f64,
) -> Result<FidelityReport, ExperimentError> {
    if !(detuning > 0.0) {
        return Err(ExperimentError::Invalid("fringe detuning must be positive".into()));
    }
    let (grid, window) = window_grid(centre, detuning, 41);
    let padded = (window.0.max(0.0), window.1);
    let reference = run_transfer_storage(setup, &LossBudget::none(), 0.0, &grid, detuning)?;
    let reference_delta = extract_fidelity(&reference, padded)?.delta;
    if !(reference_delta > 0.0) {
        return Err(ExperimentError::Invalid("reference fringe has no contrast".into()));
    }
    let mut states = Vec::new();
    for (label, phi) in STATES {
        let s = run_transfer_storage(setup, budget, phi, &grid, detuning)?;
        let fr = extract_fidelity(&s, padded)?;
        let delta = (fr.delta / reference_delta).min(1.0);
        states.push(StateFidelity {
            label: label.to_string(),
            phi,
            delta,
            fidelity: (1.0 + delta) / 2.0,
            phase: fr.phase,
        });
    }
    let mean_fidelity = states.iter().map(|s| s.fidelity).sum::<f64>() / states.len() as f64;
    Ok(FidelityReport {
        states,
        mean_fidelity,
        reference_delta,
    })
}
