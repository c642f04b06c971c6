use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissipation::{sample_flips_with, ElectronHistory, FlipModel};
use crate::fitkit::{fit_exponential, FitOptions, FitResult};
use crate::spin::TransitionLabel;

use super::{check_grid, ExperimentError, Setup, SweepResult};

/// Trajectory-ensemble settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageOptions {
    pub ensemble: usize,
    pub seed: u64,
    /// Quasi-static Lorentzian nuclear detuning with HWHM `1/(2π·T2*n)`.
    pub nuclear_noise: bool,
    /// Electron `T1` telegraph flips.
    pub flips: bool,
}

impl Default for StorageOptions {
    fn default() -> Self {
        StorageOptions {
            ensemble: 1000,
            seed: 1,
            nuclear_noise: true,
            flips: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageFit {
    pub time_constant: f64,
    pub std_error: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Refocus {
    /// RF1 π: inverts the nuclear coherence only in `mS=1`.
    Rf1Pi,
    /// MW1·MW2·RF1·MW2·MW1: inverts the coherence only in `mS=0`.
    Composite,
}

/// Phase bookkeeping of the nuclear coherence on the two-level telegraph
/// model, in the RF1 frame. Returns the accumulated phase and whether the
/// electron is in `mS=1` at `end`.
fn coherence_phase(
    pulses: &[(f64, Refocus)],
    history: &ElectronHistory,
    end: f64,
    delta_n: f64,
    delta_0: f64,
) -> (f64, bool) {
    let mut marks: Vec<(f64, Option<Refocus>)> = pulses
        .iter()
        .filter(|p| p.0 < end)
        .map(|&(t, k)| (t, Some(k)))
        .chain(history.switches.iter().filter(|&&s| s < end).map(|&s| (s, None)))
        .collect();
    marks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut phase = 0.0;
    let mut t = 0.0;
    for (m, kind) in marks.into_iter().chain(std::iter::once((end, None))) {
        let ms1 = history.in_ms1(0.5 * (t + m));
        let f = delta_n + if ms1 { 0.0 } else { delta_0 };
        phase += 2.0 * PI * f * (m - t);
        t = m;
        match kind {
            Some(Refocus::Rf1Pi) if history.in_ms1(m) => phase = -phase,
            Some(Refocus::Composite) if !history.in_ms1(m) => phase = -phase,
            _ => {}
        }
    }
    (phase, history.in_ms1(end))
}

/// Coherence-frequency offset of the `mS=0` manifold in the RF1 frame (Hz).
fn manifold_offset(setup: &Setup) -> Result<f64, ExperimentError> {
    let reg = setup.register()?;
    Ok(reg.signed_frequency(TransitionLabel::Rf2) - reg.signed_frequency(TransitionLabel::Rf1))
}

fn cpmg_pulses(n: u32, total: f64) -> Vec<(f64, Refocus)> {
    (1..=n)
        .map(|j| ((2 * j - 1) as f64 * total / (2 * n) as f64, Refocus::Rf1Pi))
        .collect()
}

fn periodic_cpmg_pulses(tau: f64, total: f64) -> Vec<(f64, Refocus)> {
    (0..)
        .map(|j| (tau * (2 * j + 1) as f64, Refocus::Rf1Pi))
        .take_while(|p| p.0 < total)
        .collect()
}

fn extended_dd_pulses(tau: f64, cycles: u32) -> Vec<(f64, Refocus)> {
    (0..cycles)
        .flat_map(|c| {
            let o = 4.0 * tau * c as f64;
            [
                (o + tau, Refocus::Rf1Pi),
                (o + 2.0 * tau, Refocus::Composite),
                (o + 3.0 * tau, Refocus::Rf1Pi),
            ]
        })
        .collect()
}

fn validate(opts: &StorageOptions) -> Result<(), ExperimentError> {
    if opts.ensemble < 2 {
        return Err(ExperimentError::Invalid("ensemble needs at least two trajectories".into()));
    }
    Ok(())
}

/// Ensemble-averaged echo signal `(1 + ⟨cos φ·[mS=1]·e^{−T/T2C}⟩)/2` at
/// each total time, with `schedule(T)` giving the refocusing pulses.
fn ensemble<F>(
    name: &str,
    setup: &Setup,
    times: &[f64],
    opts: &StorageOptions,
    schedule: F,
) -> Result<(SweepResult, StorageFit), ExperimentError>
where
    F: Fn(f64) -> Vec<(f64, Refocus)> + Sync,
{
    validate(opts)?;
    check_grid(times, "storage time")?;
    let p = setup.register;
    let delta_0 = manifold_offset(setup)?;
    let horizon = times.last().copied().unwrap_or(0.0);
    let schedules: Vec<_> = times.iter().map(|&t| schedule(t)).collect();
    let hwhm = 1.0 / (2.0 * PI * p.t2star_n);
    let cauchy = Cauchy::new(0.0, hwhm).map_err(|e| ExperimentError::Invalid(e.to_string()))?;
    let amps: Vec<Vec<f64>> = (0..opts.ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i);
            let dn = if opts.nuclear_noise { cauchy.sample(&mut rng) } else { 0.0 };
            let events = if opts.flips {
                sample_flips_with(&mut rng, p.t1_e, horizon)
            } else {
                Vec::new()
            };
            let hist = ElectronHistory::from_events(events, setup.flip_model);
            times
                .iter()
                .zip(&schedules)
                .map(|(&t, pulses)| {
                    let (phi, ms1) = coherence_phase(pulses, &hist, t, dn, delta_0);
                    if ms1 {
                        phi.cos() * (-t / p.t2_pure_c).exp()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let n = amps.len() as f64;
    let mut y = Vec::with_capacity(times.len());
    let mut err = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let mean = amps.iter().map(|a| a[k]).sum::<f64>() / n;
        let var = amps.iter().map(|a| (a[k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        y.push((1.0 + mean) / 2.0);
        err.push((var / n).sqrt() / 2.0);
    }
    let mut out = SweepResult::new(name, setup, times.to_vec(), y);
    out.y_err = Some(err);
    out.metadata.seed = Some(opts.seed);
    out.metadata.summary.insert("ensemble".into(), opts.ensemble as f64);
    let fit = fit_exponential(&out.x, &out.y, Some(0.5), &FitOptions::default())?;
    let time_constant = fit.get("time_constant").unwrap_or(f64::NAN);
    let std_error = fit.std_error("time_constant").unwrap_or(f64::INFINITY);
    out.metadata.summary.insert("time_constant_s".into(), time_constant);
    out.metadata.summary.insert("time_constant_err_s".into(), std_error);
    out.metadata.fits.push(fit.clone());
    Ok((
        out,
        StorageFit {
            time_constant,
            std_error,
            fit,
        },
    ))
}

/// CPMG echo with `n_pulses` equally spaced RF1 π pulses over each total
/// storage time.
pub fn run_cpmg_storage(
    setup: &Setup,
    n_pulses: u32,
    times: &[f64],
    opts: &StorageOptions,
) -> Result<(SweepResult, StorageFit), ExperimentError> {
    if n_pulses == 0 {
        return Err(ExperimentError::Invalid("CPMG needs at least one pulse".into()));
    }
    let (mut r, f) = ensemble(&format!("cpmg{n_pulses}"), setup, times, opts, |t| cpmg_pulses(n_pulses, t))?;
    r.metadata.summary.insert("n_pulses".into(), n_pulses as f64);
    Ok((r, f))
}

fn cycle_times(tau: f64, n_cycles: u32) -> Result<Vec<f64>, ExperimentError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(ExperimentError::Invalid(format!("tau must be positive, got {tau}")));
    }
    Ok((0..=n_cycles).map(|k| 4.0 * tau * k as f64).collect())
}

/// Plain CPMG with RF1 π pulses every `2τ`, sampled at multiples of `4τ`.
pub fn run_periodic_cpmg(
    setup: &Setup,
    tau: f64,
    n_cycles: u32,
    opts: &StorageOptions,
) -> Result<(SweepResult, StorageFit), ExperimentError> {
    let times = cycle_times(tau, n_cycles)?;
    let (mut r, f) = ensemble("periodic_cpmg", setup, &times, opts, |t| periodic_cpmg_pulses(tau, t))?;
    r.metadata.summary.insert("tau_s".into(), tau);
    Ok((r, f))
}

/// Extended decoupling: RF1 π at `τ` and `3τ`, the `mS=0` composite
/// inversion at `2τ`, period `4τ`.
pub fn run_extended_dd(
    setup: &Setup,
    tau: f64,
    n_cycles: u32,
    opts: &StorageOptions,
) -> Result<(SweepResult, StorageFit), ExperimentError> {
    let times = cycle_times(tau, n_cycles)?;
    let (mut r, f) = ensemble("extended_dd", setup, &times, opts, |t| {
        extended_dd_pulses(tau, (t / (4.0 * tau)).round() as u32)
    })?;
    r.metadata.summary.insert("tau_s".into(), tau);
    Ok((r, f))
}

/// Largest residual phase (rad) at the multiples of `4τ` for a trajectory
/// without electron flips and nuclear detuning `delta_n`.
pub fn no_flip_residual(setup: &Setup, tau: f64, n_cycles: u32, delta_n: f64) -> Result<f64, ExperimentError> {
    let times = cycle_times(tau, n_cycles)?;
    let delta_0 = manifold_offset(setup)?;
    let hist = ElectronHistory::from_events(Vec::new(), FlipModel::Symmetric);
    let pulses = extended_dd_pulses(tau, n_cycles);
    Ok(times
        .iter()
        .map(|&t| coherence_phase(&pulses, &hist, t, delta_n, delta_0).0.abs())
        .fold(0.0, f64::max))
}

/// Residual phase at `4τ` after a single `mS=1 → 0` flip at a uniformly
/// random time in the first cycle, for `samples` seeded draws.
pub fn single_flip_phase_errors(
    setup: &Setup,
    tau: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>, ExperimentError> {
    cycle_times(tau, 1)?;
    let delta_0 = manifold_offset(setup)?;
    let pulses = extended_dd_pulses(tau, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..samples)
        .map(|_| {
            let tf = rng.gen_range(0.0..4.0 * tau);
            let hist = ElectronHistory::from_events(vec![tf], FlipModel::OneSided);
            coherence_phase(&pulses, &hist, 4.0 * tau, 0.0, delta_0).0
        })
        .collect())
}

/// Bound on [`single_flip_phase_errors`]: `2π·|Δ|·2τ` with `Δ` the
/// difference of the signed RF2 and RF1 frequencies.
pub fn single_flip_bound(setup: &Setup, tau: f64) -> Result<f64, ExperimentError> {
    Ok(2.0 * PI * manifold_offset(setup)?.abs() * 2.0 * tau)
}
