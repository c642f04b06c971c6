use crate::fitkit::{fit_cosine, fit_exponential, FitOptions};
use crate::sequence::{resolve, Bindings};
use crate::spin::{Dephasing, Frame, QuantumState, TransitionLabel};

use super::{check_grid, corpus, load, ExperimentError, PrefixCache, Setup, SweepResult};

/// Nuclear Rabi oscillation on RF1. `amplitude` is the bare drive (Hz); the
/// effective Rabi frequency includes the hyperfine enhancement.
pub fn run_rabi(setup: &Setup, amplitude: f64, durations: &[f64]) -> Result<SweepResult, ExperimentError> {
    if !(amplitude >= 0.0) {
        return Err(ExperimentError::Invalid("drive amplitude must be non-negative".into()));
    }
    check_grid(durations, "duration")?;
    let reg = setup.register()?;
    let enhancement = reg.coupling(TransitionLabel::Rf1)?;
    let effective = amplitude * enhancement;
    let ir = load(corpus::RABI)?;
    let mut opts = setup.resolve_options();
    opts.rf_rabi = effective;
    let engine = setup.engine(&reg);
    let start = QuantumState::maximally_mixed();
    let mut cache = PrefixCache::default();
    let mut y = Vec::with_capacity(durations.len());
    for &t in durations {
        let b: Bindings = [("t".to_string(), t)].into();
        let ev = resolve(&ir, &b, &opts)?;
        y.push(engine.measure(&start, &ev, Some(&mut cache))?);
    }
    let mut out = SweepResult::new("rabi", setup, durations.to_vec(), y);
    out.metadata.summary.insert("bare_amplitude_hz".into(), amplitude);
    out.metadata.summary.insert("enhancement".into(), enhancement);
    out.metadata.summary.insert("effective_rabi_hz".into(), effective);
    if effective > 0.0 && durations.len() >= 8 {
        let fit = fit_cosine(&out.x, &out.y, None, &FitOptions::default())?;
        if let Some(f) = fit.get("frequency") {
            out.metadata.summary.insert("rabi_frequency_hz".into(), f);
            out.metadata.summary.insert("pi_time_s".into(), 0.5 / f);
        }
        out.metadata.fits.push(fit);
    }
    Ok(out)
}

/// Nuclear Ramsey (free induction decay) in the `mS=1` manifold with the
/// RF reference detuned by `detuning` Hz.
pub fn run_fid(setup: &Setup, detuning: f64, delays: &[f64]) -> Result<SweepResult, ExperimentError> {
    check_grid(delays, "delay")?;
    let reg = setup.register()?;
    let ir = load(corpus::FID)?;
    let opts = setup.resolve_options();
    let mut engine = setup.engine(&reg);
    engine.frame = Frame::Rotating {
        transition: TransitionLabel::Rf1,
        detuning,
    };
    engine.dephasing = Dephasing::nuclear(setup.register.t2star_n);
    let start = QuantumState::maximally_mixed();
    let mut cache = PrefixCache::default();
    let mut y = Vec::with_capacity(delays.len());
    for &t in delays {
        let b: Bindings = [("t".to_string(), t)].into();
        let ev = resolve(&ir, &b, &opts)?;
        y.push(engine.measure(&start, &ev, Some(&mut cache))?);
    }
    let mut out = SweepResult::new("fid", setup, delays.to_vec(), y);
    out.metadata.summary.insert("detuning_hz".into(), detuning);
    if delays.len() >= 8 {
        if detuning == 0.0 {
            let fit = fit_exponential(&out.x, &out.y, None, &FitOptions::default())?;
            if let Some(t) = fit.get("time_constant") {
                out.metadata.summary.insert("envelope_time_s".into(), t);
            }
            out.metadata.fits.push(fit);
        } else {
            let fit = fit_cosine(&out.x, &out.y, None, &FitOptions::default())?;
            if let Some(f) = fit.get("frequency") {
                out.metadata.summary.insert("fringe_frequency_hz".into(), f);
            }
            out.metadata.fits.push(fit);
        }
    }
    Ok(out)
}
