use crate::sequence::{expand_repeats, parse_sequence, resolve, Bindings, Channel};
use crate::spin::{Nuclear, ProductLabel, QuantumState, Register};

use super::{check_grid, corpus, load, ExperimentError, Setup, SweepResult};

const TOMOGRAPHY_TOTAL: &str = "sweep ti from 0us to 0us steps 1\nsweep tl from 0us to 0us steps 1\n\
                                laser ti; mw1 pi; rf1 pi; laser tl; laser 300ns";
const TOMOGRAPHY_UP: &str = "sweep ti from 0us to 0us steps 1\nsweep tl from 0us to 0us steps 1\n\
                             laser ti; mw1 pi; rf1 pi; laser tl; mw1 pi; laser 300ns";

/// Populations in the pumping-model ordering `(|0,↑⟩, |0,↓⟩, |1,↑⟩, |1,↓⟩)`.
fn four_populations(reg: &Register, s: &QuantumState) -> [f64; 4] {
    use Nuclear::*;
    let p = |ms, n| s.population(reg, ProductLabel::new(ms, n));
    [p(0, Up), p(0, Down), p(1, Up), p(1, Down)]
}

/// Partial population tomography after a laser pulse of each duration,
/// starting from the swapped state (electron depolarized, nucleus ↑).
/// Returns the total `mS=0` population and the `|0,↑⟩` population (read
/// out after an MW1 π pulse).
pub fn run_init_tomography(
    setup: &Setup,
    durations: &[f64],
) -> Result<(SweepResult, SweepResult), ExperimentError> {
    check_grid(durations, "laser duration")?;
    let reg = setup.register()?;
    let engine = setup.engine(&reg);
    let opts = setup.resolve_options();
    let start = QuantumState::maximally_mixed();
    let mut curves = Vec::new();
    for (name, src) in [("init_total", TOMOGRAPHY_TOTAL), ("init_up", TOMOGRAPHY_UP)] {
        let ir = parse_sequence(src)?;
        let mut cache = super::PrefixCache::default();
        let mut y = Vec::with_capacity(durations.len());
        for &t in durations {
            let b: Bindings = [("ti".to_string(), setup.init_laser), ("tl".to_string(), t)].into();
            let ev = resolve(&ir, &b, &opts)?;
            y.push(engine.measure(&start, &ev, Some(&mut cache))?);
        }
        let mut r = SweepResult::new(name, setup, durations.to_vec(), y);
        if name == "init_up" {
            if let Some((i, &peak)) = r.y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
                r.metadata.summary.insert("peak_population".into(), peak);
                r.metadata.summary.insert("peak_time_s".into(), r.x[i]);
            }
        }
        curves.push(r);
    }
    let up = curves.pop().unwrap();
    let total = curves.pop().unwrap();
    Ok((total, up))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurificationPoint {
    pub cycles: u32,
    pub populations: [f64; 4],
}

impl PurificationPoint {
    pub fn p0_up(&self) -> f64 {
        self.populations[0]
    }

    /// `2·(P_{0,↑} + P_{1,↑}) − 1`.
    pub fn polarization(&self) -> f64 {
        2.0 * (self.populations[0] + self.populations[2]) - 1.0
    }
}

fn purification_state(
    setup: &Setup,
    reg: &Register,
    cycles: u32,
    laser: f64,
) -> Result<QuantumState, ExperimentError> {
    let ir = expand_repeats(&load(corpus::PURIFICATION)?, &[cycles]);
    let b: Bindings = [("tl".to_string(), laser)].into();
    let mut ev = resolve(&ir, &b, &setup.resolve_options())?;
    // Drop the readout block (MW2 π and the readout laser).
    match ev.as_slice() {
        [.., a, b] if a.channel == Channel::Mw2 && b.channel == Channel::Laser => {
            ev.truncate(ev.len() - 2);
        }
        _ => return Err(ExperimentError::Invalid("unexpected purification readout".into())),
    }
    if let Some(first) = ev.first_mut() {
        first.duration = setup.init_laser;
    }
    setup.engine(reg).run(&QuantumState::maximally_mixed(), &ev)
}

/// State after the initial laser and `cycles` purification cycles with the
/// configured cycle laser duration.
pub fn initialized_state(setup: &Setup, reg: &Register) -> Result<QuantumState, ExperimentError> {
    purification_state(setup, reg, setup.cycles, setup.cycle_laser)
}

/// `|0,↑⟩` population after 0…`cycles` purification cycles.
pub fn run_repeated_init(
    setup: &Setup,
    cycles: u32,
    laser: f64,
) -> Result<(SweepResult, Vec<PurificationPoint>), ExperimentError> {
    if !(laser >= 0.0) {
        return Err(ExperimentError::Invalid("laser duration must be non-negative".into()));
    }
    let reg = setup.register()?;
    let mut points = Vec::new();
    for n in 0..=cycles {
        let s = purification_state(setup, &reg, n, laser)?;
        points.push(PurificationPoint {
            cycles: n,
            populations: four_populations(&reg, &s),
        });
    }
    let x = points.iter().map(|p| p.cycles as f64).collect();
    let y = points.iter().map(|p| p.p0_up()).collect();
    let mut r = SweepResult::new("purification", setup, x, y);
    let last = points.last().unwrap();
    r.metadata.summary.insert("laser_s".into(), laser);
    r.metadata.summary.insert("p0_up".into(), last.p0_up());
    r.metadata.summary.insert("polarization".into(), last.polarization());
    Ok((r, points))
}

/// Laser duration on `grid` maximizing the `|0,↑⟩` population after
/// `cycles` cycles. Returns `(duration, population)`.
pub fn optimal_cycle_laser(setup: &Setup, cycles: u32, grid: &[f64]) -> Result<(f64, f64), ExperimentError> {
    check_grid(grid, "laser duration")?;
    let reg = setup.register()?;
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for &t in grid {
        let s = purification_state(setup, &reg, cycles, t)?;
        let p = four_populations(&reg, &s)[0];
        if p > best.1 {
            best = (t, p);
        }
    }
    if best.0.is_nan() {
        return Err(ExperimentError::Invalid("empty laser grid".into()));
    }
    Ok(best)
}

