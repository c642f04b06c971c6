use crate::dissipation::{apply_laser, LaserOptions, RateParams};
use crate::sequence::{Channel, PulseEvent};
use crate::spin::{Dephasing, Frame, LevelShifts, QuantumState, Register};

use super::ExperimentError;

/// Executes compiled pulse events on the register state.
///
/// Drive amplitudes are effective Rabi frequencies. Free evolution (waits
/// and gaps) uses `frame` and `dephasing`; `shifts` act throughout.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    pub reg: &'a Register,
    pub rates: RateParams,
    pub laser: LaserOptions,
    pub frame: Frame,
    pub dephasing: Dephasing,
    pub shifts: LevelShifts,
}

/// Trajectory of the previous run, reused when the next event list shares
/// a prefix with it.
#[derive(Debug, Clone, Default)]
pub struct PrefixCache {
    start: Option<QuantumState>,
    steps: Vec<(Step, QuantumState)>,
}

#[derive(Debug, Clone, PartialEq)]
struct Step {
    gap: f64,
    channel: Channel,
    duration: f64,
    amplitude: f64,
    phase: f64,
    power: f64,
}

fn steps(events: &[PulseEvent]) -> Vec<Step> {
    let mut cursor = 0.0f64;
    events
        .iter()
        .map(|e| {
            let gap = (e.start - cursor).max(0.0);
            cursor = cursor.max(e.end());
            Step {
                gap,
                channel: e.channel,
                duration: e.duration,
                amplitude: e.amplitude,
                phase: e.phase,
                power: e.laser_power,
            }
        })
        .collect()
}

impl<'a> Engine<'a> {
    pub fn new(reg: &'a Register, rates: RateParams) -> Self {
        Engine {
            reg,
            rates,
            laser: LaserOptions::default(),
            frame: Frame::Interaction,
            dephasing: Dephasing::NONE,
            shifts: LevelShifts::default(),
        }
    }

    fn free(&self, s: &QuantumState, dt: f64) -> Result<QuantumState, ExperimentError> {
        if dt == 0.0 {
            return Ok(s.clone());
        }
        let s = self.reg.evolve_free(s, dt, self.frame, &self.dephasing)?;
        Ok(self
            .reg
            .evolve_free_shifted(&s, dt, &self.shifts, &Dephasing::NONE)?)
    }

    fn step(&self, s: &QuantumState, st: &Step) -> Result<QuantumState, ExperimentError> {
        let s = self.free(s, st.gap)?;
        Ok(match st.channel {
            Channel::Delay => self.free(&s, st.duration)?,
            Channel::Laser => {
                let rates = RateParams::new(
                    self.rates.alpha * st.power,
                    self.rates.beta * st.power,
                    self.rates.gamma * st.power,
                )?;
                apply_laser(self.reg, &s, &rates, st.duration, &self.laser)?
            }
            ch => {
                let label = ch.transition().expect("drive channel");
                self.reg
                    .drive(&s, label, st.amplitude, st.phase, st.duration, &self.shifts)?
            }
        })
    }

    pub fn run(&self, s: &QuantumState, events: &[PulseEvent]) -> Result<QuantumState, ExperimentError> {
        let mut s = s.clone();
        for st in steps(events) {
            s = self.step(&s, &st)?;
        }
        Ok(s)
    }

    /// Like [`run`](Self::run), restarting from the longest prefix shared
    /// with the cached trajectory. The cache is only valid for one engine
    /// configuration.
    pub fn run_cached(
        &self,
        s: &QuantumState,
        events: &[PulseEvent],
        cache: &mut PrefixCache,
    ) -> Result<QuantumState, ExperimentError> {
        let new = steps(events);
        if cache.start.as_ref() != Some(s) {
            cache.start = Some(s.clone());
            cache.steps.clear();
        }
        let shared = cache
            .steps
            .iter()
            .zip(&new)
            .take_while(|((a, _), b)| a == *b)
            .count();
        cache.steps.truncate(shared);
        let mut cur = cache.steps.last().map_or_else(|| s.clone(), |(_, st)| st.clone());
        for st in new.into_iter().skip(shared) {
            cur = self.step(&cur, &st)?;
            cache.steps.push((st, cur.clone()));
        }
        Ok(cur)
    }

    /// Bright-state signal: the `mS=0` population when the trailing
    /// readout laser starts (or at the end when there is none).
    pub fn measure(
        &self,
        s: &QuantumState,
        events: &[PulseEvent],
        cache: Option<&mut PrefixCache>,
    ) -> Result<f64, ExperimentError> {
        let body = match events.last() {
            Some(e) if e.channel == Channel::Laser => &events[..events.len() - 1],
            _ => events,
        };
        let out = match cache {
            Some(c) => self.run_cached(s, body, c)?,
            None => self.run(s, body)?,
        };
        Ok(out.bright_population(self.reg))
    }
}
