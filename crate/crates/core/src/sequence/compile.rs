use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::diag::{ErrorKind, SequenceError, Span};
use super::ir::*;

pub const MAX_EVENTS: u64 = 1_000_000;
const OVERLAP_EPS: f64 = 1e-15;

/// Sweep variable values in SI units (seconds or radians).
pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolveOptions {
    /// Rabi frequency for MW pulses without `rabi=` (Hz).
    pub mw_rabi: f64,
    /// Rabi frequency for RF pulses without `rabi=` (Hz).
    pub rf_rabi: f64,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            mw_rabi: 10e6,
            rf_rabi: 4.3e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub channel: Channel,
    pub start: f64,
    pub duration: f64,
    /// Rabi frequency (Hz); zero for laser and delay.
    pub amplitude: f64,
    pub phase: f64,
    pub laser_power: f64,
    #[serde(skip)]
    pub span: Span,
}

impl PulseEvent {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn centre(&self) -> f64 {
        self.start + 0.5 * self.duration
    }

    /// Rotation angle (rad) for drive events.
    pub fn angle(&self) -> f64 {
        2.0 * PI * self.amplitude * self.duration
    }
}

/// Flatten repeat blocks. `counts[k]` overrides the count of the k-th block
/// in source order; blocks past the end of `counts` keep their written
/// count.
pub fn expand_repeats(ir: &SequenceIR, counts: &[u32]) -> SequenceIR {
    fn walk(nodes: &[Node], counts: &[u32], next: &mut usize, out: &mut Vec<Node>) {
        for n in nodes {
            match n {
                Node::Pulse(p) => out.push(Node::Pulse(p.clone())),
                Node::Repeat { count, body, .. } => {
                    let id = *next;
                    *next += 1;
                    let c = counts.get(id).copied().unwrap_or(*count);
                    let mut once = Vec::new();
                    let mut inner = *next;
                    walk(body, counts, &mut inner, &mut once);
                    *next = inner;
                    for _ in 0..c {
                        out.extend(once.iter().cloned());
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(&ir.nodes, counts, &mut 0, &mut out);
    SequenceIR {
        nodes: out,
        sweeps: ir.sweeps.clone(),
    }
}

/// Compile to a start-sorted event list with concrete timing.
pub fn resolve(
    ir: &SequenceIR,
    bindings: &Bindings,
    opts: &ResolveOptions,
) -> Result<Vec<PulseEvent>, SequenceError> {
    if ir.expanded_len() > MAX_EVENTS {
        return Err(SequenceError::new(Span::default(), ErrorKind::TooLarge(MAX_EVENTS)));
    }
    let flat = expand_repeats(ir, &[]);
    let mut events = Vec::with_capacity(flat.nodes.len());
    let mut cursor = 0.0f64;
    for node in &flat.nodes {
        let Node::Pulse(p) = node else { unreachable!() };
        let ev = event(p, bindings, opts, cursor)?;
        cursor = cursor.max(ev.end());
        events.push(ev);
    }
    events.sort_by(|a, b| a.start.total_cmp(&b.start));
    if let Some(e) = conflicts(&events).into_iter().next() {
        return Err(e);
    }
    Ok(events)
}

fn lookup(bindings: &Bindings, name: &str, span: Span) -> Result<f64, SequenceError> {
    bindings
        .get(name)
        .copied()
        .ok_or_else(|| SequenceError::new(span, ErrorKind::Unresolved(name.to_string())))
}

fn event(
    p: &Pulse,
    bindings: &Bindings,
    opts: &ResolveOptions,
    cursor: f64,
) -> Result<PulseEvent, SequenceError> {
    let default_rabi = if p.channel.is_microwave() {
        opts.mw_rabi
    } else if p.channel.is_rf() {
        opts.rf_rabi
    } else {
        0.0
    };
    let amplitude = p.rabi.map(Freq::hertz).unwrap_or(default_rabi);
    let (duration, axis_phase) = match &p.angle {
        Angle::Pi { .. } => {
            let theta = p.angle.radians().unwrap();
            if theta == 0.0 {
                (0.0, 0.0)
            } else if !(amplitude > 0.0) {
                return Err(SequenceError::new(
                    p.span,
                    ErrorKind::Duration("a rotation angle needs a positive Rabi frequency".into()),
                ));
            } else {
                (theta / (2.0 * PI * amplitude), 0.0)
            }
        }
        Angle::Rotation { axis, arg } => (dur(arg, bindings, p.span)?, axis.phase()),
        Angle::Duration(arg) => (dur(arg, bindings, p.span)?, 0.0),
    };
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(SequenceError::new(
            p.span,
            ErrorKind::Duration(format!("resolved duration {duration:e} s is invalid")),
        ));
    }
    let phase = axis_phase
        + match &p.phase {
            None => 0.0,
            Some(PhaseArg::Lit(l)) => l.radians(),
            Some(PhaseArg::Var(v)) => lookup(bindings, v, p.span)?,
        };
    let start = p.at.map(Time::seconds).unwrap_or(cursor);
    if !(start >= 0.0) {
        return Err(SequenceError::new(
            p.span,
            ErrorKind::Duration("start time must not be negative".into()),
        ));
    }
    Ok(PulseEvent {
        channel: p.channel,
        start,
        duration,
        amplitude: if p.channel.is_drive() { amplitude } else { 0.0 },
        phase,
        laser_power: if p.channel == Channel::Laser {
            p.power.unwrap_or(1.0)
        } else {
            0.0
        },
        span: p.span,
    })
}

fn dur(arg: &DurArg, bindings: &Bindings, span: Span) -> Result<f64, SequenceError> {
    let d = match arg {
        DurArg::Lit(t) => t.seconds(),
        DurArg::Var(v) => lookup(bindings, v, span)?,
    };
    if d < 0.0 {
        return Err(SequenceError::new(
            span,
            ErrorKind::Duration(format!("negative duration {d:e} s")),
        ));
    }
    Ok(d)
}

/// Channel conflicts in a start-sorted event list: two MW/RF pulses that
/// overlap, or a laser pulse overlapping a MW/RF pulse.
pub(crate) fn conflicts(events: &[PulseEvent]) -> Vec<SequenceError> {
    let mut out = Vec::new();
    let mut drive: Option<&PulseEvent> = None;
    let mut laser: Option<&PulseEvent> = None;
    for e in events {
        if e.duration <= 0.0 {
            continue;
        }
        if e.channel.is_drive() {
            if let Some(d) = drive.filter(|d| d.end() > e.start + OVERLAP_EPS) {
                out.push(SequenceError::new(
                    e.span,
                    ErrorKind::Overlap(format!(
                        "{} pulse overlaps {} pulse from line {}",
                        e.channel, d.channel, d.span.line
                    )),
                ));
            }
            if laser.is_some_and(|l| l.end() > e.start + OVERLAP_EPS) {
                out.push(SequenceError::new(e.span, ErrorKind::LaserWithDrive));
            }
            if drive.is_none_or(|d| e.end() > d.end()) {
                drive = Some(e);
            }
        } else if e.channel == Channel::Laser {
            if drive.is_some_and(|d| d.end() > e.start + OVERLAP_EPS) {
                out.push(SequenceError::new(e.span, ErrorKind::LaserWithDrive));
            }
            if laser.is_none_or(|l| e.end() > l.end()) {
                laser = Some(e);
            }
        }
    }
    out
}

/// End time of the last event.
pub fn total_duration(events: &[PulseEvent]) -> f64 {
    events.iter().map(PulseEvent::end).fold(0.0, f64::max)
}
