use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::diag::Span;
use crate::spin::TransitionLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Laser,
    Mw1,
    Mw2,
    Rf1,
    Rf2,
    Delay,
}

impl Channel {
    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "laser" => Channel::Laser,
            "mw1" => Channel::Mw1,
            "mw2" => Channel::Mw2,
            "rf1" => Channel::Rf1,
            "rf2" => Channel::Rf2,
            "wait" | "delay" => Channel::Delay,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Laser => "laser",
            Channel::Mw1 => "mw1",
            Channel::Mw2 => "mw2",
            Channel::Rf1 => "rf1",
            Channel::Rf2 => "rf2",
            Channel::Delay => "wait",
        }
    }

    pub fn transition(self) -> Option<TransitionLabel> {
        match self {
            Channel::Mw1 => Some(TransitionLabel::Mw1),
            Channel::Mw2 => Some(TransitionLabel::Mw2),
            Channel::Rf1 => Some(TransitionLabel::Rf1),
            Channel::Rf2 => Some(TransitionLabel::Rf2),
            Channel::Laser | Channel::Delay => None,
        }
    }

    pub fn is_drive(self) -> bool {
        self.transition().is_some()
    }

    pub fn is_microwave(self) -> bool {
        matches!(self, Channel::Mw1 | Channel::Mw2)
    }

    pub fn is_rf(self) -> bool {
        matches!(self, Channel::Rf1 | Channel::Rf2)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Ns,
    Us,
    Ms,
    S,
}

impl TimeUnit {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ns" => TimeUnit::Ns,
            "us" | "µs" | "μs" => TimeUnit::Us,
            "ms" => TimeUnit::Ms,
            "s" => TimeUnit::S,
            _ => return None,
        })
    }

    pub fn scale(self) -> f64 {
        match self {
            TimeUnit::Ns => 1e-9,
            TimeUnit::Us => 1e-6,
            TimeUnit::Ms => 1e-3,
            TimeUnit::S => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeUnit::Ns => "ns",
            TimeUnit::Us => "us",
            TimeUnit::Ms => "ms",
            TimeUnit::S => "s",
        }
    }
}

/// A literal time as written, kept in its own unit so emission is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Time {
    pub value: f64,
    pub unit: TimeUnit,
}

impl Time {
    pub fn seconds(self) -> f64 {
        self.value * self.unit.scale()
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.value, self.unit.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FreqUnit {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "Hz" | "hz" => FreqUnit::Hz,
            "kHz" | "khz" => FreqUnit::KHz,
            "MHz" | "mhz" => FreqUnit::MHz,
            "GHz" | "ghz" => FreqUnit::GHz,
            _ => return None,
        })
    }

    pub fn scale(self) -> f64 {
        match self {
            FreqUnit::Hz => 1.0,
            FreqUnit::KHz => 1e3,
            FreqUnit::MHz => 1e6,
            FreqUnit::GHz => 1e9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FreqUnit::Hz => "Hz",
            FreqUnit::KHz => "kHz",
            FreqUnit::MHz => "MHz",
            FreqUnit::GHz => "GHz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Freq {
    pub value: f64,
    pub unit: FreqUnit,
}

impl Freq {
    pub fn hertz(self) -> f64 {
        self.value * self.unit.scale()
    }
}

impl fmt::Display for Freq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.value, self.unit.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseUnit {
    Deg,
    Rad,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLit {
    pub value: f64,
    pub unit: PhaseUnit,
}

impl PhaseLit {
    pub fn parse_unit(s: &str) -> Option<PhaseUnit> {
        match s {
            "deg" => Some(PhaseUnit::Deg),
            "rad" => Some(PhaseUnit::Rad),
            _ => None,
        }
    }

    pub fn radians(self) -> f64 {
        match self.unit {
            PhaseUnit::Deg => self.value.to_radians(),
            PhaseUnit::Rad => self.value,
        }
    }
}

impl fmt::Display for PhaseLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u = match self.unit {
            PhaseUnit::Deg => "deg",
            PhaseUnit::Rad => "rad",
        };
        write!(f, "{}{u}", self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DurArg {
    Lit(Time),
    Var(String),
}

impl fmt::Display for DurArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DurArg::Lit(t) => t.fmt(f),
            DurArg::Var(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseArg {
    Lit(PhaseLit),
    Var(String),
}

impl fmt::Display for PhaseArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseArg::Lit(p) => p.fmt(f),
            PhaseArg::Var(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn phase(self) -> f64 {
        match self {
            Axis::X => 0.0,
            Axis::Y => PI / 2.0,
        }
    }
}

/// What a pulse statement asks for.
#[derive(Debug, Clone, PartialEq)]
pub enum Angle {
    /// `mult·π/div`, duration set by the Rabi frequency.
    Pi { mult: f64, div: u32 },
    /// `X(t)` / `Y(t)`: fixed duration, phase 0 or 90°.
    Rotation { axis: Axis, arg: DurArg },
    /// Plain duration (the only form for laser and wait).
    Duration(DurArg),
}

impl Angle {
    pub fn radians(&self) -> Option<f64> {
        match self {
            Angle::Pi { mult, div } => Some(mult * PI / *div as f64),
            _ => None,
        }
    }

    pub fn dur_arg(&self) -> Option<&DurArg> {
        match self {
            Angle::Pi { .. } => None,
            Angle::Rotation { arg, .. } | Angle::Duration(arg) => Some(arg),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Pi { mult, div } => {
                if *mult == 1.0 {
                    f.write_str("pi")?;
                } else {
                    write!(f, "{mult}pi")?;
                }
                if *div != 1 {
                    write!(f, "/{div}")?;
                }
                Ok(())
            }
            Angle::Rotation { axis, arg } => {
                let a = if *axis == Axis::X { "X" } else { "Y" };
                write!(f, "{a}({arg})")
            }
            Angle::Duration(arg) => arg.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub channel: Channel,
    pub angle: Angle,
    pub phase: Option<PhaseArg>,
    pub rabi: Option<Freq>,
    pub power: Option<f64>,
    /// Absolute start time; otherwise the pulse follows the previous one.
    pub at: Option<Time>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Pulse(Pulse),
    Repeat {
        count: u32,
        body: Vec<Node>,
        span: Span,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue {
    Time(Time),
    Phase(PhaseLit),
}

impl SweepValue {
    pub fn si(self) -> f64 {
        match self {
            SweepValue::Time(t) => t.seconds(),
            SweepValue::Phase(p) => p.radians(),
        }
    }

    pub fn is_time(self) -> bool {
        matches!(self, SweepValue::Time(_))
    }
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Time(t) => t.fmt(f),
            SweepValue::Phase(p) => p.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub name: String,
    pub from: SweepValue,
    pub to: SweepValue,
    pub steps: u32,
    pub span: Span,
}

impl Sweep {
    /// Evenly spaced points in SI units (seconds or radians).
    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.from.si(), self.to.si());
        match self.steps {
            0 => Vec::new(),
            1 => vec![a],
            n => (0..n)
                .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Parsed sequence. Repeat blocks are kept as written until
/// [`expand_repeats`](super::expand_repeats) or resolution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SequenceIR {
    pub nodes: Vec<Node>,
    pub sweeps: Vec<Sweep>,
}

impl SequenceIR {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.sweeps.is_empty()
    }

    pub fn sweep(&self, name: &str) -> Option<&Sweep> {
        self.sweeps.iter().find(|s| s.name == name)
    }

    /// Number of pulse events after expanding every repeat block.
    pub fn expanded_len(&self) -> u64 {
        fn count(nodes: &[Node]) -> u64 {
            nodes.iter().fold(0u64, |acc, n| {
                acc.saturating_add(match n {
                    Node::Pulse(_) => 1,
                    Node::Repeat { count: c, body, .. } => (*c as u64).saturating_mul(count(body)),
                })
            })
        }
        count(&self.nodes)
    }

    /// Variables referenced by pulses, in name order.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.for_each_pulse(&mut |p| {
            if let Some(DurArg::Var(v)) = p.angle.dur_arg() {
                out.insert(v.clone());
            }
            if let Some(PhaseArg::Var(v)) = &p.phase {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn for_each_pulse(&self, f: &mut impl FnMut(&Pulse)) {
        fn walk(nodes: &[Node], f: &mut impl FnMut(&Pulse)) {
            for n in nodes {
                match n {
                    Node::Pulse(p) => f(p),
                    Node::Repeat { body, .. } => walk(body, f),
                }
            }
        }
        walk(&self.nodes, f)
    }
}
