use std::f64::consts::PI;

use super::compile::{conflicts, PulseEvent};
use super::diag::{Diagnostic, Severity};
use super::ir::Channel;
use crate::spin::Register;

/// Echo alignment tolerance (s).
pub const ALIGN_TOL: f64 = 1e-9;
/// Largest gap still counted as "zero" before the closing MW π (s).
pub const GAP_TOL: f64 = 1e-12;
/// A pulse counts as selective while its Rabi frequency stays below this
/// fraction of the distance to the nearest other transition.
pub const SELECTIVITY_FRACTION: f64 = 0.1;

const ANGLE_TOL: f64 = 1e-6;

fn is_angle(e: &PulseEvent, theta: f64) -> bool {
    (e.angle() - theta).abs() <= ANGLE_TOL * theta
}

/// Timing advisories for a compiled event list: overlaps, echo alignment of
/// the electron-to-nuclear transfer block, and drive selectivity.
pub fn validate_timing(events: &[PulseEvent], reg: &Register) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = Vec::new();
    let index_of = |e: &PulseEvent| events.iter().position(|x| std::ptr::eq(x, e));

    for err in conflicts(events) {
        let mut d = err.to_diagnostic();
        d.event = events.iter().position(|e| e.span.line == err.span.line && e.span.col == err.span.col);
        out.push(d);
    }

    let active: Vec<&PulseEvent> = events
        .iter()
        .filter(|e| e.channel != Channel::Delay && e.duration > 0.0)
        .collect();
    for w in active.windows(4) {
        let [half, pi1, rf, pi2] = [w[0], w[1], w[2], w[3]];
        let ch = half.channel;
        let pattern = ch.is_microwave()
            && pi1.channel == ch
            && pi2.channel == ch
            && rf.channel.is_rf()
            && is_angle(half, PI / 2.0)
            && is_angle(pi1, PI)
            && is_angle(rf, PI)
            && is_angle(pi2, PI);
        if !pattern {
            continue;
        }
        let echo = 2.0 * pi1.centre() - half.centre();
        let off = rf.centre() - echo;
        if off.abs() > ALIGN_TOL {
            out.push(Diagnostic {
                severity: Severity::Advisory,
                span: rf.span,
                event: index_of(rf),
                message: format!(
                    "{} π pulse centre is {:.1} ns from the electron echo maximum",
                    rf.channel,
                    off * 1e9
                ),
            });
        }
        let gap = pi2.start - rf.end();
        if gap.abs() > GAP_TOL {
            out.push(Diagnostic {
                severity: Severity::Advisory,
                span: pi2.span,
                event: index_of(pi2),
                message: format!(
                    "gap of {:.3} ns between {} π and the closing {} π should be zero",
                    gap * 1e9,
                    rf.channel,
                    pi2.channel
                ),
            });
        }
    }

    for (i, e) in events.iter().enumerate() {
        let Some(t) = e.channel.transition() else {
            continue;
        };
        let spacing = reg.neighbour_spacing(t);
        if e.amplitude > SELECTIVITY_FRACTION * spacing {
            out.push(Diagnostic {
                severity: Severity::Warning,
                span: e.span,
                event: Some(i),
                message: format!(
                    "{} Rabi frequency {:.3} MHz is not selective against a neighbour {:.3} MHz away",
                    e.channel,
                    e.amplitude * 1e-6,
                    spacing * 1e-6
                ),
            });
        }
    }
    out
}
