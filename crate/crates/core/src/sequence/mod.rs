//! Text pulse-sequence language.
//!
//! ```text
//! sweep t from 0us to 1us steps 51
//! laser 3us
//! repeat 10 {
//!   mw1 pi; rf1 pi; laser 150ns
//! }
//! mw2 pi/2 phase=90deg
//! rf1 X(t) rabi=4.3MHz
//! wait 50ns
//! ```
//!
//! Statements are separated by `;` or newlines, `#` starts a comment.
//! Drive channels take `pi`, `pi/N`, `Kpi/N`, `X(d)`, `Y(d)` or a bare
//! duration `d`, where `d` is a literal with a unit or a sweep variable.
//! Options: `phase=` (`deg`/`rad`, or a phase sweep variable), `rabi=`,
//! `power=` (laser only) and `@time` for an absolute start.

mod compile;
mod diag;
mod emit;
mod ir;
mod lexer;
mod parser;
mod validate;

pub use compile::{expand_repeats, resolve, total_duration, Bindings, PulseEvent, ResolveOptions, MAX_EVENTS};
pub use diag::{Diagnostic, ErrorKind, SequenceError, Severity, Span};
pub use emit::emit;
pub use ir::{
    Angle, Axis, Channel, DurArg, Freq, FreqUnit, Node, PhaseArg, PhaseLit, PhaseUnit, Pulse, SequenceIR, Sweep,
    SweepValue, Time, TimeUnit,
};
pub use parser::{parse_only, parse_sequence};
pub use validate::{validate_timing, ALIGN_TOL, GAP_TOL, SELECTIVITY_FRACTION};
