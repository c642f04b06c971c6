use super::compile::{resolve, Bindings, ResolveOptions, MAX_EVENTS};
use super::diag::{ErrorKind, SequenceError, Span};
use super::ir::*;
use super::lexer::{lex, Tok, Token};

const MAX_DEPTH: usize = 32;
const MAX_COUNT: f64 = 1e6;

/// Parse and check a sequence: syntax, units, variable resolution, size and
/// (at the first sweep point) channel overlap.
pub fn parse_sequence(src: &str) -> Result<SequenceIR, SequenceError> {
    let ir = parse_only(src)?;
    check(&ir)?;
    Ok(ir)
}

/// Syntax only; no semantic checks beyond literal validity.
pub fn parse_only(src: &str) -> Result<SequenceIR, SequenceError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        sweeps: Vec::new(),
    };
    let nodes = p.block(0, false)?;
    Ok(SequenceIR {
        nodes,
        sweeps: p.sweeps,
    })
}

fn check(ir: &SequenceIR) -> Result<(), SequenceError> {
    let mut first_err = None;
    ir.for_each_pulse(&mut |p| {
        if first_err.is_some() {
            return;
        }
        if let Some(DurArg::Var(v)) = p.angle.dur_arg() {
            match ir.sweep(v) {
                Some(s) if s.from.is_time() => {}
                Some(_) => {
                    first_err = Some(SequenceError::new(
                        p.span,
                        ErrorKind::Duration(format!("`{v}` is a phase sweep, not a time")),
                    ))
                }
                None => first_err = Some(SequenceError::new(p.span, ErrorKind::Unresolved(v.clone()))),
            }
        }
        if let Some(PhaseArg::Var(v)) = &p.phase {
            match ir.sweep(v) {
                Some(s) if !s.from.is_time() => {}
                Some(_) => {
                    first_err = Some(SequenceError::syntax(
                        p.span,
                        format!("`{v}` is a time sweep, not a phase"),
                    ))
                }
                None => first_err = Some(SequenceError::new(p.span, ErrorKind::Unresolved(v.clone()))),
            }
        }
    });
    if let Some(e) = first_err {
        return Err(e);
    }
    let n = ir.expanded_len();
    if n > MAX_EVENTS {
        let span = match ir.nodes.first() {
            Some(Node::Pulse(p)) => p.span,
            Some(Node::Repeat { span, .. }) => *span,
            None => Span::default(),
        };
        return Err(SequenceError::new(span, ErrorKind::TooLarge(MAX_EVENTS)));
    }
    let bindings: Bindings = ir
        .sweeps
        .iter()
        .map(|s| (s.name.clone(), s.from.si()))
        .collect();
    resolve(ir, &bindings, &ResolveOptions::default())?;
    Ok(())
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    sweeps: Vec<Sweep>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn skip_seps(&mut self) {
        while self.peek().tok == Tok::Sep {
            self.pos += 1;
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, SequenceError> {
        let t = self.next();
        if t.tok == tok {
            Ok(t.span)
        } else {
            Err(SequenceError::syntax(
                t.span,
                format!("expected {what}, found {}", describe(&t.tok)),
            ))
        }
    }

    fn block(&mut self, depth: usize, nested: bool) -> Result<Vec<Node>, SequenceError> {
        let mut nodes = Vec::new();
        loop {
            self.skip_seps();
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof if nested => {
                    return Err(SequenceError::syntax(t.span, "unclosed `{`"));
                }
                Tok::Eof => return Ok(nodes),
                Tok::RBrace if nested => {
                    self.pos += 1;
                    return Ok(nodes);
                }
                Tok::RBrace => return Err(SequenceError::syntax(t.span, "unmatched `}`")),
                _ => {}
            }
            if let Some(n) = self.statement(depth, nested)? {
                nodes.push(n);
            }
            let t = self.peek();
            match t.tok {
                Tok::Sep | Tok::Eof | Tok::RBrace => {}
                _ => {
                    return Err(SequenceError::syntax(
                        t.span,
                        format!("expected end of statement, found {}", describe(&t.tok)),
                    ))
                }
            }
        }
    }

    fn statement(&mut self, depth: usize, nested: bool) -> Result<Option<Node>, SequenceError> {
        let t = self.next();
        let Tok::Ident(word) = &t.tok else {
            return Err(SequenceError::syntax(
                t.span,
                format!("expected a statement, found {}", describe(&t.tok)),
            ));
        };
        match word.as_str() {
            "repeat" => {
                if depth >= MAX_DEPTH {
                    return Err(SequenceError::syntax(t.span, "repeat blocks nested too deeply"));
                }
                let count = self.count("repeat count")?;
                self.expect(Tok::LBrace, "`{`")?;
                let body = self.block(depth + 1, true)?;
                Ok(Some(Node::Repeat {
                    count,
                    body,
                    span: t.span,
                }))
            }
            "sweep" => {
                if nested {
                    return Err(SequenceError::syntax(t.span, "sweep declarations must be top-level"));
                }
                self.sweep(t.span)?;
                Ok(None)
            }
            name => {
                let channel = Channel::from_name(name)
                    .ok_or_else(|| SequenceError::new(t.span, ErrorKind::UnknownChannel(name.into())))?;
                let p = self.pulse(channel, t.span, nested)?;
                Ok(Some(Node::Pulse(p)))
            }
        }
    }

    fn count(&mut self, what: &str) -> Result<u32, SequenceError> {
        let t = self.next();
        match t.tok {
            Tok::Num { value, suffix: None }
                if value >= 0.0 && value.fract() == 0.0 && value <= MAX_COUNT =>
            {
                Ok(value as u32)
            }
            _ => Err(SequenceError::syntax(
                t.span,
                format!("{what} must be an integer in 0..={MAX_COUNT}"),
            )),
        }
    }

    fn sweep(&mut self, span: Span) -> Result<(), SequenceError> {
        let t = self.next();
        let name = match t.tok {
            Tok::Ident(n) if !is_reserved(&n) => n,
            other => {
                return Err(SequenceError::syntax(
                    t.span,
                    format!("expected sweep variable name, found {}", describe(&other)),
                ))
            }
        };
        if self.sweeps.iter().any(|s| s.name == name) {
            return Err(SequenceError::syntax(t.span, format!("sweep `{name}` declared twice")));
        }
        self.keyword("from")?;
        let from = self.sweep_value()?;
        self.keyword("to")?;
        let to = self.sweep_value()?;
        self.keyword("steps")?;
        let steps = self.count("steps")?;
        if from.is_time() != to.is_time() {
            return Err(SequenceError::syntax(span, "sweep endpoints have different units"));
        }
        if from.is_time() && (from.si() < 0.0 || to.si() < 0.0) {
            return Err(SequenceError::new(
                span,
                ErrorKind::Duration("time sweep must not be negative".into()),
            ));
        }
        self.sweeps.push(Sweep {
            name,
            from,
            to,
            steps,
            span,
        });
        Ok(())
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SequenceError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(w) if w == kw => Ok(()),
            other => Err(SequenceError::syntax(
                t.span,
                format!("expected `{kw}`, found {}", describe(other)),
            )),
        }
    }

    fn sweep_value(&mut self) -> Result<SweepValue, SequenceError> {
        let t = self.next();
        if let Tok::Num {
            value,
            suffix: Some(s),
        } = &t.tok
        {
            if let Some(unit) = TimeUnit::parse(s) {
                return Ok(SweepValue::Time(Time { value: *value, unit }));
            }
            if let Some(unit) = PhaseLit::parse_unit(s) {
                return Ok(SweepValue::Phase(PhaseLit { value: *value, unit }));
            }
        }
        Err(SequenceError::syntax(
            t.span,
            format!("expected a time or phase with units, found {}", describe(&t.tok)),
        ))
    }

    fn pulse(&mut self, channel: Channel, span: Span, nested: bool) -> Result<Pulse, SequenceError> {
        let angle = if channel.is_drive() {
            self.angle()?
        } else {
            Angle::Duration(self.dur_arg()?)
        };
        let mut p = Pulse {
            channel,
            angle,
            phase: None,
            rabi: None,
            power: None,
            at: None,
            span,
        };
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::At => {
                    self.pos += 1;
                    if nested {
                        return Err(SequenceError::syntax(t.span, "absolute time inside a repeat block"));
                    }
                    if p.at.is_some() {
                        return Err(SequenceError::syntax(t.span, "duplicate `@` start time"));
                    }
                    match self.dur_arg()? {
                        DurArg::Lit(time) => p.at = Some(time),
                        DurArg::Var(_) => {
                            return Err(SequenceError::syntax(t.span, "start time must be a literal"))
                        }
                    }
                }
                Tok::Ident(key) => {
                    self.pos += 1;
                    self.expect(Tok::Eq, "`=`")?;
                    self.option(&mut p, key, t.span)?;
                }
                _ => return Ok(p),
            }
        }
    }

    fn option(&mut self, p: &mut Pulse, key: &str, span: Span) -> Result<(), SequenceError> {
        let dup = || SequenceError::syntax(span, format!("duplicate option `{key}`"));
        let misplaced = || {
            SequenceError::syntax(span, format!("option `{key}` does not apply to `{}`", p.channel))
        };
        let v = self.next();
        match key {
            "phase" => {
                if !p.channel.is_drive() {
                    return Err(misplaced());
                }
                if p.phase.is_some() {
                    return Err(dup());
                }
                p.phase = Some(match v.tok {
                    Tok::Num {
                        value,
                        suffix: Some(ref s),
                    } if PhaseLit::parse_unit(s).is_some() => PhaseArg::Lit(PhaseLit {
                        value,
                        unit: PhaseLit::parse_unit(s).unwrap(),
                    }),
                    Tok::Ident(ref n) if !is_reserved(n) => PhaseArg::Var(n.clone()),
                    _ => {
                        return Err(SequenceError::syntax(
                            v.span,
                            "phase needs a `deg` or `rad` suffix",
                        ))
                    }
                });
            }
            "rabi" => {
                if !p.channel.is_drive() {
                    return Err(misplaced());
                }
                if p.rabi.is_some() {
                    return Err(dup());
                }
                p.rabi = Some(match v.tok {
                    Tok::Num {
                        value,
                        suffix: Some(ref s),
                    } if FreqUnit::parse(s).is_some() && value >= 0.0 => Freq {
                        value,
                        unit: FreqUnit::parse(s).unwrap(),
                    },
                    _ => {
                        return Err(SequenceError::syntax(
                            v.span,
                            "rabi needs a non-negative frequency (Hz, kHz, MHz, GHz)",
                        ))
                    }
                });
            }
            "power" => {
                if p.channel != Channel::Laser {
                    return Err(misplaced());
                }
                if p.power.is_some() {
                    return Err(dup());
                }
                p.power = Some(match v.tok {
                    Tok::Num { value, suffix: None } if value >= 0.0 => value,
                    _ => {
                        return Err(SequenceError::syntax(
                            v.span,
                            "power must be a non-negative plain number",
                        ))
                    }
                });
            }
            _ => return Err(SequenceError::syntax(span, format!("unknown option `{key}`"))),
        }
        Ok(())
    }

    fn angle(&mut self) -> Result<Angle, SequenceError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(w) if w == "pi" => {
                self.pos += 1;
                let div = self.pi_divisor()?;
                Ok(Angle::Pi { mult: 1.0, div })
            }
            Tok::Num {
                value,
                suffix: Some(s),
            } if s == "pi" => {
                self.pos += 1;
                if *value < 0.0 {
                    return Err(SequenceError::syntax(t.span, "rotation angle must be non-negative"));
                }
                let div = self.pi_divisor()?;
                Ok(Angle::Pi { mult: *value, div })
            }
            Tok::Ident(w) if (w == "X" || w == "Y") => {
                self.pos += 1;
                let axis = if w == "X" { Axis::X } else { Axis::Y };
                self.expect(Tok::LParen, "`(`")?;
                let arg = self.dur_arg()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Angle::Rotation { axis, arg })
            }
            _ => Ok(Angle::Duration(self.dur_arg()?)),
        }
    }

    fn pi_divisor(&mut self) -> Result<u32, SequenceError> {
        if self.peek().tok != Tok::Slash {
            return Ok(1);
        }
        self.pos += 1;
        let t = self.next();
        match t.tok {
            Tok::Num { value, suffix: None } if value >= 1.0 && value.fract() == 0.0 && value <= MAX_COUNT => {
                Ok(value as u32)
            }
            _ => Err(SequenceError::syntax(t.span, "expected a positive integer divisor after `pi/`")),
        }
    }

    fn dur_arg(&mut self) -> Result<DurArg, SequenceError> {
        let t = self.next();
        match t.tok {
            Tok::Num {
                value,
                suffix: Some(ref s),
            } => match TimeUnit::parse(s) {
                Some(unit) if value >= 0.0 => Ok(DurArg::Lit(Time { value, unit })),
                Some(_) => Err(SequenceError::new(
                    t.span,
                    ErrorKind::Duration(format!("negative duration {value}{s}")),
                )),
                None => Err(SequenceError::new(
                    t.span,
                    ErrorKind::Duration(format!("unknown time unit `{s}`")),
                )),
            },
            Tok::Num { value, suffix: None } => Err(SequenceError::new(
                t.span,
                ErrorKind::Duration(format!("`{value}` needs a unit (ns, us, ms, s)")),
            )),
            Tok::Ident(ref n) if !is_reserved(n) => Ok(DurArg::Var(n.clone())),
            ref other => Err(SequenceError::syntax(
                t.span,
                format!("expected a duration, found {}", describe(other)),
            )),
        }
    }
}

fn is_reserved(w: &str) -> bool {
    matches!(
        w,
        "pi" | "X" | "Y" | "repeat" | "sweep" | "from" | "to" | "steps" | "phase" | "rabi" | "power"
    ) || Channel::from_name(w).is_some()
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num { value, suffix } => format!("`{value}{}`", suffix.as_deref().unwrap_or("")),
        Tok::Slash => "`/`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Eq => "`=`".into(),
        Tok::At => "`@`".into(),
        Tok::Sep => "end of statement".into(),
        Tok::Eof => "end of input".into(),
    }
}
