use std::fmt;

use thiserror::Error;

/// 1-based source location.
///
/// Spans always compare equal, so IR equality is structural and survives
/// re-formatting.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Advisory,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Advisory => "advisory",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    /// Index into the compiled event list, when the finding is about events.
    pub event: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {}: {}",
            self.span.line, self.span.col, self.severity, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown channel `{0}` (expected laser, mw1, mw2, rf1, rf2, wait or delay)")]
    UnknownChannel(String),
    #[error("invalid duration: {0}")]
    Duration(String),
    #[error("unresolved variable `{0}`")]
    Unresolved(String),
    #[error("{0}")]
    Overlap(String),
    #[error("laser and microwave/rf pulses must not run simultaneously")]
    LaserWithDrive,
    #[error("sequence expands to more than {0} events")]
    TooLarge(u64),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {kind}")]
pub struct SequenceError {
    pub span: Span,
    pub kind: ErrorKind,
}

impl SequenceError {
    pub fn new(span: Span, kind: ErrorKind) -> Self {
        SequenceError { span, kind }
    }

    pub fn syntax(span: Span, msg: impl Into<String>) -> Self {
        Self::new(span, ErrorKind::Syntax(msg.into()))
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            span: self.span,
            event: None,
            message: self.kind.to_string(),
        }
    }

    pub fn render(&self, file: &str) -> String {
        self.to_diagnostic().render(file)
    }
}
