//! Unit-suffixed quantities: `3.3ms`, `-65G`, `127MHz`, `inf`.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Frequency,
    Field,
    Dimensionless,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Time => "time (s, ms, us, ns, ps)",
            Dimension::Frequency => "frequency (Hz, kHz, MHz, GHz)",
            Dimension::Field => "field (T, mT, uT, G, kG)",
            Dimension::Dimensionless => "plain number",
        })
    }
}

/// `(multiplier, divisor)`; dividing by an exact power of ten keeps
/// `-65G` identical to `-6.5e-3` T.
fn unit_scale(dim: Dimension, unit: &str) -> Option<(f64, f64)> {
    let s = match (dim, unit) {
        (Dimension::Time, "s") => (1.0, 1.0),
        (Dimension::Time, "ms") => (1.0, 1e3),
        (Dimension::Time, "us" | "µs" | "μs") => (1.0, 1e6),
        (Dimension::Time, "ns") => (1.0, 1e9),
        (Dimension::Time, "ps") => (1.0, 1e12),
        (Dimension::Frequency, "Hz") => (1.0, 1.0),
        (Dimension::Frequency, "kHz") => (1e3, 1.0),
        (Dimension::Frequency, "MHz") => (1e6, 1.0),
        (Dimension::Frequency, "GHz") => (1e9, 1.0),
        (Dimension::Field, "T") => (1.0, 1.0),
        (Dimension::Field, "mT") => (1.0, 1e3),
        (Dimension::Field, "uT" | "µT") => (1.0, 1e6),
        (Dimension::Field, "G") => (1.0, 1e4),
        (Dimension::Field, "kG") => (1.0, 10.0),
        (Dimension::Dimensionless, "") => (1.0, 1.0),
        _ => return None,
    };
    Some(s)
}

/// Parses a quantity into SI units. Dimensioned values need a unit, except
/// `inf` and zero.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let t = text.trim();
    if matches!(t, "inf" | "+inf" | "infinity") {
        return Ok(f64::INFINITY);
    }
    let split = t
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(t.len())).rfind(|&i| t[..i].trim_end().parse::<f64>().is_ok())
        .ok_or_else(|| format!("`{text}` is not a number with a unit"))?;
    let value: f64 = t[..split].trim_end().parse().unwrap();
    let unit = t[split..].trim();
    if unit.is_empty() && dim != Dimension::Dimensionless && value != 0.0 {
        return Err(format!("`{text}` needs a unit: expected {dim}"));
    }
    let (mul, div) = if unit.is_empty() {
        (1.0, 1.0)
    } else {
        unit_scale(dim, unit).ok_or_else(|| format!("unit `{unit}` in `{text}`: expected {dim}"))?
    };
    if !value.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(value * mul / div)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units() {
        assert_eq!(parse_quantity("3.3ms", Dimension::Time), Ok(3.3e-3));
        assert_eq!(parse_quantity("-65G", Dimension::Field), Ok(-65e-4));
        assert_eq!(parse_quantity("127 MHz", Dimension::Frequency), Ok(127e6));
        assert_eq!(parse_quantity("1e-3s", Dimension::Time), Ok(1e-3));
        assert_eq!(parse_quantity("0", Dimension::Time), Ok(0.0));
        assert_eq!(parse_quantity("inf", Dimension::Time), Ok(f64::INFINITY));
        assert_eq!(parse_quantity("2.5", Dimension::Dimensionless), Ok(2.5));
    }

    #[test]
    fn rejects_missing_or_wrong_units() {
        assert!(parse_quantity("3.3", Dimension::Time).is_err());
        assert!(parse_quantity("3.3MHz", Dimension::Time).is_err());
        assert!(parse_quantity("fast", Dimension::Time).is_err());
        assert!(parse_quantity("", Dimension::Dimensionless).is_err());
    }
}
