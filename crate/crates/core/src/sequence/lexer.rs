use super::diag::{SequenceError, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// A number with an optional unit suffix glued to it (`300ns`, `2pi`).
    Num { value: f64, suffix: Option<String> },
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    At,
    /// `;` or newline.
    Sep,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, SequenceError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        let single = match c {
            ' ' | '\t' | '\r' | '\u{feff}' => {
                bump!();
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
                continue;
            }
            '\n' | ';' => Some(Tok::Sep),
            '/' => Some(Tok::Slash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '=' => Some(Tok::Eq),
            '@' => Some(Tok::At),
            _ => None,
        };
        if let Some(tok) = single {
            bump!();
            out.push(Token { tok, span });
            continue;
        }

        let starts_number = c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
            || ((c == '-' || c == '+')
                && chars
                    .get(i + 1)
                    .is_some_and(|d| d.is_ascii_digit() || *d == '.'));
        if starts_number {
            let start = i;
            if c == '-' || c == '+' {
                bump!();
            }
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                bump!();
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let next = chars.get(i + 1).copied();
                let after = chars.get(i + 2).copied();
                let exp = match next {
                    Some(d) if d.is_ascii_digit() => true,
                    Some('+' | '-') => after.is_some_and(|d| d.is_ascii_digit()),
                    _ => false,
                };
                if exp {
                    bump!();
                    bump!();
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| SequenceError::syntax(span, format!("malformed number `{text}`")))?;
            if !value.is_finite() {
                return Err(SequenceError::syntax(span, format!("number `{text}` out of range")));
            }
            let s0 = i;
            while i < chars.len() && is_suffix_char(chars[i]) {
                bump!();
            }
            let suffix = (i > s0).then(|| chars[s0..i].iter().collect());
            out.push(Token {
                tok: Tok::Num { value, suffix },
                span,
            });
            continue;
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                span,
            });
            continue;
        }

        return Err(SequenceError::syntax(
            span,
            format!("unexpected character {c:?}"),
        ));
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}

fn is_suffix_char(c: char) -> bool {
    c.is_ascii_alphabetic() || c == 'µ' || c == 'μ'
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_suffixes() {
        assert_eq!(
            toks("300ns 2pi 1e-3s -90deg"),
            vec![
                Tok::Num { value: 300.0, suffix: Some("ns".into()) },
                Tok::Num { value: 2.0, suffix: Some("pi".into()) },
                Tok::Num { value: 1e-3, suffix: Some("s".into()) },
                Tok::Num { value: -90.0, suffix: Some("deg".into()) },
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn spans_and_comments() {
        let t = lex("laser 1us # init\n  mw1 pi").unwrap();
        assert_eq!(t[2].tok, Tok::Sep);
        let mw = &t[3];
        assert_eq!((mw.span.line, mw.span.col), (2, 3));
    }

    #[test]
    fn bad_char() {
        let e = lex("mw1 pi $").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (1, 8));
    }
}
