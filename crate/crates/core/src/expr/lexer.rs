use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

/// Tokenize the whole input up front so that an illegal character is
/// reported at its own offset, before any identifier is resolved.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        let start = pos;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                pos += 1;
                continue;
            }
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            pos += 1;
            out.push(Token { tok, start, end: pos });
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            pos = scan_number(bytes, pos)?;
            let lexeme = &text[start..pos];
            let value: f64 = lexeme.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("malformed number `{lexeme}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                start,
                end: pos,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            out.push(Token {
                tok: Tok::Ident(text[start..pos].to_string()),
                start,
                end: pos,
            });
            continue;
        }
        let ch = text[pos..].chars().next().unwrap_or('?');
        return Err(ParseError::Syntax {
            pos,
            msg: format!("illegal character `{ch}`"),
        });
    }
    Ok(out)
}

fn scan_number(bytes: &[u8], mut pos: usize) -> Result<usize, ParseError> {
    let start = pos;
    let mut digits = 0;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
        digits += 1;
    }
    if pos < bytes.len() && bytes[pos] == b'.' {
        pos += 1;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
            digits += 1;
        }
    }
    if digits == 0 {
        return Err(ParseError::Syntax {
            pos: start,
            msg: "number without digits".into(),
        });
    }
    if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
        pos += 1;
        if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
            pos += 1;
        }
        let exp_start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == exp_start {
            return Err(ParseError::Syntax {
                pos,
                msg: "missing exponent digits".into(),
            });
        }
    }
    Ok(pos)
}
