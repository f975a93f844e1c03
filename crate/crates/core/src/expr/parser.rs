use super::lexer::{tokenize, Tok, Token};
use super::{BinOp, Expr, Func, Node};
use crate::error::ParseError;

pub(crate) fn parse(text: &str, n_vars: usize) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        len: text.len(),
        n_vars,
    };
    if p.tokens.is_empty() {
        return Err(ParseError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::Syntax {
            pos: t.start,
            msg: "unexpected token after expression".into(),
        });
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
    n_vars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eof_error(&self) -> ParseError {
        ParseError::Syntax {
            pos: self.len,
            msg: "unexpected end of input".into(),
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().map(|t| &t.tok) {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Token {
            tok: Tok::Minus, start, ..
        }) = self.peek().cloned()
        {
            self.pos += 1;
            let inner = self.unary()?;
            let end = inner.span.1;
            return Ok(Expr {
                node: Node::Neg(Box::new(inner)),
                span: (start, end),
            });
        }
        self.power()
    }

    // power := primary ('^' unary)?   (right-associative through unary)
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Caret)) {
            self.pos += 1;
            let exponent = self.unary()?;
            let power = integer_exponent(&exponent).ok_or(ParseError::NonIntegerExponent { pos: exponent.span.0 })?;
            let span = (base.span.0, exponent.span.1);
            return Ok(Expr {
                node: Node::Pow {
                    base: Box::new(base),
                    exponent: Box::new(exponent),
                    power,
                },
                span,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.next().ok_or_else(|| self.eof_error())?;
        match t.tok {
            Tok::Num(v) => Ok(Expr {
                node: Node::Num(v),
                span: (t.start, t.end),
            }),
            Tok::LParen => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token {
                        tok: Tok::RParen, end, ..
                    }) => Ok(Expr {
                        node: Node::Paren(Box::new(inner)),
                        span: (t.start, end),
                    }),
                    Some(other) => Err(ParseError::Syntax {
                        pos: other.start,
                        msg: "expected `)`".into(),
                    }),
                    None => Err(self.eof_error()),
                }
            }
            Tok::Ident(name) => self.identifier(name, t.start, t.end),
            _ => Err(ParseError::Syntax {
                pos: t.start,
                msg: "expected a number, identifier or `(`".into(),
            }),
        }
    }

    fn identifier(&mut self, name: String, start: usize, end: usize) -> Result<Expr, ParseError> {
        match name.as_str() {
            "pi" => {
                return Ok(Expr {
                    node: Node::Pi,
                    span: (start, end),
                })
            }
            "i" => {
                return Ok(Expr {
                    node: Node::Imag,
                    span: (start, end),
                })
            }
            _ => {}
        }
        if let Some(func) = Func::from_name(&name) {
            match self.next() {
                Some(Token { tok: Tok::LParen, .. }) => {}
                Some(other) => {
                    return Err(ParseError::Syntax {
                        pos: other.start,
                        msg: format!("expected `(` after `{name}`"),
                    })
                }
                None => return Err(self.eof_error()),
            }
            let arg = self.expr()?;
            return match self.next() {
                Some(Token {
                    tok: Tok::RParen, end, ..
                }) => Ok(Expr {
                    node: Node::Call(func, Box::new(arg)),
                    span: (start, end),
                }),
                Some(other) => Err(ParseError::Syntax {
                    pos: other.start,
                    msg: "expected `)`".into(),
                }),
                None => Err(self.eof_error()),
            };
        }
        if let Some(index) = variable_index(&name) {
            if index == 0 || index > self.n_vars {
                return Err(ParseError::VariableOutOfRange {
                    pos: start,
                    name,
                    n_vars: self.n_vars,
                });
            }
            return Ok(Expr {
                node: Node::Var(index - 1),
                span: (start, end),
            });
        }
        Err(ParseError::UnknownIdentifier { pos: start, name })
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('k')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Fold a variable-free exponent to an integer, if it is one.
fn integer_exponent(e: &Expr) -> Option<i32> {
    if e.has_variables() {
        return None;
    }
    let v = e.eval_f64_const()?;
    if v.im != 0.0 || !v.re.is_finite() || v.re.fract() != 0.0 || v.re.abs() > 1024.0 {
        return None;
    }
    Some(v.re as i32)
}
