//! Expression language for complex-valued functions of the quasimomentum
//! variables `k1..kN`.
//!
//! Grammar (see `docs/expr-grammar.md`): standard infix with precedence
//! `^` > unary `-` > `* /` > `+ -`, left-associative except `^`. Exponents
//! must fold to constant integers. Built-ins: `exp sin cos ln sqrt conj`,
//! constants `pi` and `i`.

mod eval;
mod lexer;
mod parser;

use std::fmt;

use num_complex::Complex64;

use crate::error::{ParseError, Span};

pub use eval::Compiled;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Ln,
    Sqrt,
    Conj,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "conj" => Func::Conj,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Conj => "conj",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Pi,
    Imag,
    /// Zero-based variable index (`k1` is 0).
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow {
        base: Box<Expr>,
        exponent: Box<Expr>,
        power: i32,
    },
    Call(Func, Box<Expr>),
    Paren(Box<Expr>),
}

/// Expression tree node with its source span.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub node: Node,
    pub span: Span,
}

const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    /// Node without a meaningful source position (hand-built trees).
    pub fn new(node: Node) -> Expr {
        Expr { node, span: (0, 0) }
    }

    pub fn num(v: f64) -> Expr {
        Expr::new(Node::Num(v))
    }

    pub fn var(index: usize) -> Expr {
        Expr::new(Node::Var(index))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        let span = (lhs.span.0, rhs.span.1);
        Expr {
            node: Node::Bin(op, Box::new(lhs), Box::new(rhs)),
            span,
        }
    }

    pub fn neg(inner: Expr) -> Expr {
        Expr::new(Node::Neg(Box::new(inner)))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::new(Node::Call(f, Box::new(arg)))
    }

    pub fn pow(base: Expr, power: i32) -> Expr {
        let exponent = if power < 0 {
            Expr::neg(Expr::num(-(power as f64)))
        } else {
            Expr::num(power as f64)
        };
        Expr::new(Node::Pow {
            base: Box::new(base),
            exponent: Box::new(exponent),
            power,
        })
    }

    pub fn has_variables(&self) -> bool {
        match &self.node {
            Node::Var(_) => true,
            Node::Num(_) | Node::Pi | Node::Imag => false,
            Node::Neg(e) | Node::Call(_, e) | Node::Paren(e) => e.has_variables(),
            Node::Bin(_, a, b) => a.has_variables() || b.has_variables(),
            Node::Pow { base, .. } => base.has_variables(),
        }
    }

    /// Largest variable index referenced (zero-based), if any.
    pub fn max_variable(&self) -> Option<usize> {
        match &self.node {
            Node::Var(i) => Some(*i),
            Node::Num(_) | Node::Pi | Node::Imag => None,
            Node::Neg(e) | Node::Call(_, e) | Node::Paren(e) => e.max_variable(),
            Node::Bin(_, a, b) => a.max_variable().max(b.max_variable()),
            Node::Pow { base, .. } => base.max_variable(),
        }
    }

    pub(crate) fn eval_f64_const(&self) -> Option<Complex64> {
        eval::eval_tree::<f64>(self, &[]).ok()
    }

    fn precedence(&self) -> u8 {
        match &self.node {
            Node::Bin(op, ..) => op.precedence(),
            Node::Neg(_) => PREC_NEG,
            Node::Pow { .. } => PREC_POW,
            _ => PREC_ATOM,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Num(v) => write!(f, "{v}"),
            Node::Pi => f.write_str("pi"),
            Node::Imag => f.write_str("i"),
            Node::Var(i) => write!(f, "k{}", i + 1),
            Node::Neg(e) => {
                f.write_str("-")?;
                e.write_child(f, PREC_NEG)
            }
            Node::Bin(op, a, b) => {
                let p = op.precedence();
                a.write_child(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.write_child(f, p + 1)
            }
            Node::Pow { base, exponent, .. } => {
                base.write_child(f, PREC_ATOM)?;
                f.write_str("^")?;
                exponent.write_child(f, PREC_NEG)
            }
            Node::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Node::Paren(e) => write!(f, "({e})"),
        }
    }
}

/// A parsed entry of a coefficient matrix: a complex-valued function of
/// `k1..kN`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixExpr {
    ast: Expr,
    n_vars: usize,
}

impl MatrixExpr {
    pub fn parse(text: &str, n_vars: usize) -> Result<MatrixExpr, ParseError> {
        if n_vars == 0 {
            return Err(ParseError::Syntax {
                pos: 0,
                msg: "expressions need at least one variable slot".into(),
            });
        }
        let ast = parser::parse(text, n_vars)?;
        Ok(MatrixExpr { ast, n_vars })
    }

    /// Wrap a hand-built tree. Variable indices are checked against `n_vars`.
    pub fn from_ast(ast: Expr, n_vars: usize) -> Result<MatrixExpr, ParseError> {
        if let Some(max) = ast.max_variable() {
            if max >= n_vars {
                return Err(ParseError::VariableOutOfRange {
                    pos: ast.span.0,
                    name: format!("k{}", max + 1),
                    n_vars,
                });
            }
        }
        Ok(MatrixExpr { ast, n_vars })
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Evaluate at `k` (length `n_vars`).
    pub fn eval<T: crate::Real>(&self, k: &[T]) -> Result<num_complex::Complex<T>, crate::error::EvalError> {
        if k.len() != self.n_vars {
            return Err(crate::error::EvalError::Arity {
                expected: self.n_vars,
                got: k.len(),
            });
        }
        eval::eval_tree(&self.ast, k)
    }

    /// Tree with variable-free subtrees folded to constants of type `T`.
    pub fn compile<T: crate::Real>(&self) -> Result<Compiled<T>, crate::error::EvalError> {
        Compiled::new(self)
    }
}

impl fmt::Display for MatrixExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}
