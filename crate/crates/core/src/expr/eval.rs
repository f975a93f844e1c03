use num_complex::Complex;

use super::{BinOp, Expr, Func, MatrixExpr, Node};
use crate::error::{EvalError, Span};
use crate::scalar::{lit, Real};

fn checked<T: Real>(z: Complex<T>, span: Span) -> Result<Complex<T>, EvalError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(EvalError::NonFinite { span })
    }
}

fn is_zero<T: Real>(z: Complex<T>) -> bool {
    z.re == T::zero() && z.im == T::zero()
}

fn binary<T: Real>(op: BinOp, a: Complex<T>, b: Complex<T>, span: Span) -> Result<Complex<T>, EvalError> {
    let v = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if is_zero(b) {
                return Err(EvalError::DivisionByZero { span });
            }
            a / b
        }
    };
    checked(v, span)
}

fn integer_power<T: Real>(base: Complex<T>, power: i32, span: Span) -> Result<Complex<T>, EvalError> {
    let mut n = power.unsigned_abs();
    let mut acc = Complex::new(T::one(), T::zero());
    let mut b = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * b;
        }
        n >>= 1;
        if n > 0 {
            b = b * b;
        }
    }
    if power < 0 {
        if is_zero(acc) {
            return Err(EvalError::DivisionByZero { span });
        }
        acc = Complex::new(T::one(), T::zero()) / acc;
    }
    checked(acc, span)
}

fn call<T: Real>(func: Func, z: Complex<T>, span: Span) -> Result<Complex<T>, EvalError> {
    let v = match func {
        Func::Exp => z.exp(),
        Func::Sin => z.sin(),
        Func::Cos => z.cos(),
        Func::Ln => {
            if z.im == T::zero() && z.re <= T::zero() {
                return Err(EvalError::LogOfNonPositive { span });
            }
            z.ln()
        }
        Func::Sqrt => z.sqrt(),
        Func::Conj => z.conj(),
    };
    checked(v, span)
}

pub(crate) fn eval_tree<T: Real>(e: &Expr, k: &[T]) -> Result<Complex<T>, EvalError> {
    match &e.node {
        Node::Num(v) => Ok(Complex::new(lit(*v), T::zero())),
        Node::Pi => Ok(Complex::new(T::PI(), T::zero())),
        Node::Imag => Ok(Complex::new(T::zero(), T::one())),
        Node::Var(i) => k.get(*i).map(|&x| Complex::new(x, T::zero())).ok_or(EvalError::Arity {
            expected: i + 1,
            got: k.len(),
        }),
        Node::Neg(inner) => Ok(-eval_tree(inner, k)?),
        Node::Bin(op, a, b) => binary(*op, eval_tree(a, k)?, eval_tree(b, k)?, e.span),
        Node::Pow { base, power, .. } => integer_power(eval_tree(base, k)?, *power, e.span),
        Node::Call(func, arg) => call(*func, eval_tree(arg, k)?, e.span),
        Node::Paren(inner) => eval_tree(inner, k),
    }
}

#[derive(Debug, Clone)]
enum CNode<T> {
    Const(Complex<T>),
    Var(usize),
    Neg(Box<CNode<T>>),
    Bin(BinOp, Box<CNode<T>>, Box<CNode<T>>, Span),
    Pow(Box<CNode<T>>, i32, Span),
    Call(Func, Box<CNode<T>>, Span),
}

/// Evaluation form of a [`MatrixExpr`] with every variable-free subtree
/// folded into a constant. Produces bit-identical results to the tree walk.
#[derive(Debug, Clone)]
pub struct Compiled<T> {
    root: CNode<T>,
    n_vars: usize,
}

impl<T: Real> Compiled<T> {
    pub(crate) fn new(expr: &MatrixExpr) -> Result<Compiled<T>, EvalError> {
        Ok(Compiled {
            root: fold(expr.ast())?,
            n_vars: expr.n_vars(),
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// `Some(value)` when the whole expression is constant.
    pub fn constant(&self) -> Option<Complex<T>> {
        match self.root {
            CNode::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn eval(&self, k: &[T]) -> Result<Complex<T>, EvalError> {
        if k.len() != self.n_vars {
            return Err(EvalError::Arity {
                expected: self.n_vars,
                got: k.len(),
            });
        }
        run(&self.root, k)
    }
}

fn fold<T: Real>(e: &Expr) -> Result<CNode<T>, EvalError> {
    if !e.has_variables() {
        return Ok(CNode::Const(eval_tree::<T>(e, &[])?));
    }
    Ok(match &e.node {
        Node::Var(i) => CNode::Var(*i),
        Node::Neg(inner) => CNode::Neg(Box::new(fold(inner)?)),
        Node::Bin(op, a, b) => CNode::Bin(*op, Box::new(fold(a)?), Box::new(fold(b)?), e.span),
        Node::Pow { base, power, .. } => CNode::Pow(Box::new(fold(base)?), *power, e.span),
        Node::Call(func, arg) => CNode::Call(*func, Box::new(fold(arg)?), e.span),
        Node::Paren(inner) => fold(inner)?,
        Node::Num(_) | Node::Pi | Node::Imag => unreachable!("constant leaves are folded above"),
    })
}

fn run<T: Real>(n: &CNode<T>, k: &[T]) -> Result<Complex<T>, EvalError> {
    match n {
        CNode::Const(c) => Ok(*c),
        CNode::Var(i) => Ok(Complex::new(k[*i], T::zero())),
        CNode::Neg(inner) => Ok(-run(inner, k)?),
        CNode::Bin(op, a, b, span) => binary(*op, run(a, k)?, run(b, k)?, *span),
        CNode::Pow(base, power, span) => integer_power(run(base, k)?, *power, *span),
        CNode::Call(func, arg, span) => call(*func, run(arg, k)?, *span),
    }
}
