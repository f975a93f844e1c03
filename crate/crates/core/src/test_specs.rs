//! Small operators shared by unit tests.

use crate::linalg::CMatrix;
use crate::operator::{Coefficient, OperatorSpec};

pub fn rows(v: &[&[&str]]) -> Vec<Vec<String>> {
    v.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

/// `N = 1, M = 1`, `A_0 = c`, `A_1 = a`.
pub fn constants(c: f64, a: f64) -> OperatorSpec<f64> {
    OperatorSpec::new(
        1,
        1,
        vec![
            Coefficient::Const(CMatrix::from_real_rows(&[&[c]])),
            Coefficient::Const(CMatrix::from_real_rows(&[&[a]])),
        ],
    )
    .unwrap()
}

pub fn graphene(v1: f64, v2: f64) -> OperatorSpec<f64> {
    let v1 = format!("{v1:?}");
    let v2 = format!("{v2:?}");
    OperatorSpec::from_exprs(
        2,
        &[
            rows(&[
                &["0", "exp(-2*pi*i*k1)*(1+exp(2*pi*i*k2))+1"],
                &["exp(2*pi*i*k1)*(1+exp(-2*pi*i*k2))+1", "0"],
            ]),
            rows(&[&[&v1, "0"], &["0", "0"]]),
            rows(&[&["0", "0"], &["0", &v2]]),
        ],
    )
    .unwrap()
}

/// `k2 / ln(1 + 2 k2)`, continued by its limit at `k2 = 0`.
pub fn example_a1(k2: f64) -> f64 {
    if k2 == 0.0 {
        0.5
    } else {
        k2 / (1.0 + 2.0 * k2).ln()
    }
}

/// The scalar operator with branches `k1 k2`, `0.5 + k2` and `2`.
pub fn worked_example(a2: f64) -> OperatorSpec<f64> {
    OperatorSpec::new(
        2,
        1,
        vec![
            Coefficient::Expr(crate::operator::ExprMatrix::parse(0, 2, &rows(&[&["k1*k2"]])).unwrap()),
            Coefficient::custom(|t: &[f64]| Ok(CMatrix::from_real_rows(&[&[example_a1(t[0])]]))),
            Coefficient::Const(CMatrix::from_real_rows(&[&[a2]])),
        ],
    )
    .unwrap()
}

/// A self-adjoint `N = 2, M = 2` operator with trigonometric entries.
pub fn trig_hermitian() -> OperatorSpec<f64> {
    OperatorSpec::from_exprs(
        2,
        &[
            rows(&[
                &["1 + 0.5*cos(2*pi*k1) - 0.3*sin(2*pi*k2)", "0.4*exp(2*pi*i*k1) + 0.2*k2"],
                &["0.4*exp(-2*pi*i*k1) + 0.2*k2", "-0.7 + 0.6*cos(2*pi*(k1 + k2))"],
            ]),
            rows(&[
                &["0.8 + 0.3*cos(2*pi*k2)", "0.25*i*exp(2*pi*i*k2)"],
                &["-0.25*i*exp(-2*pi*i*k2)", "-0.5"],
            ]),
            rows(&[&["0.6", "0.1 - 0.2*i"], &["0.1 + 0.2*i", "-0.9"]]),
        ],
    )
    .unwrap()
}

/// A non-Hermitian `N = 2, M = 2` operator.
pub fn trig_general() -> OperatorSpec<f64> {
    OperatorSpec::from_exprs(
        2,
        &[
            rows(&[
                &["1 + 0.5*cos(2*pi*k1)", "0.3*exp(2*pi*i*k2) + 0.1*k1"],
                &["0.7*i*sin(2*pi*k2)", "-0.4 + k1*k2"],
            ]),
            rows(&[&["0.5*k2", "0.2"], &["-0.3*i", "1 + 0.2*cos(2*pi*k2)"]]),
            rows(&[&["0.3", "0"], &["0.4", "-0.2*i"]]),
        ],
    )
    .unwrap()
}
