//! Graphene with a line defect and a point defect: nodes `{1,2} x Z^2`,
//! potential `V_1` on node 1 of the cells `0 x Z` and `V_2` on node 2 of
//! cell `(0,0)`.
//!
//! The closed forms below are the textbook ones for this model and serve
//! as oracles; the engine never uses them.

mod torus;

use num_complex::Complex;

use crate::cfrac::ContinuedFraction;
use crate::error::Result;
use crate::operator::OperatorSpec;
use crate::quadrature::QuadGrid;
use crate::scalar::{lit, Real};

pub use torus::{hermitian_eigenvalues, torus_oracle, TorusLattice, DEFAULT_DECODE};

/// Off-diagonal entry of `A_0`.
pub const HOPPING: &str = "exp(-2*pi*i*k1)*(1+exp(2*pi*i*k2))+1";
pub const HOPPING_CONJ: &str = "exp(2*pi*i*k1)*(1+exp(-2*pi*i*k2))+1";

#[derive(Debug, Clone)]
pub struct GrapheneModel<T> {
    pub v1: T,
    pub v2: T,
    pub spec: OperatorSpec<T>,
}

/// Expression rows of the three coefficients for the given potentials.
pub fn graphene_rows(v1: f64, v2: f64) -> Vec<Vec<Vec<String>>> {
    let s = |x: &str| x.to_string();
    vec![
        vec![vec![s("0"), s(HOPPING)], vec![s(HOPPING_CONJ), s("0")]],
        vec![vec![format!("{v1:?}"), s("0")], vec![s("0"), s("0")]],
        vec![vec![s("0"), s("0")], vec![s("0"), format!("{v2:?}")]],
    ]
}

pub fn build_graphene<T: Real>(v1: f64, v2: f64) -> Result<GrapheneModel<T>> {
    Ok(GrapheneModel {
        v1: lit(v1),
        v2: lit(v2),
        spec: OperatorSpec::from_exprs(2, &graphene_rows(v1, v2))?,
    })
}

fn two_pi<T: Real>() -> T {
    lit::<T>(2.0) * T::PI()
}

/// `(λ_-, λ_+)` at `k`.
pub fn closed_form_sigma0<T: Real>(k1: T, k2: T) -> (T, T) {
    let tp = two_pi::<T>();
    let s = lit::<T>(3.0) + lit::<T>(2.0) * ((tp * k1).cos() + (tp * k2).cos() + (tp * (k1 - k2)).cos());
    let l = s.max(T::zero()).sqrt();
    (-l, l)
}

/// The curves `±sqrt(3 + 2 cos 2πk2 ± 4 cos πk2)` bounding the projection
/// of the propagating surfaces onto `(λ, k2)`, ascending.
pub fn closed_form_projection<T: Real>(k2: T) -> [T; 4] {
    let c = (T::PI() * k2).cos().abs();
    let base = lit::<T>(3.0) + lit::<T>(2.0) * (two_pi::<T>() * k2).cos();
    let four = lit::<T>(4.0);
    let outer = (base + four * c).max(T::zero()).sqrt();
    let inner = (base - four * c).max(T::zero()).sqrt();
    [-outer, -inner, inner, outer]
}

/// Whether `λ` lies in the projection of the propagating surfaces at `k2`.
pub fn in_projection<T: Real>(lambda: T, k2: T) -> bool {
    let [a, b, c, d] = closed_form_projection(k2);
    (a <= lambda && lambda <= b) || (c <= lambda && lambda <= d)
}

/// Both candidate values of `λ^2` on the guided curves.
pub fn closed_form_guided<T: Real>(k2: T, v1: T) -> [T; 2] {
    let c2 = (T::PI() * k2).cos().powi(2);
    let alpha = T::one() + lit::<T>(4.0) * c2;
    let v = v1 * v1;
    let two = lit::<T>(2.0);
    let disc = (lit::<T>(64.0) * c2 + lit::<T>(4.0) * alpha * v + v * v).sqrt();
    [(two * alpha + v - disc) / two, (two * alpha + v + disc) / two]
}

/// `<(A_0 - λ)^{-1}>_1` upper-left entry off the projection, in closed form.
pub fn closed_form_mean11<T: Real>(lambda: T, k2: T) -> T {
    let c2 = (T::PI() * k2).cos().powi(2);
    let p = lambda * lambda - T::one() - lit::<T>(4.0) * c2;
    let root = (p * p - lit::<T>(16.0) * c2).sqrt();
    -lambda * p.signum() / root
}

/// Candidates `±sqrt(λ^2)` that are true roots of `1 + V_1 <..>_{11}`
/// outside the projection, ascending.
pub fn guided_roots<T: Real>(k2: T, v1: T) -> Vec<T> {
    let tol = lit::<T>(1e-8);
    let mut out: Vec<T> = closed_form_guided(k2, v1)
        .into_iter()
        .filter(|&s| s > T::zero())
        .flat_map(|s| [-s.sqrt(), s.sqrt()])
        .filter(|&l| !in_projection(l, k2))
        .filter(|&l| (T::one() + v1 * closed_form_mean11(l, k2)).abs() < tol)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    out.dedup_by(|a, b| (*a - *b).abs() < tol);
    out
}

/// `det G_2(λ)`, whose zeros off `σ_0 ∪ σ_1` are the point-defect
/// eigenvalues.
pub fn d_loc<T: Real>(model: &GrapheneModel<T>, lambda: Complex<T>, grid: &QuadGrid<T>) -> Result<Complex<T>> {
    Ok(ContinuedFraction::new(&model.spec, 2, &[], grid)?.top(lambda)?.det_g)
}

#[cfg(test)]
mod tests;
