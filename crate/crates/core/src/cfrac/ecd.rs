//! The E/C/D/H recursion:
//! `C_0 = (A_0 - λI)^{-1}`, `H_j = C_0 + Σ_{r<j} C_r <D_r>_{1..r}`,
//! `C_j = -H_j A_j`, `E_j = I - <C_j>_{1..j}`,
//! `D_j = E_j^{-1} (C_0 + Σ_{r<j} <C_r>_{1..r} D_r)`.
//!
//! It never forms `F_j`, so it serves as an independent check of the
//! continued-fraction path (`E_j = G_j`, `<D_j>_{1..j} = F_j^{-1}`).

use num_complex::Complex;

use super::{proximity, sample_coefficients};
use crate::error::Result;
use crate::linalg::{lu_det_inv, CMatrix};
use crate::operator::OperatorSpec;
use crate::quadrature::{KPoint, NodeField, QuadGrid};
use crate::scalar::Real;

/// Output of [`cf_eval_via_ecd`]. `C_r`, `D_r`, `H_r` live on the full node
/// grid of `k_1..k_J`; `E_r` on the nodes of `k_{r+1..J}`.
#[derive(Debug, Clone)]
pub struct EcdState<T> {
    pub lambda: Complex<T>,
    c: Vec<NodeField<CMatrix<T>>>,
    e: Vec<NodeField<CMatrix<T>>>,
    d: Vec<NodeField<CMatrix<T>>>,
    h: Vec<NodeField<CMatrix<T>>>,
}

impl<T> EcdState<T> {
    pub fn level(&self) -> usize {
        self.c.len() - 1
    }

    pub fn c(&self, r: usize) -> &NodeField<CMatrix<T>> {
        &self.c[r]
    }

    /// `E_0 = C_0^{-1}`, `E_r = I - <C_r>_{1..r}`.
    pub fn e(&self, r: usize) -> &NodeField<CMatrix<T>> {
        &self.e[r]
    }

    pub fn d(&self, r: usize) -> &NodeField<CMatrix<T>> {
        &self.d[r]
    }

    /// `H_r`, `1 <= r <= J + 1`.
    pub fn h(&self, r: usize) -> &NodeField<CMatrix<T>> {
        &self.h[r - 1]
    }
}

pub fn cf_eval_via_ecd<T: Real>(
    spec: &OperatorSpec<T>,
    level: usize,
    lambda: Complex<T>,
    k_tail: &KPoint<T>,
    grid: &QuadGrid<T>,
) -> Result<EcdState<T>> {
    let a = sample_coefficients(spec, level, k_tail.coords(), grid)?;
    let j = level;
    let q = grid.q();
    let n = grid.len(j);
    let m = spec.m();
    let id = CMatrix::identity(m);
    let field = |v: Vec<CMatrix<T>>| NodeField::new(q, j, v);

    let mut c0 = Vec::with_capacity(n);
    let mut e0 = Vec::with_capacity(n);
    for x in a[0].values() {
        let f0 = x - &CMatrix::scalar(m, lambda);
        let r = lu_det_inv(&f0);
        c0.push(r.inv.ok_or_else(|| proximity(0, lambda, r.rcond))?);
        e0.push(f0);
    }
    let mut c = vec![field(c0)];
    let mut e = vec![field(e0)];
    let mut d = vec![c[0].clone()];
    // <C_r>_{1..r} and <D_r>_{1..r}
    let mut c_mean: Vec<NodeField<CMatrix<T>>> = vec![c[0].clone()];
    let mut d_mean: Vec<NodeField<CMatrix<T>>> = vec![d[0].clone()];
    let mut h = Vec::new();

    let h_at = |c: &[NodeField<CMatrix<T>>], d_mean: &[NodeField<CMatrix<T>>], upto: usize| {
        let vals = (0..n)
            .map(|i| {
                let mut acc = c[0].values()[i].clone();
                for r in 1..upto {
                    acc = &acc + &(&c[r].values()[i] * d_mean[r].broadcast(i, j));
                }
                acc
            })
            .collect();
        field(vals)
    };

    for jj in 1..=j {
        let hj = h_at(&c, &d_mean, jj);
        let cj = field(
            (0..n)
                .map(|i| (&hj.values()[i] * a[jj].broadcast(i, j)).scale(Complex::new(-T::one(), T::zero())))
                .collect(),
        );
        let cj_mean = cj.mean_leading(jj, grid);
        let ej = cj_mean.map(|x| &id - x);
        let ej_inv: Vec<CMatrix<T>> = ej
            .values()
            .iter()
            .map(|x| {
                let r = lu_det_inv(x);
                r.inv.ok_or_else(|| proximity(jj, lambda, r.rcond))
            })
            .collect::<Result<_>>()?;
        let ej_inv = NodeField::new(q, j - jj, ej_inv);
        let dj = field(
            (0..n)
                .map(|i| {
                    let mut acc = c[0].values()[i].clone();
                    for r in 1..jj {
                        acc = &acc + &(c_mean[r].broadcast(i, j) * &d[r].values()[i]);
                    }
                    ej_inv.broadcast(i, j) * &acc
                })
                .collect(),
        );
        h.push(hj);
        d_mean.push(dj.mean_leading(jj, grid));
        c_mean.push(cj_mean);
        c.push(cj);
        e.push(ej);
        d.push(dj);
    }
    h.push(h_at(&c, &d_mean, j + 1));
    Ok(EcdState { lambda, c, e, d, h })
}
