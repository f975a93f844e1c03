//! Recovering the coefficients from continued-fraction data:
//! `A_0 = λI + G_0`, `A_j = <(G_0...G_{j-1})^{-1}>_{1..j}^{-1} (G_j - I)`,
//! or from the fractions themselves, `A_j = F_j - <F_{j-1}^{-1}>_j^{-1}`.
//! Every probe λ must give the same coefficients.

use num_complex::Complex;

use super::{proximity, CFState};
use crate::error::{Error, Result};
use crate::linalg::{lu_det_inv, CMatrix};
use crate::quadrature::{NodeField, QuadGrid};
use crate::scalar::{to_f64, Real};

/// Relative spread across probes beyond which the data is rejected.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Level-wise values (`G_r` or `F_r`) on the nodes of `k_{r+1..J}` at one λ.
#[derive(Debug, Clone)]
pub struct SpectralSamples<T> {
    pub lambda: Complex<T>,
    pub levels: Vec<NodeField<CMatrix<T>>>,
}

impl<T: Real> SpectralSamples<T> {
    pub fn g_of(state: &CFState<T>) -> Self {
        SpectralSamples {
            lambda: state.lambda,
            levels: state.levels.iter().map(|l| l.g.clone()).collect(),
        }
    }

    pub fn f_of(state: &CFState<T>) -> Self {
        SpectralSamples {
            lambda: state.lambda,
            levels: state.levels.iter().map(|l| l.f.clone()).collect(),
        }
    }
}

fn invert_field<T: Real>(f: &NodeField<CMatrix<T>>, level: usize, lambda: Complex<T>) -> Result<NodeField<CMatrix<T>>> {
    let vals = f
        .values()
        .iter()
        .map(|x| {
            let r = lu_det_inv(x);
            r.inv.ok_or_else(|| proximity(level, lambda, r.rcond))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NodeField::new(f.q(), f.dims(), vals))
}

fn from_g_single<T: Real>(s: &SpectralSamples<T>, grid: &QuadGrid<T>) -> Result<Vec<NodeField<CMatrix<T>>>> {
    let j_top = s.levels.len() - 1;
    let m = s.levels[0].values()[0].rows();
    let id = CMatrix::identity(m);
    let mut out = vec![s.levels[0].map(|g| g + &CMatrix::scalar(m, s.lambda))];
    let mut product = s.levels[0].clone();
    for j in 1..=j_top {
        let d = invert_field(&product, j - 1, s.lambda)?;
        let mean_inv = invert_field(&d.mean_leading(j, grid), j, s.lambda)?;
        let gj = &s.levels[j];
        let aj = (0..gj.len())
            .map(|i| &mean_inv.values()[i] * &(&gj.values()[i] - &id))
            .collect();
        out.push(NodeField::new(gj.q(), gj.dims(), aj));
        let n = product.len();
        let next = (0..n).map(|i| &product.values()[i] * gj.broadcast(i, j_top)).collect();
        product = NodeField::new(product.q(), j_top, next);
    }
    Ok(out)
}

fn from_f_single<T: Real>(s: &SpectralSamples<T>, grid: &QuadGrid<T>) -> Result<Vec<NodeField<CMatrix<T>>>> {
    let j_top = s.levels.len() - 1;
    let m = s.levels[0].values()[0].rows();
    let mut out = vec![s.levels[0].map(|f| f + &CMatrix::scalar(m, s.lambda))];
    for j in 1..=j_top {
        let inner = invert_field(&s.levels[j - 1], j - 1, s.lambda)?;
        let mean_inv = invert_field(&inner.mean_axis1(grid), j, s.lambda)?;
        let fj = &s.levels[j];
        let aj = (0..fj.len()).map(|i| &fj.values()[i] - &mean_inv.values()[i]).collect();
        out.push(NodeField::new(fj.q(), fj.dims(), aj));
    }
    Ok(out)
}

fn consistent<T: Real>(all: Vec<Vec<NodeField<CMatrix<T>>>>) -> Result<Vec<NodeField<CMatrix<T>>>> {
    let mut iter = all.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Invalid("reconstruction needs at least one probe".into()))?;
    for other in iter {
        for (j, (a, b)) in first.iter().zip(&other).enumerate() {
            let dev = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| to_f64((x - y).max_norm()) / (1.0 + to_f64(x.max_norm())))
                .fold(0.0, f64::max);
            if dev > CONSISTENCY_TOL {
                return Err(Error::InconsistentSpectralData {
                    level: j,
                    deviation: dev,
                });
            }
        }
    }
    Ok(first)
}

/// Coefficients `A_0..A_J` from `G_0..G_J` sampled at several λ.
pub fn reconstruct_from_g<T: Real>(
    samples: &[SpectralSamples<T>],
    grid: &QuadGrid<T>,
) -> Result<Vec<NodeField<CMatrix<T>>>> {
    consistent(
        samples
            .iter()
            .map(|s| from_g_single(s, grid))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Coefficients `A_0..A_J` from `F_0..F_J` sampled at several λ.
pub fn reconstruct_from_f<T: Real>(
    samples: &[SpectralSamples<T>],
    grid: &QuadGrid<T>,
) -> Result<Vec<NodeField<CMatrix<T>>>> {
    consistent(
        samples
            .iter()
            .map(|s| from_f_single(s, grid))
            .collect::<Result<Vec<_>>>()?,
    )
}
