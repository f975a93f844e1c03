//! Matrix-valued integral continued fractions
//! `F_0 = A_0 - λI`, `F_j = A_j + <F_{j-1}^{-1}>_j^{-1}` and the matrices
//! `G_j = I + <F_{j-1}^{-1}>_j A_j`, `Ḡ_j = I + A_j <F_{j-1}^{-1}>_j` whose
//! determinants locate the spectral components.
//!
//! A [`ContinuedFraction`] fixes a level `J` and the tail `k_{J+1..N}`, then
//! samples every `A_r`, `r <= J`, once on the sub-grid of quadrature nodes
//! for `k_{r+1..J}`. Each evaluation at a new λ is one pass over the tensor
//! grid, reducing level by level.

mod ecd;
mod reconstruct;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{lu_det_inv, CMatrix};
use crate::operator::OperatorSpec;
use crate::quadrature::{weighted_sum, KPoint, NodeField, QuadGrid};
use crate::scalar::{lit, to_f64, Real};

pub use ecd::{cf_eval_via_ecd, EcdState};
pub use reconstruct::{reconstruct_from_f, reconstruct_from_g, SpectralSamples};

/// Default exclusion margin δ in λ.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Node counts at or above which per-line work is spread over threads.
const PAR_LINES: usize = 16;
const PAR_NODES: usize = 2048;

pub fn proximity<T: Real>(level: usize, lambda: Complex<T>, rcond: T) -> Error {
    Error::SpectralProximity {
        level,
        lambda_re: to_f64(lambda.re),
        lambda_im: to_f64(lambda.im),
        rcond: to_f64(rcond),
    }
}

/// Invert an inner matrix, refusing it when singular or when its inverse
/// is so large that λ is within `margin` of an inner component.
fn invert_inner<T: Real>(x: &CMatrix<T>, level: usize, lambda: Complex<T>, margin: T) -> Result<(CMatrix<T>, T)> {
    let r = lu_det_inv(x);
    match r.inv {
        Some(inv) if T::one() >= margin * inv.norm1() => Ok((inv, r.rcond)),
        _ => Err(proximity(level, lambda, r.rcond)),
    }
}

/// Run `f` over `0..count`, in parallel when large, returning the results
/// in index order and the first error by index.
pub(crate) fn ordered_map<R: Send>(
    count: usize,
    parallel: bool,
    f: impl Fn(usize) -> Result<R> + Sync + Send,
) -> Result<Vec<R>> {
    let out: Vec<Result<R>> = if parallel && count > 1 {
        (0..count).into_par_iter().map(&f).collect()
    } else {
        (0..count).map(&f).collect()
    };
    out.into_iter().collect()
}

/// Samples of `A_r` on the nodes of `k_{r+1..level}` with the tail fixed.
pub fn sample_coefficients<T: Real>(
    spec: &OperatorSpec<T>,
    level: usize,
    tail: &[T],
    grid: &QuadGrid<T>,
) -> Result<Vec<NodeField<CMatrix<T>>>> {
    if level > spec.n() {
        return Err(Error::Dimension(format!("level {level} exceeds N = {}", spec.n())));
    }
    if tail.len() != spec.n() - level {
        return Err(Error::Dimension(format!(
            "level {level} needs {} tail coordinates, got {}",
            spec.n() - level,
            tail.len()
        )));
    }
    (0..=level)
        .map(|r| {
            let dims = level - r;
            let count = grid.len(dims);
            let data = ordered_map(count, count >= PAR_NODES, |idx| {
                let mut k = grid.point(idx, dims);
                k.extend_from_slice(tail);
                spec.eval_coeff(r, &k)
            })?;
            Ok(NodeField::new(grid.q(), dims, data))
        })
        .collect()
}

/// Values at the top level of one evaluation.
#[derive(Debug, Clone)]
pub struct TopState<T> {
    pub lambda: Complex<T>,
    pub level: usize,
    /// `F_J`; absent when `<F_{J-1}^{-1}>_J` is singular.
    pub f: Option<CMatrix<T>>,
    /// `<F_{J-1}^{-1}>_J` for `J >= 1`.
    pub mean: Option<CMatrix<T>>,
    pub g: CMatrix<T>,
    pub gbar: CMatrix<T>,
    pub det_g: Complex<T>,
    pub det_gbar: Complex<T>,
    /// Smallest reciprocal condition number among inner inversions.
    pub rcond_min: T,
}

/// All quantities of one level `r` on the nodes of `k_{r+1..J}`.
#[derive(Debug, Clone)]
pub struct LevelState<T> {
    pub a: NodeField<CMatrix<T>>,
    pub f: NodeField<CMatrix<T>>,
    /// Missing only at the top level, where `F_J` may be singular.
    pub f_inv: Option<NodeField<CMatrix<T>>>,
    /// `<F_{r-1}^{-1}>_r`, for `r >= 1`.
    pub mean: Option<NodeField<CMatrix<T>>>,
    pub g: NodeField<CMatrix<T>>,
    pub gbar: NodeField<CMatrix<T>>,
}

/// Resolvent kernels on the full node grid of `k_1..k_J`:
/// `D_r = (G_0...G_r)^{-1}` and `H_{r+1} = (Ḡ_r...Ḡ_0)^{-1}`.
#[derive(Debug, Clone)]
pub struct Kernels<T> {
    d: Vec<NodeField<CMatrix<T>>>,
    h: Vec<NodeField<CMatrix<T>>>,
}

impl<T> Kernels<T> {
    /// `D_r`, `0 <= r <= J`.
    pub fn d(&self, r: usize) -> &NodeField<CMatrix<T>> {
        &self.d[r]
    }

    /// `H_r`, `1 <= r <= J + 1`.
    pub fn h(&self, r: usize) -> &NodeField<CMatrix<T>> {
        &self.h[r - 1]
    }
}

/// The continued-fraction stack at `(λ, k_tail)`.
#[derive(Debug, Clone)]
pub struct CFState<T> {
    pub lambda: Complex<T>,
    pub k_tail: Vec<T>,
    pub levels: Vec<LevelState<T>>,
    /// Absent when some `G_r` is singular.
    pub kernels: Option<Kernels<T>>,
    pub rcond_min: T,
}

impl<T: Real> CFState<T> {
    pub fn level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn top_g(&self) -> &CMatrix<T> {
        &self.levels[self.level()].g.values()[0]
    }

    pub fn top_gbar(&self) -> &CMatrix<T> {
        &self.levels[self.level()].gbar.values()[0]
    }

    pub fn top_f(&self) -> &CMatrix<T> {
        &self.levels[self.level()].f.values()[0]
    }
}

/// A continued fraction at fixed level and tail, ready to be evaluated at
/// many λ.
#[derive(Debug, Clone)]
pub struct ContinuedFraction<'g, T> {
    grid: &'g QuadGrid<T>,
    tail: Vec<T>,
    a: Vec<NodeField<CMatrix<T>>>,
    margin: T,
}

impl<'g, T: Real> ContinuedFraction<'g, T> {
    pub fn new(spec: &OperatorSpec<T>, level: usize, tail: &[T], grid: &'g QuadGrid<T>) -> Result<Self> {
        let a = sample_coefficients(spec, level, tail, grid)?;
        Ok(ContinuedFraction {
            grid,
            tail: tail.to_vec(),
            a,
            margin: lit(DEFAULT_MARGIN),
        })
    }

    pub fn with_margin(mut self, margin: T) -> Self {
        self.margin = margin;
        self
    }

    pub fn level(&self) -> usize {
        self.a.len() - 1
    }

    pub fn tail(&self) -> &[T] {
        &self.tail
    }

    pub fn grid(&self) -> &QuadGrid<T> {
        self.grid
    }

    /// Samples of `A_r` on the nodes of `k_{r+1..J}`.
    pub fn coefficient_field(&self, r: usize) -> &NodeField<CMatrix<T>> {
        &self.a[r]
    }

    fn m(&self) -> usize {
        self.a[0].values()[0].rows()
    }

    /// `F_r` at node `idx` of level `r`, given `<F_{r-1}^{-1}>_r` there.
    fn f_at(&self, r: usize, idx: usize, mean: Option<&CMatrix<T>>, lambda: Complex<T>) -> Result<CMatrix<T>> {
        let a = &self.a[r].values()[idx];
        match mean {
            None => Ok(a - &CMatrix::scalar(a.rows(), lambda)),
            Some(m) => {
                let r_inv = lu_det_inv(m);
                let inv = r_inv.inv.ok_or_else(|| proximity(r, lambda, r_inv.rcond))?;
                Ok(a + &inv)
            }
        }
    }

    /// `<F_r^{-1}>_{r+1}` on the nodes of `k_{r+2..J}` from the means of
    /// the level below.
    fn reduce(&self, r: usize, mean: Option<&[CMatrix<T>]>, lambda: Complex<T>) -> Result<(Vec<CMatrix<T>>, T)> {
        let q = self.grid.q();
        let lines = self.grid.len(self.level() - r - 1);
        let parts = ordered_map(lines, lines >= PAR_LINES, |l| {
            let mut inv_line = Vec::with_capacity(q);
            let mut rc = T::one();
            for i in 0..q {
                let idx = l * q + i;
                let f = self.f_at(r, idx, mean.map(|m| &m[idx]), lambda)?;
                let (inv, rcond) = invert_inner(&f, r, lambda, self.margin)?;
                rc = rc.min(rcond);
                inv_line.push(inv);
            }
            Ok((weighted_sum(self.grid.weights(), &inv_line), rc))
        })?;
        let rc = parts.iter().fold(T::one(), |m, p| m.min(p.1));
        Ok((parts.into_iter().map(|p| p.0).collect(), rc))
    }

    /// Top-level quantities only; memory stays at one level of means.
    pub fn top(&self, lambda: Complex<T>) -> Result<TopState<T>> {
        let j = self.level();
        let mut mean: Option<Vec<CMatrix<T>>> = None;
        let mut rcond_min = T::one();
        for r in 0..j {
            let (next, rc) = self.reduce(r, mean.as_deref(), lambda)?;
            rcond_min = rcond_min.min(rc);
            mean = Some(next);
        }
        let a = &self.a[j].values()[0];
        let m = self.m();
        let id = CMatrix::identity(m);
        let (f, mean, g, gbar) = match mean {
            None => {
                let f = a - &CMatrix::scalar(m, lambda);
                (Some(f.clone()), None, f.clone(), f)
            }
            Some(mut v) => {
                let mj = v.pop().expect("one node at the top level");
                let g = &id + &(&mj * a);
                let gbar = &id + &(a * &mj);
                let f = lu_det_inv(&mj).inv.map(|inv| a + &inv);
                (f, Some(mj), g, gbar)
            }
        };
        Ok(TopState {
            lambda,
            level: j,
            det_g: lu_det_inv(&g).det,
            det_gbar: lu_det_inv(&gbar).det,
            f,
            mean,
            g,
            gbar,
            rcond_min,
        })
    }

    /// Every level on its node grid, plus the resolvent kernels when all
    /// `G_r` are invertible.
    pub fn state(&self, lambda: Complex<T>) -> Result<CFState<T>> {
        let j = self.level();
        let q = self.grid.q();
        let m = self.m();
        let id = CMatrix::identity(m);
        let mut levels: Vec<LevelState<T>> = Vec::with_capacity(j + 1);
        let mut rcond_min = T::one();
        let mut mean: Option<NodeField<CMatrix<T>>> = None;
        for r in 0..=j {
            let dims = j - r;
            let count = self.grid.len(dims);
            let a = self.a[r].clone();
            let f_vals = ordered_map(count, count >= PAR_NODES, |idx| {
                self.f_at(r, idx, mean.as_ref().map(|f| &f.values()[idx]), lambda)
            })?;
            let f_inv = if r < j {
                let inv = ordered_map(count, count >= PAR_NODES, |idx| {
                    invert_inner(&f_vals[idx], r, lambda, self.margin)
                })?;
                rcond_min = inv.iter().fold(rcond_min, |acc, p| acc.min(p.1));
                Some(NodeField::new(q, dims, inv.into_iter().map(|p| p.0).collect()))
            } else {
                lu_det_inv(&f_vals[0]).inv.map(|inv| NodeField::new(q, dims, vec![inv]))
            };
            let f = NodeField::new(q, dims, f_vals);
            let (g, gbar) = match &mean {
                None => (f.clone(), f.clone()),
                Some(mf) => {
                    let g = (0..count).map(|i| &id + &(&mf.values()[i] * &a.values()[i])).collect();
                    let gbar = (0..count).map(|i| &id + &(&a.values()[i] * &mf.values()[i])).collect();
                    (NodeField::new(q, dims, g), NodeField::new(q, dims, gbar))
                }
            };
            let next = f_inv.as_ref().filter(|_| r < j).map(|fi| fi.mean_axis1(self.grid));
            levels.push(LevelState {
                a,
                f,
                f_inv,
                mean: mean.take(),
                g,
                gbar,
            });
            mean = next;
        }
        let kernels = self.kernels(&levels);
        Ok(CFState {
            lambda,
            k_tail: self.tail.clone(),
            levels,
            kernels,
            rcond_min,
        })
    }

    fn kernels(&self, levels: &[LevelState<T>]) -> Option<Kernels<T>> {
        let j = self.level();
        let q = self.grid.q();
        let count = self.grid.len(j);
        let inv_field = |f: &NodeField<CMatrix<T>>| -> Option<NodeField<CMatrix<T>>> {
            let vals: Option<Vec<_>> = f.values().iter().map(|x| lu_det_inv(x).inv).collect();
            vals.map(|v| NodeField::new(q, f.dims(), v))
        };
        let f0_inv = levels[0].f_inv.clone().or_else(|| inv_field(&levels[0].f))?;
        let mut d = vec![f0_inv.clone()];
        let mut h = vec![f0_inv];
        for r in 1..=j {
            let g_inv = inv_field(&levels[r].g)?;
            let gbar_inv = inv_field(&levels[r].gbar)?;
            let prev_d = &d[r - 1];
            let prev_h = &h[r - 1];
            let dv = (0..count)
                .map(|i| g_inv.broadcast(i, j) * &prev_d.values()[i])
                .collect();
            let hv = (0..count)
                .map(|i| &prev_h.values()[i] * gbar_inv.broadcast(i, j))
                .collect();
            d.push(NodeField::new(q, j, dv));
            h.push(NodeField::new(q, j, hv));
        }
        Some(Kernels { d, h })
    }
}

/// Evaluate the continued fraction of `spec` at level `j`.
pub fn cf_eval<T: Real>(
    spec: &OperatorSpec<T>,
    level: usize,
    lambda: Complex<T>,
    k_tail: &KPoint<T>,
    grid: &QuadGrid<T>,
) -> Result<CFState<T>> {
    ContinuedFraction::new(spec, level, k_tail.coords(), grid)?.state(lambda)
}

#[cfg(test)]
mod tests;
