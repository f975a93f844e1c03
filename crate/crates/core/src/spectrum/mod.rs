//! Spectral components `σ_j = {λ : det G_j(λ, k_j) = 0 for some k_j}`.
//!
//! `σ_0` comes straight from the characteristic roots of `A_0(k)`. For
//! `j >= 1` and each tail point `k_j` the real λ-window is cut down by the
//! projections of the inner components at that tail, and the remaining
//! intervals are scanned: sign changes of `F_j` (scalar self-adjoint case)
//! or of `det G_j` are bisected, and for `M > 1` local minima of `|det G_j|`
//! are polished as well. Roots are kept only when `|det| < root_tol`.

pub mod hull;
pub mod roots;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::cfrac::{ContinuedFraction, TopState, DEFAULT_MARGIN};
use crate::error::Result;
use crate::operator::{OperatorSpec, PROBE_POINTS};
use crate::quadrature::QuadGrid;
use crate::scalar::{lit, to_f64, Real};

pub use hull::{Interval, UniformGrid};

pub const DEFAULT_SCAN: usize = 2000;
pub const DEFAULT_KPOINTS: usize = 128;
pub const ROOT_TOL: f64 = 1e-9;

/// Fewest scan points in any exclusion-free interval.
const MIN_SCAN: usize = 16;

/// Sampled local extrema polished per projected branch.
const POLISH_STARTS: usize = 8;

/// Which determinant locates the roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetKind {
    G,
    Gbar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Characteristic roots of `A_0(k)`.
    Direct,
    /// Sign-change bisection on the scalar `F_j`.
    Bisection,
    /// Sign changes and minima of `det G_j`.
    DetScan,
}

#[derive(Debug, Clone)]
pub struct SpectrumOptions<T> {
    /// Uniform points per k-axis.
    pub k_points: usize,
    /// Real λ-window; by default `[-B_j - 1, B_j + 1]` with `B_j` a norm
    /// bound of the operator truncated after level `j`.
    pub window: Option<(T, T)>,
    /// Scan points per window.
    pub scan: usize,
    pub margin: T,
    pub root_tol: T,
    pub det: DetKind,
    /// Confirm each `M > 1` root by a winding number on a small circle.
    pub verify_winding: bool,
}

impl<T: Real> Default for SpectrumOptions<T> {
    fn default() -> Self {
        SpectrumOptions {
            k_points: DEFAULT_KPOINTS,
            window: None,
            scan: DEFAULT_SCAN,
            margin: lit(DEFAULT_MARGIN),
            root_tol: lit(ROOT_TOL),
            det: DetKind::G,
            verify_winding: false,
        }
    }
}

/// Scan record of one exclusion-free interval.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalScan {
    pub lo: f64,
    pub hi: f64,
    pub scan_points: usize,
    pub failed_points: usize,
    /// Brackets with a sign change of the scanned function.
    pub sign_changes: usize,
    /// Brackets whose bisection limit failed the `|det|` test (poles).
    pub rejected: usize,
    pub roots: usize,
}

/// Roots at one tail point.
#[derive(Debug, Clone)]
pub struct PointRoots<T> {
    pub roots: Vec<Complex<T>>,
    /// Final bisection bracket per root (`None` for minimum-polished roots).
    pub brackets: Vec<Option<(T, T)>>,
    /// Winding numbers when verification is enabled.
    pub winding: Vec<Option<i64>>,
    pub intervals: Vec<IntervalScan>,
    pub exclusion: Vec<Interval<T>>,
}

/// Values of one branch index over the k-grid.
#[derive(Debug, Clone)]
pub struct DispersionBranch<T> {
    pub level: usize,
    pub index: usize,
    pub values: Vec<Option<Complex<T>>>,
}

#[derive(Debug, Clone)]
pub struct SpectralComponent<T> {
    pub level: usize,
    pub grid: UniformGrid,
    pub method: Method,
    /// Roots per grid point, ascending by real part.
    pub roots: Vec<Vec<Complex<T>>>,
    pub hull: Vec<Interval<T>>,
    /// Scan records per grid point (empty for `σ_0`).
    pub scans: Vec<Vec<IntervalScan>>,
    /// Smallest distance of a root to the sampled inner projections.
    pub margin: Option<T>,
    pub failed_points: usize,
}

impl<T: Real> SpectralComponent<T> {
    /// Branch `b` is the `b`-th root in ascending order at each point.
    pub fn branches(&self) -> Vec<DispersionBranch<T>> {
        let count = self.roots.iter().map(Vec::len).max().unwrap_or(0);
        (0..count)
            .map(|b| DispersionBranch {
                level: self.level,
                index: b,
                values: self.roots.iter().map(|r| r.get(b).copied()).collect(),
            })
            .collect()
    }

    pub fn real_values(&self) -> Vec<Vec<T>> {
        self.roots.iter().map(|r| r.iter().map(|z| z.re).collect()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.iter().all(Vec::is_empty)
    }
}

/// Compass search for a local minimum of `f` on the unit box, starting
/// from `x` with value `fx`. Failed evaluations count as no improvement.
fn compass_min<T: Real>(f: impl Fn(&[T]) -> Option<T>, mut x: Vec<T>, step: T, mut fx: T) -> T {
    let mut h = step;
    let stop = lit::<T>(1e-13);
    while h > stop {
        let mut improved = false;
        for a in 0..x.len() {
            for dir in [h, -h] {
                let mut y = x.clone();
                y[a] = (y[a] + dir).max(T::zero()).min(T::one());
                if let Some(fy) = f(&y) {
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            h = h / lit(2.0);
        }
    }
    fx
}

/// Spectral computations for one operator on one quadrature grid.
pub struct SpectrumSolver<'a, T> {
    spec: &'a OperatorSpec<T>,
    grid: &'a QuadGrid<T>,
    opts: SpectrumOptions<T>,
    self_adjoint: bool,
    bounds: Vec<T>,
}

impl<'a, T: Real> SpectrumSolver<'a, T> {
    pub fn new(spec: &'a OperatorSpec<T>, grid: &'a QuadGrid<T>, opts: SpectrumOptions<T>) -> Result<Self> {
        let self_adjoint = spec.is_self_adjoint(PROBE_POINTS)?;
        let bounds = (0..=spec.n())
            .map(|j| spec.norm_bound(j, PROBE_POINTS))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectrumSolver {
            spec,
            grid,
            opts,
            self_adjoint,
            bounds,
        })
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn options(&self) -> &SpectrumOptions<T> {
        &self.opts
    }

    fn scalar_path(&self) -> bool {
        self.self_adjoint && self.spec.m() == 1
    }

    pub fn window(&self, level: usize) -> Interval<T> {
        match self.opts.window {
            Some((a, b)) => Interval::new(a, b),
            None => {
                let b = self.bounds[level] + T::one();
                Interval::new(-b, b)
            }
        }
    }

    /// Uniform grid over the tail coordinates of level `j`.
    pub fn tail_grid(&self, level: usize) -> UniformGrid {
        UniformGrid::new(self.spec.n() - level, self.opts.k_points)
    }

    /// Characteristic roots of `A_0(k)`; real for self-adjoint operators.
    pub fn sigma0_roots(&self, k: &[T]) -> Result<Vec<Complex<T>>> {
        let a = self.spec.eval_coeff(0, k)?;
        let mut r = roots::char_roots(&a);
        if self.self_adjoint {
            for z in &mut r {
                z.im = T::zero();
            }
            r.sort_by(|x, y| x.re.partial_cmp(&y.re).expect("finite roots"));
        }
        Ok(r)
    }

    pub fn sigma0(&self) -> Result<SpectralComponent<T>> {
        let grid = self.tail_grid(0);
        let roots: Vec<Vec<Complex<T>>> = (0..grid.len())
            .into_par_iter()
            .map(|i| self.sigma0_roots(&grid.point::<T>(i)))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_>>()?;
        let values: Vec<Vec<T>> = roots.iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
        Ok(SpectralComponent {
            level: 0,
            grid,
            method: Method::Direct,
            hull: hull::hull(grid, &values),
            roots,
            scans: Vec::new(),
            margin: None,
            failed_points: 0,
        })
    }

    /// Real parts of `σ_r` on the slice of its grid whose trailing
    /// coordinates are the tail point `t_idx` of level `j`.
    fn slice_of(inner: &SpectralComponent<T>, j: usize, t_idx: usize) -> (UniformGrid, Vec<Vec<T>>) {
        let d = j - inner.level;
        let g = UniformGrid::new(d, inner.grid.points);
        let start = t_idx * g.len();
        let vals = inner.roots[start..start + g.len()]
            .iter()
            .map(|r| r.iter().map(|z| z.re).collect())
            .collect();
        (g, vals)
    }

    /// Exclusion set and raw projection samples at tail point `t_idx` of
    /// level `j`, from already computed inner components.
    fn exclusion_from(&self, j: usize, t_idx: usize, inner: &[SpectralComponent<T>]) -> (Vec<Interval<T>>, Vec<T>) {
        let mut ex = Vec::new();
        let mut samples = Vec::new();
        let tail = self.tail_grid(j).point::<T>(t_idx);
        for comp in &inner[..j] {
            let (g, vals) = Self::slice_of(comp, j, t_idx);
            ex.extend(self.projection(comp.level, g, &vals, &tail));
            samples.extend(vals.into_iter().flatten());
        }
        (hull::merge(ex), samples)
    }

    /// Exclusion intervals from the sampled slice of `σ_r` through `tail`.
    /// Sorted roots of a Hermitian `A_0` are continuous in `k`, so each
    /// branch projects onto `[min, max]`; both are polished from every
    /// sampled local extremum. Other components are covered conservatively.
    fn projection(&self, r: usize, g: UniformGrid, vals: &[Vec<T>], tail: &[T]) -> Vec<Interval<T>> {
        let pad = self.opts.margin;
        let m = self.spec.m();
        if r != 0 || !self.self_adjoint || vals.iter().any(|v| v.len() != m) {
            return hull::cover(g, vals, pad);
        }
        let step = T::one() / lit::<T>((g.points.max(2) - 1) as f64);
        let mut out = Vec::with_capacity(m);
        for b in 0..m {
            let branch = |k: &[T]| -> Option<T> {
                let mut full = k.to_vec();
                full.extend_from_slice(tail);
                self.sigma0_roots(&full).ok().map(|r| r[b].re)
            };
            let by = |sign: T| {
                let mut starts: Vec<usize> = (0..vals.len())
                    .filter(|&i| g.neighbours(i).iter().all(|&n| sign * vals[i][b] <= sign * vals[n][b]))
                    .collect();
                starts.sort_by(|&x, &y| {
                    (sign * vals[x][b])
                        .partial_cmp(&(sign * vals[y][b]))
                        .expect("finite roots")
                });
                starts
                    .into_iter()
                    .take(POLISH_STARTS)
                    .map(|i| {
                        compass_min(
                            |k| branch(k).map(|v| sign * v),
                            g.point::<T>(i),
                            step,
                            sign * vals[i][b],
                        )
                    })
                    .fold(T::infinity(), T::min)
                    * sign
            };
            out.push(Interval::new(by(T::one()) - pad, by(-T::one()) + pad));
        }
        out
    }

    /// Exclusion set at an arbitrary tail point, sampling the inner
    /// components on the uniform slice through it.
    pub fn exclusion_at(&self, j: usize, tail: &[T]) -> Result<(Vec<Interval<T>>, Vec<T>)> {
        let mut ex = Vec::new();
        let mut samples = Vec::new();
        for r in 0..j {
            let g = UniformGrid::new(j - r, self.opts.k_points);
            let mut vals = Vec::with_capacity(g.len());
            for idx in 0..g.len() {
                let mut k = g.point::<T>(idx);
                k.extend_from_slice(tail);
                let roots = if r == 0 {
                    self.sigma0_roots(&k)?
                } else {
                    let (exr, _) = self.exclusion_at(r, &k)?;
                    self.roots_at(r, &k, exr)?.roots
                };
                vals.push(roots.iter().map(|z| z.re).collect::<Vec<_>>());
            }
            ex.extend(self.projection(r, g, &vals, tail));
            samples.extend(vals.into_iter().flatten());
        }
        Ok((hull::merge(ex), samples))
    }

    /// Roots of `det G_j(·, tail)` in the window minus `exclusion`.
    pub fn roots_at(&self, j: usize, tail: &[T], exclusion: Vec<Interval<T>>) -> Result<PointRoots<T>> {
        let cf = ContinuedFraction::new(self.spec, j, tail, self.grid)?.with_margin(self.opts.margin);
        let allowed = hull::subtract(self.window(j), &exclusion);
        let win_len = self.window(j).len();
        let scalar = self.scalar_path();
        let det_of = |s: &TopState<T>| match self.opts.det {
            DetKind::G => s.det_g,
            DetKind::Gbar => s.det_gbar,
        };
        let eval = |x: T| cf.top(Complex::new(x, T::zero())).ok();
        // Scanned function: F_j in the scalar case, Re det otherwise.
        let phi = |s: &TopState<T>| -> Option<T> {
            if scalar {
                s.f.as_ref().map(|f| f[(0, 0)].re)
            } else {
                Some(det_of(s).re)
            }
        };

        let mut out = PointRoots {
            roots: Vec::new(),
            brackets: Vec::new(),
            winding: Vec::new(),
            intervals: Vec::new(),
            exclusion,
        };
        for iv in allowed {
            if iv.len() <= T::zero() {
                continue;
            }
            let share = to_f64(iv.len() / win_len) * self.opts.scan as f64;
            let n = (share.ceil() as usize).max(MIN_SCAN);
            let xs: Vec<T> = (0..=n)
                .map(|i| iv.lo + iv.len() * lit::<T>(i as f64) / lit::<T>(n as f64))
                .collect();
            let states: Vec<Option<TopState<T>>> = xs.iter().map(|&x| eval(x)).collect();
            let vals: Vec<Option<T>> = states.iter().map(|s| s.as_ref().and_then(phi)).collect();
            let mut rec = IntervalScan {
                lo: to_f64(iv.lo),
                hi: to_f64(iv.hi),
                scan_points: xs.len(),
                failed_points: vals.iter().filter(|v| v.is_none()).count(),
                sign_changes: 0,
                rejected: 0,
                roots: 0,
            };
            let mut found: Vec<(T, Option<(T, T)>)> = Vec::new();
            let accept = |x: T| -> bool { eval(x).is_some_and(|s| det_of(&s).norm() < self.opts.root_tol) };
            for i in 0..n {
                let (Some(fa), Some(fb)) = (vals[i], vals[i + 1]) else {
                    continue;
                };
                if fa == T::zero() {
                    if accept(xs[i]) && !found.iter().any(|r| r.0 == xs[i]) {
                        found.push((xs[i], Some((xs[i], xs[i]))));
                    }
                    continue;
                }
                if (fa > T::zero()) == (fb > T::zero()) {
                    continue;
                }
                if fb == T::zero() {
                    continue;
                }
                rec.sign_changes += 1;
                let b = roots::bisect(|x| eval(x).as_ref().and_then(phi), xs[i], fa, xs[i + 1]);
                match b {
                    Some(b) if accept(b.root) => found.push((b.root, Some((b.lo, b.hi)))),
                    _ => rec.rejected += 1,
                }
            }
            if !scalar {
                let mags: Vec<Option<T>> = states.iter().map(|s| s.as_ref().map(|s| det_of(s).norm())).collect();
                for i in 1..n {
                    let (Some(l), Some(c), Some(r)) = (mags[i - 1], mags[i], mags[i + 1]) else {
                        continue;
                    };
                    if !(c < l && c <= r) {
                        continue;
                    }
                    let near = |x: T| found.iter().any(|(y, _)| (*y - x).abs() <= xs[i + 1] - xs[i - 1]);
                    let polished = roots::golden_min(|x| eval(x).map(|s| det_of(&s).norm()), xs[i - 1], xs[i + 1]);
                    if let Some((x, v)) = polished {
                        if v < self.opts.root_tol && !near(x) {
                            found.push((x, None));
                        }
                    }
                }
            }
            found.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite roots"));
            rec.roots = found.len();
            for (x, br) in found {
                out.roots.push(Complex::new(x, T::zero()));
                out.brackets.push(br);
                out.winding.push(if self.opts.verify_winding && !scalar {
                    self.winding_at(&cf, x, &out.exclusion)
                } else {
                    None
                });
            }
            out.intervals.push(rec);
        }
        Ok(out)
    }

    fn winding_at(&self, cf: &ContinuedFraction<'_, T>, x: T, exclusion: &[Interval<T>]) -> Option<i64> {
        let room = hull::distance(x, exclusion);
        let radius = (room * lit(0.5)).min(lit(1e-3));
        let kind = self.opts.det;
        roots::winding_number(
            |z| {
                cf.top(z).ok().map(|s| match kind {
                    DetKind::G => s.det_g,
                    DetKind::Gbar => s.det_gbar,
                })
            },
            Complex::new(x, T::zero()),
            radius,
        )
    }

    /// `σ_j` for `1 <= j <= N` given `σ_0..σ_{j-1}` on the same k-grid.
    pub fn sigma_j(&self, j: usize, inner: &[SpectralComponent<T>]) -> Result<SpectralComponent<T>> {
        let grid = self.tail_grid(j);
        let results: Vec<(PointRoots<T>, Vec<T>)> = (0..grid.len())
            .into_par_iter()
            .map(|t| {
                let (ex, samples) = self.exclusion_from(j, t, inner);
                let tail = grid.point::<T>(t);
                self.roots_at(j, &tail, ex).map(|p| (p, samples))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_>>()?;
        let mut margin: Option<T> = None;
        let mut roots = Vec::with_capacity(results.len());
        let mut scans = Vec::with_capacity(results.len());
        let mut failed = 0;
        for (p, samples) in results {
            for z in &p.roots {
                let d = samples.iter().map(|&s| (s - z.re).abs()).fold(T::infinity(), T::min);
                margin = Some(margin.map_or(d, |m: T| m.min(d)));
            }
            failed += p.intervals.iter().map(|s| s.failed_points).sum::<usize>();
            roots.push(p.roots);
            scans.push(p.intervals);
        }
        let values: Vec<Vec<T>> = roots
            .iter()
            .map(|r: &Vec<Complex<T>>| r.iter().map(|z| z.re).collect())
            .collect();
        Ok(SpectralComponent {
            level: j,
            grid,
            method: if self.scalar_path() {
                Method::Bisection
            } else {
                Method::DetScan
            },
            hull: hull::hull(grid, &values),
            roots,
            scans,
            margin,
            failed_points: failed,
        })
    }

    /// `σ_0, ..., σ_N`.
    pub fn full_spectrum(&self) -> Result<Vec<SpectralComponent<T>>> {
        let mut comps = vec![self.sigma0()?];
        for j in 1..=self.spec.n() {
            let c = self.sigma_j(j, &comps)?;
            comps.push(c);
        }
        Ok(comps)
    }

    /// Roots at a single tail point, with the exclusion sampled through it.
    pub fn roots_at_tail(&self, j: usize, tail: &[T]) -> Result<PointRoots<T>> {
        if j == 0 {
            let r = self.sigma0_roots(tail)?;
            return Ok(PointRoots {
                brackets: vec![None; r.len()],
                winding: vec![None; r.len()],
                roots: r,
                intervals: Vec::new(),
                exclusion: Vec::new(),
            });
        }
        let (ex, _) = self.exclusion_at(j, tail)?;
        self.roots_at(j, tail, ex)
    }
}

/// Eigenvalues `σ_N` in the gaps of the continuous spectrum.
pub fn sigma_n_eigenvalues<T: Real>(
    spec: &OperatorSpec<T>,
    grid: &QuadGrid<T>,
    opts: SpectrumOptions<T>,
) -> Result<Vec<T>> {
    let solver = SpectrumSolver::new(spec, grid, opts)?;
    let comps = solver.full_spectrum()?;
    Ok(comps[spec.n()].roots[0].iter().map(|z| z.re).collect())
}
