//! The operator and its resolvent acting on functions sampled at the
//! tensor quadrature nodes. Partial means are exact quadrature sums over
//! the leading axes, so the discrete resolvent inverts the discrete
//! operator.

use num_complex::Complex;

use crate::cfrac::{cf_eval_via_ecd, proximity, sample_coefficients, ContinuedFraction, EcdState, Kernels};
use crate::error::{Error, Result};
use crate::expr::MatrixExpr;
use crate::linalg::CMatrix;
use crate::operator::OperatorSpec;
use crate::quadrature::{weighted_sum_vec, KPoint, NodeField, QuadGrid};
use crate::scalar::{lit, Real};
use crate::spectrum::SpectralComponent;

/// `u : [0,1]^N -> C^M` sampled on the quadrature nodes (axis 1 fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    dims: usize,
    m: usize,
    q: usize,
    values: Vec<Vec<Complex<T>>>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(dims: usize, m: usize, q: usize, values: Vec<Vec<Complex<T>>>) -> Result<Self> {
        if values.len() != q.pow(dims as u32) || values.iter().any(|v| v.len() != m) {
            return Err(Error::Dimension(format!(
                "grid function needs {} nodes of {m} components",
                q.pow(dims as u32)
            )));
        }
        Ok(GridFunction { dims, m, q, values })
    }

    pub fn zeros(dims: usize, m: usize, q: usize) -> Self {
        GridFunction {
            dims,
            m,
            q,
            values: vec![vec![Complex::new(T::zero(), T::zero()); m]; q.pow(dims as u32)],
        }
    }

    pub fn from_fn(
        grid: &QuadGrid<T>,
        dims: usize,
        m: usize,
        mut f: impl FnMut(&[T]) -> Result<Vec<Complex<T>>>,
    ) -> Result<Self> {
        let values = (0..grid.len(dims))
            .map(|i| f(&grid.point(i, dims)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, m, grid.q(), values)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn values(&self) -> &[Vec<Complex<T>>] {
        &self.values
    }

    fn check_grid(&self, grid: &QuadGrid<T>) -> Result<()> {
        if grid.q() != self.q {
            return Err(Error::Dimension(format!(
                "grid function on {} nodes per axis, grid has {}",
                self.q,
                grid.q()
            )));
        }
        Ok(())
    }

    /// `<u>_{1..r}`, a function of the remaining `dims - r` coordinates.
    pub fn mean_leading(&self, r: usize, grid: &QuadGrid<T>) -> GridFunction<T> {
        let mut vals = self.values.clone();
        for _ in 0..r {
            vals = vals
                .chunks(self.q)
                .map(|line| weighted_sum_vec(grid.weights(), line))
                .collect();
        }
        GridFunction {
            dims: self.dims - r,
            m: self.m,
            q: self.q,
            values: vals,
        }
    }

    /// `Σ_nodes W |u|^2` with the tensor weights, square-rooted.
    pub fn norm(&self, grid: &QuadGrid<T>) -> T {
        let sq = GridFunction {
            dims: self.dims,
            m: 1,
            q: self.q,
            values: self
                .values
                .iter()
                .map(|v| {
                    vec![Complex::new(
                        v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()),
                        T::zero(),
                    )]
                })
                .collect(),
        };
        sq.mean_leading(self.dims, grid).values[0][0].re.sqrt()
    }

    /// `<u, v> = ∫ u^* v`.
    pub fn inner(&self, other: &GridFunction<T>, grid: &QuadGrid<T>) -> Complex<T> {
        let prod = GridFunction {
            dims: self.dims,
            m: 1,
            q: self.q,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| {
                    vec![a
                        .iter()
                        .zip(b)
                        .fold(Complex::new(T::zero(), T::zero()), |s, (x, y)| s + x.conj() * y)]
                })
                .collect(),
        };
        prod.mean_leading(self.dims, grid).values[0][0]
    }

    /// `self + z * other`.
    pub fn axpy(&self, z: Complex<T>, other: &GridFunction<T>) -> GridFunction<T> {
        GridFunction {
            dims: self.dims,
            m: self.m,
            q: self.q,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x + z * y).collect())
                .collect(),
        }
    }
}

fn field_apply<T: Real>(field: &NodeField<CMatrix<T>>, u: &GridFunction<T>, dims_full: usize) -> Vec<Vec<Complex<T>>> {
    (0..u.values.len())
        .map(|i| field.broadcast(i, dims_full).mul_vec(&u.values[i]))
        .collect()
}

/// `(𝒜u)(k) = A_0(k) u(k) + Σ_j A_j(k_j) <u>_{1..j}(k_j)`.
pub fn apply_operator<T: Real>(
    spec: &OperatorSpec<T>,
    u: &GridFunction<T>,
    grid: &QuadGrid<T>,
) -> Result<GridFunction<T>> {
    if u.dims != spec.n() || u.m != spec.m() {
        return Err(Error::Dimension(format!(
            "operator acts on N = {}, M = {}, got dims {} and M {}",
            spec.n(),
            spec.m(),
            u.dims,
            u.m
        )));
    }
    u.check_grid(grid)?;
    let n = spec.n();
    let a = sample_coefficients(spec, n, &[], grid)?;
    let mut out = field_apply(&a[0], u, n);
    for (r, ar) in a.iter().enumerate().skip(1) {
        let mean = u.mean_leading(r, grid);
        for (i, o) in out.iter_mut().enumerate() {
            let v = ar.broadcast(i, n).mul_vec(&mean.values[i / grid.len(r)]);
            for (x, y) in o.iter_mut().zip(v) {
                *x = *x + y;
            }
        }
    }
    GridFunction::new(n, spec.m(), grid.q(), out)
}

/// Equivalent expressions of the resolvent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventForm {
    /// `D_0 f - Σ H_r A_r <D_r f>_{1..r}`.
    Standard,
    /// `H_1 f - Σ H_r A_r <H_{r+1}^* f>_{1..r}` (self-adjoint, real λ).
    AdjointH,
    /// `D_0 f - Σ D_{r-1}^* A_r <D_r f>_{1..r}` (self-adjoint, real λ).
    AdjointD,
    /// `C_0 f + Σ C_r <D_r f>_{1..r}` from the E/C/D recursion.
    Ecd,
}

/// Resolvent kernels at one λ, reusable for many sources.
pub struct Resolvent<'g, T> {
    grid: &'g QuadGrid<T>,
    n: usize,
    m: usize,
    lambda: Complex<T>,
    a: Vec<NodeField<CMatrix<T>>>,
    kernels: Kernels<T>,
    ecd: Option<EcdState<T>>,
}

impl<'g, T: Real> Resolvent<'g, T> {
    pub fn new(spec: &OperatorSpec<T>, lambda: Complex<T>, grid: &'g QuadGrid<T>) -> Result<Self> {
        let cf = ContinuedFraction::new(spec, spec.n(), &[], grid)?;
        let state = cf.state(lambda)?;
        let kernels = state
            .kernels
            .ok_or_else(|| proximity(spec.n(), lambda, state.rcond_min))?;
        Ok(Resolvent {
            grid,
            n: spec.n(),
            m: spec.m(),
            lambda,
            a: (0..=spec.n()).map(|r| cf.coefficient_field(r).clone()).collect(),
            kernels,
            ecd: None,
        })
    }

    /// Also prepare the E/C/D kernels for [`ResolventForm::Ecd`].
    pub fn with_ecd(mut self, spec: &OperatorSpec<T>) -> Result<Self> {
        self.ecd = Some(cf_eval_via_ecd(
            spec,
            spec.n(),
            self.lambda,
            &KPoint::empty(),
            self.grid,
        )?);
        Ok(self)
    }

    pub fn lambda(&self) -> Complex<T> {
        self.lambda
    }

    fn mean_of_product(
        &self,
        kernel: &NodeField<CMatrix<T>>,
        f: &GridFunction<T>,
        r: usize,
        adjoint: bool,
    ) -> GridFunction<T> {
        let vals = (0..f.values.len())
            .map(|i| {
                let k = &kernel.values()[i];
                if adjoint {
                    k.adjoint().mul_vec(&f.values[i])
                } else {
                    k.mul_vec(&f.values[i])
                }
            })
            .collect();
        GridFunction {
            dims: self.n,
            m: self.m,
            q: f.q,
            values: vals,
        }
        .mean_leading(r, self.grid)
    }

    pub fn apply(&self, f: &GridFunction<T>, form: ResolventForm) -> Result<GridFunction<T>> {
        if f.dims != self.n || f.m != self.m {
            return Err(Error::Dimension("source does not match the operator".into()));
        }
        f.check_grid(self.grid)?;
        let n = self.n;
        let k = &self.kernels;
        let ecd = match (form, &self.ecd) {
            (ResolventForm::Ecd, None) => return Err(Error::Invalid("E/C/D kernels were not prepared".into())),
            (_, e) => e.as_ref(),
        };
        let lead = match form {
            ResolventForm::AdjointH => k.h(1),
            ResolventForm::Ecd => ecd.expect("checked").c(0),
            _ => k.d(0),
        };
        let mut out = field_apply(lead, f, n);
        for r in 1..=n {
            let mean = match form {
                ResolventForm::AdjointH => self.mean_of_product(k.h(r + 1), f, r, true),
                ResolventForm::Ecd => self.mean_of_product(ecd.expect("checked").d(r), f, r, false),
                _ => self.mean_of_product(k.d(r), f, r, false),
            };
            let per = self.grid.len(r);
            for (i, o) in out.iter_mut().enumerate() {
                let g = &mean.values[i / per];
                let v = match form {
                    ResolventForm::Ecd => ecd.expect("checked").c(r).values()[i].mul_vec(g),
                    _ => {
                        let ag = self.a[r].broadcast(i, n).mul_vec(g);
                        let left = match form {
                            ResolventForm::AdjointD => k.d(r - 1).values()[i].adjoint(),
                            _ => k.h(r).values()[i].clone(),
                        };
                        left.mul_vec(&ag).into_iter().map(|z| -z).collect()
                    }
                };
                for (x, y) in o.iter_mut().zip(v) {
                    *x = *x + y;
                }
            }
        }
        GridFunction::new(n, self.m, f.q, out)
    }
}

pub fn apply_resolvent<T: Real>(
    spec: &OperatorSpec<T>,
    lambda: Complex<T>,
    f: &GridFunction<T>,
    grid: &QuadGrid<T>,
) -> Result<GridFunction<T>> {
    Resolvent::new(spec, lambda, grid)?.apply(f, ResolventForm::Standard)
}

/// `|(𝒜 - λ)u - f| / |f|`.
pub fn residual<T: Real>(
    spec: &OperatorSpec<T>,
    lambda: Complex<T>,
    u: &GridFunction<T>,
    f: &GridFunction<T>,
    grid: &QuadGrid<T>,
) -> Result<T> {
    let au = apply_operator(spec, u, grid)?;
    let r = au.axpy(-lambda, u).axpy(Complex::new(-T::one(), T::zero()), f);
    Ok(r.norm(grid) / f.norm(grid))
}

/// The spectral component closest to λ and its distance. Continuous
/// components of a self-adjoint operator count by their hulls, everything
/// else by the sampled roots.
pub fn nearest_component<T: Real>(
    comps: &[SpectralComponent<T>],
    lambda: Complex<T>,
    self_adjoint: bool,
) -> Option<(usize, T)> {
    comps
        .iter()
        .filter_map(|c| {
            let d = if self_adjoint {
                c.hull
                    .iter()
                    .map(|i| i.distance(lambda.re).hypot(lambda.im))
                    .fold(T::infinity(), T::min)
            } else {
                c.roots
                    .iter()
                    .flatten()
                    .map(|z| (*z - lambda).norm())
                    .fold(T::infinity(), T::min)
            };
            d.is_finite().then_some((c.level, d))
        })
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances"))
}

/// A source term for [`source_response`].
#[derive(Debug, Clone)]
pub enum Source {
    /// One expression over `k1..kN` per component.
    Expr(Vec<MatrixExpr>),
    /// `Σ c e^{2πi m·k} e_p`: the lattice function supported on the listed
    /// cells and unit-cell nodes.
    Fourier(Vec<FourierTerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierTerm {
    pub shift: Vec<i64>,
    pub component: usize,
    pub amplitude: (f64, f64),
}

impl Source {
    pub fn sample<T: Real>(&self, n: usize, m: usize, grid: &QuadGrid<T>) -> Result<GridFunction<T>> {
        match self {
            Source::Expr(es) => {
                if es.len() != m {
                    return Err(Error::Dimension(format!(
                        "source has {} components, operator has M = {m}",
                        es.len()
                    )));
                }
                GridFunction::from_fn(grid, n, m, |k| {
                    es.iter().map(|e| e.eval(k).map_err(Error::from)).collect()
                })
            }
            Source::Fourier(terms) => {
                for t in terms {
                    if t.shift.len() != n || t.component >= m {
                        return Err(Error::Dimension(format!(
                            "Fourier term {:?} does not fit N = {n}, M = {m}",
                            t
                        )));
                    }
                }
                GridFunction::from_fn(grid, n, m, |k| {
                    let mut v = vec![Complex::new(T::zero(), T::zero()); m];
                    for t in terms {
                        let phase = t
                            .shift
                            .iter()
                            .zip(k)
                            .fold(T::zero(), |s, (&mi, &ki)| s + lit::<T>(mi as f64) * ki);
                        let ang = lit::<T>(2.0) * T::PI() * phase;
                        let amp = Complex::new(lit::<T>(t.amplitude.0), lit::<T>(t.amplitude.1));
                        v[t.component] = v[t.component] + amp * Complex::new(ang.cos(), ang.sin());
                    }
                    Ok(v)
                })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceResponse<T> {
    pub source: GridFunction<T>,
    pub response: GridFunction<T>,
    pub source_norm: T,
    pub response_norm: T,
    pub residual: T,
}

/// `u = ℛ(λ) f` for a described source, with norms and the residual.
pub fn source_response<T: Real>(
    spec: &OperatorSpec<T>,
    lambda: Complex<T>,
    source: &Source,
    grid: &QuadGrid<T>,
) -> Result<SourceResponse<T>> {
    let f = source.sample(spec.n(), spec.m(), grid)?;
    let u = apply_resolvent(spec, lambda, &f, grid)?;
    let res = residual(spec, lambda, &u, &f, grid)?;
    Ok(SourceResponse {
        source_norm: f.norm(grid),
        response_norm: u.norm(grid),
        residual: res,
        source: f,
        response: u,
    })
}
