//! Periodic operators `A0 u + A1 <u>_1 + ... + AN <u>_{1..N}` described by
//! their coefficient functions. `A_j` may only depend on `k_{j+1..N}`; it is
//! always evaluated from that tail of the quasimomentum.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Compiled, MatrixExpr};
use crate::linalg::{hermitian_defect, CMatrix};
use crate::quadrature::{InterpWeights, QuadGrid};
use crate::scalar::{lit, to_f64, Real};

/// Defect of Hermitian symmetry below which a coefficient counts as
/// self-adjoint.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Points per axis of the default probe grid.
pub const PROBE_POINTS: usize = 5;

/// Coordinate used for the leading variables `k_1..k_j` when an expression
/// for `A_j` is evaluated from its tail.
const FILLER: f64 = 0.5;

type CustomFn<T> = dyn Fn(&[T]) -> Result<CMatrix<T>> + Send + Sync;

/// One coefficient function `A_j(k_{j+1}, ..., k_N)`.
#[derive(Clone)]
pub enum Coefficient<T> {
    Const(CMatrix<T>),
    Expr(ExprMatrix<T>),
    Table(TabulatedCoefficient<T>),
    /// Arbitrary function of the tail coordinates.
    Custom(Arc<CustomFn<T>>),
}

impl<T: Real> Coefficient<T> {
    pub fn custom(f: impl Fn(&[T]) -> Result<CMatrix<T>> + Send + Sync + 'static) -> Self {
        Coefficient::Custom(Arc::new(f))
    }

    pub fn eval(&self, tail: &[T]) -> Result<CMatrix<T>> {
        match self {
            Coefficient::Const(a) => Ok(a.clone()),
            Coefficient::Expr(e) => e.eval(tail),
            Coefficient::Table(t) => t.eval(tail),
            Coefficient::Custom(f) => f(tail),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Coefficient<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Const(a) => write!(f, "Const({a:?})"),
            Coefficient::Expr(e) => write!(f, "Expr({:?})", e.sources),
            Coefficient::Table(t) => write!(f, "Table(dims={}, q={})", t.dims, t.grid.nodes.len()),
            Coefficient::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// An `M x M` matrix of expressions over `k1..kN` used as `A_level`.
#[derive(Clone)]
pub struct ExprMatrix<T> {
    level: usize,
    m: usize,
    sources: Vec<MatrixExpr>,
    compiled: Vec<Compiled<T>>,
}

impl<T: Real> ExprMatrix<T> {
    /// `entries` is row-major, `m * m` expressions over `n_vars = N`.
    pub fn new(level: usize, m: usize, entries: Vec<MatrixExpr>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::Dimension(format!(
                "A_{level} has {} entries, expected {}",
                entries.len(),
                m * m
            )));
        }
        let compiled = entries
            .iter()
            .map(|e| e.compile::<T>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(ExprMatrix {
            level,
            m,
            sources: entries,
            compiled,
        })
    }

    pub fn parse(level: usize, n: usize, rows: &[Vec<String>]) -> Result<Self> {
        let m = rows.len();
        let mut entries = Vec::with_capacity(m * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::Dimension(format!(
                    "A_{level} row has {} entries, expected {m}",
                    row.len()
                )));
            }
            for text in row {
                entries.push(MatrixExpr::parse(text, n)?);
            }
        }
        Self::new(level, m, entries)
    }

    pub fn sources(&self) -> &[MatrixExpr] {
        &self.sources
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Evaluate at a full quasimomentum `k1..kN`.
    pub fn eval_full(&self, k: &[T]) -> Result<CMatrix<T>> {
        let mut data = Vec::with_capacity(self.m * self.m);
        for c in &self.compiled {
            data.push(c.eval(k)?);
        }
        Ok(CMatrix::from_row_major(self.m, self.m, &data))
    }

    pub fn eval(&self, tail: &[T]) -> Result<CMatrix<T>> {
        let mut k = vec![lit::<T>(FILLER); self.level];
        k.extend_from_slice(tail);
        self.eval_full(&k)
    }
}

/// Samples of `A_j` on the Gauss-Legendre nodes of `[0,1]^dims`, extended
/// off the nodes by tensor barycentric interpolation.
#[derive(Debug, Clone)]
pub struct TabulatedCoefficient<T> {
    dims: usize,
    grid: QuadGrid<T>,
    values: Vec<CMatrix<T>>,
}

impl<T: Real> TabulatedCoefficient<T> {
    pub fn new(dims: usize, grid: QuadGrid<T>, values: Vec<CMatrix<T>>) -> Result<Self> {
        if values.len() != grid.len(dims) {
            return Err(Error::Dimension(format!(
                "table over {dims} axes with {} nodes needs {} values, got {}",
                grid.q(),
                grid.len(dims),
                values.len()
            )));
        }
        Ok(TabulatedCoefficient { dims, grid, values })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn grid(&self) -> &QuadGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[CMatrix<T>] {
        &self.values
    }

    pub fn eval(&self, tail: &[T]) -> Result<CMatrix<T>> {
        if tail.len() != self.dims {
            return Err(Error::Dimension(format!(
                "table over {} axes evaluated with {} coordinates",
                self.dims,
                tail.len()
            )));
        }
        let q = self.grid.q();
        let axes: Vec<Vec<(usize, T)>> = tail
            .iter()
            .map(|&x| match self.grid.interpolation_weights(x) {
                InterpWeights::Node(i) => vec![(i, T::one())],
                InterpWeights::Mixed(w) => w.into_iter().enumerate().collect(),
            })
            .collect();
        let shape = &self.values[0];
        let mut acc = CMatrix::zeros(shape.rows(), shape.cols());
        let mut cursor = vec![0usize; self.dims];
        loop {
            let mut idx = 0;
            let mut weight = T::one();
            for a in (0..self.dims).rev() {
                let (i, w) = axes[a][cursor[a]];
                idx = idx * q + i;
                weight = weight * w;
            }
            acc.add_scaled(weight, &self.values[idx]);
            // odometer, axis 1 fastest
            let mut a = 0;
            loop {
                if a == self.dims {
                    return Ok(acc);
                }
                cursor[a] += 1;
                if cursor[a] < axes[a].len() {
                    break;
                }
                cursor[a] = 0;
                a += 1;
            }
        }
    }
}

/// Where a coefficient was found to depend on a coordinate it must not.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DependenceViolation {
    pub level: usize,
    pub k_a: Vec<f64>,
    pub k_b: Vec<f64>,
    pub difference: f64,
}

/// The tuple `(N, M, A_0..A_N)`.
#[derive(Debug, Clone)]
pub struct OperatorSpec<T> {
    n: usize,
    m: usize,
    coeffs: Vec<Coefficient<T>>,
}

impl<T: Real> OperatorSpec<T> {
    pub fn new(n: usize, m: usize, coeffs: Vec<Coefficient<T>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidOperator("lattice dimension N must be at least 1".into()));
        }
        if m == 0 {
            return Err(Error::InvalidOperator("unit cell size M must be at least 1".into()));
        }
        if coeffs.len() != n + 1 {
            return Err(Error::InvalidOperator(format!(
                "expected N + 1 = {} coefficients A_0..A_{n}, got {}",
                n + 1,
                coeffs.len()
            )));
        }
        for (j, c) in coeffs.iter().enumerate() {
            if let Coefficient::Expr(e) = c {
                if e.level != j {
                    return Err(Error::InvalidOperator(format!(
                        "expression matrix for level {} placed at level {j}",
                        e.level
                    )));
                }
            }
        }
        let spec = OperatorSpec { n, m, coeffs };
        for j in 0..=n {
            let a = spec.eval_coeff(j, &vec![lit::<T>(FILLER); n - j])?;
            if a.rows() != m || a.cols() != m {
                return Err(Error::Dimension(format!(
                    "A_{j} is {}x{}, expected {m}x{m}",
                    a.rows(),
                    a.cols()
                )));
            }
        }
        Ok(spec)
    }

    /// Build from expression strings, `rows[j]` being the rows of `A_j`.
    pub fn from_exprs(n: usize, rows: &[Vec<Vec<String>>]) -> Result<Self> {
        let m = rows.first().map_or(0, |a| a.len());
        let coeffs = rows
            .iter()
            .enumerate()
            .map(|(j, a)| {
                if a.len() != m {
                    return Err(Error::Dimension(format!("A_{j} has {} rows, expected {m}", a.len())));
                }
                ExprMatrix::parse(j, n, a).map(Coefficient::Expr)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, m, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coefficient(&self, j: usize) -> &Coefficient<T> {
        &self.coeffs[j]
    }

    pub fn coefficients(&self) -> &[Coefficient<T>] {
        &self.coeffs
    }

    /// `A_j(k_{j+1..N})`.
    pub fn eval_coeff(&self, j: usize, tail: &[T]) -> Result<CMatrix<T>> {
        if j > self.n {
            return Err(Error::Dimension(format!("level {j} exceeds N = {}", self.n)));
        }
        if tail.len() != self.n - j {
            return Err(Error::Dimension(format!(
                "A_{j} takes {} coordinates, got {}",
                self.n - j,
                tail.len()
            )));
        }
        self.coeffs[j].eval(tail)
    }

    /// Copy with `A_j` replaced.
    pub fn with_coefficient(&self, j: usize, c: Coefficient<T>) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs[j] = c;
        Self::new(self.n, self.m, coeffs)
    }

    /// Two-point probing of the rule that `A_j` ignores `k_1..k_j`.
    /// Only expression coefficients can violate it.
    pub fn check_dependence(&self, points: usize) -> Result<Vec<DependenceViolation>> {
        let mut out = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            let Coefficient::Expr(e) = c else { continue };
            for k in probe_points::<T>(self.n, points) {
                let mut moved = k.clone();
                for c in moved.iter_mut().take(j) {
                    *c = shift(*c);
                }
                let a = e.eval_full(&k)?;
                let b = e.eval_full(&moved)?;
                let diff = to_f64((&a - &b).max_norm());
                let scale = 1.0 + to_f64(a.max_norm());
                if diff > HERMITIAN_TOL * scale {
                    out.push(DependenceViolation {
                        level: j,
                        k_a: k.iter().map(|&x| to_f64(x)).collect(),
                        k_b: moved.iter().map(|&x| to_f64(x)).collect(),
                        difference: diff,
                    });
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Largest Hermitian defect of any coefficient on the probe grid.
    pub fn hermitian_defect(&self, points: usize) -> Result<T> {
        let mut worst = T::zero();
        for j in 0..=self.n {
            for tail in probe_points::<T>(self.n - j, points) {
                worst = worst.max(hermitian_defect(&self.eval_coeff(j, &tail)?));
            }
        }
        Ok(worst)
    }

    pub fn is_self_adjoint(&self, points: usize) -> Result<bool> {
        Ok(self.hermitian_defect(points)? < lit(HERMITIAN_TOL))
    }

    /// `Σ_{r<=j} max |A_r|_F` over the probe grid: a bound on the spectrum
    /// of the operator truncated after level `j`.
    pub fn norm_bound(&self, j: usize, points: usize) -> Result<T> {
        let mut total = T::zero();
        for r in 0..=j {
            let mut best = T::zero();
            for tail in probe_points::<T>(self.n - r, points) {
                best = best.max(self.eval_coeff(r, &tail)?.frobenius());
            }
            total = total + best;
        }
        Ok(total)
    }
}

fn shift<T: Real>(x: T) -> T {
    let y = x + lit(0.371);
    if y > T::one() {
        y - T::one()
    } else {
        y
    }
}

/// Uniform tensor grid with `points` per axis, endpoints included, axis 1
/// fastest. A zero-dimensional grid has the single empty point.
pub fn probe_points<T: Real>(dims: usize, points: usize) -> Vec<Vec<T>> {
    let points = points.max(2);
    let total = points.pow(dims as u32);
    (0..total)
        .map(|mut idx| {
            (0..dims)
                .map(|_| {
                    let i = idx % points;
                    idx /= points;
                    lit::<T>(i as f64 / (points - 1) as f64)
                })
                .collect()
        })
        .collect()
}
