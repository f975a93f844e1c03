//! Tensor Gauss-Legendre rules on the unit cube and node-indexed fields.
//!
//! Multi-indices are flattened with axis 1 fastest, so the mean over the
//! first axis of a field on `Q^d` nodes is a reduction over contiguous
//! runs of length `Q`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{lit, to_f64, Real};

pub const DEFAULT_NODES: usize = 64;

/// A point of `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct KPoint<T> {
    coords: Vec<T>,
}

impl<T: Real> KPoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if let Some(c) = coords.iter().find(|c| !(**c >= T::zero() && **c <= T::one())) {
            return Err(Error::Invalid(format!(
                "quasimomentum coordinate {} outside [0, 1]",
                to_f64(*c)
            )));
        }
        Ok(KPoint { coords })
    }

    pub fn empty() -> Self {
        KPoint { coords: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }
}

/// Gauss-Legendre rule mapped to `(0,1)`, nodes ascending, weights summing
/// to one.
#[derive(Debug, Clone)]
pub struct QuadGrid<T> {
    pub(crate) nodes: Vec<T>,
    weights: Vec<T>,
    bary: Vec<T>,
}

impl<T: Real> QuadGrid<T> {
    pub fn new(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::Invalid("quadrature needs at least one node".into()));
        }
        let (x, w) = gauss_legendre(q);
        let mut nodes = Vec::with_capacity(q);
        let mut weights = Vec::with_capacity(q);
        let mut bary = Vec::with_capacity(q);
        for i in 0..q {
            nodes.push(lit(x[i]));
            weights.push(lit(w[i]));
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            bary.push(lit(sign * (x[i] * (1.0 - x[i]) * w[i]).sqrt()));
        }
        Ok(QuadGrid { nodes, weights, bary })
    }

    pub fn q(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Number of tensor nodes on `[0,1]^dims`.
    pub fn len(&self, dims: usize) -> usize {
        self.q().pow(dims as u32)
    }

    /// Coordinates of flattened tensor node `idx` on `[0,1]^dims`.
    pub fn point(&self, idx: usize, dims: usize) -> Vec<T> {
        let q = self.q();
        let mut rest = idx;
        (0..dims)
            .map(|_| {
                let i = rest % q;
                rest /= q;
                self.nodes[i]
            })
            .collect()
    }

    /// `Σ_q w_q f(node_q, fixed...)`, summed in ascending node order.
    pub fn integrate_axis<F>(&self, f: F, fixed: &[T]) -> Result<CMatrix<T>>
    where
        F: Fn(&[T]) -> Result<CMatrix<T>>,
    {
        let mut point = Vec::with_capacity(fixed.len() + 1);
        point.push(T::zero());
        point.extend_from_slice(fixed);
        let mut acc: Option<CMatrix<T>> = None;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            point[0] = x;
            let v = f(&point).map_err(|e| integrand_error(&point, e))?;
            match acc.as_mut() {
                Some(a) => a.add_scaled(w, &v),
                None => {
                    let mut a = CMatrix::zeros(v.rows(), v.cols());
                    a.add_scaled(w, &v);
                    acc = Some(a);
                }
            }
        }
        Ok(acc.expect("grid has at least one node"))
    }

    /// Tensor rule over the first `dims` coordinates, the remaining ones
    /// fixed to `fixed`. Axis 1 is innermost.
    pub fn integrate_box<F>(&self, f: F, dims: usize, fixed: &[T]) -> Result<CMatrix<T>>
    where
        F: Fn(&[T]) -> Result<CMatrix<T>>,
    {
        if dims == 0 {
            return Err(Error::Invalid("integrate_box needs dims >= 1".into()));
        }
        self.integrate_nested(&f, dims, fixed)
    }

    fn integrate_nested<F>(&self, f: &F, dims: usize, fixed: &[T]) -> Result<CMatrix<T>>
    where
        F: Fn(&[T]) -> Result<CMatrix<T>>,
    {
        if dims == 1 {
            return self.integrate_axis(f, fixed);
        }
        let mut outer = Vec::with_capacity(fixed.len() + 1);
        outer.push(T::zero());
        outer.extend_from_slice(fixed);
        let mut acc: Option<CMatrix<T>> = None;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            outer[0] = x;
            let v = self.integrate_nested(f, dims - 1, &outer)?;
            match acc.as_mut() {
                Some(a) => a.add_scaled(w, &v),
                None => {
                    let mut a = CMatrix::zeros(v.rows(), v.cols());
                    a.add_scaled(w, &v);
                    acc = Some(a);
                }
            }
        }
        Ok(acc.expect("grid has at least one node"))
    }

    /// Integral together with the change against a rule of half the
    /// size, as a cheap self-check for analytic integrands.
    pub fn integrate_box_with_estimate<F>(&self, f: F, dims: usize, fixed: &[T]) -> Result<(CMatrix<T>, T)>
    where
        F: Fn(&[T]) -> Result<CMatrix<T>>,
    {
        let fine = self.integrate_box(&f, dims, fixed)?;
        let coarse = QuadGrid::new(self.q().div_ceil(2))?.integrate_box(&f, dims, fixed)?;
        let err = (&fine - &coarse).max_norm();
        Ok((fine, err))
    }

    /// Barycentric weights of the polynomial interpolant through the nodes,
    /// evaluated at `x`.
    pub fn interpolation_weights(&self, x: T) -> InterpWeights<T> {
        if let Some(i) = self.nodes.iter().position(|&n| n == x) {
            return InterpWeights::Node(i);
        }
        let raw: Vec<T> = self.nodes.iter().zip(&self.bary).map(|(&n, &b)| b / (x - n)).collect();
        let total = raw.iter().fold(T::zero(), |s, &v| s + v);
        InterpWeights::Mixed(raw.into_iter().map(|v| v / total).collect())
    }
}

/// Coefficients expressing an interpolated value as a combination of nodal
/// values.
#[derive(Debug, Clone)]
pub enum InterpWeights<T> {
    Node(usize),
    Mixed(Vec<T>),
}

fn integrand_error<T: Real>(point: &[T], source: Error) -> Error {
    match source {
        // keep the innermost node
        e @ Error::Integrand { .. } => e,
        e => Error::Integrand {
            node: point.iter().map(|&c| to_f64(c)).collect(),
            source: Box::new(e),
        },
    }
}

/// Gauss-Legendre nodes and weights on `(0,1)`, nodes ascending.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Newton on P_n from the Tricomi initial guess; roots descend in i.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 1.0 / ((1.0 - z * z) * dp * dp);
        // map [-1,1] -> (0,1): t = (1 - z)/2 for the lower half
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Values attached to the tensor nodes of `[0,1]^dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField<V> {
    q: usize,
    dims: usize,
    data: Vec<V>,
}

impl<V> NodeField<V> {
    pub fn new(q: usize, dims: usize, data: Vec<V>) -> Self {
        assert_eq!(data.len(), q.pow(dims as u32), "node field length");
        NodeField { q, dims, data }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[V] {
        &self.data
    }

    pub fn into_values(self) -> Vec<V> {
        self.data
    }

    /// Value seen from node `idx` of a finer field over `[0,1]^dims_full`
    /// whose trailing coordinates are this field's coordinates.
    pub fn broadcast(&self, idx: usize, dims_full: usize) -> &V {
        debug_assert!(dims_full >= self.dims);
        &self.data[idx / self.q.pow((dims_full - self.dims) as u32)]
    }

    pub fn map<W>(&self, f: impl FnMut(&V) -> W) -> NodeField<W> {
        NodeField {
            q: self.q,
            dims: self.dims,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Real> NodeField<CMatrix<T>> {
    /// Quadrature mean over the first axis.
    pub fn mean_axis1(&self, grid: &QuadGrid<T>) -> NodeField<CMatrix<T>> {
        assert!(self.dims >= 1, "mean over an axis of a 0-dimensional field");
        assert_eq!(self.q, grid.q());
        let data = self
            .data
            .chunks(self.q)
            .map(|line| weighted_sum(grid.weights(), line))
            .collect();
        NodeField {
            q: self.q,
            dims: self.dims - 1,
            data,
        }
    }

    /// Quadrature mean over the first `r` axes.
    pub fn mean_leading(&self, r: usize, grid: &QuadGrid<T>) -> NodeField<CMatrix<T>> {
        let mut out = self.clone();
        for _ in 0..r {
            out = out.mean_axis1(grid);
        }
        out
    }
}

/// `Σ w_i v_i` in index order.
pub fn weighted_sum<T: Real>(weights: &[T], values: &[CMatrix<T>]) -> CMatrix<T> {
    let mut acc = CMatrix::zeros(values[0].rows(), values[0].cols());
    for (&w, v) in weights.iter().zip(values) {
        acc.add_scaled(w, v);
    }
    acc
}

/// `Σ w_i z_i` in index order for complex vectors.
pub fn weighted_sum_vec<T: Real>(weights: &[T], values: &[Vec<Complex<T>>]) -> Vec<Complex<T>> {
    let mut acc = vec![Complex::new(T::zero(), T::zero()); values[0].len()];
    for (&w, v) in weights.iter().zip(values) {
        for (a, &z) in acc.iter_mut().zip(v) {
            *a = *a + z * w;
        }
    }
    acc
}
