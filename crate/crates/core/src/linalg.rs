//! Dense complex matrices for the small unit-cell sizes the continued
//! fractions operate on (M = 1, 2, 3 in practice).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use smallvec::SmallVec;

use crate::scalar::{cabs1, lit, Real};

/// Reciprocal condition number below which a matrix is treated as
/// singular to working precision.
pub const RCOND_SINGULAR: f64 = 1e-14;

type Store<T> = SmallVec<[Complex<T>; 4]>;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Store<T>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: SmallVec::from_elem(Complex::new(T::zero(), T::zero()), rows * cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Complex::new(T::one(), T::zero()))
    }

    /// `z * I`.
    pub fn scalar(n: usize, z: Complex<T>) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = SmallVec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Build from row-major data; panics if the length is not `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: &[Complex<T>]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        CMatrix {
            rows,
            cols,
            data: SmallVec::from_slice(data),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| Complex::new(lit(rows[i][j]), T::zero()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |s, i| s + self[(i, j)].norm()))
            .fold(T::zero(), T::max)
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `self += w * other`, entrywise.
    pub fn add_scaled(&mut self, w: T, other: &Self) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + b * w;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn det(&self) -> Complex<T> {
        lu_det_inv(self).det
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(rhs.data.iter()).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for CMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = &self[(i, j)];
                write!(f, "({:?}, {:?})", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

/// Output of [`lu_det_inv`].
#[derive(Debug, Clone)]
pub struct LuDetInv<T> {
    pub det: Complex<T>,
    /// Withheld when the matrix is singular to working precision.
    pub inv: Option<CMatrix<T>>,
    /// Reciprocal 1-norm condition number, `1 / (|A|_1 |A^-1|_1)`.
    pub rcond: T,
}

impl<T: Real> LuDetInv<T> {
    pub fn is_singular(&self) -> bool {
        self.inv.is_none()
    }
}

/// Determinant, inverse and reciprocal condition number from one LU
/// factorization with partial pivoting.
pub fn lu_det_inv<T: Real>(a: &CMatrix<T>) -> LuDetInv<T> {
    assert!(a.is_square(), "lu_det_inv needs a square matrix");
    let n = a.rows;
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let singular = |det| LuDetInv {
        det,
        inv: None,
        rcond: T::zero(),
    };

    if n == 1 {
        let d = a.data[0];
        if d == zero || !(d.re.is_finite() && d.im.is_finite()) {
            return singular(d);
        }
        let inv = CMatrix::from_row_major(1, 1, &[one / d]);
        return LuDetInv {
            det: d,
            inv: Some(inv),
            rcond: T::one(),
        };
    }

    let mut lu: Store<T> = a.data.clone();
    let mut perm: SmallVec<[usize; 4]> = (0..n).collect();
    let mut det = one;
    for k in 0..n {
        let mut p = k;
        let mut best = cabs1(lu[k * n + k]);
        for i in k + 1..n {
            let v = cabs1(lu[i * n + k]);
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == T::zero() {
            return singular(zero);
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            det = -det;
        }
        let pivot = lu[k * n + k];
        det = det * pivot;
        for i in k + 1..n {
            let l = lu[i * n + k] / pivot;
            lu[i * n + k] = l;
            for j in k + 1..n {
                let u = lu[k * n + j];
                lu[i * n + j] = lu[i * n + j] - l * u;
            }
        }
    }

    // Solve LU x = P e_j column by column.
    let mut inv = CMatrix::zeros(n, n);
    let mut col: Store<T> = SmallVec::from_elem(zero, n);
    for j in 0..n {
        for i in 0..n {
            col[i] = if perm[i] == j { one } else { zero };
        }
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s = s - lu[i * n + k] * col[k];
            }
            col[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in i + 1..n {
                s = s - lu[i * n + k] * col[k];
            }
            col[i] = s / lu[i * n + i];
        }
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }

    let norm_a = a.norm1();
    let norm_inv = inv.norm1();
    let rcond = if norm_a == T::zero() || !norm_inv.is_finite() {
        T::zero()
    } else {
        T::one() / (norm_a * norm_inv)
    };
    let threshold = lit::<T>(RCOND_SINGULAR).max(T::epsilon());
    LuDetInv {
        det,
        inv: if rcond < threshold || !inv.is_finite() {
            None
        } else {
            Some(inv)
        },
        rcond,
    }
}

/// Max-norm of `A - A*`.
pub fn hermitian_defect<T: Real>(a: &CMatrix<T>) -> T {
    assert!(a.is_square(), "hermitian_defect needs a square matrix");
    let n = a.rows;
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}
