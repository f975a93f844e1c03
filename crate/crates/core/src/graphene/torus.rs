//! Direct diagonalization of a periodic operator on a finite torus of
//! `P^N` cells. The lattice couplings are decoded from the Fourier
//! monomials of the coefficients, so this path shares nothing with the
//! continued fractions beyond the coefficient functions themselves.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operator::OperatorSpec;
use crate::scalar::{lit, to_f64, Real};

/// Samples per axis used to decode Fourier monomials; shifts up to
/// `DEFAULT_DECODE / 2 - 1` in each direction are recovered.
pub const DEFAULT_DECODE: usize = 8;

const MONOMIAL_TOL: f64 = 1e-12;
const DECODE_CHECK_TOL: f64 = 1e-9;

/// One monomial `c e^{2πi s·k}` of a matrix entry.
#[derive(Debug, Clone)]
struct Monomial<T> {
    shift: Vec<i64>,
    row: usize,
    col: usize,
    coeff: Complex<T>,
}

fn unit_index(idx: usize, dims: usize, base: usize) -> Vec<usize> {
    let mut rest = idx;
    (0..dims)
        .map(|_| {
            let d = rest % base;
            rest /= base;
            d
        })
        .collect()
}

/// Fourier monomials of `A_j`, verified against the coefficient at
/// off-grid points.
fn decode<T: Real>(spec: &OperatorSpec<T>, j: usize, l: usize) -> Result<Vec<Monomial<T>>> {
    let dims = spec.n() - j;
    let m = spec.m();
    let count = l.pow(dims as u32);
    let samples = (0..count)
        .map(|i| {
            let k: Vec<T> = unit_index(i, dims, l)
                .into_iter()
                .map(|d| lit::<T>(d as f64 / l as f64))
                .collect();
            spec.eval_coeff(j, &k)
        })
        .collect::<Result<Vec<_>>>()?;
    let half = (l / 2) as i64;
    let mut out = Vec::new();
    for s_idx in 0..count {
        let shift: Vec<i64> = unit_index(s_idx, dims, l)
            .into_iter()
            .map(|d| {
                let d = d as i64;
                if d >= half {
                    d - l as i64
                } else {
                    d
                }
            })
            .collect();
        for row in 0..m {
            for col in 0..m {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (i, a) in samples.iter().enumerate() {
                    let phase = unit_index(i, dims, l)
                        .iter()
                        .zip(&shift)
                        .fold(0i64, |p, (&d, &s)| p + d as i64 * s);
                    let ang = -two_pi::<T>() * lit::<T>(phase as f64 / l as f64);
                    acc = acc + a[(row, col)] * Complex::new(ang.cos(), ang.sin());
                }
                let coeff = acc / lit::<T>(count as f64);
                if coeff.norm() > lit(MONOMIAL_TOL) {
                    out.push(Monomial {
                        shift: shift.clone(),
                        row,
                        col,
                        coeff,
                    });
                }
            }
        }
    }
    // the decoded polynomial must reproduce the coefficient away from the samples
    for probe in [0.137, 0.618, 0.911] {
        let k: Vec<T> = (0..dims).map(|a| lit::<T>((probe + 0.29 * a as f64) % 1.0)).collect();
        let exact = spec.eval_coeff(j, &k)?;
        for row in 0..m {
            for col in 0..m {
                let sum = out.iter().filter(|t| t.row == row && t.col == col).fold(
                    Complex::new(T::zero(), T::zero()),
                    |s, t| {
                        let ph = t
                            .shift
                            .iter()
                            .zip(&k)
                            .fold(T::zero(), |p, (&s, &x)| p + lit::<T>(s as f64) * x);
                        let ang = two_pi::<T>() * ph;
                        s + t.coeff * Complex::new(ang.cos(), ang.sin())
                    },
                );
                if to_f64((sum - exact[(row, col)]).norm()) > DECODE_CHECK_TOL {
                    return Err(Error::Invalid(format!(
                        "A{j} is not a trigonometric polynomial with shifts below {half}"
                    )));
                }
            }
        }
    }
    Ok(out)
}

fn two_pi<T: Real>() -> T {
    lit::<T>(2.0) * T::PI()
}

/// The operator restricted to `P^N` cells with periodic wrapping.
#[derive(Debug, Clone)]
pub struct TorusLattice<T> {
    p: usize,
    n: usize,
    m: usize,
    matrix: Vec<Complex<T>>,
}

impl<T: Real> TorusLattice<T> {
    /// Monomial `c e^{2πi s·k}` in entry `(p, q)` of `A_j` couples node `p`
    /// of cell `n` to node `q` of cell `n - s`, for cells with
    /// `n_1 = .. = n_j = 0`.
    pub fn from_spec(spec: &OperatorSpec<T>, p: usize, decode_size: usize) -> Result<Self> {
        if p < 4 {
            return Err(Error::Invalid(format!("torus needs P >= 4, got {p}")));
        }
        let (n, m) = (spec.n(), spec.m());
        let cells = p.pow(n as u32);
        let size = cells * m;
        let mut matrix = vec![Complex::new(T::zero(), T::zero()); size * size];
        let wrap = |x: i64| x.rem_euclid(p as i64) as usize;
        for j in 0..=n {
            let terms = decode(spec, j, decode_size)?;
            if let Some(t) = terms
                .iter()
                .find(|t| t.shift.iter().any(|&s| 2 * s.unsigned_abs() as usize >= p))
            {
                return Err(Error::Invalid(format!(
                    "shift {:?} of A{j} does not fit a torus of {p} cells",
                    t.shift
                )));
            }
            for cell in 0..cells {
                let c = unit_index(cell, n, p);
                if c[..j].iter().any(|&x| x != 0) {
                    continue;
                }
                for t in &terms {
                    let mut target = 0;
                    for a in (0..n).rev() {
                        let s = if a < j { 0 } else { t.shift[a - j] };
                        target = target * p + wrap(c[a] as i64 - s);
                    }
                    matrix[(cell * m + t.row) * size + target * m + t.col] =
                        matrix[(cell * m + t.row) * size + target * m + t.col] + t.coeff;
                }
            }
        }
        Ok(TorusLattice { p, n, m, matrix })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn size(&self) -> usize {
        self.p.pow(self.n as u32) * self.m
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex<T> {
        self.matrix[a * self.size() + b]
    }

    /// Number of sites coupled to `site`, itself excluded.
    pub fn degree(&self, site: usize) -> usize {
        let s = self.size();
        (0..s)
            .filter(|&b| b != site && self.matrix[site * s + b].norm() > lit(MONOMIAL_TOL))
            .count()
    }

    pub fn hermitian_defect(&self) -> T {
        let s = self.size();
        let mut worst = T::zero();
        for a in 0..s {
            for b in 0..s {
                worst = worst.max((self.matrix[a * s + b] - self.matrix[b * s + a].conj()).norm());
            }
        }
        worst
    }

    /// Ascending eigenvalues; requires a Hermitian matrix.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        if to_f64(self.hermitian_defect()) > 1e-10 {
            return Err(Error::InvalidOperator("torus matrix is not Hermitian".into()));
        }
        hermitian_eigenvalues(self.matrix.clone(), self.size())
    }
}

/// Eigenvalues of the graphene model on a `P x P` torus.
pub fn torus_oracle<T: Real>(v1: f64, v2: f64, p: usize) -> Result<Vec<T>> {
    let model = super::build_graphene::<T>(v1, v2)?;
    TorusLattice::from_spec(&model.spec, p, DEFAULT_DECODE)?.eigenvalues()
}

/// Ascending eigenvalues of a dense Hermitian `n x n` matrix (row-major):
/// Householder reduction to tridiagonal form, then implicit QL.
pub fn hermitian_eigenvalues<T: Real>(mut a: Vec<Complex<T>>, n: usize) -> Result<Vec<T>> {
    if a.len() != n * n {
        return Err(Error::Dimension(format!("{} entries for a {n}x{n} matrix", a.len())));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let two = lit::<T>(2.0);
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let xnorm = (k + 1..n).fold(T::zero(), |s, i| s + a[i * n + k].norm_sqr()).sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex<T>> = (k + 1..n).map(|i| a[i * n + k]).collect();
        v[0] = v[0] - alpha;
        let vnorm = v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z = *z / vnorm;
        }
        let off = k + 1;
        let pv: Vec<Complex<T>> = (0..len)
            .map(|i| (0..len).fold(zero, |s, j| s + a[(off + i) * n + off + j] * v[j]))
            .collect();
        let kk = v.iter().zip(&pv).fold(zero, |s, (x, y)| s + x.conj() * y);
        let w: Vec<Complex<T>> = pv.iter().zip(&v).map(|(&p, &x)| p - kk * x).collect();
        for i in 0..len {
            for j in 0..len {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[(off + i) * n + off + j] = a[(off + i) * n + off + j] - upd * two;
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = zero;
            a[k * n + i] = zero;
        }
    }
    let mut d: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e: Vec<T> = (0..n)
        .map(|i| {
            if i + 1 < n {
                a[(i + 1) * n + i].norm()
            } else {
                T::zero()
            }
        })
        .collect();
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(d)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal
/// matrix (`d` diagonal, `e[i]` couples `i` and `i+1`). Eigenvalues are
/// left in `d`.
fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Invalid("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (lit::<T>(2.0) * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + lit::<T>(2.0) * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}
