//! One-dimensional root finding: characteristic roots of small matrices,
//! bracketed bisection, golden-section minimisation and winding numbers.

use num_complex::Complex;

use crate::linalg::{lu_det_inv, CMatrix};
use crate::scalar::{lit, Real};

/// Roots of `det(A - λI)`, sorted by real then imaginary part.
pub fn char_roots<T: Real>(a: &CMatrix<T>) -> Vec<Complex<T>> {
    let m = a.rows();
    let mut roots = match m {
        1 => vec![a[(0, 0)]],
        2 => {
            let t = a[(0, 0)] + a[(1, 1)];
            let d = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            quadratic(t, d)
        }
        _ => aberth(a),
    };
    roots.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    roots
}

/// Roots of `λ² - tλ + d`, avoiding cancellation.
fn quadratic<T: Real>(t: Complex<T>, d: Complex<T>) -> Vec<Complex<T>> {
    let four: T = lit(4.0);
    let two: T = lit(2.0);
    let mut s = (t * t - d * four).sqrt();
    if (t.conj() * s).re < T::zero() {
        s = -s;
    }
    let r1 = (t + s) / two;
    let r2 = if r1.norm() == T::zero() {
        Complex::new(T::zero(), T::zero())
    } else {
        d / r1
    };
    vec![r1, r2]
}

/// Simultaneous Aberth iteration on `det(A - zI)`, using
/// `p/p' = -1 / tr((A - zI)^{-1})`.
fn aberth<T: Real>(a: &CMatrix<T>) -> Vec<Complex<T>> {
    let m = a.rows();
    let scale = a.max_norm().max(T::one()) * lit(m as f64);
    let center = a.trace() / lit::<T>(m as f64);
    let mut z: Vec<Complex<T>> = (0..m)
        .map(|i| {
            let ang = lit::<T>(2.0) * T::PI() * lit(i as f64 + 0.25) / lit(m as f64);
            center + Complex::new(ang.cos(), ang.sin()) * (scale * lit(0.5))
        })
        .collect();
    let tol = T::epsilon() * scale * lit(4.0);
    for _ in 0..500 {
        let mut biggest = T::zero();
        for i in 0..m {
            let shifted = a - &CMatrix::scalar(m, z[i]);
            let r = lu_det_inv(&shifted);
            let Some(inv) = r.inv else { continue };
            let tr = inv.trace();
            if tr.norm() == T::zero() {
                continue;
            }
            let newton = -Complex::new(T::one(), T::zero()) / tr;
            let mut repulse = Complex::new(T::zero(), T::zero());
            for (jj, &zj) in z.iter().enumerate() {
                if jj != i {
                    repulse = repulse + Complex::new(T::one(), T::zero()) / (z[i] - zj);
                }
            }
            let w = newton / (Complex::new(T::one(), T::zero()) - newton * repulse);
            z[i] = z[i] - w;
            biggest = biggest.max(w.norm());
        }
        if biggest <= tol {
            break;
        }
    }
    z
}

/// Outcome of bisecting a sign-change bracket.
#[derive(Debug, Clone, Copy)]
pub struct Bracketed<T> {
    pub root: T,
    pub lo: T,
    pub hi: T,
}

/// Bisection on a bracket `[a, b]` with `f(a) f(b) < 0`. Returns `None` if
/// an evaluation fails inside the bracket.
pub fn bisect<T: Real>(mut f: impl FnMut(T) -> Option<T>, mut a: T, mut fa: T, mut b: T) -> Option<Bracketed<T>> {
    let two: T = lit(2.0);
    for _ in 0..200 {
        let mid = (a + b) / two;
        if mid <= a || mid >= b {
            break;
        }
        let width = (b - a).abs();
        if width <= T::epsilon() * lit(4.0) * a.abs().max(b.abs()).max(T::one()) {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Some(Bracketed {
                root: mid,
                lo: a,
                hi: b,
            });
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(Bracketed {
        root: (a + b) / two,
        lo: a,
        hi: b,
    })
}

/// Golden-section minimisation of `f` over `[a, b]`. Failed evaluations
/// abort the search.
pub fn golden_min<T: Real>(mut f: impl FnMut(T) -> Option<T>, mut a: T, mut b: T) -> Option<(T, T)> {
    let inv_phi: T = lit(0.618_033_988_749_894_9);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= T::epsilon() * lit(8.0) * a.abs().max(b.abs()).max(T::one()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d)?;
        }
    }
    Some(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Winding number of `f` around the circle `|z - center| = radius`, with
/// the sampling refined until consecutive phase steps stay below π/4.
pub fn winding_number<T: Real>(
    mut f: impl FnMut(Complex<T>) -> Option<Complex<T>>,
    center: Complex<T>,
    radius: T,
) -> Option<i64> {
    let mut n = 64usize;
    let two_pi = lit::<T>(2.0) * T::PI();
    let limit = T::FRAC_PI_4();
    'refine: while n <= 1 << 14 {
        let mut vals = Vec::with_capacity(n);
        for i in 0..n {
            let t = two_pi * lit(i as f64) / lit(n as f64);
            let v = f(center + Complex::new(t.cos(), t.sin()) * radius)?;
            if v.norm() == T::zero() {
                return None;
            }
            vals.push(v);
        }
        let mut total = T::zero();
        for i in 0..n {
            let step = (vals[(i + 1) % n] / vals[i]).arg();
            if step.abs() > limit {
                n *= 2;
                continue 'refine;
            }
            total = total + step;
        }
        return (total / two_pi).round().to_i64();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_roots_of_hermitian_blocks() {
        let a = CMatrix::<f64>::from_real_rows(&[&[0.0, 3.0], &[3.0, 0.0]]);
        let r = char_roots(&a);
        assert!((r[0] - c(-3.0, 0.0)).norm() < 1e-15 && (r[1] - c(3.0, 0.0)).norm() < 1e-15);
        let tiny = CMatrix::from_row_major(2, 2, &[c(0.0, 0.0), c(1e-17, 2e-17), c(1e-17, -2e-17), c(0.0, 0.0)]);
        let r = char_roots(&tiny);
        assert!(r.iter().all(|z| z.norm() < 1e-16));
        let r = char_roots(&CMatrix::<f64>::from_real_rows(&[&[1e8, 1.0], &[1.0, -1e-8]]));
        assert!((r[0].re - (-1e-8 - 1e-8)).abs() < 1e-20);
    }

    #[test]
    fn aberth_matches_known_spectra() {
        let a = CMatrix::<f64>::from_real_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
        let r = char_roots(&a);
        let s = 2f64.sqrt();
        for (z, e) in r.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((z - c(e, 0.0)).norm() < 1e-12);
        }
        // companion-like non-normal matrix with roots 1, 2, 3, 4
        let a = CMatrix::<f64>::from_real_rows(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let r = char_roots(&a);
        for (z, e) in r.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((z - c(e, 0.0)).norm() < 1e-9, "{z}");
        }
    }

    #[test]
    fn bisection_and_golden_section() {
        let b = bisect(|x: f64| Some(x * x - 2.0), 0.0, -2.0, 2.0).unwrap();
        assert!((b.root - 2f64.sqrt()).abs() < 1e-15);
        assert!(b.lo <= b.root && b.root <= b.hi);
        assert!(bisect(|x: f64| if x > 1.2 { None } else { Some(x - 1.5) }, 0.0, -1.5, 2.0).is_none());
        let (x, fx) = golden_min(|x: f64| Some((x - 0.3).abs()), 0.0, 1.0).unwrap();
        assert!((x - 0.3).abs() < 1e-12 && fx < 1e-12);
    }

    #[test]
    fn winding_counts_zeros() {
        let f = |z: Complex64| Some((z - c(0.1, 0.0)) * (z - c(-0.2, 0.1)) * (z - c(3.0, 0.0)));
        assert_eq!(winding_number(f, c(0.0, 0.0), 1.0), Some(2));
        assert_eq!(winding_number(f, c(3.0, 0.0), 0.5), Some(1));
        assert_eq!(winding_number(f, c(0.0, 5.0), 0.5), Some(0));
    }
}
