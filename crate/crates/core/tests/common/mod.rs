//! Seeded random operators for integration tests: trigonometric
//! polynomial entries, `N <= 2`, `M <= 2`.
#![allow(dead_code)]

use lattice_cf::quadrature::QuadGrid;
use lattice_cf::resolvent::GridFunction;
use lattice_cf::OperatorSpec64;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn num(x: f64) -> String {
    format!("({x:?})")
}

fn cnum(z: Complex64) -> String {
    format!("({:?} + ({:?})*i)", z.re, z.im)
}

/// A random phase `s_1 k_{j+1} + ...` over the tail variables of level `j`.
fn phase(rng: &mut ChaCha8Rng, j: usize, n: usize) -> String {
    let terms: Vec<String> = (j + 1..=n)
        .map(|v| format!("{}*k{v}", rng.gen_range(-1i32..=1)))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn small(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    rng.gen_range(-scale..scale)
}

fn csmall(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(small(rng, scale), small(rng, scale))
}

/// Expression rows of a random coefficient `A_j`, Hermitian when asked.
pub fn random_rows(rng: &mut ChaCha8Rng, j: usize, n: usize, m: usize, hermitian: bool) -> Vec<Vec<String>> {
    let mut rows = vec![vec![String::new(); m]; m];
    for p in 0..m {
        for q in 0..m {
            if hermitian && q < p {
                continue;
            }
            let ph = phase(rng, j, n);
            if hermitian && p == q {
                rows[p][q] = format!(
                    "{} + {}*cos(2*pi*({ph})) + {}*sin(2*pi*({ph}))",
                    num(small(rng, 1.0)),
                    num(small(rng, 0.5)),
                    num(small(rng, 0.5))
                );
            } else if hermitian {
                let (z, w) = (csmall(rng, 0.5), csmall(rng, 0.3));
                rows[p][q] = format!("{}*exp(2*pi*i*({ph})) + {}", cnum(z), cnum(w));
                rows[q][p] = format!("{}*exp(-2*pi*i*({ph})) + {}", cnum(z.conj()), cnum(w.conj()));
            } else {
                let (z, w) = (csmall(rng, 0.5), csmall(rng, 0.5));
                rows[p][q] = format!("{}*exp(2*pi*i*({ph})) + {}", cnum(z), cnum(w));
            }
        }
    }
    rows
}

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub hermitian: bool,
    pub rows: Vec<Vec<Vec<String>>>,
    pub spec: OperatorSpec64,
}

pub fn random_spec(seed: u64, n: usize, m: usize, hermitian: bool) -> CorpusSpec {
    let mut r = rng(seed);
    let rows: Vec<_> = (0..=n).map(|j| random_rows(&mut r, j, n, m, hermitian)).collect();
    let spec = OperatorSpec64::from_exprs(n, &rows).expect("corpus spec is valid");
    CorpusSpec {
        seed,
        n,
        m,
        hermitian,
        rows,
        spec,
    }
}

/// `count` specs cycling through `(N, M)` in `{1,2}^2`.
pub fn corpus(base: u64, count: usize, hermitian: bool) -> Vec<CorpusSpec> {
    (0..count)
        .map(|i| {
            let n = 1 + i % 2;
            let m = 1 + (i / 2) % 2;
            random_spec(base + i as u64, n, m, hermitian)
        })
        .collect()
}

/// Real scalar specs (`M = 1`), self-adjoint by construction.
pub fn scalar_corpus(base: u64, count: usize) -> Vec<CorpusSpec> {
    (0..count)
        .map(|i| random_spec(base + i as u64, 1 + i % 2, 1, true))
        .collect()
}

pub fn random_function(n: usize, m: usize, grid: &QuadGrid<f64>, seed: u64) -> GridFunction<f64> {
    let mut r = rng(seed);
    let values = (0..grid.len(n))
        .map(|_| (0..m).map(|_| csmall(&mut r, 1.0)).collect())
        .collect();
    GridFunction::new(n, m, grid.q(), values).expect("shape matches")
}

/// A random tail point for level `j`.
pub fn random_tail(r: &mut ChaCha8Rng, j: usize, n: usize) -> Vec<f64> {
    (j..n).map(|_| r.gen_range(0.0..1.0)).collect()
}

pub fn distance(a: &GridFunction<f64>, b: &GridFunction<f64>, grid: &QuadGrid<f64>) -> f64 {
    a.axpy(Complex64::new(-1.0, 0.0), b).norm(grid)
}
