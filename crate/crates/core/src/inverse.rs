//! Scalar inverse problem: from branch functions `λ_0(k), λ_1(k_1), ...,
//! λ_N` build the `M = 1` operator whose dispersion branches they are.
//!
//! `A_0 = λ_0` and, level by level, `A_j(k_j) = -1 / <F_{j-1}^{-1}(λ_j(k_j))>_j`,
//! tabulated on the quadrature nodes of `k_j`.

use num_complex::Complex;
use serde::Serialize;

use crate::cfrac::{ordered_map, proximity, ContinuedFraction};
use crate::error::{BranchViolation, Error, Result};
use crate::linalg::CMatrix;
use crate::operator::{probe_points, Coefficient, ExprMatrix, OperatorSpec, TabulatedCoefficient, PROBE_POINTS};
use crate::quadrature::QuadGrid;
use crate::scalar::{lit, to_f64, Real};
use crate::spectrum::{SpectrumOptions, SpectrumSolver};

/// Points per axis used to sample projections during validation.
pub const DEFAULT_PROBE: usize = 33;

/// Imaginary part tolerated in a branch value.
const REAL_TOL: f64 = 1e-12;

/// `N + 1` real branch functions, `λ_j` depending on `k_{j+1..N}` only.
#[derive(Debug, Clone)]
pub struct BranchSpec<T> {
    sources: Vec<String>,
    funcs: OperatorSpec<T>,
}

impl<T: Real> BranchSpec<T> {
    /// Branches as expressions in `k1..kN`.
    pub fn parse(n: usize, branches: &[String]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("branch data needs N >= 1".into()));
        }
        if branches.len() != n + 1 {
            return Err(Error::Invalid(format!(
                "N = {n} needs {} branch functions, got {}",
                n + 1,
                branches.len()
            )));
        }
        let coeffs = branches
            .iter()
            .enumerate()
            .map(|(j, s)| ExprMatrix::parse(j, n, &[vec![s.clone()]]).map(Coefficient::Expr))
            .collect::<Result<Vec<_>>>()?;
        let funcs = OperatorSpec::new(n, 1, coeffs)?;
        if let Some(v) = funcs.check_dependence(PROBE_POINTS)?.first() {
            return Err(Error::Invalid(format!(
                "branch {} depends on k1..k{}: values differ by {:.3e} between {:?} and {:?}",
                v.level, v.level, v.difference, v.k_a, v.k_b
            )));
        }
        Ok(BranchSpec {
            sources: branches.to_vec(),
            funcs,
        })
    }

    /// Branches given as the coefficients of a scalar operator description.
    pub fn from_functions(funcs: OperatorSpec<T>) -> Result<Self> {
        if funcs.m() != 1 {
            return Err(Error::Invalid("branch functions must be scalar".into()));
        }
        Ok(BranchSpec {
            sources: Vec::new(),
            funcs,
        })
    }

    pub fn n(&self) -> usize {
        self.funcs.n()
    }

    /// Expression sources, empty for function-defined branches.
    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    /// `λ_j(k_{j+1..N})`.
    pub fn value(&self, j: usize, tail: &[T]) -> Result<T> {
        let z = self.funcs.eval_coeff(j, tail)?[(0, 0)];
        if z.im.abs() > lit::<T>(REAL_TOL) * (T::one() + z.re.abs()) {
            return Err(Error::Invalid(format!(
                "branch {j} is not real at {:?}",
                tail.iter().map(|&x| to_f64(x)).collect::<Vec<_>>()
            )));
        }
        Ok(z.re)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCheck {
    pub level: usize,
    /// Smallest distance of `λ_j` to a lower projection over the probes.
    pub min_distance: f64,
    pub probes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    pub levels: Vec<LevelCheck>,
    pub margin: f64,
    pub violations: Vec<BranchViolation>,
}

impl BranchReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<BranchReport> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::BranchCondition(self.violations))
        }
    }
}

/// Check `λ_j(k_j) ∉ λ_r([0,1]^{j-r}, k_j)` for all `r < j`, with margin,
/// on a uniform probe grid. The projection of a continuous branch over a
/// box is an interval, sampled here by its minimum and maximum; the test
/// is therefore necessary but not sufficient.
pub fn validate_branches<T: Real>(b: &BranchSpec<T>, probe: usize, margin: T) -> Result<BranchReport> {
    let n = b.n();
    let mut levels = Vec::with_capacity(n);
    let mut violations = Vec::new();
    for j in 1..=n {
        let tails = probe_points::<T>(n - j, probe);
        let mut min_distance = f64::INFINITY;
        for tail in &tails {
            let value = b.value(j, tail)?;
            let mut dist = T::infinity();
            for r in 0..j {
                let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
                for lead in probe_points::<T>(j - r, probe) {
                    let mut k = lead;
                    k.extend_from_slice(tail);
                    let v = b.value(r, &k)?;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                let d = if value < lo {
                    lo - value
                } else if value > hi {
                    value - hi
                } else {
                    T::zero()
                };
                dist = dist.min(d);
            }
            min_distance = min_distance.min(to_f64(dist));
            if dist <= margin {
                violations.push(BranchViolation {
                    level: j,
                    k_tail: tail.iter().map(|&x| to_f64(x)).collect(),
                    value: to_f64(value),
                    distance: to_f64(dist),
                });
            }
        }
        levels.push(LevelCheck {
            level: j,
            min_distance,
            probes: tails.len(),
        });
    }
    Ok(BranchReport {
        levels,
        margin: to_f64(margin),
        violations,
    })
}

/// The unique scalar operator with the given branches. `A_0` and the
/// inner `A_j` are tables on the nodes of `grid`; `A_N` is a constant.
pub fn synthesize_operator<T: Real>(b: &BranchSpec<T>, grid: &QuadGrid<T>, margin: T) -> Result<OperatorSpec<T>> {
    let n = b.n();
    let zero = Coefficient::Const(CMatrix::zeros(1, 1));
    let mut coeffs = vec![zero; n + 1];
    let table = |dims: usize, vals: Vec<CMatrix<T>>| -> Result<Coefficient<T>> {
        Ok(if dims == 0 {
            Coefficient::Const(vals.into_iter().next().expect("one value"))
        } else {
            Coefficient::Table(TabulatedCoefficient::new(dims, grid.clone(), vals)?)
        })
    };
    let a0 = ordered_map(grid.len(n), true, |idx| {
        let v = b.value(0, &grid.point(idx, n))?;
        Ok(CMatrix::scalar(1, Complex::new(v, T::zero())))
    })?;
    coeffs[0] = table(n, a0)?;
    for j in 1..=n {
        let partial = OperatorSpec::new(n, 1, coeffs.clone())?;
        let dims = n - j;
        let vals = ordered_map(grid.len(dims), true, |t| {
            let tail = grid.point(t, dims);
            let lam = Complex::new(b.value(j, &tail)?, T::zero());
            let cf = ContinuedFraction::new(&partial, j, &tail, grid)?.with_margin(margin);
            let top = cf.top(lam)?;
            let mean = top.mean.expect("level >= 1")[(0, 0)];
            if mean.norm() == T::zero() {
                return Err(proximity(j, lam, T::zero()));
            }
            Ok(CMatrix::scalar(1, -mean.inv()))
        })?;
        coeffs[j] = table(dims, vals)?;
    }
    OperatorSpec::new(n, 1, coeffs)
}

#[derive(Debug, Clone, Serialize)]
pub struct SignCheck {
    pub level: usize,
    pub nodes: usize,
    /// Nodes where `F_j` does not change sign across `λ_j ± ε`.
    pub failures: usize,
}

/// At each synthesis node, `F_j(λ_j ± ε)` must have opposite signs.
pub fn sign_change_check<T: Real>(
    spec: &OperatorSpec<T>,
    b: &BranchSpec<T>,
    grid: &QuadGrid<T>,
    eps: T,
) -> Result<Vec<SignCheck>> {
    let n = spec.n();
    (1..=n)
        .map(|j| {
            let dims = n - j;
            let flips = ordered_map(grid.len(dims), true, |t| {
                let tail = grid.point(t, dims);
                let lam = b.value(j, &tail)?;
                let cf = ContinuedFraction::new(spec, j, &tail, grid)?;
                let f = |x: T| -> Result<T> {
                    let s = cf.top(Complex::new(x, T::zero()))?;
                    Ok(s.f.map_or(T::nan(), |f| f[(0, 0)].re))
                };
                Ok(f(lam - eps)? * f(lam + eps)? < T::zero())
            })?;
            Ok(SignCheck {
                level: j,
                nodes: flips.len(),
                failures: flips.iter().filter(|&&ok| !ok).count(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripLevel {
    pub level: usize,
    pub points: usize,
    /// Largest distance from a prescribed branch value to the nearest
    /// recomputed root.
    pub max_deviation: f64,
    /// Points without any recomputed root.
    pub missing: usize,
    /// Roots beyond the first at a point.
    pub extra: usize,
    pub hull: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub levels: Vec<RoundtripLevel>,
}

impl RoundtripReport {
    pub fn max_deviation(&self) -> f64 {
        self.levels.iter().map(|l| l.max_deviation).fold(0.0, f64::max)
    }
}

/// Recompute every branch of `spec` with the spectrum solver and compare
/// with the prescribed ones on the solver's k-grid.
pub fn verify_roundtrip<T: Real>(
    b: &BranchSpec<T>,
    spec: &OperatorSpec<T>,
    grid: &QuadGrid<T>,
    opts: SpectrumOptions<T>,
) -> Result<RoundtripReport> {
    let solver = SpectrumSolver::new(spec, grid, opts)?;
    let comps = solver.full_spectrum()?;
    let levels = comps
        .iter()
        .map(|c| {
            let j = c.level;
            let mut level = RoundtripLevel {
                level: j,
                points: c.grid.len(),
                max_deviation: 0.0,
                missing: 0,
                extra: 0,
                hull: c.hull.iter().map(|i| (to_f64(i.lo), to_f64(i.hi))).collect(),
            };
            for (t, roots) in c.roots.iter().enumerate() {
                let expected = b.value(j, &c.grid.point::<T>(t))?;
                match roots.iter().map(|z| to_f64((z.re - expected).abs())).reduce(f64::min) {
                    Some(d) => level.max_deviation = level.max_deviation.max(d),
                    None => {
                        level.missing += 1;
                        level.max_deviation = f64::INFINITY;
                    }
                }
                level.extra += roots.len().saturating_sub(1);
            }
            Ok(level)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RoundtripReport { levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfrac::DEFAULT_MARGIN;
    use crate::test_specs::example_a1;

    fn example(l1: &str) -> BranchSpec<f64> {
        BranchSpec::parse(2, &["k1*k2".into(), l1.into(), "2".into()]).unwrap()
    }

    fn tables(spec: &OperatorSpec<f64>) -> Vec<Vec<f64>> {
        spec.coefficients()
            .iter()
            .map(|c| match c {
                Coefficient::Table(t) => t.values().iter().map(|v| v[(0, 0)].re).collect(),
                Coefficient::Const(a) => vec![a[(0, 0)].re],
                _ => panic!("unexpected coefficient"),
            })
            .collect()
    }

    #[test]
    fn validation_of_example_and_overlap() {
        let ok = validate_branches(&example("0.5 + k2"), DEFAULT_PROBE, DEFAULT_MARGIN).unwrap();
        assert!(ok.passed());
        assert!((ok.levels[0].min_distance - 0.5).abs() < 1e-12);
        assert!((ok.levels[1].min_distance - 0.5).abs() < 1e-12);
        let bad = validate_branches(&example("0.5*k2"), DEFAULT_PROBE, DEFAULT_MARGIN).unwrap();
        assert!(!bad.passed());
        assert!(bad.violations.iter().all(|v| v.level == 1 && v.distance == 0.0));
        assert!(matches!(bad.into_result(), Err(Error::BranchCondition(_))));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(BranchSpec::<f64>::parse(0, &["1".into()]).is_err());
        assert!(BranchSpec::<f64>::parse(2, &["k1".into(), "k2".into()]).is_err());
        // λ_1 may not depend on k1
        assert!(BranchSpec::<f64>::parse(2, &["k1".into(), "k1 + 3".into(), "9".into()]).is_err());
    }

    #[test]
    fn example_synthesis() {
        let g = QuadGrid::new(64).unwrap();
        let b = example("0.5 + k2");
        let spec = synthesize_operator(&b, &g, DEFAULT_MARGIN).unwrap();
        let t = tables(&spec);
        for (i, &x) in g.nodes().iter().enumerate() {
            assert!((t[1][i] - example_a1(x)).abs() < 1e-8, "A1 at node {i}");
        }
        assert!((t[2][0] - 0.935).abs() < 0.005, "A2 = {}", t[2][0]);
        let checks = sign_change_check(&spec, &b, &g, 1e-6).unwrap();
        assert!(checks.iter().all(|c| c.failures == 0), "{checks:?}");
    }

    #[test]
    fn different_branches_give_different_operators() {
        let g = QuadGrid::new(16).unwrap();
        let a = tables(&synthesize_operator(&example("0.5 + k2"), &g, DEFAULT_MARGIN).unwrap());
        let b = tables(&synthesize_operator(&example("0.6 + k2"), &g, DEFAULT_MARGIN).unwrap());
        let diff = a[1..]
            .iter()
            .flatten()
            .zip(b[1..].iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff > 1e-6);
    }

    #[test]
    fn roundtrip_recovers_branches() {
        let g = QuadGrid::new(32).unwrap();
        let b = example("0.5 + k2");
        let spec = synthesize_operator(&b, &g, DEFAULT_MARGIN).unwrap();
        let opts = SpectrumOptions {
            k_points: 17,
            window: Some((-1.0, 3.0)),
            scan: 800,
            ..Default::default()
        };
        let rep = verify_roundtrip(&b, &spec, &g, opts).unwrap();
        assert_eq!(rep.levels.len(), 3);
        assert!(rep.levels.iter().all(|l| l.missing == 0 && l.extra == 0), "{rep:?}");
        assert!(rep.max_deviation() < 1e-6, "{rep:?}");
    }
}
