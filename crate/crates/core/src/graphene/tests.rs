use super::*;
use crate::linalg::{lu_det_inv, CMatrix};
use crate::operator::HERMITIAN_TOL;
use crate::spectrum::{SpectrumOptions, SpectrumSolver};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn model_coefficients() {
    let m = build_graphene::<f64>(2.0, 0.0).unwrap();
    let a1 = m.spec.eval_coeff(1, &[0.3]).unwrap();
    assert_eq!(a1, CMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 0.0]]));
    assert_eq!(m.spec.eval_coeff(2, &[]).unwrap(), CMatrix::zeros(2, 2));
    let a0 = m.spec.eval_coeff(0, &[0.0, 0.0]).unwrap();
    assert!((&a0 - &CMatrix::from_real_rows(&[&[0.0, 3.0], &[3.0, 0.0]])).max_norm() < 1e-14);
    assert!(m.spec.hermitian_defect(7).unwrap() < 1e-15);
    let free = build_graphene::<f64>(0.0, 0.0).unwrap();
    assert_eq!(free.spec.eval_coeff(1, &[0.7]).unwrap(), CMatrix::zeros(2, 2));
}

#[test]
fn sigma0_closed_form_values() {
    let (lo, hi) = closed_form_sigma0(0.0f64, 0.0);
    assert!((lo + 3.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
    let (lo, hi) = closed_form_sigma0(1.0f64 / 3.0, 2.0 / 3.0);
    assert!(lo.abs() < 1e-7 && hi.abs() < 1e-7);
    let (lo, hi) = closed_form_sigma0(0.5f64, 0.0);
    assert!((lo + 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
}

#[test]
fn sigma0_closed_form_matches_coefficient_eigenvalues() {
    let m = build_graphene::<f64>(0.0, 0.0).unwrap();
    for (k1, k2) in [(0.1, 0.2), (0.77, 0.31), (0.5, 0.5)] {
        let a0 = m.spec.eval_coeff(0, &[k1, k2]).unwrap();
        let (_, hi) = closed_form_sigma0(k1, k2);
        let det = lu_det_inv(&(&a0 - &CMatrix::scalar(2, c(hi)))).det;
        assert!(det.norm() < 1e-12);
    }
}

#[test]
fn projection_curves() {
    let p = closed_form_projection(0.0f64);
    for (x, y) in p.iter().zip([-3.0, -1.0, 1.0, 3.0]) {
        assert!((x - y).abs() < 1e-14);
    }
    let p = closed_form_projection(0.5f64);
    for (x, y) in p.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert!((x - y).abs() < 1e-12);
    }
    for k2 in [0.1f64, 0.23, 0.4] {
        let a = closed_form_projection(k2);
        let b = closed_form_projection(1.0 - k2);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}

#[test]
fn guided_closed_form_values() {
    let [lo, hi] = closed_form_guided(0.5, 2.0);
    let r = 2.0 * 2f64.sqrt();
    assert!((lo - (3.0 - r)).abs() < 1e-12 && (hi - (3.0 + r)).abs() < 1e-12);
    // V1 = 0: the band edges (1 ± 2|cos πk2|)^2
    for k2 in [0.0, 0.2, 0.45] {
        let c = (std::f64::consts::PI * k2).cos().abs();
        let [lo, hi] = closed_form_guided(k2, 0.0);
        assert!((lo - (1.0 - 2.0 * c).powi(2)).abs() < 1e-12);
        assert!((hi - (1.0 + 2.0 * c).powi(2)).abs() < 1e-12);
    }
    let roots = guided_roots(0.5, 2.0);
    assert_eq!(roots.len(), 2, "{roots:?}");
    assert!((roots[0] - (1.0 - 2f64.sqrt())).abs() < 1e-12);
    assert!((roots[1] - (1.0 + 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn mean_closed_form_matches_quadrature() {
    let m = build_graphene::<f64>(1.0, 0.0).unwrap();
    let g = QuadGrid::new(128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tested = 0;
    while tested < 20 {
        let k2: f64 = rng.gen_range(0.0..1.0);
        let lam: f64 = rng.gen_range(-6.0..6.0);
        let [a, b, cc, d] = closed_form_projection(k2);
        let gap = [a - lam, lam - b, cc - lam, lam - d]
            .iter()
            .map(|x| x.abs())
            .fold(f64::INFINITY, f64::min);
        if in_projection(lam, k2) || gap < 0.3 {
            continue;
        }
        let top = ContinuedFraction::new(&m.spec, 1, &[k2], &g)
            .unwrap()
            .top(c(lam))
            .unwrap();
        let mean = top.mean.unwrap()[(0, 0)];
        let exact = closed_form_mean11(lam, k2);
        assert!((mean - c(exact)).norm() < 1e-8, "λ={lam} k2={k2}: {mean} vs {exact}");
        assert!((top.g[(0, 0)] - c(1.0 + exact)).norm() < 1e-8);
        tested += 1;
    }
}

#[test]
fn engine_guided_roots_match_closed_form() {
    let m = build_graphene::<f64>(2.0, 0.0).unwrap();
    let g = QuadGrid::new(256).unwrap();
    let opts = SpectrumOptions {
        k_points: 33,
        window: Some((-6.0, 6.0)),
        ..Default::default()
    };
    let solver = SpectrumSolver::new(&m.spec, &g, opts).unwrap();
    for k2 in [0.3, 0.5, 0.62] {
        let found: Vec<f64> = solver
            .roots_at_tail(1, &[k2])
            .unwrap()
            .roots
            .iter()
            .map(|z| z.re)
            .collect();
        let expected = guided_roots(k2, 2.0);
        assert_eq!(found.len(), expected.len(), "k2={k2}: {found:?} vs {expected:?}");
        for (x, y) in found.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-7, "k2={k2}: {x} vs {y}");
        }
    }
}

#[test]
fn d_loc_without_point_defect_is_one() {
    let m = build_graphene::<f64>(-3.5, 0.0).unwrap();
    let g = QuadGrid::new(48).unwrap();
    for lam in [-9.0, 7.5] {
        let d = d_loc(&m, c(lam), &g).unwrap();
        assert!((d - c(1.0)).norm() < 1e-14);
    }
}

#[test]
fn hermitian_eigenvalues_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 7;
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        a[i * n + i] = c(rng.gen_range(-2.0..2.0));
        for j in i + 1..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            a[i * n + j] = z;
            a[j * n + i] = z.conj();
        }
    }
    let ev = hermitian_eigenvalues(a.clone(), n).unwrap();
    assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    let trace: f64 = (0..n).map(|i| a[i * n + i].re).sum();
    assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-12);
    let frob: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    assert!((ev.iter().map(|x| x * x).sum::<f64>() - frob).abs() < 1e-11);
    let m = CMatrix::from_fn(n, n, |i, j| a[i * n + j]);
    let det = lu_det_inv(&m).det;
    assert!((det - c(ev.iter().product())).norm() < 1e-11);
    for &l in &ev {
        let shifted = &m - &CMatrix::scalar(n, c(l));
        assert!(lu_det_inv(&shifted).rcond < 1e-12);
    }
}

#[test]
fn free_torus_reproduces_bloch_values() {
    let p = 6;
    let lat = TorusLattice::<f64>::from_spec(&build_graphene(0.0, 0.0).unwrap().spec, p, DEFAULT_DECODE).unwrap();
    assert!((0..lat.size()).all(|s| lat.degree(s) == 3));
    assert!(lat.hermitian_defect() < HERMITIAN_TOL);
    assert!((0..lat.size()).all(|a| (0..lat.size()).all(|b| lat.entry(a, b).im.abs() < 1e-12)));
    let ev = lat.eigenvalues().unwrap();
    let mut expected = Vec::new();
    for n1 in 0..p {
        for n2 in 0..p {
            let (lo, hi) = closed_form_sigma0(n1 as f64 / p as f64, n2 as f64 / p as f64);
            expected.extend([lo, hi]);
        }
    }
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (x, y) in ev.iter().zip(&expected) {
        assert!((x - y).abs() < 1e-7, "{x} vs {y}");
    }
}

#[test]
fn torus_without_defects_stays_in_band() {
    let ev = torus_oracle::<f64>(0.0, 0.0, 12).unwrap();
    assert_eq!(ev.len(), 288);
    assert!(ev.iter().all(|x| x.abs() <= 3.0 + 0.05));
}

#[test]
fn torus_rejects_small_sizes() {
    assert!(torus_oracle::<f64>(0.0, 0.0, 3).is_err());
}
