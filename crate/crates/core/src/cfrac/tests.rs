use num_complex::Complex64;

use super::*;
use crate::test_specs::{constants, example_a1, graphene, trig_general, trig_hermitian, worked_example};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tail(v: &[f64]) -> KPoint<f64> {
    KPoint::new(v.to_vec()).unwrap()
}

fn field_diff(a: &NodeField<CMatrix<f64>>, b: &NodeField<CMatrix<f64>>) -> f64 {
    assert_eq!(a.len(), b.len());
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).max_norm())
        .fold(0.0, f64::max)
}

#[test]
fn constant_coefficients() {
    let spec = constants(2.0, 3.0);
    let g = QuadGrid::new(8).unwrap();
    let lam = c(0.5, 0.0);
    let st = cf_eval(&spec, 1, lam, &tail(&[]), &g).unwrap();
    let f0 = st.levels[0].f.values()[0][(0, 0)];
    assert!((f0 - c(1.5, 0.0)).norm() < 1e-15);
    assert!((st.top_f()[(0, 0)] - c(4.5, 0.0)).norm() < 1e-14);
    assert!((st.top_g()[(0, 0)] - c(3.0, 0.0)).norm() < 1e-14);
    assert!((st.top_gbar()[(0, 0)] - c(3.0, 0.0)).norm() < 1e-14);
    let ecd = cf_eval_via_ecd(&spec, 1, lam, &tail(&[]), &g).unwrap();
    assert!((ecd.e(1).values()[0][(0, 0)] - c(3.0, 0.0)).norm() < 1e-14);
}

#[test]
fn worked_example_first_fraction() {
    let spec = worked_example(0.935);
    let g = QuadGrid::new(64).unwrap();
    for k2 in [0.25, 0.5, 0.75] {
        let cf = ContinuedFraction::new(&spec, 1, &[k2], &g).unwrap();
        let top = cf.top(c(2.0, 0.0)).unwrap();
        let exact = example_a1(k2) + k2 / (1.0 - 0.5 * k2).ln();
        assert!((top.f.unwrap()[(0, 0)].re - exact).abs() < 1e-8, "k2={k2}");
    }
}

#[test]
fn graphene_line_defect_entry_above_the_bands() {
    let v1 = 2.0;
    let spec = graphene(v1, 0.0);
    let g = QuadGrid::new(64).unwrap();
    let lam = 5.0;
    for k2 in [0.0, 0.2, 0.5, 0.85] {
        let cf = ContinuedFraction::new(&spec, 1, &[k2], &g).unwrap();
        let top = cf.top(c(lam, 0.0)).unwrap();
        let cs = (std::f64::consts::PI * k2).cos();
        let p = lam * lam - 1.0 - 4.0 * cs * cs;
        let exact = 1.0 - v1 * lam / (p * p - 16.0 * cs * cs).sqrt();
        assert!((top.g[(0, 0)] - c(exact, 0.0)).norm() < 1e-8, "k2={k2}");
        assert!((top.g[(1, 1)] - c(1.0, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn top_and_full_state_agree() {
    let spec = trig_hermitian();
    let g = QuadGrid::new(12).unwrap();
    let lam = c(3.1, 0.4);
    let cf = ContinuedFraction::new(&spec, 2, &[], &g).unwrap();
    let top = cf.top(lam).unwrap();
    let st = cf.state(lam).unwrap();
    assert!((&top.g - st.top_g()).max_norm() < 1e-14);
    assert!((&top.gbar - st.top_gbar()).max_norm() < 1e-14);
    assert!((&top.f.unwrap() - st.top_f()).max_norm() < 1e-12);
    let cf1 = ContinuedFraction::new(&spec, 1, &[0.3], &g).unwrap();
    let st1 = cf1.state(lam).unwrap();
    assert_eq!(st1.k_tail, vec![0.3]);
    assert_eq!(st1.level(), 1);
}

fn check_cross_paths(spec: &OperatorSpec<f64>, lam: Complex64, tail_v: &[f64], level: usize) {
    let g = QuadGrid::new(10).unwrap();
    let st = cf_eval(spec, level, lam, &tail(tail_v), &g).unwrap();
    let ecd = cf_eval_via_ecd(spec, level, lam, &tail(tail_v), &g).unwrap();
    let k = st.kernels.as_ref().unwrap();
    for j in 0..=level {
        assert!(field_diff(ecd.e(j), &st.levels[j].g) < 1e-9, "E_{j}");
        assert!(field_diff(ecd.d(j), k.d(j)) < 1e-9, "D_{j}");
        assert!(field_diff(ecd.h(j + 1), k.h(j + 1)) < 1e-9, "H_{}", j + 1);
        if j < level {
            let fi = st.levels[j].f_inv.as_ref().unwrap();
            assert!(field_diff(&k.d(j).mean_leading(j, &g), fi) < 1e-9, "<D_{j}>");
        }
        for (a, b) in st.levels[j].g.values().iter().zip(st.levels[j].gbar.values()) {
            let (da, db) = (a.det(), b.det());
            assert!((da - db).norm() <= 1e-10 * da.norm().max(1e-300));
        }
    }
}

#[test]
fn continued_fraction_and_ecd_agree() {
    check_cross_paths(&trig_hermitian(), c(0.0, 10.0), &[], 2);
    check_cross_paths(&trig_hermitian(), c(4.5, 0.0), &[0.7], 1);
    check_cross_paths(&trig_general(), c(-0.3, 2.0), &[], 2);
    check_cross_paths(&graphene(2.0, -1.0), c(0.2, 1.5), &[], 2);
}

#[test]
fn fractions_stay_hermitian_for_real_lambda() {
    let spec = trig_hermitian();
    let g = QuadGrid::new(10).unwrap();
    let st = cf_eval(&spec, 2, c(6.0, 0.0), &tail(&[]), &g).unwrap();
    for l in &st.levels {
        for f in l.f.values() {
            assert!(crate::linalg::hermitian_defect(f) < 1e-10);
        }
    }
}

#[test]
fn kernels_are_inverse_products() {
    let spec = graphene(2.0, 1.0);
    let g = QuadGrid::new(8).unwrap();
    let st = cf_eval(&spec, 2, c(0.5, 0.7), &tail(&[]), &g).unwrap();
    let k = st.kernels.as_ref().unwrap();
    let id = CMatrix::<f64>::identity(2);
    for i in 0..g.len(2) {
        let g0 = &st.levels[0].g.values()[i];
        let g1 = st.levels[1].g.broadcast(i, 2);
        let g2 = st.levels[2].g.broadcast(i, 2);
        let prod = &(g0 * g1) * g2;
        assert!((&(&prod * &k.d(2).values()[i]) - &id).max_norm() < 1e-12);
        let gb0 = &st.levels[0].gbar.values()[i];
        let gb1 = st.levels[1].gbar.broadcast(i, 2);
        let prod = gb1 * gb0;
        assert!((&(&prod * &k.h(2).values()[i]) - &id).max_norm() < 1e-12);
    }
}

#[test]
fn lambda_on_inner_spectrum_is_refused() {
    let spec = constants(2.0, 3.0);
    let g = QuadGrid::new(4).unwrap();
    let cf = ContinuedFraction::new(&spec, 1, &[], &g).unwrap();
    match cf.top(c(2.0, 0.0)) {
        Err(Error::SpectralProximity { level: 0, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
    // inside the margin but not exactly singular
    assert!(cf.top(c(2.0 + 1e-8, 0.0)).is_err());
    assert!(cf.top(c(2.0 + 1e-4, 0.0)).is_ok());
}

#[test]
fn reconstruction_round_trips() {
    let g = QuadGrid::new(8).unwrap();
    for spec in [trig_hermitian(), trig_general()] {
        let cf = ContinuedFraction::new(&spec, 2, &[], &g).unwrap();
        let samples: Vec<_> = [c(7.0, 0.0), c(9.0, 3.0)]
            .iter()
            .map(|&l| cf.state(l).unwrap())
            .collect();
        let gs: Vec<_> = samples.iter().map(SpectralSamples::g_of).collect();
        let fs: Vec<_> = samples.iter().map(SpectralSamples::f_of).collect();
        for rec in [
            reconstruct_from_g(&gs, &g).unwrap(),
            reconstruct_from_f(&fs, &g).unwrap(),
        ] {
            for r in 0..=2 {
                assert!(field_diff(&rec[r], cf.coefficient_field(r)) < 1e-9, "A_{r}");
            }
        }
    }
}

#[test]
fn graphene_coefficients_from_fractions() {
    let g = QuadGrid::new(16).unwrap();
    let spec = graphene(2.0, 7.0);
    let st = cf_eval(&spec, 2, c(6.0, 0.0), &tail(&[]), &g).unwrap();
    let rec = reconstruct_from_f(&[SpectralSamples::f_of(&st)], &g).unwrap();
    let a1 = CMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 0.0]]);
    let a2 = CMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 7.0]]);
    assert!(rec[1].values().iter().all(|x| (x - &a1).max_norm() < 1e-9));
    assert!((&rec[2].values()[0] - &a2).max_norm() < 1e-9);
    // A_0 = λI + (A_0 - λI)
    assert!(field_diff(&rec[0], &st.levels[0].a) < 1e-14);
}

#[test]
fn worked_example_coefficient_from_fractions() {
    let g = QuadGrid::new(32).unwrap();
    let spec = worked_example(0.935);
    let st = cf_eval(&spec, 2, c(3.0, 0.0), &tail(&[]), &g).unwrap();
    let rec = reconstruct_from_f(&[SpectralSamples::f_of(&st)], &g).unwrap();
    for (i, a) in rec[1].values().iter().enumerate() {
        let k2 = g.nodes()[i];
        assert!((a[(0, 0)].re - example_a1(k2)).abs() < 1e-8);
    }
}

#[test]
fn constant_coefficient_from_fraction() {
    let g = QuadGrid::new(4).unwrap();
    let st = cf_eval(&constants(2.0, 3.0), 1, c(-1.0, 0.0), &tail(&[]), &g).unwrap();
    let rec = reconstruct_from_f(&[SpectralSamples::f_of(&st)], &g).unwrap();
    assert!((rec[1].values()[0][(0, 0)] - c(3.0, 0.0)).norm() < 1e-14);
}

#[test]
fn mixed_spectral_data_is_rejected() {
    let g = QuadGrid::new(8).unwrap();
    let a = cf_eval(&trig_hermitian(), 2, c(7.0, 0.0), &tail(&[]), &g).unwrap();
    let b = cf_eval(&graphene(1.0, 1.0), 2, c(9.0, 3.0), &tail(&[]), &g).unwrap();
    let err = reconstruct_from_g(&[SpectralSamples::g_of(&a), SpectralSamples::g_of(&b)], &g).unwrap_err();
    assert!(matches!(err, Error::InconsistentSpectralData { .. }));
}
