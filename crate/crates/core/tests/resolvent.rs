mod common;

use lattice_cf::io::{GridFunctionFile, SourceFile};
use lattice_cf::quadrature::QuadGrid;
use lattice_cf::resolvent::{
    apply_operator, apply_resolvent, residual, source_response, Resolvent, ResolventForm, Source,
};
use lattice_cf::{Complex64, Error};

#[test]
fn resolvent_inverts_random_general_operators() {
    let grid = QuadGrid::new(8).unwrap();
    for (i, cs) in common::corpus(200, 8, false).iter().enumerate() {
        let bound = cs.spec.norm_bound(cs.n, 9).unwrap();
        let lam = Complex64::new(0.3, bound + 1.0);
        let f = common::random_function(cs.n, cs.m, &grid, i as u64);
        let u = apply_resolvent(&cs.spec, lam, &f, &grid).unwrap();
        assert!(
            residual(&cs.spec, lam, &u, &f, &grid).unwrap() < 1e-10,
            "seed {}",
            cs.seed
        );
        let ecd = Resolvent::new(&cs.spec, lam, &grid)
            .unwrap()
            .with_ecd(&cs.spec)
            .unwrap()
            .apply(&f, ResolventForm::Ecd)
            .unwrap();
        assert!(common::distance(&u, &ecd, &grid) < 1e-10 * f.norm(&grid));
    }
}

#[test]
fn resolvent_is_symmetric_for_self_adjoint_real_lambda() {
    let grid = QuadGrid::new(8).unwrap();
    for cs in common::corpus(300, 4, true) {
        let lam = Complex64::new(cs.spec.norm_bound(cs.n, 9).unwrap() + 1.0, 0.0);
        let res = Resolvent::new(&cs.spec, lam, &grid).unwrap();
        let f = common::random_function(cs.n, cs.m, &grid, 1);
        let h = common::random_function(cs.n, cs.m, &grid, 2);
        let rf = res.apply(&f, ResolventForm::Standard).unwrap();
        let rh = res.apply(&h, ResolventForm::Standard).unwrap();
        assert!((rf.inner(&h, &grid) - f.inner(&rh, &grid)).norm() < 1e-10);
    }
}

#[test]
fn operator_is_linear() {
    let grid = QuadGrid::new(6).unwrap();
    let cs = common::random_spec(5, 2, 2, false);
    let f = common::random_function(2, 2, &grid, 3);
    let h = common::random_function(2, 2, &grid, 4);
    let z = Complex64::new(0.4, -1.1);
    let lhs = apply_operator(&cs.spec, &f.axpy(z, &h), &grid).unwrap();
    let rhs = apply_operator(&cs.spec, &f, &grid)
        .unwrap()
        .axpy(z, &apply_operator(&cs.spec, &h, &grid).unwrap());
    assert!(common::distance(&lhs, &rhs, &grid) < 1e-12);
}

#[test]
fn sources_from_files() {
    let grid = QuadGrid::new(10).unwrap();
    let cs = common::random_spec(9, 2, 2, true);
    let src: SourceFile =
        serde_json::from_str(r#"{"fourier": [{"shift": [1, 0], "component": 1, "amplitude": [1.0, 0.5]}]}"#).unwrap();
    let r = source_response(&cs.spec, Complex64::new(0.0, 2.0), &src.to_source(2).unwrap(), &grid).unwrap();
    assert!(r.residual < 1e-10);
    assert!((r.source_norm - 1.25f64.sqrt()).abs() < 1e-12);
    let file = GridFunctionFile::from_function(&r.response);
    let back = file.to_function::<f64>().unwrap();
    assert_eq!(back, r.response);
    let expr: SourceFile = serde_json::from_str(r#"{"expr": ["cos(2*pi*k1)", "k2"]}"#).unwrap();
    assert!(matches!(expr.to_source(2).unwrap(), Source::Expr(ref v) if v.len() == 2));
}

#[test]
fn real_lambda_on_the_spectrum_of_a_constant_is_refused() {
    let grid = QuadGrid::new(6).unwrap();
    let spec = lattice_cf::OperatorSpec64::from_exprs(1, &[vec![vec!["1".into()]], vec![vec!["0".into()]]]).unwrap();
    let f = common::random_function(1, 1, &grid, 0);
    let err = apply_resolvent(&spec, Complex64::new(1.0, 0.0), &f, &grid).unwrap_err();
    assert!(matches!(err, Error::SpectralProximity { .. }), "{err}");
}
