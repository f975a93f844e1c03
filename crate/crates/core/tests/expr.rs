use lattice_cf::expr::MatrixExpr;
use lattice_cf::Complex64;

#[test]
fn display_roundtrips_through_the_parser() {
    for text in [
        "exp(-2*pi*i*k1)*(1+exp(2*pi*i*k2))+1",
        "-k1^2 + 3/(1 - k2)",
        "conj(sqrt(k1 + i)) - ln(2)",
        "(k1 - k2) - (k1 - k2)^-2",
    ] {
        let e = MatrixExpr::parse(text, 2).unwrap();
        let again = MatrixExpr::parse(&e.to_string(), 2).unwrap();
        for k in [[0.1, 0.3], [0.77, 0.42]] {
            let a: Complex64 = e.eval(&k).unwrap();
            let b: Complex64 = again.eval(&k).unwrap();
            assert!((a - b).norm() < 1e-14, "{text} -> {e}");
        }
    }
}

#[test]
fn compiled_matches_tree_evaluation() {
    let e = MatrixExpr::parse("sin(2*pi*k1)*cos(pi*k2) + i*k1*k2^3", 2).unwrap();
    let c = e.compile::<f64>().unwrap();
    for k in [[0.0, 0.0], [0.25, 0.5], [0.9, 0.1]] {
        let a: Complex64 = e.eval(&k).unwrap();
        assert!((a - c.eval(&k).unwrap()).norm() < 1e-15);
    }
}

#[test]
fn errors_carry_positions() {
    let err = MatrixExpr::parse("k1 + k3", 2).unwrap_err();
    assert!(err.to_string().contains("k3"), "{err}");
    assert!(MatrixExpr::parse("k1^k2", 2).is_err());
    assert!(MatrixExpr::parse("foo(k1)", 2).is_err());
    assert!(MatrixExpr::parse("(k1", 2).is_err());
}
