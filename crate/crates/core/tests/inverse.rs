use lattice_cf::cfrac::DEFAULT_MARGIN;
use lattice_cf::inverse::{
    sign_change_check, synthesize_operator, validate_branches, verify_roundtrip, BranchSpec, DEFAULT_PROBE,
};
use lattice_cf::io::{BranchFile, SpecFile};
use lattice_cf::quadrature::QuadGrid;
use lattice_cf::spectrum::SpectrumOptions;
use lattice_cf::Error;

fn branches(list: &[&str]) -> BranchSpec<f64> {
    let v: Vec<String> = list.iter().map(|s| s.to_string()).collect();
    BranchSpec::parse(list.len() - 1, &v).unwrap()
}

#[test]
fn one_dimensional_roundtrip() {
    let b = branches(&["cos(2*pi*k1)", "1.5"]);
    assert!(validate_branches(&b, DEFAULT_PROBE, DEFAULT_MARGIN).unwrap().passed());
    let grid = QuadGrid::new(96).unwrap();
    let spec = synthesize_operator(&b, &grid, DEFAULT_MARGIN).unwrap();
    // a delta potential v on the band [-1, 1] binds at sqrt(1 + v^2)
    let v = spec.eval_coeff(1, &[]).unwrap()[(0, 0)].re;
    assert!(((1.0 + v * v).sqrt() - 1.5).abs() < 1e-8, "A1 = {v}");
    let opts = SpectrumOptions {
        k_points: 17,
        ..Default::default()
    };
    let report = verify_roundtrip(&b, &spec, &grid, opts).unwrap();
    assert!(report.max_deviation() < 1e-8, "{report:?}");
    assert!(report.levels.iter().all(|l| l.missing == 0 && l.extra == 0));
}

#[test]
fn worked_example_synthesis_passes_sign_checks() {
    let b = branches(&["k1*k2", "0.5 + k2", "2"]);
    let grid = QuadGrid::new(32).unwrap();
    let spec = synthesize_operator(&b, &grid, DEFAULT_MARGIN).unwrap();
    let checks = sign_change_check(&spec, &b, &grid, 1e-6).unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c.failures == 0), "{checks:?}");
}

#[test]
fn overlapping_branches_violate_the_condition() {
    let b = branches(&["k1*k2", "0.5*k2", "2"]);
    let report = validate_branches(&b, DEFAULT_PROBE, DEFAULT_MARGIN).unwrap();
    assert!(!report.passed());
    assert!(matches!(report.into_result(), Err(Error::BranchCondition(_))));
}

#[test]
fn synthesized_operator_survives_a_file_roundtrip() {
    let file: BranchFile = serde_json::from_str(r#"{"N": 1, "branches": ["0.3*sin(2*pi*k1)", "-1"]}"#).unwrap();
    let b = file.to_branches::<f64>().unwrap();
    let grid = QuadGrid::new(16).unwrap();
    let spec = synthesize_operator(&b, &grid, DEFAULT_MARGIN).unwrap();
    let text = serde_json::to_string(&SpecFile::from_spec(&spec, true).unwrap()).unwrap();
    let back: SpecFile = serde_json::from_str(&text).unwrap();
    let spec2 = back.to_spec::<f64>().unwrap();
    for &x in grid.nodes() {
        assert_eq!(spec.eval_coeff(0, &[x]).unwrap(), spec2.eval_coeff(0, &[x]).unwrap());
    }
    assert_eq!(spec.eval_coeff(1, &[]).unwrap(), spec2.eval_coeff(1, &[]).unwrap());
}
