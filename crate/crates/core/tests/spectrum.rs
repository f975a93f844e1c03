mod common;

use lattice_cf::quadrature::QuadGrid;
use lattice_cf::spectrum::roots::char_roots;
use lattice_cf::spectrum::{sigma_n_eigenvalues, Method, SpectrumOptions, SpectrumSolver};
use lattice_cf::OperatorSpec64;

fn scalar(rows: &[&str]) -> OperatorSpec64 {
    let rows: Vec<Vec<Vec<String>>> = rows.iter().map(|s| vec![vec![s.to_string()]]).collect();
    OperatorSpec64::from_exprs(rows.len() - 1, &rows).unwrap()
}

#[test]
fn constant_scalar_operator_has_one_eigenvalue_per_level() {
    // A0 = 0, A1 = a: F_1 = a - λ, the eigenvalue a on constants
    let spec = scalar(&["0", "4"]);
    let grid = QuadGrid::new(8).unwrap();
    let ev = sigma_n_eigenvalues(&spec, &grid, SpectrumOptions::default()).unwrap();
    assert_eq!(ev.len(), 1);
    assert!((ev[0] - 4.0).abs() < 1e-9, "{ev:?}");
}

#[test]
fn rank_one_defect_on_a_band() {
    // A0 = cos 2πk1 has σ0 = [-1, 1]; a delta potential v gives the bound
    // state ±sqrt(1 + v^2) on the side of its sign.
    let grid = QuadGrid::new(256).unwrap();
    for v in [0.5f64, -2.0] {
        let spec = scalar(&["cos(2*pi*k1)", &format!("{v:?}")]);
        // odd grid so that the band bottom k1 = 1/2 is sampled
        let opts = SpectrumOptions {
            k_points: 129,
            ..Default::default()
        };
        let solver = SpectrumSolver::new(&spec, &grid, opts).unwrap();
        let comps = solver.full_spectrum().unwrap();
        assert_eq!(comps[0].method, Method::Direct);
        assert_eq!(comps[1].method, Method::Bisection);
        let h = &comps[0].hull;
        assert!(
            h.len() == 1 && (h[0].lo + 1.0).abs() < 1e-9 && (h[0].hi - 1.0).abs() < 1e-9,
            "{h:?}"
        );
        let roots = &comps[1].roots[0];
        let exact = v.signum() * (1.0 + v * v).sqrt();
        assert_eq!(roots.len(), 1, "{roots:?}");
        assert!((roots[0].re - exact).abs() < 1e-9, "{} vs {exact}", roots[0].re);
    }
}

#[test]
fn sigma0_matches_characteristic_roots_on_corpus() {
    for cs in common::corpus(20, 8, true) {
        let grid = QuadGrid::new(4).unwrap();
        let opts = SpectrumOptions {
            k_points: 5,
            ..Default::default()
        };
        let solver = SpectrumSolver::new(&cs.spec, &grid, opts).unwrap();
        let s0 = solver.sigma0().unwrap();
        for (idx, r) in s0.roots.iter().enumerate() {
            let k = s0.grid.point::<f64>(idx);
            let a = cs.spec.eval_coeff(0, &k).unwrap();
            let mut direct: Vec<f64> = char_roots(&a).iter().map(|z| z.re).collect();
            direct.sort_by(f64::total_cmp);
            for (x, y) in r.iter().zip(&direct) {
                assert!((x.re - y).abs() < 1e-10);
            }
            for (lo, hi) in r.iter().zip(r.iter().skip(1)) {
                assert!(lo.re <= hi.re);
            }
        }
    }
}

#[test]
fn roots_lie_outside_the_exclusion_set() {
    let grid = QuadGrid::new(24).unwrap();
    for cs in common::corpus(70, 4, true) {
        let opts = SpectrumOptions {
            k_points: 9,
            ..Default::default()
        };
        let solver = SpectrumSolver::new(&cs.spec, &grid, opts).unwrap();
        let mut rng = common::rng(cs.seed);
        for j in 1..=cs.n {
            let tail = common::random_tail(&mut rng, j, cs.n);
            let pr = solver.roots_at_tail(j, &tail).unwrap();
            for z in &pr.roots {
                assert!(pr.exclusion.iter().all(|i| !i.contains(z.re)), "seed {}: {z}", cs.seed);
                let w = solver.window(j);
                assert!(w.contains(z.re));
            }
        }
    }
}

#[test]
fn forward_spectrum_is_reproducible() {
    let cs = common::random_spec(77, 2, 1, true);
    let grid = QuadGrid::new(12).unwrap();
    let run = || {
        let opts = SpectrumOptions {
            k_points: 9,
            ..Default::default()
        };
        let comps = SpectrumSolver::new(&cs.spec, &grid, opts)
            .unwrap()
            .full_spectrum()
            .unwrap();
        comps.iter().map(|c| c.roots.clone()).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}
