use std::path::Path;
use std::time::Instant;

use lattice_cf::graphene::{
    build_graphene, closed_form_projection, graphene_rows, guided_roots, TorusLattice, DEFAULT_DECODE,
};
use lattice_cf::inverse::{sign_change_check, synthesize_operator, validate_branches, verify_roundtrip};
use lattice_cf::io::{
    component_table, read_json, write_json, BranchFile, Cell, CoefficientFile, CsvTable, GridFunctionFile, Metadata,
    SourceFile, SpecFile,
};
use lattice_cf::operator::{probe_points, OperatorSpec};
use lattice_cf::quadrature::QuadGrid;
use lattice_cf::resolvent::{nearest_component, residual, Resolvent, ResolventForm};
use lattice_cf::spectrum::{DetKind, SpectralComponent, SpectrumOptions, SpectrumSolver};
use lattice_cf::{Complex64, Error};
use serde_json::{json, Value};

use crate::report::{CliError, EXIT_NUMERICAL, EXIT_VALIDATION};
use crate::{
    BranchesArgs, Det, Form, GrapheneArgs, InverseArgs, Model, ModelArgs, OracleArgs, ResolventArgs, SolverArgs,
    SpectrumArgs, ValidateArgs,
};

type CliResult<T = ()> = Result<T, CliError>;

/// Print a line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn model_file(m: &ModelArgs) -> CliResult<SpecFile> {
    match (m.model, &m.spec) {
        (Some(Model::Graphene), None) => Ok(SpecFile {
            n: 2,
            m: 2,
            a: graphene_rows(m.v1, m.v2)
                .into_iter()
                .map(CoefficientFile::Exprs)
                .collect(),
            self_adjoint_hint: true,
        }),
        (None, Some(path)) => Ok(read_json(path)?),
        (Some(_), Some(_)) => Err(CliError::usage("give either a spec file or --model, not both")),
        (None, None) => Err(CliError::usage("an operator is required: a spec file or --model")),
    }
}

fn load_model(m: &ModelArgs) -> CliResult<OperatorSpec<f64>> {
    Ok(model_file(m)?.to_spec()?)
}

fn options(s: &SolverArgs) -> SpectrumOptions<f64> {
    SpectrumOptions {
        k_points: s.kgrid,
        window: s.lwindow.as_ref().map(|w| (w[0], w[1])),
        scan: s.lscan,
        margin: s.margin,
        root_tol: s.root_tol,
        det: match s.det {
            Det::G => DetKind::G,
            Det::Gbar => DetKind::Gbar,
        },
        verify_winding: s.winding,
    }
}

fn create_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::from(Error::Io {
            path: dir.display().to_string(),
            source: e,
        })
    })
}

fn meta(q: Option<usize>, grid: usize, start: Instant, omit: bool) -> Metadata {
    Metadata {
        q,
        grid,
        wall_time_s: (!omit).then(|| start.elapsed().as_secs_f64()),
    }
}

fn level_summary(c: &SpectralComponent<f64>, seconds: Option<f64>) -> Value {
    json!({
        "level": c.level,
        "method": c.method,
        "hull": c.hull.iter().map(|i| [i.lo, i.hi]).collect::<Vec<_>>(),
        "points": c.roots.len(),
        "roots": c.roots.iter().map(Vec::len).sum::<usize>(),
        "failed_points": c.failed_points,
        "margin_to_inner": c.margin,
        "wall_time_s": seconds,
    })
}

/// `σ_0..σ_last`, each with its computation time.
fn components(solver: &SpectrumSolver<f64>, last: usize) -> CliResult<Vec<(SpectralComponent<f64>, f64)>> {
    let mut out: Vec<(SpectralComponent<f64>, f64)> = Vec::with_capacity(last + 1);
    let t = Instant::now();
    out.push((solver.sigma0()?, t.elapsed().as_secs_f64()));
    for j in 1..=last {
        let t = Instant::now();
        let inner: Vec<SpectralComponent<f64>> = out.iter().map(|c| c.0.clone()).collect();
        let c = solver.sigma_j(j, &inner)?;
        out.push((c, t.elapsed().as_secs_f64()));
    }
    Ok(out)
}

fn print_hulls(comps: &[(SpectralComponent<f64>, f64)]) {
    for (c, _) in comps {
        let hull: Vec<String> = c
            .hull
            .iter()
            .map(|i| {
                if i.lo == i.hi {
                    format!("{{{:.9}}}", i.lo)
                } else {
                    format!("[{:.9}, {:.9}]", i.lo, i.hi)
                }
            })
            .collect();
        let hull = if hull.is_empty() {
            "empty".to_string()
        } else {
            hull.join(" u ")
        };
        emit(&format!("sigma_{}: {hull}", c.level));
    }
}

pub fn spectrum(a: SpectrumArgs) -> CliResult {
    let start = Instant::now();
    let spec = load_model(&a.model)?;
    let grid = QuadGrid::new(a.solver.qnodes)?;
    let solver = SpectrumSolver::new(&spec, &grid, options(&a.solver))?;
    let comps = components(&solver, spec.n())?;
    create_dir(&a.out)?;
    let real = solver.is_self_adjoint();
    for (c, _) in &comps {
        component_table(c, spec.n(), real).write(
            &a.out.join(format!("sigma_{}.csv", c.level)),
            &meta(Some(a.solver.qnodes), a.solver.kgrid, start, a.omit_timing),
        )?;
    }
    let margins: Vec<f64> = comps.iter().filter_map(|c| c.0.margin).collect();
    let summary = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "N": spec.n(),
        "M": spec.m(),
        "Q": a.solver.qnodes,
        "kgrid": a.solver.kgrid,
        "lscan": a.solver.lscan,
        "margin": a.solver.margin,
        "root_tol": a.solver.root_tol,
        "self_adjoint": real,
        "levels": comps
            .iter()
            .map(|(c, t)| level_summary(c, (!a.omit_timing).then_some(*t)))
            .collect::<Vec<_>>(),
        "min_margin_to_inner": margins.iter().copied().reduce(f64::min),
        "disjoint": margins.iter().all(|&m| m > a.solver.margin),
        "wall_time_s": (!a.omit_timing).then(|| start.elapsed().as_secs_f64()),
    });
    write_json(&a.out.join("summary.json"), &summary)?;
    print_hulls(&comps);
    Ok(())
}

pub fn branches(a: BranchesArgs) -> CliResult {
    let start = Instant::now();
    let spec = load_model(&a.model)?;
    if a.level > spec.n() {
        return Err(CliError::usage(format!("level {} exceeds N = {}", a.level, spec.n())));
    }
    let grid = QuadGrid::new(a.solver.qnodes)?;
    let solver = SpectrumSolver::new(&spec, &grid, options(&a.solver))?;
    let comps = components(&solver, a.level)?;
    let c = &comps[a.level].0;
    create_dir(&a.out)?;
    let m = meta(Some(a.solver.qnodes), a.solver.kgrid, start, a.omit_timing);
    component_table(c, spec.n(), solver.is_self_adjoint())
        .write(&a.out.join(format!("branches_{}.csv", a.level)), &m)?;
    let mut header: Vec<String> = (a.level + 1..=spec.n()).map(|i| format!("k{i}")).collect();
    header.extend(
        [
            "lo",
            "hi",
            "scan_points",
            "failed_points",
            "sign_changes",
            "rejected",
            "roots",
        ]
        .map(String::from),
    );
    let mut scans = CsvTable::new(header);
    for (idx, recs) in c.scans.iter().enumerate() {
        let k = c.grid.point::<f64>(idx);
        for s in recs {
            let mut row: Vec<Cell> = k.iter().map(|&x| Cell::Real(x)).collect();
            row.extend([
                Cell::Real(s.lo),
                Cell::Real(s.hi),
                Cell::Int(s.scan_points as i64),
                Cell::Int(s.failed_points as i64),
                Cell::Int(s.sign_changes as i64),
                Cell::Int(s.rejected as i64),
                Cell::Int(s.roots as i64),
            ]);
            scans.push(row);
        }
    }
    scans.write(&a.out.join(format!("scans_{}.csv", a.level)), &m)?;
    print_hulls(&comps[a.level..]);
    Ok(())
}

pub fn resolvent(a: ResolventArgs) -> CliResult {
    let spec = load_model(&a.model)?;
    let source = match (&a.source_file, a.source.is_empty()) {
        (Some(p), _) => read_json::<SourceFile>(p)?,
        (None, false) => SourceFile::Expr(a.source.clone()),
        (None, true) => return Err(CliError::usage("a source is required: --source or --source-file")),
    };
    let source = source.to_source(spec.n())?;
    let grid = QuadGrid::new(a.qnodes)?;
    let lambda = Complex64::new(a.lambda[0], a.lambda[1]);
    let mut nearest = None;
    if !a.no_spectrum_check {
        let opts = SpectrumOptions {
            k_points: a.kgrid,
            margin: a.margin,
            ..Default::default()
        };
        let solver = SpectrumSolver::new(&spec, &grid, opts)?;
        let comps = solver.full_spectrum()?;
        nearest = nearest_component(&comps, lambda, solver.is_self_adjoint());
        if let Some((level, d)) = nearest.filter(|&(_, d)| d <= a.margin) {
            return Err(CliError {
                code: EXIT_NUMERICAL,
                message: format!("lambda is within {d:.3e} of sigma_{level}"),
                diagnostic: Some(json!({
                    "error": "spectral-proximity",
                    "lambda": [lambda.re, lambda.im],
                    "nearest_component": format!("sigma_{level}"),
                    "level": level,
                    "distance": d,
                })),
            });
        }
    }
    let f = source.sample(spec.n(), spec.m(), &grid)?;
    let mut res = Resolvent::new(&spec, lambda, &grid)?;
    let form = match a.form {
        Form::Standard => ResolventForm::Standard,
        Form::AdjointH => ResolventForm::AdjointH,
        Form::AdjointD => ResolventForm::AdjointD,
        Form::Ecd => {
            res = res.with_ecd(&spec)?;
            ResolventForm::Ecd
        }
    };
    let u = res.apply(&f, form)?;
    let rel = residual(&spec, lambda, &u, &f, &grid)?;
    write_json(&a.out, &GridFunctionFile::from_function(&u))?;
    let report = json!({
        "lambda": [lambda.re, lambda.im],
        "form": format!("{form:?}"),
        "Q": a.qnodes,
        "source_norm": f.norm(&grid),
        "response_norm": u.norm(&grid),
        "relative_residual": rel,
        "nearest_component": nearest.map(|(level, d)| json!({"level": level, "distance": d})),
        "output": a.out.display().to_string(),
    });
    emit(&serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(())
}

pub fn inverse(a: InverseArgs) -> CliResult {
    let file: BranchFile = read_json(&a.branches)?;
    let b = file.to_branches::<f64>()?;
    let validation = validate_branches(&b, a.probe, a.margin)?.into_result()?;
    let grid = QuadGrid::new(a.qnodes)?;
    let spec = synthesize_operator(&b, &grid, a.margin)?;
    write_json(&a.out, &SpecFile::from_spec(&spec, true)?)?;
    let signs = sign_change_check(&spec, &b, &grid, 1e-6)?;
    let roundtrip = if a.no_roundtrip {
        None
    } else {
        let opts = SpectrumOptions {
            k_points: a.kgrid,
            scan: a.lscan,
            margin: a.margin,
            ..Default::default()
        };
        Some(verify_roundtrip(&b, &spec, &grid, opts)?)
    };
    let a_n = spec.eval_coeff(spec.n(), &[])?[(0, 0)].re;
    let report = json!({
        "N": spec.n(),
        "Q": a.qnodes,
        "output": a.out.display().to_string(),
        "A_N": a_n,
        "validation": validation,
        "sign_changes": signs,
        "roundtrip": roundtrip,
        "max_roundtrip_deviation": roundtrip.as_ref().map(|r| r.max_deviation()),
    });
    let text = serde_json::to_string_pretty(&report).expect("serializable");
    match &a.report {
        Some(p) => write_json(p, &report)?,
        None => emit(&text),
    }
    Ok(())
}

pub fn validate(a: ValidateArgs) -> CliResult {
    let file = model_file(&a.model)?;
    let spec = file.build::<f64>()?;
    let dependence = spec.check_dependence(a.probe)?;
    let defect = spec.hermitian_defect(a.probe)?;
    let self_adjoint = spec.is_self_adjoint(a.probe)?;
    let mut expression_errors = Vec::new();
    for j in 0..=spec.n() {
        for k in probe_points::<f64>(spec.n() - j, a.probe) {
            match spec.eval_coeff(j, &k) {
                Ok(m) if m.is_finite() => {}
                Ok(_) => expression_errors.push(json!({"level": j, "k_tail": k, "error": "non-finite value"})),
                Err(e) => expression_errors.push(json!({"level": j, "k_tail": k, "error": e.to_string()})),
            }
        }
    }
    let hint_ok = !file.self_adjoint_hint || self_adjoint;
    let ok = dependence.is_empty() && expression_errors.is_empty() && hint_ok;
    let report = json!({
        "ok": ok,
        "N": spec.n(),
        "M": spec.m(),
        "dependence_rule": "A_j may depend on k_{j+1}, ..., k_N only; A_N is constant",
        "dependence_violations": dependence,
        "hermitian_defect": defect,
        "self_adjoint": self_adjoint,
        "self_adjoint_hint": file.self_adjoint_hint,
        "hint_consistent": hint_ok,
        "expression_errors": expression_errors,
    });
    emit(&serde_json::to_string_pretty(&report).expect("serializable"));
    if ok {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_VALIDATION,
            message: "validation failed".into(),
            diagnostic: None,
        })
    }
}

pub fn graphene(a: GrapheneArgs) -> CliResult {
    let start = Instant::now();
    let model = build_graphene::<f64>(a.v1, a.v2)?;
    let grid = QuadGrid::new(a.solver.qnodes)?;
    let solver = SpectrumSolver::new(&model.spec, &grid, options(&a.solver))?;
    let comps = components(&solver, 2)?;
    create_dir(&a.out)?;
    let m = || meta(Some(a.solver.qnodes), a.solver.kgrid, start, a.omit_timing);

    let mut surf = CsvTable::new(["k1", "k2", "lambda_minus", "lambda_plus"]);
    let s0 = &comps[0].0;
    for (idx, r) in s0.roots.iter().enumerate() {
        let k = s0.grid.point::<f64>(idx);
        surf.push(vec![
            Cell::Real(k[0]),
            Cell::Real(k[1]),
            Cell::Real(r[0].re),
            Cell::Real(r[1].re),
        ]);
    }
    surf.write(&a.out.join("dispersion.csv"), &m())?;

    let mut proj = CsvTable::new(["k2", "curve_1", "curve_2", "curve_3", "curve_4"]);
    let g1 = solver.tail_grid(1);
    for idx in 0..g1.len() {
        let k2 = g1.point::<f64>(idx)[0];
        let mut row = vec![Cell::Real(k2)];
        row.extend(closed_form_projection(k2).map(Cell::Real));
        proj.push(row);
    }
    proj.write(&a.out.join("projection.csv"), &m())?;

    let mut guided = CsvTable::new(["k2", "branch", "lambda", "closed_form"]);
    let s1 = &comps[1].0;
    for (idx, r) in s1.roots.iter().enumerate() {
        let k2 = s1.grid.point::<f64>(idx)[0];
        let closed = guided_roots(k2, a.v1);
        for (b, z) in r.iter().enumerate() {
            let near = closed
                .iter()
                .copied()
                .min_by(|x, y| (x - z.re).abs().total_cmp(&(y - z.re).abs()));
            guided.push(vec![
                Cell::Real(k2),
                Cell::Int(b as i64),
                Cell::Real(z.re),
                near.map_or(Cell::Text("nan".into()), Cell::Real),
            ]);
        }
    }
    guided.write(&a.out.join("guided.csv"), &m())?;

    let win = solver.window(2);
    let mut dloc = CsvTable::new(["lambda", "d_loc"]);
    let n = a.dscan.max(2);
    let cf = lattice_cf::cfrac::ContinuedFraction::new(&model.spec, 2, &[], &grid)?.with_margin(a.solver.margin);
    let values: Vec<Option<Complex64>> = {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let x = win.lo + (win.hi - win.lo) * i as f64 / (n - 1) as f64;
                cf.top(Complex64::new(x, 0.0)).ok().map(|s| s.det_g)
            })
            .collect()
    };
    for (i, v) in values.into_iter().enumerate() {
        let x = win.lo + (win.hi - win.lo) * i as f64 / (n - 1) as f64;
        dloc.push(vec![
            Cell::Real(x),
            v.map_or(Cell::Text("nan;nan".into()), |z| Cell::Complex(z.re, z.im)),
        ]);
    }
    dloc.write(&a.out.join("dloc.csv"), &m())?;
    component_table(&comps[2].0, 2, true).write(&a.out.join("sigma_2.csv"), &m())?;
    let summary = json!({
        "V1": a.v1,
        "V2": a.v2,
        "Q": a.solver.qnodes,
        "kgrid": a.solver.kgrid,
        "levels": comps
            .iter()
            .map(|(c, t)| level_summary(c, (!a.omit_timing).then_some(*t)))
            .collect::<Vec<_>>(),
        "eigenvalues": comps[2].0.roots[0].iter().map(|z| z.re).collect::<Vec<_>>(),
    });
    write_json(&a.out.join("summary.json"), &summary)?;
    print_hulls(&comps);
    Ok(())
}

pub fn oracle(a: OracleArgs) -> CliResult {
    let start = Instant::now();
    let spec = load_model(&a.model)?;
    let lat = TorusLattice::from_spec(&spec, a.p, DEFAULT_DECODE)?;
    let ev = lat.eigenvalues()?;
    let mut t = CsvTable::new(["index", "lambda"]);
    for (i, &x) in ev.iter().enumerate() {
        t.push(vec![Cell::Int(i as i64), Cell::Real(x)]);
    }
    t.write(&a.out, &meta(None, a.p, start, a.omit_timing))?;
    emit(&format!(
        "{} eigenvalues in [{:.9}, {:.9}]",
        ev.len(),
        ev.first().copied().unwrap_or(f64::NAN),
        ev.last().copied().unwrap_or(f64::NAN)
    ));
    Ok(())
}
