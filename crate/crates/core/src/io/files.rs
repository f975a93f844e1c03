use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::MatrixExpr;
use crate::inverse::BranchSpec;
use crate::linalg::CMatrix;
use crate::operator::{Coefficient, ExprMatrix, OperatorSpec, TabulatedCoefficient, PROBE_POINTS};
use crate::quadrature::QuadGrid;
use crate::resolvent::{FourierTerm, GridFunction, Source};
use crate::scalar::{lit, to_f64, Real};

/// `{"N": .., "M": .., "A": [...], "self_adjoint_hint": ..}`. Each entry of
/// `A` is an `M x M` array of expressions in `k1..kN`, or a table of values
/// on Gauss-Legendre nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<CoefficientFile>,
    #[serde(default)]
    pub self_adjoint_hint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientFile {
    Exprs(Vec<Vec<String>>),
    Table { table: TableFile },
}

/// Samples on the `Q^dims` nodes (axis 1 fastest); per node the `M x M`
/// entries row by row, each as a `re, im` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub dims: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub values: Vec<f64>,
}

fn complex_text(z: Complex<f64>) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else {
        format!("({:?})+({:?})*i", z.re, z.im)
    }
}

pub fn coefficient_to_file<T: Real>(c: &Coefficient<T>) -> Result<CoefficientFile> {
    let to_c = |z: Complex<T>| Complex::new(to_f64(z.re), to_f64(z.im));
    Ok(match c {
        Coefficient::Const(a) => CoefficientFile::Exprs(
            (0..a.rows())
                .map(|i| (0..a.cols()).map(|j| complex_text(to_c(a[(i, j)]))).collect())
                .collect(),
        ),
        Coefficient::Expr(e) => {
            let m = (e.sources().len() as f64).sqrt() as usize;
            CoefficientFile::Exprs(
                e.sources()
                    .chunks(m)
                    .map(|row| row.iter().map(|x| x.to_string()).collect())
                    .collect(),
            )
        }
        Coefficient::Table(t) => CoefficientFile::Table {
            table: TableFile {
                dims: t.dims(),
                q: t.grid().q(),
                values: t
                    .values()
                    .iter()
                    .flat_map(|v| v.as_slice().iter().flat_map(|z| [to_f64(z.re), to_f64(z.im)]))
                    .collect(),
            },
        },
        Coefficient::Custom(_) => {
            return Err(Error::Invalid(
                "coefficients given as code cannot be written to a file".into(),
            ))
        }
    })
}

impl SpecFile {
    pub fn load<T: Real>(path: &std::path::Path) -> Result<OperatorSpec<T>> {
        super::read_json::<SpecFile>(path)?.to_spec()
    }

    pub fn from_spec<T: Real>(spec: &OperatorSpec<T>, self_adjoint_hint: bool) -> Result<SpecFile> {
        Ok(SpecFile {
            n: spec.n(),
            m: spec.m(),
            a: spec
                .coefficients()
                .iter()
                .map(coefficient_to_file)
                .collect::<Result<_>>()?,
            self_adjoint_hint,
        })
    }

    /// Build the operator and enforce the dependence rule and the hint.
    pub fn to_spec<T: Real>(&self) -> Result<OperatorSpec<T>> {
        let spec = self.build::<T>()?;
        if let Some(v) = spec.check_dependence(PROBE_POINTS)?.first() {
            return Err(Error::InvalidOperator(format!(
                "A{j} may depend on k{next}..k{n} only, but changes by {d:.3e} between {a:?} and {b:?}",
                j = v.level,
                next = v.level + 1,
                n = spec.n(),
                d = v.difference,
                a = v.k_a,
                b = v.k_b
            )));
        }
        if self.self_adjoint_hint && !spec.is_self_adjoint(PROBE_POINTS)? {
            return Err(Error::InvalidOperator(format!(
                "marked self-adjoint but the Hermitian defect is {:.3e}",
                to_f64(spec.hermitian_defect(PROBE_POINTS)?)
            )));
        }
        Ok(spec)
    }

    /// The operator without the dependence and hint checks.
    pub fn build<T: Real>(&self) -> Result<OperatorSpec<T>> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidOperator("N and M must be at least 1".into()));
        }
        if self.a.len() != self.n + 1 {
            return Err(Error::InvalidOperator(format!(
                "N = {} needs {} coefficients in A, got {}",
                self.n,
                self.n + 1,
                self.a.len()
            )));
        }
        let coeffs = self
            .a
            .iter()
            .enumerate()
            .map(|(j, c)| match c {
                CoefficientFile::Exprs(rows) => {
                    if rows.len() != self.m || rows.iter().any(|r| r.len() != self.m) {
                        return Err(Error::InvalidOperator(format!("A{j} is not {0} x {0}", self.m)));
                    }
                    Ok(Coefficient::Expr(ExprMatrix::parse(j, self.n, rows)?))
                }
                CoefficientFile::Table { table } => self.table::<T>(j, table),
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorSpec::new(self.n, self.m, coeffs)
    }

    fn table<T: Real>(&self, j: usize, t: &TableFile) -> Result<Coefficient<T>> {
        if t.dims != self.n - j {
            return Err(Error::InvalidOperator(format!(
                "table for A{j} must span {} axes, has {}",
                self.n - j,
                t.dims
            )));
        }
        let grid = QuadGrid::new(t.q)?;
        let per = self.m * self.m * 2;
        if t.values.len() != grid.len(t.dims) * per {
            return Err(Error::InvalidOperator(format!(
                "table for A{j} needs {} numbers, has {}",
                grid.len(t.dims) * per,
                t.values.len()
            )));
        }
        let vals = t
            .values
            .chunks(per)
            .map(|c| {
                let entries: Vec<_> = c
                    .chunks(2)
                    .map(|p| Complex::new(lit::<T>(p[0]), lit::<T>(p[1])))
                    .collect();
                CMatrix::from_row_major(self.m, self.m, &entries)
            })
            .collect();
        Ok(Coefficient::Table(TabulatedCoefficient::new(t.dims, grid, vals)?))
    }
}

/// `{"N": .., "branches": ["λ_0", ..., "λ_N"]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub branches: Vec<String>,
}

impl BranchFile {
    pub fn to_branches<T: Real>(&self) -> Result<BranchSpec<T>> {
        BranchSpec::parse(self.n, &self.branches)
    }
}

/// `{"dims": .., "M": .., "Q": .., "values": [re, im, ...]}`, node-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFunctionFile {
    pub dims: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub values: Vec<f64>,
}

impl GridFunctionFile {
    pub fn from_function<T: Real>(u: &GridFunction<T>) -> Self {
        GridFunctionFile {
            dims: u.dims(),
            m: u.m(),
            q: u.q(),
            values: u
                .values()
                .iter()
                .flatten()
                .flat_map(|z| [to_f64(z.re), to_f64(z.im)])
                .collect(),
        }
    }

    pub fn to_function<T: Real>(&self) -> Result<GridFunction<T>> {
        if self.m == 0 || self.values.len() % (2 * self.m) != 0 {
            return Err(Error::Dimension("grid function values do not split into nodes".into()));
        }
        let vals = self
            .values
            .chunks(2 * self.m)
            .map(|c| {
                c.chunks(2)
                    .map(|p| Complex::new(lit::<T>(p[0]), lit::<T>(p[1])))
                    .collect()
            })
            .collect();
        GridFunction::new(self.dims, self.m, self.q, vals)
    }
}

/// A resolvent source: `{"expr": [..]}` with one expression per component,
/// or `{"fourier": [{"shift": [..], "component": p, "amplitude": [re, im]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceFile {
    Expr(Vec<String>),
    Fourier(Vec<FourierTermFile>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTermFile {
    pub shift: Vec<i64>,
    pub component: usize,
    pub amplitude: (f64, f64),
}

impl SourceFile {
    pub fn to_source(&self, n: usize) -> Result<Source> {
        Ok(match self {
            SourceFile::Expr(es) => Source::Expr(
                es.iter()
                    .map(|e| MatrixExpr::parse(e, n).map_err(Error::from))
                    .collect::<Result<_>>()?,
            ),
            SourceFile::Fourier(ts) => Source::Fourier(
                ts.iter()
                    .map(|t| FourierTerm {
                        shift: t.shift.clone(),
                        component: t.component,
                        amplitude: t.amplitude,
                    })
                    .collect(),
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphene::graphene_rows;
    use crate::io::parse_json;

    fn graphene_file() -> SpecFile {
        SpecFile {
            n: 2,
            m: 2,
            a: graphene_rows(2.0, -1.0)
                .into_iter()
                .map(CoefficientFile::Exprs)
                .collect(),
            self_adjoint_hint: true,
        }
    }

    #[test]
    fn spec_file_roundtrip() {
        let f = graphene_file();
        let text = serde_json::to_string(&f).unwrap();
        let back: SpecFile = parse_json(&text, "mem").unwrap();
        let spec = back.to_spec::<f64>().unwrap();
        let again = SpecFile::from_spec(&spec, true).unwrap().to_spec::<f64>().unwrap();
        for k in [[0.1, 0.7], [0.5, 0.25]] {
            assert_eq!(spec.eval_coeff(0, &k).unwrap(), again.eval_coeff(0, &k).unwrap());
        }
    }

    #[test]
    fn table_roundtrip() {
        let g = QuadGrid::<f64>::new(5).unwrap();
        let vals = (0..5)
            .map(|i| CMatrix::scalar(1, Complex::new(i as f64, -0.5)))
            .collect();
        let spec = OperatorSpec::new(
            1,
            1,
            vec![
                Coefficient::Table(TabulatedCoefficient::new(1, g.clone(), vals).unwrap()),
                Coefficient::Const(CMatrix::scalar(1, Complex::new(0.935314784228331, 0.0))),
            ],
        )
        .unwrap();
        let file = SpecFile::from_spec(&spec, false).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back = parse_json::<SpecFile>(&text, "mem").unwrap().to_spec::<f64>().unwrap();
        for &x in g.nodes() {
            assert_eq!(back.eval_coeff(0, &[x]).unwrap(), spec.eval_coeff(0, &[x]).unwrap());
        }
        assert_eq!(back.eval_coeff(1, &[]).unwrap(), spec.eval_coeff(1, &[]).unwrap());
    }

    #[test]
    fn rejected_files() {
        let err = parse_json::<SpecFile>("{\"N\": 2,\n \"M\": 2, \"A\": [}", "bad.json").unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        let empty = SpecFile {
            n: 1,
            m: 1,
            a: vec![],
            self_adjoint_hint: false,
        };
        assert!(empty.to_spec::<f64>().is_err());
        let mut f = graphene_file();
        f.a[1] = CoefficientFile::Exprs(vec![vec!["k1".into(), "0".into()], vec!["0".into(), "0".into()]]);
        let msg = f.to_spec::<f64>().unwrap_err().to_string();
        assert!(msg.contains("A1 may depend on k2..k2 only"), "{msg}");
        let mut f = graphene_file();
        f.a[2] = CoefficientFile::Exprs(vec![vec!["0".into(), "i".into()], vec!["i".into(), "0".into()]]);
        assert!(f.to_spec::<f64>().is_err());
        f.self_adjoint_hint = false;
        assert!(f.to_spec::<f64>().is_ok());
    }

    #[test]
    fn grid_function_and_source_files() {
        let g = QuadGrid::<f64>::new(3).unwrap();
        let u =
            GridFunction::from_fn(&g, 2, 2, |k| Ok(vec![Complex::new(k[0], k[1]), Complex::new(1.0, 0.0)])).unwrap();
        let file = GridFunctionFile::from_function(&u);
        assert_eq!(file.values.len(), 9 * 2 * 2);
        assert_eq!(file.to_function::<f64>().unwrap(), u);
        let src: SourceFile = parse_json(
            r#"{"fourier": [{"shift": [0, 1], "component": 1, "amplitude": [1, 0]}]}"#,
            "mem",
        )
        .unwrap();
        assert!(matches!(src.to_source(2).unwrap(), Source::Fourier(t) if t[0].shift == vec![0, 1]));
        let src: SourceFile = parse_json(r#"{"expr": ["k1", "cos(2*pi*k2)"]}"#, "mem").unwrap();
        assert!(matches!(src.to_source(2).unwrap(), Source::Expr(e) if e.len() == 2));
    }
}
