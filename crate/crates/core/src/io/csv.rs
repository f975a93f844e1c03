use std::fmt::Write as _;

use serde::Serialize;

/// One CSV field. Reals use 17 significant digits; complex values are
/// written as `re;im`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Complex(f64, f64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => write!(out, "{v}"),
            Cell::Real(v) => write!(out, "{v:.16e}"),
            Cell::Complex(re, im) => write!(out, "{re:.16e};{im:.16e}"),
            Cell::Text(s) => write!(out, "{s}"),
        }
        .expect("writing to a String");
    }
}

/// Run parameters for the trailing comment line.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    /// Quadrature nodes per axis, when the output depends on them.
    pub q: Option<usize>,
    pub grid: usize,
    /// `None` writes `omitted`, which makes files byte-reproducible.
    pub wall_time_s: Option<f64>,
}

impl Metadata {
    pub fn line(&self) -> String {
        let time = match self.wall_time_s {
            Some(t) => format!("{t:.3}"),
            None => "omitted".into(),
        };
        let q = self.q.map_or_else(|| "none".to_string(), |q| q.to_string());
        format!(
            "# lattice-cf {} Q={q} grid={} wall_time_s={time}",
            env!("CARGO_PKG_VERSION"),
            self.grid
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Metadata) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut field = String::new();
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| {
                    field.clear();
                    c.render(&mut field);
                    field.clone()
                })
                .collect();
            w.write_record(&cells).expect("writing to memory");
        }
        let mut out = String::from_utf8(w.into_inner().expect("flushing to memory")).expect("UTF-8 fields");
        out.push_str(&meta.line());
        out.push('\n');
        out
    }

    pub fn write(&self, path: &std::path::Path, meta: &Metadata) -> crate::Result<()> {
        std::fs::write(path, self.render(meta)).map_err(|e| crate::Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}
