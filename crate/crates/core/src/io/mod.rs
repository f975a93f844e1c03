//! File formats: operator and branch descriptions, grid functions (JSON)
//! and result tables (CSV).

mod csv;
mod files;

pub use csv::{Cell, CsvTable, Metadata};
pub use files::{coefficient_to_file, BranchFile, CoefficientFile, GridFunctionFile, SourceFile, SpecFile, TableFile};

use crate::error::{Error, Result};

/// Read and deserialize a JSON document, locating errors in the file.
pub fn read_json<D: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<D> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_json(&text, &path.display().to_string())
}

pub fn parse_json<D: serde::de::DeserializeOwned>(text: &str, path: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Format {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn write_json<S: serde::Serialize>(path: &std::path::Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

use crate::scalar::{to_f64, Real};
use crate::spectrum::SpectralComponent;

/// One row per root: tail coordinates `k_{j+1}..k_N`, level, branch index
/// (rank by real part at that point) and λ.
pub fn component_table<T: Real>(comp: &SpectralComponent<T>, n: usize, real: bool) -> CsvTable {
    let j = comp.level;
    let mut header: Vec<String> = (j + 1..=n).map(|i| format!("k{i}")).collect();
    header.extend(["level", "branch", "lambda"].map(String::from));
    let mut t = CsvTable::new(header);
    for (idx, roots) in comp.roots.iter().enumerate() {
        let k = comp.grid.point::<T>(idx);
        for (b, z) in roots.iter().enumerate() {
            let mut row: Vec<Cell> = k.iter().map(|&x| Cell::Real(to_f64(x))).collect();
            row.push(Cell::Int(j as i64));
            row.push(Cell::Int(b as i64));
            row.push(if real {
                Cell::Real(to_f64(z.re))
            } else {
                Cell::Complex(to_f64(z.re), to_f64(z.im))
            });
            t.push(row);
        }
    }
    t
}
