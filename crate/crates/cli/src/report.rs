use std::process::ExitCode;

use lattice_cf::Error;
use serde_json::{json, Value};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_BRANCH: u8 = 4;

/// A failure with its exit code and an optional machine-readable
/// diagnostic, printed to stderr as JSON.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
    pub diagnostic: Option<Value>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: message.into(),
            diagnostic: None,
        }
    }

    pub fn report(self) -> ExitCode {
        eprintln!("error: {}", self.message);
        if let Some(d) = self.diagnostic {
            eprintln!("{}", serde_json::to_string_pretty(&d).unwrap_or_default());
        }
        ExitCode::from(self.code)
    }
}

fn innermost(e: &Error) -> &Error {
    match e {
        Error::Integrand { source, .. } => innermost(source),
        e => e,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (code, diagnostic) = match innermost(&e) {
            Error::SpectralProximity {
                level,
                lambda_re,
                lambda_im,
                rcond,
            } => (
                EXIT_NUMERICAL,
                Some(json!({
                    "error": "spectral-proximity",
                    "message": message,
                    "level": level,
                    "nearest_component": format!("sigma_{}", level),
                    "lambda": [lambda_re, lambda_im],
                    "rcond": rcond,
                })),
            ),
            Error::InconsistentSpectralData { level, deviation } => (
                EXIT_NUMERICAL,
                Some(json!({
                    "error": "inconsistent-spectral-data",
                    "message": message,
                    "level": level,
                    "deviation": deviation,
                })),
            ),
            Error::Eval(_) => (
                EXIT_NUMERICAL,
                Some(json!({ "error": "evaluation", "message": message })),
            ),
            Error::BranchCondition(v) => (
                EXIT_BRANCH,
                Some(json!({ "error": "branch-condition", "violations": v })),
            ),
            _ => (EXIT_VALIDATION, None),
        };
        CliError {
            code,
            message,
            diagnostic,
        }
    }
}
