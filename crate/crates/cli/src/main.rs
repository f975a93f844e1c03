//! `lattice-cf`: spectra, dispersion branches, resolvents and inverse
//! problems for periodic lattice operators with defects.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::CliError;

#[derive(Parser, Debug)]
#[command(name = "lattice-cf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All spectral components: sigma_j.csv per level and summary.json.
    Spectrum(SpectrumArgs),
    /// Dispersion branches of one level with per-point scan records.
    Branches(BranchesArgs),
    /// Apply the resolvent to a source and report the residual.
    Resolvent(ResolventArgs),
    /// Build the scalar operator with prescribed dispersion branches.
    Inverse(InverseArgs),
    /// Check an operator file: dependence rule, Hermitian probe, expressions.
    Validate(ValidateArgs),
    /// Data for the graphene model: surfaces, projections, guided curves, D_loc.
    Graphene(GrapheneArgs),
    /// Eigenvalues of the operator on a finite periodic torus.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Operator description (JSON).
    spec: Option<PathBuf>,
    /// Use a built-in model instead of a file.
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v2: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Model {
    Graphene,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Det {
    G,
    Gbar,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Gauss-Legendre nodes per axis.
    #[arg(long, default_value_t = 64)]
    qnodes: usize,
    /// Uniform k-points per axis.
    #[arg(long, default_value_t = 128)]
    kgrid: usize,
    /// Real lambda window (default: from a norm bound per level).
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true)]
    lwindow: Option<Vec<f64>>,
    /// Scan points per window.
    #[arg(long, default_value_t = 2000)]
    lscan: usize,
    /// Exclusion margin in lambda.
    #[arg(long, default_value_t = 1e-6)]
    margin: f64,
    #[arg(long, default_value_t = 1e-9)]
    root_tol: f64,
    #[arg(long, value_enum, default_value_t = Det::G)]
    det: Det,
    /// Confirm matrix roots by a winding number.
    #[arg(long)]
    winding: bool,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write `wall_time_s=omitted` so repeated runs are byte-identical.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Args, Debug)]
struct BranchesArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    level: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Args, Debug)]
struct ResolventArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 64)]
    qnodes: usize,
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_hyphen_values = true, required = true)]
    lambda: Vec<f64>,
    /// Expression of one component; repeat once per component.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "source_file")]
    source: Vec<String>,
    /// Source as JSON: {"expr": [...]} or {"fourier": [...]}.
    #[arg(long)]
    source_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Form::Standard)]
    form: Form,
    /// k-points per axis of the spectrum computed to check that lambda is
    /// off the spectrum.
    #[arg(long, default_value_t = 33)]
    kgrid: usize,
    #[arg(long, default_value_t = 1e-6)]
    margin: f64,
    /// Skip the check against the spectrum.
    #[arg(long)]
    no_spectrum_check: bool,
    /// Grid function output (JSON).
    #[arg(long, default_value = "response.json")]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Standard,
    AdjointH,
    AdjointD,
    Ecd,
}

#[derive(Args, Debug)]
struct InverseArgs {
    /// Branch functions (JSON).
    branches: PathBuf,
    #[arg(long, default_value = "synthesized.json")]
    out: PathBuf,
    #[arg(long, default_value_t = 64)]
    qnodes: usize,
    /// Probe points per axis for the disjointness check.
    #[arg(long, default_value_t = 33)]
    probe: usize,
    #[arg(long, default_value_t = 1e-6)]
    margin: f64,
    /// Skip the forward round trip.
    #[arg(long)]
    no_roundtrip: bool,
    /// k-points per axis of the round trip.
    #[arg(long, default_value_t = 33)]
    kgrid: usize,
    #[arg(long, default_value_t = 4000)]
    lscan: usize,
    /// Round-trip report (JSON); printed when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 9)]
    probe: usize,
}

#[derive(Args, Debug)]
struct GrapheneArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v2: f64,
    #[command(flatten)]
    solver: SolverArgs,
    /// D_loc samples over the lambda window.
    #[arg(long, default_value_t = 2000)]
    dscan: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Cells per direction.
    #[arg(long, default_value_t = 16)]
    p: usize,
    #[arg(long, default_value = "oracle.csv")]
    out: PathBuf,
    #[arg(long)]
    omit_timing: bool,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("LATTICE_CF_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("LATTICE_CF_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(CliError::usage("LATTICE_CF_THREADS must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Branches(a) => commands::branches(a),
        Command::Resolvent(a) => commands::resolvent(a),
        Command::Inverse(a) => commands::inverse(a),
        Command::Validate(a) => commands::validate(a),
        Command::Graphene(a) => commands::graphene(a),
        Command::Oracle(a) => commands::oracle(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
