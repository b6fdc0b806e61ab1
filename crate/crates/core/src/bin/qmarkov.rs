//! Batch CLI: verification suites, the markovization pipeline, semigroup
//! synthesis with snapshots, and the free-orthogonal spectral tables.
//!
//! Exit codes: 0 success, 1 verification/pipeline failure, 2 malformed input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qmarkov::cpmap::{CPMap, CPMapFamilyWire, CPMapWire};
use qmarkov::error::Error;
use qmarkov::markovize::{full_pipeline, ContractifyConfig, PipelineReport};
use qmarkov::onplus;
use qmarkov::report::SuiteConfig;
use qmarkov::semigroup::{markov_semigroup_from_witnesses, SemigroupWire, SynthesisSchedule};
use qmarkov::state::{QuantumState, StandardForm, StateWire};
use qmarkov::suites;

#[derive(Parser)]
#[command(
    name = "qmarkov",
    version,
    about = "Quantum Markov map, semigroup and Dirichlet-form toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every invariant suite and print a deterministic JSON report.
    Verify(VerifyArgs),
    /// Run the markovization pipeline on a witness family.
    Markovize(MarkovizeArgs),
    /// Synthesize the Markov semigroup of a KMS-symmetric witness family.
    Semigroup(SemigroupArgs),
    /// Spectral table of the free orthogonal quantum group model.
    Onplus(OnplusArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Override every check's sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Override every check's tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Dimensions for random instances, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4])]
    dims: Vec<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MarkovizeArgs {
    /// State file: {"dim": n, "rho": <matrix>}.
    #[arg(long)]
    state: PathBuf,
    /// Witness family file: {"maps": [<cp map>, ...]}.
    #[arg(long)]
    maps: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Dyadic residual schedule 2^-j for j in lo..=hi.
    #[arg(long, default_value_t = 2)]
    eps_lo: u32,
    #[arg(long, default_value_t = 6)]
    eps_hi: u32,
}

#[derive(Args)]
struct SemigroupArgs {
    #[arg(long)]
    state: PathBuf,
    #[arg(long)]
    maps: PathBuf,
    /// Snapshot times, comma separated; empty for the spectral dump only.
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Highest natural-cone matrix level tracked through the synthesis.
    #[arg(long, default_value_t = 3)]
    cone_levels: usize,
}

#[derive(Args)]
struct OnplusArgs {
    /// Quantum group parameter N ≥ 2.
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 200)]
    s_max: usize,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the truncated spectral model (basis labels + diagonal
    /// form) as JSON; subject to the model dimension cap.
    #[arg(long)]
    model_json: Option<PathBuf>,
}

#[derive(Serialize)]
struct MarkovizeOutput {
    maps: Vec<CPMapWire>,
    report: PipelineReport,
}

#[derive(Serialize)]
struct SnapshotOutput {
    time: f64,
    map: CPMapWire,
    unital_defect: f64,
    state_preserving_defect: f64,
    symmetry_defect: f64,
}

#[derive(Serialize)]
struct SemigroupOutput {
    semigroup: SemigroupWire,
    snapshots: Vec<SnapshotOutput>,
    report: qmarkov::semigroup::SynthesisReport,
}

/// Input problems exit with 2, computation failures with 1.
enum CliError {
    Input(String),
    Computation(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    fn computation(e: Error) -> Self {
        CliError::Computation(e.to_string())
    }
}

fn read_state(path: &PathBuf) -> Result<StandardForm, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::input)?;
    let wire: StateWire = serde_json::from_str(&text).map_err(CliError::input)?;
    let state = QuantumState::from_wire(wire).map_err(CliError::input)?;
    Ok(StandardForm::new(state))
}

fn read_maps(path: &PathBuf) -> Result<Vec<CPMap>, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::input)?;
    let file: CPMapFamilyWire = serde_json::from_str(&text).map_err(CliError::input)?;
    file.parse_maps().map_err(CliError::input)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(CliError::input),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn run_verify(args: VerifyArgs) -> Result<bool, CliError> {
    if args.dims.is_empty() || args.dims.iter().any(|&d| d == 0 || d > 6) {
        return Err(CliError::Input("dims must be within 1..=6".into()));
    }
    let cfg = SuiteConfig {
        seed: args.seed,
        samples: args.samples,
        tolerance: args.tol,
        dims: args.dims,
    };
    let report = suites::run_all(&cfg).map_err(CliError::computation)?;
    write_or_print(&args.out, &report.to_json())?;
    Ok(report.all_passed())
}

fn run_markovize(args: MarkovizeArgs) -> Result<(), CliError> {
    if args.eps_lo == 0 || args.eps_lo > args.eps_hi {
        return Err(CliError::Input("need 1 ≤ eps_lo ≤ eps_hi".into()));
    }
    let sf = read_state(&args.state)?;
    let maps = read_maps(&args.maps)?;
    let cfg = ContractifyConfig::dyadic(args.eps_lo, args.eps_hi);
    let (outputs, report) = full_pipeline(&sf, &maps, &cfg).map_err(CliError::computation)?;
    let output = MarkovizeOutput {
        maps: outputs.iter().map(|m| m.to_wire()).collect(),
        report,
    };
    let json = serde_json::to_string_pretty(&output).map_err(CliError::input)?;
    std::fs::write(&args.out, json).map_err(CliError::input)?;
    Ok(())
}

fn run_semigroup(args: SemigroupArgs) -> Result<(), CliError> {
    if args.times.iter().any(|&t| t <= 0.0) {
        return Err(CliError::Input("snapshot times must be positive".into()));
    }
    let sf = read_state(&args.state)?;
    let maps = read_maps(&args.maps)?;
    let schedule = SynthesisSchedule::default();
    let (semigroup, snapshots, report) =
        markov_semigroup_from_witnesses(&sf, &maps, &args.times, args.cone_levels, &schedule)
            .map_err(CliError::computation)?;
    let output = SemigroupOutput {
        semigroup: semigroup.to_wire(),
        snapshots: snapshots
            .iter()
            .map(|s| SnapshotOutput {
                time: s.time,
                map: s.map.to_wire(),
                unital_defect: s.markov.unital_defect,
                state_preserving_defect: s.markov.state_preserving_defect,
                symmetry_defect: s.symmetry_defect,
            })
            .collect(),
        report,
    };
    let json = serde_json::to_string_pretty(&output).map_err(CliError::input)?;
    std::fs::write(&args.out, json).map_err(CliError::input)?;
    Ok(())
}

fn run_onplus(args: OnplusArgs) -> Result<(), CliError> {
    if args.n < 2 {
        return Err(CliError::Input(format!(
            "N must be at least 2, got {}",
            args.n
        )));
    }
    let csv = onplus::spectral_csv(args.n, args.s_max).map_err(CliError::computation)?;
    if let Some(path) = &args.model_json {
        let (model, form) = onplus::build_spectral_model(args.n, args.s_max, onplus::DIMENSION_CAP)
            .map_err(CliError::computation)?;
        let payload = serde_json::json!({ "model": model, "form": form.to_wire() });
        let json = serde_json::to_string_pretty(&payload).map_err(CliError::input)?;
        std::fs::write(path, json).map_err(CliError::input)?;
    }
    write_or_print(&args.out, csv.trim_end())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(args) => run_verify(args).map(|passed| {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }),
        Command::Markovize(args) => run_markovize(args).map(|_| ExitCode::SUCCESS),
        Command::Semigroup(args) => run_semigroup(args).map(|_| ExitCode::SUCCESS),
        Command::Onplus(args) => run_onplus(args).map(|_| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Computation(msg)) => {
            eprintln!("computation failed: {msg}");
            ExitCode::from(1)
        }
    }
}
