//! `fbx`: command-line front end for the Fourier-Bessel toolkit.

mod commands;
mod grid;
mod manifest;
mod output;
mod recipes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manifest::ManifestError;

#[derive(Parser)]
#[command(name = "fbx", version, about = "Orthogonal polynomials, quantum evolution and scaling exponents of fractal measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Working precision of the moment route, in bits.
    #[arg(long)]
    pub precision: Option<u32>,
    /// No random numbers are used anywhere; accepted for scripts.
    #[arg(long)]
    pub seedless: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n_grid: Option<String>,
    /// `k_min:k_max` or a single level.
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// `gaussian` or `instantaneous`.
    #[arg(long)]
    pub averaging: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Hull, weights, reference dimensions and cylinder distribution function.
    MeasureInfo(Common),
    /// Recurrence coefficients `a_n`, `b_n`.
    Jacobi(Common),
    /// Amplitudes `psi_n(t)` on a time grid.
    Evolve(Common),
    /// Position moments `nu_alpha(t)`, averaged and instantaneous.
    Moments(Common),
    /// Generalized dimensions `D_q`.
    Dims(Common),
    /// Growth exponents `beta(alpha)` of the position moments.
    FitBeta(Common),
    /// Surmise exponent from the truncated moment surface `nu_0(N, omega)`.
    FitGamma(Common),
    /// Wavefront position and its exponent `eta`.
    FitFront(Common),
    /// `beta(alpha)` against `D_{1-alpha}` for a Julia measure.
    ExpJulia(Common),
    /// `beta(alpha)` across members of one uniform-Gibbs class.
    ExpClass(Common),
    /// Three-map placements sharing one `D_q` spectrum.
    ExpThreemap(Common),
    /// Sparse-barrier growth envelopes against their bound.
    ExpBarrier(Common),
    /// Decay of the averaged return probability against `t^{-D_2}`.
    ExpD2decay(Common),
    /// Writes ready-to-run manifests reproducing each figure's data.
    Recipes {
        /// Recipe names; all when omitted.
        names: Vec<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    Manifest(ManifestError),
    Core(fbx::Error),
    Io(std::io::Error),
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        Failure::Manifest(e)
    }
}

impl From<fbx::Error> for Failure {
    fn from(e: fbx::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Errors caused by the input rather than by the numerics.
fn is_validation(e: &fbx::Error) -> bool {
    use fbx::Error::*;
    matches!(
        e,
        NonStochasticWeights(_)
            | ContractionOutOfRange(_)
            | LambdaBelowTwo(_)
            | InvalidMeasure(_)
            | LevelTooLarge { .. }
            | SparsenessViolated(_)
            | TimeNegative(_)
            | OverlappingIfs
            | NotInClass(_)
            | OverlappingBands
            | InvalidArgument(_)
            | DegenerateFit(_)
            | ScaleRangeTooNarrow(_)
    )
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Manifest(_) => 2,
            Failure::Core(e) if is_validation(e) => 2,
            Failure::Core(_) | Failure::Io(_) => 3,
        }
    }

    fn json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Manifest(e) => ("ManifestInvalid", e.0.clone()),
            Failure::Core(e) => (e.kind(), e.to_string()),
            Failure::Io(e) => ("Io", e.to_string()),
        };
        let class = if self.code() == 2 { "validation" } else { "numerical" };
        serde_json::json!({ "error": kind, "class": class, "message": message, "exit_code": self.code() })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            let code = match e.kind() {
                DisplayHelp | DisplayVersion => 0,
                InvalidSubcommand | MissingSubcommand | DisplayHelpOnMissingArgumentOrSubcommand => 64,
                _ => 2,
            };
            let _ = e.print();
            if code == 64 {
                eprintln!("{}", serde_json::json!({ "error": "UnknownSubcommand", "exit_code": 64 }));
            }
            return ExitCode::from(code);
        }
    };
    if let Ok(cap) = std::env::var("FBX_CELL_CAP") {
        match cap.trim().parse::<usize>() {
            Ok(c) if c > 0 => fbx::measures::set_cell_cap(c),
            _ => {
                let f = Failure::Manifest(ManifestError(format!("FBX_CELL_CAP={cap:?} is not a positive integer")));
                eprintln!("{}", f.json());
                return ExitCode::from(f.code());
            }
        }
    }
    let result = match cli.command {
        Command::Recipes { names, out } => recipes::write(&names, &out).map(|_| ()),
        Command::MeasureInfo(c) => commands::run("measure-info", c),
        Command::Jacobi(c) => commands::run("jacobi", c),
        Command::Evolve(c) => commands::run("evolve", c),
        Command::Moments(c) => commands::run("moments", c),
        Command::Dims(c) => commands::run("dims", c),
        Command::FitBeta(c) => commands::run("fit-beta", c),
        Command::FitGamma(c) => commands::run("fit-gamma", c),
        Command::FitFront(c) => commands::run("fit-front", c),
        Command::ExpJulia(c) => commands::run("exp-julia", c),
        Command::ExpClass(c) => commands::run("exp-class", c),
        Command::ExpThreemap(c) => commands::run("exp-threemap", c),
        Command::ExpBarrier(c) => commands::run("exp-barrier", c),
        Command::ExpD2decay(c) => commands::run("exp-d2decay", c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.json());
            ExitCode::from(f.code())
        }
    }
}
