//! `pform`: scenario-driven front end for mesh generation, spectra, Kodaira
//! reports, classical evolution, coherent-state matrix elements, Wilson loops,
//! the invariant suite and the spectral-gap study.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit statuses.
pub mod status {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const INVARIANT: u8 = 3;
    pub const NUMERICAL: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "pform", version, about = "Discrete p-form electromagnetism experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (JSON).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,

    /// Output directory; defaults to the scenario's `out_dir`, then `.`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Multiplies every default tolerance of `verify`.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tolerance_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate or load the mesh and save it as a mesh file.
    Mesh,
    /// Eigenvalues of every L_k (CSV).
    Spectrum,
    /// Kodaira split and Betti numbers per degree (JSON).
    Kodaira,
    /// Classical time series of conserved quantities (CSV).
    Evolve,
    /// Coherent-state matrix elements (JSON).
    Quantize {
        /// JSON file of labels `{a, e}` and optional observables `{q, j}`;
        /// random labels from the scenario when absent.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Wilson loop, holonomy and quantum Maxwell residuals (JSON).
    Wilson,
    /// Full invariant suite; exit status 3 on any failure.
    Verify,
    /// Lowest nonzero eigenvalues on discs, flat against hyperbolic-like weights (CSV).
    GapStudy,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(status::PARSE);
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.status)
        }
    }
}

/// `PFORM_THREADS` sizes the worker pool; rayon itself honors
/// `RAYON_NUM_THREADS` when the former is absent.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("PFORM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("PFORM_THREADS={raw:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}
