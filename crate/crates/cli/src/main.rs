//! `milnorkit` command-line tool.
//!
//! Exit status: 0 when the computation verified, 2 when it ran but a verification failed,
//! 1 on input or precision errors. Reports are JSON on stdout or `--output`.

mod run;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "milnorkit", version, about = "Milnor numbers and vanishing-cycle checks for germs over F_p[[π]] and Z_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// μ by colength, by T¹ and by Koszul Euler characteristic.
    Milnor(GermArgs),
    /// Koszul duality, d² = 0 and μ via the Koszul complex of df.
    KoszulCheck(GermArgs),
    /// Newton coordinate change carrying a perturbation g back to f.
    Determinacy(DeterminacyArgs),
    /// n = 0: μ against the number of specializing points, tame case.
    Dm0(GermArgs),
    /// Sample perturbation families smooth away from the germ over F_q.
    Compactify(CompactifyArgs),
    /// Run the built-in corpus of known values.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GermArgs {
    /// Germ JSON file.
    #[arg(long, alias = "germ")]
    pub input: PathBuf,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Override the t-degree bound D.
    #[arg(long)]
    pub degree_bound: Option<u32>,
    /// Override the π-adic precision N.
    #[arg(long)]
    pub pi_precision: Option<u32>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeterminacyArgs {
    /// Germ f, then its perturbation g (same base ring).
    #[arg(long, num_args = 2, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub degree_bound: Option<u32>,
    #[arg(long)]
    pub pi_precision: Option<u32>,
    /// Order to carry the coordinate change to; 12μ when absent.
    #[arg(long)]
    pub target_order: Option<u32>,
    /// Run even when ord(g - f) < 3μ; the report is marked forced.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompactifyArgs {
    #[command(flatten)]
    pub germ: GermArgs,
    /// Field size, a power of the residue characteristic; p when absent.
    #[arg(long)]
    pub q: Option<u64>,
    /// Truncation order λ, or "auto" for 3μ.
    #[arg(long, default_value = "auto")]
    pub lambda: String,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest extension degree e scanned over F_{q^e}.
    #[arg(long, default_value_t = 3)]
    pub ext_degree: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelfcheckArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, output) = match &cli.command {
        Command::Milnor(a) => ("milnor", a.output.clone()),
        Command::KoszulCheck(a) => ("koszul-check", a.output.clone()),
        Command::Determinacy(a) => ("determinacy", a.output.clone()),
        Command::Dm0(a) => ("dm0", a.output.clone()),
        Command::Compactify(a) => ("compactify", a.germ.output.clone()),
        Command::Selfcheck(a) => ("selfcheck", a.output.clone()),
    };
    let outcome = match &cli.command {
        Command::Milnor(a) => run::milnor(a),
        Command::KoszulCheck(a) => run::koszul_check(a),
        Command::Determinacy(a) => run::determinacy(a),
        Command::Dm0(a) => run::dm0(a),
        Command::Compactify(a) => run::compactify(a),
        Command::Selfcheck(_) => Ok(selfcheck::run()),
    };
    let config = match &cli.command {
        Command::Milnor(a) | Command::KoszulCheck(a) | Command::Dm0(a) => serde_json::to_value(a),
        Command::Determinacy(a) => serde_json::to_value(a),
        Command::Compactify(a) => serde_json::to_value(a),
        Command::Selfcheck(a) => serde_json::to_value(a),
    }
    .expect("config serializes");
    let (report, code) = run::envelope(name, config, outcome);
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("milnorkit: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
