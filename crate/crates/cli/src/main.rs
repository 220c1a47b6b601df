//! `discra`: command-line front end for the discra library.
//!
//! Every subcommand prints one JSON report on stdout (with
//! `"report_version": 1`) and a short summary on stderr. Exit codes: 0 when
//! the verdict or residuals pass, 1 when they fail, 2 on input errors.

mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Outcome, EXIT_INPUT};

#[derive(Parser, Debug)]
#[command(name = "discra", version, about = "Discrete Riemann surfaces, criticality and Dirac spinors")]
pub struct Cli {
    /// Verdict tolerance; overrides DISCRA_TOLERANCE and the default 1e-9.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Seed for every randomized input.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Writes a lattice family or a Voronoi map as a mesh file.
    Generate(commands::GenerateArgs),
    /// Topology and invariant checks.
    Validate(commands::MeshArg),
    /// Criticality of the embedded map.
    Classify(commands::ClassifyArgs),
    /// Dirichlet or Neumann boundary value problem.
    Solve(commands::SolveArgs),
    /// Basis of holomorphic (or harmonic) 1-forms of a closed surface.
    Basis(commands::BasisArgs),
    /// Cauchy kernel at a diamond edge and the Cauchy integral formula.
    Cauchy(commands::CauchyArgs),
    /// Ising couplings and the criticality condition.
    Ising(commands::IsingArgs),
    /// Existence, construction or residuals of the Dirac spinor.
    Dirac(commands::DiracArgs),
    /// Flatness of the massive deformation with modulus k.
    Massive(commands::MassiveArgs),
    /// Splits every rhombus into four.
    Refine(commands::RefineArgs),
    /// Convergence of Z^k under refinement.
    Converge(commands::ConvergeArgs),
    /// SVG drawing of the embedded map.
    Render(commands::RenderArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = commands::name(&cli.command);
    let outcome = commands::tolerance(cli.tolerance).and_then(|tol| commands::run(&cli.command, tol, cli.seed));
    let (code, report, summary) = match outcome {
        Ok(Outcome { pass, report, summary }) => (u8::from(!pass), report, summary),
        Err(e) => (EXIT_INPUT, serde_json::json!({ "error": format!("{e:#}") }), format!("error: {e:#}")),
    };
    let mut doc = serde_json::json!({ "report_version": 1, "command": name, "pass": code == 0 });
    if let (Some(d), serde_json::Value::Object(r)) = (doc.as_object_mut(), report) {
        d.extend(r);
    }
    let text = serde_json::to_string_pretty(&doc).expect("reports serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    let _ = writeln!(std::io::stderr().lock(), "{summary}");
    ExitCode::from(code)
}
