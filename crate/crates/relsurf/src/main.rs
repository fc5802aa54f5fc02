use clap::{Parser, Subcommand};
use relsurf::commands::{self, Request};
use relsurf::workspace;
use std::path::PathBuf;
use std::process::ExitCode;

/// Relative states and quantum-logic deductions on the spacelike surfaces of
/// circuit causal structures.
///
/// Without --circuit, commands run against the built-in nested-observer
/// scenario (equivalent to the bundled example files).
///
/// Exit codes: 0 success, 1 runtime error, 2 parse error, 3 validation
/// error, 4 invalid deduction step, 5 unsound deduction.
#[derive(Parser)]
#[command(name = "relsurf", version, arg_required_else_help = true)]
struct Cli {
    /// Circuit description (JSON).
    #[arg(long, global = true)]
    circuit: Option<PathBuf>,
    /// Atom table (JSON); requires --circuit.
    #[arg(long, global = true, requires = "circuit")]
    atoms: Option<PathBuf>,
    /// Deduction scripts (text); requires --circuit.
    #[arg(long, global = true, requires = "circuit")]
    deductions: Option<PathBuf>,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every spacelike surface (downset and edge set).
    Surfaces,
    /// Print the state on a surface.
    State {
        /// Surface name or downset literal like "M_A,P".
        #[arg(long)]
        surface: String,
    },
    /// Check that two surface states agree on their shared edges.
    Consistency { s1: String, s2: String },
    /// Chain relative-state maps along a sequence of edges.
    Relstate {
        /// Comma-separated edge ids, e.g. "U',B',A'',W'".
        #[arg(long, value_delimiter = ',')]
        chain: Vec<String>,
        /// Input state on the first edge: a basis index or a JSON array of
        /// [re, im] pairs.
        #[arg(long)]
        input: String,
    },
    /// Valuate a proposition expression.
    Eval { expr: String },
    /// Rule-check a named deduction and assess its soundness.
    Deduce { name: String },
    /// Run the full bundled scenario and report every headline number.
    FrDemo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let ws = match &cli.circuit {
        None => workspace::builtin_fr(),
        Some(path) => {
            match workspace::load_workspace(path, cli.atoms.as_deref(), cli.deductions.as_deref())
            {
                Ok(ws) => ws,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            }
        }
    };

    let request = match cli.command {
        Command::Surfaces => Request::Surfaces,
        Command::State { surface } => Request::State { surface },
        Command::Consistency { s1, s2 } => Request::Consistency { s1, s2 },
        Command::Relstate { chain, input } => Request::Relstate { chain, input },
        Command::Eval { expr } => Request::Eval { expr },
        Command::Deduce { name } => Request::Deduce { name },
        Command::FrDemo => Request::FrDemo,
    };

    match commands::run(&ws, &request) {
        Ok(outcome) => {
            if cli.pretty {
                print!("{}", outcome.report.pretty());
            } else {
                println!("{}", outcome.report.to_json());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
