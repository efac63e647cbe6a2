//! `kcdb`: command-line access to circuit compilation, circuit queries,
//! conjunctive-query answering, provenance and probabilistic evaluation.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcdb::cnf::Heuristic;

#[derive(Parser)]
#[command(name = "kcdb", version, about = "Knowledge compilation for databases")]
struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for every randomized computation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Default, ValueEnum)]
pub enum HeuristicArg {
    #[default]
    First,
    Most,
    Mincut,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Heuristic {
        match h {
            HeuristicArg::First => Heuristic::FirstUnassigned,
            HeuristicArg::Most => Heuristic::MostOccurrences,
            HeuristicArg::Mincut => Heuristic::MinCutGreedy,
        }
    }
}

/// A circuit given directly or as a CNF to compile first.
#[derive(Args)]
pub struct CircuitArgs {
    /// Circuit in `.nnf` format.
    #[arg(long, conflicts_with = "cnf", required_unless_present = "cnf")]
    nnf: Option<PathBuf>,
    /// DIMACS CNF, compiled to a decision-DNNF before use.
    #[arg(long)]
    cnf: Option<PathBuf>,
    /// Branching heuristic when compiling `--cnf`.
    #[arg(long, value_enum, default_value_t)]
    heuristic: HeuristicArg,
}

/// A database: one combined TSV, per-relation TSV files, or a TID file.
#[derive(Args)]
pub struct DbArgs {
    /// Combined fact file, lines `R<TAB>v1<TAB>v2…`.
    #[arg(long)]
    db: Option<PathBuf>,
    /// One relation per file, values only; repeatable.
    #[arg(long, value_name = "NAME=PATH")]
    rel: Vec<String>,
    /// TID file; probabilities and markers are ignored where not needed.
    #[arg(long)]
    tid: Option<PathBuf>,
}

#[derive(Args)]
pub struct ApproxArgs {
    /// Relative error of the Karp–Luby estimate.
    #[arg(long, default_value = "1/10")]
    epsilon: String,
    /// Failure probability of the Karp–Luby estimate.
    #[arg(long, default_value = "1/3")]
    delta: String,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PqeModeArg {
    Exact,
    Approx,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ProvMethod {
    Circuit,
    Dnf,
    ReadOnce,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a DIMACS CNF to a decision-DNNF in `.nnf` format.
    CompileCnf {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        heuristic: HeuristicArg,
        /// Disable the residual-formula cache.
        #[arg(long)]
        no_cache: bool,
        /// Write the circuit here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Certify the class of a circuit.
    CheckClass(CircuitArgs),
    /// Count satisfying valuations.
    Count {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// One count per number of true variables.
        #[arg(long)]
        by_cardinality: bool,
    },
    /// Weighted model count with rational weights.
    Wmc {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Lines `var pos neg` or `var p`; unlisted variables weigh 1.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Enumerate satisfying valuations.
    Enum {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Draw satisfying valuations uniformly at random.
    Sample {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// A satisfying valuation of maximum weight.
    Best {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Lines `var pos neg` or `var p`; unlisted variables weigh 1.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Karp–Luby estimate of the probability of a DNF.
    ApproxDnf {
        /// DNF in DIMACS layout, header `p dnf <vars> <terms>`.
        #[arg(long)]
        dnf: PathBuf,
        /// Lines `var p`; unlisted variables have probability 1/2.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[command(flatten)]
        approx: ApproxArgs,
    },
    /// Compile the answers of a conjunctive query into a relational circuit.
    CqCompile {
        #[arg(long)]
        query: PathBuf,
        #[command(flatten)]
        db: DbArgs,
        /// Comma-separated variable order; free variables come first.
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        no_cache: bool,
        #[arg(long)]
        no_semijoin: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Count the answers of a conjunctive query.
    CqCount {
        #[arg(long)]
        query: PathBuf,
        #[command(flatten)]
        db: DbArgs,
    },
    /// Enumerate the answers of a conjunctive query.
    CqEnum {
        #[arg(long)]
        query: PathBuf,
        #[command(flatten)]
        db: DbArgs,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// The i-th answer (1-based) in lexicographic order.
    CqAccess {
        #[arg(long)]
        query: PathBuf,
        #[command(flatten)]
        db: DbArgs,
        #[arg(long)]
        index: String,
    },
    /// Boolean provenance of a query on a database.
    Prov {
        #[arg(long)]
        query: PathBuf,
        #[command(flatten)]
        db: DbArgs,
        #[arg(long, value_enum, default_value_t = ProvMethod::Circuit)]
        method: ProvMethod,
    },
    /// Probability of a query on a tuple-independent database.
    Pqe {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        tid: PathBuf,
        #[arg(long, value_enum, default_value_t = PqeModeArg::Exact)]
        mode: PqeModeArg,
        #[command(flatten)]
        approx: ApproxArgs,
    },
    /// Number of subinstances satisfying a query.
    Ur {
        #[arg(long)]
        query: PathBuf,
        #[command(flatten)]
        db: DbArgs,
    },
    /// Shapley values of endogenous facts.
    Shapley {
        #[arg(long)]
        query: PathBuf,
        #[command(flatten)]
        db: DbArgs,
        /// 1-based fact position in the input; all endogenous facts if absent.
        #[arg(long)]
        fact: Option<usize>,
    },
    /// Acceptance probability of an automaton on a probabilistic tree.
    TreePqe {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        automaton: PathBuf,
    },
    /// Node sets selected by an automaton over annotated labels `σ:0`/`σ:1`.
    TreeEnum {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long)]
        limit: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let json = matches!(cli.format, Format::Json);
    match commands::run(cli.command, cli.seed) {
        Ok(report) => match report.print(json) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}
