//! `rpnkit`: decision procedures, constructions and a bounded explorer for recursive Petri nets.
//!
//! Exit status: 0 when the question was answered, 2 on an input error, 3 when a search cap was
//! hit and the answer is unknown or partial.

mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "rpnkit", version, about = "Analysis of recursive Petri nets")]
struct Cli {
    /// Print a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Report wall-clock time (in the JSON output, or on stderr).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a property of a net from a state.
    Check {
        problem: ProblemArg,
        file: PathBuf,
        /// Initial state; defaults to the first state of the file.
        #[arg(long)]
        state: Option<String>,
        /// Target for `cover`; defaults to the first target of the file.
        #[arg(long)]
        target: Option<String>,
        /// Print the witness (firing sequence, cycle or self-covering run).
        #[arg(long)]
        witness: bool,
    },
    /// Build the abstract graph of the rooted net.
    Graph {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        /// Write Graphviz text to this file (`-` for stdout).
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Compare two states of a file under the order or the rooted order.
    Order {
        file: PathBuf,
        a: String,
        b: String,
        #[arg(long)]
        rooted: bool,
    },
    /// Replay a firing script (`<node> <transition> [as <alias>]` per line or `;`-separated).
    Sim {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        /// A script file, or the script itself.
        #[arg(long)]
        fire: String,
    },
    /// Print a derived net as a `.rpn` file.
    Build {
        #[command(subcommand)]
        what: BuildCommand,
    },
    /// Bounded brute-force search.
    Oracle {
        #[command(subcommand)]
        what: OracleCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ProblemArg {
    Cut,
    Cover,
    Terminate,
    Bounded,
    Finite,
}

#[derive(Args, Clone)]
pub struct Output {
    /// Write the `.rpn` text to this file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BuildCommand {
    /// The single-thread net simulating the net from a tree-shaped state.
    Rooted {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// The net with shortcuts for returning abstract transitions.
    Hat {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// The Petri net of one thread of the shortcut net, as an elementary-only net.
    Hatel {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// A net and state that reach the empty tree iff the target is coverable.
    Cov2cut {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// A net, state and target that is coverable iff the empty tree is reachable.
    Cut2cov {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// A net whose coverability language is the union of two languages.
    Union {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        left_state: Option<String>,
        #[arg(long)]
        left_target: Option<String>,
        #[arg(long)]
        right_state: Option<String>,
        #[arg(long)]
        right_target: Option<String>,
        #[command(flatten)]
        out: Output,
    },
}

/// Search caps. Defaults come from `RPNKIT_CAPS` (`steps=N,states=N,eps=N`) when set.
#[derive(Args, Clone)]
pub struct CapArgs {
    /// Maximal run length.
    #[arg(long)]
    cap_steps: Option<usize>,
    /// Maximal number of stored states.
    #[arg(long)]
    cap_states: Option<usize>,
    /// Maximal number of unlabelled firings between two letters.
    #[arg(long)]
    eps_budget: Option<usize>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Enumerate reachable abstract states.
    Explore {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        /// List every state.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Whether a word is in the coverability language.
    Member {
        file: PathBuf,
        /// Symbols separated by spaces or commas, or one symbol per character; `""` is ε.
        word: String,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// All words of the coverability language up to a length.
    Sample {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        caps: CapArgs,
    },
}

/// Trees grow one level per abstract firing and several routines recurse on their depth.
const STACK_BYTES: usize = 1 << 30;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let worker = std::thread::Builder::new().stack_size(STACK_BYTES).spawn(move || {
        let result = run(&cli.command);
        (cli, result)
    });
    let (cli, result) = worker.expect("spawn").join().expect("worker thread");
    let elapsed = started.elapsed().as_millis() as u64;
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(mut out) => {
            if cli.json {
                if cli.timing {
                    out.set_timing(elapsed);
                }
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&out.json).expect("json"));
            } else {
                let _ = write!(stdout, "{}", out.text);
                if cli.timing {
                    eprintln!("time: {elapsed} ms");
                }
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            if cli.json {
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&serde_json::json!({ "error": e })).expect("json"));
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: &Command) -> Result<commands::Out, String> {
    use commands as c;
    match command {
        Command::Check { problem, file, state, target, witness } => {
            c::check(*problem, file, state.as_deref(), target.as_deref(), *witness)
        }
        Command::Graph { file, state, dot } => c::graph(file, state.as_deref(), dot.as_deref()),
        Command::Order { file, a, b, rooted } => c::order(file, a, b, *rooted),
        Command::Sim { file, state, fire } => c::sim(file, state.as_deref(), fire),
        Command::Build { what } => match what {
            BuildCommand::Rooted { file, state, out } => c::build_rooted(file, state.as_deref(), out),
            BuildCommand::Hat { file, out } => c::build_hat(file, out),
            BuildCommand::Hatel { file, out } => c::build_hatel(file, out),
            BuildCommand::Cov2cut { file, state, target, out } => {
                c::build_cov2cut(file, state.as_deref(), target.as_deref(), out)
            }
            BuildCommand::Cut2cov { file, state, out } => c::build_cut2cov(file, state.as_deref(), out),
            BuildCommand::Union { left, right, left_state, left_target, right_state, right_target, out } => {
                c::build_union(
                    (left, left_state.as_deref(), left_target.as_deref()),
                    (right, right_state.as_deref(), right_target.as_deref()),
                    out,
                )
            }
        },
        Command::Oracle { what } => match what {
            OracleCommand::Explore { file, state, list, caps } => c::explore(file, state.as_deref(), *list, caps),
            OracleCommand::Member { file, word, state, target, caps } => {
                c::member(file, word, state.as_deref(), target.as_deref(), caps)
            }
            OracleCommand::Sample { file, max_len, state, target, caps } => {
                c::sample(file, *max_len, state.as_deref(), target.as_deref(), caps)
            }
        },
    }
}
