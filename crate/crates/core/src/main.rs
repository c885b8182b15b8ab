use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use ws1s_nested::bench::{
    chain_grid, compare_corpus, exhaustive_corpus, generate_family, run, Mode, RunOptions,
};
use ws1s_nested::formula::{parse_formula, Task};

const EXIT_VALID: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_DISAGREE: u8 = 4;

#[derive(Parser)]
#[command(name = "ws1s", version, about = "WS1S decision procedure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one formula.
    Decide(DecideArgs),
    /// Compare both modes over a corpus.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "validity")]
    task: TaskArg,
    /// Term-node cap (nested mode) and state cap (classical mode).
    #[arg(long)]
    budget: Option<usize>,
    /// Print a JSON report.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DecideArgs {
    #[arg(long, conflicts_with = "family")]
    formula_file: Option<PathBuf>,
    /// Formula family (`chain`).
    #[arg(long, requires_all = ["n", "k"])]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "both")]
    mode: Mode,
    /// Include every fixpoint iterate in the output.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CorpusArgs {
    /// Matrices with at most this many connectives (exhaustive corpus).
    #[arg(long, default_value_t = 2)]
    max_connectives: usize,
    /// Use the chain grid n ∈ 2..=4, k ∈ 1..=3 instead.
    #[arg(long)]
    chain_grid: bool,
    /// Run a random sample of this size.
    #[arg(long)]
    sample: Option<usize>,
    /// Seed of the random sample.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TaskArg {
    Validity,
    Satisfiability,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Validity => Task::Validity,
            TaskArg::Satisfiability => Task::Satisfiability,
        }
    }
}

fn options(common: &Common, trace: bool) -> RunOptions {
    let mut opts = RunOptions {
        trace,
        ..RunOptions::default()
    };
    if let Some(b) = common.budget {
        opts.term_budget = b;
        opts.state_budget = b;
    }
    opts
}

fn usage(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_USAGE)
}

fn decide(args: DecideArgs) -> ExitCode {
    let (id, text) = match (&args.formula_file, &args.family) {
        (Some(path), None) => match std::fs::read_to_string(path) {
            Ok(t) => (path.display().to_string(), t),
            Err(e) => return usage(format!("{}: {e}", path.display())),
        },
        (None, Some(name)) => {
            let (n, k) = (args.n.unwrap_or(0), args.k.unwrap_or(0));
            match generate_family(name, n, k) {
                Ok(t) => (format!("{name}-n{n}-k{k}"), t),
                Err(e) => return usage(e),
            }
        }
        _ => return usage("give either --formula-file or --family with --n and --k"),
    };
    let formula = match parse_formula(&text) {
        Ok(f) => f,
        Err(e) => return usage(e),
    };
    let task: Task = args.common.task.into();
    let report = run(&id, &formula, task, args.mode, &options(&args.common, args.trace));
    if args.common.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        let word = |v: Option<bool>| match (v, task) {
            (None, _) => "-",
            (Some(true), Task::Validity) => "valid",
            (Some(false), Task::Validity) => "invalid",
            (Some(true), Task::Satisfiability) => "satisfiable",
            (Some(false), Task::Satisfiability) => "unsatisfiable",
        };
        for line in &report.trace {
            println!("{line}");
        }
        println!("formula: {id}");
        println!("classical: {}", word(report.classical_verdict));
        println!("antichain: {}", word(report.antichain_verdict));
        if let Some(s) = report.base_states {
            println!("matrix states: {s}");
        }
        if let Some(s) = report.classical_total_states {
            println!("classical states: {s}");
        }
        if let Some(t) = report.antichain_term_nodes {
            println!("antichain term nodes: {t}");
        }
        if let Some(e) = &report.error {
            println!("error: {e}");
        }
    }
    if report.disagreement {
        eprintln!("DISAGREEMENT between classical and antichain verdicts");
        return ExitCode::from(EXIT_DISAGREE);
    }
    match report.verdict() {
        Some(true) => ExitCode::from(EXIT_VALID),
        Some(false) => ExitCode::from(EXIT_INVALID),
        None if report.resource_exhausted => ExitCode::from(EXIT_RESOURCE),
        None => usage(report.error.unwrap_or_default()),
    }
}

fn corpus(args: CorpusArgs) -> ExitCode {
    let mut items = if args.chain_grid {
        chain_grid(2..=4, &[1, 2, 3])
    } else {
        exhaustive_corpus(args.max_connectives)
    };
    if let Some(size) = args.sample {
        let mut rng = StdRng::seed_from_u64(args.seed);
        items.shuffle(&mut rng);
        items.truncate(size);
        items.sort_by(|a, b| a.id.cmp(&b.id));
    }
    let report = compare_corpus(
        &items,
        args.common.task.into(),
        &options(&args.common, false),
        args.workers,
    );
    if args.common.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{}", report.render_table());
    }
    if report.disagreements > 0 {
        ExitCode::from(EXIT_DISAGREE)
    } else if report.reports.iter().any(|r| r.resource_exhausted) {
        ExitCode::from(EXIT_RESOURCE)
    } else {
        ExitCode::from(EXIT_VALID)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_VALID };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Decide(args) => decide(args),
        Command::Corpus(args) => corpus(args),
    }
}
