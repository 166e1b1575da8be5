use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use irv_margin::bounds::BoundKind;
use irv_margin::distance::Mode;
use irv_margin::election::Election;
use irv_margin::search::{compute_margin, exhaustive_margin, mrsw_baseline, SearchConfig};
use irv_margin::tabulator::{run_irv, TiePolicy};

mod report;

#[derive(Parser)]
#[command(name = "irv-margin", version, about = "Exact margins of victory for instant-runoff elections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the margin of victory.
    Compute(ComputeArgs),
    /// Run the count and print every round.
    Tabulate(TabulateArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Modify,
    Add,
    Delete,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Modify => Mode::Modify,
            ModeArg::Add => Mode::Add,
            ModeArg::Delete => Mode::Delete,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Algorithm {
    /// Branch-and-bound with closed-form bounds.
    Margin,
    /// Baseline that scores every node with a distance program.
    Mrsw,
    /// Every full elimination order; small elections only.
    Exhaustive,
}

impl Algorithm {
    fn as_str(self) -> &'static str {
        match self {
            Algorithm::Margin => "margin",
            Algorithm::Mrsw => "mrsw",
            Algorithm::Exhaustive => "exhaustive",
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum BoundArg {
    Lb1,
    Lb2,
}

#[derive(Copy, Clone, ValueEnum)]
enum TieArg {
    Lexicographic,
    ByIndex,
}

#[derive(Copy, Clone, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Text,
}

#[derive(clap::Args)]
struct ComputeArgs {
    /// Ballot file, or `-` for stdin.
    #[arg(long)]
    ballots: PathBuf,
    #[arg(long, value_enum, default_value = "modify")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "margin")]
    algorithm: Algorithm,
    #[arg(long, value_enum, default_value = "lb2")]
    bound: BoundArg,
    /// Give up once the margin is known to exceed this.
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long, value_enum, default_value = "lexicographic")]
    tie_policy: TieArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..=256))]
    threads: u16,
    /// Write every distance program to stderr in CPLEX LP format.
    #[arg(long)]
    dump_lp: bool,
}

#[derive(clap::Args)]
struct TabulateArgs {
    #[arg(long)]
    ballots: PathBuf,
    #[arg(long, value_enum, default_value = "lexicographic")]
    tie_policy: TieArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn tie_policy(t: TieArg) -> TiePolicy {
    match t {
        TieArg::Lexicographic => TiePolicy::Lexicographic,
        TieArg::ByIndex => TiePolicy::ByIndex,
    }
}

fn load(path: &PathBuf) -> Result<Election> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).context("reading stdin")?
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    Election::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn compute(args: ComputeArgs) -> Result<String> {
    let e = load(&args.ballots)?;
    if e.num_candidates() < 2 {
        bail!("margin computation needs at least two candidates");
    }
    let bound = match args.bound {
        BoundArg::Lb1 => BoundKind::Lb1,
        BoundArg::Lb2 => BoundKind::Lb2,
    };
    let mut cfg = SearchConfig {
        mode: args.mode.into(),
        bound,
        cap: args.cap,
        tie_policy: tie_policy(args.tie_policy),
        threads: usize::from(args.threads),
        ..SearchConfig::default()
    };
    if args.dump_lp {
        let names = e.names().to_vec();
        let stderr = Arc::new(Mutex::new(std::io::stderr()));
        cfg.on_model = Some(Arc::new(move |pi, lp| {
            let order: Vec<&str> = pi.candidates().iter().map(|c| names[c.0].as_str()).collect();
            let mut err = stderr.lock().expect("stderr lock");
            let _ = writeln!(err, "\\ order [{}]\n{}", order.join(","), lp.to_lp_format());
        }));
    }
    let r = match args.algorithm {
        Algorithm::Margin => compute_margin(&e, &cfg),
        Algorithm::Mrsw => mrsw_baseline(&e, &cfg),
        Algorithm::Exhaustive => exhaustive_margin(&e, &cfg),
    }?;
    let doc = report::margin_document(&e, &r, args.algorithm.as_str(), &bound.to_string(), args.cap);
    Ok(match args.format {
        Format::Json => serde_json::to_string_pretty(&doc)? + "\n",
        Format::Text => report::margin_text(&doc),
    })
}

fn tabulate(args: TabulateArgs) -> Result<String> {
    let e = load(&args.ballots)?;
    let t = run_irv(&e, tie_policy(args.tie_policy))?;
    let doc = report::tabulation_document(&e, &t);
    Ok(match args.format {
        Format::Json => serde_json::to_string_pretty(&doc)? + "\n",
        Format::Text => report::tabulation_text(&doc),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Tabulate(a) => tabulate(a),
    };
    match out {
        Ok(s) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
