use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use givp::func::catalog;
use givp_cli::record::{read_records, write_records};
use givp_cli::scenario::TaskKind;
use givp_cli::{execute, load, plot, Outcome, Overrides, RunRecord};
use rayon::prelude::*;

/// Runs group-invariant variational scenarios and emits certificates.
#[derive(Parser)]
#[command(name = "givp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a config file; writes JSON lines.
    Run {
        config: PathBuf,
        /// Write records here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace every scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        threads: Option<usize>,
        /// Replace every scenario's acceptance tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Turn a record stream into CSV plot data.
    Plot {
        records: PathBuf,
        #[arg(long)]
        dir: PathBuf,
    },
    /// List builtin groups, objectives and tasks.
    Catalog,
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn run(config: PathBuf, out: Option<PathBuf>, o: Overrides, threads: Option<usize>) -> ExitCode {
    let scenarios = match load(&config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        pool = pool.num_threads(k);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let records: Vec<RunRecord> = pool.install(|| scenarios.par_iter().map(|s| execute(s, o)).collect());
    let written = match &out {
        Some(p) => File::create(p).and_then(|f| write_records(BufWriter::new(f), &records)),
        None => write_records(io::stdout().lock(), &records),
    };
    if let Err(e) = written {
        eprintln!("error: writing records: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let mut failed = false;
    for r in &records {
        let note = r.message.as_deref().unwrap_or("");
        match r.outcome {
            Outcome::Pass => {}
            Outcome::Fail => {
                failed = true;
                eprintln!("FAIL {}: {note}", r.scenario);
            }
            Outcome::Degenerate => eprintln!("warning: {} is degenerate: {note}", r.scenario),
            Outcome::BudgetExhausted => eprintln!("warning: {} exhausted its budget: {note}", r.scenario),
        }
    }
    if failed {
        ExitCode::from(EXIT_FAIL)
    } else {
        ExitCode::SUCCESS
    }
}

fn plot_cmd(records: PathBuf, dir: PathBuf) -> ExitCode {
    let recs = match File::open(&records).and_then(|f| read_records(BufReader::new(f))) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", records.display());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match plot::emit(&recs, &dir) {
        Ok(p) => {
            eprintln!("wrote {}", p.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn catalog_cmd() -> io::Result<()> {
    let mut w = io::stdout().lock();
    writeln!(w, "groups:")?;
    for g in [
        "trivial(n)     { preset = \"trivial\", n }",
        "sign(n)        { preset = \"sign\", n }",
        "sym(n)         { preset = \"sym\", n }",
        "signed-perm(n) { preset = \"signed_perm\", n }",
        "cyclic(k)      { preset = \"cyclic\", k }        on ℝ²",
        "so2(nodes)     { preset = \"so2\", nodes = 64 }  on ℝ²",
        "generated      { dim, generators = [[[..]]], max_order }",
    ] {
        writeln!(w, "  {g}")?;
    }
    writeln!(w, "objectives:")?;
    for e in catalog::ENTRIES {
        let dim = e.fixed_dim.map_or("ℝⁿ".to_string(), |k| format!("ℝ^{k}"));
        let flags = e.flags;
        let mut tags = Vec::new();
        if flags.declared_convex {
            tags.push("convex");
        }
        if flags.bounded_below {
            tags.push("bounded below");
        }
        if e.smooth {
            tags.push("smooth");
        }
        writeln!(w, "  {:<18} {:<20} {dim:<5} {}", e.name, e.summary, tags.join(", "))?;
    }
    writeln!(w, "tasks:")?;
    for t in TaskKind::ALL {
        writeln!(w, "  {t}")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
            tol,
        } => run(config, out, Overrides { seed, tol }, threads),
        Command::Plot { records, dir } => plot_cmd(records, dir),
        Command::Catalog => match catalog_cmd() {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_FAIL)
            }
        },
    }
}
