use std::fmt::Display;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use k2triples::dataset::BuildError;
use k2triples::ingest::IngestError;
use k2triples::{Dataset, FormatError, ParseMode, Role, StoreStats};

#[derive(Parser)]
#[command(name = "k2triples", version, about = "Compressed RDF store on per-predicate k2-trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a store file from N-Triples input
    Build {
        input: PathBuf,
        output: PathBuf,
        /// Tree arity
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Abort on the first malformed line
        #[arg(long)]
        strict: bool,
        /// Print build time in microseconds to stderr
        #[arg(long)]
        time: bool,
    },
    /// Answer one triple pattern, e.g. "(?s, <http://p>, ?o)"
    Query {
        store: PathBuf,
        pattern: String,
        /// Print IDs instead of terms
        #[arg(long)]
        ids: bool,
        /// Print only the number of results
        #[arg(long)]
        count: bool,
        /// Print query time in microseconds to stderr
        #[arg(long)]
        time: bool,
    },
    /// Join two patterns on their shared variable
    Join {
        store: PathBuf,
        left: String,
        right: String,
        #[arg(long)]
        ids: bool,
        #[arg(long)]
        count: bool,
        #[arg(long)]
        time: bool,
        /// Print the join axis and category first
        #[arg(long)]
        explain: bool,
    },
    /// Report sizes and compression figures of a store file
    Stats { store: PathBuf },
}

enum Failure {
    Usage(String),
    Io(String),
    Corrupt(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Corrupt(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Corrupt(m) => m,
        }
    }
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_error(path: &Path, e: impl Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Dataset, Failure> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    Dataset::read_from(&mut bytes.as_slice()).map_err(|e| match e {
        FormatError::Io(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
            Failure::Corrupt(format!("{}: truncated store file", path.display()))
        }
        e => Failure::Corrupt(format!("{}: {e}", path.display())),
    })
}

fn report_time(enabled: bool, start: Instant) {
    if enabled {
        eprintln!("time_us={}", start.elapsed().as_micros());
    }
}

fn warn_unknown(unknown: &Option<(String, Role)>) {
    if let Some((term, role)) = unknown {
        eprintln!("warning: {term} does not occur as {role}; no results");
    }
}

fn build(input: &Path, output: &Path, k: u32, strict: bool, time: bool) -> Result<(), Failure> {
    let start = Instant::now();
    let mode = if strict { ParseMode::Strict } else { ParseMode::Lenient };
    let (ds, errors) = Dataset::build_from_path(input, k, mode).map_err(|e| match e {
        BuildError::Ingest(IngestError::Io(e)) => io_error(input, e),
        BuildError::Ingest(IngestError::Syntax(e)) => Failure::Io(format!("{}: {e}", input.display())),
        BuildError::Store(e) => usage(e),
    })?;
    for e in &errors {
        eprintln!("{e}");
    }
    ds.save(output).map_err(|e| io_error(output, e))?;
    report_time(time, start);
    print!("{}", StoreStats::of(&ds).render_text());
    Ok(())
}

fn query(path: &Path, pattern: &str, ids: bool, count: bool, time: bool) -> Result<(), Failure> {
    let ds = load(path)?;
    let start = Instant::now();
    let answer = ds.query(pattern).map_err(usage)?;
    report_time(time, start);
    warn_unknown(&answer.unknown_term);
    let mut out = BufWriter::new(io::stdout().lock());
    if count {
        writeln!(out, "{}", answer.triples.len())?;
    } else {
        for t in &answer.triples {
            if ids {
                writeln!(out, "{} {} {}", t.s, t.p, t.o)?;
            } else {
                let line = ds.render(t).expect("store IDs resolve in the dictionary");
                writeln!(out, "{line}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn join(
    path: &Path,
    left: &str,
    right: &str,
    ids: bool,
    count: bool,
    time: bool,
    explain: bool,
) -> Result<(), Failure> {
    let ds = load(path)?;
    let start = Instant::now();
    let answer = ds.join(left, right).map_err(usage)?;
    report_time(time, start);
    warn_unknown(&answer.unknown_term);
    let query = answer.query.as_ref().expect("a parsed join carries its query");
    let mut out = BufWriter::new(io::stdout().lock());
    if explain {
        writeln!(out, "{} / {}", query.axis(), query.category())?;
    }
    let bindings = &answer.bindings;
    if count {
        writeln!(out, "{}", bindings.len())?;
    } else {
        let header: Vec<String> = bindings.vars.iter().map(|v| format!("?{v}")).collect();
        writeln!(out, "{}", header.join("\t"))?;
        let roles = Dataset::join_roles(query);
        for row in &bindings.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&roles)
                .map(|(&id, &role)| {
                    if ids {
                        id.to_string()
                    } else {
                        ds.term(id, role).expect("store IDs resolve in the dictionary").to_string()
                    }
                })
                .collect();
            writeln!(out, "{}", cells.join("\t"))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn stats(path: &Path) -> Result<(), Failure> {
    let ds = load(path)?;
    let stats = StoreStats::of(&ds);
    print!("{}\n{}", stats.render_text(), stats.render_kv());
    Ok(())
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(format!("stdout: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Build {
            input,
            output,
            k,
            strict,
            time,
        } => build(input, output, *k, *strict, *time),
        Command::Query {
            store,
            pattern,
            ids,
            count,
            time,
        } => query(store, pattern, *ids, *count, *time),
        Command::Join {
            store,
            left,
            right,
            ids,
            count,
            time,
            explain,
        } => join(store, left, right, *ids, *count, *time, *explain),
        Command::Stats { store } => stats(store),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
