//! `hadswitch`: generate, analyze, switch, canonicalize and enumerate
//! Hadamard matrices.
//!
//! Exit status is 0 on success, 1 for domain errors (a matrix that is not
//! Hadamard, a quadruple that cannot be switched, a store for another mode)
//! and 2 for I/O errors and bad usage.

mod analyze;
mod selftest;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hadswitch::canonical::CanonicalError;
use hadswitch::constructions::{load_seed, ConstructionError};
use hadswitch::enumeration::{self, EnumerationError, StoreError};
use hadswitch::structure::Axis;
use hadswitch::switching::{switch_closed_quadruple, switch_hall_set, SwitchError};
use hadswitch::{canonical_key, double, paley, sylvester, CanonicalKey, ClassStore, DoublingShape, EnumerationMode, EnumerationOptions, HadamardMatrix, MatrixError, PaleyKind};

#[derive(Parser, Debug)]
#[command(name = "hadswitch", version, about = "Switching, invariants and class enumeration for Hadamard matrices")]
struct Cli {
    /// Worker threads for enumeration and reports.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the run configuration and progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a seed matrix and write it as a .had file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file; stdout when omitted.
        #[arg(long, short, global = true)]
        out: Option<PathBuf>,
    },
    /// Print structural invariants of a matrix.
    Analyze(InputArgs),
    /// Switch a closed quadruple or a Hall set.
    Switch(SwitchArgs),
    /// Print the canonical key of a matrix, or decode a key.
    Canon {
        #[arg(long = "in", short, conflicts_with = "decode", value_name = "FILE")]
        input: Option<PathBuf>,
        /// Hex key to turn back into its representative matrix.
        #[arg(long, value_name = "HEX")]
        decode: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Breadth-first class enumeration into a resumable store.
    Enumerate(EnumerateArgs),
    /// Summarize a store.
    Report {
        #[arg(long, value_name = "DIR")]
        store: PathBuf,
    },
    /// Run quick built-in consistency checks.
    Selftest,
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Sylvester matrix of order 2^K.
    Sylvester { k: u32 },
    /// Paley I matrix of order Q+1, Q = 3 mod 4.
    Paley1 { q: usize },
    /// Paley II matrix of order 2(Q+1), Q = 1 mod 4.
    Paley2 { q: usize },
    /// `[[A, PB], [A, -PB]]`, or `[[A, A], [BP, -BP]]` with --tilde.
    Double {
        a: PathBuf,
        b: PathBuf,
        /// File holding the permutation as whitespace-separated 0-based images.
        #[arg(long)]
        perm: Option<PathBuf>,
        #[arg(long)]
        tilde: bool,
    },
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Input .had file; `-` or omitted reads stdin.
    #[arg(long = "in", short, value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SwitchArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Four distinct 0-based row indices.
    #[arg(long, value_delimiter = ',', required_unless_present = "cols", conflicts_with = "cols")]
    rows: Vec<usize>,
    /// Four column indices of a closed column quadruple.
    #[arg(long, value_delimiter = ',', conflicts_with = "hall")]
    cols: Vec<usize>,
    /// 1-based field.
    #[arg(long, default_value_t = 1)]
    field: usize,
    /// Treat the rows as a Hall set.
    #[arg(long)]
    hall: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(long, value_name = "FILE")]
    seed: PathBuf,
    #[arg(long)]
    mode: EnumerationMode,
    #[arg(long, value_name = "DIR")]
    store: PathBuf,
    #[arg(long)]
    limit: Option<usize>,
    /// Explore transpose entries too for orders 4 mod 8 in mode q.
    #[arg(long)]
    no_skip: bool,
}

#[derive(Debug)]
enum CliError {
    Domain(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        domain(e)
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        domain(e)
    }
}

impl From<SwitchError> for CliError {
    fn from(e: SwitchError) -> Self {
        domain(e)
    }
}

impl From<CanonicalError> for CliError {
    fn from(e: CanonicalError) -> Self {
        domain(e)
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io { .. } => CliError::Io(e.to_string()),
            other => domain(other),
        }
    }
}

impl From<EnumerationError> for CliError {
    fn from(e: EnumerationError) -> Self {
        match e {
            EnumerationError::Store(s) => s.into(),
            other => domain(other),
        }
    }
}

fn io_error(what: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", what.display()))
}

fn read_text(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p).map_err(|e| io_error(p, e)),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| io_error(Path::new("<stdin>"), e))?;
            Ok(s)
        }
    }
}

fn read_matrix(path: Option<&Path>) -> Result<HadamardMatrix, CliError> {
    Ok(load_seed(&read_text(path)?)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn parse_permutation(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| domain(format!("bad permutation entry {t:?}"))))
        .collect()
}

fn quad(v: &[usize]) -> Result<[usize; 4], CliError> {
    v.try_into().map_err(|_| domain(format!("expected four indices, got {}", v.len())))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.verbose {
        let args: Vec<String> = std::env::args().collect();
        eprintln!("# hadswitch {} | {}", env!("CARGO_PKG_VERSION"), args.join(" "));
    }
    match &cli.command {
        Command::Gen { kind, out } => {
            let m = match kind {
                GenKind::Sylvester { k } => {
                    if *k > 12 {
                        return Err(domain(ConstructionError::ExponentTooLarge(*k)));
                    }
                    sylvester(*k)
                }
                GenKind::Paley1 { q } => paley(*q, PaleyKind::One)?,
                GenKind::Paley2 { q } => paley(*q, PaleyKind::Two)?,
                GenKind::Double { a, b, perm, tilde } => {
                    let a = read_matrix(Some(a))?;
                    let b = read_matrix(Some(b))?;
                    let p = match perm {
                        Some(f) => parse_permutation(&read_text(Some(f))?)?,
                        None => (0..a.order()).collect(),
                    };
                    let shape = if *tilde { DoublingShape::SideBySide } else { DoublingShape::Stacked };
                    double(&a, &b, &p, shape)?
                }
            };
            write_output(out.as_deref(), &m.to_had_string())
        }
        Command::Analyze(input) => {
            let m = read_matrix(input.input.as_deref())?;
            let a = analyze::analyze(&m);
            let text = if cli.json { to_json(&a) } else { a.to_text() };
            write_output(None, &text)
        }
        Command::Switch(args) => {
            let m = read_matrix(args.input.input.as_deref())?;
            let out = if !args.cols.is_empty() {
                switch_closed_quadruple(&m, quad(&args.cols)?, args.field, Axis::Columns)?
            } else if args.hall {
                switch_hall_set(&m, quad(&args.rows)?, args.field)?
            } else {
                switch_closed_quadruple(&m, quad(&args.rows)?, args.field, Axis::Rows)?
            };
            write_output(args.out.as_deref(), &out.to_had_string())
        }
        Command::Canon { input, decode, out } => match decode {
            Some(hex) => {
                let key = CanonicalKey::from_hex(hex.trim())?;
                write_output(out.as_deref(), &key.decode().to_had_string())
            }
            None => {
                let key = canonical_key(&read_matrix(input.as_deref())?);
                let text = if cli.json {
                    to_json(&serde_json::json!({
                        "order": key.order(),
                        "key": key.to_hex(),
                        "fingerprint": format!("{:016x}", key.fingerprint()),
                    }))
                } else {
                    format!("{}\n", key.to_hex())
                };
                write_output(out.as_deref(), &text)
            }
        },
        Command::Enumerate(args) => {
            let seed = read_matrix(Some(&args.seed))?;
            let mut store = ClassStore::open_or_create(&args.store, args.mode, seed.order())?;
            if cli.verbose {
                eprintln!(
                    "# store {} mode {} order {} classes {} explored {}",
                    args.store.display(),
                    args.mode,
                    seed.order(),
                    store.len(),
                    store.explored()
                );
            }
            let options = EnumerationOptions {
                limit: args.limit,
                threads: cli.threads,
                skip_transposes: !args.no_skip,
                full_report: false,
            };
            let start = std::time::Instant::now();
            let summary = enumeration::enumerate(&seed, args.mode, &mut store, &options)?;
            if cli.verbose {
                eprintln!("# finished in {:.2?}", start.elapsed());
            }
            let text = if cli.json {
                to_json(&summary)
            } else {
                format!(
                    "{} classes, {}\n",
                    summary.class_count,
                    if summary.exhausted { "exhausted" } else { "not exhausted" }
                )
            };
            write_output(None, &text)
        }
        Command::Report { store } => {
            let store = ClassStore::resume(store)?;
            let report = with_threads(cli.threads, || enumeration::report(&store))?;
            let text = if cli.json { to_json(&report) } else { report_text(&report) };
            write_output(None, &text)
        }
        Command::Selftest => {
            let results = selftest::run();
            let failed = results.iter().filter(|r| !r.passed).count();
            let text = if cli.json {
                to_json(&results)
            } else {
                let mut s: String = results
                    .iter()
                    .map(|r| format!("{} {}\n", if r.passed { "ok  " } else { "FAIL" }, r.name))
                    .collect();
                s.push_str(&format!("{} checks, {} failed\n", results.len(), failed));
                s
            };
            write_output(None, &text)?;
            if failed > 0 {
                return Err(domain(format!("{failed} self-test checks failed")));
            }
            Ok(())
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(domain)?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn report_text(r: &enumeration::EnumerationReport) -> String {
    let mut s = format!(
        "mode {} order {}\n{} classes, {}\nexplored {}\n",
        r.mode,
        r.order,
        r.class_count,
        if r.exhausted { "exhausted" } else { "not exhausted" },
        r.explored
    );
    s.push_str("classes (key fingerprint, closed row/column quadruples, Hall sets, self-dual):\n");
    for c in &r.per_class_stats {
        let fp = CanonicalKey::from_hex(&c.key).map(|k| k.fingerprint()).unwrap_or_default();
        s.push_str(&format!(
            "  {fp:016x} {} {} {} {}\n",
            c.closed_row_quadruples, c.closed_column_quadruples, c.hall_sets, c.self_dual
        ));
    }
    s.push_str("dual pairs:\n");
    for p in &r.dual_pairing {
        let fp = |h: &str| CanonicalKey::from_hex(h).map(|k| k.fingerprint()).unwrap_or_default();
        match &p.dual_key {
            None => s.push_str(&format!("  {:016x} self-dual\n", fp(&p.key))),
            Some(d) => s.push_str(&format!(
                "  {:016x} <-> {:016x}{}\n",
                fp(&p.key),
                fp(d),
                if p.dual_in_store { "" } else { " (dual not in store)" }
            )),
        }
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
