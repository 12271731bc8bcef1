//! Command-line front end.
//!
//! Exit codes: 0 when the verdict set is exactly `{true}`, 1 when it contains `false`,
//! 2 when a truncated run found only `true`. Errors use the `sysexits` codes: 64 usage,
//! 65 malformed input, 66 unreadable file, 69 solver unavailable, 70 internal failure,
//! 73 cannot write output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtlmon::casegen::auction::{gen_auction_log, AuctionVector};
use mtlmon::casegen::random::{random_events, ComputationParams};
use mtlmon::casegen::specs::spec_sources;
use mtlmon::casegen::three_party::{self, gen_three_party_log, ThreePartyVector};
use mtlmon::casegen::two_party::{self, enumerate_two_party_executions, gen_two_party_log, ExecutionVector, ProtocolParams};
use mtlmon::computation::Event;
use mtlmon::mtl::{parse_spec_with_warnings, Time, Verdict};
use mtlmon::pipeline::ingest::{ingest_many, to_jsonl, to_records, IngestError};
use mtlmon::pipeline::{monitor, Engine, MonitorConfig, MonitorError};
use mtlmon::smt::SmtError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_TRUNCATED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_UNAVAILABLE: i32 = 69;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_CANT_CREATE: i32 = 73;

#[derive(Debug, Parser)]
#[command(name = "mtlmon", version, about = "Monitor MTL specs over distributed event logs")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate protocol logs, random computations or specs.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Smt,
    Enumerate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSONL event log; repeat to merge several logs.
    #[arg(long, value_name = "PATH")]
    trace: Vec<PathBuf>,
    /// File holding one spec.
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    /// Maximum clock skew.
    #[arg(long)]
    epsilon: Option<Time>,
    #[arg(long, default_value_t = 1)]
    segments: usize,
    /// Computation length; defaults to the largest timestamp.
    #[arg(long)]
    length: Option<Time>,
    #[arg(long, value_enum, default_value_t = EngineArg::Enumerate)]
    engine: EngineArg,
    /// Solver command reading SMT-LIB on stdin, e.g. "z3 -in".
    #[arg(long, value_name = "CMD")]
    solver_cmd: Option<String>,
    #[arg(long, default_value_t = 16)]
    max_verdicts: usize,
    #[arg(long, default_value_t = 64)]
    branch_cap: usize,
    /// Per-query solver timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Directory that receives every solver query.
    #[arg(long, value_name = "DIR")]
    emit_smt: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// One hedged two-party swap log.
    TwoParty {
        /// Twelve bits: attempted and late for each step.
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 10)]
        delta: Time,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All 1024 two-party logs, one file per vector.
    Grid {
        #[arg(long, default_value_t = 10)]
        delta: Time,
        #[arg(long)]
        out: PathBuf,
    },
    /// One hedged three-party swap log.
    ThreeParty {
        /// Twenty-four bits.
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 10)]
        delta: Time,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One auction log.
    Auction {
        /// Eight bits.
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 10)]
        delta: Time,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A seeded random computation.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        processes: usize,
        #[arg(long, default_value_t = 8)]
        events: usize,
        #[arg(long, default_value_t = 2)]
        epsilon: Time,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a library spec; without a name, list them.
    Spec {
        name: Option<String>,
        #[arg(long, default_value_t = 10)]
        delta: Time,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Some(Command::Gen(g)) => generate(g, out),
        None => run(cli.run, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "mtlmon: {}", f.message);
            f.code
        }
    }
}

fn run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    if a.trace.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "--trace is required"));
    }
    let spec_path = a.spec.ok_or_else(|| Failure::new(EXIT_USAGE, "--spec is required"))?;
    let epsilon = a.epsilon.ok_or_else(|| Failure::new(EXIT_USAGE, "--epsilon is required"))?;
    if a.segments == 0 {
        return Err(Failure::new(EXIT_USAGE, "--segments must be positive"));
    }
    if a.max_verdicts == 0 || a.branch_cap == 0 {
        return Err(Failure::new(EXIT_USAGE, "--max-verdicts and --branch-cap must be positive"));
    }
    let engine = match a.engine {
        EngineArg::Enumerate => Engine::Enumerate,
        EngineArg::Smt => Engine::Smt,
    };
    if engine == Engine::Smt && a.solver_cmd.is_none() {
        return Err(Failure::new(EXIT_USAGE, "--engine smt needs --solver-cmd"));
    }

    let text = std::fs::read_to_string(&spec_path)
        .map_err(|e| Failure::new(EXIT_NO_INPUT, format!("cannot read {}: {e}", spec_path.display())))?;
    let (formula, warnings) = parse_spec_with_warnings(&text)
        .map_err(|e| Failure::new(EXIT_DATA, format!("{}:{e}", spec_path.display())))?;
    for w in warnings {
        let _ = writeln!(err, "mtlmon: warning: {}:{w}", spec_path.display());
    }
    let events = ingest_many(&a.trace).map_err(|e| match e {
        IngestError::Io { .. } => Failure::new(EXIT_NO_INPUT, e.to_string()),
        _ => Failure::new(EXIT_DATA, e.to_string()),
    })?;

    let mut cfg = MonitorConfig::new(epsilon, a.segments, engine);
    cfg.length = a.length;
    if let Some(cmd) = a.solver_cmd {
        cfg.solver_command = cmd;
    }
    cfg.max_verdicts = a.max_verdicts;
    cfg.branch_cap = a.branch_cap;
    cfg.timeout = Duration::from_secs(a.timeout);
    cfg.emit_smt = a.emit_smt;
    if let Some(dir) = &cfg.emit_smt {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::new(EXIT_CANT_CREATE, format!("cannot create {}: {e}", dir.display())))?;
    }

    let report = monitor(events, &formula, &cfg).map_err(|e| {
        let code = match &e {
            MonitorError::Computation(_) => EXIT_DATA,
            MonitorError::Config => EXIT_USAGE,
            MonitorError::Smt { source: SmtError::Spawn(_), .. } => EXIT_UNAVAILABLE,
            MonitorError::Smt { source: SmtError::Emit { .. }, .. } => EXIT_CANT_CREATE,
            _ => EXIT_SOFTWARE,
        };
        Failure::new(code, e.to_string())
    })?;
    let rendered = match a.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    };
    out.write_all(rendered.as_bytes())
        .map_err(|e| Failure::new(EXIT_SOFTWARE, format!("cannot write report: {e}")))?;

    Ok(if report.verdicts.contains(&Verdict::Bottom) {
        EXIT_FAIL
    } else if report.truncated {
        EXIT_TRUNCATED
    } else {
        EXIT_PASS
    })
}

fn generate(g: GenCommand, out: &mut dyn Write) -> Result<i32, Failure> {
    let bad_vector = |e: mtlmon::casegen::VectorError| Failure::new(EXIT_USAGE, format!("--vector: {e}"));
    match g {
        GenCommand::TwoParty { vector, delta, out: path } => {
            check_delta(delta)?;
            let v: ExecutionVector = vector.parse().map_err(bad_vector)?;
            let log = gen_two_party_log(&v, &ProtocolParams::new(delta));
            emit(&log, &two_party::PROCESSES, path.as_deref(), out)?;
        }
        GenCommand::Grid { delta, out: dir } => {
            check_delta(delta)?;
            std::fs::create_dir_all(&dir)
                .map_err(|e| Failure::new(EXIT_CANT_CREATE, format!("cannot create {}: {e}", dir.display())))?;
            let params = ProtocolParams::new(delta);
            for v in enumerate_two_party_executions() {
                let log = gen_two_party_log(&v, &params);
                let path = dir.join(format!("{v}.jsonl"));
                emit(&log, &two_party::PROCESSES, Some(&path), out)?;
            }
        }
        GenCommand::ThreeParty { vector, delta, out: path } => {
            check_delta(delta)?;
            let v = ThreePartyVector::parse(&vector).map_err(bad_vector)?;
            emit(&gen_three_party_log(&v, delta), &three_party::PROCESSES, path.as_deref(), out)?;
        }
        GenCommand::Auction { vector, delta, out: path } => {
            check_delta(delta)?;
            let v = AuctionVector::parse(&vector).map_err(bad_vector)?;
            emit(&gen_auction_log(&v, delta), &mtlmon::casegen::auction::PROCESSES, path.as_deref(), out)?;
        }
        GenCommand::Random { seed, processes, events, epsilon, out: path } => {
            if processes == 0 || events == 0 {
                return Err(Failure::new(EXIT_USAGE, "--processes and --events must be positive"));
            }
            let p = ComputationParams { processes, min_events: events, max_events: events, epsilon, ..Default::default() };
            let names: Vec<String> = (1..=processes).map(|i| format!("p{i}")).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            emit(&random_events(seed, &p), &names, path.as_deref(), out)?;
        }
        GenCommand::Spec { name, delta } => {
            check_delta(delta)?;
            let lib = spec_sources(delta);
            let text = match name {
                None => lib.keys().map(|k| format!("{k}\n")).collect::<String>(),
                Some(n) => match lib.get(n.as_str()) {
                    Some(s) => format!("{s}\n"),
                    None => return Err(Failure::new(EXIT_USAGE, format!("no spec named {n:?}"))),
                },
            };
            out.write_all(text.as_bytes())
                .map_err(|e| Failure::new(EXIT_SOFTWARE, format!("cannot write: {e}")))?;
        }
    }
    Ok(EXIT_PASS)
}

fn check_delta(delta: Time) -> Result<(), Failure> {
    if delta < 2 {
        return Err(Failure::new(EXIT_USAGE, "--delta must be at least 2"));
    }
    Ok(())
}

fn emit(log: &[Event], names: &[&str], path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let text = to_jsonl(&to_records(log, names));
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::new(EXIT_CANT_CREATE, format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_SOFTWARE, format!("cannot write: {e}"))),
    }
}
