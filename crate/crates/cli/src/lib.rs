//! Command-line front end for the `socle` library.
//!
//! [`run`] parses an argument vector, runs one command and writes its output;
//! [`run_corpus`] replays a directory of recorded invocations.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use anyhow::{anyhow, bail, Context as _};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use socle::arthur::{build_pi, decompose_unitary, packet_of, validate, ExtendedMultiSegment, Member, UnitaryDecomposition};
use socle::clrep::{AParameter, ClDatum};
use socle::derivatives::{d_max, DerivativeKind, DerivativeTrace, TraceStep};
use socle::engine::{first_reducible_point, is_irreducible, socle, InductionProblem};
use socle::glrep::SpehShape;
use socle::{CuspidalLabel, GroupKind, GroupType, HalfInt};

mod corpus;

pub use corpus::{bundled_corpus, load_corpus, run_cases, run_corpus, Case, CorpusReport, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "socle", version, about = "Socles of u(a,b)|.|^s x pi for Sp(2n) and SO(2n+1)")]
struct Cli {
    /// Print JSON instead of the text notation.
    #[arg(long, global = true)]
    json: bool,
    /// Also print the derivative traces behind the answer.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The irreducible summands of soc(u(a,b)|.|^s x pi).
    Socle(Shifted),
    /// Whether u(a,b)|.|^s x pi is irreducible.
    Irred(Shifted),
    /// The first s >= 0 at which u(a,b)|.|^s x pi reduces.
    Frp(Induction),
    /// The members of an A-packet of good parity.
    Packet(PacketArgs),
    /// The summands of u(a,b) x pi(E).
    Decompose0(Induction),
    /// The highest derivative of pi of one kind.
    Derive(DeriveArgs),
    /// Check an extended multi-segment against its defining conditions.
    Validate(ValidateArgs),
    /// Replay a directory of recorded invocations, or a bundled corpus by name.
    Corpus { path: String },
}

#[derive(Args, Debug)]
struct Labels {
    /// A cuspidal label `{id:rho,dim:1,parity:0}`; repeat for several labels.
    #[arg(long = "rho")]
    rho: Vec<String>,
    #[arg(long, value_enum, default_value_t = Group::Sp)]
    group: Group,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Group {
    Sp,
    SoOdd,
}

#[derive(Args, Debug)]
struct Induction {
    #[command(flatten)]
    labels: Labels,
    #[arg(long)]
    a: u32,
    #[arg(long)]
    b: u32,
    /// `L(...)`, `pi(...)` or an extended multi-segment `{...}`; `@path` reads a file.
    #[arg(long = "pi", alias = "E", allow_hyphen_values = true)]
    pi: String,
}

#[derive(Args, Debug)]
struct Shifted {
    #[command(flatten)]
    induction: Induction,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    s: HalfInt,
}

#[derive(Args, Debug)]
struct PacketArgs {
    #[command(flatten)]
    labels: Labels,
    /// `(a,b) + (a,b)@id + ...`, or an extended multi-segment whose parameter is used.
    #[arg(long, alias = "E")]
    psi: String,
}

#[derive(Args, Debug)]
struct DeriveArgs {
    #[command(flatten)]
    labels: Labels,
    #[arg(long = "pi", alias = "E")]
    pi: String,
    /// `x` for the cuspidal derivative at rho|.|^x, or `delta` for Delta[0,-1], `z` for Z[0,1].
    #[arg(long, allow_hyphen_values = true)]
    kind: String,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    labels: Labels,
    #[arg(long = "E", alias = "pi")]
    e: String,
}

/// An invocation that ran but found its input invalid. `output` still goes
/// to standard output.
#[derive(Debug)]
struct Rejected {
    output: String,
    reason: String,
}

impl Rejected {
    fn new(reason: impl Into<String>) -> Self {
        Rejected { output: String::new(), reason: reason.into() }
    }
}

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.reason)
    }
}

impl std::error::Error for Rejected {}

/// Runs one invocation, writing results to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            if let Some(r) = e.downcast_ref::<Rejected>() {
                let _ = out.write_all(r.output.as_bytes());
            }
            if let Some(c) = e.downcast_ref::<CorpusFailed>() {
                let _ = out.write_all(c.output.as_bytes());
            }
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<Rejected>().is_some() {
        return EXIT_INVALID;
    }
    match e.downcast_ref::<socle::Error>() {
        Some(socle::Error::Parse(_)) => EXIT_PARSE,
        Some(_) => EXIT_INVALID,
        None if e.downcast_ref::<std::io::Error>().is_some() => EXIT_PARSE,
        None => EXIT_FAILED,
    }
}

fn execute(cli: &Cli) -> anyhow::Result<String> {
    match &cli.command {
        Command::Socle(args) => {
            let problem = problem(&args.induction, args.s)?;
            let r = socle(&problem)?;
            if cli.json {
                return json(&r);
            }
            let mut text = lines(&r.summands);
            if cli.trace {
                push_trace(&mut text, r.trace.as_ref());
            }
            Ok(text)
        }
        Command::Irred(args) => {
            let problem = problem(&args.induction, args.s)?;
            let irreducible = is_irreducible(&problem)?;
            if cli.json {
                #[derive(Serialize)]
                struct Out {
                    s: HalfInt,
                    irreducible: bool,
                }
                return json(&Out { s: args.s, irreducible });
            }
            Ok(format!("{}\n", if irreducible { "irreducible" } else { "reducible" }))
        }
        Command::Frp(args) => {
            let s0 = first_reducible_point(&problem(args, HalfInt::ZERO)?)?;
            if cli.json {
                #[derive(Serialize)]
                struct Out {
                    first_reducible_point: Option<HalfInt>,
                }
                return json(&Out { first_reducible_point: s0 });
            }
            Ok(match s0 {
                Some(s) => format!("{s}\n"),
                None => "none\n".into(),
            })
        }
        Command::Packet(args) => {
            let labels = labels(&args.labels)?;
            let text = read_arg(&args.psi)?;
            let psi = if text.trim_start().starts_with('(') {
                AParameter::parse(&text, args.labels.group.into(), &labels)?
            } else {
                ExtendedMultiSegment::parse(&text, args.labels.group.into(), &labels)?.psi()?
            };
            let members = packet_of(&psi)?;
            if cli.json {
                return json(&members);
            }
            Ok(member_lines(&members))
        }
        Command::Decompose0(args) => {
            let labels = labels(&args.labels)?;
            let e = ExtendedMultiSegment::parse(&read_arg(&args.pi)?, args.labels.group.into(), &labels)?;
            let u = SpehShape::new(shape_label(&labels), args.a, args.b, HalfInt::ZERO)?;
            let d = decompose_unitary(&u, &e)?;
            if cli.json {
                return json(&d);
            }
            Ok(match d {
                UnitaryDecomposition::BadParity => "irreducible (bad parity)\n".into(),
                UnitaryDecomposition::Summands { summands } => member_lines(&summands),
            })
        }
        Command::Derive(args) => {
            let labels = labels(&args.labels)?;
            let pi = datum(&read_arg(&args.pi)?, args.labels.group.into(), &labels)?;
            let kind = derivative_kind(&args.kind, &shape_label(&labels))?;
            let (result, k) = d_max(&pi, &kind)?;
            let trace = DerivativeTrace { steps: vec![TraceStep { kind, k }] };
            if cli.json {
                #[derive(Serialize)]
                struct Out {
                    result: ClDatum,
                    k: u32,
                    trace: DerivativeTrace,
                }
                return json(&Out { result, k, trace });
            }
            let mut text = format!("{result}\n");
            push_trace(&mut text, Some(&trace));
            Ok(text)
        }
        Command::Validate(args) => {
            let labels = labels(&args.labels)?;
            let blocks = ExtendedMultiSegment::parse_blocks(&read_arg(&args.e)?, &labels)?;
            let kind: GroupKind = args.labels.group.into();
            // a parameter of the wrong dimension still gets its other clauses checked
            let e = ExtendedMultiSegment::with_kind(blocks.clone(), kind)
                .unwrap_or_else(|_| ExtendedMultiSegment::new(blocks, GroupType { kind, rank: 0 }));
            let diagnostics = validate(&e);
            let text = if cli.json {
                json(&diagnostics)?
            } else if diagnostics.is_empty() {
                "valid\n".into()
            } else {
                diagnostics.iter().map(|d| format!("{d}\n")).collect()
            };
            if let Some(first) = diagnostics.first() {
                bail!(Rejected { output: text, reason: format!("violates the {} clause", first.clause) });
            }
            Ok(text)
        }
        Command::Corpus { path } => {
            let report = run_corpus(path)?;
            let text = report.to_string();
            if report.failed() > 0 {
                bail!(CorpusFailed { output: text, failed: report.failed() });
            }
            Ok(text)
        }
    }
}

#[derive(Debug)]
struct CorpusFailed {
    output: String,
    failed: usize,
}

impl std::fmt::Display for CorpusFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} corpus case(s) failed", self.failed)
    }
}

impl std::error::Error for CorpusFailed {}

impl From<Group> for GroupKind {
    fn from(g: Group) -> Self {
        match g {
            Group::Sp => GroupKind::Sp,
            Group::SoOdd => GroupKind::SoOdd,
        }
    }
}

fn read_arg(value: &str) -> anyhow::Result<String> {
    match value.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}")),
        None => Ok(value.to_string()),
    }
}

/// Parses `{id:rho,dim:1,parity:0}`; quotes around keys and values are ignored.
fn parse_label(text: &str) -> socle::Result<CuspidalLabel> {
    let bad = |why: &str| socle::Error::Parse(format!("{why} in cuspidal label {text:?}"));
    let body = text.trim().strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(|| bad("missing braces"))?;
    let (mut id, mut dim, mut parity) = (None, None, None);
    for field in body.split(',').filter(|f| !f.trim().is_empty()) {
        let (key, value) = field.split_once(':').ok_or_else(|| bad("expected key:value"))?;
        let unquote = |s: &str| s.trim().trim_matches('"').to_string();
        let value = unquote(value);
        match unquote(key).as_str() {
            "id" => id = Some(value),
            "dim" => dim = Some(value.parse::<u32>().map_err(|_| bad("bad dim"))?),
            "parity" | "parity_class" => parity = Some(value.parse::<u8>().map_err(|_| bad("bad parity"))?),
            other => return Err(bad(&format!("unknown key {other:?}"))),
        }
    }
    match (id, dim, parity) {
        (Some(id), Some(dim), Some(parity)) if dim > 0 && parity < 2 => Ok(CuspidalLabel::new(id, dim, parity)),
        _ => Err(bad("need id, dim >= 1 and parity 0 or 1")),
    }
}

fn labels(args: &Labels) -> anyhow::Result<Vec<CuspidalLabel>> {
    if args.rho.is_empty() {
        return Ok(vec![CuspidalLabel::trivial()]);
    }
    Ok(args.rho.iter().map(|t| parse_label(t)).collect::<socle::Result<_>>()?)
}

/// The Speh representation is built on the first label given.
fn shape_label(labels: &[CuspidalLabel]) -> CuspidalLabel {
    labels[0].clone()
}

fn is_datum(text: &str) -> bool {
    let t = text.trim_start();
    t.starts_with("L(") || t.starts_with("pi(")
}

fn datum(text: &str, kind: GroupKind, labels: &[CuspidalLabel]) -> anyhow::Result<ClDatum> {
    if is_datum(text) {
        return Ok(ClDatum::parse(text, labels)?);
    }
    let e = ExtendedMultiSegment::parse(text, kind, labels)?;
    build_pi(&e)?.ok_or_else(|| anyhow!(Rejected::new(format!("pi({e}) vanishes"))))
}

fn problem(args: &Induction, s: HalfInt) -> anyhow::Result<InductionProblem> {
    let labels = labels(&args.labels)?;
    let u = SpehShape::new(shape_label(&labels), args.a, args.b, s)?;
    let text = read_arg(&args.pi)?;
    if is_datum(&text) {
        return Ok(InductionProblem::from_datum(u, ClDatum::parse(&text, &labels)?));
    }
    let e = ExtendedMultiSegment::parse(&text, args.labels.group.into(), &labels)?;
    Ok(InductionProblem::new(u, e)?)
}

fn derivative_kind(text: &str, rho: &CuspidalLabel) -> anyhow::Result<DerivativeKind> {
    Ok(match text.trim() {
        "delta" => DerivativeKind::DeltaZeroMinusOne { rho: rho.clone() },
        "z" => DerivativeKind::ZZeroOne { rho: rho.clone() },
        x => DerivativeKind::cuspidal(rho, x.parse()?)?,
    })
}

fn lines(data: &[ClDatum]) -> String {
    data.iter().map(|d| format!("{d}\n")).collect()
}

fn member_lines(members: &[Member]) -> String {
    members.iter().map(|m| format!("{} : {}\n", m.e, m.pi)).collect()
}

fn push_trace(text: &mut String, trace: Option<&DerivativeTrace>) {
    match trace {
        Some(t) if !t.steps.is_empty() => {
            let _ = writeln!(text, "trace: {t}");
        }
        _ => text.push_str("trace: none\n"),
    }
}

fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Splits a recorded command line into arguments, honouring shell quoting.
pub fn split_command_line(line: &str) -> anyhow::Result<Vec<String>> {
    shlex::split(line).ok_or_else(|| anyhow!("unbalanced quotes in {line:?}"))
}

/// Runs a recorded command line as if it had been typed after the program name.
pub fn run_line(line: &str) -> anyhow::Result<(i32, String, String)> {
    let mut argv = vec!["socle".to_string()];
    argv.extend(split_command_line(line)?);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    Ok((code, String::from_utf8(out)?, String::from_utf8(err)?))
}
