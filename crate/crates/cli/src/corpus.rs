//! Golden-file corpora: a directory of `NAME.cmd` files, each holding one
//! command line, paired with `NAME.expected` files holding its exact output.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::thread;

use include_dir::{include_dir, Dir};

use crate::{run_line, EXIT_OK};

static BUNDLED: Dir<'_> = include_dir!("$CARGO_MANIFEST_DIR/corpus");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub name: String,
    pub command: String,
    pub expected: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail { code: i32, stdout: String, stderr: String },
}

#[derive(Clone, Debug, Default)]
pub struct CorpusReport {
    pub results: Vec<(String, Outcome)>,
}

impl CorpusReport {
    pub fn passed(&self) -> usize {
        self.results.iter().filter(|(_, o)| *o == Outcome::Pass).count()
    }

    pub fn failed(&self) -> usize {
        self.results.len() - self.passed()
    }
}

impl fmt::Display for CorpusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, outcome) in &self.results {
            match outcome {
                Outcome::Pass => writeln!(f, "PASS {name}")?,
                Outcome::Fail { code, stdout, stderr } => {
                    writeln!(f, "FAIL {name} (exit {code})")?;
                    for line in stdout.lines().chain(stderr.lines()) {
                        writeln!(f, "  | {line}")?;
                    }
                }
            }
        }
        writeln!(f, "{} passed, {} failed", self.passed(), self.failed())
    }
}

/// The command line is the first line that is neither blank nor a `#` comment.
fn command_of(text: &str) -> Option<String> {
    text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).map(String::from)
}

fn normalize(text: &str) -> String {
    text.replace("\r\n", "\n")
}

fn pair_up(files: BTreeMap<String, (Option<String>, Option<String>)>, origin: &str) -> io::Result<Vec<Case>> {
    let corrupt = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    files
        .into_iter()
        .map(|(name, pair)| match pair {
            (Some(cmd), Some(expected)) => {
                let command = command_of(&cmd).ok_or_else(|| corrupt(format!("{origin}/{name}.cmd holds no command")))?;
                Ok(Case { name, command, expected: normalize(&expected) })
            }
            (Some(_), None) => Err(corrupt(format!("{origin}/{name}.cmd has no matching .expected file"))),
            (None, _) => Err(corrupt(format!("{origin}/{name}.expected has no matching .cmd file"))),
        })
        .collect()
}

fn slot<'a>(
    files: &'a mut BTreeMap<String, (Option<String>, Option<String>)>,
    file_name: &str,
) -> Option<&'a mut Option<String>> {
    if let Some(stem) = file_name.strip_suffix(".cmd") {
        Some(&mut files.entry(stem.to_string()).or_default().0)
    } else if let Some(stem) = file_name.strip_suffix(".expected") {
        Some(&mut files.entry(stem.to_string()).or_default().1)
    } else {
        None
    }
}

/// Reads the cases of a corpus directory, sorted by name. Other files are ignored.
pub fn load_corpus(dir: &Path) -> io::Result<Vec<Case>> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(file_name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(slot) = slot(&mut files, file_name) {
            *slot = Some(fs::read_to_string(&path)?);
        }
    }
    pair_up(files, &dir.display().to_string())
}

/// The cases of a corpus shipped inside the binary, if one has this name.
pub fn bundled_corpus(name: &str) -> Option<io::Result<Vec<Case>>> {
    let dir = BUNDLED.get_dir(name)?;
    let mut files = BTreeMap::new();
    for file in dir.files() {
        let Some(file_name) = file.path().file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(slot) = slot(&mut files, file_name) {
            *slot = file.contents_utf8().map(String::from);
        }
    }
    Some(pair_up(files, name))
}

fn run_case(case: &Case) -> Outcome {
    match run_line(&case.command) {
        Ok((EXIT_OK, stdout, _)) if stdout == case.expected => Outcome::Pass,
        Ok((code, stdout, stderr)) => Outcome::Fail { code, stdout, stderr },
        Err(e) => Outcome::Fail { code: -1, stdout: String::new(), stderr: e.to_string() },
    }
}

/// Runs the cases on a few worker threads; the report keeps the input order.
pub fn run_cases(cases: &[Case]) -> CorpusReport {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(cases.len().max(1));
    let chunk = cases.len().div_ceil(workers).max(1);
    let outcomes: Vec<Outcome> = thread::scope(|scope| {
        let handles: Vec<_> =
            cases.chunks(chunk).map(|part| scope.spawn(move || part.iter().map(run_case).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("corpus worker panicked")).collect()
    });
    CorpusReport { results: cases.iter().map(|c| c.name.clone()).zip(outcomes).collect() }
}

/// Runs a corpus given as a directory path or as the name of a bundled corpus.
pub fn run_corpus(path_or_name: &str) -> io::Result<CorpusReport> {
    let path = Path::new(path_or_name);
    let cases = if path.is_dir() {
        load_corpus(path)?
    } else {
        bundled_corpus(path_or_name).ok_or_else(|| {
            io::Error::new(io::ErrorKind::NotFound, format!("no corpus directory or bundled corpus named {path_or_name:?}"))
        })??
    };
    Ok(run_cases(&cases))
}
