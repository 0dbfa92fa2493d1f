//! Command-line front end. Every command prints exactly one line of compact
//! JSON on stdout; diagnostics go to stderr. Output is byte-deterministic:
//! response structs serialize in declaration order and nothing depends on
//! hash iteration or locale.
//!
//! Exit codes: 0 success, 1 negative verdict (inequivalent signatures, a
//! failed probe), 2 usage or input errors, 3 resource caps.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::clone::{generate_clone_fragment, variety_rank_estimate, CloneError, RankEstimate};
use crate::finalg::{AlgebraError, Assignment, EvalError, FiniteAlgebra};
use crate::functor_probe::{
    all_endos_mono, every_epi_has_section, free_rank1_constants_only, ProbeError,
};
use crate::recovery::{recover_type_with_budget, RecoveryError, DEFAULT_FRAGMENT_BUDGET};
use crate::signature::Signature;
use crate::term::{Basis, ParseError, Term, TermError, DEFAULT_TERM_CAP};

#[derive(Parser)]
#[command(
    name = "ualg",
    version,
    about = "Finite universal algebra: signatures, term algebras, clones, and type recovery",
    color = clap::ColorChoice::Never
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two signatures have the same arity multiset
    Equiv {
        /// Signature file (JSON)
        #[arg(long)]
        left: PathBuf,
        /// Signature file (JSON)
        #[arg(long)]
        right: PathBuf,
    },
    /// Recover a signature's arity multiset from free-algebra fragments
    Recover {
        /// Signature file (JSON)
        #[arg(long)]
        sig: PathBuf,
        /// Fragment depth (at least 1)
        #[arg(long)]
        depth: usize,
        /// Fragment size budget
        #[arg(long, default_value_t = DEFAULT_FRAGMENT_BUDGET)]
        max_terms: usize,
    },
    /// Estimate how many free algebras generate the variety
    Rank {
        /// Signature file (JSON)
        #[arg(long)]
        sig: PathBuf,
    },
    /// Minimal support and essential rank of a term operation
    Support {
        /// Algebra file (JSON)
        #[arg(long)]
        alg: PathBuf,
        /// Term over the algebra's signature, e.g. "(f x0 x1)"
        #[arg(long)]
        term: String,
        /// Number of variables the term operation ranges over
        #[arg(long)]
        basis: usize,
    },
    /// Distinct term operations of an algebra up to a depth
    Clone {
        /// Algebra file (JSON)
        #[arg(long)]
        alg: PathBuf,
        /// Number of variables
        #[arg(long)]
        basis: usize,
        /// Term depth bound
        #[arg(long)]
        depth: usize,
        /// Term enumeration budget
        #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
        max_terms: usize,
    },
    /// Count homomorphisms between two algebras
    Homs {
        /// Domain algebra file (JSON)
        #[arg(long)]
        from: PathBuf,
        /// Codomain algebra file (JSON)
        #[arg(long)]
        to: PathBuf,
        /// Also list the maps
        #[arg(long)]
        list: bool,
    },
    /// Probe the rank-1 free algebra of a constants-only signature
    ProbeFree {
        /// Signature file (JSON), constants only
        #[arg(long)]
        sig: PathBuf,
        /// Directory of algebra files to draw surjections from
        #[arg(long)]
        pool: PathBuf,
    },
    /// Evaluate a term in an algebra under an assignment
    Eval {
        /// Algebra file (JSON)
        #[arg(long)]
        alg: PathBuf,
        /// Term over the algebra's signature
        #[arg(long)]
        term: String,
        /// Variable bindings, e.g. "x0=1,x1=0"
        #[arg(long, default_value = "")]
        assign: String,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
    #[error("term: {0}")]
    TermSyntax(#[from] ParseError),
    #[error("term: {0}")]
    Term(#[from] TermError),
    #[error("assignment: {0}")]
    Assignment(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Clone(#[from] CloneError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Recovery(RecoveryError::CapExceeded(_)) => 3,
            CliError::Term(TermError::CapExceeded(_)) => 3,
            CliError::Clone(CloneError::Enumeration(TermError::CapExceeded(_))) => 3,
            CliError::Clone(CloneError::TableTooLarge { .. }) => 3,
            _ => 2,
        }
    }
}

/// Outcome of one invocation, separated from the process boundary so tests
/// can assert on it directly.
pub struct CommandResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let rendered = err.render().to_string();
            return if err.use_stderr() {
                CommandResult { code: 2, stdout: String::new(), stderr: rendered }
            } else {
                // --help and --version are successful exits
                CommandResult { code: 0, stdout: rendered, stderr: String::new() }
            };
        }
    };
    match dispatch(cli.command) {
        Ok((json, verdict)) => CommandResult {
            code: if verdict { 0 } else { 1 },
            stdout: json + "\n",
            stderr: String::new(),
        },
        Err(err) => CommandResult {
            code: err.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
        },
    }
}

#[derive(Serialize)]
struct EquivOut {
    equivalent: bool,
}

#[derive(Serialize)]
struct ClassOut {
    size: usize,
    rank: usize,
}

#[derive(Serialize)]
struct RecoverOut {
    arities: Vec<usize>,
    basis: usize,
    depth: usize,
    classes: Vec<ClassOut>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum RankValue {
    Finite(usize),
    Infinite(&'static str),
}

#[derive(Serialize)]
struct RankOut {
    rank: RankValue,
}

#[derive(Serialize)]
struct SupportOut {
    minimal_support: Vec<usize>,
    essential_rank: usize,
}

#[derive(Serialize)]
struct CloneOpOut {
    term: String,
    values: Vec<usize>,
}

#[derive(Serialize)]
struct CloneOut {
    basis: usize,
    depth: usize,
    count: usize,
    operations: Vec<CloneOpOut>,
}

#[derive(Serialize)]
struct HomsOut {
    count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    homs: Option<Vec<Vec<usize>>>,
}

#[derive(Serialize)]
#[serde(tag = "kind")]
enum WitnessOut {
    #[serde(rename = "unsectioned-epi")]
    UnsectionedEpi { pool: String, map: Vec<usize> },
    #[serde(rename = "non-injective-endo")]
    NonInjectiveEndo { map: Vec<usize> },
}

#[derive(Serialize)]
struct ProbeOut {
    epi_section: bool,
    endos_mono: bool,
    witness: Option<WitnessOut>,
}

#[derive(Serialize)]
struct EvalOut {
    value: usize,
}

fn dispatch(command: Command) -> Result<(String, bool), CliError> {
    match command {
        Command::Equiv { left, right } => {
            let l = load_signature(&left)?;
            let r = load_signature(&right)?;
            let equivalent = l.is_equivalent_to(&r);
            Ok((to_json(&EquivOut { equivalent }), equivalent))
        }
        Command::Recover { sig, depth, max_terms } => {
            let s = load_signature(&sig)?;
            let recovered = recover_type_with_budget(&s, depth, max_terms)?;
            let out = RecoverOut {
                arities: recovered.arities().to_vec(),
                basis: recovered.basis(),
                depth: recovered.depth(),
                classes: recovered
                    .classes()
                    .iter()
                    .map(|c| ClassOut { size: c.size, rank: c.rank })
                    .collect(),
            };
            Ok((to_json(&out), true))
        }
        Command::Rank { sig } => {
            let s = load_signature(&sig)?;
            let rank = match variety_rank_estimate(&s) {
                RankEstimate::Finite(n) => RankValue::Finite(n),
                RankEstimate::CountablyInfinite => RankValue::Infinite("countably-infinite"),
            };
            Ok((to_json(&RankOut { rank }), true))
        }
        Command::Support { alg, term, basis } => {
            let a = load_algebra(&alg)?;
            let t = Term::parse(&term, a.signature())?;
            let table = a.term_operation_table(&t, Basis::new(basis))?;
            let out = SupportOut {
                minimal_support: table.minimal_support().into_iter().collect(),
                essential_rank: table.essential_rank(),
            };
            Ok((to_json(&out), true))
        }
        Command::Clone { alg, basis, depth, max_terms } => {
            let a = load_algebra(&alg)?;
            let fragment = generate_clone_fragment(&a, Basis::new(basis), depth, max_terms)?;
            let operations: Vec<CloneOpOut> = fragment
                .entries()
                .iter()
                .map(|e| CloneOpOut {
                    term: e.term.display(a.signature()).to_string(),
                    values: e.table.values().to_vec(),
                })
                .collect();
            let out = CloneOut {
                basis,
                depth,
                count: operations.len(),
                operations,
            };
            Ok((to_json(&out), true))
        }
        Command::Homs { from, to, list } => {
            let a = load_algebra(&from)?;
            let b = load_algebra(&to)?;
            let maps: Vec<Vec<usize>> = a.homomorphisms_to(&b)?.collect();
            let out = HomsOut {
                count: maps.len(),
                homs: list.then_some(maps),
            };
            Ok((to_json(&out), true))
        }
        Command::ProbeFree { sig, pool } => {
            let s = load_signature(&sig)?;
            let free = free_rank1_constants_only(&s)?;
            let named_pool = load_pool(&pool)?;
            let algebras: Vec<FiniteAlgebra> =
                named_pool.iter().map(|(_, a)| a.clone()).collect();
            let epi = every_epi_has_section(&free, &algebras)?;
            let endo = all_endos_mono(&free);
            let witness = match (&epi.witness, &endo.witness) {
                (Some(w), _) => Some(WitnessOut::UnsectionedEpi {
                    pool: named_pool[w.pool_index].0.clone(),
                    map: w.map.clone(),
                }),
                (None, Some(map)) => Some(WitnessOut::NonInjectiveEndo { map: map.clone() }),
                (None, None) => None,
            };
            let verdict = epi.holds && endo.holds;
            let out = ProbeOut {
                epi_section: epi.holds,
                endos_mono: endo.holds,
                witness,
            };
            Ok((to_json(&out), verdict))
        }
        Command::Eval { alg, term, assign } => {
            let a = load_algebra(&alg)?;
            let t = Term::parse(&term, a.signature())?;
            let assignment = parse_assignment(&assign, &t.vars())?;
            let value = a.evaluate(&t, &assignment)?;
            Ok((to_json(&EvalOut { value }), true))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("response structs always serialize")
}

fn load_signature(path: &Path) -> Result<Signature, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Malformed {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_algebra(path: &Path) -> Result<FiniteAlgebra, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Malformed {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Pool algebras in file-name order, so witness reports are stable across
/// platforms and directory layouts.
fn load_pool(dir: &Path) -> Result<Vec<(String, FiniteAlgebra)>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        let path = entry.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort_by_key(|p| p.file_name().map(|n| n.to_owned()));
    files
        .into_iter()
        .map(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, load_algebra(&p)?))
        })
        .collect()
}

/// Parses "x0=1,x1=0" into a dense assignment. Every variable the term
/// uses must be bound; slots for unused indices are filled with 0 and never
/// read during evaluation.
fn parse_assignment(spec: &str, needed: &BTreeSet<usize>) -> Result<Assignment, CliError> {
    let mut bound: BTreeMap<usize, usize> = BTreeMap::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (var, val) = part
            .split_once('=')
            .ok_or_else(|| CliError::Assignment(format!("expected x<i>=<v>, got {part:?}")))?;
        let index: usize = var
            .trim()
            .strip_prefix('x')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| CliError::Assignment(format!("bad variable {:?}", var.trim())))?;
        let value: usize = val
            .trim()
            .parse()
            .map_err(|_| CliError::Assignment(format!("bad value {:?}", val.trim())))?;
        if bound.insert(index, value).is_some() {
            return Err(CliError::Assignment(format!("x{index} bound twice")));
        }
    }
    if let Some(&missing) = needed.iter().find(|v| !bound.contains_key(v)) {
        return Err(CliError::Assignment(format!("x{missing} is not bound")));
    }
    let len = bound.keys().next_back().map_or(0, |&m| m + 1);
    Ok(Assignment::new(
        (0..len).map(|i| bound.get(&i).copied().unwrap_or(0)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn invoke(args: &[&str]) -> CommandResult {
        run(std::iter::once("ualg").chain(args.iter().copied()))
    }

    fn write(dir: &Path, name: &str, content: &str) -> String {
        let path = dir.join(name);
        fs::write(&path, content).unwrap();
        path.display().to_string()
    }

    const XOR: &str = r#"{"signature":{"symbols":[{"name":"f","arity":2}]},"carrier":2,"tables":{"f":[0,1,1,0]}}"#;
    const FGC: &str = r#"{"symbols":[{"name":"f","arity":2},{"name":"g","arity":1},{"name":"c","arity":0}]}"#;

    #[test]
    fn equiv_verdicts_and_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.sig", FGC);
        let b = write(
            dir.path(),
            "b.sig",
            r#"{"symbols":[{"name":"m","arity":2},{"name":"inv","arity":1},{"name":"e","arity":0}]}"#,
        );
        let c = write(dir.path(), "c.sig", r#"{"symbols":[{"name":"f","arity":2}]}"#);

        let res = invoke(&["equiv", "--left", &a, "--right", &b]);
        assert_eq!(res.code, 0);
        assert_eq!(res.stdout, "{\"equivalent\":true}\n");

        let res = invoke(&["equiv", "--left", &a, "--right", &c]);
        assert_eq!(res.code, 1);
        assert_eq!(res.stdout, "{\"equivalent\":false}\n");
    }

    #[test]
    fn recover_reports_class_evidence() {
        let dir = tempfile::tempdir().unwrap();
        let sig = write(dir.path(), "fgc.sig", FGC);
        let res = invoke(&["recover", "--sig", &sig, "--depth", "2"]);
        assert_eq!(res.code, 0, "stderr: {}", res.stderr);
        assert_eq!(
            res.stdout,
            "{\"arities\":[0,1,2],\"basis\":4,\"depth\":2,\"classes\":[{\"size\":1,\"rank\":0},{\"size\":1225,\"rank\":2},{\"size\":35,\"rank\":1}]}\n"
        );
    }

    #[test]
    fn rank_is_symbolic_for_arity_two_and_finite_below() {
        let dir = tempfile::tempdir().unwrap();
        let fgc = write(dir.path(), "fgc.sig", FGC);
        let consts = write(
            dir.path(),
            "cd.sig",
            r#"{"symbols":[{"name":"c","arity":0},{"name":"d","arity":0}]}"#,
        );
        let unary = write(
            dir.path(),
            "gc.sig",
            r#"{"symbols":[{"name":"g","arity":1},{"name":"c","arity":0}]}"#,
        );

        let res = invoke(&["rank", "--sig", &fgc]);
        assert_eq!(res.stdout, "{\"rank\":\"countably-infinite\"}\n");
        let res = invoke(&["rank", "--sig", &consts]);
        assert_eq!(res.stdout, "{\"rank\":0}\n");
        let res = invoke(&["rank", "--sig", &unary]);
        assert_eq!(res.stdout, "{\"rank\":1}\n");
    }

    #[test]
    fn support_of_xor_uses_both_coordinates() {
        let dir = tempfile::tempdir().unwrap();
        let alg = write(dir.path(), "xor.json", XOR);
        let res = invoke(&[
            "support", "--alg", &alg, "--term", "(f x0 x1)", "--basis", "2",
        ]);
        assert_eq!(res.code, 0, "stderr: {}", res.stderr);
        assert_eq!(
            res.stdout,
            "{\"minimal_support\":[0,1],\"essential_rank\":2}\n"
        );
    }

    #[test]
    fn clone_of_xor_has_four_operations() {
        let dir = tempfile::tempdir().unwrap();
        let alg = write(dir.path(), "xor.json", XOR);
        let res = invoke(&[
            "clone", "--alg", &alg, "--basis", "2", "--depth", "2",
        ]);
        assert_eq!(res.code, 0, "stderr: {}", res.stderr);
        assert_eq!(
            res.stdout,
            "{\"basis\":2,\"depth\":2,\"count\":4,\"operations\":[{\"term\":\"x0\",\"values\":[0,0,1,1]},{\"term\":\"x1\",\"values\":[0,1,0,1]},{\"term\":\"(f x0 x0)\",\"values\":[0,0,0,0]},{\"term\":\"(f x0 x1)\",\"values\":[0,1,1,0]}]}\n"
        );
    }

    #[test]
    fn homs_counts_and_lists() {
        let dir = tempfile::tempdir().unwrap();
        let alg = write(dir.path(), "xor.json", XOR);
        let res = invoke(&["homs", "--from", &alg, "--to", &alg]);
        assert_eq!(res.stdout, "{\"count\":2}\n");
        let res = invoke(&["homs", "--from", &alg, "--to", &alg, "--list"]);
        assert_eq!(res.stdout, "{\"count\":2,\"homs\":[[0,0],[0,1]]}\n");
    }

    #[test]
    fn probe_free_reports_generator_collapse() {
        let dir = tempfile::tempdir().unwrap();
        let sig = write(dir.path(), "c.sig", r#"{"symbols":[{"name":"c","arity":0}]}"#);
        let pool = dir.path().join("pool");
        fs::create_dir(&pool).unwrap();
        write(
            &pool,
            "c3.json",
            r#"{"signature":{"symbols":[{"name":"c","arity":0}]},"carrier":3,"tables":{"c":[0]}}"#,
        );
        let res = invoke(&["probe-free", "--sig", &sig, "--pool", pool.to_str().unwrap()]);
        assert_eq!(res.code, 1);
        assert_eq!(
            res.stdout,
            "{\"epi_section\":true,\"endos_mono\":false,\"witness\":{\"kind\":\"non-injective-endo\",\"map\":[0,0]}}\n"
        );
    }

    #[test]
    fn probe_free_epi_witness_takes_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let sig = write(dir.path(), "g.sig", r#"{"symbols":[{"name":"g","arity":1}]}"#);
        let res = invoke(&["probe-free", "--sig", &sig, "--pool", "."]);
        // non-constant symbol: the rank-1 free algebra is infinite
        assert_eq!(res.code, 2);
        assert!(res.stderr.contains("arity 1"));
    }

    #[test]
    fn eval_composes_tables() {
        let dir = tempfile::tempdir().unwrap();
        let alg = write(dir.path(), "xor.json", XOR);
        let res = invoke(&[
            "eval", "--alg", &alg, "--term", "(f x0 (f x0 x1))", "--assign", "x0=1,x1=0",
        ]);
        assert_eq!(res.code, 0, "stderr: {}", res.stderr);
        assert_eq!(res.stdout, "{\"value\":0}\n");
    }

    #[test]
    fn usage_and_input_errors_exit_two() {
        let res = invoke(&["equiv", "--left", "/nonexistent.sig", "--right", "/x.sig"]);
        assert_eq!(res.code, 2);
        assert!(res.stderr.starts_with("error: /nonexistent.sig"));

        let res = invoke(&["frobnicate"]);
        assert_eq!(res.code, 2);
        assert!(res.stdout.is_empty());

        let dir = tempfile::tempdir().unwrap();
        let bad = write(dir.path(), "bad.sig", "{not json");
        let res = invoke(&["rank", "--sig", &bad]);
        assert_eq!(res.code, 2);

        let dup = write(
            dir.path(),
            "dup.sig",
            r#"{"symbols":[{"name":"f","arity":2},{"name":"f","arity":1}]}"#,
        );
        let res = invoke(&["rank", "--sig", &dup]);
        assert_eq!(res.code, 2);
        assert!(res.stderr.contains("duplicate"));

        let alg = write(dir.path(), "xor.json", XOR);
        let res = invoke(&["eval", "--alg", &alg, "--term", "(f x0)", "--assign", "x0=0"]);
        assert_eq!(res.code, 2);

        let res = invoke(&["eval", "--alg", &alg, "--term", "(f x0 x1)", "--assign", "x0=1"]);
        assert_eq!(res.code, 2);
        assert!(res.stderr.contains("x1 is not bound"));
    }

    #[test]
    fn resource_caps_exit_three() {
        let dir = tempfile::tempdir().unwrap();
        let sig = write(dir.path(), "t.sig", r#"{"symbols":[{"name":"t","arity":3}]}"#);
        let res = invoke(&["recover", "--sig", &sig, "--depth", "2", "--max-terms", "2"]);
        assert_eq!(res.code, 3);

        let alg = write(dir.path(), "xor.json", XOR);
        let res = invoke(&[
            "clone", "--alg", &alg, "--basis", "2", "--depth", "3", "--max-terms", "5",
        ]);
        assert_eq!(res.code, 3);
    }

    #[test]
    fn help_is_a_successful_exit() {
        let res = invoke(&["--help"]);
        assert_eq!(res.code, 0);
        assert!(res.stdout.contains("Usage"));
        assert!(res.stderr.is_empty());
    }

    #[test]
    fn assignment_parsing_edge_cases() {
        let vars: BTreeSet<usize> = [0].into();
        assert!(parse_assignment("x0=1, x0=2", &vars).is_err());
        assert!(parse_assignment("y0=1", &vars).is_err());
        assert!(parse_assignment("x0", &vars).is_err());
        assert!(parse_assignment("", &BTreeSet::new()).is_ok());
        let a = parse_assignment("x2=5", &[2usize].into()).unwrap();
        assert_eq!(a.get(2), Some(5));
    }
}
