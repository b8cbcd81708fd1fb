//! Command-line front end. `run` parses arguments, loads the input, runs one
//! command and writes the JSON report to `out`, diagnostics to `err`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the report
//! carries the counterexample), 2 on input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use stable_lift::corpus::{exhaustive_digraphs, random_structures, RandomSpec};
use stable_lift::interp::Mutation;
use stable_lift::lift::{lift, LiftConfig, LiftedStructure, Padding};
use stable_lift::report::{AutReport, FullReport, IsoReport, LiftReport, LimitReport, SchemeCheckReport};
use stable_lift::stability::stability_report;
use stable_lift::structure::{Structure, SubsetOfDomain};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "stable-lift", version, about = "Stabilized lifts of finite relational structures")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Largest accepted |M|; larger inputs are rejected before any work.
    #[arg(long, default_value_t = 6, global = true)]
    max_size: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// JSON report on stdout.
    Json,
    /// One-line summary on stderr, nothing on stdout.
    Summary,
}

#[derive(Debug, Args)]
struct Input {
    /// Structure file in the JSON structure format.
    #[arg(long = "in", value_name = "FILE")]
    path: PathBuf,
}

#[derive(Debug, Args)]
struct LiftArgs {
    #[command(flatten)]
    input: Input,
    /// Copy bound.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Build fibers over tuples with repeated entries too.
    #[arg(long)]
    include_repetitions: bool,
    /// `auto` or `explicit:<p1,p2,…>` in (arity, rank, copy) order.
    #[arg(long, default_value = "auto", value_parser = parse_padding)]
    padding: Padding,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the lift and report its elements, fibers and signature.
    Lift(LiftArgs),
    /// Automorphism group of the input, or of its lift with `--k`.
    Aut {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Check |Aut(M)| = |Aut(N)|, the two maps between them, and continuity
    /// witnesses.
    VerifyIso(LiftArgs),
    /// Generate and validate the interpretation scheme, optionally after a
    /// single-point mutation.
    SchemeCheck {
        #[command(flatten)]
        lift: LiftArgs,
        /// `kind[:index]`, e.g. `negate-relformula:3`.
        #[arg(long, value_parser = parse_mutation)]
        mutate: Option<Mutation>,
    },
    /// Limit elements and the rigidity checks built on them.
    Limit(LiftArgs),
    /// Orbit and type census over copy bounds and parameter sets.
    Census {
        #[command(flatten)]
        input: Input,
        /// Copy bounds, comma separated.
        #[arg(long, default_value = "1,2,3", value_delimiter = ',')]
        ks: Vec<usize>,
        /// A parameter set of P-element ids (`1..=|M|`), comma separated;
        /// repeat for several sets. Defaults to the empty set.
        #[arg(long = "params", value_name = "IDS", value_parser = parse_params)]
        params: Vec<Vec<usize>>,
    },
    /// Every report for one structure.
    Report(LiftArgs),
    /// Write a corpus of structure files.
    Corpus {
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Every repetition-free digraph on 1..=N vertices.
        #[arg(long, value_name = "N", conflicts_with = "random")]
        exhaustive: Option<usize>,
        /// Number of seeded random structures.
        #[arg(long, value_name = "COUNT")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest random domain size.
        #[arg(long, default_value_t = 4)]
        size: usize,
        /// Arities of the random relations, comma separated.
        #[arg(long, default_value = "2", value_delimiter = ',')]
        arities: Vec<usize>,
    },
}

fn parse_padding(text: &str) -> Result<Padding, String> {
    if text == "auto" {
        return Ok(Padding::Auto);
    }
    let list = text
        .strip_prefix("explicit:")
        .ok_or_else(|| format!("expected `auto` or `explicit:<list>`, found `{text}`"))?;
    list.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad padding `{p}`: {e}")))
        .collect::<Result<_, _>>()
        .map(Padding::Explicit)
}

fn parse_mutation(text: &str) -> Result<Mutation, String> {
    text.parse()
}

fn parse_params(text: &str) -> Result<Vec<usize>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad element `{x}`: {e}")))
        .collect()
}

/// Outcome of one command before rendering.
struct Outcome {
    /// The JSON report, rendered in field declaration order.
    report: String,
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new<T: serde::Serialize>(report: &T, passed: bool, summary: String) -> Result<Self, String> {
        Ok(Outcome {
            report: serde_json::to_string_pretty(report).map_err(|e| e.to_string())?,
            passed,
            summary,
        })
    }
}

fn load(path: &Path, max_size: usize) -> Result<Structure, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let m = Structure::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if m.domain() > max_size {
        return Err(format!(
            "{}: |M| = {} exceeds --max-size {max_size}",
            path.display(),
            m.domain()
        ));
    }
    Ok(m)
}

fn lifted(args: &LiftArgs, max_size: usize) -> Result<LiftedStructure, String> {
    let m = load(&args.input.path, max_size)?;
    let cfg = LiftConfig::new(args.k)
        .with_repetitions(args.include_repetitions)
        .with_padding(args.padding.clone());
    lift(&m, &cfg).map_err(|e| e.to_string())
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}

fn execute(cli: &Cli) -> Result<Outcome, String> {
    let max = cli.max_size;
    match &cli.command {
        Command::Lift(args) => {
            let n = lifted(args, max)?;
            let r = LiftReport::new(&n);
            let summary = format!("lift: k={} |N|={} fibers={}", r.k, r.size, n.fibers().len());
            Outcome::new(&r, true, summary)
        }
        Command::Aut { input, k } => {
            let m = load(&input.path, max)?;
            let target = match k {
                Some(k) => lift(&m, &LiftConfig::new(*k)).map_err(|e| e.to_string())?.structure().clone(),
                None => m,
            };
            let r = AutReport::new(&target);
            let summary = format!(
                "aut: degree {} order {} generators {} oracle {}",
                r.degree,
                r.order,
                r.generators.len(),
                r.brute_agrees.map_or("skipped", verdict)
            );
            Outcome::new(&r, r.passed(), summary)
        }
        Command::VerifyIso(args) => {
            let n = lifted(args, max)?;
            let r = IsoReport::new(&n).map_err(|e| e.to_string())?;
            let summary = format!(
                "verify-iso: |Aut M|={} |Aut N|={} bijective={} continuity={}",
                r.order_M,
                r.order_N,
                r.bijective,
                verdict(r.continuity_witnesses == stable_lift::stability::Verdict::Pass)
            );
            Outcome::new(&r, r.passed(), summary)
        }
        Command::SchemeCheck { lift: args, mutate } => {
            let n = lifted(args, max)?;
            let r = SchemeCheckReport::new(&n, *mutate).map_err(|e| e.to_string())?;
            let summary = match r.validation.first_failure() {
                Some(c) => format!("scheme-check: FAIL {:?}: {}", c.condition, c.detail),
                None => format!("scheme-check: pass ({} sorts)", r.scheme.sorts.len()),
            };
            Outcome::new(&r, r.passed(), summary)
        }
        Command::Limit(args) => {
            let n = lifted(args, max)?;
            let r = LimitReport::new(&n).map_err(|e| e.to_string())?;
            let count: usize = r.relations.iter().map(|row| row.limits.len()).sum();
            let summary = format!("limit: {count} limit elements, rigidity {}", verdict(r.passed()));
            Outcome::new(&r, r.passed(), summary)
        }
        Command::Census { input, ks, params } => {
            let m = load(&input.path, max)?;
            if ks.contains(&0) {
                return Err("copy bounds must be at least 1".into());
            }
            let sets = if params.is_empty() {
                vec![SubsetOfDomain::empty()]
            } else {
                params.iter().map(|p| p.iter().copied().collect()).collect()
            };
            let r = stability_report(&m, ks, &sets).map_err(|e| e.to_string())?;
            let totals: Vec<String> = r.growth.iter().map(|g| format!("{:?}", g.total)).collect();
            let summary = format!("census: totals {} growth law {}", totals.join(" "), verdict(r.passed()));
            Outcome::new(&r, r.passed(), summary)
        }
        Command::Report(args) => {
            let m = load(&args.input.path, max)?;
            let cfg = LiftConfig::new(args.k)
                .with_repetitions(args.include_repetitions)
                .with_padding(args.padding.clone());
            let r = FullReport::new(&m, &cfg).map_err(|e| e.to_string())?;
            let summary = format!("report: {}", verdict(r.passed()));
            Outcome::new(&r, r.passed(), summary)
        }
        Command::Corpus {
            out,
            exhaustive,
            random,
            seed,
            size,
            arities,
        } => {
            let structures = match (exhaustive, random) {
                (Some(n), _) => exhaustive_digraphs(*n),
                (None, Some(count)) => random_structures(
                    &RandomSpec {
                        count: *count,
                        max_size: *size,
                        arities: arities.clone(),
                    },
                    *seed,
                ),
                (None, None) => return Err("corpus needs --exhaustive N or --random COUNT".into()),
            }
            .map_err(|e| e.to_string())?;
            fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
            let mut files = Vec::new();
            for (i, m) in structures.iter().enumerate() {
                let name = format!("m{i:04}.json");
                let path = out.join(&name);
                fs::write(&path, m.to_json_pretty() + "\n")
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                files.push(name);
            }
            let summary = format!("corpus: wrote {} structures to {}", files.len(), out.display());
            Outcome::new(&json!({ "count": files.len(), "files": files }), true, summary)
        }
    }
}

/// Runs one command; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = !e.use_stderr();
            let sink: &mut dyn Write = if informational { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if informational { EXIT_OK } else { EXIT_INPUT };
        }
    };
    let outcome = match execute(&cli) {
        Ok(outcome) => outcome,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            return EXIT_INPUT;
        }
    };
    let written = match cli.format {
        Format::Json => writeln!(out, "{}", outcome.report),
        Format::Summary => writeln!(err, "{}", outcome.summary),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write report: {e}");
        return EXIT_INPUT;
    }
    if outcome.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
