//! Command-line front end: argument parsing, error classification and
//! JSON/TSV rendering of the library's computations.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use polyspace::catalog::{build_catalog, CatalogError, SCHEMA_VERSION};
use polyspace::cohomology::{build_context, relation_check_family, CohomologyError};
use polyspace::genetics::{
    enumerate_codes, genetic_code, realize, GeneticCode, GeneticsError, LengthVector,
};
use polyspace::immersion::{
    immerses_in_4m_minus_2, immersion_report, nonimmersion_dim, table1, ImmersionError,
};
use polyspace::ktheory::{chern_oracle, k_context, strongest_context, KMode, KTheoryError};
use polyspace::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "polyspace",
    version,
    about = "Exact invariants of spatial polygon spaces"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel commands.
    #[arg(long, env = "POLYSPACE_THREADS", global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Genetic code of a generic length vector.
    GeneticCode {
        /// Comma-separated positive rationals, e.g. 1,1,2,2,3 or 1/2,1,2.
        #[arg(long)]
        lengths: String,
    },
    /// All nonempty genetic codes of length n in canonical order.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Integral cohomology ring: Betti numbers, monomial bases, family checks.
    Cohomology {
        #[arg(long)]
        code: String,
    },
    /// K-theory ring in a chosen presentation, with Chern character checks.
    Ktheory {
        #[arg(long)]
        code: String,
        /// family_nk, family_nk1 or general_quotient; defaults to the sharpest applicable.
        #[arg(long)]
        mode: Option<KMode>,
        /// Include the defining relations.
        #[arg(long)]
        dump_relations: bool,
    },
    /// Γ-class nonimmersion dimension.
    Nonimmersion {
        #[arg(long)]
        code: String,
    },
    /// Whether N(ℓ) immerses in R^(4m-2).
    #[command(name = "immersion-4m2")]
    Immersion4m2 {
        #[arg(long)]
        code: String,
    },
    /// Grid of 2m + 2M(m,s) - 1, rows m and columns s.
    Table1 {
        #[arg(long, default_value = "16:31")]
        m: String,
        #[arg(long, default_value = "1:8")]
        s: String,
    },
    /// Invariant catalog of every nonempty code of length n.
    Report {
        #[arg(long)]
        n: usize,
    },
    /// Regression suite over the published results.
    Verify,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Invariant(_) | CliError::Io { .. } => EXIT_INVARIANT,
        }
    }
}

impl From<GeneticsError> for CliError {
    fn from(e: GeneticsError) -> Self {
        match e {
            GeneticsError::Internal(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CohomologyError> for CliError {
    fn from(e: CohomologyError) -> Self {
        match e {
            CohomologyError::EmptyCode => CliError::Validation(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<KTheoryError> for CliError {
    fn from(e: KTheoryError) -> Self {
        match e {
            KTheoryError::EmptyCode | KTheoryError::ModeMismatch { .. } => {
                CliError::Validation(e.to_string())
            }
            KTheoryError::Cohomology(c) => c.into(),
            KTheoryError::ContextMismatch => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<ImmersionError> for CliError {
    fn from(e: ImmersionError) -> Self {
        match e {
            ImmersionError::KTheory(k) => k.into(),
            ImmersionError::Cohomology(c) => c.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Genetics(g) => g.into(),
            CatalogError::Immersion(i) => i.into(),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

/// Rendered output plus the exit status it warrants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub status: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output {
            text,
            status: EXIT_OK,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Parses `lo:hi` (or a single value) into an inclusive range.
pub fn parse_range(flag: &str, text: &str) -> Result<RangeInclusive<u32>, CliError> {
    let bad = |reason: &str| CliError::Validation(format!("--{flag} {text:?}: {reason}"));
    let (lo, hi) = text.split_once(':').unwrap_or((text, text));
    let lo: u32 = lo
        .trim()
        .parse()
        .map_err(|_| bad("expected lo:hi with nonnegative integers"))?;
    let hi: u32 = hi
        .trim()
        .parse()
        .map_err(|_| bad("expected lo:hi with nonnegative integers"))?;
    if lo > hi {
        return Err(bad("empty range"));
    }
    Ok(lo..=hi)
}

/// Parses a code and checks that some length vector realizes it.
fn parse_realizable(text: &str) -> Result<GeneticCode, CliError> {
    let code = GeneticCode::parse(text)?;
    if code.is_empty() {
        return Err(CliError::Validation(format!(
            "{code} describes an empty space"
        )));
    }
    realize(&code)?;
    Ok(code)
}

fn document(body: Value) -> Value {
    let mut doc = json!({ "schema": SCHEMA_VERSION });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

fn cmd_genetic_code(lengths: &str, format: Format) -> Result<Output, CliError> {
    let code = genetic_code(&LengthVector::parse(lengths)?)?;
    Ok(Output::ok(match format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string(&code).expect("code serializes")
        ),
        Format::Tsv => format!("{code}\n"),
    }))
}

fn cmd_enumerate(n: usize, format: Format) -> Result<Output, CliError> {
    let codes = enumerate_codes(n)?;
    Ok(Output::ok(match format {
        Format::Json => to_json(&document(
            json!({ "n": n, "count": codes.len(), "codes": codes }),
        )),
        Format::Tsv => codes.iter().map(|c| format!("{c}\n")).collect(),
    }))
}

fn cmd_cohomology(text: &str, format: Format) -> Result<Output, CliError> {
    let code = parse_realizable(text)?;
    let ctx = build_context(&code)?;
    let betti = ctx.betti_numbers();
    let bases: Vec<Vec<String>> = (0..betti.len())
        .map(|d| ctx.basis(d).iter().map(ToString::to_string).collect())
        .collect();
    let family = relation_check_family(&ctx);
    let consistent = family.as_ref().is_none_or(|r| r.consistent());
    let status = if consistent { EXIT_OK } else { EXIT_INVARIANT };
    let text = match format {
        Format::Json => to_json(&document(json!({
            "code": code,
            "betti": betti,
            "basis": bases,
            "rank_above_top": ctx.rank_above_top(),
            "family_checks": family,
        }))),
        Format::Tsv => {
            let mut s = String::from("degree\tbetti\tbasis\n");
            for (d, basis) in bases.iter().enumerate() {
                let _ = writeln!(s, "{}\t{}\t{}", 2 * d, betti[d], basis.join(" "));
            }
            s
        }
    };
    Ok(Output { text, status })
}

fn cmd_ktheory(
    text: &str,
    mode: Option<KMode>,
    dump_relations: bool,
    format: Format,
) -> Result<Output, CliError> {
    let code = parse_realizable(text)?;
    let kctx = match mode {
        Some(mode) => k_context(&code, mode)?,
        None => strongest_context(&code)?,
    };
    let cctx = build_context(&code)?;
    let oracle = chern_oracle(&kctx, &cctx)?;
    let status = if oracle.consistent() {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    };
    let basis: Vec<String> = kctx.basis().iter().map(ToString::to_string).collect();
    let relations: Option<Vec<Value>> = dump_relations.then(|| {
        kctx.relations()
            .iter()
            .map(|r| json!({ "name": r.name, "relation": r.poly.to_string() }))
            .collect()
    });
    let text = match format {
        Format::Json => {
            let mut body = json!({
                "code": code,
                "mode": kctx.mode(),
                "truncation": kctx.truncation(),
                "basis": basis,
                "oracle": oracle,
            });
            if let Some(rel) = relations {
                body["relations"] = Value::Array(rel);
            }
            to_json(&document(body))
        }
        Format::Tsv => {
            let mut s = String::from("kind\tname\tvalue\n");
            for b in &basis {
                let _ = writeln!(s, "basis\t{b}\t");
            }
            for r in relations.iter().flatten() {
                let _ = writeln!(
                    s,
                    "relation\t{}\t{}",
                    r["name"].as_str().unwrap_or(""),
                    r["relation"].as_str().unwrap_or("")
                );
            }
            let _ = writeln!(s, "oracle\tconsistent\t{}", oracle.consistent());
            s
        }
    };
    Ok(Output { text, status })
}

fn cmd_nonimmersion(text: &str, format: Format) -> Result<Output, CliError> {
    let code = parse_realizable(text)?;
    let bound = nonimmersion_dim(&code)?;
    Ok(Output::ok(match format {
        Format::Json => to_json(&document(json!({
            "code": code,
            "mode": bound.mode,
            "truncation": bound.truncation,
            "gamma_gap": bound.gamma_gap,
            "nonimmersion_dim": bound.dim,
        }))),
        Format::Tsv => format!(
            "code\tmode\tgamma_gap\tnonimmersion_dim\n{code}\t{}\t{}\t{}\n",
            bound.mode, bound.gamma_gap, bound.dim
        ),
    }))
}

fn cmd_immersion(text: &str, format: Format) -> Result<Output, CliError> {
    let code = parse_realizable(text)?;
    let verdict = immerses_in_4m_minus_2(&code)?;
    let dim = 4 * code.m() - 2;
    let verdict_json = serde_json::to_value(verdict).expect("verdict serializes");
    Ok(Output::ok(match format {
        Format::Json => to_json(&document(
            json!({ "code": code, "dimension": dim, "verdict": verdict_json }),
        )),
        Format::Tsv => format!(
            "code\tdimension\tverdict\n{code}\t{dim}\t{}\n",
            verdict_json.as_str().unwrap_or("")
        ),
    }))
}

fn cmd_table1(m: &str, s: &str, format: Format) -> Result<Output, CliError> {
    let ms = parse_range("m", m)?;
    let ss = parse_range("s", s)?;
    let grid = table1(ms.clone(), ss.clone())?;
    Ok(Output::ok(match format {
        Format::Json => {
            let rows: Vec<Value> = ms
                .clone()
                .zip(&grid)
                .map(|(m, row)| json!({ "m": m, "dims": row }))
                .collect();
            to_json(&document(json!({
                "m": [ms.start(), ms.end()],
                "s": [ss.start(), ss.end()],
                "rows": rows,
            })))
        }
        Format::Tsv => {
            let mut out = String::from("m");
            for s in ss {
                let _ = write!(out, "\t{s}");
            }
            out.push('\n');
            for (m, row) in ms.zip(&grid) {
                let _ = write!(out, "{m}");
                for v in row {
                    let _ = write!(out, "\t{v}");
                }
                out.push('\n');
            }
            out
        }
    }))
}

fn cmd_report(n: usize, format: Format) -> Result<Output, CliError> {
    let catalog = build_catalog(n)?;
    let violations: Vec<String> = catalog
        .entries
        .iter()
        .map(|e| immersion_report(&e.code).map(|r| (e.code.to_string(), r.invariant_violations())))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flat_map(|(c, v)| v.into_iter().map(move |x| format!("{c}: {x}")))
        .collect();
    for v in &violations {
        eprintln!("invariant violation: {v}");
    }
    let status = if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    };
    let text = match format {
        Format::Json => catalog.to_json(),
        Format::Tsv => {
            let mut s = String::from("code\tbetti\tgamma_gap\tnonimmersion_dim\tm_formula_dim\tsw_dim\timmerses_4m_minus_2\tmode\n");
            for e in &catalog.entries {
                let betti: Vec<String> = e.betti.iter().map(ToString::to_string).collect();
                let verdict = e
                    .immerses_4m_minus_2
                    .map(|v| {
                        serde_json::to_value(v)
                            .expect("verdict serializes")
                            .as_str()
                            .unwrap_or("")
                            .to_string()
                    })
                    .unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    e.code,
                    betti.join(","),
                    e.gamma_gap,
                    e.nonimmersion_dim,
                    e.m_formula_dim,
                    e.sw_dim,
                    verdict,
                    e.provenance.mode
                );
            }
            s
        }
    };
    Ok(Output { text, status })
}

fn cmd_verify(format: Format) -> Result<Output, CliError> {
    let checks = verify::run_all();
    let passed = checks.iter().all(|c| c.passed);
    let text = match format {
        Format::Json => to_json(&document(json!({ "passed": passed, "checks": checks }))),
        Format::Tsv => {
            let mut s = String::from("status\tcheck\tfailures\n");
            for c in &checks {
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.failures.join("; ")
                );
            }
            s
        }
    };
    Ok(Output {
        text,
        status: if passed { EXIT_OK } else { EXIT_INVARIANT },
    })
}

/// Runs a parsed command and renders its output.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let f = cli.format;
    match &cli.command {
        Command::GeneticCode { lengths } => cmd_genetic_code(lengths, f),
        Command::Enumerate { n } => cmd_enumerate(*n, f),
        Command::Cohomology { code } => cmd_cohomology(code, f),
        Command::Ktheory {
            code,
            mode,
            dump_relations,
        } => cmd_ktheory(code, *mode, *dump_relations, f),
        Command::Nonimmersion { code } => cmd_nonimmersion(code, f),
        Command::Immersion4m2 { code } => cmd_immersion(code, f),
        Command::Table1 { m, s } => cmd_table1(m, s, f),
        Command::Report { n } => cmd_report(*n, f),
        Command::Verify => cmd_verify(f),
    }
}

/// Runs a command inside a thread pool of the requested size and writes
/// the output to `--out` or returns it for stdout.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let output = match cli.threads {
        Some(0) => return Err(CliError::Validation("--threads must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Invariant(e.to_string()))?
            .install(|| execute(cli))?,
        None => execute(cli)?,
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &output.text).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(Output {
                text: String::new(),
                status: output.status,
            })
        }
        None => Ok(output),
    }
}
