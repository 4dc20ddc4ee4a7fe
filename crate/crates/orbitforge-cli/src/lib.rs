//! Command-line front end: structure files in, exact counts, enumerations
//! and verdict tables out.
//!
//! Exit codes: 0 on success, 1 on validation or usage errors, 2 when a
//! configured cap is exceeded. Output is byte-deterministic for fixed
//! inputs and flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num::bigint::BigInt;
use num::rational::Ratio;

use orbitforge::growth::{classify, verify_ndn_bound, GrowthReport};
use orbitforge::io::{parse_sequence_csv, sequence_to_csv, GroupFile, StructureFile};
use orbitforge::orbits::{
    count_injective_orbits, count_orbits, crosscheck, orbit_sequence, OrbitCountSequence,
    SequenceKind,
};
use orbitforge::partitions::{
    check_lower_bound, check_upper_bound_termwise, find_upper_c, p_k, p_k_bruteforce, s_k, Rational,
};
use orbitforge::reducts::{enumerate_covering_reducts, enumerate_unary_reducts};
use orbitforge::structures::{truncate, validate, StructureDescription};
use orbitforge::{Caps, Error};

#[derive(Parser)]
#[command(
    name = "orbitforge",
    about = "Workbench for reducts and finite covers of unary structures",
    disable_help_subcommand = true
)]
struct Cli {
    /// Override the group-order cap (also settable via ORBITFORGE_CAPS).
    #[arg(long, global = true)]
    order_cap: Option<u64>,
    /// Override the enumeration work cap (also settable via ORBITFORGE_CAPS).
    #[arg(long, global = true)]
    work_cap: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count set partitions with blocks of size at most k.
    Pk {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Use the exhaustive generator instead of the recursion.
        #[arg(long)]
        brute: bool,
    },
    /// Count set partitions of a kn-set into blocks of size exactly k.
    Sk {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Exact verdict tables for the growth inequalities.
    Bounds {
        #[command(subcommand)]
        which: BoundsCommand,
    },
    /// Count orbits of the structure in a file.
    Count {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "injective")]
        kind: KindArg,
    },
    /// The orbit-count sequence for n = 1..n-max.
    Sequence {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value = "table")]
        format: FormatArg,
        #[arg(long, default_value = "injective")]
        kind: KindArg,
    },
    /// Enumerate the first-order reducts of a unary structure.
    Reducts {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        count_only: bool,
    },
    /// Enumerate the covering reducts of a trivial cover.
    CoverReducts {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        count_only: bool,
    },
    /// Realize the structure as a finite permutation group.
    Truncate {
        #[command(flatten)]
        input: InputArg,
        /// Base sizes per orbit, e.g. o1=4,o2=4.
        #[arg(long)]
        sizes: String,
        /// Print the full group as JSON.
        #[arg(long)]
        emit_group: bool,
    },
    /// Compare the symbolic count with truncation brute force.
    Crosscheck {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        margin: usize,
    },
    /// Classify the growth of a sequence.
    Classify {
        #[arg(long, conflicts_with = "sequence_file")]
        input: Option<PathBuf>,
        #[arg(long)]
        n_max: Option<usize>,
        /// Read an n,count CSV instead of counting a structure.
        #[arg(long)]
        sequence_file: Option<PathBuf>,
        #[arg(long, default_value = "table")]
        format: FormatArg,
    },
    /// Replace finite orbits by infinite ones.
    SplitOrbits {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the invariants of a structure file.
    Validate {
        #[command(flatten)]
        input: InputArg,
    },
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Verdicts of p_k(n) >= n^{((k-1)/k - eps)·n} for n = 1..n-max.
    Lower {
        #[arg(long)]
        k: usize,
        /// Rational epsilon, e.g. 1/4.
        #[arg(long)]
        eps: String,
        #[arg(long)]
        n_max: usize,
    },
    /// Termwise verdicts for p_k(n) < c·n^{dn} and the constant search.
    Upper {
        #[arg(long)]
        k: usize,
        /// Rational d, e.g. 3/4.
        #[arg(long)]
        d: String,
        #[arg(long)]
        n_max: usize,
    },
}

#[derive(Args)]
struct InputArg {
    /// Structure description file (JSON).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum KindArg {
    Injective,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<KindArg> for SequenceKind {
    fn from(k: KindArg) -> SequenceKind {
        match k {
            KindArg::Injective => SequenceKind::Injective,
            KindArg::All => SequenceKind::All,
        }
    }
}

/// Run the CLI on explicit arguments, writing to the given streams.
/// Returns the process exit code.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = write!(stderr, "{e}");
            return 1;
        }
    };
    let caps = match build_caps(&cli) {
        Ok(caps) => caps,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 1;
        }
    };
    match execute(cli.command, &caps) {
        Ok(output) => {
            let _ = stdout.write_all(output.as_bytes());
            0
        }
        Err(CliError::Validation(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(CliError::CapExceeded(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
    }
}

enum CliError {
    Validation(String),
    CapExceeded(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        if e.is_cap_exceeded() {
            CliError::CapExceeded(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Validation(e.to_string())
    }
}

fn build_caps(cli: &Cli) -> Result<Caps, String> {
    let mut caps = Caps::default();
    if let Ok(env) = std::env::var("ORBITFORGE_CAPS") {
        for pair in env.split([',', ' ']).filter(|p| !p.trim().is_empty()) {
            let (key, value) = pair
                .trim()
                .split_once('=')
                .ok_or_else(|| format!("ORBITFORGE_CAPS entry {pair:?} is not key=value"))?;
            caps.set(key.trim(), value.trim())
                .map_err(|e| format!("ORBITFORGE_CAPS: {e}"))?;
        }
    }
    if let Some(c) = cli.order_cap {
        caps.order_cap = c;
    }
    if let Some(c) = cli.work_cap {
        caps.work_cap = c;
    }
    Ok(caps)
}

fn parse_rational(text: &str) -> Result<Rational, CliError> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|e| CliError::Validation(format!("bad rational {text:?}: {e}")))
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (parse_int(n)?, parse_int(d)?),
        None => (parse_int(text)?, 1),
    };
    if den == 0 {
        return Err(CliError::Validation(format!(
            "bad rational {text:?}: zero denominator"
        )));
    }
    Ok(Ratio::new(BigInt::from(num), BigInt::from(den)))
}

fn parse_sizes(text: &str) -> Result<BTreeMap<String, usize>, CliError> {
    let mut out = BTreeMap::new();
    for pair in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (orbit, size) = pair
            .trim()
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("size entry {pair:?} is not orbit=N")))?;
        let n: usize = size
            .trim()
            .parse()
            .map_err(|e| CliError::Validation(format!("bad size in {pair:?}: {e}")))?;
        out.insert(orbit.trim().to_string(), n);
    }
    Ok(out)
}

fn load_structure(path: &PathBuf) -> Result<StructureDescription, CliError> {
    let text = std::fs::read_to_string(path)?;
    let file = StructureFile::parse(&text)?;
    let s = file.decode()?;
    let violations = validate(&s);
    if violations.is_empty() {
        Ok(s)
    } else {
        Err(CliError::Validation(violations.join("; ")))
    }
}

fn execute(command: Command, caps: &Caps) -> Result<String, CliError> {
    let mut out = String::new();
    match command {
        Command::Pk { k, n, brute } => {
            if k == 0 {
                return Err(CliError::Validation("k must be positive".into()));
            }
            let value = if brute {
                p_k_bruteforce(k, n, caps.bruteforce_cap)?
            } else {
                p_k(k, n)
            };
            writeln!(out, "{value}").unwrap();
        }
        Command::Sk { k, n } => {
            if k == 0 {
                return Err(CliError::Validation("k must be positive".into()));
            }
            writeln!(out, "{}", s_k(k, n)).unwrap();
        }
        Command::Bounds { which } => match which {
            BoundsCommand::Lower { k, eps, n_max } => {
                if k == 0 || n_max == 0 {
                    return Err(CliError::Validation("k and n-max must be positive".into()));
                }
                let eps = parse_rational(&eps)?;
                writeln!(out, "n\tp_{k}(n) >= n^(((k-1)/k - {eps})*n)").unwrap();
                let mut last_failure = None;
                for n in 1..=n_max {
                    let holds = check_lower_bound(k, &eps, n);
                    if !holds {
                        last_failure = Some(n);
                    }
                    writeln!(out, "{n}\t{holds}").unwrap();
                }
                match last_failure {
                    None => writeln!(out, "onset N = 1 (holds for all n in [1, {n_max}])").unwrap(),
                    Some(f) if f < n_max => writeln!(
                        out,
                        "onset N = {} (holds for all n in [{}, {n_max}])",
                        f + 1,
                        f + 1
                    )
                    .unwrap(),
                    Some(_) => writeln!(out, "no onset within [1, {n_max}]").unwrap(),
                }
            }
            BoundsCommand::Upper { k, d, n_max } => {
                if k == 0 || n_max == 0 {
                    return Err(CliError::Validation("k and n-max must be positive".into()));
                }
                let d = parse_rational(&d)?;
                writeln!(out, "n\ttermwise sufficient inequality").unwrap();
                for n in 1..=n_max {
                    writeln!(out, "{n}\t{}", check_upper_bound_termwise(k, &d, n)).unwrap();
                }
                let report = find_upper_c(k, &d, n_max, caps.denominator_cap);
                writeln!(out, "c = {}", report.c).unwrap();
                writeln!(
                    out,
                    "termwise holds for all n in ({}, {n_max}]",
                    report.termwise_onset
                )
                .unwrap();
            }
        },
        Command::Count { input, n, kind } => {
            let s = load_structure(&input.input)?;
            let value = match kind {
                KindArg::Injective => count_injective_orbits(&s, n, caps)?,
                KindArg::All => count_orbits(&s, n, caps)?,
            };
            writeln!(out, "{value}").unwrap();
        }
        Command::Sequence {
            input,
            n_max,
            format,
            kind,
        } => {
            let s = load_structure(&input.input)?;
            let seq = orbit_sequence(&s, n_max, kind.into(), caps)?;
            out.push_str(&render_sequence(&seq, format));
        }
        Command::Reducts { input, count_only } => {
            let s = load_structure(&input.input)?;
            let u = match s {
                StructureDescription::Unary(u) => u,
                other => {
                    return Err(CliError::Validation(format!(
                        "reduct enumeration needs kind \"unary\", got {:?}",
                        other.kind_name()
                    )))
                }
            };
            let reducts = enumerate_unary_reducts(&u, caps)?;
            if count_only {
                writeln!(out, "{}", reducts.len()).unwrap();
            } else {
                for (i, r) in reducts.iter().enumerate() {
                    let classes: Vec<String> =
                        r.nabla.classes.iter().map(|c| c.join("+")).collect();
                    let order = r.action.elements().map(|e| e.len()).unwrap_or(0);
                    writeln!(
                        out,
                        "reduct {}: classes [{}], action order {}",
                        i + 1,
                        classes.join(" | "),
                        order
                    )
                    .unwrap();
                }
                writeln!(out, "total {}", reducts.len()).unwrap();
            }
        }
        Command::CoverReducts { input, count_only } => {
            let s = load_structure(&input.input)?;
            let cover = match s {
                StructureDescription::Fibered(c) => c,
                other => {
                    return Err(CliError::Validation(format!(
                        "covering-reduct enumeration needs kind \"trivial_cover\", got {:?}",
                        other.kind_name()
                    )))
                }
            };
            let reducts = enumerate_covering_reducts(&cover, caps)?;
            if count_only {
                writeln!(out, "{}", reducts.len()).unwrap();
            } else {
                for (i, r) in reducts.iter().enumerate() {
                    let h_order = r.h_group.elements().map(|e| e.len()).unwrap_or(0);
                    let n_orders: Vec<String> = (0..r.n_groups.len())
                        .map(|j| {
                            r.n_groups[j]
                                .elements()
                                .map(|e| e.len().to_string())
                                .unwrap_or_else(|_| "?".into())
                        })
                        .collect();
                    writeln!(
                        out,
                        "covering reduct {}: |H| = {h_order}, |N_i| = [{}]",
                        i + 1,
                        n_orders.join(", ")
                    )
                    .unwrap();
                }
                writeln!(out, "total {}", reducts.len()).unwrap();
            }
        }
        Command::Truncate {
            input,
            sizes,
            emit_group,
        } => {
            let s = load_structure(&input.input)?;
            let sizes = parse_sizes(&sizes)?;
            let mut t = truncate(&s, &sizes)?;
            t.group = t.group.clone().with_order_cap(caps.order_cap);
            if emit_group {
                writeln!(out, "{}", GroupFile::from_truncation(&t).to_json()).unwrap();
            } else {
                writeln!(
                    out,
                    "degree {} with {} generators",
                    t.group.degree(),
                    t.group.generators().len()
                )
                .unwrap();
            }
        }
        Command::Crosscheck { input, n, margin } => {
            let s = load_structure(&input.input)?;
            let report = crosscheck(&s, n, margin, caps)?;
            match (&report.symbolic, &report.refusal) {
                (Some(v), _) => writeln!(out, "symbolic: {v}").unwrap(),
                (None, Some(why)) => writeln!(out, "symbolic: refused ({why})").unwrap(),
                (None, None) => unreachable!("crosscheck always sets one of the two"),
            }
            writeln!(
                out,
                "truncation at base size {}: {}",
                report.base_size_small, report.count_small
            )
            .unwrap();
            writeln!(
                out,
                "truncation at base size {}: {}",
                report.base_size_large, report.count_large
            )
            .unwrap();
            writeln!(out, "stabilized: {}", report.stabilized()).unwrap();
            if let Some(matches) = report.matches() {
                writeln!(out, "symbolic matches truncation: {matches}").unwrap();
            }
        }
        Command::Classify {
            input,
            n_max,
            sequence_file,
            format,
        } => {
            let seq = match (input, sequence_file) {
                (Some(path), _) => {
                    let n_max = n_max
                        .ok_or_else(|| CliError::Validation("--input needs --n-max".into()))?;
                    let s = load_structure(&path)?;
                    orbit_sequence(&s, n_max, SequenceKind::Injective, caps)?
                }
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)?;
                    parse_sequence_csv(&text)?
                }
                (None, None) => {
                    return Err(CliError::Validation(
                        "classify needs --input or --sequence-file".into(),
                    ))
                }
            };
            let report = classify(&seq)?;
            out.push_str(&render_growth_report(&report, format));
        }
        Command::SplitOrbits { input, out: path } => {
            let s = load_structure(&input.input)?;
            let split = orbitforge::structures::split_finite_orbits(&s)?;
            std::fs::write(&path, StructureFile::encode(&split).to_json())?;
            writeln!(out, "written {}", path.display()).unwrap();
        }
        Command::Validate { input } => {
            let text = std::fs::read_to_string(&input.input)?;
            let file = StructureFile::parse(&text)?;
            let s = file.decode()?;
            let violations = validate(&s);
            if violations.is_empty() {
                writeln!(out, "ok").unwrap();
            } else {
                return Err(CliError::Validation(violations.join("; ")));
            }
        }
    }
    Ok(out)
}

fn render_sequence(seq: &OrbitCountSequence, format: FormatArg) -> String {
    match format {
        FormatArg::Table => {
            let mut out = String::from("n\tcount\n");
            for (n, count) in &seq.entries {
                out.push_str(&format!("{n}\t{count}\n"));
            }
            out
        }
        FormatArg::Csv => sequence_to_csv(seq),
        FormatArg::Json => {
            let entries: Vec<serde_json::Value> = seq
                .entries
                .iter()
                .map(|(n, count)| serde_json::json!({"n": n, "count": count.to_string()}))
                .collect();
            let kind = match seq.kind {
                SequenceKind::Injective => "injective",
                SequenceKind::All => "all",
            };
            let value = serde_json::json!({"kind": kind, "entries": entries});
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
    }
}

fn render_growth_report(report: &GrowthReport, format: FormatArg) -> String {
    match format {
        FormatArg::Json => {
            let estimates: Vec<serde_json::Value> = report
                .estimates
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "n": e.n,
                        "low": e.low.to_string(),
                        "high": e.high().to_string(),
                    })
                })
                .collect();
            let ndn: Vec<serde_json::Value> = report
                .ndn_verdicts
                .iter()
                .map(|(c, d, ok)| serde_json::json!({"c": c, "d": d.to_string(), "holds": ok}))
                .collect();
            let exp: Vec<serde_json::Value> = report
                .exp_verdicts
                .iter()
                .map(|(c, ok)| serde_json::json!({"c": c, "holds": ok}))
                .collect();
            let value = serde_json::json!({
                "label": report.label.to_string(),
                "heuristic": report.heuristic,
                "estimates": estimates,
                "ndn_verdicts": ndn,
                "exp_verdicts": exp,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
        _ => {
            let mut out = String::new();
            out.push_str(&format!("label: {} (heuristic)\n", report.label));
            out.push_str("d_n estimates (within 1/2048):\n");
            for e in &report.estimates {
                out.push_str(&format!("  n={}: [{}, {})\n", e.n, e.low, e.high()));
            }
            out.push_str("exponential-bound verdicts:\n");
            for (c, ok) in &report.exp_verdicts {
                out.push_str(&format!("  c={c}: {ok}\n"));
            }
            out.push_str("n^(dn)-bound verdicts:\n");
            for (c, d, ok) in &report.ndn_verdicts {
                out.push_str(&format!("  c={c}, d={d}: {ok}\n"));
            }
            out
        }
    }
}

/// Re-exported for integration tests: verify a sequence against one (c, d)
/// pair exactly.
pub fn verify_sequence_ndn(seq: &OrbitCountSequence, c: u64, d: &Rational) -> Result<bool, Error> {
    verify_ndn_bound(seq, c, d)
}
