//! Batch command line over the signature, word, hyperbolic, tree-like, and
//! R-tree operations.
//!
//! Exit codes: 0 success, 1 domain violation, 2 parse error, 3 internal
//! cross-check failure. JSON output has a fixed key order; CSV uses `.`
//! decimals. `SIGPATH_THREADS` caps the worker pool used for sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use sigpath::hyperbolic::{length_recovery, ScaledDevelopment};
use sigpath::rtree::QuotientTree;
use sigpath::treelike::{build_height, is_tree_like, reduce_path, HeightFunction};
use sigpath::words::{certify_d_dim, n_of_l, triviality_certificate, Word, R0};
use sigpath::PiecewiseLinearPath;

#[derive(Parser)]
#[command(name = "sigpath", version, about = "Path signatures, word certificates, and tree-like reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated signature of a path file, with per-level norms.
    Sig {
        /// Path JSON: {"dim": d, "points": [[...], ...]}.
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Vanishing tolerance for the triviality report.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Free reduction of a word (a-z generators, A-Z inverses).
    ReduceWord {
        word: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Triviality certificate from the graded development of a word.
    CertifyWord {
        word: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hyperbolic development of a path at one scale.
    Develop {
        file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Length recovery sweep from signature coefficient norms.
    Length {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Single scale "a" or sweep "start:stop:factor".
        #[arg(long, default_value = "1:64:2")]
        alpha: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reduce a path to its minimal representative.
    ReducePath {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tree-like verdict with a height function certificate when true.
    Treecheck {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quotient R-tree of a height function file.
    Rtree {
        /// Height JSON: {"times": [...], "values": [...]}.
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// Exit code 2: malformed input files or word strings.
    Parse(String),
    /// Exit code 1: well-formed input violating a domain contract.
    Domain(String),
    /// Exit code 3: two internal routes disagreed.
    Internal(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        match self {
            CliError::Parse(msg) => {
                eprintln!("parse error: {msg}");
                ExitCode::from(2)
            }
            CliError::Domain(msg) => {
                eprintln!("domain violation: {msg}");
                ExitCode::from(1)
            }
            CliError::Internal(msg) => {
                eprintln!("internal cross-check failure: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SIGPATH_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => err.report(),
    }
}

fn read_path_file(file: &PathBuf) -> Result<PiecewiseLinearPath, CliError> {
    let text = fs::read_to_string(file)
        .map_err(|e| CliError::Parse(format!("{}: {e}", file.display())))?;
    let raw: PiecewiseLinearPath =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    PiecewiseLinearPath::new(raw.dim, raw.points).map_err(|e| CliError::Domain(e.to_string()))
}

fn read_height_file(file: &PathBuf) -> Result<HeightFunction, CliError> {
    let text = fs::read_to_string(file)
        .map_err(|e| CliError::Parse(format!("{}: {e}", file.display())))?;
    let raw: HeightFunction =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    HeightFunction::new(raw.times, raw.values).map_err(|e| CliError::Domain(e.to_string()))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Domain(format!("{}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    let content =
        serde_json::to_string_pretty(value).expect("serializable outputs never fail");
    emit(out, &content)
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(CliError::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// Dense levels hold d^0 + ... + d^depth coefficients; refuse requests that
/// cannot fit in memory.
fn check_depth_budget(dim: usize, depth: usize) -> Result<(), CliError> {
    let mut total = 0u64;
    let mut size = 1u64;
    for _ in 0..=depth {
        total = total.saturating_add(size);
        if total > (1 << 26) {
            return Err(CliError::Domain(format!(
                "depth {depth} over dimension {dim} needs more than 2^26 coefficients"
            )));
        }
        size = size.saturating_mul(dim as u64);
    }
    Ok(())
}

/// Sweep spec "start:stop:factor" or a single value.
fn parse_alpha_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| -> Result<f64, CliError> {
        s.parse::<f64>()
            .map_err(|_| CliError::Parse(format!("bad alpha value {s:?}")))
    };
    match parts.as_slice() {
        [single] => {
            let a = parse(single)?;
            if a <= 0.0 {
                return Err(CliError::Domain("alpha must be positive".into()));
            }
            Ok(vec![a])
        }
        [start, stop, factor] => {
            let (start, stop, factor) = (parse(start)?, parse(stop)?, parse(factor)?);
            if start <= 0.0 || stop < start {
                return Err(CliError::Domain("sweep needs 0 < start <= stop".into()));
            }
            if factor <= 1.0 {
                return Err(CliError::Domain("sweep factor must exceed 1".into()));
            }
            let mut alphas = Vec::new();
            let mut a = start;
            while a <= stop * (1.0 + 1e-12) {
                alphas.push(a);
                a *= factor;
            }
            Ok(alphas)
        }
        _ => Err(CliError::Parse(format!("bad sweep spec {spec:?}"))),
    }
}

#[derive(Serialize)]
struct SigReport {
    dim: usize,
    depth: usize,
    levels: Vec<Vec<f64>>,
    b: Vec<f64>,
    trivial: bool,
}

#[derive(Serialize)]
struct WordReport {
    word: String,
    reduced: String,
    trivial: bool,
}

#[derive(Serialize)]
struct CertifyReport {
    word: String,
    length: usize,
    alphabet: usize,
    n_terms: u64,
    certificate: bool,
    reduced: String,
}

#[derive(Serialize)]
struct DevelopReport {
    alpha: f64,
    length: f64,
    scaled_length: f64,
    distance: f64,
    defect: f64,
}

#[derive(Serialize)]
struct LengthRow {
    alpha: f64,
    c_alpha: f64,
    estimate: f64,
}

#[derive(Serialize)]
struct LengthReport {
    depth: usize,
    rows: Vec<LengthRow>,
}

#[derive(Serialize)]
struct TreecheckReport {
    tree_like: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<HeightFunction>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sig {
            file,
            depth,
            tol,
            out,
            format,
        } => {
            check_tol(tol)?;
            let path = read_path_file(&file)?;
            check_depth_budget(path.dim, depth)?;
            let sig = path.signature(depth);
            let b: Vec<f64> = (0..=depth)
                .map(|k| factorial(k) * sig.level_norm(k).expect("k <= depth"))
                .collect();
            let trivial = (1..=depth).all(|k| sig.level_norm(k).expect("k <= depth") <= tol);
            let report = SigReport {
                dim: path.dim,
                depth,
                levels: (0..=depth).map(|k| sig.level(k).to_vec()).collect(),
                b,
                trivial,
            };
            match format {
                Format::Json => emit_json(&out, &report),
                Format::Csv => {
                    let mut csv = String::from("level,b\n");
                    for (k, bk) in report.b.iter().enumerate() {
                        let _ = writeln!(csv, "{k},{bk}");
                    }
                    emit(&out, csv.trim_end())
                }
            }
        }
        Command::ReduceWord { word, out } => {
            let w = Word::parse(&word).map_err(|e| CliError::Parse(e.to_string()))?;
            let reduced = w.reduced();
            let report = WordReport {
                word: w.to_string(),
                reduced: reduced.to_string(),
                trivial: reduced.is_empty(),
            };
            emit_json(&out, &report)
        }
        Command::CertifyWord { word, out } => {
            let w = Word::parse(&word).map_err(|e| CliError::Parse(e.to_string()))?;
            let reduced = w.reduced();
            let (certificate, n_terms) = if w.is_empty() {
                (true, 0)
            } else if w.alphabet_size() == 2 {
                let cert =
                    triviality_certificate(&w).map_err(|e| CliError::Domain(e.to_string()))?;
                (cert, n_of_l(w.len()).map_err(|e| CliError::Domain(e.to_string()))?)
            } else {
                let cert = certify_d_dim(&w).map_err(|e| CliError::Domain(e.to_string()))?;
                let d = w.alphabet_size();
                let fi_len = 2.0 * ((d as f64 / 2.0).log(3.0).ceil().max(0.0)) + 3.0;
                let depth = (fi_len * std::f64::consts::E * R0 * w.len() as f64).floor() as u64;
                (cert, depth)
            };
            if certificate != reduced.is_empty() {
                return Err(CliError::Internal(format!(
                    "certificate says {certificate} but reduction gives {:?}",
                    reduced.to_string()
                )));
            }
            let report = CertifyReport {
                word: w.to_string(),
                length: w.len(),
                alphabet: w.alphabet_size(),
                n_terms,
                certificate,
                reduced: reduced.to_string(),
            };
            emit_json(&out, &report)
        }
        Command::Develop {
            file,
            alpha,
            out,
            format,
        } => {
            if alpha < 0.0 {
                return Err(CliError::Domain("alpha must be nonnegative".into()));
            }
            let path = read_path_file(&file)?;
            let length = path.length();
            let distance = ScaledDevelopment::develop(&path, alpha).origin_distance();
            let report = DevelopReport {
                alpha,
                length,
                scaled_length: alpha * length,
                distance,
                defect: alpha * length - distance,
            };
            match format {
                Format::Json => emit_json(&out, &report),
                Format::Csv => {
                    let mut csv = String::from("alpha,length,distance,defect\n");
                    let _ = writeln!(
                        csv,
                        "{},{},{},{}",
                        report.alpha, report.length, report.distance, report.defect
                    );
                    emit(&out, csv.trim_end())
                }
            }
        }
        Command::Length {
            file,
            depth,
            alpha,
            out,
            format,
        } => {
            let alphas = parse_alpha_sweep(&alpha)?;
            let path = read_path_file(&file)?;
            check_depth_budget(path.dim, depth)?;
            let sig = path.signature(depth);
            let b: Vec<f64> = (0..=depth)
                .map(|k| factorial(k) * sig.level_norm(k).expect("k <= depth"))
                .collect();
            let rows: Vec<LengthRow> = alphas
                .par_iter()
                .map(|&a| match length_recovery(&b, a) {
                    Ok((c_alpha, estimate)) => Ok(LengthRow {
                        alpha: a,
                        c_alpha,
                        estimate,
                    }),
                    Err(e) => Err(CliError::Domain(format!("alpha {a}: {e}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let report = LengthReport { depth, rows };
            match format {
                Format::Json => emit_json(&out, &report),
                Format::Csv => {
                    let mut csv = String::from("alpha,c_alpha,estimate\n");
                    for row in &report.rows {
                        let _ = writeln!(csv, "{},{},{}", row.alpha, row.c_alpha, row.estimate);
                    }
                    emit(&out, csv.trim_end())
                }
            }
        }
        Command::ReducePath { file, out } => {
            let path = read_path_file(&file)?;
            emit_json(&out, &reduce_path(&path))
        }
        Command::Treecheck {
            file,
            depth,
            tol,
            out,
        } => {
            check_tol(tol)?;
            if depth == 0 {
                return Err(CliError::Domain("depth must be at least 1".into()));
            }
            let path = read_path_file(&file)?;
            check_depth_budget(path.dim, depth)?;
            let tree_like =
                is_tree_like(&path, depth, tol).map_err(|e| CliError::Internal(e.to_string()))?;
            let height = if tree_like {
                match build_height(&path) {
                    Some(h) => Some(h),
                    None => {
                        return Err(CliError::Internal(
                            "reduction says tree-like but no height function was built".into(),
                        ))
                    }
                }
            } else {
                None
            };
            emit_json(&out, &TreecheckReport { tree_like, height })
        }
        Command::Rtree { file, out } => {
            let h = read_height_file(&file)?;
            let tree = QuotientTree::build(&h, &h.times);
            emit_json(&out, &tree)
        }
    }
}
