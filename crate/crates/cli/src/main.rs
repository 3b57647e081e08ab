//! `mvcomp`: completability analysis for two-view low-rank sampling patterns.
//!
//! Exit codes: 0 decisive result, 2 undecided (`Unknown`), 1 runtime error,
//! 64 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mvcomp::basis::canonicalize;
use mvcomp::checker::{check_unique, SearchStrategy};
use mvcomp::experiments::{figure3_sweep, phase_csv, phase_transition, sweep_csv, PhaseConfig, PhaseMode};
use mvcomp::linalg::{format_dense_matrix, parse_dense_matrix};
use mvcomp::oracle::Arithmetic;
use mvcomp::{
    bound_report, build_constraint, check_finite, finiteness_oracle, load_pattern, CheckConfig, Exec, LogBase,
    OracleConfig, ProblemShape, RankTriple, SamplingPattern, Status,
};

const EXIT_UNKNOWN: u8 = 2;
const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "mvcomp", version, about = "Finite and unique completability of two-view low-rank matrices")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every random choice (oracle points, search shuffles, trials).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Independent random points per Jacobian rank evaluation.
    #[arg(long, global = true, default_value_t = 3)]
    trials: usize,
    #[arg(long, global = true, value_enum, default_value_t = Arith::Prime)]
    arith: Arith,
    /// Field modulus for `--arith prime`.
    #[arg(long, global = true, default_value_t = 2_147_483_647)]
    prime: u64,
    /// Relative singular-value threshold for `--arith float`.
    #[arg(long, global = true, default_value_t = 1e-9)]
    svd_tol: f64,
    /// Node cap for the backtracking certificate search.
    #[arg(long, global = true, default_value_t = 1 << 24)]
    max_enum: u64,
    #[arg(long, global = true, value_enum, default_value_t = Base::E)]
    log_base: Base,
    /// Certificates may use at most one constraint column per pattern column.
    #[arg(long, global = true)]
    strict_subsets: bool,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Arith {
    Prime,
    Float,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Base {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
    #[value(name = "10")]
    Ten,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Finite,
    Unique,
}

#[derive(Args, Debug)]
struct PatternArgs {
    /// Sampling pattern file (`n m1 m2` header, then `dense` or `coords`).
    #[arg(long)]
    pattern: PathBuf,
    /// Ranks as `r,r1,r2` (joint rank first).
    #[arg(long)]
    ranks: RankTriple,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide finite completability from the sampling pattern.
    Check(PatternArgs),
    /// Look for a certificate of unique completability.
    Unique(PatternArgs),
    /// Generic Jacobian rank of the sampled polynomial system.
    Oracle(PatternArgs),
    /// Dump the constraint matrix; writes `<out>.prov` alongside when `--out` is set.
    BuildConstraint(PatternArgs),
    /// Closed-form sample and probability bounds.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50_000)]
        m1: usize,
        #[arg(long, default_value_t = 50_000)]
        m2: usize,
        #[arg(long)]
        ranks: RankTriple,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical representative of a basis (dense text in, dense text out).
    Canonicalize {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        ranks: RankTriple,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Proposed versus baseline sample bounds at r1 = r2, one file per r.
    Sweep {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 50_000)]
        m1: usize,
        #[arg(long, default_value_t = 50_000)]
        m2: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "40,60,100")]
        r: Vec<usize>,
    },
    /// Monte-Carlo success rate over samples per column.
    Phase {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
        #[arg(long)]
        ranks: RankTriple,
        #[arg(long)]
        l_min: usize,
        #[arg(long)]
        l_max: usize,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, value_enum, default_value_t = Mode::Finite)]
        mode: Mode,
        /// Also run the combinatorial checker in finite mode.
        #[arg(long)]
        with_checker: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write every trial record as JSON.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    kind: &'a str,
    message: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<mvcomp::Error>())
                .map_or_else(
                    || {
                        if e.chain().any(|c| c.is::<std::io::Error>()) {
                            "io-error"
                        } else {
                            "error"
                        }
                    },
                    |m| m.kind(),
                );
            let body = ErrorBody {
                error: ErrorDetail {
                    kind,
                    message: format!("{e:#}"),
                },
            };
            eprintln!("{}", serde_json::to_string(&body).expect("error serializes"));
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    #[cfg(feature = "parallel")]
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = g.threads;

    match &cli.command {
        Command::Check(a) | Command::Unique(a) => {
            let unique = matches!(cli.command, Command::Unique(_));
            let pattern = read_pattern(&a.pattern)?;
            let cm = build_constraint(&pattern, a.ranks)?;
            let cfg = check_config(g);
            let verdict = if unique {
                check_unique(&cm, &cfg)
            } else {
                check_finite(&cm, &cfg)
            };
            let report = verdict.report(&cm);
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => json(&report)?,
                Format::Csv => {
                    let cert = report.certificate.as_ref().map_or(0, Vec::len);
                    format!(
                        "status,budget,columns,certificate_size,upper_bound\n{},{},{},{},{}\n",
                        report.status,
                        report.budget,
                        report.columns,
                        cert,
                        report.upper_bound.map_or(String::new(), |u| u.to_string())
                    )
                }
            };
            emit(a.out.as_deref(), &text)?;
            Ok(if verdict.status == Status::Unknown { EXIT_UNKNOWN } else { 0 })
        }
        Command::Oracle(a) => {
            let pattern = read_pattern(&a.pattern)?;
            let report = finiteness_oracle(&pattern, a.ranks, &oracle_config(g)?)?;
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => json(&report)?,
                Format::Csv => format!(
                    "verdict,rank,variables,equations,basis_variables\n{:?},{},{},{},{}\n",
                    report.verdict, report.rank, report.variables, report.equations, report.basis_variables
                ),
            };
            emit(a.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::BuildConstraint(a) => {
            let pattern = read_pattern(&a.pattern)?;
            let cm = build_constraint(&pattern, a.ranks)?;
            emit(a.out.as_deref(), &cm.to_dense_text())?;
            if let Some(out) = &a.out {
                let mut prov = out.clone().into_os_string();
                prov.push(".prov");
                fs::write(&prov, cm.provenance_text()).with_context(|| format!("writing {prov:?}"))?;
            }
            Ok(0)
        }
        Command::Bounds {
            n,
            m1,
            m2,
            ranks,
            eps,
            out,
        } => {
            let shape = ProblemShape::new(*n, *m1, *m2)?;
            let report = bound_report(&shape, *ranks, *eps, log_base(g.log_base))?;
            let text = match g.format.unwrap_or(Format::Json) {
                Format::Json => json(&report)?,
                Format::Csv => format!(
                    "l_finite,l_unique,l_baseline,p_finite,p_unique,success_prob_bernoulli\n{},{},{},{},{},{}\n",
                    report.l_finite,
                    report.l_unique,
                    report.l_baseline,
                    report.p_finite,
                    report.p_unique,
                    report.success_prob_bernoulli
                ),
            };
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Canonicalize { basis, ranks, out } => {
            let text = fs::read_to_string(basis).with_context(|| format!("reading {}", basis.display()))?;
            let v = parse_dense_matrix(&text)?;
            let c = canonicalize(&v, *ranks)?;
            emit(out.as_deref(), &format_dense_matrix(&c.v))?;
            Ok(0)
        }
        Command::Sweep {
            out_dir,
            n,
            m1,
            m2,
            eps,
            r,
        } => {
            let shape = ProblemShape::new(*n, *m1, *m2)?;
            fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            for &rv in r {
                let rows = figure3_sweep(&shape, rv, *eps, log_base(g.log_base))?;
                let (name, text) = match g.format.unwrap_or(Format::Csv) {
                    Format::Csv => (format!("figure3_r{rv}.csv"), sweep_csv(&rows)?),
                    Format::Json => (format!("figure3_r{rv}.json"), json(&rows)?),
                };
                write_file(&out_dir.join(name), &text)?;
            }
            Ok(0)
        }
        Command::Phase {
            n,
            m1,
            m2,
            ranks,
            l_min,
            l_max,
            runs,
            mode,
            with_checker,
            out_dir,
            records,
        } => {
            if l_min > l_max {
                bail!("--l-min {l_min} exceeds --l-max {l_max}");
            }
            let mode = match mode {
                Mode::Finite => PhaseMode::Finite,
                Mode::Unique => PhaseMode::Unique,
            };
            let cfg = PhaseConfig {
                shape: ProblemShape::new(*n, *m1, *m2)?,
                ranks: *ranks,
                l_values: (*l_min..=*l_max).collect(),
                trials: *runs,
                seed: g.seed,
                mode,
                run_checker: *with_checker,
                oracle: oracle_config(g)?,
                check: check_config(g),
                exec: Exec::default(),
            };
            let (points, trial_records) = phase_transition(&cfg)?;
            fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let (name, text) = match g.format.unwrap_or(Format::Csv) {
                Format::Csv => (format!("phase_{}.csv", mode.name()), phase_csv(&points)?),
                Format::Json => (format!("phase_{}.json", mode.name()), json(&points)?),
            };
            write_file(&out_dir.join(name), &text)?;
            if let Some(path) = records {
                write_file(path, &json(&trial_records)?)?;
            }
            Ok(0)
        }
    }
}

fn check_config(g: &Global) -> CheckConfig {
    CheckConfig {
        strategy: SearchStrategy::Exhaustive,
        max_search_nodes: g.max_enum,
        strict_subsets: g.strict_subsets,
        seed: g.seed,
        ..CheckConfig::default()
    }
}

fn oracle_config(g: &Global) -> Result<OracleConfig> {
    let cfg = OracleConfig {
        arithmetic: match g.arith {
            Arith::Prime => Arithmetic::PrimeField(g.prime),
            Arith::Float => Arithmetic::Float(g.svd_tol),
        },
        trials: g.trials,
        seed: g.seed,
        exec: Exec::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn log_base(b: Base) -> LogBase {
    match b {
        Base::E => LogBase::E,
        Base::Two => LogBase::Two,
        Base::Ten => LogBase::Ten,
    }
}

fn read_pattern(path: &Path) -> Result<SamplingPattern> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(load_pattern(&text)?)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}
