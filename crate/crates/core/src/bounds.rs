//! Closed-form sampling guarantees.
//!
//! Sample bounds are strict (`l > x`), so the reported integer is the
//! smallest one strictly above the real-valued expression. Logarithm terms
//! whose rank argument is zero are skipped: the corresponding variable group
//! is empty.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ranks::{ProblemShape, RankTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LogBase {
    #[default]
    E,
    Two,
    Ten,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            "10" => Ok(LogBase::Ten),
            other => Err(Error::Parse {
                line: 0,
                message: format!("log base must be e, 2 or 10, got `{other}`"),
            }),
        }
    }
}

/// One `log(c * r / eps)` term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogTerm {
    pub name: &'static str,
    pub rank: usize,
    pub value: f64,
}

/// A sample bound with every intermediate quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBound {
    /// Smallest admissible number of samples per column.
    pub l: u64,
    /// The real-valued maximum that `l` must strictly exceed.
    pub threshold: f64,
    /// `log(n / eps)`.
    pub log_n: f64,
    pub log_terms: Vec<LogTerm>,
    /// Value of the logarithmic branch of the maximum.
    pub log_branch: f64,
    /// Which branch attains the maximum: `log`, `2r1`, `2r2` or `2r`.
    pub branch: &'static str,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(eps))
    }
}

/// Smallest integer strictly greater than `x` (for `x >= 0`).
fn strictly_above(x: f64) -> u64 {
    x.floor() as u64 + 1
}

fn pick_branch(candidates: &[(&'static str, f64)]) -> (&'static str, f64) {
    candidates
        .iter()
        .copied()
        .fold(("log", f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

/// `9 log(n/eps) + 3 max_k log(c k / eps) + 6` against `2 r1`, `2 r2`.
fn proposed(n: usize, ranks: RankTriple, eps: f64, factor: f64, base: LogBase) -> Result<SampleBound> {
    check_eps(eps)?;
    let d = ranks.derived();
    let log_n = base.log(n as f64 / eps);
    let log_terms: Vec<LogTerm> = [("r1'", d.r1p), ("r2'", d.r2p), ("r'", d.rp)]
        .into_iter()
        .filter(|&(_, k)| k > 0)
        .map(|(name, k)| LogTerm {
            name,
            rank: k,
            value: base.log(factor * k as f64 / eps),
        })
        .collect();
    let inner = log_terms.iter().map(|t| t.value).fold(None, |acc: Option<f64>, v| {
        Some(acc.map_or(v, |a| a.max(v)))
    });
    let log_branch = 9.0 * log_n + 3.0 * inner.unwrap_or(0.0) + 6.0;
    let (branch, threshold) = pick_branch(&[
        ("log", log_branch),
        ("2r1", 2.0 * ranks.r1() as f64),
        ("2r2", 2.0 * ranks.r2() as f64),
    ]);
    Ok(SampleBound {
        l: strictly_above(threshold),
        threshold,
        log_n,
        log_terms,
        log_branch,
        branch,
    })
}

pub fn finite_sample_bound_detail(n: usize, ranks: RankTriple, eps: f64, base: LogBase) -> Result<SampleBound> {
    proposed(n, ranks, eps, 3.0, base)
}

pub fn unique_sample_bound_detail(n: usize, ranks: RankTriple, eps: f64, base: LogBase) -> Result<SampleBound> {
    proposed(n, ranks, eps, 6.0, base)
}

/// `max{12 log(n/eps), 2 r1, 2 r2, 2 r}`: the single-view style baseline.
pub fn baseline_sample_bound_detail(n: usize, ranks: RankTriple, eps: f64, base: LogBase) -> Result<SampleBound> {
    check_eps(eps)?;
    let log_n = base.log(n as f64 / eps);
    let log_branch = 12.0 * log_n;
    let (branch, threshold) = pick_branch(&[
        ("log", log_branch),
        ("2r1", 2.0 * ranks.r1() as f64),
        ("2r2", 2.0 * ranks.r2() as f64),
        ("2r", 2.0 * ranks.r() as f64),
    ]);
    Ok(SampleBound {
        l: strictly_above(threshold),
        threshold,
        log_n,
        log_terms: Vec::new(),
        log_branch,
        branch,
    })
}

/// Samples per column guaranteeing finite completability with probability
/// at least `1 - eps` (natural log).
pub fn finite_sample_bound(n: usize, ranks: RankTriple, eps: f64) -> Result<u64> {
    finite_sample_bound_detail(n, ranks, eps, LogBase::E).map(|b| b.l)
}

/// Samples per column guaranteeing unique completability with probability
/// at least `1 - eps` (natural log).
pub fn unique_sample_bound(n: usize, ranks: RankTriple, eps: f64) -> Result<u64> {
    unique_sample_bound_detail(n, ranks, eps, LogBase::E).map(|b| b.l)
}

pub fn baseline_sample_bound(n: usize, ranks: RankTriple, eps: f64) -> Result<u64> {
    baseline_sample_bound_detail(n, ranks, eps, LogBase::E).map(|b| b.l)
}

/// Per-entry observation probability threshold: the sample-bound maximum
/// over `n` plus `n^(-1/4)`. May exceed 1, meaning the bound is vacuous.
pub fn probability_bound(n: usize, ranks: RankTriple, eps: f64, unique: bool, base: LogBase) -> Result<f64> {
    let b = if unique {
        unique_sample_bound_detail(n, ranks, eps, base)?
    } else {
        finite_sample_bound_detail(n, ranks, eps, base)?
    };
    let n = n as f64;
    Ok(b.threshold / n + n.powf(-0.25))
}

/// Natural-log version of [`probability_bound`].
pub fn probability_bounds(n: usize, ranks: RankTriple, eps: f64, unique: bool) -> Result<f64> {
    probability_bound(n, ranks, eps, unique, LogBase::E)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Dimension requirements of the probabilistic guarantees; `unique` adds one
/// to the per-view multipliers.
pub fn check_dimension_assumptions(shape: &ProblemShape, ranks: RankTriple, unique: bool) -> Vec<AssumptionCheck> {
    let d = ranks.derived();
    let n = shape.n as u128;
    let bump = u128::from(unique);
    let need1 = (d.r1p as u128 + bump) * (n - ranks.r1().min(shape.n) as u128);
    let need2 = (d.r2p as u128 + bump) * (n - ranks.r2().min(shape.n) as u128);
    let need3 = d.rp as u128 * (n - d.rp.min(shape.n) as u128);
    let max_rank = ranks.r1().max(ranks.r2()).max(d.rp) as u128;
    let check = |name, lhs: u128, rhs: u128| AssumptionCheck {
        name,
        lhs: lhs as f64,
        rhs: rhs as f64,
        holds: lhs >= rhs,
    };
    vec![
        AssumptionCheck {
            name: "n/6 >= max(r1, r2, r')",
            lhs: shape.n as f64 / 6.0,
            rhs: max_rank as f64,
            holds: n >= 6 * max_rank,
        },
        check("m1 per-view count", shape.m1 as u128, need1),
        check("m2 per-view count", shape.m2 as u128, need2),
        check("m1 + m2 combined count", (shape.m1 + shape.m2) as u128, need1 + need2 + need3),
    ]
}

/// `(1 - eps) (1 - exp(-sqrt(n)/2))^columns`, the success probability under
/// independent per-entry sampling.
pub fn bernoulli_success_probability(n: usize, columns: usize, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    let per_column = 1.0 - (-(n as f64).sqrt() / 2.0).exp();
    Ok((1.0 - eps) * per_column.powf(columns as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
    pub ranks: [usize; 3],
    pub eps: f64,
    pub log_base: LogBase,
    pub l_finite: u64,
    pub l_unique: u64,
    pub l_baseline: u64,
    pub p_finite: f64,
    pub p_unique: f64,
    pub assumptions_finite: Vec<AssumptionCheck>,
    pub assumptions_unique: Vec<AssumptionCheck>,
    pub success_prob_bernoulli: f64,
    pub finite_detail: SampleBound,
    pub unique_detail: SampleBound,
    pub baseline_detail: SampleBound,
}

pub fn bound_report(shape: &ProblemShape, ranks: RankTriple, eps: f64, base: LogBase) -> Result<BoundReport> {
    let finite = finite_sample_bound_detail(shape.n, ranks, eps, base)?;
    let unique = unique_sample_bound_detail(shape.n, ranks, eps, base)?;
    let baseline = baseline_sample_bound_detail(shape.n, ranks, eps, base)?;
    Ok(BoundReport {
        n: shape.n,
        m1: shape.m1,
        m2: shape.m2,
        ranks: [ranks.r(), ranks.r1(), ranks.r2()],
        eps,
        log_base: base,
        l_finite: finite.l,
        l_unique: unique.l,
        l_baseline: baseline.l,
        p_finite: probability_bound(shape.n, ranks, eps, false, base)?,
        p_unique: probability_bound(shape.n, ranks, eps, true, base)?,
        assumptions_finite: check_dimension_assumptions(shape, ranks, false),
        assumptions_unique: check_dimension_assumptions(shape, ranks, true),
        success_prob_bernoulli: bernoulli_success_probability(shape.n, shape.columns(), eps)?,
        finite_detail: finite,
        unique_detail: unique,
        baseline_detail: baseline,
    })
}
