//! Independent check of finite completability through the generic rank of
//! the Jacobian of the sampled polynomial system.
//!
//! The pattern is finitely completable exactly when the Jacobian has full
//! column rank at a generic point of the canonical chart. A uniformly random
//! point over a large prime field (or a Gaussian point in floating point) is
//! generic with overwhelming probability; several trials take the maximum.

pub(crate) mod arith;
pub mod field;
pub mod system;

use serde::Serialize;

use crate::constraint::{ColumnSubset, ConstraintMatrix};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::pattern::{seeded_rng, SamplingPattern};
use crate::ranks::{first_assumption1_violation, RankTriple};

use arith::{ModP, Ops, Real};
use field::{PrimeField, MERSENNE_31};
pub use system::{build_system, build_system_for_entries, Equation, PolynomialSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arithmetic {
    /// Exact rank over `GF(p)`.
    PrimeField(u64),
    /// Numerical rank: singular values above `tol * sigma_max`.
    Float(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub arithmetic: Arithmetic,
    pub trials: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            arithmetic: Arithmetic::PrimeField(MERSENNE_31),
            trials: 3,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidOracleConfig("trials must be positive".into()));
        }
        match self.arithmetic {
            Arithmetic::PrimeField(p) => {
                if PrimeField::new(p).is_none() {
                    return Err(Error::InvalidOracleConfig(format!(
                        "{p} is not a prime in (2^30, 2^63)"
                    )));
                }
            }
            Arithmetic::Float(tol) => {
                if !(tol > 0.0 && tol < 1e-2) {
                    return Err(Error::InvalidOracleConfig(format!(
                        "SVD tolerance {tol} is outside (0, 1e-2)"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Runs `f` with the configured arithmetic.
macro_rules! with_ops {
    ($config:expr, $ops:ident => $body:expr) => {
        match $config.arithmetic {
            Arithmetic::PrimeField(p) => {
                let $ops = ModP(PrimeField::new(p).expect("validated prime"));
                $body
            }
            Arithmetic::Float(tol) => {
                let $ops = Real { tol };
                $body
            }
        }
    };
}

/// Rank of the selected rows at `trials` points drawn from stream `stream`.
fn trial_ranks<O: Ops>(
    system: &PolynomialSystem,
    selected: &[usize],
    ops: &O,
    config: &OracleConfig,
    stream: u64,
) -> Vec<usize> {
    let trials: Vec<u64> = (0..config.trials as u64).collect();
    config.exec.map(trials, |t| {
        let mut rng = seeded_rng(config.seed, stream.wrapping_mul(1 << 20).wrapping_add(t));
        let pt = system.draw_point(ops, &mut rng);
        let jac = system.jacobian(selected, ops, &pt);
        ops.rank(jac, system.variable_count())
    })
}

/// Per-trial ranks and the generic rank they imply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankDetails {
    pub rank: usize,
    pub trial_ranks: Vec<usize>,
    /// True when the trials disagreed and a second batch was drawn.
    pub reseeded: bool,
}

fn generic_rank_of(
    system: &PolynomialSystem,
    selected: &[usize],
    config: &OracleConfig,
) -> Result<RankDetails> {
    config.validate()?;
    with_ops!(config, ops => {
        let first = trial_ranks(system, selected, &ops, config, 0);
        let max1 = first.iter().copied().max().unwrap_or(0);
        if first.iter().all(|&r| r == max1) {
            return Ok(RankDetails { rank: max1, trial_ranks: first, reseeded: false });
        }
        let second = trial_ranks(system, selected, &ops, config, 1);
        let max2 = second.iter().copied().max().unwrap_or(0);
        if max1 != max2 {
            return Err(Error::DegenerateRandomPoint { first: max1, second: max2 });
        }
        let mut all = first;
        all.extend(second);
        Ok(RankDetails { rank: max1, trial_ranks: all, reseeded: true })
    })
}

/// Maximum Jacobian rank over the configured random points.
pub fn jacobian_generic_rank(system: &PolynomialSystem, config: &OracleConfig) -> Result<usize> {
    let all: Vec<usize> = (0..system.equation_count()).collect();
    generic_rank_of(system, &all, config).map(|d| d.rank)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Completability {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub verdict: Completability,
    pub rank: usize,
    pub variables: usize,
    pub equations: usize,
    pub basis_variables: usize,
    pub trial_ranks: Vec<usize>,
    pub reseeded: bool,
}

/// Finite iff the Jacobian of all sampled entries has full column rank.
pub fn finiteness_oracle(
    pattern: &SamplingPattern,
    ranks: RankTriple,
    config: &OracleConfig,
) -> Result<OracleReport> {
    if let Some(e) = first_assumption1_violation(pattern, ranks) {
        return Err(e);
    }
    let system = build_system(pattern, ranks)?;
    let all: Vec<usize> = (0..system.equation_count()).collect();
    let details = generic_rank_of(&system, &all, config)?;
    let variables = system.variable_count();
    Ok(OracleReport {
        verdict: if details.rank == variables {
            Completability::Finite
        } else {
            Completability::Infinite
        },
        rank: details.rank,
        variables,
        equations: system.equation_count(),
        basis_variables: system.basis_variables(),
        trial_ranks: details.trial_ranks,
        reseeded: details.reseeded,
    })
}

/// Number of algebraically independent polynomials among the columns of
/// `subset`: the generic rank of their equations together with the pivot
/// equations of every source column they touch, minus the pivot count.
pub fn independent_count(subset: &ColumnSubset<'_>, config: &OracleConfig) -> Result<usize> {
    let cm = subset.parent();
    let mut entries = Vec::new();
    let mut pivots = 0;
    let mut touched = vec![false; cm.shape().columns()];
    for c in subset.indices() {
        let col = cm.column(c);
        if !touched[col.source_column] {
            touched[col.source_column] = true;
            pivots += col.pivot_rows.len();
            entries.extend(col.pivot_rows.iter().map(|&x| (x, col.source_column)));
        }
        entries.push((col.extra_row, col.source_column));
    }
    let system = build_system_for_entries(cm.shape(), cm.ranks(), entries)?;
    let all: Vec<usize> = (0..system.equation_count()).collect();
    let rank = generic_rank_of(&system, &all, config)?.rank;
    Ok(rank.saturating_sub(pivots))
}

/// Precomputed random evaluations for answering many
/// [`independent_count`] queries on one constraint matrix quickly.
///
/// Each constraint column's equation is reduced against the pivot equations
/// of its source column, which removes the coefficient unknowns; the count
/// for a subset is then the rank of its reduced rows.
pub struct IndependenceProbe {
    trials: Vec<ProbeTrial>,
    basis_variables: usize,
}

enum ProbeTrial {
    ModP(ModP, Vec<Vec<u64>>),
    Real(Real, Vec<Vec<f64>>),
}

fn reduced_rows<O: Ops>(
    system: &PolynomialSystem,
    cm: &ConstraintMatrix,
    ops: &O,
    config: &OracleConfig,
    trial: u64,
) -> Option<Vec<Vec<O::T>>> {
    let mut rng = seeded_rng(config.seed, (2 << 20) + trial);
    let pt = system.draw_point(ops, &mut rng);
    cm.columns()
        .iter()
        .map(|col| {
            system.reduced_gradient(ops, &pt, col.view, col.source_column, &col.pivot_rows, col.extra_row)
        })
        .collect()
}

impl IndependenceProbe {
    pub fn new(cm: &ConstraintMatrix, config: &OracleConfig) -> Result<Self> {
        config.validate()?;
        let system = build_system_for_entries(cm.shape(), cm.ranks(), std::iter::empty())?;
        let mut trials = Vec::with_capacity(config.trials);
        for t in 0..config.trials as u64 {
            let trial = match config.arithmetic {
                Arithmetic::PrimeField(p) => {
                    let ops = ModP(PrimeField::new(p).expect("validated prime"));
                    reduced_rows(&system, cm, &ops, config, t).map(|rows| ProbeTrial::ModP(ops, rows))
                }
                Arithmetic::Float(tol) => {
                    let ops = Real { tol };
                    reduced_rows(&system, cm, &ops, config, t).map(|rows| ProbeTrial::Real(ops, rows))
                }
            };
            // A singular pivot block means the point was not generic; skip it.
            trials.extend(trial);
        }
        if trials.is_empty() {
            return Err(Error::DegenerateRandomPoint { first: 0, second: 0 });
        }
        Ok(IndependenceProbe {
            trials,
            basis_variables: system.basis_variables(),
        })
    }

    /// Independent polynomials among the given constraint columns.
    pub fn count(&self, columns: &[usize]) -> usize {
        self.trials
            .iter()
            .map(|t| match t {
                ProbeTrial::ModP(ops, rows) => {
                    ops.rank(columns.iter().map(|&c| rows[c].clone()).collect(), self.basis_variables)
                }
                ProbeTrial::Real(ops, rows) => {
                    ops.rank(columns.iter().map(|&c| rows[c].clone()).collect(), self.basis_variables)
                }
            })
            .max()
            .unwrap_or(0)
    }
}
