//! Bound sweeps and Monte-Carlo phase-transition runs.

use std::time::Instant;

use rand::RngCore;
use serde::Serialize;

use crate::bounds::{baseline_sample_bound_detail, check_dimension_assumptions, finite_sample_bound_detail, LogBase};
use crate::checker::{check_finite, check_unique, CheckConfig, Status};
use crate::constraint::build_constraint;
use crate::error::Result;
use crate::exec::Exec;
use crate::oracle::{finiteness_oracle, Completability, OracleConfig};
use crate::pattern::{gen_fixed_per_column, seeded_rng};
use crate::ranks::{first_assumption1_violation, ProblemShape, RankTriple};

/// One point of the proposed-versus-baseline comparison at `r1 = r2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub r1: usize,
    pub l_proposed: u64,
    pub l_baseline: u64,
    pub assumptions_ok: bool,
}

/// Sample bounds for every `r1 = r2` from `ceil(r/2)` to `r`.
pub fn figure3_sweep(shape: &ProblemShape, r: usize, eps: f64, base: LogBase) -> Result<Vec<SweepRow>> {
    (r.div_ceil(2)..=r)
        .map(|r1| {
            let ranks = RankTriple::new(r, r1, r1)?;
            Ok(SweepRow {
                r1,
                l_proposed: finite_sample_bound_detail(shape.n, ranks, eps, base)?.l,
                l_baseline: baseline_sample_bound_detail(shape.n, ranks, eps, base)?.l,
                assumptions_ok: check_dimension_assumptions(shape, ranks, false)
                    .iter()
                    .all(|c| c.holds),
            })
        })
        .collect()
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| csv_err(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Parse {
        line: 0,
        message: format!("csv: {e}"),
    }
}

/// CSV with header `r1,l_proposed,l_baseline,assumptions_ok`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    to_csv(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseMode {
    Finite,
    Unique,
}

impl PhaseMode {
    pub fn name(self) -> &'static str {
        match self {
            PhaseMode::Finite => "finite",
            PhaseMode::Unique => "unique",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhaseConfig {
    pub shape: ProblemShape,
    pub ranks: RankTriple,
    pub l_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub mode: PhaseMode,
    /// Also run the combinatorial checker in finite mode (always run in
    /// unique mode, which has no oracle counterpart).
    pub run_checker: bool,
    pub oracle: OracleConfig,
    pub check: CheckConfig,
    pub exec: Exec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    pub ranks: [usize; 3],
    pub l: usize,
    /// Every column has at least `r_v` samples.
    pub assumption1_ok: bool,
    pub checker_verdict: Option<Status>,
    pub oracle_verdict: Option<Completability>,
    pub wall_time_ms: f64,
}

impl TrialRecord {
    fn success(&self, mode: PhaseMode) -> Option<bool> {
        if !self.assumption1_ok {
            return None;
        }
        match mode {
            PhaseMode::Finite => self.oracle_verdict.map(|v| v == Completability::Finite),
            // The uniqueness search never refutes, so an uncertified trial
            // counts against the certified rate.
            PhaseMode::Unique => self.checker_verdict.map(|s| s == Status::UniqueCertified),
        }
    }

    fn unknown(&self) -> bool {
        self.checker_verdict == Some(Status::Unknown)
    }
}

/// Aggregate over the trials at one `l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    pub l: usize,
    /// Successes over decided trials. In unique mode this is the certified
    /// fraction, a lower bound on the unique-completability rate.
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Checker `Unknown` fraction among trials satisfying Assumption 1.
    pub unknown_rate: f64,
    /// Decided trials: Assumption 1 holds and the deciding procedure gave an answer.
    pub trials: usize,
    #[serde(skip)]
    pub assumption1_failures: usize,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()) / denom;
    // The bounds are exactly 0 and 1 at the extremes; avoid rounding residue.
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Seed of trial `t` at sample count `l`; independent of scheduling.
pub fn trial_seed(seed: u64, l: usize, t: usize) -> u64 {
    seeded_rng(seed, ((l as u64) << 32) | t as u64).next_u64()
}

fn run_trial(cfg: &PhaseConfig, l: usize, t: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let seed = trial_seed(cfg.seed, l, t);
    let pattern = gen_fixed_per_column(cfg.shape, l, seed)?;
    let ranks = cfg.ranks;
    let mut record = TrialRecord {
        seed,
        n: cfg.shape.n,
        ranks: [ranks.r(), ranks.r1(), ranks.r2()],
        l,
        assumption1_ok: first_assumption1_violation(&pattern, ranks).is_none(),
        checker_verdict: None,
        oracle_verdict: None,
        wall_time_ms: 0.0,
    };
    if record.assumption1_ok {
        if cfg.mode == PhaseMode::Finite {
            let oracle = OracleConfig {
                seed,
                exec: Exec::Sequential,
                ..cfg.oracle.clone()
            };
            record.oracle_verdict = Some(finiteness_oracle(&pattern, ranks, &oracle)?.verdict);
        }
        if cfg.run_checker || cfg.mode == PhaseMode::Unique {
            let cm = build_constraint(&pattern, ranks)?;
            let check = CheckConfig {
                seed,
                ..cfg.check.clone()
            };
            record.checker_verdict = Some(match cfg.mode {
                PhaseMode::Finite => check_finite(&cm, &check).status,
                PhaseMode::Unique => check_unique(&cm, &check).status,
            });
        }
    }
    record.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(record)
}

/// Every trial record, ordered by `l` and then trial index.
pub fn phase_trials(cfg: &PhaseConfig) -> Result<Vec<TrialRecord>> {
    let jobs: Vec<(usize, usize)> = cfg
        .l_values
        .iter()
        .flat_map(|&l| (0..cfg.trials).map(move |t| (l, t)))
        .collect();
    cfg.exec
        .map(jobs, |(l, t)| run_trial(cfg, l, t))
        .into_iter()
        .collect()
}

/// Aggregates trial records into one point per `l`, in `l_values` order.
pub fn summarize(records: &[TrialRecord], l_values: &[usize], mode: PhaseMode) -> Vec<PhasePoint> {
    l_values
        .iter()
        .map(|&l| {
            let at: Vec<&TrialRecord> = records.iter().filter(|r| r.l == l).collect();
            let valid = at.iter().filter(|r| r.assumption1_ok).count();
            let decided: Vec<bool> = at.iter().filter_map(|r| r.success(mode)).collect();
            let successes = decided.iter().filter(|&&s| s).count();
            let unknown = at.iter().filter(|r| r.unknown()).count();
            let (ci_low, ci_high) = wilson_interval(successes, decided.len());
            PhasePoint {
                l,
                success_rate: if decided.is_empty() {
                    0.0
                } else {
                    successes as f64 / decided.len() as f64
                },
                ci_low,
                ci_high,
                unknown_rate: if valid == 0 { 0.0 } else { unknown as f64 / valid as f64 },
                trials: decided.len(),
                assumption1_failures: at.len() - valid,
            }
        })
        .collect()
}

/// Runs the trials and aggregates them.
pub fn phase_transition(cfg: &PhaseConfig) -> Result<(Vec<PhasePoint>, Vec<TrialRecord>)> {
    let records = phase_trials(cfg)?;
    Ok((summarize(&records, &cfg.l_values, cfg.mode), records))
}

/// CSV with header `l,success_rate,ci_low,ci_high,unknown_rate,trials`.
pub fn phase_csv(points: &[PhasePoint]) -> Result<String> {
    to_csv(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_shape() -> ProblemShape {
        ProblemShape::new(500, 50_000, 50_000).unwrap()
    }

    #[test]
    fn sweep_rows_and_header() {
        let rows = figure3_sweep(&figure_shape(), 100, 1e-4, LogBase::E).unwrap();
        assert_eq!(rows.len(), 51);
        assert_eq!(rows[0].r1, 50);
        assert_eq!((rows[0].l_proposed, rows[0].l_baseline), (188, 201));
        let csv = sweep_csv(&rows).unwrap();
        assert!(csv.starts_with("r1,l_proposed,l_baseline,assumptions_ok\n50,188,201,true\n"));
        assert_eq!(figure3_sweep(&figure_shape(), 41, 1e-4, LogBase::E).unwrap()[0].r1, 21);
    }

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    fn small_config(mode: PhaseMode, exec: Exec) -> PhaseConfig {
        PhaseConfig {
            shape: ProblemShape::new(6, 4, 4).unwrap(),
            ranks: RankTriple::new(2, 1, 2).unwrap(),
            l_values: vec![1, 3, 6],
            trials: 6,
            seed: 9,
            mode,
            run_checker: true,
            oracle: OracleConfig::default(),
            check: CheckConfig::default(),
            exec,
        }
    }

    #[test]
    fn full_observation_always_succeeds() {
        let (points, records) = phase_transition(&small_config(PhaseMode::Finite, Exec::Sequential)).unwrap();
        assert_eq!(records.len(), 18);
        let last = points.last().unwrap();
        assert_eq!((last.l, last.success_rate, last.trials), (6, 1.0, 6));
        // l = 1 fails Assumption 1 in view 2 every time.
        assert_eq!((points[0].trials, points[0].assumption1_failures), (0, 6));
        let csv = phase_csv(&points).unwrap();
        assert!(csv.starts_with("l,success_rate,ci_low,ci_high,unknown_rate,trials\n"));
    }

    #[test]
    fn schedule_independent() {
        let strip = |mut v: Vec<TrialRecord>| {
            v.iter_mut().for_each(|r| r.wall_time_ms = 0.0);
            v
        };
        for mode in [PhaseMode::Finite, PhaseMode::Unique] {
            let a = phase_trials(&small_config(mode, Exec::Sequential)).unwrap();
            let b = phase_trials(&small_config(mode, Exec::Parallel)).unwrap();
            assert_eq!(strip(a), strip(b));
        }
    }

    #[test]
    fn checker_agrees_with_oracle_in_trials() {
        let (_, records) = phase_transition(&small_config(PhaseMode::Finite, Exec::default())).unwrap();
        for r in records.iter().filter(|r| r.assumption1_ok) {
            match (r.checker_verdict.unwrap(), r.oracle_verdict.unwrap()) {
                (Status::Unknown, _) => {}
                (s, o) => assert_eq!(s == Status::Finite, o == Completability::Finite, "{r:?}"),
            }
        }
    }
}
