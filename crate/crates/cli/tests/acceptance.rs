//! Acceptance criteria 1-10, one pass/fail line each. Exits non-zero if any
//! criterion fails or exceeds its time limit.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use mvcomp::basis::{canonical_deviation, canonicalize, is_span_equivalent};
use mvcomp::checker::{check_unique, count_bound};
use mvcomp::constraint::split_by_view;
use mvcomp::experiments::{phase_transition, PhaseConfig, PhaseMode};
use mvcomp::oracle::{build_system, finiteness_oracle, jacobian_generic_rank, Completability, IndependenceProbe};
use mvcomp::pattern::{gen_fixed_per_column, gen_generic_instance};
use mvcomp::{
    basis_dof, build_constraint, check_finite, load_pattern, seeded_rng, CheckConfig, Error, Exec, OracleConfig,
    ProblemShape, RankTriple, SamplingPattern, Status,
};

const MOTIVATING: &str = "4 2 2\ndense\n1111\n1011\n1010\n0011\n";
const GOLDEN: &str = "4 2 3\ndense\n11111\n10111\n01100\n00011\n";

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ranks(r: usize, r1: usize, r2: usize) -> RankTriple {
    RankTriple::new(r, r1, r2).unwrap()
}

fn mvcomp_bin(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_mvcomp"))
        .args(args)
        .output()
        .map_err(|e| format!("running mvcomp: {e}"))
}

fn write_motivating(dir: &Path) -> String {
    let p = dir.join("motivating.pat");
    std::fs::write(&p, MOTIVATING).unwrap();
    p.to_str().unwrap().to_owned()
}

fn golden_constraint_matrix() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pat = write_motivating(dir.path());
    let out = mvcomp_bin(&["build-constraint", "--pattern", &pat, "--ranks", "2,1,2"])?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || format!("exit {:?}", out.status.code()))?;
    ensure(text == GOLDEN, || format!("dump differs:\n{text}"))?;
    Ok("dense dump is byte-identical to the 4x5 example".into())
}

fn check_output(pat: &str) -> Result<Vec<u8>, String> {
    let out = mvcomp_bin(&["check", "--pattern", pat, "--ranks", "2,1,2", "--seed", "7"])?;
    ensure(out.status.code() == Some(0), || format!("exit {:?}", out.status.code()))?;
    Ok(out.stdout)
}

fn motivating_subsets() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pat = write_motivating(dir.path());
    let v: serde_json::Value = serde_json::from_slice(&check_output(&pat)?).map_err(|e| e.to_string())?;
    ensure(v["status"] == "Finite", || format!("status {}", v["status"]))?;
    let cert = v["certificate"].as_array().map_or(0, Vec::len);
    ensure(cert == 5, || format!("certificate has {cert} columns"))?;

    // All 2^5 subsets, grouped by the three cases on g of the view-2 part.
    let t = ranks(2, 1, 2);
    let cm = build_constraint(&load_pattern(MOTIVATING).unwrap(), t).unwrap();
    let mut cases = [0usize; 3];
    for mask in 1u32..32 {
        let sub = cm.subset((0..5).filter(|i| mask >> i & 1 == 1));
        let c = sub.len();
        let f = count_bound(&sub, t);
        ensure(f >= c, || format!("subset {mask:05b}: bound {f} < {c}"))?;
        let (_, second) = split_by_view(&sub);
        let g2 = second.row_union().count_ones(..);
        let g = sub.row_union().count_ones(..);
        let case = match g2 {
            0 => 0,
            3 => 1,
            4 => 2,
            other => return Err(format!("unexpected g2 = {other}")),
        };
        cases[case] += 1;
        if case == 2 {
            ensure(g == 4 && f == 5, || format!("case g2=4 gives g={g}, bound {f}"))?;
        }
    }
    Ok(format!(
        "Finite, 5-column certificate; 31 subsets pass (case sizes {:?}, g2=4 case bound 2+3=5)",
        cases
    ))
}

fn checker_oracle_consistency() -> Outcome {
    let triples = [
        (2, 1, 2),
        (2, 2, 2),
        (3, 2, 2),
        (3, 2, 3),
        (3, 3, 3),
        (4, 3, 3),
        (4, 2, 3),
        (3, 1, 2),
        (2, 1, 1),
        (4, 2, 2),
    ];
    let jobs: Vec<u64> = (0..200).collect();
    let results = Exec::default().map(jobs, |i| -> Result<(Status, bool), Error> {
        let n = [8, 10, 12][(i % 3) as usize];
        let (r, r1, r2) = triples[(i / 3) as usize % triples.len()];
        let t = ranks(r, r1, r2);
        let lo = r1.max(r2);
        let l = lo + (i as usize * 7) % (n - lo + 1);
        let p = gen_fixed_per_column(ProblemShape::new(n, n, n)?, l, 1000 + i)?;
        let cm = build_constraint(&p, t)?;
        let v = check_finite(&cm, &CheckConfig { seed: i, ..CheckConfig::default() });
        let o = finiteness_oracle(&p, t, &OracleConfig { seed: i, exec: Exec::Sequential, ..OracleConfig::default() })?;
        Ok((v.status, o.verdict == Completability::Finite))
    });
    let (mut decided, mut agree, mut unknown, mut false_finite, mut false_infinite) = (0, 0, 0, 0, 0);
    for res in results {
        let (status, oracle_finite) = res.map_err(|e| e.to_string())?;
        match status {
            Status::Unknown => unknown += 1,
            s => {
                decided += 1;
                let finite = s == Status::Finite;
                if finite == oracle_finite {
                    agree += 1;
                } else if finite {
                    false_finite += 1;
                } else {
                    false_infinite += 1;
                }
            }
        }
    }
    let detail = format!(
        "{agree}/{decided} decided agree, {unknown} Unknown, {false_finite} checker-Finite/oracle-Infinite, {false_infinite} checker-Infinite/oracle-Finite"
    );
    ensure(decided > 0 && agree * 100 >= decided * 95, || detail.clone())?;
    Ok(detail)
}

fn necessity() -> Outcome {
    let p = load_pattern(MOTIVATING).unwrap();
    let t = ranks(2, 1, 2);
    let m = basis_dof(&p.shape(), t).unwrap();
    let coords = p.coords();
    ensure(coords.len() == 11, || format!("{} observations", coords.len()))?;
    let mut via_assumption = 0;
    for &(row, col) in &coords {
        let mut q: SamplingPattern = p.clone();
        q.set(row, col, false).unwrap();
        let system = build_system(&q, t).map_err(|e| e.to_string())?;
        let rank = jacobian_generic_rank(&system, &OracleConfig::default()).map_err(|e| e.to_string())?;
        ensure(rank <= 10, || format!("deleting ({},{}) leaves rank {rank}", row + 1, col + 1))?;
        match build_constraint(&q, t) {
            Ok(cm) => {
                ensure(cm.len() < m, || format!("deleting ({},{}) leaves c = {}", row + 1, col + 1, cm.len()))?;
                let v = check_finite(&cm, &CheckConfig::default());
                ensure(v.status == Status::Infinite, || format!("deleting ({},{}): {}", row + 1, col + 1, v.status))?;
            }
            // A column left with fewer than r_v samples has free coefficients:
            // infinitely many completions, and no constraint matrix exists.
            Err(Error::Assumption1Violated { .. }) => via_assumption += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!(
        "all 11 deletions: oracle rank <= 10 < 11; {} give c < 5 and checker Infinite, {} break the minimum-samples assumption",
        11 - via_assumption,
        via_assumption
    ))
}

fn count_inequality() -> Outcome {
    let triples = [(2, 1, 2), (2, 2, 2), (3, 2, 2), (3, 2, 3), (4, 3, 3), (4, 2, 3), (3, 1, 2), (4, 4, 4)];
    let mut rng = seeded_rng(2024, 0);
    let (mut instances, mut subsets, mut tight) = (0, 0u64, 0u64);
    let mut attempt = 0u64;
    while instances < 50 {
        attempt += 1;
        let n = rng.random_range(6..=12);
        let (r, r1, r2) = triples[rng.random_range(0..triples.len())];
        let t = ranks(r, r1, r2);
        let shape = ProblemShape::new(n, rng.random_range(r1.max(2)..=r1 + 3), rng.random_range(r2.max(2)..=r2 + 3))
            .unwrap();
        if shape.check_ranks(t).is_err() {
            continue;
        }
        let l = rng.random_range(r1.max(r2)..=n.min(r1.max(r2) + 3));
        let p = gen_fixed_per_column(shape, l, attempt).unwrap();
        let cm = build_constraint(&p, t).unwrap();
        // Keep every subset of size <= 10 enumerable.
        if cm.is_empty() || cm.len() > 14 {
            continue;
        }
        instances += 1;
        let probe = IndependenceProbe::new(&cm, &OracleConfig { seed: attempt, ..OracleConfig::default() })
            .map_err(|e| e.to_string())?;
        let c = cm.len();
        for mask in 1u32..(1 << c) {
            if mask.count_ones() > 10 {
                continue;
            }
            let cols: Vec<usize> = (0..c).filter(|i| mask >> i & 1 == 1).collect();
            let count = probe.count(&cols);
            let bound = count_bound(&cm.subset(cols.iter().copied()), t);
            ensure(count <= bound, || format!("attempt {attempt}: {cols:?} count {count} > bound {bound}"))?;
            subsets += 1;
            tight += u64::from(count == bound);
        }
    }
    Ok(format!("50 instances, {subsets} subsets, 0 violations ({tight} tight)"))
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn canonical_basis() -> Outcome {
    let t = ranks(4, 2, 3);
    let d = t.derived();
    let shape = ProblemShape::new(6, 3, 3).unwrap();
    let mut rng = seeded_rng(77, 0);
    let mut worst_dev: f64 = 0.0;
    let mut worst_pair: f64 = 0.0;
    for seed in 0..50 {
        let v = gen_generic_instance(shape, t, seed).unwrap().v;
        let c = canonicalize(&v, t).map_err(|e| e.to_string())?;
        let dev = canonical_deviation(&c.v, t).unwrap();
        worst_dev = worst_dev.max(dev);
        ensure(dev <= 1e-9, || format!("seed {seed}: deviation {dev:e}"))?;
        let again = canonicalize(&c.v, t).map_err(|e| e.to_string())?;
        ensure((&again.v - &c.v).amax() <= 1e-9, || format!("seed {seed}: not idempotent"))?;
        ensure(is_span_equivalent(&c.v, &v, t), || format!("seed {seed}: span changed"))?;

        // Another basis of the same instance: recombine each block within its span.
        let view1 = v.columns(0, t.r1()).into_owned();
        let view2 = v.columns(d.r1p, t.r2()).into_owned();
        let shared = v.columns(d.r1p, d.rp).into_owned();
        let mut w = DMatrix::zeros(v.nrows(), t.r());
        w.columns_mut(0, d.r1p).copy_from(&(&view1 * random_matrix(t.r1(), d.r1p, &mut rng)));
        w.columns_mut(d.r1p, d.rp).copy_from(&(&shared * random_matrix(d.rp, d.rp, &mut rng)));
        w.columns_mut(t.r1(), d.r2p).copy_from(&(&view2 * random_matrix(t.r2(), d.r2p, &mut rng)));
        ensure(is_span_equivalent(&v, &w, t), || format!("seed {seed}: recombined basis not equivalent"))?;
        let cw = canonicalize(&w, t).map_err(|e| e.to_string())?;
        let diff = (&cw.v - &c.v).amax();
        worst_pair = worst_pair.max(diff);
        ensure(diff <= 1e-6, || format!("seed {seed}: two bases differ by {diff:e}"))?;
    }
    Ok(format!(
        "50 bases: max block deviation {worst_dev:.1e}, max disagreement between equivalent bases {worst_pair:.1e}"
    ))
}

fn sweep_files(dir: &Path) -> Result<Vec<String>, String> {
    let out = mvcomp_bin(&["sweep", "--out-dir", dir.to_str().unwrap()])?;
    ensure(out.status.success(), || format!("exit {:?}", out.status.code()))?;
    [40, 60, 100]
        .iter()
        .map(|r| std::fs::read_to_string(dir.join(format!("figure3_r{r}.csv"))).map_err(|e| e.to_string()))
        .collect()
}

fn figure3() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files = sweep_files(dir.path())?;
    let parse = |text: &str| -> Vec<(usize, u64, u64)> {
        text.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
            })
            .collect()
    };
    for text in &files {
        ensure(text.starts_with("r1,l_proposed,l_baseline,assumptions_ok\n"), || "bad header".into())?;
    }
    let rows = parse(&files[2]);
    ensure(rows.len() == 51, || format!("{} rows for r=100", rows.len()))?;
    ensure(rows[0] == (50, 188, 201), || format!("first row {:?}", rows[0]))?;
    for &(r1, p, b) in rows.iter().filter(|row| row.0 <= 97) {
        ensure(p < b, || format!("r1={r1}: proposed {p} >= baseline {b}"))?;
    }
    // Ceiling steps: flat runs followed by jumps, in every curve.
    for (r, text) in [40, 60, 100].iter().zip(&files) {
        let ls: Vec<u64> = parse(text).iter().map(|row| row.1).collect();
        let flat = ls.windows(2).any(|w| w[0] == w[1]);
        let jump = ls.windows(2).any(|w| w[0] != w[1]);
        ensure(flat && jump, || format!("r={r}: no step structure in {ls:?}"))?;
    }
    let gap = rows.iter().map(|row| row.2 - row.1).max().unwrap();
    Ok(format!("3 CSVs; (r=100, r1=50) 188 < 201; proposed < baseline on r1 in [50,97], max gap {gap}"))
}

fn phase() -> Outcome {
    let cfg = PhaseConfig {
        shape: ProblemShape::new(12, 12, 12).unwrap(),
        ranks: ranks(2, 2, 2),
        l_values: (2..=12).collect(),
        trials: 100,
        seed: 8,
        mode: PhaseMode::Finite,
        run_checker: false,
        oracle: OracleConfig::default(),
        check: CheckConfig::default(),
        exec: Exec::default(),
    };
    let (points, _) = phase_transition(&cfg).map_err(|e| e.to_string())?;
    let rates: Vec<f64> = points.iter().map(|p| p.success_rate).collect();
    let first = points.first().unwrap();
    let last = points.last().unwrap();
    ensure(first.trials == 100 && first.success_rate < 0.2, || format!("l=2 rate {}", first.success_rate))?;
    ensure(last.success_rate == 1.0, || format!("l=12 rate {}", last.success_rate))?;
    for w in points.windows(2) {
        ensure(w[1].success_rate >= w[0].success_rate - 0.15, || {
            format!("drop from l={} to l={}: {rates:?}", w[0].l, w[1].l)
        })?;
    }
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.2}")).collect();
    Ok(format!("rates l=2..12: [{}]", shown.join(", ")))
}

fn uniqueness() -> Outcome {
    let triples = [(2, 1, 2), (2, 2, 2), (3, 2, 2), (3, 2, 3), (2, 1, 1), (3, 3, 3)];
    let mut certified = 0;
    let mut seed = 0u64;
    while certified < 50 {
        seed += 1;
        ensure(seed <= 400, || format!("only {certified} certified instances in 400 attempts"))?;
        let n = 6 + (seed as usize % 7);
        let (r, r1, r2) = triples[seed as usize % triples.len()];
        let t = ranks(r, r1, r2);
        let shape = ProblemShape::new(n, n, n).unwrap();
        let l = (r1.max(r2) + 2 + seed as usize % 3).min(n);
        let p = gen_fixed_per_column(shape, l, 5000 + seed).unwrap();
        let cm = build_constraint(&p, t).unwrap();
        let v = check_unique(&cm, &CheckConfig { seed, ..CheckConfig::default() });
        if v.status != Status::UniqueCertified {
            continue;
        }
        certified += 1;
        let m = basis_dof(&shape, t).unwrap();
        let cert = v.certificate.unwrap();
        let sizes = (cert.joint.len(), cert.first_view.len(), cert.second_view.len());
        ensure(sizes == (m, n - r1, n - r2), || format!("seed {seed}: sizes {sizes:?}"))?;
        let mut all: Vec<usize> = cert.joint.iter().chain(&cert.first_view).chain(&cert.second_view).copied().collect();
        all.sort_unstable();
        let total = all.len();
        all.dedup();
        ensure(all.len() == total, || format!("seed {seed}: certificate sets overlap"))?;
        let o = finiteness_oracle(&p, t, &OracleConfig { seed, ..OracleConfig::default() }).map_err(|e| e.to_string())?;
        ensure(o.verdict == Completability::Finite, || format!("seed {seed}: oracle rank {}/{}", o.rank, o.variables))?;
    }
    Ok(format!("50 certified instances ({seed} tried): disjoint sets of sizes (m, n-r1, n-r2), oracle Finite on all"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pat = write_motivating(dir.path());
    let a = check_output(&pat)?;
    let b = check_output(&pat)?;
    ensure(a == b, || "check output differs between runs".into())?;
    let d1 = dir.path().join("s1");
    let d2 = dir.path().join("s2");
    let s1 = sweep_files(&d1)?;
    let s2 = sweep_files(&d2)?;
    ensure(s1 == s2, || "sweep CSVs differ between runs".into())?;
    Ok(format!("check JSON ({} bytes) and 3 sweep CSVs identical across runs", a.len()))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("golden constraint matrix", Duration::from_secs(1), golden_constraint_matrix),
        ("motivating example subsets", Duration::from_secs(1), motivating_subsets),
        ("checker/oracle consistency", Duration::from_secs(300), checker_oracle_consistency),
        ("necessity of every observation", Duration::from_secs(10), necessity),
        ("independent count <= count bound", Duration::from_secs(300), count_inequality),
        ("canonical basis", Duration::from_secs(10), canonical_basis),
        ("bound sweep", Duration::from_secs(5), figure3),
        ("phase transition", Duration::from_secs(600), phase),
        ("uniqueness sufficiency", Duration::from_secs(300), uniqueness),
        ("determinism", Duration::from_secs(10), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; took {elapsed:.2?}, limit {limit:?}")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {:<34} {} ({:.2?}) {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
