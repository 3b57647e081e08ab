//! Decision procedures on the constraint matrix.
//!
//! A set of constraint columns is *independent* when every nonempty subset
//! `T` satisfies `count_bound(T) >= |T|`. The pattern is finitely completable
//! exactly when some independent set has `basis_dof` columns, and uniquely
//! completable when, in addition, disjoint per-view sets of sizes `n - r1`
//! and `n - r2` pass the single-view inequality `g(T) - r_v >= |T|`.
//!
//! Independence is decided exactly by max-flow (see [`independence`]); the
//! pruned enumerator in [`enumerate`] answers the same question by brute
//! force and is kept for cross-checks.

pub(crate) mod enumerate;
pub(crate) mod flow;
pub(crate) mod independence;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::constraint::{ColumnSubset, ConstraintColumn, ConstraintMatrix};
use crate::error::Result;
use crate::pattern::seeded_rng;
use crate::ranks::{dof_for_rows, RankTriple, View};

use enumerate::Family;
use independence::HallTester;

/// `r1' (g1 - r1)+ + r2' (g2 - r2)+ + r' (g - r')+`.
pub(crate) fn bound_from_rows(ranks: RankTriple, g1: usize, g2: usize, g: usize) -> usize {
    let d = ranks.derived();
    d.r1p * g1.saturating_sub(ranks.r1())
        + d.r2p * g2.saturating_sub(ranks.r2())
        + d.rp * g.saturating_sub(d.rp)
}

/// Upper bound on the number of algebraically independent polynomials among
/// the columns of `subset`.
pub fn count_bound(subset: &ColumnSubset<'_>, ranks: RankTriple) -> usize {
    let (first, second) = subset.split_by_view();
    let u1 = first.row_union();
    let u2 = second.row_union();
    let g = u1.union_count(&u2);
    bound_from_rows(ranks, u1.count_ones(..), u2.count_ones(..), g)
}

pub(crate) fn count_bound_of(cm: &ConstraintMatrix, cols: &[usize]) -> usize {
    count_bound(&cm.subset(cols.iter().copied()), cm.ranks())
}

fn slack(cm: &ConstraintMatrix, cols: &[usize]) -> i64 {
    count_bound_of(cm, cols) as i64 - cols.len() as i64
}

/// Exact test: every nonempty subset of `candidate` satisfies
/// `count_bound >= c`. Polynomial time.
pub fn verify_candidate(candidate: &ColumnSubset<'_>, ranks: RankTriple) -> bool {
    let cm = candidate.parent();
    HallTester::joint(cm, ranks)
        .violation(&candidate.indices())
        .is_none()
}

/// A violating nonempty subset of `candidate`, if any.
pub fn find_violated_subset(candidate: &ColumnSubset<'_>, ranks: RankTriple) -> Option<Vec<usize>> {
    HallTester::joint(candidate.parent(), ranks).violation(&candidate.indices())
}

/// Same question as [`verify_candidate`], answered by pruned depth-first
/// enumeration of subsets. Fails once more than `max_nodes` nodes are visited.
pub fn verify_candidate_enumerative(
    candidate: &ColumnSubset<'_>,
    ranks: RankTriple,
    max_nodes: u64,
) -> Result<bool> {
    let found = enumerate::find_violation(
        candidate.parent(),
        &candidate.indices(),
        Family::Joint(ranks),
        max_nodes,
    )?;
    Ok(found.is_none())
}

/// Every nonempty subset `T` of a one-view subset satisfies `g(T) - r_v >= c(T)`.
///
/// Panics if `subset` mixes views.
pub fn single_view_condition(subset: &ColumnSubset<'_>, rv: usize) -> bool {
    let cm = subset.parent();
    let cols = subset.indices();
    let Some(&first) = cols.first() else {
        return true;
    };
    let view = cm.column(first).view;
    assert!(
        cols.iter().all(|&c| cm.column(c).view == view),
        "single-view condition on a mixed subset"
    );
    HallTester::single_view(cm, rv, view).violation(&cols).is_none()
}

/// Enumerative counterpart of [`single_view_condition`].
pub fn single_view_condition_enumerative(
    subset: &ColumnSubset<'_>,
    rv: usize,
    max_nodes: u64,
) -> Result<bool> {
    let found = enumerate::find_violation(
        subset.parent(),
        &subset.indices(),
        Family::SingleView(rv),
        max_nodes,
    )?;
    Ok(found.is_none())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    Finite,
    Infinite,
    UniqueCertified,
    Unknown,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Finite => "Finite",
            Status::Infinite => "Infinite",
            Status::UniqueCertified => "UniqueCertified",
            Status::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// How hard [`check_finite`] looks for a certificate once greedy search fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    /// Backtracking over column combinations when the matrix is small enough.
    #[default]
    Exhaustive,
    /// Greedy augmentation only.
    Greedy,
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub strategy: SearchStrategy,
    /// Backtracking is attempted only up to this many constraint columns.
    pub exhaustive_limit: usize,
    /// Node cap for backtracking search.
    pub max_search_nodes: u64,
    /// Extra greedy passes over shuffled column orders.
    pub greedy_restarts: usize,
    /// Certificates may use at most one constraint column per pattern column.
    pub strict_subsets: bool,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            strategy: SearchStrategy::Exhaustive,
            exhaustive_limit: 28,
            max_search_nodes: 1 << 16,
            greedy_restarts: 4,
            strict_subsets: false,
            seed: 0,
        }
    }
}

/// Column sets witnessing a positive verdict.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Certificate {
    /// `basis_dof` jointly independent columns.
    pub joint: Vec<usize>,
    /// View-1 columns passing the single-view test (uniqueness only).
    pub first_view: Vec<usize>,
    /// View-2 columns passing the single-view test (uniqueness only).
    pub second_view: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    /// `basis_dof`, the number of independent polynomials required.
    pub budget: usize,
    /// Total constraint columns available.
    pub columns: usize,
    pub certificate: Option<Certificate>,
    /// Proven upper bound on the size of any independent column set.
    pub upper_bound: Option<usize>,
    /// Column sets `Z` with `count_bound(Z) < |Z|` used to prove the upper bound.
    pub violated_subsets: Vec<Vec<usize>>,
    pub reason: String,
}

impl Verdict {
    fn new(status: Status, cm: &ConstraintMatrix, budget: usize, reason: impl Into<String>) -> Self {
        Verdict {
            status,
            budget,
            columns: cm.len(),
            certificate: None,
            upper_bound: None,
            violated_subsets: Vec::new(),
            reason: reason.into(),
        }
    }

    /// Serializable form with 1-based column provenance.
    pub fn report(&self, cm: &ConstraintMatrix) -> VerdictReport {
        let refs = |cols: &[usize]| cols.iter().map(|&c| ColumnRef::new(c, cm.column(c))).collect();
        VerdictReport {
            status: self.status,
            budget: self.budget,
            columns: self.columns,
            ranks: [cm.ranks().r(), cm.ranks().r1(), cm.ranks().r2()],
            certificate: self.certificate.as_ref().map(|c| refs(&c.joint)),
            first_view_certificate: self.certificate.as_ref().map(|c| refs(&c.first_view)),
            second_view_certificate: self.certificate.as_ref().map(|c| refs(&c.second_view)),
            upper_bound: self.upper_bound,
            violated_subsets: self.violated_subsets.iter().map(|z| refs(z)).collect(),
            reason: self.reason.clone(),
        }
    }
}

/// One constraint column in reports. All indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnRef {
    pub index: usize,
    pub view: u8,
    pub source_column: usize,
    pub extra_row: usize,
    pub pivot_rows: Vec<usize>,
}

impl ColumnRef {
    fn new(index: usize, col: &ConstraintColumn) -> Self {
        ColumnRef {
            index: index + 1,
            view: col.view.number(),
            source_column: col.source_column + 1,
            extra_row: col.extra_row + 1,
            pivot_rows: col.pivot_rows.iter().map(|r| r + 1).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictReport {
    pub status: Status,
    pub budget: usize,
    pub columns: usize,
    pub ranks: [usize; 3],
    pub certificate: Option<Vec<ColumnRef>>,
    pub first_view_certificate: Option<Vec<ColumnRef>>,
    pub second_view_certificate: Option<Vec<ColumnRef>>,
    pub upper_bound: Option<usize>,
    pub violated_subsets: Vec<Vec<ColumnRef>>,
    pub reason: String,
}

/// Grows an independent set along `order`, stopping at `target` columns.
/// Columns flagged in `skip` are never used.
fn greedy(
    tester: &HallTester<'_>,
    cm: &ConstraintMatrix,
    order: &[usize],
    target: usize,
    skip: &[bool],
    strict: bool,
) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(target);
    let mut used_source = vec![false; cm.shape().columns()];
    for &c in order {
        if chosen.len() == target {
            break;
        }
        let src = cm.column(c).source_column;
        if skip[c] || (strict && used_source[src]) {
            continue;
        }
        if tester.can_extend(&chosen, c) {
            chosen.push(c);
            used_source[src] = true;
        }
    }
    chosen
}

/// Column orders tried by the greedy searches: canonical first, then seeded
/// shuffles.
fn orders(len: usize, restarts: usize, seed: u64, stream: u64) -> Vec<Vec<usize>> {
    let canonical: Vec<usize> = (0..len).collect();
    let mut out = vec![canonical.clone()];
    let mut rng = seeded_rng(seed, stream);
    for _ in 0..restarts {
        let mut o = canonical.clone();
        o.shuffle(&mut rng);
        out.push(o);
    }
    out
}

/// Proven upper bound on the largest independent subset of `members`, with
/// the violating blocks used. Splits off a most-violated set `Z`: any
/// independent `X` has `|X ∩ Z| <= count_bound(Z)`.
fn upper_bound(
    tester: &HallTester<'_>,
    cm: &ConstraintMatrix,
    members: &[usize],
) -> (usize, Vec<Vec<usize>>) {
    if members.is_empty() {
        return (0, Vec::new());
    }
    let worst = tester
        .tight_sets(members)
        .into_iter()
        .map(|z| (slack(cm, &z), z))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    match worst {
        Some((s, mut z)) if s < 0 => {
            z.sort_unstable();
            let rest: Vec<usize> = members
                .iter()
                .copied()
                .filter(|c| z.binary_search(c).is_err())
                .collect();
            let (ub_rest, mut blocks) = upper_bound(tester, cm, &rest);
            let ub = count_bound_of(cm, &z) + ub_rest;
            blocks.insert(0, z);
            (ub.min(members.len()), blocks)
        }
        _ => (members.len(), Vec::new()),
    }
}

enum Search {
    Found(Vec<usize>),
    Exhausted,
    CapHit,
}

struct Backtrack<'a, 'b> {
    tester: &'a HallTester<'b>,
    cm: &'a ConstraintMatrix,
    target: usize,
    strict: bool,
    cap: u64,
    visited: u64,
    chosen: Vec<usize>,
    used_source: Vec<bool>,
}

impl Backtrack<'_, '_> {
    fn walk(&mut self, pos: usize) -> Search {
        self.visited += 1;
        if self.visited > self.cap {
            return Search::CapHit;
        }
        if self.chosen.len() == self.target {
            return Search::Found(self.chosen.clone());
        }
        let len = self.cm.len();
        if self.chosen.len() + (len - pos) < self.target {
            return Search::Exhausted;
        }
        // Everything that could still be added, plus what is chosen, must be
        // able to host `target` independent polynomials.
        let reachable: Vec<usize> = self.chosen.iter().copied().chain(pos..len).collect();
        if count_bound_of(self.cm, &reachable) < self.target {
            return Search::Exhausted;
        }
        let col = pos;
        let src = self.cm.column(col).source_column;
        if !(self.strict && self.used_source[src]) && self.tester.can_extend(&self.chosen, col) {
            self.chosen.push(col);
            self.used_source[src] = true;
            let r = self.walk(pos + 1);
            self.chosen.pop();
            self.used_source[src] = false;
            if !matches!(r, Search::Exhausted) {
                return r;
            }
        }
        self.walk(pos + 1)
    }
}

/// Decides finite completability for the pattern behind `cm`.
///
/// `Finite` carries an independent set of `basis_dof` columns. `Infinite` is
/// reported only with a proof: too few columns, a violated global count, a
/// partition bound below the budget, or a completed exhaustive search.
pub fn check_finite(cm: &ConstraintMatrix, config: &CheckConfig) -> Verdict {
    let ranks = cm.ranks();
    let m = match dof_for_rows(cm.n(), ranks) {
        Ok(m) => m,
        Err(e) => return Verdict::new(Status::Unknown, cm, 0, e.to_string()),
    };
    if m == 0 {
        let mut v = Verdict::new(Status::Finite, cm, 0, "no degrees of freedom");
        v.certificate = Some(Certificate::default());
        return v;
    }
    if cm.len() < m {
        let mut v = Verdict::new(
            Status::Infinite,
            cm,
            m,
            format!("only {} constraint columns for {m} degrees of freedom", cm.len()),
        );
        v.upper_bound = Some(cm.len());
        return v;
    }
    let all: Vec<usize> = (0..cm.len()).collect();
    let total_bound = count_bound_of(cm, &all);
    if total_bound < m {
        let mut v = Verdict::new(
            Status::Infinite,
            cm,
            m,
            format!("count bound of all columns is {total_bound} < {m}"),
        );
        v.upper_bound = Some(total_bound);
        v.violated_subsets = vec![all];
        return v;
    }

    let tester = HallTester::joint(cm, ranks);
    let skip = vec![false; cm.len()];
    for order in orders(cm.len(), config.greedy_restarts, config.seed, 0) {
        let set = greedy(&tester, cm, &order, m, &skip, config.strict_subsets);
        if set.len() == m {
            let mut set = set;
            set.sort_unstable();
            let mut v = Verdict::new(Status::Finite, cm, m, "independent certificate found");
            v.certificate = Some(Certificate {
                joint: set,
                ..Certificate::default()
            });
            return v;
        }
    }

    let (ub, blocks) = upper_bound(&tester, cm, &all);
    if ub < m {
        let mut v = Verdict::new(
            Status::Infinite,
            cm,
            m,
            format!("at most {ub} independent columns, {m} required"),
        );
        v.upper_bound = Some(ub);
        v.violated_subsets = blocks;
        return v;
    }

    if config.strategy == SearchStrategy::Exhaustive && cm.len() <= config.exhaustive_limit {
        let mut bt = Backtrack {
            tester: &tester,
            cm,
            target: m,
            strict: config.strict_subsets,
            cap: config.max_search_nodes,
            visited: 0,
            chosen: Vec::new(),
            used_source: vec![false; cm.shape().columns()],
        };
        match bt.walk(0) {
            Search::Found(set) => {
                let mut v = Verdict::new(Status::Finite, cm, m, "independent certificate found by search");
                v.certificate = Some(Certificate {
                    joint: set,
                    ..Certificate::default()
                });
                return v;
            }
            Search::Exhausted => {
                let mut v = Verdict::new(
                    Status::Infinite,
                    cm,
                    m,
                    format!("exhaustive search found no {m} independent columns"),
                );
                v.upper_bound = Some(ub);
                v.violated_subsets = blocks;
                return v;
            }
            Search::CapHit => {}
        }
    }
    let mut v = Verdict::new(
        Status::Unknown,
        cm,
        m,
        format!("no certificate found; best proven upper bound {ub} >= {m}"),
    );
    v.upper_bound = Some(ub);
    v
}

/// Looks for the three disjoint column sets that certify unique
/// completability. Never claims non-uniqueness.
pub fn check_unique(cm: &ConstraintMatrix, config: &CheckConfig) -> Verdict {
    let ranks = cm.ranks();
    let n = cm.n();
    let m = match dof_for_rows(n, ranks) {
        Ok(m) => m,
        Err(e) => return Verdict::new(Status::Unknown, cm, 0, e.to_string()),
    };
    let need1 = n - ranks.r1();
    let need2 = n - ranks.r2();
    if cm.len() < m + need1 + need2 || cm.k1() < need1 || cm.k2() < need2 {
        return Verdict::new(
            Status::Unknown,
            cm,
            m,
            format!(
                "{} columns cannot host disjoint sets of sizes {m}, {need1}, {need2}",
                cm.len()
            ),
        );
    }
    let joint = HallTester::joint(cm, ranks);
    let first = HallTester::single_view(cm, ranks.r1(), View::First);
    let second = HallTester::single_view(cm, ranks.r2(), View::Second);
    let strict = config.strict_subsets;

    let view_order = |order: &[usize], view: View| -> Vec<usize> {
        order
            .iter()
            .copied()
            .filter(|&c| cm.column(c).view == view)
            .collect()
    };
    let mark = |skip: &mut Vec<bool>, set: &[usize]| {
        for &c in set {
            skip[c] = true;
        }
    };

    for (attempt, order) in orders(cm.len(), config.greedy_restarts, config.seed, 1)
        .into_iter()
        .enumerate()
    {
        // Alternate which condition claims columns first.
        let joint_first = attempt % 2 == 0;
        let mut skip = vec![false; cm.len()];
        let (set0, set1, set2);
        if joint_first {
            set0 = greedy(&joint, cm, &order, m, &skip, strict);
            mark(&mut skip, &set0);
            set1 = greedy(&first, cm, &view_order(&order, View::First), need1, &skip, strict);
            mark(&mut skip, &set1);
            set2 = greedy(&second, cm, &view_order(&order, View::Second), need2, &skip, strict);
        } else {
            set1 = greedy(&first, cm, &view_order(&order, View::First), need1, &skip, strict);
            mark(&mut skip, &set1);
            set2 = greedy(&second, cm, &view_order(&order, View::Second), need2, &skip, strict);
            mark(&mut skip, &set2);
            set0 = greedy(&joint, cm, &order, m, &skip, strict);
        }
        if set0.len() == m && set1.len() == need1 && set2.len() == need2 {
            let sorted = |mut s: Vec<usize>| {
                s.sort_unstable();
                s
            };
            let mut v = Verdict::new(
                Status::UniqueCertified,
                cm,
                m,
                "three disjoint certificate sets found",
            );
            v.certificate = Some(Certificate {
                joint: sorted(set0),
                first_view: sorted(set1),
                second_view: sorted(set2),
            });
            return v;
        }
    }
    Verdict::new(
        Status::Unknown,
        cm,
        m,
        "no disjoint certificate sets found; uniqueness is not decided",
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::build_constraint;
    use crate::constraint::tests::{motivating, MOTIVATING};
    use crate::pattern::{gen_fixed_per_column, load_pattern, seeded_rng, SamplingPattern};
    use crate::ranks::ProblemShape;
    use proptest::prelude::*;

    fn subsets(len: usize) -> impl Iterator<Item = Vec<usize>> {
        (1u32..(1 << len)).map(move |mask| (0..len).filter(|&i| mask >> i & 1 == 1).collect())
    }

    /// Largest independent subset by brute force over all subsets.
    fn brute_max_independent(cm: &ConstraintMatrix) -> usize {
        let len = cm.len();
        let mut best = 0;
        for s in subsets(len) {
            if s.len() > best && subsets(s.len()).all(|t| {
                let sub: Vec<usize> = t.iter().map(|&i| s[i]).collect();
                slack(cm, &sub) >= 0
            }) {
                best = s.len();
            }
        }
        best
    }

    #[test]
    fn count_bound_examples() {
        let cm = motivating();
        assert_eq!(count_bound(&cm.full(), cm.ranks()), 5);
        assert_eq!(count_bound(&ColumnSubset::empty(&cm), cm.ranks()), 0);
        // View-2 block alone reaches all four rows: 1 * (4 - 2) + 1 * (4 - 1).
        assert_eq!(count_bound(&cm.subset([2, 3, 4]), cm.ranks()), 5);
    }

    #[test]
    fn motivating_is_finite_with_five_columns() {
        let cm = motivating();
        let v = check_finite(&cm, &CheckConfig::default());
        assert_eq!(v.status, Status::Finite);
        assert_eq!(v.budget, 5);
        assert_eq!(v.certificate.unwrap().joint, vec![0, 1, 2, 3, 4]);
        assert!(verify_candidate(&cm.full(), cm.ranks()));
        assert!(verify_candidate_enumerative(&cm.full(), cm.ranks(), 1 << 24).unwrap());
    }

    #[test]
    fn deleting_an_entry_gives_infinite() {
        let p = load_pattern(MOTIVATING).unwrap();
        let mut q = p.clone();
        q.set(3, 3, false).unwrap();
        let cm = build_constraint(&q, RankTriple::new(2, 1, 2).unwrap()).unwrap();
        assert_eq!(cm.len(), 4);
        let v = check_finite(&cm, &CheckConfig::default());
        assert_eq!(v.status, Status::Infinite);
        assert_eq!(v.upper_bound, Some(4));
    }

    #[test]
    fn zero_ranks_are_trivially_finite() {
        let p = SamplingPattern::empty(ProblemShape::new(3, 2, 2).unwrap());
        let cm = build_constraint(&p, RankTriple::new(0, 0, 0).unwrap()).unwrap();
        let v = check_finite(&cm, &CheckConfig::default());
        assert_eq!(v.status, Status::Finite);
        assert_eq!(v.certificate, Some(Certificate::default()));
    }

    #[test]
    fn pigeonhole_violation_is_caught() {
        // r = r1 = 1, r2 = 0: r1' = 1, r' = 0, r2' = 0. Two view-1 columns on
        // the same two rows give bound 1 < 2.
        let text = "3 2 1\ndense\n110\n110\n000\n";
        let p = load_pattern(text).unwrap();
        let ranks = RankTriple::new(1, 1, 0).unwrap();
        let cm = build_constraint(&p, ranks).unwrap();
        assert_eq!(cm.len(), 2);
        assert!(!verify_candidate(&cm.full(), ranks));
        assert!(!verify_candidate_enumerative(&cm.full(), ranks, 1 << 10).unwrap());
        assert_eq!(find_violated_subset(&cm.full(), ranks), Some(vec![0, 1]));
    }

    #[test]
    fn single_view_examples() {
        // One view-1 column observed everywhere with r1 = 1: pivots {0},
        // extras 1..4 each add a fresh row.
        let p = load_pattern("5 1 1\ndense\n11\n10\n10\n10\n10\n").unwrap();
        let cm = build_constraint(&p, RankTriple::new(1, 1, 1).unwrap()).unwrap();
        let view1 = cm.subset(cm.view_range(View::First));
        assert_eq!(view1.len(), 4);
        assert!(single_view_condition(&view1, 1));
        assert!(!single_view_condition(&view1, 2));
        let cm = motivating();
        assert!(!single_view_condition(&cm.subset([3, 4]), 2));
    }

    #[test]
    fn unique_counting_rejection() {
        let cm = motivating();
        let v = check_unique(&cm, &CheckConfig::default());
        assert_eq!(v.status, Status::Unknown);
    }

    #[test]
    fn unique_certified_on_dense_pattern() {
        let shape = ProblemShape::new(6, 12, 12).unwrap();
        let ranks = RankTriple::new(2, 1, 2).unwrap();
        let p = SamplingPattern::full(shape);
        let cm = build_constraint(&p, ranks).unwrap();
        let v = check_unique(&cm, &CheckConfig::default());
        assert_eq!(v.status, Status::UniqueCertified);
        let cert = v.certificate.unwrap();
        assert_eq!(cert.joint.len(), v.budget);
        assert_eq!(cert.first_view.len(), 5);
        assert_eq!(cert.second_view.len(), 4);
        assert!(verify_candidate(&cm.subset(cert.joint.iter().copied()), ranks));
        assert!(single_view_condition(&cm.subset(cert.first_view.iter().copied()), 1));
        assert!(single_view_condition(&cm.subset(cert.second_view.iter().copied()), 2));
    }

    #[test]
    fn report_uses_one_based_provenance() {
        let cm = motivating();
        let v = check_finite(&cm, &CheckConfig::default());
        let r = v.report(&cm);
        let cert = r.certificate.unwrap();
        assert_eq!(cert[0].index, 1);
        assert_eq!((cert[0].view, cert[0].source_column, cert[0].extra_row), (1, 1, 2));
        assert_eq!(cert[0].pivot_rows, vec![1]);
    }

    fn small_instance() -> impl Strategy<Value = (ConstraintMatrix, u64)> {
        (any::<u64>(), 4usize..7, 0usize..3, 0usize..3, 1usize..4, 1usize..4).prop_filter_map(
            "valid ranks",
            |(seed, n, r1, r2, m1, m2)| {
                let r = (r1 + r2).min(n).max(r1.max(r2));
                let ranks = RankTriple::new(r, r1, r2).ok()?;
                let shape = ProblemShape::new(n, m1, m2).ok()?;
                let l = (r1.max(r2) + 1 + (seed % 3) as usize).min(n);
                let p = gen_fixed_per_column(shape, l, seed).ok()?;
                let cm = build_constraint(&p, ranks).ok()?;
                (cm.len() <= 10).then_some((cm, seed))
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn flow_matches_enumeration((cm, seed) in small_instance()) {
            let ranks = cm.ranks();
            let mut rng = seeded_rng(seed, 1);
            let mut cols: Vec<usize> = (0..cm.len()).collect();
            cols.shuffle(&mut rng);
            for k in 0..=cols.len() {
                let s = cm.subset(cols[..k].iter().copied());
                let flow = verify_candidate(&s, ranks);
                let dfs = verify_candidate_enumerative(&s, ranks, 1 << 24).unwrap();
                prop_assert_eq!(flow, dfs);
                for view in [View::First, View::Second] {
                    let one = cm.subset(cols[..k].iter().copied().filter(|&c| cm.column(c).view == view));
                    let rv = ranks.of_view(view);
                    prop_assert_eq!(
                        single_view_condition(&one, rv),
                        single_view_condition_enumerative(&one, rv, 1 << 24).unwrap()
                    );
                }
            }
        }

        #[test]
        fn verdict_matches_brute_force((cm, _seed) in small_instance()) {
            let m = dof_for_rows(cm.n(), cm.ranks()).unwrap();
            let best = brute_max_independent(&cm);
            let v = check_finite(&cm, &CheckConfig::default());
            match v.status {
                Status::Finite => prop_assert!(best >= m),
                Status::Infinite => prop_assert!(best < m),
                _ => prop_assert!(false, "small instances must be decided"),
            }
            if let Some(ub) = v.upper_bound {
                prop_assert!(best <= ub);
            }
        }
    }
}
