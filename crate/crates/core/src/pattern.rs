//! Sampling patterns, their text format, and seeded generators.
//!
//! Text format (1-based indices):
//!
//! ```text
//! n m1 m2
//! dense            |  coords
//! 0110...          |  row col
//! ...              |  ...
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ranks::{ProblemShape, RankTriple, View};

/// Seeded generator used everywhere randomness is needed.
pub type Rng64 = ChaCha8Rng;

/// Builds the generator for `(seed, stream)`. Streams separate independent
/// sub-experiments derived from one seed.
pub fn seeded_rng(seed: u64, stream: u64) -> Rng64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Binary observation mask, stored as one packed row-set per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPattern {
    shape: ProblemShape,
    columns: Vec<FixedBitSet>,
}

impl SamplingPattern {
    pub fn empty(shape: ProblemShape) -> Self {
        SamplingPattern {
            shape,
            columns: vec![FixedBitSet::with_capacity(shape.n); shape.columns()],
        }
    }

    pub fn full(shape: ProblemShape) -> Self {
        let mut p = Self::empty(shape);
        for col in &mut p.columns {
            col.insert_range(..);
        }
        p
    }

    /// Builds a pattern from zero-based `(row, col)` pairs.
    pub fn from_coords(shape: ProblemShape, coords: &[(usize, usize)]) -> Result<Self> {
        let mut p = Self::empty(shape);
        for &(row, col) in coords {
            p.check_bounds(row, col)?;
            if p.columns[col].put(row) {
                return Err(Error::DuplicateCoordinate {
                    row: row + 1,
                    col: col + 1,
                });
            }
        }
        Ok(p)
    }

    fn check_bounds(&self, row: usize, col: usize) -> Result<()> {
        if row >= self.shape.n || col >= self.shape.columns() {
            return Err(Error::DimensionMismatch(format!(
                "entry ({}, {}) outside {}x{}",
                row + 1,
                col + 1,
                self.shape.n,
                self.shape.columns()
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> ProblemShape {
        self.shape
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.columns[col].contains(row)
    }

    pub fn set(&mut self, row: usize, col: usize, observed: bool) -> Result<()> {
        self.check_bounds(row, col)?;
        self.columns[col].set(row, observed);
        Ok(())
    }

    /// Observed rows of `col`, ascending.
    pub fn column_rows(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        self.columns[col].ones()
    }

    pub fn column_set(&self, col: usize) -> &FixedBitSet {
        &self.columns[col]
    }

    pub fn column_count(&self, col: usize) -> usize {
        self.columns[col].count_ones(..)
    }

    /// `N_Omega` over the whole matrix.
    pub fn count(&self) -> usize {
        self.columns.iter().map(|c| c.count_ones(..)).sum()
    }

    pub fn view_count(&self, view: View) -> usize {
        self.shape
            .view_columns(view)
            .map(|c| self.column_count(c))
            .sum()
    }

    /// Zero-based observed coordinates in column-major order.
    pub fn coords(&self) -> Vec<(usize, usize)> {
        (0..self.shape.columns())
            .flat_map(|c| self.column_rows(c).map(move |r| (r, c)))
            .collect()
    }

    pub fn to_dense_text(&self) -> String {
        let n = self.shape.n;
        let mut out = format!("{} {} {}\ndense\n", n, self.shape.m1, self.shape.m2);
        for row in 0..n {
            for col in &self.columns {
                out.push(if col.contains(row) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Coordinate listing sorted by row, then column.
    pub fn to_coords_text(&self) -> String {
        let mut out = format!(
            "{} {} {}\ncoords\n",
            self.shape.n, self.shape.m1, self.shape.m2
        );
        let mut coords = self.coords();
        coords.sort_unstable();
        for (r, c) in coords {
            let _ = writeln!(out, "{} {}", r + 1, c + 1);
        }
        out
    }
}

/// Parses the pattern text format. Blank lines and lines starting with `#`
/// are ignored.
pub fn load_pattern(source: &str) -> Result<SamplingPattern> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing `n m1 m2` header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(hline, format!("bad header `{header}`: {e}")))?;
    if dims.len() != 3 {
        return Err(parse_err(hline, format!("header needs 3 integers, got `{header}`")));
    }
    let shape = ProblemShape::new(dims[0], dims[1], dims[2])?;

    let (kline, kind) = lines
        .next()
        .ok_or_else(|| parse_err(hline, "missing `dense` or `coords` marker".into()))?;
    match kind {
        "dense" => {
            let mut pattern = SamplingPattern::empty(shape);
            let mut row = 0;
            for (lno, text) in lines {
                if row >= shape.n {
                    return Err(Error::DimensionMismatch(format!(
                        "line {lno}: more than n={} rows",
                        shape.n
                    )));
                }
                if text.chars().count() != shape.columns() {
                    return Err(Error::DimensionMismatch(format!(
                        "line {lno}: expected {} columns, found {}",
                        shape.columns(),
                        text.chars().count()
                    )));
                }
                for (col, ch) in text.chars().enumerate() {
                    match ch {
                        '1' => pattern.columns[col].insert(row),
                        '0' => {}
                        other => {
                            return Err(parse_err(lno, format!("unexpected character `{other}`")))
                        }
                    }
                }
                row += 1;
            }
            if row != shape.n {
                return Err(Error::DimensionMismatch(format!(
                    "expected {} rows, found {row}",
                    shape.n
                )));
            }
            Ok(pattern)
        }
        "coords" => {
            let mut coords = Vec::new();
            for (lno, text) in lines {
                let parts: Vec<&str> = text.split_whitespace().collect();
                let pair = match parts.as_slice() {
                    [a, b] => a.parse::<usize>().ok().zip(b.parse::<usize>().ok()),
                    _ => None,
                };
                let (r, c) =
                    pair.ok_or_else(|| parse_err(lno, format!("expected `row col`, got `{text}`")))?;
                if r == 0 || c == 0 {
                    return Err(Error::DimensionMismatch(format!(
                        "line {lno}: coordinates are 1-based"
                    )));
                }
                coords.push((r - 1, c - 1));
            }
            SamplingPattern::from_coords(shape, &coords)
        }
        other => Err(parse_err(
            kline,
            format!("expected `dense` or `coords`, got `{other}`"),
        )),
    }
}

/// Exactly `l` distinct uniformly chosen rows in every column.
pub fn gen_fixed_per_column(shape: ProblemShape, l: usize, seed: u64) -> Result<SamplingPattern> {
    if l > shape.n {
        return Err(Error::SamplesExceedRows { l, n: shape.n });
    }
    let mut rng = seeded_rng(seed, 0);
    let mut p = SamplingPattern::empty(shape);
    for col in &mut p.columns {
        for row in index::sample(&mut rng, shape.n, l) {
            col.insert(row);
        }
    }
    Ok(p)
}

/// Every entry observed independently with probability `p`.
pub fn gen_bernoulli(shape: ProblemShape, p: f64, seed: u64) -> Result<SamplingPattern> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let mut rng = seeded_rng(seed, 0);
    let mut pattern = SamplingPattern::empty(shape);
    for col in &mut pattern.columns {
        for row in 0..shape.n {
            if rng.random_bool(p) {
                col.insert(row);
            }
        }
    }
    Ok(pattern)
}

/// A generic point on the two-view manifold: `U1 = [V1|V2] T1`, `U2 = [V2|V3] T2`.
#[derive(Debug, Clone)]
pub struct GenericInstance {
    pub ranks: RankTriple,
    pub shape: ProblemShape,
    /// `n x r`, blocks of widths `(r1', r', r2')`.
    pub v: DMatrix<f64>,
    pub t1: DMatrix<f64>,
    pub t2: DMatrix<f64>,
    pub u: DMatrix<f64>,
}

impl GenericInstance {
    /// `[V1 | V2]`, the basis of the first view.
    pub fn view1_basis(&self) -> DMatrix<f64> {
        view_basis(&self.v, self.ranks, View::First)
    }

    /// `[V2 | V3]`, the basis of the second view.
    pub fn view2_basis(&self) -> DMatrix<f64> {
        view_basis(&self.v, self.ranks, View::Second)
    }

    pub fn u1(&self) -> DMatrix<f64> {
        self.u.columns(0, self.shape.m1).into_owned()
    }

    pub fn u2(&self) -> DMatrix<f64> {
        self.u.columns(self.shape.m1, self.shape.m2).into_owned()
    }
}

/// Columns of a full basis `V` spanning the given view.
pub fn view_basis(v: &DMatrix<f64>, ranks: RankTriple, view: View) -> DMatrix<f64> {
    match view {
        View::First => v.columns(0, ranks.r1()).into_owned(),
        View::Second => v.columns(ranks.derived().r1p, ranks.r2()).into_owned(),
    }
}

pub fn gen_generic_instance(
    shape: ProblemShape,
    ranks: RankTriple,
    seed: u64,
) -> Result<GenericInstance> {
    shape.check_ranks(ranks)?;
    let mut rng = seeded_rng(seed, 0);
    let mut normal = |rows: usize, cols: usize| {
        DMatrix::<f64>::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    };
    let v = normal(shape.n, ranks.r());
    let t1 = normal(ranks.r1(), shape.m1);
    let t2 = normal(ranks.r2(), shape.m2);
    let u1 = view_basis(&v, ranks, View::First) * &t1;
    let u2 = view_basis(&v, ranks, View::Second) * &t2;
    let mut u = DMatrix::zeros(shape.n, shape.columns());
    u.columns_mut(0, shape.m1).copy_from(&u1);
    u.columns_mut(shape.m1, shape.m2).copy_from(&u2);
    Ok(GenericInstance {
        ranks,
        shape,
        v,
        t1,
        t2,
        u,
    })
}

/// Observed-entry set as a hash set, handy for tests and diffs.
pub fn coord_set(pattern: &SamplingPattern) -> HashSet<(usize, usize)> {
    pattern.coords().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::numerical_rank;
    use proptest::prelude::*;

    pub(crate) const MOTIVATING: &str = "4 2 2\ncoords\n\
        1 1\n1 2\n1 3\n1 4\n\
        2 1\n2 3\n2 4\n\
        3 1\n3 3\n\
        4 3\n4 4\n";

    #[test]
    fn motivating_example_counts() {
        let p = load_pattern(MOTIVATING).unwrap();
        assert_eq!(p.count(), 11);
        assert_eq!(p.column_count(0), 3);
        assert_eq!(p.column_count(1), 1);
        assert_eq!(p.column_count(2), 4);
        assert_eq!(p.column_count(3), 3);
    }

    #[test]
    fn dense_and_coords_agree() {
        let p = load_pattern(MOTIVATING).unwrap();
        let dense = p.to_dense_text();
        assert_eq!(dense, "4 2 2\ndense\n1111\n1011\n1010\n0011\n");
        assert_eq!(load_pattern(&dense).unwrap(), p);
        assert_eq!(load_pattern(&p.to_coords_text()).unwrap(), p);
    }

    #[test]
    fn empty_coordinate_list() {
        let p = load_pattern("2 1 1\ncoords\n").unwrap();
        assert_eq!(p.count(), 0);
        assert_eq!(p.shape(), ProblemShape::new(2, 1, 1).unwrap());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            load_pattern("4 2 2\ncoords\n5 1\n"),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            load_pattern("4 2 2\ncoords\n1 1\n1 1\n"),
            Err(Error::DuplicateCoordinate { row: 1, col: 1 })
        ));
        assert!(matches!(load_pattern("4 2\ncoords\n"), Err(Error::Parse { .. })));
        assert!(matches!(load_pattern("2 1 1\nsparse\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            load_pattern("2 1 1\ndense\n10\n"),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            load_pattern("2 1 1\ndense\n10\n1x\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            load_pattern("2 1 1\ndense\n101\n10\n"),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            load_pattern("2 1 1\ncoords\n0 1\n"),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn fixed_per_column_extremes() {
        let s = ProblemShape::new(5, 2, 3).unwrap();
        assert_eq!(gen_fixed_per_column(s, 5, 1).unwrap(), SamplingPattern::full(s));
        assert_eq!(gen_fixed_per_column(s, 0, 1).unwrap(), SamplingPattern::empty(s));
        assert!(matches!(
            gen_fixed_per_column(s, 6, 1),
            Err(Error::SamplesExceedRows { l: 6, n: 5 })
        ));
    }

    #[test]
    fn fixed_per_column_sums() {
        let s = ProblemShape::new(10, 3, 3).unwrap();
        let p = gen_fixed_per_column(s, 4, 7).unwrap();
        for c in 0..6 {
            assert_eq!(p.column_count(c), 4);
        }
    }

    #[test]
    fn bernoulli_extremes_and_concentration() {
        let s = ProblemShape::new(6, 2, 2).unwrap();
        assert_eq!(gen_bernoulli(s, 1.0, 3).unwrap(), SamplingPattern::full(s));
        assert_eq!(gen_bernoulli(s, 0.0, 3).unwrap(), SamplingPattern::empty(s));
        assert!(gen_bernoulli(s, 1.5, 3).is_err());
        assert!(gen_bernoulli(s, -0.1, 3).is_err());

        let s = ProblemShape::new(1000, 1, 1).unwrap();
        let p = gen_bernoulli(s, 0.5, 11).unwrap();
        // Binomial(2000, 1/2): mean 1000, sd sqrt(500).
        let dev = (p.count() as f64 - 1000.0).abs();
        assert!(dev <= 3.0 * 500f64.sqrt(), "total {}", p.count());
    }

    #[test]
    fn generic_instance_structure() {
        let s = ProblemShape::new(4, 2, 2).unwrap();
        let t = RankTriple::new(2, 1, 2).unwrap();
        let inst = gen_generic_instance(s, t, 3).unwrap();
        assert_eq!(numerical_rank(&inst.u, 1e-8), 2);
        assert_eq!(numerical_rank(&inst.u1(), 1e-8), 1);
        assert_eq!(numerical_rank(&inst.u2(), 1e-8), 2);
        let diff = inst.u1() - inst.view1_basis() * &inst.t1;
        assert!(diff.amax() < 1e-12);
    }

    #[test]
    fn generic_instance_shared_block_only() {
        let s = ProblemShape::new(6, 3, 3).unwrap();
        let t = RankTriple::new(2, 2, 2).unwrap();
        let inst = gen_generic_instance(s, t, 9).unwrap();
        // r1' = r2' = 0: both views use V2 = V.
        assert_eq!(inst.view1_basis(), inst.v);
        assert_eq!(inst.view2_basis(), inst.v);
    }

    #[test]
    fn generic_instance_zero_rank() {
        let s = ProblemShape::new(3, 2, 2).unwrap();
        let inst = gen_generic_instance(s, RankTriple::new(0, 0, 0).unwrap(), 5).unwrap();
        assert!(inst.u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn generic_instance_ranks_over_many_seeds() {
        let s = ProblemShape::new(12, 7, 8).unwrap();
        let t = RankTriple::new(5, 3, 4).unwrap();
        let good = (0..100)
            .filter(|&seed| {
                let inst = gen_generic_instance(s, t, seed).unwrap();
                numerical_rank(&inst.u, 1e-8) == 5
                    && numerical_rank(&inst.u1(), 1e-8) == 3
                    && numerical_rank(&inst.u2(), 1e-8) == 4
            })
            .count();
        assert!(good >= 99, "{good}");
    }

    proptest! {
        #[test]
        fn generators_replay(seed in any::<u64>(), l in 0usize..7, p in 0.0f64..1.0) {
            let s = ProblemShape::new(6, 3, 2).unwrap();
            prop_assert_eq!(gen_fixed_per_column(s, l, seed).unwrap(),
                            gen_fixed_per_column(s, l, seed).unwrap());
            prop_assert_eq!(gen_bernoulli(s, p, seed).unwrap(), gen_bernoulli(s, p, seed).unwrap());
        }

        #[test]
        fn text_round_trip(seed in any::<u64>(), p in 0.0f64..1.0) {
            let s = ProblemShape::new(5, 2, 3).unwrap();
            let pat = gen_bernoulli(s, p, seed).unwrap();
            prop_assert_eq!(&load_pattern(&pat.to_dense_text()).unwrap(), &pat);
            prop_assert_eq!(&load_pattern(&pat.to_coords_text()).unwrap(), &pat);
        }
    }
}
