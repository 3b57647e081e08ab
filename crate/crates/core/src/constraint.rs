//! The binary constraint matrix: one column per observed entry beyond the
//! per-column pivot budget.
//!
//! For a view-`v` column with observed rows `x_1 < ... < x_l`, the first `r_v`
//! rows are pivots (they pin down the coefficient column) and every remaining
//! row `x_{r_v + j}` yields a constraint column supported on the pivots plus
//! that row.

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rand::seq::index;
use serde::Serialize;

use crate::error::Result;
use crate::pattern::{seeded_rng, SamplingPattern};
use crate::ranks::{first_assumption1_violation, ProblemShape, RankTriple, View};

/// How the `r_v` pivot rows of each pattern column are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// The `r_v` observed rows with the smallest indices.
    #[default]
    SmallestIndex,
    /// A seeded uniform choice; the stream is the source column index.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintColumn {
    pub view: View,
    /// Zero-based column of the sampling pattern.
    pub source_column: usize,
    /// Zero-based, ascending.
    pub pivot_rows: Vec<usize>,
    pub extra_row: usize,
    #[serde(skip)]
    pub support: FixedBitSet,
}

#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    n: usize,
    shape: ProblemShape,
    ranks: RankTriple,
    columns: Vec<ConstraintColumn>,
    k1: usize,
}

impl ConstraintMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> ProblemShape {
        self.shape
    }

    pub fn ranks(&self) -> RankTriple {
        self.ranks
    }

    pub fn columns(&self) -> &[ConstraintColumn] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &ConstraintColumn {
        &self.columns[idx]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.columns.len() - self.k1
    }

    /// Column indices belonging to `view`.
    pub fn view_range(&self, view: View) -> std::ops::Range<usize> {
        match view {
            View::First => 0..self.k1,
            View::Second => self.k1..self.columns.len(),
        }
    }

    pub fn full(&self) -> ColumnSubset<'_> {
        ColumnSubset::from_indices(self, 0..self.len())
    }

    pub fn subset<I: IntoIterator<Item = usize>>(&self, indices: I) -> ColumnSubset<'_> {
        ColumnSubset::from_indices(self, indices)
    }

    /// Number of rows touched by the union of supports of `indices`.
    pub fn rows_touched(&self, indices: &[usize]) -> usize {
        let mut rows = FixedBitSet::with_capacity(self.n);
        for &i in indices {
            rows.union_with(&self.columns[i].support);
        }
        rows.count_ones(..)
    }

    /// Dense 0/1 dump in the pattern text format, header `n k1 k2`.
    pub fn to_dense_text(&self) -> String {
        let mut out = format!("{} {} {}\ndense\n", self.n, self.k1, self.k2());
        for row in 0..self.n {
            for col in &self.columns {
                out.push(if col.support.contains(row) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// One line per column: `view source_column extra_row`, 1-based.
    pub fn provenance_text(&self) -> String {
        let mut out = String::new();
        for c in &self.columns {
            let _ = writeln!(out, "{} {} {}", c.view, c.source_column + 1, c.extra_row + 1);
        }
        out
    }
}

/// Builds the constraint matrix. Fails if some column has fewer than `r_v`
/// samples.
pub fn build_constraint(pattern: &SamplingPattern, ranks: RankTriple) -> Result<ConstraintMatrix> {
    build_constraint_with(pattern, ranks, PivotRule::SmallestIndex)
}

pub fn build_constraint_with(
    pattern: &SamplingPattern,
    ranks: RankTriple,
    rule: PivotRule,
) -> Result<ConstraintMatrix> {
    if let Some(err) = first_assumption1_violation(pattern, ranks) {
        return Err(err);
    }
    let shape = pattern.shape();
    let n = shape.n;
    let mut columns = Vec::new();
    let mut k1 = 0;
    for view in [View::First, View::Second] {
        let rv = ranks.of_view(view);
        for src in shape.view_columns(view) {
            let rows: Vec<usize> = pattern.column_rows(src).collect();
            let (pivots, extras) = split_pivots(&rows, rv, rule, src);
            for extra in extras {
                let mut support = FixedBitSet::with_capacity(n);
                for &p in &pivots {
                    support.insert(p);
                }
                support.insert(extra);
                columns.push(ConstraintColumn {
                    view,
                    source_column: src,
                    pivot_rows: pivots.clone(),
                    extra_row: extra,
                    support,
                });
            }
        }
        if view == View::First {
            k1 = columns.len();
        }
    }
    Ok(ConstraintMatrix {
        n,
        shape,
        ranks,
        columns,
        k1,
    })
}

fn split_pivots(rows: &[usize], rv: usize, rule: PivotRule, src: usize) -> (Vec<usize>, Vec<usize>) {
    match rule {
        PivotRule::SmallestIndex => (rows[..rv].to_vec(), rows[rv..].to_vec()),
        PivotRule::Seeded(seed) => {
            let mut rng = seeded_rng(seed, src as u64);
            let mut chosen = vec![false; rows.len()];
            for i in index::sample(&mut rng, rows.len(), rv) {
                chosen[i] = true;
            }
            let mut pivots = Vec::with_capacity(rv);
            let mut extras = Vec::with_capacity(rows.len() - rv);
            for (&row, pick) in rows.iter().zip(chosen) {
                if pick {
                    pivots.push(row);
                } else {
                    extras.push(row);
                }
            }
            (pivots, extras)
        }
    }
}

/// A set of columns of one constraint matrix.
#[derive(Debug, Clone)]
pub struct ColumnSubset<'a> {
    parent: &'a ConstraintMatrix,
    members: FixedBitSet,
}

impl<'a> ColumnSubset<'a> {
    pub fn empty(parent: &'a ConstraintMatrix) -> Self {
        ColumnSubset {
            parent,
            members: FixedBitSet::with_capacity(parent.len()),
        }
    }

    /// Panics if an index is out of range.
    pub fn from_indices<I: IntoIterator<Item = usize>>(parent: &'a ConstraintMatrix, indices: I) -> Self {
        let mut s = Self::empty(parent);
        for i in indices {
            assert!(i < parent.len(), "column {i} out of range");
            s.members.insert(i);
        }
        s
    }

    pub fn parent(&self) -> &'a ConstraintMatrix {
        self.parent
    }

    pub fn insert(&mut self, idx: usize) {
        self.members.insert(idx);
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members.contains(idx)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.members.ones().collect()
    }

    /// `c(.)`, the number of columns.
    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    /// Union of member supports.
    pub fn row_union(&self) -> FixedBitSet {
        let mut rows = FixedBitSet::with_capacity(self.parent.n);
        for i in self.members.ones() {
            rows.union_with(&self.parent.columns[i].support);
        }
        rows
    }

    /// Members grouped by view.
    pub fn split_by_view(&self) -> (ColumnSubset<'a>, ColumnSubset<'a>) {
        let mut first = Self::empty(self.parent);
        let mut second = Self::empty(self.parent);
        for i in self.members.ones() {
            match self.parent.columns[i].view {
                View::First => first.insert(i),
                View::Second => second.insert(i),
            }
        }
        (first, second)
    }
}

/// `g(.)`: number of rows in which some member column is nonzero.
pub fn nonzero_rows(subset: &ColumnSubset<'_>) -> usize {
    subset.row_union().count_ones(..)
}

/// Splits a subset into its view-1 and view-2 columns.
pub fn split_by_view<'a>(subset: &ColumnSubset<'a>) -> (ColumnSubset<'a>, ColumnSubset<'a>) {
    subset.split_by_view()
}
