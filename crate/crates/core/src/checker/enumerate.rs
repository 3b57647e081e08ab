//! Subset enumeration for the counting inequalities.
//!
//! Exponential, but independent of the flow formulation, so the two are used
//! to cross-check each other.

use fixedbitset::FixedBitSet;

use crate::constraint::ConstraintMatrix;
use crate::error::{Error, Result};
use crate::ranks::{RankTriple, View};

/// Which inequality a subset must satisfy.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Family {
    /// `count_bound(T) >= |T|`.
    Joint(RankTriple),
    /// `g(T) - r_v >= |T|`.
    SingleView(usize),
}

impl Family {
    fn bound(&self, g1: usize, g2: usize, g: usize) -> i64 {
        match *self {
            Family::Joint(ranks) => super::bound_from_rows(ranks, g1, g2, g) as i64,
            Family::SingleView(rv) => g as i64 - rv as i64,
        }
    }
}

struct Dfs<'a> {
    cm: &'a ConstraintMatrix,
    order: Vec<usize>,
    family: Family,
    cap: u64,
    visited: u64,
    chosen: Vec<usize>,
}

struct Unions {
    first: FixedBitSet,
    second: FixedBitSet,
}

impl Unions {
    fn counts(&self) -> (usize, usize, usize) {
        let g1 = self.first.count_ones(..);
        let g2 = self.second.count_ones(..);
        let g = self.first.union_count(&self.second);
        (g1, g2, g)
    }
}

impl Dfs<'_> {
    /// Explores every extension of `chosen` by columns at `pos..`.
    fn walk(&mut self, pos: usize, unions: &Unions) -> Result<Option<Vec<usize>>> {
        self.visited += 1;
        if self.visited > self.cap {
            return Err(Error::EnumerationCapExceeded { cap: self.cap });
        }
        let (g1, g2, g) = unions.counts();
        let slack = self.family.bound(g1, g2, g) - self.chosen.len() as i64;
        if !self.chosen.is_empty() && slack < 0 {
            return Ok(Some(self.chosen.clone()));
        }
        let remaining = (self.order.len() - pos) as i64;
        // The bound never decreases when columns are added, so no extension
        // can push the slack below zero once it covers every remaining column.
        if !self.chosen.is_empty() && slack - remaining >= 0 {
            return Ok(None);
        }
        for next in pos..self.order.len() {
            let col = self.cm.column(self.order[next]);
            let mut grown = Unions {
                first: unions.first.clone(),
                second: unions.second.clone(),
            };
            match col.view {
                View::First => grown.first.union_with(&col.support),
                View::Second => grown.second.union_with(&col.support),
            }
            self.chosen.push(self.order[next]);
            let found = self.walk(next + 1, &grown)?;
            self.chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

/// Orders columns by descending total support overlap with the other members.
fn overlap_order(cm: &ConstraintMatrix, members: &[usize]) -> Vec<usize> {
    let mut scored: Vec<(usize, usize)> = members
        .iter()
        .map(|&a| {
            let sa = &cm.column(a).support;
            let score = members
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| sa.intersection_count(&cm.column(b).support))
                .sum();
            (score, a)
        })
        .collect();
    scored.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    scored.into_iter().map(|(_, a)| a).collect()
}

/// First violating nonempty subset found by pruned depth-first enumeration,
/// or `None` if every subset satisfies the inequality.
pub(crate) fn find_violation(
    cm: &ConstraintMatrix,
    members: &[usize],
    family: Family,
    cap: u64,
) -> Result<Option<Vec<usize>>> {
    let n = cm.n();
    let mut dfs = Dfs {
        cm,
        order: overlap_order(cm, members),
        family,
        cap,
        visited: 0,
        chosen: Vec::new(),
    };
    let start = Unions {
        first: FixedBitSet::with_capacity(n),
        second: FixedBitSet::with_capacity(n),
    };
    dfs.walk(0, &start)
}

/// Slack `bound(T) - |T|` of one subset, computed from scratch.
#[cfg(test)]
pub(crate) fn slack_of(cm: &ConstraintMatrix, subset: &[usize], family: Family) -> i64 {
    let n = cm.n();
    let mut u = Unions {
        first: FixedBitSet::with_capacity(n),
        second: FixedBitSet::with_capacity(n),
    };
    for &c in subset {
        let col = cm.column(c);
        match col.view {
            View::First => u.first.union_with(&col.support),
            View::Second => u.second.union_with(&col.support),
        }
    }
    let (g1, g2, g) = u.counts();
    family.bound(g1, g2, g) - subset.len() as i64
}
