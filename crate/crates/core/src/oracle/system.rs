//! The polynomial system of sampled entries in the canonical chart, and its
//! Jacobian at a random point.
//!
//! Unknowns are the free entries of a canonical basis `V` followed by every
//! entry of `T1` and `T2`. The observation at `(x, i)` in view `v` reads
//! `U[x, i] = sum_k V[x, c_v + k] T_v[k, i]`, so its gradient is `T_v[k, i]`
//! in the `V` entries of row `x` and `V[x, c_v + k]` in column `i` of `T_v`.

use rand::Rng;

use super::arith::Ops;
use crate::basis::CanonicalPattern;
use crate::error::{Error, Result};
use crate::pattern::SamplingPattern;
use crate::ranks::{dof_for_rows, ProblemShape, RankTriple, View};

/// One sampled entry. Indices are zero-based; `column` indexes the pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Equation {
    pub view: View,
    pub row: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct PolynomialSystem {
    ranks: RankTriple,
    shape: ProblemShape,
    canonical: CanonicalPattern,
    /// Variable id of each free `V` entry, row-major over `n x r`.
    v_var: Vec<Option<usize>>,
    basis_vars: usize,
    equations: Vec<Equation>,
}

/// Builds the system for every observed entry of `pattern`, column by
/// column.
pub fn build_system(pattern: &SamplingPattern, ranks: RankTriple) -> Result<PolynomialSystem> {
    let shape = pattern.shape();
    let entries = (0..shape.columns()).flat_map(|c| pattern.column_rows(c).map(move |x| (x, c)));
    build_system_for_entries(shape, ranks, entries)
}

/// Builds the system for the given zero-based `(row, column)` entries.
pub fn build_system_for_entries<I: IntoIterator<Item = (usize, usize)>>(
    shape: ProblemShape,
    ranks: RankTriple,
    entries: I,
) -> Result<PolynomialSystem> {
    shape.check_ranks(ranks)?;
    let canonical = CanonicalPattern::new(shape.n, ranks)?;
    let r = ranks.r();
    let mut v_var = vec![None; shape.n * r];
    let mut next = 0;
    for (row, col) in canonical.free_entries() {
        v_var[row * r + col] = Some(next);
        next += 1;
    }
    debug_assert_eq!(next, dof_for_rows(shape.n, ranks)?);
    let mut equations = Vec::new();
    for (row, column) in entries {
        if row >= shape.n || column >= shape.columns() {
            return Err(Error::DimensionMismatch(format!(
                "entry ({}, {}) outside {}x{}",
                row + 1,
                column + 1,
                shape.n,
                shape.columns()
            )));
        }
        equations.push(Equation {
            view: shape.view_of(column),
            row,
            column,
        });
    }
    Ok(PolynomialSystem {
        ranks,
        shape,
        canonical,
        v_var,
        basis_vars: next,
        equations,
    })
}

/// Values of every basis entry and coefficient at one evaluation point.
pub(crate) struct Point<T> {
    v: Vec<T>,
    t1: Vec<T>,
    t2: Vec<T>,
}

impl PolynomialSystem {
    pub fn ranks(&self) -> RankTriple {
        self.ranks
    }

    pub fn shape(&self) -> ProblemShape {
        self.shape
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    /// Free entries of the canonical basis, `basis_dof` of them.
    pub fn basis_variables(&self) -> usize {
        self.basis_vars
    }

    pub fn variable_count(&self) -> usize {
        self.basis_vars + self.ranks.r1() * self.shape.m1 + self.ranks.r2() * self.shape.m2
    }

    fn view_offset(&self, view: View) -> usize {
        match view {
            View::First => 0,
            View::Second => self.ranks.derived().r1p,
        }
    }

    /// Variable id of `T_v[k, i]`, `i` relative to the view.
    fn t_var(&self, view: View, k: usize, i: usize) -> usize {
        match view {
            View::First => self.basis_vars + i * self.ranks.r1() + k,
            View::Second => {
                self.basis_vars + self.ranks.r1() * self.shape.m1 + i * self.ranks.r2() + k
            }
        }
    }

    fn local_column(&self, column: usize) -> usize {
        if column < self.shape.m1 {
            column
        } else {
            column - self.shape.m1
        }
    }

    fn random_point<T: Copy>(&self, mut draw: impl FnMut() -> T, one: T, zero: T) -> Point<T> {
        let r = self.ranks.r();
        let mut v = Vec::with_capacity(self.shape.n * r);
        for row in 0..self.shape.n {
            for col in 0..r {
                v.push(match self.canonical.get(row, col) {
                    Some(1) => one,
                    Some(_) => zero,
                    None => draw(),
                });
            }
        }
        let t1 = (0..self.ranks.r1() * self.shape.m1).map(|_| draw()).collect();
        let t2 = (0..self.ranks.r2() * self.shape.m2).map(|_| draw()).collect();
        Point { v, t1, t2 }
    }

    /// Calls `emit(var, value)` for every nonzero-pattern entry of the
    /// gradient of `eq` at `pt`.
    fn gradient<T: Copy>(&self, eq: &Equation, pt: &Point<T>, mut emit: impl FnMut(usize, T)) {
        let r = self.ranks.r();
        let rv = self.ranks.of_view(eq.view);
        let off = self.view_offset(eq.view);
        let i = self.local_column(eq.column);
        let t = match eq.view {
            View::First => &pt.t1,
            View::Second => &pt.t2,
        };
        for k in 0..rv {
            let vcol = off + k;
            if let Some(var) = self.v_var[eq.row * r + vcol] {
                emit(var, t[i * rv + k]);
            }
            emit(self.t_var(eq.view, k, i), pt.v[eq.row * r + vcol]);
        }
    }

    /// Random point with the canonical constants in place.
    pub(crate) fn draw_point<O: Ops, R: Rng + ?Sized>(&self, ops: &O, rng: &mut R) -> Point<O::T> {
        self.random_point(|| ops.draw(rng), ops.one(), ops.zero())
    }

    /// Jacobian rows of the selected equations at `pt`.
    pub(crate) fn jacobian<O: Ops>(&self, selected: &[usize], ops: &O, pt: &Point<O::T>) -> Vec<Vec<O::T>> {
        let cols = self.variable_count();
        selected
            .iter()
            .map(|&e| {
                let mut row = vec![ops.zero(); cols];
                self.gradient(&self.equations[e], pt, |var, val| row[var] = val);
                row
            })
            .collect()
    }

    /// Gradient of the sampled entry `(x, column)` after eliminating the
    /// coefficients of `column` with the equations at `pivots` (same column).
    /// The result lives on the basis variables only. `None` when the pivot
    /// block is singular at `pt`.
    pub(crate) fn reduced_gradient<O: Ops>(
        &self,
        ops: &O,
        pt: &Point<O::T>,
        view: View,
        column: usize,
        pivots: &[usize],
        x: usize,
    ) -> Option<Vec<O::T>> {
        let r = self.ranks.r();
        let rv = self.ranks.of_view(view);
        let off = self.view_offset(view);
        let i = self.local_column(column);
        let t = match view {
            View::First => &pt.t1,
            View::Second => &pt.t2,
        };
        let vrow = |row: usize, k: usize| pt.v[row * r + off + k];
        // Coefficients c with sum_j c_j V[p_j, :] = V[x, :], i.e. P^T c = a.
        let pt_mat: Vec<Vec<O::T>> = (0..rv)
            .map(|k| pivots.iter().map(|&pj| vrow(pj, k)).collect())
            .collect();
        let a: Vec<O::T> = (0..rv).map(|k| vrow(x, k)).collect();
        let c = ops.solve(pt_mat, a)?;
        let mut out = vec![ops.zero(); self.basis_vars];
        for k in 0..rv {
            let tk = t[i * rv + k];
            if let Some(var) = self.v_var[x * r + off + k] {
                out[var] = ops.add(out[var], tk);
            }
            for (j, &pj) in pivots.iter().enumerate() {
                if let Some(var) = self.v_var[pj * r + off + k] {
                    out[var] = ops.sub(out[var], ops.mul(c[j], tk));
                }
            }
        }
        Some(out)
    }

    /// Index of the equation at `(row, column)`, if that entry is observed.
    pub fn equation_index(&self, row: usize, column: usize) -> Option<usize> {
        self.equations
            .iter()
            .position(|e| e.row == row && e.column == column)
    }
}
