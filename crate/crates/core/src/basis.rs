//! Canonical bases, span equivalence, and coefficient recovery.
//!
//! With block widths `(r1', r', r2')` and `o = max(r1', r2')`, a basis
//! `V = [V1 | V2 | V3]` is canonical when
//!
//! * `V1` rows `0..r1'` are the identity and rows `o..o+r'` are zero,
//! * `V2` rows `o..o+r'` are the identity,
//! * `V3` rows `0..r2'` are the identity and rows `o..o+r'` are zero.
//!
//! Every generic basis has exactly one canonical representative in its
//! span-equivalence class.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{checked_inverse, checked_solve, numerical_rank, select_rows};
use crate::pattern::{view_basis, SamplingPattern};
use crate::ranks::{first_assumption1_violation, RankTriple, View};

/// Which entries of an `n x r` canonical basis are fixed, and to what.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalPattern {
    n: usize,
    r: usize,
    /// Row-major; `Some(v)` for a fixed entry equal to `v`.
    fixed: Vec<Option<u8>>,
}

impl CanonicalPattern {
    pub fn new(n: usize, ranks: RankTriple) -> Result<Self> {
        let r = ranks.r();
        let d = ranks.derived();
        let o = ranks.canonical_offset();
        if n < o + d.rp {
            return Err(Error::InvalidShape(format!(
                "n={n} has too few rows for the canonical pattern of {ranks}"
            )));
        }
        let mut fixed = vec![None; n * r];
        let mut put = |row: usize, col: usize, v: u8| fixed[row * r + col] = Some(v);
        let shared = o..o + d.rp;
        // V1
        for c in 0..d.r1p {
            for row in 0..d.r1p {
                put(row, c, u8::from(row == c));
            }
            for row in shared.clone() {
                put(row, c, 0);
            }
        }
        // V2
        for c in 0..d.rp {
            for (i, row) in shared.clone().enumerate() {
                put(row, d.r1p + c, u8::from(i == c));
            }
        }
        // V3
        let base3 = ranks.r1();
        for c in 0..d.r2p {
            for row in 0..d.r2p {
                put(row, base3 + c, u8::from(row == c));
            }
            for row in shared.clone() {
                put(row, base3 + c, 0);
            }
        }
        Ok(CanonicalPattern { n, r, fixed })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.r
    }

    pub fn get(&self, row: usize, col: usize) -> Option<u8> {
        self.fixed[row * self.r + col]
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_some()).count()
    }

    /// Free entries in row-major order.
    pub fn free_entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n * self.r)
            .filter(|&i| self.fixed[i].is_none())
            .map(|i| (i / self.r, i % self.r))
    }
}

/// An `n x r` basis in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBasis {
    pub v: DMatrix<f64>,
}

/// Change-of-basis blocks relating two span-equivalent bases:
/// `V1 = [V1'|V2'] A1`, `V2 = V2' A2`, `V3 = [V2'|V3'] A3`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceWitness {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub a3: DMatrix<f64>,
}

fn check_basis_shape(v: &DMatrix<f64>, ranks: RankTriple) -> Result<()> {
    if v.ncols() != ranks.r() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} columns, ranks {} need {}",
            v.ncols(),
            ranks,
            ranks.r()
        )));
    }
    Ok(())
}

/// Canonical representative of `v` together with the blocks that produce it.
pub fn canonicalize_with_witness(
    v: &DMatrix<f64>,
    ranks: RankTriple,
) -> Result<(CanonicalBasis, EquivalenceWitness)> {
    check_basis_shape(v, ranks)?;
    let d = ranks.derived();
    let o = ranks.canonical_offset();
    let n = v.nrows();
    if n < o + d.rp {
        return Err(Error::InvalidShape(format!(
            "basis has {n} rows, canonical pattern needs {}",
            o + d.rp
        )));
    }
    let shared: Vec<usize> = (o..o + d.rp).collect();
    let v1 = view_basis(v, ranks, View::First);
    let v2 = v.columns(d.r1p, d.rp).into_owned();
    let v3 = view_basis(v, ranks, View::Second);

    let a2 = checked_inverse(&select_rows(&v2, &shared)).ok_or(Error::SingularRowBlock("B3"))?;

    let rows1: Vec<usize> = (0..d.r1p).chain(shared.iter().copied()).collect();
    let inv1 = checked_inverse(&select_rows(&v1, &rows1)).ok_or(Error::SingularRowBlock("B1/B4"))?;
    let a1 = inv1.columns(0, d.r1p).into_owned();

    let rows3: Vec<usize> = (0..d.r2p).chain(shared.iter().copied()).collect();
    let inv3 = checked_inverse(&select_rows(&v3, &rows3)).ok_or(Error::SingularRowBlock("B2/B5"))?;
    let a3 = inv3.columns(0, d.r2p).into_owned();

    let mut out = DMatrix::zeros(n, ranks.r());
    out.columns_mut(0, d.r1p).copy_from(&(&v1 * &a1));
    out.columns_mut(d.r1p, d.rp).copy_from(&(&v2 * &a2));
    out.columns_mut(ranks.r1(), d.r2p).copy_from(&(&v3 * &a3));
    // Pin the fixed entries exactly; they already agree to rounding error.
    let pattern = CanonicalPattern::new(n, ranks)?;
    for row in 0..n {
        for col in 0..ranks.r() {
            if let Some(f) = pattern.get(row, col) {
                out[(row, col)] = f64::from(f);
            }
        }
    }
    Ok((CanonicalBasis { v: out }, EquivalenceWitness { a1, a2, a3 }))
}

/// The unique canonical basis span-equivalent to `v`.
pub fn canonicalize(v: &DMatrix<f64>, ranks: RankTriple) -> Result<CanonicalBasis> {
    canonicalize_with_witness(v, ranks).map(|(b, _)| b)
}

/// Largest deviation of `v` from the canonical fixed entries.
pub fn canonical_deviation(v: &DMatrix<f64>, ranks: RankTriple) -> Result<f64> {
    check_basis_shape(v, ranks)?;
    let pattern = CanonicalPattern::new(v.nrows(), ranks)?;
    let mut worst: f64 = 0.0;
    for row in 0..v.nrows() {
        for col in 0..ranks.r() {
            if let Some(f) = pattern.get(row, col) {
                worst = worst.max((v[(row, col)] - f64::from(f)).abs());
            }
        }
    }
    Ok(worst)
}

fn same_span(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    if a.ncols() == 0 || b.ncols() == 0 {
        return a.ncols() == b.ncols();
    }
    let ra = numerical_rank(a, tol);
    let rb = numerical_rank(b, tol);
    let joint = numerical_rank(&concat(a, b), tol);
    ra == rb && ra == joint
}

fn concat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

/// Same spans for the shared block, each view, and (implied) the whole basis.
pub fn is_span_equivalent(v: &DMatrix<f64>, w: &DMatrix<f64>, ranks: RankTriple) -> bool {
    const TOL: f64 = 1e-9;
    if v.shape() != w.shape() || v.ncols() != ranks.r() {
        return false;
    }
    let d = ranks.derived();
    let shared_v = v.columns(d.r1p, d.rp).into_owned();
    let shared_w = w.columns(d.r1p, d.rp).into_owned();
    same_span(&shared_v, &shared_w, TOL)
        && same_span(&view_basis(v, ranks, View::First), &view_basis(w, ranks, View::First), TOL)
        && same_span(&view_basis(v, ranks, View::Second), &view_basis(w, ranks, View::Second), TOL)
}

/// Coefficients `(T1, T2)` from the pivot observations of every column:
/// column `i` of view `v` solves the `r_v x r_v` system on its `r_v`
/// smallest observed rows. `values` is the full `n x (m1+m2)` matrix; only
/// observed entries are read.
pub fn solve_coefficients(
    v: &DMatrix<f64>,
    pattern: &SamplingPattern,
    values: &DMatrix<f64>,
    ranks: RankTriple,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_basis_shape(v, ranks)?;
    let shape = pattern.shape();
    if values.shape() != (shape.n, shape.columns()) || v.nrows() != shape.n {
        return Err(Error::DimensionMismatch(format!(
            "values are {}x{}, basis has {} rows, pattern is {}x{}",
            values.nrows(),
            values.ncols(),
            v.nrows(),
            shape.n,
            shape.columns()
        )));
    }
    if let Some(e) = first_assumption1_violation(pattern, ranks) {
        return Err(e);
    }
    let mut t1 = DMatrix::zeros(ranks.r1(), shape.m1);
    let mut t2 = DMatrix::zeros(ranks.r2(), shape.m2);
    for col in 0..shape.columns() {
        let view = shape.view_of(col);
        let rv = ranks.of_view(view);
        let basis = view_basis(v, ranks, view);
        let rows: Vec<usize> = pattern.column_rows(col).take(rv).collect();
        let a = select_rows(&basis, &rows);
        let b = DMatrix::from_fn(rv, 1, |i, _| values[(rows[i], col)]);
        let x = checked_solve(&a, &b).ok_or(Error::SingularPivotSystem { column: col })?;
        match view {
            View::First => t1.column_mut(col).copy_from(&x),
            View::Second => t2.column_mut(col - shape.m1).copy_from(&x),
        }
    }
    Ok((t1, t2))
}
