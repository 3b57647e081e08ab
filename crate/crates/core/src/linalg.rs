//! Floating-point helpers on top of nalgebra.

use std::fmt::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Inverse of a square matrix via partial-pivoted LU, or `None` when a pivot
/// falls below `1e-12 * max|entry|`.
pub fn checked_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let k = m.nrows();
    debug_assert_eq!(k, m.ncols());
    if k == 0 {
        return Some(DMatrix::zeros(0, 0));
    }
    let scale = m.amax();
    if scale == 0.0 {
        return None;
    }
    let lu = m.clone().lu();
    let u = lu.u();
    if (0..k).any(|i| u[(i, i)].abs() <= 1e-12 * scale) {
        return None;
    }
    lu.try_inverse()
}

/// Solves `m x = b` with the same singularity threshold as [`checked_inverse`].
pub fn checked_solve(m: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let k = m.nrows();
    if k == 0 {
        return Some(DMatrix::zeros(0, b.ncols()));
    }
    let scale = m.amax();
    if scale == 0.0 {
        return None;
    }
    let lu = m.clone().lu();
    let u = lu.u();
    if (0..k).any(|i| u[(i, i)].abs() <= 1e-12 * scale) {
        return None;
    }
    lu.solve(b)
}

/// Rows of `m` picked by `rows`, in the given order.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Parses `rows cols` on the first line followed by one whitespace-separated
/// row per line. Blank lines and `#` comments are skipped.
pub fn parse_dense_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line, message: String| Error::Parse { line, message };
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(hline, format!("bad dimension `{t}`"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(err(hline, "header must be `rows cols`".into()));
    };
    let mut m = DMatrix::zeros(rows, cols);
    let mut seen = 0;
    for (lno, line) in lines {
        if seen == rows {
            return Err(err(lno, format!("more than {rows} rows")));
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(lno, format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        if vals.len() != cols {
            return Err(err(lno, format!("expected {cols} values, got {}", vals.len())));
        }
        for (j, v) in vals.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(err(lno, "non-finite value".into()));
            }
            m[(seen, j)] = v;
        }
        seen += 1;
    }
    if seen != rows {
        return Err(err(0, format!("expected {rows} rows, got {seen}")));
    }
    Ok(m)
}

/// Inverse of [`parse_dense_matrix`]; values use the shortest round-trip form.
pub fn format_dense_matrix(m: &DMatrix<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| {
            // Avoid printing negative zero.
            let v = m[(i, j)];
            format!("{}", if v == 0.0 { 0.0 } else { v })
        }).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
