//! The two arithmetics the oracle can run in, behind one small interface.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::field::{rank_mod_p, PrimeField};
use crate::linalg::{checked_solve, numerical_rank};

pub(crate) trait Ops: Sync {
    type T: Copy + Send + Sync;

    fn zero(&self) -> Self::T;
    fn one(&self) -> Self::T;
    fn add(&self, a: Self::T, b: Self::T) -> Self::T;
    fn sub(&self, a: Self::T, b: Self::T) -> Self::T;
    fn mul(&self, a: Self::T, b: Self::T) -> Self::T;
    /// A generic random value.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::T;
    /// Solves the square system `a x = b`; `None` if singular.
    fn solve(&self, a: Vec<Vec<Self::T>>, b: Vec<Self::T>) -> Option<Vec<Self::T>>;
    fn rank(&self, rows: Vec<Vec<Self::T>>, ncols: usize) -> usize;
}

/// Exact arithmetic in `GF(p)`.
pub(crate) struct ModP(pub PrimeField);

impl Ops for ModP {
    type T = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        self.0.add(a, b)
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        self.0.sub(a, b)
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        self.0.mul(a, b)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.0.random_nonzero(rng)
    }

    fn solve(&self, mut a: Vec<Vec<u64>>, mut b: Vec<u64>) -> Option<Vec<u64>> {
        let f = &self.0;
        let k = b.len();
        for col in 0..k {
            let piv = (col..k).find(|&i| a[i][col] != 0)?;
            a.swap(col, piv);
            b.swap(col, piv);
            let inv = f.inv(a[col][col]);
            for j in col..k {
                a[col][j] = f.mul(a[col][j], inv);
            }
            b[col] = f.mul(b[col], inv);
            for i in 0..k {
                if i == col || a[i][col] == 0 {
                    continue;
                }
                let factor = a[i][col];
                for j in col..k {
                    let t = f.mul(factor, a[col][j]);
                    a[i][j] = f.sub(a[i][j], t);
                }
                let t = f.mul(factor, b[col]);
                b[i] = f.sub(b[i], t);
            }
        }
        Some(b)
    }

    fn rank(&self, rows: Vec<Vec<u64>>, ncols: usize) -> usize {
        rank_mod_p(&self.0, rows, ncols)
    }
}

/// Floating point with a relative singular-value threshold.
pub(crate) struct Real {
    pub tol: f64,
}

impl Ops for Real {
    type T = f64;

    fn zero(&self) -> f64 {
        0.0
    }

    fn one(&self) -> f64 {
        1.0
    }

    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }

    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }

    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.sample(StandardNormal)
    }

    fn solve(&self, a: Vec<Vec<f64>>, b: Vec<f64>) -> Option<Vec<f64>> {
        let k = b.len();
        let m = DMatrix::from_fn(k, k, |i, j| a[i][j]);
        let rhs = DMatrix::from_column_slice(k, 1, &b);
        checked_solve(&m, &rhs).map(|x| x.iter().copied().collect())
    }

    fn rank(&self, rows: Vec<Vec<f64>>, ncols: usize) -> usize {
        let m = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        numerical_rank(&m, self.tol)
    }
}
