//! Rank arithmetic shared by every other module.
//!
//! A two-view matrix `U = [U1 | U2]` carries three rank constraints:
//! `rank(U) = r`, `rank(U1) = r1`, `rank(U2) = r2`. A basis of `U` splits into
//! three column blocks `[V1 | V2 | V3]` of widths `(r1', r', r2')`, where `V2`
//! is shared by both views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::SamplingPattern;

/// Which view a column belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum View {
    First,
    Second,
}

impl View {
    /// 1 or 2, as used in text formats.
    pub fn number(self) -> u8 {
        match self {
            View::First => 1,
            View::Second => 2,
        }
    }
}

impl std::fmt::Display for View {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Validated `(r, r1, r2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRanks", into = "RawRanks")]
pub struct RankTriple {
    r: usize,
    r1: usize,
    r2: usize,
}

#[derive(Serialize, Deserialize)]
struct RawRanks {
    r: usize,
    r1: usize,
    r2: usize,
}

impl TryFrom<RawRanks> for RankTriple {
    type Error = Error;
    fn try_from(raw: RawRanks) -> Result<Self> {
        RankTriple::new(raw.r, raw.r1, raw.r2)
    }
}

impl From<RankTriple> for RawRanks {
    fn from(t: RankTriple) -> Self {
        RawRanks {
            r: t.r,
            r1: t.r1,
            r2: t.r2,
        }
    }
}

/// Block widths `(r1', r2', r')` of the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DerivedRanks {
    /// Width of `V1`, `r - r2`.
    pub r1p: usize,
    /// Width of `V3`, `r - r1`.
    pub r2p: usize,
    /// Width of the shared block `V2`, `r1 + r2 - r`.
    pub rp: usize,
}

impl RankTriple {
    pub fn new(r: usize, r1: usize, r2: usize) -> Result<Self> {
        let invalid = |reason| Error::InvalidRankTriple { r, r1, r2, reason };
        if r1 > r {
            return Err(invalid("r1 exceeds r"));
        }
        if r2 > r {
            return Err(invalid("r2 exceeds r"));
        }
        let sum = r1.checked_add(r2).ok_or(Error::Overflow("r1 + r2"))?;
        if r > sum {
            return Err(invalid("r exceeds r1 + r2"));
        }
        Ok(RankTriple { r, r1, r2 })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn r1(&self) -> usize {
        self.r1
    }

    pub fn r2(&self) -> usize {
        self.r2
    }

    pub fn of_view(&self, view: View) -> usize {
        match view {
            View::First => self.r1,
            View::Second => self.r2,
        }
    }

    pub fn derived(&self) -> DerivedRanks {
        DerivedRanks {
            r1p: self.r - self.r2,
            r2p: self.r - self.r1,
            rp: self.r1 + self.r2 - self.r,
        }
    }

    /// Row offset `max(r1', r2')` of the identity block of `V2` in a canonical basis.
    pub fn canonical_offset(&self) -> usize {
        let d = self.derived();
        d.r1p.max(d.r2p)
    }
}

impl std::fmt::Display for RankTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.r, self.r1, self.r2)
    }
}

impl std::str::FromStr for RankTriple {
    type Err = Error;

    /// Parses `r,r1,r2`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let parse_err = || Error::Parse {
            line: 0,
            message: format!("expected ranks as `r,r1,r2`, got `{s}`"),
        };
        if parts.len() != 3 {
            return Err(parse_err());
        }
        let mut vals = [0usize; 3];
        for (v, p) in vals.iter_mut().zip(&parts) {
            *v = p.parse().map_err(|_| parse_err())?;
        }
        RankTriple::new(vals[0], vals[1], vals[2])
    }
}

/// `(r1-r2, r-r1, r1+r2-r)` for a validated triple.
pub fn derived_ranks(ranks: RankTriple) -> DerivedRanks {
    ranks.derived()
}

/// `n x (m1 + m2)` with the view split after column `m1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemShape {
    pub n: usize,
    pub m1: usize,
    pub m2: usize,
}

impl ProblemShape {
    pub fn new(n: usize, m1: usize, m2: usize) -> Result<Self> {
        if n == 0 || m1 == 0 || m2 == 0 {
            return Err(Error::InvalidShape(format!(
                "n, m1, m2 must be positive (got {n}, {m1}, {m2})"
            )));
        }
        m1.checked_add(m2).ok_or(Error::Overflow("m1 + m2"))?;
        n.checked_mul(m1 + m2).ok_or(Error::Overflow("n * (m1 + m2)"))?;
        Ok(ProblemShape { n, m1, m2 })
    }

    pub fn columns(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn view_of(&self, column: usize) -> View {
        if column < self.m1 {
            View::First
        } else {
            View::Second
        }
    }

    pub fn view_columns(&self, view: View) -> std::ops::Range<usize> {
        match view {
            View::First => 0..self.m1,
            View::Second => self.m1..self.m1 + self.m2,
        }
    }

    /// Checks `n >= r`, `m1 >= r1`, `m2 >= r2`.
    pub fn check_ranks(&self, ranks: RankTriple) -> Result<()> {
        if self.n < ranks.r() {
            return Err(Error::InvalidShape(format!(
                "n={} is smaller than r={}",
                self.n,
                ranks.r()
            )));
        }
        if self.m1 < ranks.r1() || self.m2 < ranks.r2() {
            return Err(Error::InvalidShape(format!(
                "view widths ({}, {}) cannot carry ranks ({}, {})",
                self.m1,
                self.m2,
                ranks.r1(),
                ranks.r2()
            )));
        }
        Ok(())
    }
}

/// Dimension of one span-equivalence class of bases:
/// `n r - r^2 - r1^2 - r2^2 + r (r1 + r2)`.
pub fn basis_dof(shape: &ProblemShape, ranks: RankTriple) -> Result<usize> {
    dof_for_rows(shape.n, ranks)
}

pub(crate) fn dof_for_rows(n: usize, ranks: RankTriple) -> Result<usize> {
    let overflow = || Error::Overflow("basis degrees of freedom");
    let (r, r1, r2) = (ranks.r(), ranks.r1(), ranks.r2());
    let sq = |x: usize| x.checked_mul(x).ok_or_else(overflow);
    let plus = n
        .checked_mul(r)
        .and_then(|nr| nr.checked_add(r.checked_mul(r1 + r2)?))
        .ok_or_else(overflow)?;
    let minus = sq(r)?
        .checked_add(sq(r1)?)
        .and_then(|s| s.checked_add(sq(r2).ok()?))
        .ok_or_else(overflow)?;
    plus.checked_sub(minus).ok_or_else(|| {
        Error::InvalidShape(format!("n={n} is too small for ranks {ranks}"))
    })
}

/// Every view-1 column has at least `r1` samples and every view-2 column at
/// least `r2`.
pub fn validate_assumption1(pattern: &SamplingPattern, ranks: RankTriple) -> bool {
    first_assumption1_violation(pattern, ranks).is_none()
}

/// The first column breaking the per-column sample minimum, as an error value.
pub fn first_assumption1_violation(pattern: &SamplingPattern, ranks: RankTriple) -> Option<Error> {
    let shape = pattern.shape();
    (0..shape.columns()).find_map(|col| {
        let view = shape.view_of(col);
        let required = ranks.of_view(view);
        let observed = pattern.column_count(col);
        (observed < required).then_some(Error::Assumption1Violated {
            view,
            column: col,
            observed,
            required,
        })
    })
}
