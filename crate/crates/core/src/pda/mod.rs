//! Placement delivery arrays.
//!
//! A PDA is an `F' x K'` grid over `{*} ∪ [S]`. Stars say which user caches
//! which packet; equal integers mark packets that are XORed into the same
//! multicast message. Everything here is 1-indexed at the interface.

mod check;
mod text;

pub use check::{
    check_c4, check_c5, first_c3_violation, validate_pda, validate_pda_verbose, Condition,
    ValidationReport,
};
pub use text::{parse_pda, serialize_pda, ParsedPda};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PdaEntry {
    Star,
    Int(u32),
}

impl PdaEntry {
    pub fn is_star(self) -> bool {
        matches!(self, PdaEntry::Star)
    }

    pub fn int(self) -> Option<u32> {
        match self {
            PdaEntry::Star => None,
            PdaEntry::Int(s) => Some(s),
        }
    }
}

impl fmt::Display for PdaEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PdaEntry::Star => f.write_str("*"),
            PdaEntry::Int(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PdaError {
    #[error("array must have at least one row and one column")]
    Empty,
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry ({row},{col}) holds {value}, outside [1, {s}]")]
    IntegerOutOfRange {
        row: usize,
        col: usize,
        value: u32,
        s: u32,
    },
    #[error("row {row} has {found} stars but row 1 has {expected}")]
    NonUniformStars {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A `(K', F', Z, S)` placement delivery array candidate.
///
/// Construction only enforces shape and the integer range `[1, S]`; the
/// combinatorial conditions are checked by [`validate_pda`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pda {
    grid: Grid<PdaEntry>,
    z: usize,
    s: u32,
}

impl Pda {
    /// Builds a PDA with an explicit signature.
    pub fn with_signature(rows: Vec<Vec<PdaEntry>>, z: usize, s: u32) -> Result<Self, PdaError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(PdaError::Empty);
        }
        let expected = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != expected) {
            return Err(PdaError::Ragged {
                row: i + 1,
                expected,
                found: r.len(),
            });
        }
        let grid = Grid::from_rows(rows).expect("shape checked");
        for (row, col, e) in grid.positions() {
            if let PdaEntry::Int(value) = *e {
                if value == 0 || value > s {
                    return Err(PdaError::IntegerOutOfRange { row, col, value, s });
                }
            }
        }
        Ok(Pda { grid, z, s })
    }

    /// Builds a PDA, taking `Z` from the star count of column 1 and `S` from
    /// the largest integer present.
    pub fn from_rows(rows: Vec<Vec<PdaEntry>>) -> Result<Self, PdaError> {
        let z = rows
            .iter()
            .filter(|r| r.first().is_some_and(|e| e.is_star()))
            .count();
        let s = rows
            .iter()
            .flatten()
            .filter_map(|e| e.int())
            .max()
            .unwrap_or(0);
        Pda::with_signature(rows, z, s)
    }

    /// Number of users `K'`.
    pub fn cols(&self) -> usize {
        self.grid.cols()
    }

    /// Number of packets per file `F'`.
    pub fn rows(&self) -> usize {
        self.grid.rows()
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// `(K', F', Z, S)`.
    pub fn signature(&self) -> (usize, usize, usize, u32) {
        (self.cols(), self.rows(), self.z, self.s)
    }

    pub fn get(&self, row: usize, col: usize) -> PdaEntry {
        *self.grid.get(row, col)
    }

    pub fn row(&self, row: usize) -> &[PdaEntry] {
        self.grid.row(row)
    }

    pub fn grid(&self) -> &Grid<PdaEntry> {
        &self.grid
    }

    pub fn row_star_count(&self, row: usize) -> usize {
        self.row(row).iter().filter(|e| e.is_star()).count()
    }

    /// 1-based columns holding stars in `row`, increasing.
    pub fn star_columns(&self, row: usize) -> Vec<usize> {
        self.row(row)
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_star())
            .map(|(c, _)| c + 1)
            .collect()
    }

    /// 1-based columns holding integers in `row`, increasing.
    pub fn integer_columns(&self, row: usize) -> Vec<usize> {
        self.row(row)
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_star())
            .map(|(c, _)| c + 1)
            .collect()
    }
}

impl fmt::Display for Pda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_pda(self))
    }
}

/// Star layout of a PDA: per-row star columns plus per-position extremes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarProfile {
    /// `star_sets[j-1]` lists the star columns of row `j` in increasing order.
    pub star_sets: Vec<Vec<usize>>,
    /// Common number of stars per row.
    pub t: usize,
    /// `a[h-1]` is the smallest `h`-th star column over all rows.
    pub a: Vec<usize>,
    /// `b[h-1]` is the largest `h`-th star column over all rows.
    pub b: Vec<usize>,
}

impl StarProfile {
    /// Rebuilds the star/non-star pattern (true = star) from the star sets.
    pub fn star_mask(&self, cols: usize) -> Grid<bool> {
        let mut g = Grid::filled(self.star_sets.len(), cols, false);
        for (j, set) in self.star_sets.iter().enumerate() {
            for &k in set {
                g.set(j + 1, k, true);
            }
        }
        g
    }
}

pub fn star_profile(p: &Pda) -> Result<StarProfile, PdaError> {
    let star_sets: Vec<Vec<usize>> = (1..=p.rows()).map(|j| p.star_columns(j)).collect();
    let t = star_sets[0].len();
    if let Some((j, set)) = star_sets.iter().enumerate().find(|(_, s)| s.len() != t) {
        return Err(PdaError::NonUniformStars {
            row: j + 1,
            expected: t,
            found: set.len(),
        });
    }
    let a = (0..t)
        .map(|h| star_sets.iter().map(|s| s[h]).min().expect("rows > 0"))
        .collect();
    let b = (0..t)
        .map(|h| star_sets.iter().map(|s| s[h]).max().expect("rows > 0"))
        .collect();
    Ok(StarProfile { star_sets, t, a, b })
}
