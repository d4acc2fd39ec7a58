//! Dense row-major 2-D storage shared by PDAs and the per-round scheme arrays.
//!
//! Storage is 0-indexed; every public accessor that takes a row or column uses
//! 1-based indices, matching how the arrays are written down on paper.

use serde::{Deserialize, Serialize};

/// Cyclic reduction into `{1, ..., modulus}`.
///
/// `wrap(modulus, modulus) == modulus` and `wrap(0, modulus) == modulus`, unlike
/// the usual `{0, ..., modulus - 1}` remainder.
pub fn wrap(value: i64, modulus: usize) -> usize {
    assert!(modulus > 0, "modulus must be positive");
    let m = modulus as i64;
    let r = value.rem_euclid(m);
    if r == 0 {
        modulus
    } else {
        r as usize
    }
}

/// Cyclic distance between two 1-based positions on a ring of `modulus` nodes.
pub fn cyclic_distance(x: usize, y: usize, modulus: usize) -> usize {
    let fwd = wrap(x as i64 - y as i64, modulus);
    let bwd = wrap(y as i64 - x as i64, modulus);
    fwd.min(bwd)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    cells: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Grid {
            rows,
            cols,
            cells: vec![value; rows * cols],
        }
    }

    /// Cyclically right-shift every row by `by` columns: column `k` of the
    /// result holds column `wrap(k - by)` of `self`.
    pub fn shift_right(&self, by: usize) -> Self {
        let mut out = self.clone();
        if self.cols == 0 {
            return out;
        }
        for r in 0..self.rows {
            for c in 0..self.cols {
                let dst = (c + by) % self.cols;
                out.cells[r * self.cols + dst] = self.cells[r * self.cols + c].clone();
            }
        }
        out
    }
}

impl<T> Grid<T> {
    /// Builds a grid from nested rows. Returns `None` when rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return None;
        }
        Some(Grid {
            rows: n_rows,
            cols: n_cols,
            cells: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 1-based access.
    pub fn get(&self, row: usize, col: usize) -> &T {
        assert!(
            (1..=self.rows).contains(&row) && (1..=self.cols).contains(&col),
            "position ({row},{col}) outside {}x{} grid",
            self.rows,
            self.cols
        );
        &self.cells[(row - 1) * self.cols + (col - 1)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        assert!((1..=self.rows).contains(&row) && (1..=self.cols).contains(&col));
        self.cells[(row - 1) * self.cols + (col - 1)] = value;
    }

    /// Row `row` (1-based) as a slice.
    pub fn row(&self, row: usize) -> &[T] {
        let start = (row - 1) * self.cols;
        &self.cells[start..start + self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        self.cells.chunks(self.cols.max(1)).take(self.rows)
    }

    /// Iterates `(row, col, &value)` in row-major order, 1-based.
    pub fn positions(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let cols = self.cols;
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, v)| (i / cols + 1, i % cols + 1, v))
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            cells: self.cells.iter().map(f).collect(),
        }
    }
}
