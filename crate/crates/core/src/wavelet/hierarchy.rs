use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quad-grid subdivision hierarchy: a `base_rows x base_cols` grid refined
/// `levels` times, each refinement mapping `r -> 2r - 1` per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionHierarchy {
    base_rows: usize,
    base_cols: usize,
    levels: usize,
}

/// What a coefficient index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    /// Base-grid value (level 0).
    Scaling,
    /// Detail introduced when refining grid `level - 1` to `level`.
    Detail { level: usize },
}

impl SubdivisionHierarchy {
    pub fn new(base_rows: usize, base_cols: usize, levels: usize) -> Result<Self> {
        if base_rows < 2 || base_cols < 2 {
            return Err(Error::InvalidArgument(format!(
                "base grid must be at least 2x2, got {base_rows}x{base_cols}"
            )));
        }
        // Finest side = (base - 1) << levels + 1; keep it within u32 indexing.
        let span = |b: usize| (b - 1).checked_shl(levels as u32).map(|s| s + 1);
        match (span(base_rows), span(base_cols)) {
            (Some(r), Some(c)) if r.checked_mul(c).is_some_and(|n| n < u32::MAX as usize) => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "hierarchy {base_rows}x{base_cols} at {levels} levels is too large"
                )))
            }
        }
        Ok(SubdivisionHierarchy {
            base_rows,
            base_cols,
            levels,
        })
    }

    pub fn base_dims(&self) -> (usize, usize) {
        (self.base_rows, self.base_cols)
    }

    /// Number of refinement levels J.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Grid dimensions at `level` (0 = base, J = finest).
    pub fn dims_at(&self, level: usize) -> (usize, usize) {
        debug_assert!(level <= self.levels);
        (
            ((self.base_rows - 1) << level) + 1,
            ((self.base_cols - 1) << level) + 1,
        )
    }

    pub fn finest_dims(&self) -> (usize, usize) {
        self.dims_at(self.levels)
    }

    /// Total vertex (and coefficient) count at the finest level.
    pub fn vertex_count(&self) -> usize {
        let (r, c) = self.finest_dims();
        r * c
    }

    fn count_at(&self, level: usize) -> usize {
        let (r, c) = self.dims_at(level);
        r * c
    }

    /// Coefficients belonging to `level`: the whole base grid for level 0,
    /// the newly introduced (odd) vertices for detail levels.
    pub fn coefficients_at(&self, level: usize) -> usize {
        if level == 0 {
            self.count_at(0)
        } else {
            self.count_at(level) - self.count_at(level - 1)
        }
    }

    /// First coefficient index of `level` in the canonical order.
    pub fn coefficient_offset(&self, level: usize) -> usize {
        if level == 0 {
            0
        } else {
            self.count_at(level - 1)
        }
    }

    /// Coefficients on levels 0..=level (the set a level-limited sweep or
    /// reconstruction touches).
    pub fn coefficients_up_to(&self, level: usize) -> usize {
        self.count_at(level)
    }

    pub fn kind_of(&self, index: usize) -> CoefficientKind {
        let level = self.level_of(index);
        if level == 0 {
            CoefficientKind::Scaling
        } else {
            CoefficientKind::Detail { level }
        }
    }

    /// Level of a coefficient index (0 for scaling).
    pub fn level_of(&self, index: usize) -> usize {
        debug_assert!(index < self.vertex_count());
        // count_at is strictly increasing; the level is the smallest j with
        // index < count_at(j).
        let mut level = 0;
        while index >= self.count_at(level) {
            level += 1;
        }
        level
    }

    /// Coefficient index for a grid position at `level`. Level 0 accepts
    /// any base-grid position; detail levels require an odd position
    /// (at least one odd coordinate in the level-`level` grid).
    pub fn coefficient_index(&self, level: usize, row: usize, col: usize) -> usize {
        let (rows, cols) = self.dims_at(level);
        debug_assert!(row < rows && col < cols);
        if level == 0 {
            return row * cols + col;
        }
        debug_assert!(row % 2 == 1 || col % 2 == 1, "not an odd position");
        self.coefficient_offset(level) + detail_rank(cols, row, col)
    }

    /// Inverse of [`coefficient_index`](Self::coefficient_index):
    /// (level, row, col) in the level's own grid coordinates.
    pub fn coefficient_position(&self, index: usize) -> (usize, usize, usize) {
        let level = self.level_of(index);
        if level == 0 {
            let (_, cols) = self.dims_at(0);
            return (0, index / cols, index % cols);
        }
        let (_, cols) = self.dims_at(level);
        let rank = index - self.coefficient_offset(level);
        let cols_odd = cols / 2;
        let pair = cols_odd + cols; // odd positions in an (even row, odd row) pair
        let rp = rank / pair;
        let rem = rank % pair;
        if rem < cols_odd {
            (level, 2 * rp, 2 * rem + 1)
        } else {
            (level, 2 * rp + 1, rem - cols_odd)
        }
    }

    /// Finest-grid flat vertex index of a level-`level` grid position.
    pub fn finest_index(&self, level: usize, row: usize, col: usize) -> usize {
        let stride = 1usize << (self.levels - level);
        let (_, cols) = self.finest_dims();
        row * stride * cols + col * stride
    }

    /// Chebyshev-radius bound (in finest-grid units) of the inverse
    /// transform's response to a single coefficient at `level`. Scaling
    /// coefficients spread to `2^J - 1`; a level-j detail reaches at most
    /// `3 * 2^(J-j) - 1`.
    pub fn support_radius_bound(&self, level: usize) -> usize {
        let up = 1usize << (self.levels - level);
        if level == 0 {
            (1usize << self.levels) - 1
        } else {
            3 * up - 1
        }
    }
}

/// Rank of an odd position (row, col) in the row-major scan of a grid with
/// `cols` columns restricted to odd positions.
fn detail_rank(cols: usize, row: usize, col: usize) -> usize {
    let cols_odd = cols / 2;
    let odd_rows_before = row / 2;
    let even_rows_before = row - odd_rows_before;
    let before = odd_rows_before * cols + even_rows_before * cols_odd;
    before
        + if row % 2 == 1 {
            col
        } else {
            col / 2
        }
}
