//! Manhattan-grid microcell layout and transceiver distances.
//!
//! Coordinates are planar meters with the origin at the lower-left corner of
//! the covered area. Grid cell `(row, col)` has index `row * cols + col`;
//! lattice vertex `(row, col)` has index `row * (cols + 1) + col`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn dist_sq(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Height differences between the three tiers of transceivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heights {
    /// BS to user terminal.
    pub bs_ut: f64,
    /// Anchoring site to BS.
    pub site_bs: f64,
    /// Anchoring site to user terminal.
    pub site_ut: f64,
}

impl Default for Heights {
    fn default() -> Self {
        Heights {
            bs_ut: 8.5,
            site_bs: 2.0,
            site_ut: 10.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLayout {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub cell_side: f64,
    pub bs_position: Point2,
    pub cell_centers: Vec<Point2>,
    /// Candidate anchoring sites: every distinct vertex of the grid lattice.
    pub candidate_sites: Vec<Point2>,
    pub heights: Heights,
}

impl ScenarioLayout {
    pub fn num_cells(&self) -> usize {
        self.cell_centers.len()
    }

    pub fn num_sites(&self) -> usize {
        self.candidate_sites.len()
    }

    /// `(row, col)` of a grid cell index.
    pub fn cell_row_col(&self, cell: usize) -> (usize, usize) {
        (cell / self.grid_cols, cell % self.grid_cols)
    }

    /// `(row, col)` of a lattice vertex index.
    pub fn site_row_col(&self, site: usize) -> (usize, usize) {
        (site / (self.grid_cols + 1), site % (self.grid_cols + 1))
    }

    pub fn cell_index(&self, row: usize, col: usize) -> Option<usize> {
        (row < self.grid_rows && col < self.grid_cols).then(|| row * self.grid_cols + col)
    }

    /// Looks a site up by its exact coordinates.
    pub fn site_at(&self, p: Point2) -> Option<usize> {
        let col = p.x / self.cell_side;
        let row = p.y / self.cell_side;
        let (c, r) = (col.round(), row.round());
        if !(c >= 0.0 && r >= 0.0) || c > self.grid_cols as f64 || r > self.grid_rows as f64 {
            return None;
        }
        let idx = r as usize * (self.grid_cols + 1) + c as usize;
        (self.candidate_sites[idx] == p).then_some(idx)
    }
}

/// Builds a `rows × cols` lattice of square cells with the BS at its center.
pub fn build_layout(rows: usize, cols: usize, cell_side: f64, heights: Heights) -> Result<ScenarioLayout> {
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("grid must be at least 1x1, got {rows}x{cols}")));
    }
    if !(cell_side > 0.0 && cell_side.is_finite()) {
        return Err(invalid(format!("cell side must be positive, got {cell_side}")));
    }
    for (name, h) in [("H1", heights.bs_ut), ("H2", heights.site_bs), ("H3", heights.site_ut)] {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("height {name} must be positive, got {h}")));
        }
    }

    let cell_centers = (0..rows)
        .flat_map(|r| {
            (0..cols).map(move |c| Point2::new((c as f64 + 0.5) * cell_side, (r as f64 + 0.5) * cell_side))
        })
        .collect();
    let candidate_sites = (0..=rows)
        .flat_map(|r| (0..=cols).map(move |c| Point2::new(c as f64 * cell_side, r as f64 * cell_side)))
        .collect();
    let bs_position = Point2::new(cols as f64 * cell_side / 2.0, rows as f64 * cell_side / 2.0);

    Ok(ScenarioLayout {
        grid_rows: rows,
        grid_cols: cols,
        cell_side,
        bs_position,
        cell_centers,
        candidate_sites,
        heights,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTables {
    /// 3-D BS to grid-center distance, per grid.
    pub l_bs_ut: Vec<f64>,
    /// 3-D BS to site distance, per site.
    pub r_bs_site: Vec<f64>,
    /// 3-D site to grid-center distance, row-major `[grid][site]`.
    pub d_site_ut: Vec<f64>,
    /// Planar BS to grid-center distance, per grid.
    pub d2_bs_ut: Vec<f64>,
    num_sites: usize,
}

impl DistanceTables {
    pub fn site_ut(&self, grid: usize, site: usize) -> f64 {
        self.d_site_ut[grid * self.num_sites + site]
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }
}

pub fn compute_distances(layout: &ScenarioLayout) -> DistanceTables {
    let h = layout.heights;
    let bs = layout.bs_position;
    let slant = |planar_sq: f64, dh: f64| (planar_sq + dh * dh).sqrt();

    let l_bs_ut = layout.cell_centers.iter().map(|u| slant(u.dist_sq(&bs), h.bs_ut)).collect();
    let d2_bs_ut = layout.cell_centers.iter().map(|u| u.dist(&bs)).collect();
    let r_bs_site = layout.candidate_sites.iter().map(|p| slant(p.dist_sq(&bs), h.site_bs)).collect();
    let d_site_ut = layout
        .cell_centers
        .iter()
        .flat_map(|u| layout.candidate_sites.iter().map(move |p| slant(u.dist_sq(p), h.site_ut)))
        .collect();

    DistanceTables {
        l_bs_ut,
        r_bs_site,
        d_site_ut,
        d2_bs_ut,
        num_sites: layout.num_sites(),
    }
}
