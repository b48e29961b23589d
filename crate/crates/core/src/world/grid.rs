//! Occupancy grid and its ASCII map format.
//!
//! The map file starts with a header line `width height resolution`
//! followed by `height` rows of `width` characters: `.` free, `#` static
//! obstacle known to the planner, `?` static obstacle unknown to the
//! planner. The first row is the top of the map (largest y).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Free,
    StaticKnown,
    StaticUnknown,
}

impl Cell {
    pub fn is_occupied(self) -> bool {
        !matches!(self, Cell::Free)
    }

    fn symbol(self) -> char {
        match self {
            Cell::Free => '.',
            Cell::StaticKnown => '#',
            Cell::StaticUnknown => '?',
        }
    }

    fn from_symbol(c: char) -> Option<Cell> {
        match c {
            '.' => Some(Cell::Free),
            '#' => Some(Cell::StaticKnown),
            '?' => Some(Cell::StaticUnknown),
            _ => None,
        }
    }
}

/// Row-major grid anchored at the world origin; cell `(i, j)` covers
/// `[i*res, (i+1)*res) x [j*res, (j+1)*res)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<Cell>,
    occupied_count: usize,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(NavError::InvalidMap(format!("zero-sized grid {width}x{height}")));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(NavError::InvalidMap(format!("resolution must be positive, got {resolution}")));
        }
        Ok(Self {
            width,
            height,
            resolution,
            cells: vec![Cell::Free; width * height],
            occupied_count: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Metric extent `(width_m, height_m)`.
    pub fn extent(&self) -> (f64, f64) {
        (self.width as f64 * self.resolution, self.height as f64 * self.resolution)
    }

    /// True when no cell is occupied; lets raycasts skip grid traversal.
    pub fn is_empty(&self) -> bool {
        self.occupied_count == 0
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied_count
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn in_bounds(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height
    }

    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[self.index(i, j)]
    }

    /// Cell lookup that treats out-of-range indices as `None`.
    pub fn get_checked(&self, i: i64, j: i64) -> Option<Cell> {
        self.in_bounds(i, j).then(|| self.get(i as usize, j as usize))
    }

    pub fn set(&mut self, i: usize, j: usize, cell: Cell) {
        let idx = self.index(i, j);
        let old = self.cells[idx];
        if old.is_occupied() != cell.is_occupied() {
            if cell.is_occupied() {
                self.occupied_count += 1;
            } else {
                self.occupied_count -= 1;
            }
        }
        self.cells[idx] = cell;
    }

    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_occupied()
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        let (w, h) = self.extent();
        p.x >= 0.0 && p.y >= 0.0 && p.x < w && p.y < h
    }

    pub fn world_to_cell(&self, p: Vec2) -> Option<(usize, usize)> {
        if !p.is_finite() {
            return None;
        }
        let i = (p.x / self.resolution).floor() as i64;
        let j = (p.y / self.resolution).floor() as i64;
        self.in_bounds(i, j).then_some((i as usize, j as usize))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new((i as f64 + 0.5) * self.resolution, (j as f64 + 0.5) * self.resolution)
    }

    /// Distance from `p` to the closest point of cell `(i, j)`; zero inside.
    pub fn distance_to_cell(&self, p: Vec2, i: usize, j: usize) -> f64 {
        let x0 = i as f64 * self.resolution;
        let y0 = j as f64 * self.resolution;
        let dx = (x0 - p.x).max(0.0).max(p.x - (x0 + self.resolution));
        let dy = (y0 - p.y).max(0.0).max(p.y - (y0 + self.resolution));
        dx.hypot(dy)
    }

    /// Cell index window covering the disc of `radius` around `p`, clipped to the grid.
    pub fn cells_in_disc_bbox(&self, p: Vec2, radius: f64) -> Option<(usize, usize, usize, usize)> {
        let res = self.resolution;
        let i0 = ((p.x - radius) / res).floor() as i64;
        let i1 = ((p.x + radius) / res).floor() as i64;
        let j0 = ((p.y - radius) / res).floor() as i64;
        let j1 = ((p.y + radius) / res).floor() as i64;
        let i0 = i0.max(0);
        let j0 = j0.max(0);
        let i1 = i1.min(self.width as i64 - 1);
        let j1 = j1.min(self.height as i64 - 1);
        (i0 <= i1 && j0 <= j1).then_some((i0 as usize, j0 as usize, i1 as usize, j1 as usize))
    }

    /// Minimum distance from `p` to any occupied cell within `search_radius`.
    pub fn nearest_occupied_within(&self, p: Vec2, search_radius: f64) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let (i0, j0, i1, j1) = self.cells_in_disc_bbox(p, search_radius)?;
        let mut best: Option<f64> = None;
        for j in j0..=j1 {
            for i in i0..=i1 {
                if self.is_occupied(i, j) {
                    let d = self.distance_to_cell(p, i, j);
                    if d <= search_radius && best.is_none_or(|b| d < b) {
                        best = Some(d);
                    }
                }
            }
        }
        best
    }

    /// True if any occupied cell overlaps the open disc.
    pub fn disc_overlaps_occupied(&self, center: Vec2, radius: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let Some((i0, j0, i1, j1)) = self.cells_in_disc_bbox(center, radius) else {
            return false;
        };
        (j0..=j1).any(|j| (i0..=i1).any(|i| self.is_occupied(i, j) && self.distance_to_cell(center, i, j) < radius))
    }

    /// Marks every cell whose center lies inside the disc.
    pub fn fill_disc(&mut self, center: Vec2, radius: f64, cell: Cell) {
        let Some((i0, j0, i1, j1)) = self.cells_in_disc_bbox(center, radius) else {
            return;
        };
        for j in j0..=j1 {
            for i in i0..=i1 {
                if self.cell_center(i, j).distance(center) <= radius {
                    self.set(i, j, cell);
                }
            }
        }
    }

    pub fn fill_rect(&mut self, i0: usize, j0: usize, i1: usize, j1: usize, cell: Cell) {
        for j in j0..=j1.min(self.height - 1) {
            for i in i0..=i1.min(self.width - 1) {
                self.set(i, j, cell);
            }
        }
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = ((usize, usize), Cell)> + '_ {
        self.cells.iter().enumerate().map(move |(idx, &c)| ((idx % self.width, idx / self.width), c))
    }

    pub fn parse_ascii(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| NavError::Parse { line: 1, message: "missing header".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(NavError::Parse {
                line: hline + 1,
                message: format!("header must be `width height resolution`, got {header:?}"),
            });
        }
        let bad = |what: &str| NavError::Parse { line: hline + 1, message: format!("invalid {what}") };
        let width: usize = fields[0].parse().map_err(|_| bad("width"))?;
        let height: usize = fields[1].parse().map_err(|_| bad("height"))?;
        let resolution: f64 = fields[2].parse().map_err(|_| bad("resolution"))?;
        let mut grid = OccupancyGrid::new(width, height, resolution)?;

        let mut rows = 0usize;
        for (lineno, line) in lines {
            if rows == height {
                return Err(NavError::Parse { line: lineno + 1, message: "more rows than header height".into() });
            }
            let row = line.trim_end();
            if row.chars().count() != width {
                return Err(NavError::Parse {
                    line: lineno + 1,
                    message: format!("expected {width} cells, got {}", row.chars().count()),
                });
            }
            let j = height - 1 - rows;
            for (i, ch) in row.chars().enumerate() {
                let cell = Cell::from_symbol(ch).ok_or_else(|| NavError::Parse {
                    line: lineno + 1,
                    message: format!("unknown cell symbol {ch:?}"),
                })?;
                grid.set(i, j, cell);
            }
            rows += 1;
        }
        if rows != height {
            return Err(NavError::Parse {
                line: text.lines().count(),
                message: format!("expected {height} rows, got {rows}"),
            });
        }
        Ok(grid)
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * (self.height + 1) + 32);
        let _ = writeln!(out, "{} {} {}", self.width, self.height, self.resolution);
        for j in (0..self.height).rev() {
            out.extend((0..self.width).map(|i| self.get(i, j).symbol()));
            out.push('\n');
        }
        out
    }
}

/// Reads an ASCII map file.
pub fn load_map(path: impl AsRef<Path>) -> Result<OccupancyGrid> {
    let text = std::fs::read_to_string(path)?;
    OccupancyGrid::parse_ascii(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_degenerate_dimensions() {
        assert!(OccupancyGrid::new(0, 3, 0.1).is_err());
        assert!(OccupancyGrid::new(3, 3, 0.0).is_err());
        assert!(OccupancyGrid::new(3, 3, -1.0).is_err());
    }

    #[test]
    fn parses_symbols_with_top_row_first() {
        let g = OccupancyGrid::parse_ascii("3 2 0.5\n#..\n..?\n").unwrap();
        assert_eq!(g.get(0, 1), Cell::StaticKnown);
        assert_eq!(g.get(2, 0), Cell::StaticUnknown);
        assert_eq!(g.get(1, 1), Cell::Free);
        assert_eq!(g.occupied_count(), 2);
        assert_eq!(g.to_ascii(), "3 2 0.5\n#..\n..?\n");
    }

    #[test]
    fn parse_errors_report_line() {
        match OccupancyGrid::parse_ascii("3 2 0.5\n#..\n.x?\n") {
            Err(NavError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(OccupancyGrid::parse_ascii("3 2\n"), Err(NavError::Parse { line: 1, .. })));
        assert!(matches!(OccupancyGrid::parse_ascii("3 2 0.5\n...\n"), Err(NavError::Parse { .. })));
        assert!(matches!(OccupancyGrid::parse_ascii(""), Err(NavError::Parse { .. })));
    }

    #[test]
    fn distance_to_cell_is_zero_inside() {
        let g = OccupancyGrid::new(4, 4, 1.0).unwrap();
        assert_eq!(g.distance_to_cell(Vec2::new(1.5, 1.5), 1, 1), 0.0);
        assert!((g.distance_to_cell(Vec2::new(0.5, 0.5), 1, 1) - 0.5f64.hypot(0.5)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn world_cell_maps_are_inverse_within_a_cell(x in 0.0f64..9.99, y in 0.0f64..9.99) {
            let g = OccupancyGrid::new(100, 100, 0.1).unwrap();
            let p = Vec2::new(x, y);
            let (i, j) = g.world_to_cell(p).unwrap();
            let c = g.cell_center(i, j);
            prop_assert!((c.x - x).abs() <= 0.05 + 1e-12 && (c.y - y).abs() <= 0.05 + 1e-12);
            prop_assert_eq!(g.world_to_cell(c), Some((i, j)));
        }
    }
}
