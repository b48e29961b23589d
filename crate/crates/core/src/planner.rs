//! Global planning on the known occupancy grid.
//!
//! Search runs over 8-connected cells with unit cardinal and `sqrt(2)`
//! diagonal steps. Path costs are carried exactly as `a + b*sqrt(2)` with
//! integer `a, b`, so optimal costs from different searches compare equal
//! bit for bit and ties never depend on float rounding. Only `#` cells
//! (`Cell::StaticKnown`) block; unknown statics are invisible here.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::Vec2;
use crate::world::{Cell, OccupancyGrid};

/// Path cost `straight + diagonal * sqrt(2)` in cell units, ordered exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct OctileCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl OctileCost {
    pub const ZERO: OctileCost = OctileCost { straight: 0, diagonal: 0 };

    pub fn new(straight: u32, diagonal: u32) -> Self {
        Self { straight, diagonal }
    }

    /// Octile distance between two cells: the exact cost on an empty grid.
    pub fn octile(a: (usize, usize), b: (usize, usize)) -> Self {
        let dx = a.0.abs_diff(b.0) as u32;
        let dy = a.1.abs_diff(b.1) as u32;
        Self { straight: dx.max(dy) - dx.min(dy), diagonal: dx.min(dy) }
    }

    pub fn value(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }

    fn add(self, other: OctileCost) -> OctileCost {
        OctileCost { straight: self.straight + other.straight, diagonal: self.diagonal + other.diagonal }
    }
}

impl Ord for OctileCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // Sign of da + db*sqrt(2) with integers; equality only when both vanish.
        let da = self.straight as i128 - other.straight as i128;
        let db = self.diagonal as i128 - other.diagonal as i128;
        match (da.signum(), db.signum()) {
            (0, 0) => Ordering::Equal,
            (a, b) if a >= 0 && b >= 0 => Ordering::Greater,
            (a, b) if a <= 0 && b <= 0 => Ordering::Less,
            (1, _) => (da * da).cmp(&(2 * db * db)),
            _ => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for OctileCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPlan {
    /// World-frame cell centers from start to goal.
    pub points: Vec<Vec2>,
    pub cells: Vec<(usize, usize)>,
    pub cost: OctileCost,
    pub expanded: usize,
}

impl GlobalPlan {
    pub fn cost_cells(&self) -> f64 {
        self.cost.value()
    }

    pub fn goal(&self) -> Option<Vec2> {
        self.points.last().copied()
    }
}

/// E, NE, N, NW, W, SW, S, SE.
const NEIGHBORS: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Blocks every free cell whose center lies closer than `robot_radius` to a
/// `#` cell. Unknown cells are left untouched.
pub fn inflate(grid: &OccupancyGrid, robot_radius: f64) -> OccupancyGrid {
    let mut out = grid.clone();
    if robot_radius <= 0.0 {
        return out;
    }
    let reach = (robot_radius / grid.resolution()).ceil() as i64 + 1;
    for ((i, j), cell) in grid.iter_cells() {
        if cell != Cell::StaticKnown {
            continue;
        }
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if grid.get_checked(ni, nj) != Some(Cell::Free) {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                if grid.distance_to_cell(grid.cell_center(ni, nj), i, j) < robot_radius {
                    out.set(ni, nj, Cell::StaticKnown);
                }
            }
        }
    }
    out
}

fn blocked(grid: &OccupancyGrid, i: i64, j: i64) -> bool {
    grid.get_checked(i, j).is_none_or(|c| c == Cell::StaticKnown)
}

/// Neighbor expansion shared by both searches: diagonal moves may not cut
/// the corner of a blocked cell.
fn successors(grid: &OccupancyGrid, (i, j): (usize, usize)) -> impl Iterator<Item = ((usize, usize), OctileCost)> + '_ {
    let (i, j) = (i as i64, j as i64);
    NEIGHBORS.iter().filter_map(move |&(di, dj)| {
        let (ni, nj) = (i + di, j + dj);
        if blocked(grid, ni, nj) {
            return None;
        }
        let diagonal = di != 0 && dj != 0;
        if diagonal && (blocked(grid, i + di, j) || blocked(grid, i, j + dj)) {
            return None;
        }
        let step = if diagonal { OctileCost::new(0, 1) } else { OctileCost::new(1, 0) };
        Some(((ni as usize, nj as usize), step))
    })
}

fn endpoint_cell(grid: &OccupancyGrid, p: Vec2) -> Result<(usize, usize)> {
    let cell = grid.world_to_cell(p).ok_or(NavError::OutOfBounds { x: p.x, y: p.y })?;
    if grid.get(cell.0, cell.1) == Cell::StaticKnown {
        return Err(NavError::BlockedEndpoint(cell));
    }
    Ok(cell)
}

fn reconstruct(grid: &OccupancyGrid, parent: &[usize], goal: usize, cost: OctileCost, expanded: usize) -> GlobalPlan {
    let w = grid.width();
    let mut idx = goal;
    let mut cells = vec![(idx % w, idx / w)];
    while parent[idx] != idx {
        idx = parent[idx];
        cells.push((idx % w, idx / w));
    }
    cells.reverse();
    let points = cells.iter().map(|&(i, j)| grid.cell_center(i, j)).collect();
    GlobalPlan { points, cells, cost, expanded }
}

/// A* with the octile heuristic; ties on f broken by insertion order.
pub fn plan_astar(grid: &OccupancyGrid, start: Vec2, goal: Vec2) -> Result<GlobalPlan> {
    let s = endpoint_cell(grid, start)?;
    let g = endpoint_cell(grid, goal)?;
    let w = grid.width();
    let n = w * grid.height();
    let idx = |(i, j): (usize, usize)| j * w + i;

    let mut best: Vec<Option<OctileCost>> = vec![None; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let mut counter = 0u64;
    let mut expanded = 0usize;

    best[idx(s)] = Some(OctileCost::ZERO);
    open.push(Reverse((OctileCost::octile(s, g), counter, s)));

    while let Some(Reverse((_, _, cell))) = open.pop() {
        let ci = idx(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        expanded += 1;
        let g_cost = best[ci].expect("queued cells have a cost");
        if cell == g {
            return Ok(reconstruct(grid, &parent, ci, g_cost, expanded));
        }
        for (next, step) in successors(grid, cell) {
            let ni = idx(next);
            if closed[ni] {
                continue;
            }
            let tentative = g_cost.add(step);
            if best[ni].is_none_or(|b| tentative < b) {
                best[ni] = Some(tentative);
                parent[ni] = ci;
                counter += 1;
                open.push(Reverse((tentative.add(OctileCost::octile(next, g)), counter, next)));
            }
        }
    }
    Err(NavError::NoPath { start: s, goal: g })
}

/// Plain Dijkstra over the same graph; the reference the A* search is checked against.
pub fn plan_dijkstra_oracle(grid: &OccupancyGrid, start: Vec2, goal: Vec2) -> Result<GlobalPlan> {
    let s = endpoint_cell(grid, start)?;
    let g = endpoint_cell(grid, goal)?;
    let w = grid.width();
    let n = w * grid.height();
    let idx = |(i, j): (usize, usize)| j * w + i;

    let mut dist: Vec<Option<OctileCost>> = vec![None; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut expanded = 0usize;
    dist[idx(s)] = Some(OctileCost::ZERO);
    heap.push(Reverse((OctileCost::ZERO, idx(s))));

    while let Some(Reverse((d, ci))) = heap.pop() {
        if done[ci] {
            continue;
        }
        done[ci] = true;
        expanded += 1;
        if ci == idx(g) {
            return Ok(reconstruct(grid, &parent, ci, d, expanded));
        }
        for (next, step) in successors(grid, (ci % w, ci / w)) {
            let ni = idx(next);
            let nd = d.add(step);
            if dist[ni].is_none_or(|cur| nd < cur) {
                dist[ni] = Some(nd);
                parent[ni] = ci;
                heap.push(Reverse((nd, ni)));
            }
        }
    }
    Err(NavError::NoPath { start: s, goal: g })
}

/// Closest cell to `p` that the planner treats as free, searching outward ring by ring.
pub fn nearest_free_cell(grid: &OccupancyGrid, p: Vec2, max_rings: usize) -> Option<(usize, usize)> {
    let res = grid.resolution();
    let ci = (p.x / res).floor() as i64;
    let cj = (p.y / res).floor() as i64;
    for ring in 0..=max_rings as i64 {
        let mut best: Option<((usize, usize), f64)> = None;
        for dj in -ring..=ring {
            for di in -ring..=ring {
                if di.abs().max(dj.abs()) != ring || blocked(grid, ci + di, cj + dj) {
                    continue;
                }
                let cell = ((ci + di) as usize, (cj + dj) as usize);
                let d = grid.cell_center(cell.0, cell.1).distance(p);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((cell, d));
                }
            }
        }
        if let Some((cell, _)) = best {
            return Some(cell);
        }
    }
    None
}
