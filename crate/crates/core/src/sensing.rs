//! 2D lidar simulation and robot-relative polar encoding.
//!
//! Beams are cast counterclockwise in the robot frame: beam `i` points at
//! `heading + i * 360deg / beams`. Each beam stops at the first occupied grid
//! cell (exact DDA traversal) or the first obstacle disc (analytic
//! intersection), whichever is closer.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Vec2};
use crate::world::{Obstacle, OccupancyGrid, RobotState, World};

pub const SCAN_BEAMS: usize = 360;

/// Smallest reported range; a beam starting inside an obstacle reports this.
pub const MIN_RANGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarConfig {
    pub beams: usize,
    pub max_range: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self { beams: SCAN_BEAMS, max_range: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    pub ranges: Vec<f64>,
    pub max_range: f64,
}

/// Range and bearing of a point relative to the robot pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub rho: f64,
    pub theta: f64,
}

pub fn relative_polar(state: &RobotState, point: Vec2) -> PolarPoint {
    let delta = point - state.position;
    let rho = delta.norm();
    if rho == 0.0 {
        return PolarPoint { rho: 0.0, theta: 0.0 };
    }
    PolarPoint { rho, theta: normalize_angle(delta.angle() - state.heading) }
}

pub fn lidar_scan(world: &World, state: &RobotState, config: &LidarConfig) -> LidarScan {
    let step = TAU / config.beams as f64;
    let ranges = (0..config.beams)
        .map(|i| {
            let dir = Vec2::from_angle(state.heading + i as f64 * step);
            cast_ray(&world.grid, &world.obstacles, state.position, dir, config.max_range)
        })
        .collect();
    LidarScan { ranges, max_range: config.max_range }
}

/// Distance along the unit direction `dir` to the first hit, clipped to `(0, max_range]`.
pub fn cast_ray(grid: &OccupancyGrid, obstacles: &[Obstacle], origin: Vec2, dir: Vec2, max_range: f64) -> f64 {
    let mut best = grid_hit(grid, origin, dir, max_range).unwrap_or(max_range);
    for o in obstacles {
        if let Some(t) = disc_hit(origin, dir, o.position, o.radius) {
            best = best.min(t);
        }
    }
    best.clamp(MIN_RANGE, max_range)
}

/// Ray-circle intersection for a unit direction; `Some(0)` when the origin is inside.
pub fn disc_hit(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let f = origin - center;
    let c = f.norm_squared() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = f.dot(dir);
    if b >= 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    Some(-b - disc.sqrt())
}

/// Amanatides-Woo traversal; returns the entry distance of the first occupied cell.
fn grid_hit(grid: &OccupancyGrid, origin: Vec2, dir: Vec2, max_range: f64) -> Option<f64> {
    if grid.is_empty() {
        return None;
    }
    let (mut i, mut j) = grid.world_to_cell(origin).map(|(i, j)| (i as i64, j as i64))?;
    if grid.is_occupied(i as usize, j as usize) {
        return Some(0.0);
    }
    let res = grid.resolution();
    let axis = |p: f64, d: f64, cell: i64| -> (i64, f64, f64) {
        if d > 0.0 {
            (1, ((cell + 1) as f64 * res - p) / d, res / d)
        } else if d < 0.0 {
            (-1, (cell as f64 * res - p) / d, -res / d)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (step_i, mut t_max_x, t_delta_x) = axis(origin.x, dir.x, i);
    let (step_j, mut t_max_y, t_delta_y) = axis(origin.y, dir.y, j);

    loop {
        let t = if t_max_x < t_max_y {
            i += step_i;
            let t = t_max_x;
            t_max_x += t_delta_x;
            t
        } else {
            j += step_j;
            let t = t_max_y;
            t_max_y += t_delta_y;
            t
        };
        if t > max_range {
            return None;
        }
        match grid.get_checked(i, j) {
            None => return None,
            Some(cell) if cell.is_occupied() => return Some(t),
            Some(_) => {}
        }
    }
}
