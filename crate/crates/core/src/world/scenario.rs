//! Scenario configuration, procedural maps and randomized spawning.

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::grid::{load_map, Cell, OccupancyGrid};
use super::obstacles::{sample_free_point, Obstacle, ObstacleKind, SocialForceParams};
use super::robot::{RobotState, ROBOT_RADIUS};
use super::World;
use crate::error::{NavError, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    /// Open field without a boundary wall; leaving the map is a collision.
    Outdoor,
    /// Boundary wall with rooms joined by doorways.
    Indoor,
    /// Boundary wall, rooms on the left half, open space on the right.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum MapSpec {
    Generated { kind: MapKind, width: usize, height: usize, resolution: f64 },
    File { path: PathBuf },
    Inline { ascii: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum StartGoalMode {
    Random { min_separation: f64 },
    Fixed { start: Vec2, start_heading: f64, goal: Vec2 },
}

/// Walkers are initialised around `clusters` Gaussian centers and keep
/// walking between points drawn from the same clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub clusters: usize,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub map: MapSpec,
    pub known_static: usize,
    pub unknown_static: usize,
    pub dynamic: usize,
    pub static_radius: f64,
    pub dynamic_radius: f64,
    pub social: SocialForceParams,
    pub start_goal: StartGoalMode,
    pub clustering: Option<ClusterSpec>,
    /// Walkers never spawn closer than this to the robot start (m).
    pub dynamic_start_clearance: f64,
    pub placement_tries: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            map: MapSpec::Generated { kind: MapKind::Outdoor, width: 100, height: 100, resolution: 0.1 },
            known_static: 0,
            unknown_static: 0,
            dynamic: 0,
            static_radius: 0.4,
            dynamic_radius: 0.15,
            social: SocialForceParams::default(),
            start_goal: StartGoalMode::Random { min_separation: 5.0 },
            clustering: None,
            dynamic_start_clearance: 1.5,
            placement_tries: 2000,
            seed: 0,
        }
    }
}

impl MapSpec {
    pub fn build(&self, rng: &mut impl Rng) -> Result<OccupancyGrid> {
        match self {
            MapSpec::Generated { kind, width, height, resolution } => generate_map(*kind, *width, *height, *resolution, rng),
            MapSpec::File { path } => load_map(path),
            MapSpec::Inline { ascii } => OccupancyGrid::parse_ascii(ascii),
        }
    }
}

const WALL_CELLS: usize = 2;
const DOOR_WIDTH_M: f64 = 1.6;

fn generate_map(kind: MapKind, width: usize, height: usize, resolution: f64, rng: &mut impl Rng) -> Result<OccupancyGrid> {
    let mut grid = OccupancyGrid::new(width, height, resolution)?;
    match kind {
        MapKind::Outdoor => {}
        MapKind::Indoor => {
            border(&mut grid);
            rooms(&mut grid, 0, width, rng);
        }
        MapKind::Mixed => {
            border(&mut grid);
            rooms(&mut grid, 0, width / 2, rng);
        }
    }
    Ok(grid)
}

fn border(grid: &mut OccupancyGrid) {
    let (w, h) = (grid.width(), grid.height());
    let t = WALL_CELLS.min(w / 2).min(h / 2).max(1);
    grid.fill_rect(0, 0, w - 1, t - 1, Cell::StaticKnown);
    grid.fill_rect(0, h - t, w - 1, h - 1, Cell::StaticKnown);
    grid.fill_rect(0, 0, t - 1, h - 1, Cell::StaticKnown);
    grid.fill_rect(w - t, 0, w - 1, h - 1, Cell::StaticKnown);
}

/// Splits columns `[x0, x1)` into a 2 x 2 block of rooms with one doorway per wall segment.
fn rooms(grid: &mut OccupancyGrid, x0: usize, x1: usize, rng: &mut impl Rng) {
    let h = grid.height();
    let door = ((DOOR_WIDTH_M / grid.resolution()).round() as usize).max(1);
    let t = WALL_CELLS;
    if x1 - x0 < 4 * door || h < 4 * door {
        return;
    }
    let mid_x = x0 + (x1 - x0) / 2;
    let mid_y = h / 2;

    // Vertical wall with a doorway in each half.
    grid.fill_rect(mid_x, 0, mid_x + t - 1, h - 1, Cell::StaticKnown);
    for (lo, hi) in [(t, mid_y), (mid_y + t, h - t)] {
        let start = rng.random_range(lo + 1..hi - door);
        grid.fill_rect(mid_x, start, mid_x + t - 1, start + door - 1, Cell::Free);
    }
    // Horizontal wall with a doorway in each room column.
    grid.fill_rect(x0, mid_y, x1 - 1, mid_y + t - 1, Cell::StaticKnown);
    for (lo, hi) in [(x0 + t, mid_x), (mid_x + t, x1.min(grid.width() - t))] {
        let start = rng.random_range(lo + 1..hi - door);
        grid.fill_rect(start, mid_y, start + door - 1, mid_y + t - 1, Cell::Free);
    }
}

struct Placer<'a> {
    grid: &'a OccupancyGrid,
    placed: Vec<(Vec2, f64)>,
    tries: usize,
}

impl Placer<'_> {
    fn fits(&self, p: Vec2, radius: f64, gap: f64) -> bool {
        let (w, h) = self.grid.extent();
        p.x - radius >= 0.0
            && p.y - radius >= 0.0
            && p.x + radius <= w
            && p.y + radius <= h
            && !self.grid.disc_overlaps_occupied(p, radius + gap)
            && self.placed.iter().all(|&(q, r)| p.distance(q) >= r + radius + gap)
    }

    fn place(
        &mut self,
        radius: f64,
        gap: f64,
        what: &str,
        rng: &mut dyn RngCore,
        mut sample: impl FnMut(&mut dyn RngCore) -> Option<Vec2>,
    ) -> Result<Vec2> {
        for _ in 0..self.tries {
            let Some(p) = sample(rng) else { continue };
            if self.fits(p, radius, gap) {
                self.placed.push((p, radius));
                return Ok(p);
            }
        }
        Err(NavError::PlacementFailed(format!("no free position for {what} after {} tries", self.tries)))
    }
}

fn uniform_point(grid: &OccupancyGrid, rng: &mut dyn RngCore) -> Vec2 {
    let (w, h) = grid.extent();
    Vec2::new(rng.random_range(0.0..w), rng.random_range(0.0..h))
}

/// Uniform cell-center sample; start and goal sit on cell centers so the
/// planner's cell and the robot position agree.
fn cell_center_sample(grid: &OccupancyGrid, rng: &mut dyn RngCore) -> Vec2 {
    let i = rng.random_range(0..grid.width());
    let j = rng.random_range(0..grid.height());
    grid.cell_center(i, j)
}

/// Builds a world: map, static obstacles, robot start and goal, then walkers.
pub fn spawn_scenario<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Result<World> {
    let grid = config.map.build(rng)?;
    let rng: &mut dyn RngCore = rng;
    let mut placer = Placer { grid: &grid, placed: Vec::new(), tries: config.placement_tries.max(1) };
    let mut obstacles = Vec::new();
    let mut next_id = 0u32;

    for (count, kind) in [(config.known_static, ObstacleKind::StaticKnown), (config.unknown_static, ObstacleKind::StaticUnknown)] {
        for _ in 0..count {
            let p = placer.place(config.static_radius, 0.2, "static obstacle", rng, |r| Some(uniform_point(&grid, r)))?;
            obstacles.push(Obstacle::fixed(next_id, p, config.static_radius, kind));
            next_id += 1;
        }
    }

    // Start and goal must be clear of everything with a small margin, and
    // clear of the rasterized known obstacles so the inflated planning grid
    // keeps their cells free.
    let mut known = grid.clone();
    for o in obstacles.iter().filter(|o| o.kind == ObstacleKind::StaticKnown) {
        known.fill_disc(o.position, o.radius, Cell::StaticKnown);
    }
    let margin = 0.1;
    let endpoint_ok = |p: Vec2, placer: &Placer| placer.fits(p, ROBOT_RADIUS, margin) && !known.disc_overlaps_occupied(p, ROBOT_RADIUS + margin);

    let (start, heading, goal) = match &config.start_goal {
        StartGoalMode::Fixed { start, start_heading, goal } => {
            if !endpoint_ok(*start, &placer) || !endpoint_ok(*goal, &placer) {
                return Err(NavError::PlacementFailed("fixed start or goal is not collision-free".into()));
            }
            placer.placed.push((*start, ROBOT_RADIUS));
            placer.placed.push((*goal, ROBOT_RADIUS));
            (*start, *start_heading, *goal)
        }
        StartGoalMode::Random { min_separation } => {
            let mut found = None;
            for _ in 0..placer.tries {
                let s = cell_center_sample(&grid, rng);
                if !endpoint_ok(s, &placer) {
                    continue;
                }
                let g = cell_center_sample(&grid, rng);
                if g.distance(s) >= *min_separation && endpoint_ok(g, &placer) {
                    found = Some((s, g));
                    break;
                }
            }
            let (s, g) = found.ok_or_else(|| NavError::PlacementFailed(format!("no start/goal pair after {} tries", placer.tries)))?;
            placer.placed.push((s, ROBOT_RADIUS));
            placer.placed.push((g, ROBOT_RADIUS));
            let heading = rng.random_range(-PI..PI);
            (s, heading, g)
        }
    };

    let centers: Vec<Vec2> = match config.clustering {
        Some(spec) if spec.clusters > 0 && config.dynamic > 0 => (0..spec.clusters).map(|_| uniform_point(&grid, rng)).collect(),
        _ => Vec::new(),
    };
    let cluster_point = |rng: &mut dyn RngCore, k: usize, spread: f64| {
        let n = Normal::new(0.0, spread.max(1e-9)).expect("finite spread");
        centers[k % centers.len()] + Vec2::new(n.sample(rng), n.sample(rng))
    };

    for k in 0..config.dynamic {
        let clearance = config.dynamic_start_clearance + config.dynamic_radius;
        let clustered = config.clustering.filter(|_| !centers.is_empty());
        let p = placer.place(config.dynamic_radius, 0.05, "dynamic obstacle", rng, |r| {
            let p = match clustered {
                Some(spec) => cluster_point(r, k, spec.spread),
                None => uniform_point(&grid, r),
            };
            (p.distance(start) >= clearance).then_some(p)
        })?;
        let goal = match config.clustering {
            Some(spec) if !centers.is_empty() => {
                let g = cluster_point(rng, k + 1, spec.spread);
                if grid.contains_point(g) && !grid.disc_overlaps_occupied(g, config.dynamic_radius) {
                    g
                } else {
                    p
                }
            }
            _ => sample_free_point(&grid, config.dynamic_radius, 64, &mut &mut *rng).unwrap_or(p),
        };
        obstacles.push(Obstacle::walker(next_id, p, config.dynamic_radius, goal));
        next_id += 1;
    }

    let mut world = World::new(grid, RobotState::at(start, heading), goal);
    world.obstacles = obstacles;
    world.social = config.social;
    Ok(world)
}
