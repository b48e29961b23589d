//! Map, robot, obstacles and world stepping.

mod grid;
mod obstacles;
mod robot;
mod scenario;

pub use grid::{load_map, Cell, OccupancyGrid};
pub use obstacles::{sample_free_point, step_obstacles, Obstacle, ObstacleKind, SocialForceParams};
pub use robot::{Action, RobotState, VelocityLimits, ROBOT_RADIUS};
pub use scenario::{spawn_scenario, ClusterSpec, MapKind, MapSpec, ScenarioConfig, StartGoalMode};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

/// Search window for the nearest occupied cell in [`World::min_obstacle_distance`].
pub const CELL_PROXIMITY_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    /// Physical map; both known and unknown static cells block motion and lidar.
    pub grid: OccupancyGrid,
    pub obstacles: Vec<Obstacle>,
    pub robot: RobotState,
    pub goal: Vec2,
    pub social: SocialForceParams,
}

impl World {
    pub fn new(grid: OccupancyGrid, robot: RobotState, goal: Vec2) -> Self {
        Self { grid, obstacles: Vec::new(), robot, goal, social: SocialForceParams::default() }
    }

    /// The map as the global planner sees it: walls marked `#` plus the
    /// rasterized known static obstacles. Unknown statics and walkers are absent.
    pub fn known_grid(&self) -> OccupancyGrid {
        let mut known = self.grid.clone();
        for o in self.obstacles.iter().filter(|o| o.kind == ObstacleKind::StaticKnown) {
            known.fill_disc(o.position, o.radius, Cell::StaticKnown);
        }
        known
    }

    /// Ground-truth contact test: any obstacle surface closer than the robot
    /// radius, any occupied cell under the robot disc, or the robot center
    /// leaving the map.
    pub fn check_collision(&self, state: &RobotState) -> bool {
        if !self.grid.contains_point(state.position) {
            return true;
        }
        let hits_disc = self
            .obstacles
            .iter()
            .any(|o| state.position.distance(o.position) - o.radius < state.radius);
        hits_disc || self.grid.disc_overlaps_occupied(state.position, state.radius)
    }

    /// Distance from the robot center to the nearest obstacle surface,
    /// `f64::INFINITY` when nothing is in range. Occupied cells only count
    /// within [`CELL_PROXIMITY_WINDOW`].
    pub fn min_obstacle_distance(&self, state: &RobotState) -> f64 {
        let discs = self
            .obstacles
            .iter()
            .map(|o| (state.position.distance(o.position) - o.radius).max(0.0))
            .fold(f64::INFINITY, f64::min);
        let cells = self
            .grid
            .nearest_occupied_within(state.position, CELL_PROXIMITY_WINDOW)
            .unwrap_or(f64::INFINITY);
        discs.min(cells)
    }

    pub fn step_obstacles(&mut self, dt: f64, rng: &mut impl Rng) {
        let robot = Some((self.robot.position, self.robot.radius));
        step_obstacles(&mut self.obstacles, robot, &self.grid, &self.social, dt, rng);
    }

    pub fn dynamic_count(&self) -> usize {
        self.obstacles.iter().filter(|o| o.kind == ObstacleKind::Dynamic).count()
    }
}
