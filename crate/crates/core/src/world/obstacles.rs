//! Disc obstacles and a reduced social-force crowd model.
//!
//! Each dynamic obstacle relaxes toward a desired velocity pointing at its
//! private goal and is pushed away from every other disc (and the robot)
//! by an exponential repulsion `A * exp((r_ij - d_ij) / B)`. Forces are
//! computed from a snapshot so the update does not depend on iteration order.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::OccupancyGrid;
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstacleKind {
    StaticKnown,
    StaticUnknown,
    Dynamic,
}

impl ObstacleKind {
    pub fn is_static(self) -> bool {
        !matches!(self, ObstacleKind::Dynamic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: u32,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub kind: ObstacleKind,
    pub goal: Vec2,
}

impl Obstacle {
    pub fn fixed(id: u32, position: Vec2, radius: f64, kind: ObstacleKind) -> Self {
        Self { id, position, velocity: Vec2::ZERO, radius, kind, goal: position }
    }

    pub fn walker(id: u32, position: Vec2, radius: f64, goal: Vec2) -> Self {
        Self { id, position, velocity: Vec2::ZERO, radius, kind: ObstacleKind::Dynamic, goal }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocialForceParams {
    /// Relaxation time toward the desired velocity (s).
    pub tau: f64,
    pub desired_speed: f64,
    pub max_speed: f64,
    pub repulsion_strength: f64,
    pub repulsion_range: f64,
    pub arrival_radius: f64,
}

impl Default for SocialForceParams {
    fn default() -> Self {
        Self {
            tau: 0.5,
            desired_speed: 0.8,
            max_speed: 1.0,
            repulsion_strength: 2.0,
            repulsion_range: 0.4,
            arrival_radius: 0.3,
        }
    }
}

impl SocialForceParams {
    fn repulsion(&self, from: Vec2, from_radius: f64, on: Vec2, on_radius: f64, rng: &mut impl Rng) -> Vec2 {
        let delta = on - from;
        let d = delta.norm();
        let dir = match delta.normalized() {
            Some(n) => n,
            None => Vec2::from_angle(rng.random::<f64>() * TAU),
        };
        let magnitude = self.repulsion_strength * ((on_radius + from_radius - d) / self.repulsion_range).exp();
        dir * magnitude
    }
}

/// Samples a free point for a walker of `radius`, or `None` after `tries`.
pub fn sample_free_point(grid: &OccupancyGrid, radius: f64, tries: usize, rng: &mut impl Rng) -> Option<Vec2> {
    let (w, h) = grid.extent();
    if w <= 2.0 * radius || h <= 2.0 * radius {
        return None;
    }
    (0..tries).find_map(|_| {
        let p = Vec2::new(rng.random_range(radius..w - radius), rng.random_range(radius..h - radius));
        (!grid.disc_overlaps_occupied(p, radius)).then_some(p)
    })
}

/// Advances all dynamic obstacles by one explicit-Euler tick.
pub fn step_obstacles(
    obstacles: &mut [Obstacle],
    robot: Option<(Vec2, f64)>,
    grid: &OccupancyGrid,
    params: &SocialForceParams,
    dt: f64,
    rng: &mut impl Rng,
) {
    let snapshot: Vec<(Vec2, f64)> = obstacles.iter().map(|o| (o.position, o.radius)).collect();
    let speed_cap = params.max_speed;
    let desired = params.desired_speed.min(speed_cap);

    for (idx, obs) in obstacles.iter_mut().enumerate() {
        if obs.kind.is_static() {
            obs.velocity = Vec2::ZERO;
            continue;
        }

        if obs.position.distance(obs.goal) < params.arrival_radius {
            if let Some(goal) = sample_free_point(grid, obs.radius, 64, rng) {
                obs.goal = goal;
            }
        }

        let desired_vel = (obs.goal - obs.position).normalized().map_or(Vec2::ZERO, |d| d * desired);
        let mut force = (desired_vel - obs.velocity) * (1.0 / params.tau);
        for (other, &(pos, radius)) in snapshot.iter().enumerate() {
            if other != idx {
                force += params.repulsion(pos, radius, obs.position, obs.radius, rng);
            }
        }
        if let Some((pos, radius)) = robot {
            force += params.repulsion(pos, radius, obs.position, obs.radius, rng);
        }

        let mut velocity = obs.velocity + force * dt;
        let speed = velocity.norm();
        if speed > speed_cap {
            velocity = velocity * (speed_cap / speed);
        }
        let next = obs.position + velocity * dt;
        if grid.contains_point(next) && !grid.disc_overlaps_occupied(next, obs.radius) {
            obs.velocity = velocity;
            obs.position = next;
        } else {
            // Walkers do not enter walls or leave the map; they stop and turn to a new goal.
            obs.velocity = Vec2::ZERO;
            if let Some(goal) = sample_free_point(grid, obs.radius, 64, rng) {
                obs.goal = goal;
            }
        }
    }
}
