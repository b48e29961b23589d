//! Episode orchestration: reset, step, termination and trajectory logging.
//!
//! One tick applies the clamped command, advances the walkers, decides the
//! termination (collision before goal before timeout), scores the
//! transition and rebuilds the observation from the full navigation stack:
//! global plan, waypoints, subgoal and plan length.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curriculum::StageSpec;
use crate::error::{NavError, Result};
use crate::geometry::Vec2;
use crate::observation::{build_observation, AgentVariant, ObservationInputs, ObservationVector};
use crate::planner::{inflate, nearest_free_cell, plan_astar, GlobalPlan};
use crate::policy::Policy;
use crate::reward::{compute_reward_with, RewardBreakdown, RewardConstants, TransitionSnapshot};
use crate::sensing::{lidar_scan, LidarConfig};
use crate::waypoints::{distance_to_plan, nearest_index, path_length, plan_length, subgoal_index, subsample_waypoints, WaypointSet};
use crate::world::{spawn_scenario, Action, Cell, ObstacleKind, OccupancyGrid, ScenarioConfig, VelocityLimits, World, ROBOT_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub dt: f64,
    pub limits: VelocityLimits,
    pub goal_radius: f64,
    pub max_ticks: usize,
    pub lookahead: f64,
    /// Replan when the subgoal is farther than this from the robot.
    pub replan_distance: f64,
    /// Obstacle inflation of the planning grid; the margin over the robot radius
    /// keeps lookahead followers clear of corners.
    pub inflation_radius: f64,
    pub reset_retries: usize,
    pub lidar: LidarConfig,
    pub reward: RewardConstants,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            limits: VelocityLimits::default(),
            goal_radius: 0.3,
            max_ticks: 900,
            lookahead: 2.0,
            replan_distance: 4.0,
            inflation_radius: ROBOT_RADIUS + 0.2,
            reset_retries: 20,
            lidar: LidarConfig::default(),
            reward: RewardConstants::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    None,
    GoalReached,
    Collision,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: ObservationVector,
    pub reward: RewardBreakdown,
    pub snapshot: TransitionSnapshot,
    pub done: bool,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticRecord {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub kind: ObstacleKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeHeader {
    pub seed: u64,
    pub variant: AgentVariant,
    pub dt: f64,
    pub map_width_m: f64,
    pub map_height_m: f64,
    pub resolution: f64,
    /// Occupied map cells as row runs `[row, first column, end column)`.
    pub wall_runs: Vec<[usize; 3]>,
    pub start: Vec2,
    pub start_heading: f64,
    pub goal: Vec2,
    pub plan: Vec<Vec2>,
    pub statics: Vec<StaticRecord>,
    pub walker_radius: Vec<f64>,
    pub walker_start: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: usize,
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub action: Action,
    pub reward: RewardBreakdown,
    /// `None` when no obstacle is in range.
    pub min_obstacle_dist: Option<f64>,
    pub walkers: Vec<Vec2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub termination: Termination,
    pub path_length: f64,
    pub duration: f64,
    pub collisions: u32,
    pub ticks: usize,
    pub total_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub header: EpisodeHeader,
    pub ticks: Vec<TickRecord>,
    pub summary: EpisodeSummary,
}

impl EpisodeLog {
    pub fn success(&self) -> bool {
        self.summary.termination == Termination::GoalReached
    }

    pub fn trajectory(&self) -> Vec<Vec2> {
        std::iter::once(self.header.start).chain(self.ticks.iter().map(|t| Vec2::new(t.x, t.y))).collect()
    }
}

/// One simulated environment instance. Single-threaded; run several with
/// distinct seeds for parallel rollouts.
#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    variant: AgentVariant,
    scenario: ScenarioConfig,
    rng: ChaCha8Rng,
    world: World,
    planning_grid: OccupancyGrid,
    plan: GlobalPlan,
    waypoints: WaypointSet,
    subgoal: Vec2,
    plan_len: f64,
    tick: usize,
    termination: Termination,
    log: EpisodeLog,
}

impl Env {
    /// Spawns a scenario from `seed` and returns the environment with its first observation.
    pub fn reset(scenario: &ScenarioConfig, variant: AgentVariant, config: &EnvConfig, seed: u64) -> Result<(Env, ObservationVector)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let retries = config.reset_retries.max(1);
        let mut last_err = None;
        for _ in 0..retries {
            let world = spawn_scenario(scenario, &mut rng)?;
            match Self::plan_for(&world, config) {
                Ok((grid, plan)) => {
                    let env = Self::assemble(world, grid, plan, variant, config, scenario.clone(), rng, seed)?;
                    let obs = env.observe()?;
                    return Ok((env, obs));
                }
                Err(e @ (NavError::NoPath { .. } | NavError::BlockedEndpoint(_))) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(NavError::PlacementFailed(format!(
            "no plannable start/goal pair after {retries} resets (last: {})",
            last_err.map_or_else(|| "none".into(), |e| e.to_string())
        )))
    }

    pub fn reset_stage(stage: &StageSpec, variant: AgentVariant, config: &EnvConfig, seed: u64) -> Result<(Env, ObservationVector)> {
        Self::reset(&stage.scenario(), variant, config, seed)
    }

    /// Wraps a hand-built world; `seed` drives the walkers.
    pub fn from_world(world: World, variant: AgentVariant, config: &EnvConfig, seed: u64) -> Result<(Env, ObservationVector)> {
        let (grid, plan) = Self::plan_for(&world, config)?;
        let rng = ChaCha8Rng::seed_from_u64(seed);
        let env = Self::assemble(world, grid, plan, variant, config, ScenarioConfig::default(), rng, seed)?;
        let obs = env.observe()?;
        Ok((env, obs))
    }

    /// Endpoints that sit in the inflation band but not on an obstacle are
    /// moved to the nearest free cell.
    fn plan_for(world: &World, config: &EnvConfig) -> Result<(OccupancyGrid, GlobalPlan)> {
        let known = world.known_grid();
        let grid = inflate(&known, config.inflation_radius.max(ROBOT_RADIUS));
        let snap = |p: Vec2| match grid.world_to_cell(p) {
            Some((i, j)) if grid.get(i, j) == Cell::StaticKnown && known.get(i, j) != Cell::StaticKnown => {
                nearest_free_cell(&grid, p, 10).map_or(p, |(i, j)| grid.cell_center(i, j))
            }
            _ => p,
        };
        let plan = plan_astar(&grid, snap(world.robot.position), snap(world.goal))?;
        Ok((grid, plan))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        world: World,
        planning_grid: OccupancyGrid,
        plan: GlobalPlan,
        variant: AgentVariant,
        config: &EnvConfig,
        scenario: ScenarioConfig,
        rng: ChaCha8Rng,
        seed: u64,
    ) -> Result<Env> {
        let waypoints = subsample_waypoints(&plan)?;
        let plan_len = plan_length(&plan);
        let (w, h) = world.grid.extent();
        let header = EpisodeHeader {
            seed,
            variant,
            dt: config.dt,
            map_width_m: w,
            map_height_m: h,
            resolution: world.grid.resolution(),
            wall_runs: wall_runs(&world.grid),
            start: world.robot.position,
            start_heading: world.robot.heading,
            goal: world.goal,
            plan: plan.points.clone(),
            statics: world
                .obstacles
                .iter()
                .filter(|o| o.kind.is_static())
                .map(|o| StaticRecord { x: o.position.x, y: o.position.y, radius: o.radius, kind: o.kind })
                .collect(),
            walker_radius: world.obstacles.iter().filter(|o| !o.kind.is_static()).map(|o| o.radius).collect(),
            walker_start: world.obstacles.iter().filter(|o| !o.kind.is_static()).map(|o| o.position).collect(),
        };
        let summary = EpisodeSummary { termination: Termination::None, path_length: 0.0, duration: 0.0, collisions: 0, ticks: 0, total_reward: 0.0 };
        let mut env = Env {
            config: *config,
            variant,
            scenario,
            rng,
            world,
            planning_grid,
            plan,
            waypoints,
            subgoal: Vec2::ZERO,
            plan_len,
            tick: 0,
            termination: Termination::None,
            log: EpisodeLog { header, ticks: Vec::new(), summary },
        };
        env.subgoal = env.current_subgoal();
        Ok(env)
    }

    fn current_subgoal(&self) -> Vec2 {
        let from = nearest_index(&self.plan.points, self.world.robot.position).unwrap_or(0);
        self.plan.points[subgoal_index(&self.plan.points, from, self.config.lookahead)]
    }

    pub fn observe(&self) -> Result<ObservationVector> {
        let scan = lidar_scan(&self.world, &self.world.robot, &self.config.lidar);
        build_observation(
            self.variant,
            ObservationInputs {
                scan: &scan,
                state: &self.world.robot,
                goal: self.world.goal,
                subgoal: self.subgoal,
                waypoints: &self.waypoints,
                plan_length: self.plan_len,
            },
        )
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn plan(&self) -> &GlobalPlan {
        &self.plan
    }

    pub fn waypoints(&self) -> &WaypointSet {
        &self.waypoints
    }

    pub fn subgoal(&self) -> Vec2 {
        self.subgoal
    }

    pub fn variant(&self) -> AgentVariant {
        self.variant
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    pub fn is_done(&self) -> bool {
        self.termination != Termination::None
    }

    pub fn log(&self) -> &EpisodeLog {
        &self.log
    }

    pub fn into_log(self) -> EpisodeLog {
        self.log
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.is_done() {
            return Err(NavError::StepAfterDone);
        }
        let cfg = self.config;
        let prev = self.world.robot;
        let next = prev.apply_action(action, cfg.dt, &cfg.limits)?;
        self.world.robot = next;
        self.world.step_obstacles(cfg.dt, &mut self.rng);
        self.tick += 1;

        let goal = self.world.goal;
        let collided = self.world.check_collision(&next);
        let goal_reached = !collided && next.position.distance(goal) < cfg.goal_radius;
        let termination = if collided {
            Termination::Collision
        } else if goal_reached {
            Termination::GoalReached
        } else if self.tick >= cfg.max_ticks {
            Termination::Timeout
        } else {
            Termination::None
        };

        let points = &self.plan.points;
        let snapshot = TransitionSnapshot {
            prev_dist_goal: prev.position.distance(goal),
            curr_dist_goal: next.position.distance(goal),
            prev_dist_plan: distance_to_plan(points, prev.position).unwrap_or(0.0),
            curr_dist_plan: distance_to_plan(points, next.position).unwrap_or(0.0),
            min_obstacle_dist: self.world.min_obstacle_distance(&next),
            linear_vel: next.linear_vel,
            prev_angular_vel: next.prev_angular_vel,
            angular_vel: next.angular_vel,
            goal_reached,
            collided,
        };
        let reward = compute_reward_with(&snapshot, &cfg.reward)?;
        self.termination = termination;

        if termination == Termination::None {
            self.subgoal = self.current_subgoal();
            if self.subgoal.distance(next.position) > cfg.replan_distance {
                self.replan();
            }
        }
        let observation = self.observe()?;

        let summary = &mut self.log.summary;
        summary.path_length += next.position.distance(prev.position);
        summary.ticks = self.tick;
        summary.duration = self.tick as f64 * cfg.dt;
        summary.total_reward += reward.total;
        summary.termination = termination;
        summary.collisions = u32::from(collided);
        self.log.ticks.push(TickRecord {
            tick: self.tick,
            time: self.tick as f64 * cfg.dt,
            x: next.position.x,
            y: next.position.y,
            heading: next.heading,
            action: Action::new(next.linear_vel, next.angular_vel),
            reward,
            min_obstacle_dist: snapshot.min_obstacle_dist.is_finite().then_some(snapshot.min_obstacle_dist),
            walkers: self.world.obstacles.iter().filter(|o| !o.kind.is_static()).map(|o| o.position).collect(),
        });

        Ok(StepResult { observation, reward, snapshot, done: termination != Termination::None, termination })
    }

    /// Replans from the free cell nearest the robot; keeps the old plan if that fails.
    fn replan(&mut self) {
        let Some((i, j)) = nearest_free_cell(&self.planning_grid, self.world.robot.position, 10) else {
            return;
        };
        let start = self.planning_grid.cell_center(i, j);
        if let Ok(plan) = plan_astar(&self.planning_grid, start, self.world.goal) {
            if let Ok(waypoints) = subsample_waypoints(&plan) {
                self.plan_len = plan_length(&plan);
                self.plan = plan;
                self.waypoints = waypoints;
                self.subgoal = self.current_subgoal();
            }
        }
    }
}

fn wall_runs(grid: &OccupancyGrid) -> Vec<[usize; 3]> {
    let mut runs = Vec::new();
    for j in 0..grid.height() {
        let mut i = 0;
        while i < grid.width() {
            if grid.is_occupied(i, j) {
                let start = i;
                while i < grid.width() && grid.is_occupied(i, j) {
                    i += 1;
                }
                runs.push([j, start, i]);
            } else {
                i += 1;
            }
        }
    }
    runs
}

/// Runs one episode from reset until termination.
pub fn run_episode(policy: &dyn Policy, scenario: &ScenarioConfig, variant: AgentVariant, config: &EnvConfig, seed: u64) -> Result<EpisodeLog> {
    let (mut env, mut obs) = Env::reset(scenario, variant, config, seed)?;
    loop {
        let action = policy.act(&obs)?;
        let step = env.step(action)?;
        if step.done {
            break;
        }
        obs = step.observation;
    }
    Ok(env.into_log())
}

/// Recomputes the travelled distance of a log from its tick positions.
pub fn logged_path_length(log: &EpisodeLog) -> f64 {
    path_length(&log.trajectory())
}
