//! Fixed-scenario benchmark suites and batch navigation metrics.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{run_episode, EnvConfig, EpisodeLog, Termination};
use crate::error::{NavError, Result};
use crate::geometry::Vec2;
use crate::observation::AgentVariant;
use crate::parallel::{derive_seed, par_map};
use crate::policy::Policy;
use crate::trajectory::{render_svg, to_jsonl};
use crate::world::{Cell, ClusterSpec, MapSpec, OccupancyGrid, ScenarioConfig, StartGoalMode};

pub const BUILTIN_SUITES: [&str; 3] = ["obst20", "clusters", "runners"];
pub const DEFAULT_SUITE_EPISODES: usize = 150;

const SUITE_STREAM: u64 = 0x0073_7569_7465;
const ARENA_CELLS: usize = 200;
const ARENA_RESOLUTION: f64 = 0.1;

pub const CSV_HEADER: &str = "suite,episodes,success_rate,mean_collisions,mean_path_length_m,mean_time_s,timeout_rate";

/// A fixed map with a fixed start and goal; only the obstacles are resampled per episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSuite {
    pub name: String,
    pub scenario: ScenarioConfig,
    pub episodes: usize,
    pub seed: u64,
}

/// A 20 m square room with a boundary wall, optionally with a round pillar
/// of radius 2.5 m in the middle.
fn arena(pillar: bool) -> String {
    let mut g = OccupancyGrid::new(ARENA_CELLS, ARENA_CELLS, ARENA_RESOLUTION).expect("valid arena size");
    let n = ARENA_CELLS;
    g.fill_rect(0, 0, n - 1, 1, Cell::StaticKnown);
    g.fill_rect(0, n - 2, n - 1, n - 1, Cell::StaticKnown);
    g.fill_rect(0, 0, 1, n - 1, Cell::StaticKnown);
    g.fill_rect(n - 2, 0, n - 1, n - 1, Cell::StaticKnown);
    if pillar {
        let center = Vec2::new(10.0, 10.0);
        for j in 0..n {
            for i in 0..n {
                if g.cell_center(i, j).distance(center) <= 2.5 {
                    g.set(i, j, Cell::StaticKnown);
                }
            }
        }
    }
    g.to_ascii()
}

impl ScenarioSuite {
    pub fn builtin(name: &str) -> Result<Self> {
        let fixed = |start: Vec2, goal: Vec2| StartGoalMode::Fixed { start, start_heading: (goal - start).angle(), goal };
        let mut scenario = ScenarioConfig { dynamic: 20, ..Default::default() };
        match name {
            "obst20" => {
                scenario.map = MapSpec::Inline { ascii: arena(false) };
                scenario.start_goal = fixed(Vec2::new(3.05, 3.05), Vec2::new(16.95, 16.95));
            }
            "clusters" => {
                scenario.map = MapSpec::Inline { ascii: arena(true) };
                scenario.start_goal = fixed(Vec2::new(3.05, 10.05), Vec2::new(16.95, 10.05));
                scenario.clustering = Some(ClusterSpec { clusters: 3, spread: 1.0 });
            }
            "runners" => {
                scenario.map = MapSpec::Inline { ascii: arena(false) };
                scenario.start_goal = fixed(Vec2::new(3.05, 16.95), Vec2::new(16.95, 3.05));
                scenario.social.max_speed = 1.0;
                scenario.social.desired_speed = 1.0;
            }
            other => {
                return Err(NavError::InvalidConfig(format!("unknown suite {other:?}; available: {}", BUILTIN_SUITES.join(", "))));
            }
        }
        Ok(Self { name: name.to_string(), scenario, episodes: DEFAULT_SUITE_EPISODES, seed: 0 })
    }

    /// Same suite with a different walker count, e.g. the 5 and 15 obstacle settings.
    pub fn with_obstacles(mut self, dynamic: usize) -> Self {
        self.scenario.dynamic = dynamic;
        self.name = format!("{}-n{dynamic}", self.name.split("-n").next().unwrap_or(&self.name));
        self
    }

    pub fn with_episodes(mut self, episodes: usize) -> Self {
        self.episodes = episodes;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(NavError::InvalidConfig(format!("suite {} needs at least one episode", self.name)));
        }
        if !matches!(self.scenario.start_goal, StartGoalMode::Fixed { .. }) {
            return Err(NavError::InvalidConfig(format!("suite {} must use a fixed start and goal", self.name)));
        }
        Ok(())
    }

    pub fn episode_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, SUITE_STREAM, index as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub suite: String,
    pub episodes: usize,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub mean_collisions: f64,
    pub mean_path_length: f64,
    pub mean_time: f64,
    pub timeout_rate: f64,
}

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.suite, self.episodes, self.success_rate, self.mean_collisions, self.mean_path_length, self.mean_time, self.timeout_rate
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.csv_row())
    }
}

pub fn compute_metrics(suite: &str, logs: &[EpisodeLog]) -> Result<MetricsReport> {
    if logs.is_empty() {
        return Err(NavError::EmptyInput("metrics need at least one episode log".into()));
    }
    let n = logs.len() as f64;
    let (mut successes, mut collided, mut timeouts, mut collisions) = (0usize, 0usize, 0usize, 0u64);
    let (mut path, mut time) = (0.0, 0.0);
    for (k, log) in logs.iter().enumerate() {
        match log.summary.termination {
            Termination::GoalReached => successes += 1,
            Termination::Collision => collided += 1,
            Termination::Timeout => timeouts += 1,
            Termination::None => return Err(NavError::RejectedInput(format!("episode {k} has not terminated"))),
        }
        collisions += u64::from(log.summary.collisions);
        path += log.summary.path_length;
        time += log.summary.duration;
    }
    Ok(MetricsReport {
        suite: suite.to_string(),
        episodes: logs.len(),
        success_rate: successes as f64 / n,
        collision_rate: collided as f64 / n,
        mean_collisions: collisions as f64 / n,
        mean_path_length: path / n,
        mean_time: time / n,
        timeout_rate: timeouts as f64 / n,
    })
}

/// Runs every episode of `suite` and returns the report and the logs in episode order.
pub fn run_scenario_suite(
    suite: &ScenarioSuite,
    policy: &dyn Policy,
    variant: AgentVariant,
    env: &EnvConfig,
    jobs: usize,
) -> Result<(MetricsReport, Vec<EpisodeLog>)> {
    suite.validate()?;
    let seeds: Vec<u64> = (0..suite.episodes).map(|k| suite.episode_seed(k)).collect();
    let logs = par_map(&seeds, jobs, |&seed| run_episode(policy, &suite.scenario, variant, env, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok((compute_metrics(&suite.name, &logs)?, logs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportedFiles {
    pub csv: PathBuf,
    pub jsonl: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Writes `metrics.csv`, `episodes.jsonl` and, with `plot`, an SVG of the first episode.
pub fn export_report(report: &MetricsReport, logs: &[EpisodeLog], dir: &Path, plot: bool) -> Result<ExportedFiles> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join("metrics.csv");
    std::fs::write(&csv, report.to_csv())?;
    let jsonl = dir.join("episodes.jsonl");
    std::fs::write(&jsonl, to_jsonl(logs)?)?;
    let svg = match logs.first() {
        Some(log) if plot => {
            let path = dir.join("trajectory.svg");
            std::fs::write(&path, render_svg(log))?;
            Some(path)
        }
        _ => None,
    };
    Ok(ExportedFiles { csv, jsonl, svg })
}
