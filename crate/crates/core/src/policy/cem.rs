//! Cross-entropy method over MLP weights.
//!
//! Each iteration samples a population from a diagonal Gaussian, scores every
//! candidate by its mean episode return on a shared set of episode seeds and
//! refits the Gaussian to the elite candidates. A decaying noise term keeps
//! the variance from collapsing early.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::{MlpPolicy, PolicyParams};
use crate::curriculum::{stage_config, CurriculumState};
use crate::engine::{run_episode, EnvConfig, EpisodeSummary, Termination};
use crate::error::{NavError, Result};
use crate::observation::AgentVariant;
use crate::parallel::{derive_seed, par_map};
use crate::sensing::SCAN_BEAMS;
use crate::world::ScenarioConfig;

const TRAIN_STREAM: u64 = 0x0074_7261_696e;
const INIT_STREAM: u64 = 0x696e_6974;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CemConfig {
    pub population: usize,
    pub elite_fraction: f64,
    pub episodes_per_candidate: usize,
    pub budget_episodes: usize,
    pub hidden: Vec<usize>,
    /// Initial sampling std of the output layer, in units of each weight's
    /// initialization scale.
    pub output_std: f64,
    /// Same for the hidden layers. Kept small: large perturbations there
    /// re-randomize the features every sample.
    pub hidden_std: f64,
    /// Extra std added at refit, relative to the initial std.
    pub extra_noise: f64,
    pub noise_decay: f64,
    /// Start the output layer at zero so the untrained policy drives straight at mid speed.
    pub zero_output_init: bool,
    /// Start the scan-beam input weights at zero so the initial features
    /// depend on the goal and plan inputs only; they are still sampled.
    pub zero_scan_init: bool,
    /// Tick limit of training episodes; 0 keeps the environment's own limit.
    /// Without a time cost, circling near the plan for the full evaluation
    /// limit out-earns the goal bonus, so training uses a shorter horizon.
    pub horizon: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for CemConfig {
    fn default() -> Self {
        Self {
            population: 16,
            elite_fraction: 0.25,
            episodes_per_candidate: 2,
            budget_episodes: 2000,
            hidden: vec![64, 64],
            output_std: 3.0,
            hidden_std: 0.02,
            extra_noise: 0.5,
            noise_decay: 0.97,
            zero_output_init: true,
            zero_scan_init: true,
            horizon: 200,
            seed: 0,
            jobs: 1,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(NavError::InvalidConfig(format!("population must be >= 4, got {}", self.population)));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(NavError::InvalidConfig(format!("elite fraction must lie in (0, 1), got {}", self.elite_fraction)));
        }
        if self.episodes_per_candidate == 0 {
            return Err(NavError::InvalidConfig("episodes per candidate must be >= 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(NavError::InvalidConfig(format!("hidden widths must be positive, got {:?}", self.hidden)));
        }
        if !(self.output_std >= 0.0 && self.hidden_std >= 0.0 && self.extra_noise >= 0.0 && (0.0..=1.0).contains(&self.noise_decay)) {
            return Err(NavError::InvalidConfig("std, noise and decay must be non-negative (decay at most 1)".into()));
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.population as f64).round() as usize).clamp(1, self.population)
    }

    pub fn episodes_per_iteration(&self) -> usize {
        self.population * self.episodes_per_candidate
    }
}

/// Mean and variance of the `n_elite` highest-return samples. Ties keep the
/// lower index.
pub fn refit_elite(samples: &[Vec<f64>], returns: &[f64], n_elite: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.is_empty() || samples.len() != returns.len() || n_elite == 0 || n_elite > samples.len() {
        return Err(NavError::InvalidConfig(format!(
            "refit needs matching non-empty samples/returns and 1..={} elites",
            samples.len()
        )));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| returns[b].total_cmp(&returns[a]));
    let elite = &order[..n_elite];
    let dim = samples[0].len();
    let n = n_elite as f64;
    let mut mean = vec![0.0; dim];
    for &i in elite {
        for (m, x) in mean.iter_mut().zip(&samples[i]) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for &i in elite {
        for ((v, x), m) in var.iter_mut().zip(&samples[i]).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    Ok((mean, var))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub episodes: usize,
    pub mean_return: f64,
    pub elite_mean_return: f64,
    pub best_return: f64,
    pub mean_std: f64,
    /// Episode summaries in candidate-major order.
    pub summaries: Vec<EpisodeSummary>,
}

#[derive(Debug, Clone)]
pub struct CemTrainer {
    config: CemConfig,
    env: EnvConfig,
    template: PolicyParams,
    mean: Vec<f64>,
    std: Vec<f64>,
    /// Initial per-weight sampling std.
    unit: Vec<f64>,
    rng: ChaCha8Rng,
    iteration: usize,
    episodes_used: usize,
}

impl CemTrainer {
    pub fn new(variant: AgentVariant, mut env: EnvConfig, config: CemConfig) -> Result<Self> {
        config.validate()?;
        if config.horizon > 0 {
            env.max_ticks = config.horizon;
        }
        let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, INIT_STREAM, 0));
        let mut template = PolicyParams::random(variant, &config.hidden, &mut init_rng);
        template.max_range = env.lidar.max_range;
        template.limits = env.limits;
        let ranges = template.layer_ranges();
        if config.zero_output_init {
            let (start, len) = *ranges.last().unwrap();
            template.weights[start..start + len].fill(0.0);
        }
        if config.zero_scan_init {
            let fan_in = template.layers[0];
            let (start, _) = ranges[0];
            for row in template.weights[start..start + fan_in * template.layers[1]].chunks_exact_mut(fan_in) {
                row[..SCAN_BEAMS].fill(0.0);
            }
        }
        let mut unit = template.init_scales();
        let (out_start, _) = *ranges.last().unwrap();
        unit[..out_start].iter_mut().for_each(|u| *u *= config.hidden_std);
        unit[out_start..].iter_mut().for_each(|u| *u *= config.output_std);
        let std = unit.clone();
        Ok(Self {
            mean: template.weights.clone(),
            std,
            unit,
            template,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            env,
            iteration: 0,
            episodes_used: 0,
        })
    }

    pub fn config(&self) -> &CemConfig {
        &self.config
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn episodes_used(&self) -> usize {
        self.episodes_used
    }

    /// Whether another full iteration fits in the episode budget.
    pub fn has_budget(&self) -> bool {
        self.episodes_used + self.config.episodes_per_iteration() <= self.config.budget_episodes
    }

    pub fn mean_params(&self) -> PolicyParams {
        PolicyParams { weights: self.mean.clone(), ..self.template.clone() }
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    fn sample(&mut self) -> Vec<f64> {
        self.mean.iter().zip(&self.std).map(|(m, s)| m + s * self.rng.sample::<f64, _>(StandardNormal)).collect()
    }

    /// Runs one sample-evaluate-refit iteration on `scenario`.
    pub fn step(&mut self, scenario: &ScenarioConfig) -> Result<IterationReport> {
        let cfg = self.config.clone();
        let candidates: Vec<Vec<f64>> = (0..cfg.population).map(|_| self.sample()).collect();
        // Every candidate sees the same episodes, so returns compare like for like.
        let seeds: Vec<u64> = (0..cfg.episodes_per_candidate)
            .map(|j| derive_seed(cfg.seed, TRAIN_STREAM, (self.iteration * cfg.episodes_per_candidate + j) as u64))
            .collect();
        let jobs: Vec<(usize, u64)> = (0..cfg.population).flat_map(|c| seeds.iter().map(move |&s| (c, s))).collect();
        let template = &self.template;
        let env = &self.env;
        let outcomes = par_map(&jobs, cfg.jobs, |&(c, seed)| {
            let policy = MlpPolicy::new(template.with_weights(candidates[c].clone())?)?;
            run_episode(&policy, scenario, template.variant, env, seed).map(|log| log.summary)
        });
        let summaries = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

        let returns: Vec<f64> = summaries
            .chunks(cfg.episodes_per_candidate)
            .map(|c| c.iter().map(|s| s.total_reward).sum::<f64>() / c.len() as f64)
            .collect();
        let n_elite = cfg.elite_count();
        let (mean, var) = refit_elite(&candidates, &returns, n_elite)?;
        let noise = cfg.extra_noise * cfg.noise_decay.powi(self.iteration as i32);
        self.std = var.iter().zip(&self.unit).map(|(v, u)| (v + (noise * u).powi(2)).sqrt()).collect();
        self.mean = mean;

        let mut sorted = returns.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let report = IterationReport {
            iteration: self.iteration,
            episodes: summaries.len(),
            mean_return: returns.iter().sum::<f64>() / returns.len() as f64,
            elite_mean_return: sorted[..n_elite].iter().sum::<f64>() / n_elite as f64,
            best_return: sorted[0],
            mean_std: self.std.iter().sum::<f64>() / self.std.len() as f64,
            summaries,
        };
        self.iteration += 1;
        self.episodes_used += report.episodes;
        Ok(report)
    }
}

/// Trains until the episode budget is spent. `scenario_for` picks the
/// scenario of each iteration.
pub fn train_cem(
    scenario_for: &dyn Fn(usize) -> ScenarioConfig,
    variant: AgentVariant,
    env: &EnvConfig,
    config: &CemConfig,
) -> Result<PolicyParams> {
    let mut trainer = CemTrainer::new(variant, *env, config.clone())?;
    while trainer.has_budget() {
        let scenario = scenario_for(trainer.iteration());
        trainer.step(&scenario)?;
    }
    Ok(trainer.mean_params())
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub iteration: usize,
    pub stage: usize,
    pub window_success_rate: f64,
    pub mean_return: f64,
}

impl TrainingRow {
    pub const CSV_HEADER: &'static str = "iteration,stage,window_success_rate,mean_return";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.iteration, self.stage, self.window_success_rate, self.mean_return)
    }
}

/// Trains through the curriculum: each iteration runs on the current stage
/// and every episode outcome goes through the advancement rule.
pub fn train_curriculum(
    variant: AgentVariant,
    env: &EnvConfig,
    config: &CemConfig,
    curriculum: &mut CurriculumState,
) -> Result<(PolicyParams, Vec<TrainingRow>)> {
    let mut trainer = CemTrainer::new(variant, *env, config.clone())?;
    let mut rows = Vec::new();
    while trainer.has_budget() {
        let stage = curriculum.stage();
        let report = trainer.step(&stage_config(stage)?.scenario())?;
        for s in &report.summaries {
            curriculum.observe(s.termination == Termination::GoalReached);
        }
        rows.push(TrainingRow {
            iteration: report.iteration,
            stage,
            window_success_rate: curriculum.success_rate(),
            mean_return: report.mean_return,
        });
    }
    Ok((trainer.mean_params(), rows))
}
