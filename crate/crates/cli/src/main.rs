//! `holonav` command line: train, evaluate, replay and stage-info.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use holonav::curriculum::{stage_table, CurriculumState, ADVANCE_THRESHOLD, DEFAULT_WINDOW, STAGE_COUNT};
use holonav::engine::EnvConfig;
use holonav::evaluation::{export_report, run_scenario_suite, ScenarioSuite, BUILTIN_SUITES, DEFAULT_SUITE_EPISODES};
use holonav::observation::AgentVariant;
use holonav::policy::{train_curriculum, CemConfig, GoToGoal, GoToSubgoal, MlpPolicy, Policy, PolicyParams, TrainingRow, ZeroPolicy};
use holonav::trajectory::{parse_jsonl, render_svg};

#[derive(Parser)]
#[command(name = "holonav", version, about = "Train, evaluate and replay local navigation policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an MLP policy with CEM through the curriculum.
    Train(TrainArgs),
    /// Run a scenario suite with a policy file or a baseline.
    Evaluate(EvalArgs),
    /// Render the episodes of a JSONL log as SVG plots.
    Replay(ReplayArgs),
    /// Print the curriculum table and all defaults as JSON.
    StageInfo(StageInfoArgs),
}

#[derive(Args)]
struct Common {
    /// Base seed; falls back to HOLONAV_SEED, then 0.
    #[arg(long, env = "HOLONAV_SEED")]
    seed: Option<u64>,
    /// Worker threads for rollouts; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON file with run settings; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_parser = parse_variant)]
    variant: AgentVariant,
    #[arg(long)]
    budget_episodes: Option<usize>,
    /// Curriculum stage to start from.
    #[arg(long)]
    stage: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, conflicts_with = "baseline")]
    policy: Option<PathBuf>,
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Observation layout for baselines (policy files carry their own).
    #[arg(long, value_parser = parse_variant)]
    variant: Option<AgentVariant>,
    #[arg(long)]
    suite: Option<String>,
    /// Number of dynamic obstacles, replacing the suite default.
    #[arg(long)]
    obstacles: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReplayArgs {
    log: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StageInfoArgs {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Baseline {
    GotoSubgoal,
    GotoGoal,
    Zero,
}

fn parse_variant(s: &str) -> Result<AgentVariant, String> {
    s.parse().map_err(|e: holonav::NavError| e.to_string())
}

/// Everything a run used, echoed to `run-config.json` so it can be repeated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    command: String,
    variant: Option<AgentVariant>,
    stage: usize,
    suite: Option<String>,
    obstacles: Option<usize>,
    episodes: usize,
    policy: Option<PathBuf>,
    baseline: Option<Baseline>,
    seed: u64,
    jobs: usize,
    out: PathBuf,
    config_file: Option<PathBuf>,
    env: EnvConfig,
    cem: CemConfig,
    curriculum_window: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            variant: None,
            stage: 1,
            suite: None,
            obstacles: None,
            episodes: DEFAULT_SUITE_EPISODES,
            policy: None,
            baseline: None,
            seed: 0,
            jobs: 1,
            out: PathBuf::from("holonav-out"),
            config_file: None,
            env: EnvConfig::default(),
            cem: CemConfig::default(),
            curriculum_window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn base_config(command: &str, common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.command = command.to_string();
    cfg.config_file = common.config.clone();
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn write_run_config(cfg: &RunConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let path = cfg.out.join("run-config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let mut cfg = base_config("train", &args.common)?;
    cfg.variant = Some(args.variant);
    if let Some(b) = args.budget_episodes {
        cfg.cem.budget_episodes = b;
    }
    if let Some(stage) = args.stage {
        cfg.stage = stage;
    }
    if !(1..=STAGE_COUNT).contains(&cfg.stage) {
        return Err(usage(format!("--stage must be in 1..={STAGE_COUNT}, got {}", cfg.stage)));
    }
    cfg.cem.seed = cfg.seed;
    cfg.cem.jobs = cfg.jobs;
    cfg.cem.validate().map_err(|e| usage(e.to_string()))?;
    write_run_config(&cfg)?;

    let mut curriculum = CurriculumState::starting_at(cfg.stage, cfg.curriculum_window);
    let (params, rows) = train_curriculum(args.variant, &cfg.env, &cfg.cem, &mut curriculum)?;
    let mut csv = format!("{}\n", TrainingRow::CSV_HEADER);
    for row in &rows {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    std::fs::write(cfg.out.join("training.csv"), csv)?;
    let policy_path = cfg.out.join("policy.json");
    params.save(&policy_path)?;
    println!(
        "trained {} for {} iterations, final stage {}, policy at {}",
        args.variant,
        rows.len(),
        curriculum.stage(),
        policy_path.display()
    );
    Ok(())
}

fn evaluate(args: EvalArgs) -> anyhow::Result<()> {
    let mut cfg = base_config("evaluate", &args.common)?;
    if args.policy.is_some() {
        cfg.policy = args.policy.clone();
        cfg.baseline = None;
    }
    if args.baseline.is_some() {
        cfg.baseline = args.baseline;
        cfg.policy = None;
    }
    if args.variant.is_some() {
        cfg.variant = args.variant;
    }
    if args.suite.is_some() {
        cfg.suite = args.suite.clone();
    }
    if args.obstacles.is_some() {
        cfg.obstacles = args.obstacles;
    }
    if let Some(n) = args.episodes {
        cfg.episodes = n;
    }

    let name = cfg.suite.clone().ok_or_else(|| usage(format!("--suite is required; available: {}", BUILTIN_SUITES.join(", "))))?;
    let mut suite = ScenarioSuite::builtin(&name).map_err(|e| usage(e.to_string()))?.with_episodes(cfg.episodes).with_seed(cfg.seed);
    if let Some(n) = cfg.obstacles {
        suite = suite.with_obstacles(n);
    }
    suite.validate().map_err(|e| usage(e.to_string()))?;

    let (policy, variant): (Box<dyn Policy>, AgentVariant) = match (&cfg.policy, cfg.baseline) {
        (Some(path), _) => {
            let params = PolicyParams::load(path).with_context(|| format!("loading policy {}", path.display()))?;
            if cfg.variant.is_some_and(|v| v != params.variant) {
                return Err(usage(format!("policy file is for {}, not {}", params.variant, cfg.variant.unwrap())));
            }
            let variant = params.variant;
            (Box::new(MlpPolicy::new(params)?), variant)
        }
        (None, Some(baseline)) => {
            let limits = cfg.env.limits;
            let variant = cfg.variant.unwrap_or(AgentVariant::Agent4);
            let policy: Box<dyn Policy> = match baseline {
                Baseline::GotoSubgoal if !variant.uses_subgoal() => {
                    return Err(usage(format!("goto-subgoal needs a layout with a subgoal; {variant} has none")));
                }
                Baseline::GotoSubgoal => Box::new(GoToSubgoal::new(limits)),
                Baseline::GotoGoal => Box::new(GoToGoal::new(limits)),
                Baseline::Zero => Box::new(ZeroPolicy),
            };
            (policy, variant)
        }
        (None, None) => return Err(usage("evaluate needs --policy or --baseline")),
    };
    cfg.variant = Some(variant);
    write_run_config(&cfg)?;

    let (report, logs) = run_scenario_suite(&suite, policy.as_ref(), variant, &cfg.env, cfg.jobs)?;
    let files = export_report(&report, &logs, &cfg.out, true)?;
    print!("{}", report.to_csv());
    println!("wrote {} and {}", files.csv.display(), files.jsonl.display());
    Ok(())
}

fn replay(args: ReplayArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
    let logs = parse_jsonl(&text).with_context(|| format!("parsing {}", args.log.display()))?;
    let out = args.out.unwrap_or_else(|| args.log.parent().unwrap_or(Path::new(".")).to_path_buf());
    let cfg = RunConfig { command: "replay".into(), out: out.clone(), policy: Some(args.log.clone()), ..RunConfig::default() };
    write_run_config(&cfg)?;
    for (k, log) in logs.iter().enumerate() {
        let path = out.join(format!("episode-{k:04}.svg"));
        std::fs::write(&path, render_svg(log)).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("rendered {} episode(s) into {}", logs.len(), out.display());
    Ok(())
}

fn stage_info() -> anyhow::Result<()> {
    let info = serde_json::json!({
        "stages": stage_table(),
        "advance_threshold": ADVANCE_THRESHOLD,
        "curriculum_window": DEFAULT_WINDOW,
        "suites": BUILTIN_SUITES,
        "defaults": RunConfig::default(),
    });
    println!("{}", serde_json::to_string_pretty(&info)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Replay(a) => replay(a),
        Command::StageInfo(_) => stage_info(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
