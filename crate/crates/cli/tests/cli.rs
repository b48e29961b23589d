use std::path::Path;
use std::process::{Command, Output};

fn holonav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holonav")).args(args).env_remove("HOLONAV_SEED").output().expect("spawn holonav")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn train_into(dir: &Path) -> Output {
    holonav(&["train", "--variant", "agent2", "--seed", "7", "--budget-episodes", "96", "--out", dir.to_str().unwrap()])
}

#[test]
fn train_writes_policy_and_monotone_log() {
    let tmp = tempfile::tempdir().unwrap();
    let out = train_into(tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("policy.json").exists());
    let csv = read(&tmp.path().join("training.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,stage,window_success_rate,mean_return"));
    let stages: Vec<usize> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(stages.len(), 3);
    assert!(stages.windows(2).all(|w| w[0] <= w[1]));
    let echo: serde_json::Value = serde_json::from_str(&read(&tmp.path().join("run-config.json"))).unwrap();
    assert_eq!(echo["seed"], 7);
    assert_eq!(echo["cem"]["budget_episodes"], 96);
}

#[test]
fn train_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&train_into(a.path())), 0);
    assert_eq!(code(&train_into(b.path())), 0);
    assert_eq!(read(&a.path().join("training.csv")), read(&b.path().join("training.csv")));
    assert_eq!(read(&a.path().join("policy.json")), read(&b.path().join("policy.json")));
}

#[test]
fn train_without_variant_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holonav(&["train", "--seed", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--variant"));
}

#[test]
fn evaluate_policy_file() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&train_into(&tmp.path().join("train"))), 0);
    let policy = tmp.path().join("train/policy.json");
    let dir = tmp.path().join("eval");
    let out = holonav(&["evaluate", "--policy", policy.to_str().unwrap(), "--suite", "obst20", "--episodes", "4", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.join("metrics.csv"));
    assert!(csv.lines().nth(1).unwrap().starts_with("obst20,4,"));
    assert_eq!(read(&dir.join("episodes.jsonl")).lines().filter(|l| l.contains(r#""type":"summary""#)).count(), 4);
    assert!(dir.join("run-config.json").exists());
}

#[test]
fn evaluate_baseline_without_policy_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holonav(&["evaluate", "--baseline", "goto-subgoal", "--suite", "runners", "--episodes", "3", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(&tmp.path().join("metrics.csv")).contains("\nrunners,3,"));
    assert!(tmp.path().join("trajectory.svg").exists());
}

#[test]
fn obstacle_flag_renames_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holonav(&["evaluate", "--baseline", "goto-goal", "--suite", "obst20", "--obstacles", "5", "--episodes", "2", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(read(&tmp.path().join("metrics.csv")).contains("\nobst20-n5,2,"));
}

#[test]
fn unknown_suite_lists_available() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holonav(&["evaluate", "--baseline", "zero", "--suite", "mall", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("obst20") && err.contains("clusters") && err.contains("runners"), "{err}");
}

#[test]
fn missing_policy_file_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holonav(&["evaluate", "--policy", "/nonexistent/p.json", "--suite", "obst20", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn subgoal_baseline_rejects_layout_without_subgoal() {
    let tmp = tempfile::tempdir().unwrap();
    let out = holonav(&["evaluate", "--baseline", "goto-subgoal", "--variant", "agent2", "--suite", "obst20", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn jobs_do_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |jobs: &str| {
        let dir = tmp.path().join(jobs);
        let out = holonav(&["evaluate", "--baseline", "goto-subgoal", "--suite", "clusters", "--episodes", "8", "--seed", "3", "--jobs", jobs, "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        (read(&dir.join("metrics.csv")), read(&dir.join("episodes.jsonl")))
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn seed_falls_back_to_env() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_holonav"))
        .args(["evaluate", "--baseline", "zero", "--suite", "obst20", "--episodes", "1", "--out", tmp.path().to_str().unwrap()])
        .env("HOLONAV_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let echo: serde_json::Value = serde_json::from_str(&read(&tmp.path().join("run-config.json"))).unwrap();
    assert_eq!(echo["seed"], 42);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 5, "episodes": 2, "suite": "runners", "baseline": "goto-goal"}"#).unwrap();
    let dir = tmp.path().join("out");
    let out = holonav(&["evaluate", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let echo: serde_json::Value = serde_json::from_str(&read(&dir.join("run-config.json"))).unwrap();
    assert_eq!(echo["seed"], 9);
    assert_eq!(echo["episodes"], 2);
    assert!(read(&dir.join("metrics.csv")).contains("\nrunners,2,"));
}

#[test]
fn replay_renders_each_episode() {
    let tmp = tempfile::tempdir().unwrap();
    let eval = tmp.path().join("eval");
    holonav(&["evaluate", "--baseline", "goto-goal", "--suite", "obst20", "--episodes", "1", "--out", eval.to_str().unwrap()]);
    let svgs = tmp.path().join("svg");
    let out = holonav(&["replay", eval.join("episodes.jsonl").to_str().unwrap(), "--out", svgs.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let svg = read(&svgs.join("episode-0000.svg"));
    assert!(svg.starts_with("<svg") && svg.contains(">0.0s<"));
}

#[test]
fn replay_reports_bad_line() {
    let tmp = tempfile::tempdir().unwrap();
    let eval = tmp.path().join("eval");
    holonav(&["evaluate", "--baseline", "goto-goal", "--suite", "obst20", "--episodes", "1", "--out", eval.to_str().unwrap()]);
    let text = read(&eval.join("episodes.jsonl"));
    let lines: Vec<&str> = text.lines().collect();
    let broken = format!("{}\n{}\n{}", lines[0], lines[1], &lines[2][..10]);
    let log = tmp.path().join("broken.jsonl");
    std::fs::write(&log, broken).unwrap();
    let out = holonav(&["replay", log.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let empty = tmp.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = holonav(&["replay", empty.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty input"));
}

#[test]
fn stage_info_prints_table_and_defaults() {
    let out = holonav(&["stage-info"]);
    assert_eq!(code(&out), 0);
    let info: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(info["stages"].as_array().unwrap().len(), 7);
    assert_eq!(info["advance_threshold"], 0.8);
    assert_eq!(info["defaults"]["env"]["max_ticks"], 900);
}
