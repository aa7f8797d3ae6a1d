use std::path::{Path, PathBuf};
use std::process::Command;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn lqgpbe(args: &[&str], out: &Path, threads: Option<&str>) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lqgpbe"));
    cmd.args(args).arg("--out").arg(out);
    match threads {
        Some(n) => cmd.env("LQGPBE_THREADS", n),
        None => cmd.env_remove("LQGPBE_THREADS"),
    };
    let o = cmd.output().expect("binary runs");
    o.status.code().expect("exit code")
}

fn cfg_arg(name: &str) -> String {
    config(name).display().to_string()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&read(p)).unwrap()
}

#[test]
fn solve_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg_arg("lqg_case2.json");
    assert_eq!(lqgpbe(&["solve", "--config", &c], dir.path(), None), 0);
    let s = json(&dir.path().join("strategies.json"));
    assert_eq!(s["converged"], true);
    let l = s["strategies"][0]["L"][0][0].as_f64().unwrap();
    assert!((l - 0.6722).abs() < 5e-4, "{l}");
    for f in ["values.json", "iterations.csv", "public_trajectory.csv", "config.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let it = read(&dir.path().join("iterations.csv"));
    assert_eq!(it.lines().next(), Some("k,epsilon"));
    // 17 significant digits in every float field
    let row = it.lines().nth(1).unwrap();
    let mantissa = row.split(',').nth(1).unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{row}");
}

#[test]
fn strategies_round_trip_through_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg_arg("lqg_case3.json");
    let (a, b, s) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("s"));
    assert_eq!(lqgpbe(&["solve", "--config", &c], &s, None), 0);
    let strat = s.join("strategies.json").display().to_string();
    assert_eq!(lqgpbe(&["simulate", "--config", &c, "--trajectories", "5000", "--seed", "7"], &a, None), 0);
    assert_eq!(
        lqgpbe(&["simulate", "--config", &c, "--trajectories", "5000", "--seed", "7", "--strategies", &strat], &b, None),
        0
    );
    assert_eq!(read(&a.join("summary.json")), read(&b.join("summary.json")));
}

#[test]
fn simulate_output_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg_arg("lqg_2d_partial.json");
    let args = ["simulate", "--config", &c, "--trajectories", "4000", "--dump", "3", "--check"];
    let runs: Vec<PathBuf> = ["1", "3", "8"].iter().map(|n| dir.path().join(n)).collect();
    for (p, n) in runs.iter().zip(["1", "3", "8"]) {
        assert_eq!(lqgpbe(&args, p, Some(n)), 0);
    }
    for p in &runs[1..] {
        assert_eq!(read(&runs[0].join("summary.json")), read(&p.join("summary.json")));
        assert_eq!(read(&runs[0].join("trajectories.csv")), read(&p.join("trajectories.csv")));
    }
    assert_eq!(read(&runs[0].join("trajectories.csv")).lines().count(), 1 + 3 * 2);
}

#[test]
fn verify_discrete_certifies_toy_game() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lqgpbe(&["verify-discrete", "--config", &cfg_arg("discrete_toy.json")], dir.path(), None), 0);
    let r = json(&dir.path().join("verification_report.json"));
    assert_eq!(r["certified"], true);
    assert!(r["max_oracle_deviation"].as_f64().unwrap() < 1e-12);
}

#[test]
fn sweep_and_compare_write_comparison_csv() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg_arg("lqg_case2.json");
    assert_eq!(lqgpbe(&["sweep-horizon", "--config", &c, "--t-max", "1"], &dir.path().join("s"), None), 0);
    let text = read(&dir.path().join("s/comparison.csv"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T,J_game,J_centralized");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,"));

    assert_eq!(lqgpbe(&["compare-centralized", "--config", &c, "--mc", "--trajectories", "2000"], &dir.path().join("c"), None), 0);
    let text = read(&dir.path().join("c/comparison.csv"));
    assert_eq!(text.lines().next(), Some("T,J_game,J_centralized,J_game_mc,J_game_mc_se"));
    assert!(text.lines().nth(1).unwrap().starts_with("2,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // wrong kind of game
    assert_eq!(lqgpbe(&["solve", "--config", &cfg_arg("discrete_toy.json")], &dir.path().join("a"), None), 1);
    // missing file
    assert_eq!(lqgpbe(&["solve", "--config", "/nonexistent.json"], &dir.path().join("b"), None), 1);
    // bad thread count
    assert_eq!(lqgpbe(&["solve", "--config", &cfg_arg("lqg_case1.json")], &dir.path().join("c"), Some("zero")), 1);
    // non-convergence still writes results
    let d = dir.path().join("d");
    assert_eq!(lqgpbe(&["solve", "--config", &cfg_arg("lqg_case2.json"), "--iters", "2"], &d, None), 2);
    assert_eq!(json(&d.join("strategies.json"))["converged"], false);
}
