use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rvrp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvrp"))
        .args(args)
        .current_dir(dir)
        .env_remove("RVRP_SEED")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = rvrp(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn key_values(text: &str) -> BTreeMap<String, String> {
    text.lines().filter_map(|l| l.split_once('=')).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn solve_small_instance_with_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen-instance", "--graph", "grid:5:5", "--robots", "8", "--goals", "3", "--cap", "6", "--seed", "4", "--out", "i.rvrp"]);
    let kv = key_values(&ok(d, &["solve", "--instance", "i.rvrp", "--with-optimal", "--csv", "r.csv"]));
    assert_eq!(kv["method"], "greedy");
    assert_eq!(kv["bound_holds"], "true");
    let j: f64 = kv["J"].parse().unwrap();
    let j0: f64 = kv["J0"].parse().unwrap();
    assert!(j <= j0 + 1e-9);
    let calls: u64 = kv["objective_calls"].parse().unwrap();
    assert!(calls <= 3 * 8 * 3);
    let csv = fs::read_to_string(d.join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(d.join("r.csv.manifest.txt").exists());
}

#[test]
fn optimal_guard_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen-instance", "--robots", "25", "--goals", "4", "--out", "big.rvrp"]);
    let out = rvrp(d, &["solve", "--instance", "big.rvrp", "--method", "optimal"]);
    assert_eq!(out.status.code(), Some(2));
    // the certificate is skipped, not refused
    let kv = key_values(&ok(d, &["solve", "--instance", "big.rvrp", "--with-optimal"]));
    assert_eq!(kv["certificate"], "skipped");
    let out = rvrp(d, &["bench", "--iterations", "1", "--series", "B", "--methods", "greedy,optimal"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for args in [
        &["solve", "--instance", "missing.rvrp"][..],
        &["replay", "--trace", "missing.csv"],
        &["replay"],
        &["solve", "--no-such-flag"],
        &["bench", "--series", "C"],
        &["bench", "--methods", "greedy,bogus"],
    ] {
        assert_eq!(rvrp(d, args).status.code(), Some(1), "{args:?}");
    }
    fs::write(d.join("bad.cfg"), "iterations=3\nitrations=4\n").unwrap();
    assert_eq!(rvrp(d, &["bench", "--config", "bad.cfg"]).status.code(), Some(1));
}

#[test]
fn single_trial_series_table() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let csv = ok(d, &["bench", "--series", "A", "--noise", "gaussian:100", "--iterations", "1", "--out", "out"]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 7 * 4);
    assert!(rows.iter().all(|r| r.ends_with(",1")));
    let files = snapshot(&d.join("out"));
    let names: Vec<&str> = files.keys().map(String::as_str).collect();
    assert_eq!(names, ["manifest.txt", "series_A.csv", "series_A.dat", "series_A_expected.csv"]);
}

#[test]
fn noise_sweep_table() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = ok(tmp.path(), &["bench", "--sweep", "0,50,100,200", "--iterations", "3", "--methods", "hungarian,greedy"]);
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4 * 2);
    assert!(rows.iter().all(|r| r[5] == "8"));
    let scales: Vec<&str> = rows.iter().filter(|r| r[6] == "greedy").map(|r| r[2]).collect();
    assert_eq!(scales, ["0", "50", "100", "200"]);
    let sweep = ok(tmp.path(), &["sweep", "--iterations", "3", "--methods", "hungarian,greedy"]);
    assert_eq!(sweep, csv);
}

#[test]
fn bench_reruns_from_manifest_and_ignores_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["bench", "--iterations", "6", "--seed", "9", "--jobs", "1", "--out", "run"]);
    let first = snapshot(&d.join("run"));
    ok(d, &["bench", "--config", "run/manifest.txt"]);
    assert_eq!(snapshot(&d.join("run")), first);
    ok(d, &["bench", "--config", "run/manifest.txt", "--jobs", "4", "--out", "run4"]);
    let four = snapshot(&d.join("run4"));
    for name in ["series_A.csv", "series_A.dat", "series_A_expected.csv"] {
        assert_eq!(four[name], first[name], "{name}");
    }
}

#[test]
fn flags_override_config_and_env_seed_is_a_fallback() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("c.cfg"), "robots=6\ngoals=2\nseed=5\n").unwrap();
    ok(d, &["gen-instance", "--config", "c.cfg", "--robots", "7", "--out", "a.rvrp"]);
    let a = fs::read_to_string(d.join("a.rvrp")).unwrap();
    assert_eq!(a.lines().find(|l| l.starts_with("robots")).unwrap().split(' ').count(), 8);

    let run = |env: Option<&str>, extra: &[&str], out: &str| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_rvrp"));
        c.current_dir(d).env_remove("RVRP_SEED");
        if let Some(v) = env {
            c.env("RVRP_SEED", v);
        }
        let status = c.args(["gen-instance", "--robots", "5", "--goals", "2", "--out", out]).args(extra).output().unwrap().status;
        assert!(status.success());
        fs::read_to_string(d.join(out)).unwrap()
    };
    let from_env = run(Some("77"), &[], "e.rvrp");
    assert_eq!(from_env, run(None, &["--seed", "77"], "f.rvrp"));
    assert_ne!(from_env, run(Some("77"), &["--seed", "78"], "g.rvrp"));
}

#[test]
fn replay_both_policies_and_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = ok(d, &["replay", "--synthetic", "rate=0.5,minutes=10", "--policy", "both", "--noise", "gaussian:100", "--seed", "2", "--out", "rep"]);
    let blocks: Vec<BTreeMap<String, String>> = out.split("\n\n").map(key_values).collect();
    assert_eq!(blocks.len(), 2);
    assert_eq!(blocks[0]["policy"], "redundant");
    assert_eq!(blocks[1]["policy"], "non_redundant");
    for b in &blocks {
        let total: usize = b["total_requests"].parse().unwrap();
        let served: usize = b["serviced"].parse().unwrap();
        let dropped: usize = b["dropped"].parse().unwrap();
        assert_eq!(served + dropped, total);
    }
    assert_eq!(blocks[1]["redundancy"], "1");
    let first = snapshot(&d.join("rep"));
    assert!(first.contains_key("requests_redundant.csv") && first.contains_key("trace.csv"));
    ok(d, &["replay", "--config", "rep/manifest.txt"]);
    assert_eq!(snapshot(&d.join("rep")), first);

    // a saved trace replays to the same outcome
    ok(d, &["gen-trace", "--rate", "0.5", "--hours", "0.16666666666666666", "--seed", "2", "--out", "t.csv"]);
    assert_eq!(fs::read(d.join("t.csv")).unwrap(), first["trace.csv"]);
    let again = ok(d, &["replay", "--trace", "t.csv", "--policy", "redundant", "--seed", "2"]);
    assert_eq!(again.trim_end(), out.split("\n\n").next().unwrap().trim_end());
}

#[test]
fn empty_trace_gives_empty_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("empty.csv"), "request_time_s,pickup_node,dropoff_node\n").unwrap();
    let kv = key_values(&ok(d, &["replay", "--trace", "empty.csv", "--policy", "non_redundant"]));
    assert_eq!(kv["empty"], "true");
    assert_eq!(kv["total_requests"], "0");
}

#[test]
fn gen_grid_round_trips_through_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen-grid", "--rows", "4", "--cols", "4", "--out", "g.graph"]);
    assert!(d.join("g.graph.manifest.txt").exists());
    ok(d, &["gen-instance", "--graph", "g.graph", "--robots", "5", "--goals", "2", "--cap", "4", "--out", "i.rvrp"]);
    for m in ["hungarian", "greedy", "optimal", "slice_greedy", "random", "true"] {
        let kv = key_values(&ok(d, &["solve", "--instance", "i.rvrp", "--method", m]));
        assert_eq!(kv["method"], m);
        assert_eq!(kv["N_d"], "4");
    }
}
