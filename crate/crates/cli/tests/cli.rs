use std::path::Path;
use std::process::{Command, Output};

use hybrid_mac::{ConfigFile, OptResult, SimStats};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-mac"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn last_line(out: &Output) -> String {
    stdout(out).lines().last().expect("output is not empty").to_string()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn config_with(edit: impl FnOnce(&mut ConfigFile)) -> String {
    let mut cfg = ConfigFile::default();
    edit(&mut cfg);
    cfg.to_toml()
}

#[test]
fn optimize_reference_point() {
    let out = run(&["optimize", "-L", "100"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r: OptResult = serde_json::from_str(&last_line(&out)).unwrap();
    assert!(r.m_opt.abs_diff(46) <= 2, "M_opt = {}", r.m_opt);
    assert!(stdout(&out).contains("M_opt"));
    let again: OptResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(again, r);
}

#[test]
fn optimize_rejects_single_device() {
    let out = run(&["optimize", "-L", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn infeasible_budget_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "tight.toml", &config_with(|c| c.timing.t_frame = 1030.0));
    let out = run(&["--config", &path, "optimize", "-L", "100"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("no admission count fits"), "{}", stderr(&out));
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = config_with(|_| {})
        .lines()
        .filter(|l| !l.trim_start().starts_with("t_ack"))
        .map(|l| format!("{l}\n"))
        .collect();
    let path = write_config(dir.path(), "broken.toml", &text);
    let out = run(&["--config", &path, "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("t_ack"), "{}", stderr(&out));
}

#[test]
fn missing_config_file_fails() {
    let out = run(&["--config", "/nonexistent/config.toml", "simulate"]);
    assert!(!out.status.success());
}

#[test]
fn simulate_is_reproducible() {
    let args = ["--seed", "5", "simulate", "--trace"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let frames = stdout(&first).lines().filter(|l| l.contains("\"frame_index\"")).count();
    assert!(frames >= 1_000, "expected one trace line per frame, got {frames}");
}

#[test]
fn hybrid_reference_metrics_are_bounded() {
    let out = run(&["simulate"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let s: SimStats = serde_json::from_str(&last_line(&out)).unwrap();
    let cfg = ConfigFile::default();
    assert_eq!(s.frames, 1_000);
    assert!(s.utility > 0.0 && s.utility <= 1.0);
    let ceiling = cfg.timing.rate * cfg.timing.t_frame;
    assert!(s.mean_throughput > 0.0 && s.mean_throughput <= ceiling);
    assert!(s.mean_delay.unwrap() <= cfg.timing.t_frame);
}

#[test]
fn tdma_does_not_depend_on_seed() {
    let a = run(&["--seed", "1", "simulate", "--protocol", "tdma"]);
    let b = run(&["--seed", "2", "simulate", "--protocol", "tdma"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(last_line(&a), last_line(&b));
}

#[test]
fn sweep_single_value_gives_one_row_per_protocol() {
    let out = run(&["sweep", "--axis", "K", "--values", "200"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("protocol,axis,value,frames"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for (row, protocol) in rows.iter().zip(["hybrid", "aloha", "tdma"]) {
        assert!(row.starts_with(&format!("{protocol},K,200,")), "{row}");
        assert!(row.ends_with(",ok"), "{row}");
    }
}

#[test]
fn sweep_writes_file_and_uses_config_section() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = config_with(|c| c.scenario.frames = 50);
    text.push_str("\n[sweep]\naxis = \"L\"\nvalues = [10, 20]\nprotocols = [\"hybrid\"]\n");
    let cfg = write_config(dir.path(), "sweep.toml", &text);
    let csv = dir.path().join("out.csv");
    let out = run(&["--config", &cfg, "sweep", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let written = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(written.lines().count(), 3);
    assert!(written.lines().nth(1).unwrap().starts_with("hybrid,L,10,50,"));
}

#[test]
fn sweep_to_unwritable_path_fails() {
    let out = run(&["sweep", "--axis", "K", "--values", "100", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot create"));
}

#[test]
fn sweep_without_axis_fails() {
    let out = run(&["sweep", "--values", "100"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("axis"));
}
