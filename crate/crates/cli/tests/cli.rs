use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hplsv"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary_field(out: &str, key: &str) -> usize {
    let line = out.lines().last().unwrap();
    let mut it = line.split_whitespace();
    while let Some(k) = it.next() {
        if k == key {
            return it.next().unwrap().parse().unwrap();
        }
    }
    panic!("no {key} in {line:?}");
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn baseline_plan_on_demo() {
    let o = run(&["plan", "--scenario", p(&scenario("demo.scn"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("step x y heading action c_s\n0 2 2 E "));
    assert_eq!(summary_field(&out, "actions"), 27);
    assert_eq!(summary_field(&out, "crossings"), 1);
}

#[test]
fn trained_model_steers_around_the_queue() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("demo.model");
    let log = dir.path().join("train.csv");
    let demo = scenario("demo.scn");
    let o = run(&["train", "--scenario", p(&demo), "--episodes", "20000", "--out", p(&model), "--log", p(&log)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let log = std::fs::read_to_string(&log).unwrap();
    assert!(log.starts_with("episode,return,success,crossings,steps\n"));
    assert_eq!(log.lines().count(), 20_001);

    let o = run(&["plan", "--scenario", p(&demo), "--model", p(&model), "--w", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary_field(&stdout(&o), "crossings"), 0);

    let csv = dir.path().join("eval.csv");
    let o = run(&["eval", "--model", p(&model), "--generated", "3", "--out", p(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,seed,method,w,success,crossings,actions,oracle_actions,length_ratio,expanded,far_field_max"
    );
    assert_eq!(lines.count(), 9);

    let values = dir.path().join("q.csv");
    let o = run(&["oracle", "--scenario", p(&demo), "--model", p(&model), "--out", p(&values)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max-aggregated deviation"));
    assert!(std::fs::read_to_string(&values).unwrap().starts_with("x,y,heading,action,q\n"));
}

#[test]
fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let demo = scenario("demo.scn");
    let paths = ["a.model", "b.model"].map(|n| dir.path().join(n));
    for m in &paths {
        let o = run(&["train", "--scenario", p(&demo), "--episodes", "500", "--seed", "3", "--out", p(m)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn render_writes_ppm_svg_and_ascii() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("demo.ppm");
    let o = run(&["render", "--scenario", p(&scenario("demo.scn")), "--out", p(&ppm)]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = std::fs::read(&ppm).unwrap();
    assert!(bytes.starts_with(b"P6\n240 240\n255\n"));
    assert_eq!(bytes.len(), "P6\n240 240\n255\n".len() + 240 * 240 * 3);
    assert!(std::fs::read_to_string(dir.path().join("demo.svg")).unwrap().starts_with("<svg"));

    let txt = dir.path().join("demo.txt");
    let o = run(&["render", "--scenario", p(&scenario("demo.scn")), "--out", p(&txt)]);
    assert_eq!(o.status.code(), Some(0));
    let ascii = std::fs::read_to_string(&txt).unwrap();
    assert_eq!(ascii.lines().count(), 30);
    assert!(ascii.contains('G'));
}

#[test]
fn malformed_scenario_is_reported_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "version 1\ngrid 10 10 0.2\ngoal 5 5\nperson 5 6 X\n").unwrap();
    let o = run(&["plan", "--scenario", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn missing_file_and_usage_errors() {
    let o = run(&["plan", "--scenario", "/nonexistent/x.scn"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["plan"]).status.code(), Some(2));
    assert_eq!(run(&["plan", "--scenario", "x", "--w", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["train", "--out", "m"]).status.code(), Some(2));
}

#[test]
fn invalid_weight_is_rejected() {
    let o = run(&["plan", "--scenario", p(&scenario("demo.scn")), "--w=-1"]);
    assert_eq!(o.status.code(), Some(1));
}
