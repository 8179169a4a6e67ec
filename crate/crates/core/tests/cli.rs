mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use planeway::artifacts::{planes_from_json, planes_to_json};
use planeway::config::RunConfig;

fn planeway(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planeway")).args(args).arg("--quiet").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn coords(p: [f64; 3]) -> String {
    format!("{},{},{}", p[0], p[1], p[2])
}

/// Floor-and-ramp planes written as a planes document in a fresh directory.
fn toy_dir() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let planes = common::floor_and_ramp(&RunConfig::default());
    let path = dir.path().join("planes.json");
    std::fs::write(&path, planes_to_json(&planes).unwrap()).unwrap();
    (dir, path)
}

fn toy_plan(dir: &Path, planes: &Path) -> Output {
    let goal = common::toy_goal();
    planeway(&["plan", "--planes", s(planes), "--start", &coords(common::TOY_START), "--goal", &coords([goal.x, goal.y, goal.z]), "--out", s(&dir.join("plan"))])
}

#[test]
fn gen_scene_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = planeway(&["gen-scene", "--name", "planes", "--seed", "3", "--out", s(d.path())]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for f in ["planes.ply", "planes_truth.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_scene_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let out = planeway(&["gen-scene", "--name", "moon", "--out", s(d.path())]);
    assert_ne!(code(&out), 0);
    assert!(stderr(&out).contains("moon"));
}

#[test]
fn corrupt_cloud_names_the_line() {
    let d = tempfile::tempdir().unwrap();
    let cloud = d.path().join("bad.ply");
    std::fs::write(&cloud, "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 oops 0\n").unwrap();
    let out = planeway(&["extract", "--cloud", s(&cloud), "--out", s(&d.path().join("planes.json"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 9"), "{}", stderr(&out));
}

#[test]
fn empty_cloud_fails_extraction() {
    let d = tempfile::tempdir().unwrap();
    let cloud = d.path().join("empty.ply");
    std::fs::write(&cloud, "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n").unwrap();
    let out = planeway(&["extract", "--cloud", s(&cloud), "--out", s(&d.path().join("planes.json"))]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(!d.path().join("planes.json").exists());
}

#[test]
fn missing_inputs_and_bad_config() {
    let (dir, planes) = toy_dir();
    let out = planeway(&["plan", "--planes", s(&dir.path().join("nope.json")), "--start", "0,0,0", "--goal", "1,1,0", "--out", s(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nope.json"));

    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, r#"{"version": 1, "mapping": {"resolutoin": 0.2}}"#).unwrap();
    let out = planeway(&["plan", "--config", s(&cfg), "--planes", s(&planes), "--start", "0,0,0", "--goal", "1,1,0", "--out", s(dir.path())]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));

    std::fs::write(&cfg, r#"{"version": 99}"#).unwrap();
    assert_eq!(code(&planeway(&["eval", "--config", s(&cfg), "--traj", "x", "--planes", "y"])), 5);
}

#[test]
fn goal_off_the_map_is_infeasible() {
    let (dir, planes) = toy_dir();
    let out = planeway(&["plan", "--planes", s(&planes), "--start", &coords(common::TOY_START), "--goal", "40,40,5", "--out", s(dir.path())]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("goal"));
}

#[test]
fn planes_document_round_trips_byte_for_byte() {
    let (_dir, planes) = toy_dir();
    let text = std::fs::read_to_string(&planes).unwrap();
    let again = planes_to_json(&planes_from_json(&text).unwrap()).unwrap();
    assert_eq!(text, again);
}

#[test]
fn plan_eval_and_export() {
    let (dir, planes) = toy_dir();
    let out = toy_plan(dir.path(), &planes);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let plan = dir.path().join("plan");
    let traj = plan.join("trajectory.json");
    for f in ["trajectory.json", "trajectory.csv", "report.json"] {
        assert!(plan.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(plan.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x,y,z,yaw,v,omega,plane"));

    let out = planeway(&["eval", "--traj", s(&traj), "--planes", s(&planes)]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ok"], Value::Bool(true), "{report}");

    let mut meshes = Vec::new();
    for name in ["a.ply", "b.ply"] {
        let path = dir.path().join(name);
        let out = planeway(&["export-viz", "--planes", s(&planes), "--traj", s(&traj), "--out", s(&path)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        meshes.push(std::fs::read_to_string(path).unwrap());
    }
    assert_eq!(meshes[0], meshes[1]);
    let count = |key: &str| -> usize {
        let line = meshes[0].lines().find(|l| l.starts_with(key)).unwrap();
        line.split_whitespace().last().unwrap().parse().unwrap()
    };
    assert_eq!(count("element face"), 2, "one face per plane");
    // the trajectory alone contributes one edge per 50 Hz step
    let duration = report["duration_s"].as_f64().unwrap();
    assert!(count("element edge") as f64 >= duration * 50.0 - 1.0);
}

#[test]
fn eval_flags_injected_faults() {
    let (dir, planes) = toy_dir();
    assert_eq!(code(&toy_plan(dir.path(), &planes)), 0);
    let traj_path = dir.path().join("plan/trajectory.json");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&traj_path).unwrap()).unwrap();

    // triple every arc-length coefficient: the speed triples as well
    let mut fast = doc.clone();
    for part in fast["parts"].as_array_mut().unwrap() {
        for seg in part["segments"].as_array_mut().unwrap() {
            for c in seg["c_s"].as_array_mut().unwrap().iter_mut().skip(1) {
                *c = Value::from(c.as_f64().unwrap() * 3.0);
            }
        }
    }
    let fast_path = dir.path().join("fast.json");
    std::fs::write(&fast_path, serde_json::to_string(&fast).unwrap()).unwrap();
    let out = planeway(&["eval", "--traj", s(&fast_path), "--planes", s(&planes)]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ok"], Value::Bool(false));
    assert!(report["residuals"]["c_v"]["value"].as_f64().unwrap() > 0.0);
    assert!(report["residuals"]["c_v"]["t"].as_f64().unwrap() > 0.0);
    assert!(report["violations"].as_array().unwrap().iter().any(|v| v.as_str().unwrap().starts_with("c_v =")));

    // the same trajectory against planes raised by 5 cm
    let mut planes_doc: Value = serde_json::from_str(&std::fs::read_to_string(&planes).unwrap()).unwrap();
    for p in planes_doc["planes"].as_array_mut().unwrap() {
        let z = &mut p["transform"]["translation"][2];
        *z = Value::from(z.as_f64().unwrap() + 0.05);
    }
    let raised = dir.path().join("raised.json");
    std::fs::write(&raised, serde_json::to_string(&planes_doc).unwrap()).unwrap();
    let out = planeway(&["eval", "--traj", s(&traj_path), "--planes", s(&raised)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ok"], Value::Bool(false));
    let dev = report["max_z_deviation"]["value"].as_f64().unwrap();
    assert!(dev > 0.04, "deviation {dev}");
}

#[test]
fn graph_cache_is_reused() {
    let (dir, planes) = toy_dir();
    let graph = dir.path().join("graph.json");
    let goal = common::toy_goal();
    let args = |out: &str| {
        vec![
            "plan".to_string(),
            "--planes".into(),
            s(&planes).into(),
            "--start".into(),
            coords(common::TOY_START),
            "--goal".into(),
            coords([goal.x, goal.y, goal.z]),
            "--graph".into(),
            s(&graph).into(),
            "--out".into(),
            s(&dir.path().join(out)).into(),
        ]
    };
    for out in ["first", "second"] {
        let a = args(out);
        let o = planeway(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert!(graph.exists());
    let read = |d: &str| std::fs::read(dir.path().join(d).join("trajectory.json")).unwrap();
    assert_eq!(read("first"), read("second"));
}
