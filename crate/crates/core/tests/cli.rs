use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cgplus::cgraph::{NodeId, Placement, PlanarPose};
use cgplus::cli::SceneFile;
use cgplus::fixtures::{self, box_node};
use serde_json::Value;

fn scenes() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgplus")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Plans the Fig. 1 scene into `dir` and returns the plan file path.
fn fig1_plan(dir: &Path) -> PathBuf {
    let out = dir.join("plan.json");
    let scene = scenes().join("fig1_scene.json");
    let goal = scenes().join("fig1_goal.json");
    let o = run(&["plan", "--scene", path(&scene), "--goal", path(&goal), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn edit_plan(src: &Path, dst: &Path, f: impl FnOnce(&mut Value)) {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(src).unwrap()).unwrap();
    f(&mut v);
    std::fs::write(dst, serde_json::to_string_pretty(&v).unwrap()).unwrap();
}

fn validate(plan: &Path) -> Output {
    run(&["validate", "--scene", path(&scenes().join("fig1_scene.json")), "--plan", path(plan)])
}

#[test]
fn planned_fig1_validates() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = fig1_plan(tmp.path());
    let o = validate(&plan);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok: 6 steps"));
}

#[test]
fn moved_placement_fails_validation_at_its_step() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = fig1_plan(tmp.path());
    let bad = tmp.path().join("bad.json");
    edit_plan(&plan, &bad, |v| {
        let steps = v["steps"].as_array_mut().unwrap();
        let i = steps.iter().rposition(|s| s["action"] == "place").unwrap();
        steps[i]["pose"]["x"] = Value::from(0.5);
    });
    let o = validate(&bad);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("step 4"), "{err}");
}

#[test]
fn unknown_node_and_malformed_files_are_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = fig1_plan(tmp.path());
    let ghost = tmp.path().join("ghost.json");
    edit_plan(&plan, &ghost, |v| v["steps"][0]["child"] = Value::from("ghost"));
    let o = validate(&ghost);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost"));

    let broken = tmp.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"schema_version\": 1,\n  \"steps\": [\n").unwrap();
    let o = validate(&broken);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let missing = tmp.path().join("missing.json");
    assert_eq!(code(&validate(&missing)), 2);
    assert_eq!(code(&run(&["bench-stack", "--n", "1", "--repeats", "1"])), 2);
}

#[test]
fn satisfied_goal_gives_an_empty_plan() {
    let tmp = tempfile::tempdir().unwrap();
    let goal = tmp.path().join("same.json");
    std::fs::write(&goal, r#"{"schema_version": 1, "entities": [], "supports": []}"#).unwrap();
    let out = tmp.path().join("plan.json");
    let scene = scenes().join("fig1_scene.json");
    let o = run(&["plan", "--scene", path(&scene), "--goal", path(&goal), "--out", path(&out), "--log-level", "info"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["length"], 0);
    assert_eq!(v["steps"].as_array().unwrap().len(), 0);
}

#[test]
fn oversized_object_is_infeasible() {
    let tmp = tempfile::tempdir().unwrap();
    let (mut cg, _) = fixtures::cabinet_scene();
    cg.add_node(box_node("crate", [0.45, 0.45, 0.3], 3.0), &NodeId::new("world"), Placement::on(0, PlanarPose::new(-1.2, 0.0, 0.0)))
        .unwrap();
    let scene = tmp.path().join("scene.json");
    std::fs::write(&scene, SceneFile::from_graph(&cg).to_canonical()).unwrap();
    let goal = tmp.path().join("goal.json");
    std::fs::write(
        &goal,
        r#"{"schema_version": 1, "entities": [], "supports": [{"child": "crate", "parent": "cabinet", "surface": 0}]}"#,
    )
    .unwrap();
    let config = tmp.path().join("config.json");
    std::fs::write(&config, r#"{"ga": {"max_generations": 10}, "pose": {"restarts": 2, "max_iters": 300}}"#).unwrap();
    let o = run(&["synth-goal", "--scene", path(&scene), "--goal", path(&goal), "--config", path(&config)]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("config.json");
    std::fs::write(&config, r#"{"ga": {"generations": 10}}"#).unwrap();
    let scene = scenes().join("fig1_scene.json");
    let goal = scenes().join("fig1_goal.json");
    let o = run(&["synth-goal", "--scene", path(&scene), "--goal", path(&goal), "--config", path(&config)]);
    assert_eq!(code(&o), 2);
}
