//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Positional arguments filter by name.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};
use std::sync::OnceLock;
use std::time::Instant;

use cgplus::cgraph::{validate, Action, ContactGraph, NodeId, Placement, PlanarPose, SceneNode};
use cgplus::cli::{self, BenchReport, Config};
use cgplus::fixtures::{self, box_node, table_node};
use cgplus::goalsynth::{fitness, hinge_loss, occupancy_term};
use cgplus::planner::{self, validate_plan, PlanError, PlannerConfig};

use common::oracles;
use common::Bfs;

type Check = fn() -> Result<String, String>;

fn scenes() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn id(s: &str) -> NodeId {
    NodeId::new(s)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bench() -> &'static BenchReport {
    static REPORT: OnceLock<BenchReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        cli::cmd_bench_stack(&[2, 4, 6, 8, 10], 10, 0, &Config::bench_default()).expect("benchmark runs")
    })
}

fn stacking() -> Result<String, String> {
    let r = bench();
    let valid = r.rows.iter().filter(|row| row.valid).count();
    let slowest = r
        .times
        .iter()
        .map(|t| t.structure_s + t.pose_s + t.planning_s)
        .fold(0.0, f64::max);
    let detail = format!("{valid}/{} runs valid with 2 actions per misplaced plate, slowest run {slowest:.2} s", r.rows.len());
    let bad: Vec<String> = r
        .rows
        .iter()
        .filter(|row| !row.valid)
        .map(|row| format!("n={} repeat={} ({}, {} vs {})", row.n, row.repeat, row.status, row.plan_length, 2 * row.misplaced))
        .collect();
    ensure(r.rows.len() == 50 && bad.is_empty(), || format!("{detail}; failing: {}", bad.join(", ")))?;
    ensure(slowest < 60.0, || detail.clone())?;
    Ok(detail)
}

fn scaling() -> Result<String, String> {
    let (s, p, g) = bench().medians(10);
    let detail = format!("n=10 medians: structure {s:.4} s, poses {p:.4} s, planning {g:.4} s");
    ensure(s >= p && s >= g, || detail.clone())?;
    Ok(detail)
}

/// Plans a scene/goal pair from the `scenes` directory through the CLI layer
/// and replays the result.
fn plan_scene(name: &str) -> Result<(ContactGraph, ContactGraph, Vec<Action>), String> {
    let dir = scenes();
    let scene = dir.join(format!("{name}_scene.json"));
    let goal = dir.join(format!("{name}_goal.json"));
    let cfg = Config::default().with_seed(0);
    let file = cli::cmd_plan(&scene, &goal, &cfg, 0).map_err(|e| e.to_string())?;
    let scene_file = cli::read_scene_file(&scene).map_err(|e| e.to_string())?;
    let cg0 = scene_file.to_graph().map_err(|e| e.to_string())?;
    let goal = file.goal_graph(&scene_file).map_err(|e| e.to_string())?;
    let plan = file.plan(&cg0).map_err(|e| e.to_string())?;
    let report = validate_plan(&plan, &cg0, &goal).map_err(|e| e.to_string())?;
    ensure(report.ok, || format!("replay failed: {:?}", report.failure))?;
    Ok((cg0, goal, plan.actions().cloned().collect()))
}

fn inside(goal: &ContactGraph, parent: &NodeId, container: &NodeId) -> bool {
    parent == container || goal.is_descendant(parent, container)
}

/// Indices of Place actions landing in `container` and of its Open/Close.
fn bracket(actions: &[Action], goal: &ContactGraph, container: &NodeId) -> (Vec<usize>, Option<usize>, Option<usize>) {
    let mut places = Vec::new();
    let (mut open, mut close) = (None, None);
    for (i, a) in actions.iter().enumerate() {
        match a {
            Action::Place { parent, .. } if inside(goal, parent, container) => places.push(i),
            Action::Open { node } if node == container => open = open.or(Some(i)),
            Action::Close { node } if node == container => close = Some(i),
            _ => {}
        }
    }
    (places, open, close)
}

fn describe(actions: &[Action]) -> String {
    actions.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
}

fn fig1() -> Result<String, String> {
    let dir = scenes();
    let cfg = Config::default().with_seed(0);
    let synth = cli::cmd_synth_goal(&dir.join("fig1_scene.json"), &dir.join("fig1_goal.json"), &cfg)
        .map_err(|e| e.to_string())?;
    let goal = synth.to_graph().map_err(|e| e.to_string())?;
    let violations = validate(&goal).map_err(|e| e.to_string())?;
    ensure(violations.is_empty(), || format!("synthesized goal violates {violations:?}"))?;
    let (cabinet, boxed, cyl) = (id("cabinet"), id("box"), id("cylinder"));
    let stacked = (goal.parent(&cyl) == Some(&boxed) && goal.parent(&boxed) == Some(&cabinet))
        || (goal.parent(&boxed) == Some(&cyl) && goal.parent(&cyl) == Some(&cabinet));
    ensure(stacked, || "goal is not a stack inside the cabinet".into())?;

    let (cg0, goal, actions) = plan_scene("fig1")?;
    let (places, open, close) = bracket(&actions, &goal, &cabinet);
    let first = places.first().copied().ok_or("no Place into the cabinet")?;
    let last = places.last().copied().unwrap_or(first);
    ensure(open.is_some_and(|o| o < first), || format!("Open does not precede the first in-cabinet Place: {}", describe(&actions)))?;
    ensure(close.is_some_and(|c| c > last), || format!("Close does not follow the last in-cabinet Place: {}", describe(&actions)))?;
    let minimum = match common::bfs_plan(&cg0, &goal, 4, 100_000) {
        Bfs::Found(p) => p.len(),
        other => return Err(format!("BFS found no plan: {other:?}")),
    };
    ensure(minimum == actions.len(), || format!("plan has {} actions, BFS minimum {minimum}", actions.len()))?;
    Ok(format!("stacked goal, {} actions (BFS minimum {minimum}): {}", actions.len(), describe(&actions)))
}

fn nested() -> Result<String, String> {
    let (_, goal, actions) = plan_scene("nested")?;
    let levels = ["wardrobe", "cabinet", "drawer"].map(id);
    let (inner, _, _) = bracket(&actions, &goal, &levels[2]);
    let first = inner.first().copied().ok_or("no Place into the drawer")?;
    let last = inner.last().copied().unwrap_or(first);
    for c in &levels {
        let (_, open, close) = bracket(&actions, &goal, c);
        ensure(open.is_some_and(|o| o < first), || format!("{c} not opened before the first inner Place"))?;
        ensure(close.is_some_and(|x| x > last), || format!("{c} not closed after the last inner Place"))?;
    }
    Ok(format!("{} actions, every state valid, exact replay: {}", actions.len(), describe(&actions)))
}

fn equations() -> Result<String, String> {
    let d = 0.005;
    ensure(hinge_loss(d, d) == 0.0 && hinge_loss(0.0, d) == 1.0 && hinge_loss(-d, d) == 2.0, || {
        format!("hinge values {} {} {}", hinge_loss(d, d), hinge_loss(0.0, d), hinge_loss(-d, d))
    })?;
    let t = |c: f64| occupancy_term(c, 1.0, 0.8).map_err(|e| e.to_string());
    ensure(t(0.5)? == 0.0 && (t(0.9)? - 0.1).abs() < 1e-12, || "occupancy terms".into())?;

    let mut cg = ContactGraph::new(SceneNode::new("world", "scene"));
    cg.add_node(table_node("table", 1.0, 1.0, 0.7), &id("world"), Placement::on(0, PlanarPose::default()))
        .map_err(|e| e.to_string())?;
    for (i, w) in [0.9, 0.95, 0.3].into_iter().enumerate() {
        cg.add_node(box_node(&format!("b{i}"), [w, 1.0, 0.1], 1.0), &id("table"), Placement::on(0, PlanarPose::default()))
            .map_err(|e| e.to_string())?;
    }
    let f = fitness(&cg, 0.8).map_err(|e| e.to_string())?;
    ensure((f - 0.25).abs() < 1e-12, || format!("three-relation fitness {f}"))?;

    let stab = oracles::stability_disagreements(100, 11);
    ensure(stab == 0, || format!("{stab}/100 stability disagreements"))?;
    let (cont, rejected) = oracles::contain_disagreements(50, 12, 0.001, 0.002);
    ensure(cont == 0, || format!("{cont}/50 containment disagreements"))?;
    Ok(format!(
        "hinge exact, occupancy to 1e-12 (fitness {f}), stability 0/100, containment 0/50 ({rejected} draws within 2 mm rejected)"
    ))
}

fn ged() -> Result<String, String> {
    let (pairs, bad) = oracles::ged_mismatches();
    ensure(bad == 0, || format!("{bad}/{pairs} pairs differ from the brute-force edit distance"))?;
    Ok(format!("{pairs} graph pairs, cost equals brute-force minimum on all"))
}

fn fuzz() -> Result<String, String> {
    let cfg = PlannerConfig::default();
    let (mut planned, mut unsolvable) = (0, 0);
    let mut failures = Vec::new();
    for seed in 0..500u64 {
        let (cg0, goal) = fixtures::shuffled_scene(seed);
        match planner::plan(&cg0, &goal, &cfg) {
            Ok(plan) => {
                let ok = validate_plan(&plan, &cg0, &goal).map(|r| r.ok).unwrap_or(false);
                if ok {
                    planned += 1;
                } else {
                    failures.push(format!("seed {seed}: invalid plan"));
                }
            }
            Err(PlanError::PlanNotFound { .. }) => match common::bfs_plan(&cg0, &goal, 4, 100_000) {
                Bfs::Exhausted { .. } => unsolvable += 1,
                other => failures.push(format!("seed {seed}: not found, BFS {:?}", other.length())),
            },
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{planned} plans valid, {unsolvable} not-found confirmed unsolvable by BFS"))
}

fn run_twice(args: &[&str], dir: &Path, outputs: &[&str]) -> Result<(), String> {
    let mut seen: Vec<Vec<Vec<u8>>> = Vec::new();
    for round in 0..2 {
        let run_dir = dir.join(format!("run{round}"));
        std::fs::create_dir_all(&run_dir).map_err(|e| e.to_string())?;
        let out = run_dir.join(outputs[0]);
        let status = Command::new(env!("CARGO_BIN_EXE_cgplus"))
            .args(args)
            .arg("--out")
            .arg(&out)
            .stderr(Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("{args:?} exited with {status}"))?;
        let files = outputs
            .iter()
            .map(|f| std::fs::read(run_dir.join(f)).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        seen.push(files);
    }
    ensure(seen[0] == seen[1], || format!("{args:?} produced differing output"))
}

fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = scenes();
    let s = |f: &str| dir.join(f).to_string_lossy().into_owned();
    let (scene, goal) = (s("fig1_scene.json"), s("fig1_goal.json"));
    run_twice(&["synth-goal", "--scene", &scene, "--goal", &goal, "--seed", "7"], &tmp.path().join("synth"), &["goal.json"])?;
    run_twice(&["plan", "--scene", &scene, "--goal", &goal, "--seed", "7"], &tmp.path().join("plan"), &["plan.json"])?;
    let plan = tmp.path().join("plan/run0/plan.json").to_string_lossy().into_owned();
    run_twice(&["validate", "--scene", &scene, "--plan", &plan], &tmp.path().join("validate"), &["report.txt"])?;
    run_twice(
        &["bench-stack", "--n", "2,3", "--repeats", "2", "--seed", "7"],
        &tmp.path().join("bench"),
        &["bench.csv"],
    )?;
    Ok("synth-goal, plan, validate and bench-stack outputs byte-identical across runs".into())
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let checks: [(&str, Check); 8] = [
        ("stacking_soundness", stacking),
        ("scaling_trend", scaling),
        ("fig1_cabinet", fig1),
        ("nested_containers", nested),
        ("equation_suites", equations),
        ("ged_oracle", ged),
        ("planner_fuzz", fuzz),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name} ({secs:.1} s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
