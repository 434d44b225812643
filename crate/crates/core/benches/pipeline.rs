use std::collections::BTreeSet;

use cgplus::cgraph::{NodeId, Placement, PlanarPose};
use cgplus::cli::{synthesize_goal, Config};
use cgplus::fixtures::{self, box_node};
use cgplus::goalsynth::{synthesize_poses_from, PoseOptConfig};
use cgplus::planner::{plan, PlannerConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

/// Runs `f` on the default pool and on a single worker thread.
fn both<F: Fn() + Sync + Send>(c: &mut Criterion, name: &str, f: F) {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    let mut g = c.benchmark_group(name);
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", rayon::current_num_threads()), |b| b.iter(&f));
    g.bench_function(BenchmarkId::new("sequential", 1), |b| b.iter(|| single.install(&f)));
    g.finish();
}

fn structure_search(c: &mut Criterion) {
    let (_, rough) = fixtures::plates(6, 5);
    let cfg = Config::bench_default().with_seed(5);
    both(c, "plates6_goal", || {
        synthesize_goal(&rough, &cfg).expect("stackable");
    });
}

fn pose_search(c: &mut Criterion) {
    let (mut cg, _) = fixtures::cabinet_scene();
    let table = NodeId::new("table");
    let mut fresh = BTreeSet::new();
    for i in 0..6 {
        let name = format!("cube{i}");
        cg.add_node(box_node(&name, [0.08; 3], 1.0), &table, Placement::on(0, PlanarPose::default())).unwrap();
        fresh.insert(NodeId::new(&name));
    }
    let cfg = PoseOptConfig::default();
    both(c, "six_cube_poses", || {
        synthesize_poses_from(&cg, &fresh, &cfg).expect("room on the table");
    });
}

fn planning(c: &mut Criterion) {
    let (cg0, rough) = fixtures::nested_containers();
    let cfg = PlannerConfig::default();
    both(c, "nested_plan", || {
        plan(&cg0, &rough, &cfg).expect("plannable");
    });
}

criterion_group!(benches, structure_search, pose_search, planning);
criterion_main!(benches);
