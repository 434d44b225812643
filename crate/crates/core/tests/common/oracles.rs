//! Brute-force and analytic reference computations.

use std::collections::VecDeque;

use cgplus::cgraph::{check_contain, check_stable, ContactGraph, NodeId, Placement, PlanarPose, SceneNode, Status};
use cgplus::fixtures::{box_node, container_node, table_node};
use cgplus::planner::ged_edit_script;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn id(s: &str) -> NodeId {
    NodeId::new(s)
}

/// A box (optionally carrying a second box) on a table, with the analytic
/// stability verdict computed from axis-aligned rectangles.
pub struct StabilityCase {
    pub graph: ContactGraph,
    pub expected: bool,
    /// Distance of the projected center of mass to the overlap boundary.
    pub margin: f64,
}

pub fn stability_case(rng: &mut ChaCha8Rng) -> StabilityCase {
    let (tw, td) = (rng.random_range(0.4..1.2), rng.random_range(0.3..0.8));
    let size = [rng.random_range(0.05..0.3), rng.random_range(0.05..0.3), rng.random_range(0.05..0.2)];
    let m1 = rng.random_range(0.2..3.0);
    let x = rng.random_range(-0.5 * tw - 0.5 * size[0]..0.5 * tw + 0.5 * size[0]);
    let y = rng.random_range(-0.5 * td - 0.5 * size[1]..0.5 * td + 0.5 * size[1]);

    let mut cg = ContactGraph::new(SceneNode::new("world", "scene"));
    cg.add_node(table_node("table", tw, td, 0.7), &id("world"), Placement::on(0, PlanarPose::default())).unwrap();
    cg.add_node(box_node("lower", size, m1), &id("table"), Placement::on(0, PlanarPose::new(x, y, 0.0))).unwrap();

    let (mut cx, mut cy, mut m) = (m1 * x, m1 * y, m1);
    if rng.random_bool(0.5) {
        let top = [rng.random_range(0.03..0.2), rng.random_range(0.03..0.2), rng.random_range(0.03..0.15)];
        let m2 = rng.random_range(0.2..6.0);
        let (ox, oy) = (rng.random_range(-0.5 * size[0]..0.5 * size[0]), rng.random_range(-0.5 * size[1]..0.5 * size[1]));
        cg.add_node(box_node("upper", top, m2), &id("lower"), Placement::on(0, PlanarPose::new(ox, oy, 0.0))).unwrap();
        cx += m2 * (x + ox);
        cy += m2 * (y + oy);
        m += m2;
    }
    let (cx, cy) = (cx / m, cy / m);
    let lo = (f64::max(-0.5 * tw, x - 0.5 * size[0]), f64::max(-0.5 * td, y - 0.5 * size[1]));
    let hi = (f64::min(0.5 * tw, x + 0.5 * size[0]), f64::min(0.5 * td, y + 0.5 * size[1]));
    let (expected, margin) = if lo.0 >= hi.0 || lo.1 >= hi.1 {
        (false, f64::INFINITY)
    } else {
        let d = [cx - lo.0, hi.0 - cx, cy - lo.1, hi.1 - cy].into_iter().fold(f64::INFINITY, f64::min);
        (d > 0.0, d.abs())
    };
    StabilityCase { graph: cg, expected, margin }
}

/// Compares `check_stable` with the rectangle oracle on `cases` cases whose
/// margin exceeds 1 µm. Returns the number of disagreements.
pub fn stability_disagreements(cases: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let mut done = 0;
    while done < cases {
        let c = stability_case(&mut rng);
        if c.margin < 1e-6 {
            continue;
        }
        done += 1;
        if check_stable(&c.graph, &id("lower")).unwrap() != c.expected {
            bad += 1;
        }
    }
    bad
}

/// A rotated box, possibly with a box on top, inside an open container.
pub struct ContainCase {
    pub graph: ContactGraph,
    /// World axis-aligned cavity.
    pub cavity: ([f64; 3], [f64; 3]),
    /// Boxes as (center, half extents, yaw).
    pub boxes: Vec<([f64; 3], [f64; 3], f64)>,
}

pub fn contain_case(rng: &mut ChaCha8Rng) -> ContainCase {
    let wall = 0.01;
    let inner = [rng.random_range(0.12..0.25), rng.random_range(0.12..0.25), rng.random_range(0.08..0.2)];
    let mut cg = ContactGraph::new(SceneNode::new("world", "scene"));
    cg.add_node(container_node("bin", "bin", inner, wall, 5.0), &id("world"), Placement::on(0, PlanarPose::default()))
        .unwrap();
    cg.set_status(&id("bin"), Status::Opened).unwrap();

    let size = [rng.random_range(0.03..0.15), rng.random_range(0.03..0.15), rng.random_range(0.03..0.15)];
    let yaw = rng.random_range(-1.5..1.5);
    let (x, y) = (rng.random_range(-0.5 * inner[0]..0.5 * inner[0]), rng.random_range(-0.5 * inner[1]..0.5 * inner[1]));
    cg.add_node(box_node("lower", size, 1.0), &id("bin"), Placement::on(0, PlanarPose::new(x, y, yaw))).unwrap();
    let half = size.map(|s| 0.5 * s);
    let mut boxes = vec![([x, y, wall + half[2]], half, yaw)];
    if rng.random_bool(0.4) {
        let top = [rng.random_range(0.02..0.08), rng.random_range(0.02..0.08), rng.random_range(0.02..0.08)];
        // Small offsets keep the pair's center of mass over the lower box.
        let (ox, oy) = (rng.random_range(-0.2..0.2) * size[0], rng.random_range(-0.2..0.2) * size[1]);
        let tyaw = rng.random_range(-1.0..1.0);
        cg.add_node(box_node("upper", top, 0.5), &id("lower"), Placement::on(0, PlanarPose::new(ox, oy, tyaw)))
            .unwrap();
        let (c, s) = (yaw.cos(), yaw.sin());
        let center = [x + c * ox - s * oy, y + s * ox + c * oy, wall + size[2] + 0.5 * top[2]];
        boxes.push((center, top.map(|t| 0.5 * t), yaw + tyaw));
    }
    let lo = [-0.5 * inner[0], -0.5 * inner[1], wall];
    let hi = [0.5 * inner[0], 0.5 * inner[1], wall + inner[2]];
    ContainCase { graph: cg, cavity: (lo, hi), boxes }
}

fn in_box(p: [f64; 3], (c, h, yaw): &([f64; 3], [f64; 3], f64)) -> bool {
    let (dx, dy, dz) = (p[0] - c[0], p[1] - c[1], p[2] - c[2]);
    let (co, si) = (yaw.cos(), yaw.sin());
    let lx = co * dx + si * dy;
    let ly = -si * dx + co * dy;
    lx.abs() <= h[0] && ly.abs() <= h[1] && dz.abs() <= h[2]
}

/// Largest excursion of any box corner beyond the cavity (negative inside).
pub fn corner_excursion(case: &ContainCase) -> f64 {
    let (lo, hi) = case.cavity;
    let mut worst = f64::NEG_INFINITY;
    for (c, h, yaw) in &case.boxes {
        let (co, si) = (yaw.cos(), yaw.sin());
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let (lx, ly) = (sx * h[0], sy * h[1]);
                    let p = [c[0] + co * lx - si * ly, c[1] + si * lx + co * ly, c[2] + sz * h[2]];
                    for k in 0..3 {
                        worst = worst.max(lo[k] - p[k]).max(p[k] - hi[k]);
                    }
                }
            }
        }
    }
    worst
}

/// Containment by voxel union at resolution `res`: true iff no voxel
/// occupied by a box lies outside the cavity.
pub fn voxel_contained(case: &ContainCase, res: f64) -> bool {
    let (lo, hi) = case.cavity;
    let inside = |p: [f64; 3]| (0..3).all(|k| p[k] >= lo[k] && p[k] <= hi[k]);
    for b in &case.boxes {
        let (c, h, _) = b;
        let r = (h[0] * h[0] + h[1] * h[1]).sqrt();
        let ext = [r, r, h[2]];
        let start: Vec<i64> = (0..3).map(|k| ((c[k] - ext[k]) / res).floor() as i64).collect();
        let end: Vec<i64> = (0..3).map(|k| ((c[k] + ext[k]) / res).ceil() as i64).collect();
        for i in start[0]..=end[0] {
            for j in start[1]..=end[1] {
                for k in start[2]..=end[2] {
                    let p = [(i as f64 + 0.5) * res, (j as f64 + 0.5) * res, (k as f64 + 0.5) * res];
                    if in_box(p, b) && !inside(p) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Compares `check_contain` with the voxel oracle on `cases` cases whose
/// corners clear the cavity walls by at least `margin`. Returns
/// (disagreements, rejected draws).
pub fn contain_disagreements(cases: usize, seed: u64, res: f64, margin: f64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut bad, mut rejected, mut done) = (0, 0, 0);
    while done < cases {
        let c = contain_case(&mut rng);
        if corner_excursion(&c).abs() < margin {
            rejected += 1;
            continue;
        }
        done += 1;
        if check_contain(&c.graph, &id("lower")).unwrap() != voxel_contained(&c, res) {
            bad += 1;
        }
    }
    (bad, rejected)
}

/// Symbolic state for the edit-distance search: per movable node, 0 when
/// detached, else 1 + 2·parent + pose label; bit 16 is the status.
type Code = u32;

pub const GED_NODES: usize = 4;
const WORLD_SLOT: usize = GED_NODES;

fn slot(code: Code, i: usize) -> u32 {
    (code >> (4 * i)) & 0xf
}

fn with_slot(code: Code, i: usize, v: u32) -> Code {
    (code & !(0xf << (4 * i))) | (v << (4 * i))
}

fn parent_of(code: Code, i: usize) -> Option<usize> {
    let v = slot(code, i);
    (v != 0).then(|| ((v - 1) / 2) as usize)
}

/// Whether `p` lies in the subtree of `i` (following parents in `code`).
fn under(code: Code, mut p: usize, i: usize) -> bool {
    for _ in 0..=GED_NODES {
        if p == i {
            return true;
        }
        match parent_of(code, p) {
            Some(q) if q != WORLD_SLOT => p = q,
            _ => return false,
        }
    }
    true
}

/// Minimal number of edge deletions, edge insertions and status
/// substitutions from `start` to every reachable state.
pub fn edit_distances(start: Code) -> Vec<u8> {
    let mut dist = vec![u8::MAX; 1 << 17];
    let mut q = VecDeque::new();
    dist[start as usize] = 0;
    q.push_back(start);
    while let Some(s) = q.pop_front() {
        let d = dist[s as usize] + 1;
        let mut push = |t: Code, q: &mut VecDeque<Code>| {
            if dist[t as usize] == u8::MAX {
                dist[t as usize] = d;
                q.push_back(t);
            }
        };
        push(s ^ (1 << 16), &mut q);
        for i in 0..GED_NODES {
            if slot(s, i) != 0 {
                push(with_slot(s, i, 0), &mut q);
                continue;
            }
            for p in 0..=GED_NODES {
                if p != WORLD_SLOT && under(s, p, i) {
                    continue;
                }
                for pose in 0..2 {
                    push(with_slot(s, i, 1 + 2 * p as u32 + pose), &mut q);
                }
            }
        }
    }
    dist
}

/// Every rooted forest over the movable nodes, as parent lists.
pub fn forests() -> Vec<[usize; GED_NODES]> {
    let mut out = Vec::new();
    let total = (GED_NODES + 1).pow(GED_NODES as u32);
    for mut k in 0..total {
        let mut ps = [0; GED_NODES];
        for p in ps.iter_mut() {
            *p = k % (GED_NODES + 1);
            k /= GED_NODES + 1;
        }
        let code = encode(&ps, 0, false);
        if (0..GED_NODES).all(|i| ps[i] == WORLD_SLOT || !under(code, ps[i], i)) {
            out.push(ps);
        }
    }
    out
}

pub fn encode(parents: &[usize; GED_NODES], poses: u32, opened: bool) -> Code {
    let mut c = if opened { 1 << 16 } else { 0 };
    for (i, p) in parents.iter().enumerate() {
        c = with_slot(c, i, 1 + 2 * *p as u32 + ((poses >> i) & 1));
    }
    c
}

fn ged_node(i: usize) -> NodeId {
    id(&format!("m{i}"))
}

/// Base graph for the edit-distance oracle: four boxes and a bin on the floor.
pub fn ged_base() -> ContactGraph {
    let mut cg = ContactGraph::new(SceneNode::new("world", "scene"));
    cg.add_node(container_node("bin", "bin", [0.3, 0.3, 0.3], 0.01, 5.0), &id("world"), Placement::on(0, PlanarPose::new(5.0, 0.0, 0.0)))
        .unwrap();
    cg.set_status(&id("bin"), Status::Closed).unwrap();
    for i in 0..GED_NODES {
        cg.add_node(box_node(ged_node(i).as_str(), [0.1; 3], 1.0), &id("world"), Placement::on(0, PlanarPose::new(i as f64, 0.0, 0.0)))
            .unwrap();
    }
    cg
}

pub fn ged_graph(base: &ContactGraph, parents: &[usize; GED_NODES], poses: u32, opened: bool) -> ContactGraph {
    let mut cg = base.clone();
    for (i, &p) in parents.iter().enumerate() {
        let parent = if p == WORLD_SLOT { id("world") } else { ged_node(p) };
        let x = if (poses >> i) & 1 == 1 { 0.01 } else { 0.0 };
        cg.attach(&ged_node(i), &parent, Placement::on(0, PlanarPose::new(x, 0.0, 0.0))).unwrap();
    }
    let status = if opened { Status::Opened } else { Status::Closed };
    cg.set_status(&id("bin"), status).unwrap();
    cg
}

/// Checks `ged_edit_script` cost against the brute-force edit distance on
/// every pair (initial forest, goal forest × pose labels × bin status).
/// Returns (pairs checked, mismatches).
pub fn ged_mismatches() -> (usize, usize) {
    let base = ged_base();
    let all = forests();
    let goals: Vec<(Code, ContactGraph)> = all
        .iter()
        .flat_map(|ps| {
            let base = &base;
            (0..1u32 << GED_NODES).flat_map(move |poses| {
                [false, true].map(|o| (encode(ps, poses, o), ged_graph(base, ps, poses, o)))
            })
        })
        .collect();
    let (mut pairs, mut bad) = (0, 0);
    for ps in &all {
        let start = encode(ps, 0, false);
        let dist = edit_distances(start);
        let cg0 = ged_graph(&base, ps, 0, false);
        for (code, goal) in &goals {
            pairs += 1;
            let cost = ged_edit_script(&cg0, goal).map(|s| s.cost()).unwrap_or(usize::MAX);
            if cost != dist[*code as usize] as usize {
                bad += 1;
            }
        }
    }
    (pairs, bad)
}
