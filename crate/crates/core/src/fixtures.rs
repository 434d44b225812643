//! Reference scenes used by tests, benchmarks and the `bench-stack` command.
//! Every builder returns `(initial, rough_goal)`.

use rand::Rng as _;

use crate::cgraph::{Above, ContactGraph, NodeId, Placement, PlanarPose, SceneNode, Status, Surface, SurfaceKind};
use crate::geom::{pose_from_xyz_rpy, GeometryPrimitive, PrimitiveKind, Region2D, RIM_SEGMENTS};
use crate::rng;

pub const WORLD: &str = "world";
pub const TABLE: &str = "table";

fn at(x: f64, y: f64, z: f64) -> crate::geom::Pose {
    pose_from_xyz_rpy([x, y, z], [0.0; 3])
}

/// Box resting on its base with a support surface on top.
pub fn box_node(id: &str, size: [f64; 3], mass: f64) -> SceneNode {
    let g = GeometryPrimitive::cuboid(size, at(0.0, 0.0, 0.5 * size[2]), mass).expect("positive box");
    let top = Region2D::rectangle(at(0.0, 0.0, size[2]), size[0], size[1]).expect("positive box");
    SceneNode::new(id, "box").with_geometry(vec![g]).with_surface(Surface::new(top, SurfaceKind::Support))
}

/// Upright cylinder with a support surface on top.
pub fn cylinder_node(id: &str, radius: f64, height: f64, mass: f64) -> SceneNode {
    let g = GeometryPrimitive::new(PrimitiveKind::Cylinder { radius, height }, at(0.0, 0.0, 0.5 * height), mass)
        .expect("positive cylinder");
    let top = Region2D::disk(at(0.0, 0.0, height), radius, RIM_SEGMENTS).expect("positive cylinder");
    SceneNode::new(id, "cylinder").with_geometry(vec![g]).with_surface(Surface::new(top, SurfaceKind::Support))
}

/// Cone on its base; it cannot support anything.
pub fn cone_node(id: &str, radius: f64, height: f64, mass: f64) -> SceneNode {
    let g = GeometryPrimitive::new(PrimitiveKind::Cone { radius, height }, at(0.0, 0.0, 0.5 * height), mass)
        .expect("positive cone");
    SceneNode::new(id, "cone").with_geometry(vec![g])
}

/// Thin disk supporting on its top, and on its bottom once flipped.
pub fn disk_node(id: &str, radius: f64, thickness: f64, mass: f64) -> SceneNode {
    let g = GeometryPrimitive::new(PrimitiveKind::Disk { radius, thickness }, at(0.0, 0.0, 0.5 * thickness), mass)
        .expect("positive disk");
    let top = Region2D::disk(at(0.0, 0.0, thickness), radius, RIM_SEGMENTS).expect("positive disk");
    let bottom = Region2D::disk(pose_from_xyz_rpy([0.0; 3], [std::f64::consts::PI, 0.0, 0.0]), radius, RIM_SEGMENTS)
        .expect("positive disk");
    SceneNode::new(id, "disk")
        .with_geometry(vec![g])
        .with_surface(Surface::new(top, SurfaceKind::Support))
        .with_surface(Surface::new(bottom, SurfaceKind::Support))
        .with_rest_face(0)
}

/// Plate of the stacking benchmark: a disk whose mass scales with its area.
pub fn plate_node(id: &str, radius: f64) -> SceneNode {
    let thickness = 0.01;
    let g = GeometryPrimitive::new(
        PrimitiveKind::Disk { radius, thickness },
        at(0.0, 0.0, 0.5 * thickness),
        20.0 * radius * radius,
    )
    .expect("positive plate");
    let top = Region2D::disk(at(0.0, 0.0, thickness), radius, RIM_SEGMENTS).expect("positive plate");
    SceneNode::new(id, "plate").with_geometry(vec![g]).with_surface(Surface::new(top, SurfaceKind::Support))
}

pub fn table_node(id: &str, width: f64, depth: f64, height: f64) -> SceneNode {
    let mut n = box_node(id, [width, depth, height], 40.0).fixed();
    n.label = "table".into();
    n
}

/// Closed box with a cavity of `inner` size above a floor of thickness
/// `wall`. Surface 0 is the cavity floor.
pub fn container_node(id: &str, label: &str, inner: [f64; 3], wall: f64, mass: f64) -> SceneNode {
    let [w, d, h] = inner;
    let (ow, od, oh) = (w + 2.0 * wall, d + 2.0 * wall, h + 2.0 * wall);
    let m = mass / 6.0;
    let slab = |size: [f64; 3], x: f64, y: f64, z: f64| GeometryPrimitive::cuboid(size, at(x, y, z), m).expect("wall");
    let geometry = vec![
        slab([ow, od, wall], 0.0, 0.0, 0.5 * wall),
        slab([ow, od, wall], 0.0, 0.0, oh - 0.5 * wall),
        slab([wall, od, h], -0.5 * (w + wall), 0.0, wall + 0.5 * h),
        slab([wall, od, h], 0.5 * (w + wall), 0.0, wall + 0.5 * h),
        slab([w, wall, h], 0.0, -0.5 * (d + wall), wall + 0.5 * h),
        slab([w, wall, h], 0.0, 0.5 * (d + wall), wall + 0.5 * h),
    ];
    let floor = Region2D::rectangle(at(0.0, 0.0, wall), w, d).expect("positive cavity");
    let mut s = Surface::new(floor, SurfaceKind::Contain);
    s.cavity_height = Some(h);
    let mut n = SceneNode::new(id, label).with_geometry(geometry).with_surface(s).fixed();
    n.label = label.into();
    n
}

fn id(s: &str) -> NodeId {
    NodeId::new(s)
}

fn world_with_table(width: f64, depth: f64) -> ContactGraph {
    let mut cg = ContactGraph::new(SceneNode::new(WORLD, "scene"));
    cg.add_node(table_node(TABLE, width, depth, 0.75), &id(WORLD), Placement::on(0, PlanarPose::default()))
        .expect("fresh graph");
    cg.set_swap(Some(id(TABLE))).expect("table exists");
    cg
}

/// Two 10 cm cubes side by side on a table.
pub fn two_boxes_on_table() -> (ContactGraph, ContactGraph) {
    let mut cg = world_with_table(1.0, 0.6);
    for (name, x) in [("a", -0.2), ("b", 0.2)] {
        cg.add_node(box_node(name, [0.1; 3], 1.0), &id(TABLE), Placement::on(0, PlanarPose::new(x, 0.0, 0.0)))
            .expect("fresh node");
    }
    (cg.clone(), cg)
}

/// A closed cabinet too narrow for a box and a cylinder side by side; the
/// rough goal puts both inside.
pub fn cabinet_scene() -> (ContactGraph, ContactGraph) {
    let mut cg = world_with_table(1.0, 0.6);
    let cabinet = container_node("cabinet", "cabinet", [0.4, 0.4, 0.5], 0.02, 20.0);
    cg.add_node(cabinet, &id(WORLD), Placement::on(0, PlanarPose::new(1.2, 0.0, 0.0))).expect("fresh node");
    cg.set_status(&id("cabinet"), Status::Closed).expect("cabinet exists");
    cg.add_node(box_node("box", [0.3, 0.3, 0.2], 2.0), &id(TABLE), Placement::on(0, PlanarPose::new(-0.25, 0.0, 0.0)))
        .expect("fresh node");
    cg.add_node(cylinder_node("cylinder", 0.12, 0.2, 1.0), &id(TABLE), Placement::on(0, PlanarPose::new(0.25, 0.0, 0.0)))
        .expect("fresh node");
    let mut goal = cg.clone();
    for (name, x) in [("box", -0.05), ("cylinder", 0.08)] {
        goal.attach(&id(name), &id("cabinet"), Placement::on(0, PlanarPose::new(x, 0.0, 0.0))).expect("nodes exist");
    }
    (cg, goal)
}

/// Wardrobe containing a cabinet containing a drawer, all closed. A cup on
/// the table goes into the drawer.
pub fn nested_containers() -> (ContactGraph, ContactGraph) {
    let mut cg = world_with_table(1.0, 0.6);
    let wardrobe = container_node("wardrobe", "wardrobe", [0.8, 0.6, 1.0], 0.03, 60.0);
    let cabinet = container_node("cabinet", "cabinet", [0.5, 0.4, 0.5], 0.02, 20.0);
    let drawer = container_node("drawer", "drawer", [0.3, 0.3, 0.2], 0.01, 3.0);
    cg.add_node(wardrobe, &id(WORLD), Placement::on(0, PlanarPose::new(1.5, 0.0, 0.0))).expect("fresh node");
    cg.add_node(cabinet, &id("wardrobe"), Placement::on(0, PlanarPose::default())).expect("fresh node");
    cg.add_node(drawer, &id("cabinet"), Placement::on(0, PlanarPose::default())).expect("fresh node");
    for c in ["wardrobe", "cabinet", "drawer"] {
        cg.set_status(&id(c), Status::Closed).expect("container exists");
    }
    cg.add_node(cylinder_node("cup", 0.04, 0.1, 0.3), &id(TABLE), Placement::on(0, PlanarPose::new(0.2, 0.1, 0.0)))
        .expect("fresh node");
    let mut goal = cg.clone();
    goal.attach(&id("cup"), &id("drawer"), Placement::on(0, PlanarPose::new(0.05, -0.05, 0.0))).expect("nodes exist");
    (cg, goal)
}

/// A box, a disk and two cones on a table; the rough goal keeps them there.
pub fn four_objects() -> (ContactGraph, ContactGraph) {
    let mut cg = world_with_table(1.2, 0.8);
    let t = id(TABLE);
    cg.add_node(box_node("box", [0.12, 0.12, 0.12], 1.0), &t, Placement::on(0, PlanarPose::new(-0.4, 0.0, 0.0)))
        .expect("fresh node");
    cg.add_node(disk_node("disk", 0.15, 0.02, 0.5), &t, Placement::on(0, PlanarPose::new(0.0, 0.0, 0.0)))
        .expect("fresh node");
    cg.add_node(cone_node("grey_cone", 0.05, 0.12, 0.3), &t, Placement::on(0, PlanarPose::new(0.3, 0.2, 0.0)))
        .expect("fresh node");
    cg.add_node(cone_node("red_cone", 0.05, 0.12, 0.3), &t, Placement::on(0, PlanarPose::new(0.3, -0.2, 0.0)))
        .expect("fresh node");
    (cg.clone(), cg)
}

/// Plate radii of the stacking benchmark, largest first.
pub fn plate_radii(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.15 * 0.85f64.powi(i as i32)).collect()
}

pub fn plate_id(i: usize) -> NodeId {
    NodeId::new(format!("plate{i:02}"))
}

/// `n` plates of strictly decreasing radius. A random number of the largest
/// ones start correctly stacked, the rest lie apart on the table. The rough
/// goal asks every smaller plate to end up above every larger one.
pub fn plates(n: usize, seed: u64) -> (ContactGraph, ContactGraph) {
    let (w, d) = (1.6, 0.8);
    let mut cg = world_with_table(w, d);
    let mut r = rng::stream(seed, 0x91a7e5, n as u64);
    let radii = plate_radii(n);
    let stacked = if r.random_bool(0.6) { 1 } else { r.random_range(1..=n) };
    let mut placed: Vec<(f64, f64, f64)> = Vec::new();
    for (i, radius) in radii.iter().enumerate() {
        let yaw = r.random_range(0.0..std::f64::consts::TAU);
        if i > 0 && i < stacked {
            cg.add_node(plate_node(plate_id(i).as_str(), *radius), &plate_id(i - 1), Placement::on(0, PlanarPose::new(0.0, 0.0, yaw)))
                .expect("fresh node");
            continue;
        }
        let (x, y) = loop {
            let x = r.random_range(-0.5 * w + radius..0.5 * w - radius);
            let y = r.random_range(-0.5 * d + radius..0.5 * d - radius);
            if placed.iter().all(|(px, py, pr)| ((x - px).powi(2) + (y - py).powi(2)).sqrt() > pr + radius + 0.02) {
                break (x, y);
            }
        };
        placed.push((x, y, *radius));
        cg.add_node(plate_node(plate_id(i).as_str(), *radius), &id(TABLE), Placement::on(0, PlanarPose::new(x, y, yaw)))
            .expect("fresh node");
    }
    let mut goal = cg.clone();
    let mut preds = Vec::new();
    for lower in 0..n {
        for upper in lower + 1..n {
            preds.push(Above { upper: plate_id(upper), lower: plate_id(lower) });
        }
    }
    goal.set_predicates(preds);
    (cg, goal)
}

/// Plates whose parent in a correct stack differs from their initial one.
pub fn misplaced_plates(initial: &ContactGraph, n: usize) -> usize {
    (0..n)
        .filter(|i| {
            let want = if *i == 0 { id(TABLE) } else { plate_id(i - 1) };
            initial.parent(&plate_id(*i)) != Some(&want)
        })
        .count()
}

/// Where an object of a shuffled scene rests.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Spot {
    Slot(usize),
    On(usize),
}

/// Random table-top rearrangement: up to six boxes and cylinders on grid
/// slots of a table, inside up to two containers, or stacked two high. The
/// goal is another such arrangement, with random container statuses. Both
/// graphs are physically valid; the goal is fully posed.
pub fn shuffled_scene(seed: u64) -> (ContactGraph, ContactGraph) {
    for attempt in 0.. {
        let mut r = rng::stream(seed, 0x5cf1e, attempt);
        if let Some(pair) = try_shuffled(&mut r) {
            return pair;
        }
    }
    unreachable!("attempts are unbounded")
}

fn try_shuffled(r: &mut rng::Rng) -> Option<(ContactGraph, ContactGraph)> {
    let mut cg = world_with_table(2.0, 1.0);
    let t = id(TABLE);
    let n_containers = r.random_range(0..=2usize);
    let mut slots: Vec<(NodeId, f64, f64)> = Vec::new();
    for x in [-0.85, -0.6, -0.35, -0.1, 0.15] {
        for y in [-0.25, 0.25] {
            slots.push((t.clone(), x, y));
        }
    }
    let mut containers = Vec::new();
    for (k, x) in [0.45, 0.82].into_iter().enumerate().take(n_containers) {
        let c = format!("container{k}");
        cg.add_node(container_node(&c, "cabinet", [0.3, 0.3, 0.25], 0.02, 10.0), &t, Placement::on(0, PlanarPose::new(x, 0.0, 0.0)))
            .ok()?;
        for sx in [-0.075, 0.075] {
            slots.push((id(&c), sx, 0.0));
        }
        containers.push(id(&c));
    }
    let k = r.random_range(1..=6usize);
    let mut nodes = Vec::new();
    for i in 0..k {
        let name = format!("obj{i}");
        let h = r.random_range(0.05..0.09);
        let node = if r.random_bool(0.5) {
            box_node(&name, [r.random_range(0.07..0.1), r.random_range(0.07..0.1), h], r.random_range(0.2..1.0))
        } else {
            cylinder_node(&name, r.random_range(0.035..0.05), h, r.random_range(0.2..1.0))
        };
        nodes.push(node);
    }
    let arrange = |r: &mut rng::Rng| -> Vec<(Spot, f64)> {
        let mut used = vec![false; slots.len()];
        let mut out: Vec<(Spot, f64)> = Vec::new();
        for _ in 0..k {
            let mut options: Vec<Spot> = (0..slots.len()).filter(|s| !used[*s]).map(Spot::Slot).collect();
            for (j, (spot, _)) in out.iter().enumerate() {
                let topped = out.iter().any(|(s, _)| *s == Spot::On(j));
                if matches!(spot, Spot::Slot(_)) && !topped {
                    options.push(Spot::On(j));
                }
            }
            let spot = options[r.random_range(0..options.len())];
            if let Spot::Slot(s) = spot {
                used[s] = true;
            }
            out.push((spot, r.random_range(-0.3..0.3)));
        }
        out
    };
    let build = |base: &ContactGraph, layout: &[(Spot, f64)]| -> Option<ContactGraph> {
        let mut g = base.clone();
        for (i, (spot, yaw)) in layout.iter().enumerate() {
            let (parent, x, y) = match spot {
                Spot::Slot(s) => slots[*s].clone(),
                Spot::On(j) => (nodes[*j].id.clone(), 0.0, 0.0),
            };
            let placement = Placement::on(0, PlanarPose::new(x, y, *yaw));
            if g.contains(&nodes[i].id) {
                g.attach(&nodes[i].id, &parent, placement).ok()?;
            } else {
                g.insert_detached(nodes[i].clone()).ok()?;
                g.attach(&nodes[i].id, &parent, placement).ok()?;
            }
        }
        Some(g)
    };
    let initial_layout = arrange(r);
    let goal_layout = arrange(r);
    let mut initial = build(&cg, &initial_layout)?;
    let mut goal = build(&initial, &goal_layout)?;
    for c in &containers {
        let pick = |r: &mut rng::Rng| if r.random_bool(0.5) { Status::Closed } else { Status::Opened };
        initial.set_status(c, pick(r)).ok()?;
        goal.set_status(c, pick(r)).ok()?;
    }
    let valid = |g: &ContactGraph| crate::cgraph::validate(g).is_ok_and(|v| v.is_empty());
    (valid(&initial) && valid(&goal)).then_some((initial, goal))
}
