//! Physical validity of a contact graph: non-penetration over the collision
//! set, stable support, and containment.

use std::collections::{BTreeMap, BTreeSet};

use super::{contact_hull, ContactGraph, GraphError, NodeId, PrimRef, SurfaceKind, GRIPPER_MOUNT};
use crate::geom::{
    overlap_region, project_com, signed_distance3d, union_bbox_contained, GeomError, MassPoint, OrientedBox, Pose,
    Region2D, Vec3,
};

/// A primitive pair from the collision set with its signed distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionPair {
    pub a: PrimRef,
    pub b: PrimRef,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Penetration(CollisionPair),
    Unstable { child: NodeId },
    NotContained { child: NodeId },
    NotLevel { parent: NodeId, surface: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Penetration(p) => write!(
                f,
                "penetration between {}[{}] and {}[{}] (sd = {:.6})",
                p.a.node, p.a.index, p.b.node, p.b.index, p.distance
            ),
            Self::Unstable { child } => write!(f, "unstable support of {child}"),
            Self::NotContained { child } => write!(f, "{child} is not contained by its parent"),
            Self::NotLevel { parent, surface } => write!(f, "surface {surface} of {parent} is not level"),
        }
    }
}

/// Whether a relation is checked at all: the gripper mount and anything held
/// are exempt.
fn checked(cg: &ContactGraph, child: &NodeId) -> bool {
    match cg.edge(child) {
        None => false,
        Some(e) => {
            e.placement.surface != GRIPPER_MOUNT && !ContactGraph::is_gripper(&e.parent) && !cg.in_hand(child)
        }
    }
}

pub(crate) fn subtree_mass_points(
    cg: &ContactGraph,
    node: &NodeId,
    poses: &BTreeMap<NodeId, Pose>,
) -> Result<Vec<MassPoint>, GraphError> {
    let mut out = Vec::new();
    for id in cg.subtree(node) {
        let n = cg.node(&id)?;
        for g in &n.geometry {
            out.push(MassPoint::of(g, &poses[&id]));
        }
    }
    Ok(out)
}

/// Contact footprint of `child` on the world-space parent surface.
pub(crate) fn footprint_on(
    cg: &ContactGraph,
    child: &NodeId,
    surface: &Region2D,
    poses: &BTreeMap<NodeId, Pose>,
) -> Result<Option<Region2D>, GraphError> {
    let n = cg.node(child)?;
    let pose = poses[child];
    let verts: Vec<Vec3> = n.geometry.iter().flat_map(|g| g.world_vertices(&pose)).collect();
    Ok(contact_hull(&verts, &|v| surface.height_of(v), &|v| surface.to_plane(v))
        .map(|r| Region2D::new(surface.frame, r.boundary().to_vec()).expect("hull is a valid region")))
}

pub(crate) fn stable_with(cg: &ContactGraph, child: &NodeId, poses: &BTreeMap<NodeId, Pose>) -> Result<bool, GraphError> {
    let e = cg
        .edge(child)
        .ok_or_else(|| GraphError::Integrity(format!("{child} has no supporting relation")))?;
    let surface = cg.world_surface(&e.parent, e.placement.surface, poses)?;
    let Some(footprint) = footprint_on(cg, child, &surface, poses)? else {
        return Ok(false);
    };
    let overlap = match overlap_region(&surface, &footprint) {
        Ok(o) => o,
        Err(GeomError::NoContact) => return Ok(false),
        Err(e) => return Err(e.into()),
    };
    let com = match project_com(&subtree_mass_points(cg, child, poses)?, &overlap) {
        Ok(c) => c,
        Err(GeomError::InvalidMass(_)) => return Ok(false),
        Err(e) => return Err(e.into()),
    };
    Ok(overlap.sdf(com) < 0.0)
}

/// World-space volume a contain-type surface of `parent` encloses.
pub(crate) fn container_box(
    cg: &ContactGraph,
    parent: &NodeId,
    surface: usize,
    poses: &BTreeMap<NodeId, Pose>,
) -> Result<Option<OrientedBox>, GraphError> {
    let p = cg.node(parent)?;
    let local = match p.surfaces.get(surface).and_then(|s| s.cavity()) {
        Some(c) => Some(c),
        None => p.bbox.clone(),
    };
    Ok(local.map(|b| b.transformed(&poses[parent])))
}

pub(crate) fn contained_with(cg: &ContactGraph, child: &NodeId, poses: &BTreeMap<NodeId, Pose>) -> Result<bool, GraphError> {
    if !stable_with(cg, child, poses)? {
        return Ok(false);
    }
    let e = cg.edge(child).expect("checked by stable_with");
    let Some(outer) = container_box(cg, &e.parent, e.placement.surface, poses)? else {
        return Ok(false);
    };
    let mut boxes = Vec::new();
    for id in cg.subtree(child) {
        if let Some(b) = &cg.node(&id)?.bbox {
            boxes.push(b.transformed(&poses[&id]));
        }
    }
    Ok(union_bbox_contained(&outer, &boxes))
}

/// Stability of the relation supporting `child`: the projected center of
/// mass of its subtree lies strictly inside the overlap hull.
pub fn check_stable(cg: &ContactGraph, child: &NodeId) -> Result<bool, GraphError> {
    stable_with(cg, child, &cg.world_poses()?)
}

/// Stability plus enclosure of the subtree's boxes by the container volume.
pub fn check_contain(cg: &ContactGraph, child: &NodeId) -> Result<bool, GraphError> {
    contained_with(cg, child, &cg.world_poses()?)
}

/// Dispatches on the surface type of the relation supporting `child`.
pub fn check_relation(cg: &ContactGraph, child: &NodeId, poses: &BTreeMap<NodeId, Pose>) -> Result<bool, GraphError> {
    let e = cg
        .edge(child)
        .ok_or_else(|| GraphError::Integrity(format!("{child} has no supporting relation")))?;
    let kind = cg.node(&e.parent)?.surfaces.get(e.placement.surface).map(|s| s.kind);
    match kind {
        Some(SurfaceKind::Support) => stable_with(cg, child, poses),
        Some(SurfaceKind::Contain) => contained_with(cg, child, poses),
        _ => Ok(false),
    }
}

/// The collision set: primitive pairs across distinct nodes resting on the
/// same parent surface, plus all proximal pairs. Sorted and deduplicated.
pub fn collision_pairs(cg: &ContactGraph) -> Vec<(PrimRef, PrimRef)> {
    let mut groups: BTreeMap<(NodeId, usize), Vec<NodeId>> = BTreeMap::new();
    for (c, e) in cg.edges() {
        if e.placement.surface == GRIPPER_MOUNT || ContactGraph::is_gripper(&e.parent) {
            continue;
        }
        groups.entry((e.parent.clone(), e.placement.surface)).or_default().push(c.clone());
    }
    let mut set: BTreeSet<(PrimRef, PrimRef)> = BTreeSet::new();
    for members in groups.values() {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                let (na, nb) = (cg.node(a).expect("edge child"), cg.node(b).expect("edge child"));
                for ia in 0..na.geometry.len() {
                    for ib in 0..nb.geometry.len() {
                        set.insert(ordered(
                            PrimRef { node: a.clone(), index: ia },
                            PrimRef { node: b.clone(), index: ib },
                        ));
                    }
                }
            }
        }
    }
    for p in cg.proximal() {
        set.insert((p.first().clone(), p.second().clone()));
    }
    set.into_iter().collect()
}

fn ordered(a: PrimRef, b: PrimRef) -> (PrimRef, PrimRef) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Signed distance of a primitive pair, skipping the exact query when the
/// bounding spheres are at least `margin` apart (returns the sphere gap).
pub(crate) fn pair_distance(
    cg: &ContactGraph,
    a: &PrimRef,
    b: &PrimRef,
    poses: &BTreeMap<NodeId, Pose>,
    margin: f64,
) -> Result<f64, GraphError> {
    let ga = &cg.node(&a.node)?.geometry[a.index];
    let gb = &cg.node(&b.node)?.geometry[b.index];
    let (pa, pb) = (poses[&a.node], poses[&b.node]);
    let ca = (pa * ga.local_pose).translation.vector;
    let cb = (pb * gb.local_pose).translation.vector;
    let gap = (ca - cb).norm() - ga.bounding_radius() - gb.bounding_radius();
    if gap >= margin {
        return Ok(gap);
    }
    Ok(signed_distance3d(ga, &pa, gb, &pb)?)
}

/// All pairs of the collision set with signed distance `<= 0`.
pub fn check_penetration_free(cg: &ContactGraph) -> Result<Vec<CollisionPair>, GraphError> {
    let poses = cg.world_poses()?;
    penetrations_with(cg, &poses)
}

pub(crate) fn penetrations_with(cg: &ContactGraph, poses: &BTreeMap<NodeId, Pose>) -> Result<Vec<CollisionPair>, GraphError> {
    let mut out = Vec::new();
    for (a, b) in collision_pairs(cg) {
        if cg.in_hand(&a.node) || cg.in_hand(&b.node) {
            continue;
        }
        let d = pair_distance(cg, &a, &b, poses, 1e-3)?;
        if d <= 0.0 {
            out.push(CollisionPair { a, b, distance: d });
        }
    }
    Ok(out)
}

/// Full physical validation: level support surfaces, stable support or
/// containment for every relation, and non-penetration over the collision
/// set. Returns every violation found.
pub fn validate(cg: &ContactGraph) -> Result<Vec<Violation>, GraphError> {
    cg.check_integrity()?;
    let poses = cg.world_poses()?;
    let mut out = Vec::new();
    let children: Vec<NodeId> = cg.edges().map(|(c, _)| c.clone()).collect();
    for child in &children {
        if !checked(cg, child) {
            continue;
        }
        let e = cg.edge(child).expect("listed");
        let surface = cg.world_surface(&e.parent, e.placement.surface, &poses)?;
        if !surface.faces_up() {
            out.push(Violation::NotLevel { parent: e.parent.clone(), surface: e.placement.surface });
            continue;
        }
        let kind = cg.node(&e.parent)?.surfaces[e.placement.surface].kind;
        match kind {
            SurfaceKind::Contain => {
                if !stable_with(cg, child, &poses)? {
                    out.push(Violation::Unstable { child: child.clone() });
                } else if !contained_with(cg, child, &poses)? {
                    out.push(Violation::NotContained { child: child.clone() });
                }
            }
            _ => {
                if !stable_with(cg, child, &poses)? {
                    out.push(Violation::Unstable { child: child.clone() });
                }
            }
        }
    }
    out.extend(penetrations_with(cg, &poses)?.into_iter().map(Violation::Penetration));
    Ok(out)
}
