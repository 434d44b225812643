//! The augmented contact graph: a parse tree of supporting relations, proximal
//! edges between primitives, and per-node supporting/status attributes.

mod action;
mod validate;

pub use action::{apply_action, Action, ActionKind};
pub use validate::{
    check_contain, check_penetration_free, check_relation, check_stable, collision_pairs, validate,
    CollisionPair, Violation,
};
pub(crate) use validate::pair_distance;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use nalgebra::{Translation3, UnitQuaternion};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geom::{
    convex_hull_2d, planar_pose, GeomError, GeometryPrimitive, OrientedBox, Pose, Region2D, Vec2, Vec3,
};

/// Reserved id of the synthetic node that holds the in-hand object.
pub const GRIPPER: &str = "gripper";
/// Height (m) of the gripper frame above the world origin; far from any scene.
pub const GRIPPER_HEIGHT: f64 = 100.0;
/// Surface index marking the gripper's fixed mount on the root.
pub const GRIPPER_MOUNT: usize = usize::MAX;
/// Pose tolerance (m, rad) for structural equality.
pub const POSE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SurfaceKind {
    None,
    Support,
    Contain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Closed,
    Opened,
}

/// One element of a node's supporting attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    /// Region with its frame in node coordinates.
    pub region: Region2D,
    pub kind: SurfaceKind,
    /// Interior height of a container cavity above this surface. When set,
    /// containment is checked against the cavity box instead of the node box.
    pub cavity_height: Option<f64>,
}

impl Surface {
    pub fn new(region: Region2D, kind: SurfaceKind) -> Self {
        Self { region, kind, cavity_height: None }
    }

    /// Cavity volume in node coordinates, if this is a container floor.
    pub fn cavity(&self) -> Option<OrientedBox> {
        let h = self.cavity_height?;
        let (lo, hi) = self.region.extent();
        let mid = (lo + hi) * 0.5;
        let local = OrientedBox::new(
            Vec3::new(mid.x, mid.y, 0.5 * h),
            Vec3::new(0.5 * (hi.x - lo.x), 0.5 * (hi.y - lo.y), 0.5 * h),
            nalgebra::Matrix3::identity(),
        )
        .ok()?;
        Some(local.transformed(&self.region.frame))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneNode {
    pub id: NodeId,
    pub label: String,
    pub geometry: Vec<GeometryPrimitive>,
    /// Oriented bounding box in node coordinates.
    pub bbox: Option<OrientedBox>,
    pub surfaces: Vec<Surface>,
    /// Furniture and other nodes that are never moved.
    pub fixed: bool,
    /// Own surfaces the node may be turned onto, besides its default base.
    pub rest_faces: Vec<usize>,
}

impl SceneNode {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: NodeId::new(id),
            label: label.into(),
            geometry: Vec::new(),
            bbox: None,
            surfaces: Vec::new(),
            fixed: false,
            rest_faces: Vec::new(),
        }
    }

    pub fn with_geometry(mut self, geometry: Vec<GeometryPrimitive>) -> Self {
        self.bbox = crate::geom::enclosing_box(&geometry);
        self.geometry = geometry;
        self
    }

    pub fn with_surface(mut self, surface: Surface) -> Self {
        self.surfaces.push(surface);
        self
    }

    pub fn with_rest_face(mut self, surface: usize) -> Self {
        self.rest_faces.push(surface);
        self
    }

    pub fn fixed(mut self) -> Self {
        self.fixed = true;
        self
    }

    pub fn mass(&self) -> f64 {
        self.geometry.iter().map(|g| g.mass).sum()
    }

    /// Node-to-placement transform when resting on `face` (flipped onto a
    /// supporting plane), or identity for the default base.
    pub fn face_transform(&self, face: Option<usize>) -> Pose {
        match face.and_then(|f| self.surfaces.get(f)) {
            None => Pose::identity(),
            Some(s) => {
                let flip = Pose::from_parts(
                    Translation3::identity(),
                    UnitQuaternion::from_euler_angles(std::f64::consts::PI, 0.0, 0.0),
                );
                flip * s.region.frame.inverse()
            }
        }
    }

    /// Contact footprint (plane coordinates, origin under the node frame)
    /// when resting on `face` at the identity planar pose.
    pub fn base_footprint(&self, face: Option<usize>) -> Option<Region2D> {
        let pose = self.face_transform(face);
        let verts: Vec<Vec3> = self.geometry.iter().flat_map(|g| g.world_vertices(&pose)).collect();
        contact_hull(&verts, &|v| v.z, &|v| Vec2::new(v.x, v.y))
    }
}

/// Hull of the lowest vertices (within 1e-6 of the minimum height).
pub(crate) fn contact_hull(
    verts: &[Vec3],
    height: &dyn Fn(&Vec3) -> f64,
    plane: &dyn Fn(&Vec3) -> Vec2,
) -> Option<Region2D> {
    let min = verts.iter().map(height).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    let low: Vec<Vec2> = verts.iter().filter(|v| height(v) <= min + 1e-6).map(plane).collect();
    convex_hull_2d(&low).ok()
}

/// Planar pose of a child in its parent surface frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl PlanarPose {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    pub fn to_pose(self) -> Pose {
        planar_pose(self.x, self.y, self.yaw)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && angle_diff(self.yaw, other.yaw).abs() <= tol
    }
}

pub(crate) fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    if d > std::f64::consts::PI {
        d - std::f64::consts::TAU
    } else {
        d
    }
}

/// Where and how a child rests on its parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    /// Index into the parent's surfaces, or [`GRIPPER_MOUNT`].
    pub surface: usize,
    pub pose: PlanarPose,
    /// Degrees of freedom of the child relative to the parent (0..=3).
    pub dof: u8,
    /// Child surface turned down onto the parent, if not the default base.
    pub child_face: Option<usize>,
}

impl Placement {
    pub fn on(surface: usize, pose: PlanarPose) -> Self {
        Self { surface, pose, dof: 3, child_face: None }
    }

    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.surface == other.surface
            && self.child_face == other.child_face
            && self.dof == other.dof
            && self.pose.approx_eq(&other.pose, tol)
    }
}

/// Directed supporting relation from `parent` to the child it is keyed by.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEdge {
    pub parent: NodeId,
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimRef {
    pub node: NodeId,
    pub index: usize,
}

/// Unordered pair of primitives on distinct nodes, stored in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProximalPair(PrimRef, PrimRef);

impl ProximalPair {
    pub fn new(a: PrimRef, b: PrimRef) -> Result<Self, GraphError> {
        if a.node == b.node {
            return Err(GraphError::Integrity(format!("proximal pair within node {}", a.node)));
        }
        Ok(if a <= b { Self(a, b) } else { Self(b, a) })
    }
    pub fn first(&self) -> &PrimRef {
        &self.0
    }
    pub fn second(&self) -> &PrimRef {
        &self.1
    }
}

/// Goal-side ordering predicate: `upper` must end up in the subtree of `lower`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Above {
    pub upper: NodeId,
    pub lower: NodeId,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph integrity: {0}")]
    Integrity(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("precondition of {action} failed: {clause}")]
    Precondition { action: String, clause: String },
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

#[derive(Debug, Clone)]
pub struct ContactGraph {
    root: NodeId,
    nodes: Arc<BTreeMap<NodeId, SceneNode>>,
    edges: BTreeMap<NodeId, SupportEdge>,
    status: BTreeMap<NodeId, Status>,
    proximal: BTreeSet<ProximalPair>,
    swap: Option<NodeId>,
    predicates: Vec<Above>,
}

impl PartialEq for ContactGraph {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.status == other.status
            && self.proximal == other.proximal
            && self.swap == other.swap
            && self.predicates == other.predicates
    }
}

impl ContactGraph {
    /// New graph holding only `root` and the gripper. A root without
    /// surfaces receives a 200 m square floor.
    pub fn new(mut root: SceneNode) -> Self {
        if root.surfaces.is_empty() {
            let floor = Region2D::rectangle(Pose::identity(), 200.0, 200.0).expect("static floor");
            root.surfaces.push(Surface::new(floor, SurfaceKind::Support));
        }
        root.fixed = true;
        let root_id = root.id.clone();
        let hold = Region2D::rectangle(Pose::identity(), 10.0, 10.0).expect("static hold surface");
        let gripper = SceneNode::new(GRIPPER, "gripper")
            .with_surface(Surface::new(hold, SurfaceKind::Support))
            .fixed();
        let mut nodes = BTreeMap::new();
        nodes.insert(root_id.clone(), root);
        nodes.insert(gripper.id.clone(), gripper);
        let mut edges = BTreeMap::new();
        edges.insert(
            NodeId::new(GRIPPER),
            SupportEdge {
                parent: root_id.clone(),
                placement: Placement { surface: GRIPPER_MOUNT, pose: PlanarPose::default(), dof: 0, child_face: None },
            },
        );
        Self {
            root: root_id,
            nodes: Arc::new(nodes),
            edges,
            status: BTreeMap::new(),
            proximal: BTreeSet::new(),
            swap: None,
            predicates: Vec::new(),
        }
    }

    pub fn root(&self) -> &NodeId {
        &self.root
    }

    pub fn gripper(&self) -> NodeId {
        NodeId::new(GRIPPER)
    }

    pub fn is_gripper(id: &NodeId) -> bool {
        id.as_str() == GRIPPER
    }

    /// Adds a node under `parent`. Fails on duplicate ids, unknown parents or
    /// surface indices.
    pub fn add_node(&mut self, node: SceneNode, parent: &NodeId, placement: Placement) -> Result<(), GraphError> {
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::Integrity(format!("duplicate instance id {}", node.id)));
        }
        if node.geometry.is_empty() {
            return Err(GraphError::Integrity(format!("node {} has no geometry", node.id)));
        }
        for g in &node.geometry {
            g.validate()?;
        }
        let p = self.node(parent)?;
        if placement.surface >= p.surfaces.len() {
            return Err(GraphError::Integrity(format!(
                "node {} references surface {} of {} which has {}",
                node.id,
                placement.surface,
                parent,
                p.surfaces.len()
            )));
        }
        let id = node.id.clone();
        Arc::make_mut(&mut self.nodes).insert(id.clone(), node);
        self.edges.insert(id, SupportEdge { parent: parent.clone(), placement });
        Ok(())
    }

    /// Adds a node whose parent will be attached later via [`Self::attach`].
    pub fn insert_detached(&mut self, node: SceneNode) -> Result<(), GraphError> {
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::Integrity(format!("duplicate instance id {}", node.id)));
        }
        Arc::make_mut(&mut self.nodes).insert(node.id.clone(), node);
        Ok(())
    }

    /// Sets (or replaces) the supporting relation of `child`.
    pub fn attach(&mut self, child: &NodeId, parent: &NodeId, placement: Placement) -> Result<(), GraphError> {
        self.node(child)?;
        self.node(parent)?;
        self.edges.insert(child.clone(), SupportEdge { parent: parent.clone(), placement });
        Ok(())
    }

    pub fn set_status(&mut self, node: &NodeId, status: Status) -> Result<(), GraphError> {
        self.node(node)?;
        self.status.insert(node.clone(), status);
        Ok(())
    }

    pub fn clear_status(&mut self, node: &NodeId) {
        self.status.remove(node);
    }

    pub fn add_proximal(&mut self, a: PrimRef, b: PrimRef) -> Result<(), GraphError> {
        for r in [&a, &b] {
            let n = self.node(&r.node)?;
            if r.index >= n.geometry.len() {
                return Err(GraphError::Integrity(format!("primitive {} of {} does not exist", r.index, r.node)));
            }
        }
        self.proximal.insert(ProximalPair::new(a, b)?);
        Ok(())
    }

    pub fn set_swap(&mut self, swap: Option<NodeId>) -> Result<(), GraphError> {
        if let Some(s) = &swap {
            self.node(s)?;
        }
        self.swap = swap;
        Ok(())
    }

    pub fn swap(&self) -> Option<&NodeId> {
        self.swap.as_ref()
    }

    pub fn predicates(&self) -> &[Above] {
        &self.predicates
    }

    pub fn set_predicates(&mut self, predicates: Vec<Above>) {
        self.predicates = predicates;
    }

    pub fn node(&self, id: &NodeId) -> Result<&SceneNode, GraphError> {
        self.nodes.get(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &SceneNode> {
        self.nodes.values()
    }

    /// Scene objects: all nodes except root and gripper.
    pub fn objects(&self) -> impl Iterator<Item = &SceneNode> {
        self.nodes.values().filter(|n| n.id != self.root && !Self::is_gripper(&n.id))
    }

    pub fn edge(&self, child: &NodeId) -> Option<&SupportEdge> {
        self.edges.get(child)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &SupportEdge)> {
        self.edges.iter()
    }

    pub fn parent(&self, child: &NodeId) -> Option<&NodeId> {
        self.edges.get(child).map(|e| &e.parent)
    }

    pub fn status(&self, node: &NodeId) -> Option<Status> {
        self.status.get(node).copied()
    }

    pub fn statuses(&self) -> impl Iterator<Item = (&NodeId, Status)> {
        self.status.iter().map(|(k, v)| (k, *v))
    }

    pub fn proximal(&self) -> impl Iterator<Item = &ProximalPair> {
        self.proximal.iter()
    }

    /// Children of `node` in id order.
    pub fn children(&self, node: &NodeId) -> Vec<NodeId> {
        self.edges.iter().filter(|(_, e)| &e.parent == node).map(|(c, _)| c.clone()).collect()
    }

    /// Children resting on one particular surface of `node`.
    pub fn children_on(&self, node: &NodeId, surface: usize) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter(|(_, e)| &e.parent == node && e.placement.surface == surface)
            .map(|(c, _)| c.clone())
            .collect()
    }

    /// `node` and all its descendants, preorder.
    pub fn subtree(&self, node: &NodeId) -> Vec<NodeId> {
        let mut out = vec![node.clone()];
        let mut i = 0;
        while i < out.len() {
            let kids = self.children(&out[i]);
            out.extend(kids);
            i += 1;
        }
        out
    }

    pub fn is_descendant(&self, node: &NodeId, ancestor: &NodeId) -> bool {
        let mut cur = self.parent(node);
        let mut steps = 0;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            steps += 1;
            if steps > self.nodes.len() {
                return false;
            }
            cur = self.parent(p);
        }
        false
    }

    /// Number of edges between the root and `node`.
    pub fn depth(&self, node: &NodeId) -> usize {
        let mut d = 0;
        let mut cur = self.parent(node);
        while let Some(p) = cur {
            d += 1;
            if d > self.nodes.len() {
                break;
            }
            cur = self.parent(p);
        }
        d
    }

    /// Node currently held by the gripper.
    pub fn held(&self) -> Option<NodeId> {
        self.children(&self.gripper()).into_iter().next()
    }

    /// Whether `node` sits (transitively) under the gripper.
    pub fn in_hand(&self, node: &NodeId) -> bool {
        self.is_descendant(node, &self.gripper())
    }

    /// Verifies the parse-tree property: every non-root node has exactly one
    /// parent, parents exist, the root is reached without cycles, surfaces
    /// referenced exist and are not of type none.
    pub fn check_integrity(&self) -> Result<(), GraphError> {
        for id in self.nodes.keys() {
            if id == &self.root {
                if self.edges.contains_key(id) {
                    return Err(GraphError::Integrity("root has a parent".into()));
                }
                continue;
            }
            let Some(e) = self.edges.get(id) else {
                return Err(GraphError::Integrity(format!("node {id} is detached")));
            };
            let parent = self.nodes.get(&e.parent).ok_or_else(|| {
                GraphError::Integrity(format!("node {id} has unknown parent {}", e.parent))
            })?;
            if e.placement.surface == GRIPPER_MOUNT {
                if !Self::is_gripper(id) {
                    return Err(GraphError::Integrity(format!("node {id} uses the gripper mount")));
                }
            } else {
                let s = parent.surfaces.get(e.placement.surface).ok_or_else(|| {
                    GraphError::Integrity(format!("node {id} references missing surface {}", e.placement.surface))
                })?;
                if s.kind == SurfaceKind::None {
                    return Err(GraphError::Integrity(format!("node {id} rests on a surface of type none")));
                }
                if let Some(f) = e.placement.child_face {
                    if f >= self.nodes[id].surfaces.len() {
                        return Err(GraphError::Integrity(format!("node {id} rests on missing face {f}")));
                    }
                }
            }
            if e.placement.dof > 3 {
                return Err(GraphError::Integrity(format!("node {id} has {} dof", e.placement.dof)));
            }
            if !self.is_descendant(id, &self.root) {
                return Err(GraphError::Integrity(format!("node {id} is not connected to the root")));
            }
        }
        for child in self.edges.keys() {
            if !self.nodes.contains_key(child) {
                return Err(GraphError::Integrity(format!("relation for unknown node {child}")));
            }
        }
        for key in self.status.keys() {
            if !self.nodes.contains_key(key) {
                return Err(GraphError::Integrity(format!("status for unknown node {key}")));
            }
        }
        Ok(())
    }

    /// Transform from `child` frame to its parent frame along `edge`.
    pub fn edge_transform(&self, child: &SceneNode, edge: &SupportEdge) -> Result<Pose, GraphError> {
        if edge.placement.surface == GRIPPER_MOUNT {
            return Ok(Pose::translation(0.0, 0.0, GRIPPER_HEIGHT));
        }
        let parent = self.node(&edge.parent)?;
        let surface = parent.surfaces.get(edge.placement.surface).ok_or_else(|| {
            GraphError::Integrity(format!("missing surface {} on {}", edge.placement.surface, parent.id))
        })?;
        Ok(surface.region.frame * edge.placement.pose.to_pose() * child.face_transform(edge.placement.child_face))
    }

    /// World pose of `node`: product of relative poses from the root.
    pub fn world_pose(&self, node: &NodeId) -> Result<Pose, GraphError> {
        let mut chain = Vec::new();
        let mut cur = node.clone();
        while cur != self.root {
            let e = self
                .edges
                .get(&cur)
                .ok_or_else(|| GraphError::Integrity(format!("node {cur} is detached from the root")))?;
            chain.push((cur.clone(), e));
            if chain.len() > self.nodes.len() {
                return Err(GraphError::Integrity("cycle in supporting relations".into()));
            }
            cur = e.parent.clone();
        }
        self.node(node)?;
        let mut pose = Pose::identity();
        for (id, e) in chain.iter().rev() {
            pose *= self.edge_transform(self.node(id)?, e)?;
        }
        Ok(pose)
    }

    /// World poses for every connected node.
    pub fn world_poses(&self) -> Result<BTreeMap<NodeId, Pose>, GraphError> {
        let mut out = BTreeMap::new();
        out.insert(self.root.clone(), Pose::identity());
        let mut frontier = vec![self.root.clone()];
        let mut kids: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
        for (c, e) in &self.edges {
            kids.entry(&e.parent).or_default().push(c);
        }
        while let Some(p) = frontier.pop() {
            let pp = out[&p];
            if let Some(cs) = kids.get(&p) {
                for c in cs {
                    let pose = pp * self.edge_transform(self.node(c)?, &self.edges[*c])?;
                    out.insert((*c).clone(), pose);
                    frontier.push((*c).clone());
                }
            }
        }
        if out.len() != self.nodes.len() {
            return Err(GraphError::Integrity("graph has nodes detached from the root".into()));
        }
        Ok(out)
    }

    /// Supporting region of `parent`'s surface in world coordinates.
    pub fn world_surface(&self, parent: &NodeId, surface: usize, poses: &BTreeMap<NodeId, Pose>) -> Result<Region2D, GraphError> {
        let p = self.node(parent)?;
        let s = p
            .surfaces
            .get(surface)
            .ok_or_else(|| GraphError::Integrity(format!("missing surface {surface} on {parent}")))?;
        Ok(s.region.transformed(&poses[parent]))
    }

    /// Whether `node` can be manipulated: no relation on the path to the root
    /// passes through a contain-type surface of a closed node.
    pub fn is_accessible(&self, node: &NodeId) -> bool {
        let mut cur = node;
        let mut steps = 0;
        while let Some(e) = self.edges.get(cur) {
            if e.placement.surface != GRIPPER_MOUNT && self.status(&e.parent) == Some(Status::Closed) {
                let contains = self
                    .nodes
                    .get(&e.parent)
                    .and_then(|p| p.surfaces.get(e.placement.surface))
                    .is_some_and(|s| s.kind == SurfaceKind::Contain);
                if contains {
                    return false;
                }
            }
            cur = &e.parent;
            steps += 1;
            if steps > self.nodes.len() {
                return false;
            }
        }
        true
    }

    /// Closed containers enclosing `node`, innermost first.
    pub fn enclosing_containers(&self, node: &NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = node;
        while let Some(e) = self.edges.get(cur) {
            if e.placement.surface != GRIPPER_MOUNT {
                let contains = self
                    .nodes
                    .get(&e.parent)
                    .and_then(|p| p.surfaces.get(e.placement.surface))
                    .is_some_and(|s| s.kind == SurfaceKind::Contain);
                if contains && self.status.contains_key(&e.parent) {
                    out.push(e.parent.clone());
                }
            }
            cur = &e.parent;
            if out.len() > self.nodes.len() {
                break;
            }
        }
        out
    }

    /// Same relations (parent, surface, face, dof, pose within `tol`) and
    /// statuses on the same node set.
    pub fn structurally_equal(&self, other: &Self, tol: f64) -> bool {
        if self.nodes.len() != other.nodes.len() || self.status != other.status {
            return false;
        }
        self.edges.len() == other.edges.len()
            && self.edges.iter().all(|(c, e)| {
                other
                    .edges
                    .get(c)
                    .is_some_and(|o| o.parent == e.parent && o.placement.same_as(&e.placement, tol))
            })
    }

    /// Hex digest of the mutable state (relations, poses, statuses).
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let fix = |v: f64| format!("{:.9}", v + 0.0);
        for (c, e) in &self.edges {
            let p = &e.placement;
            let line = format!(
                "{}|{}|{}|{:?}|{}|{}|{}|{}\n",
                c,
                e.parent,
                p.surface,
                p.child_face,
                p.dof,
                fix(p.pose.x),
                fix(p.pose.y),
                fix(p.pose.yaw.rem_euclid(std::f64::consts::TAU))
            );
            h.update(line.as_bytes());
        }
        for (n, s) in &self.status {
            h.update(format!("{n}={s:?}\n").as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Replaces the relation of `child` without checks; used by actions and
    /// goal synthesis after they validated the change.
    pub(crate) fn set_edge(&mut self, child: NodeId, edge: SupportEdge) {
        self.edges.insert(child, edge);
    }

    pub(crate) fn set_status_unchecked(&mut self, node: NodeId, status: Status) {
        self.status.insert(node, status);
    }
}
