//! JSON scene files.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Quaternion, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::cgraph::{
    Above, ContactGraph, NodeId, Placement, PlanarPose, PrimRef, SceneNode, Status, Surface, SurfaceKind,
};
use crate::geom::{pose_from_xyz_rpy, GeometryPrimitive, PrimitiveKind, Pose, Region2D, Vec2, Vec3};

pub const SCHEMA_VERSION: u32 = 1;

/// Rigid transform; `rpy` is accepted on input, `quat` (w, x, y, z) is written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDto {
    pub xyz: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rpy: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quat: Option<[f64; 4]>,
}

impl PoseDto {
    fn from_pose(p: &Pose) -> Option<Self> {
        if *p == Pose::identity() {
            return None;
        }
        let t = p.translation.vector;
        let q = p.rotation;
        Some(Self { xyz: [t.x, t.y, t.z], rpy: None, quat: Some([q.w, q.i, q.j, q.k]) })
    }

    fn to_pose(&self) -> Result<Pose, CliError> {
        let [x, y, z] = self.xyz;
        match (self.rpy, self.quat) {
            (Some(_), Some(_)) => Err(CliError::Input("a pose takes either rpy or quat, not both".into())),
            (Some(rpy), None) => Ok(pose_from_xyz_rpy(self.xyz, rpy)),
            (None, Some([w, i, j, k])) => {
                let n = (w * w + i * i + j * j + k * k).sqrt();
                if !((n - 1.0).abs() < 1e-9) {
                    return Err(CliError::Input(format!("quaternion norm {n} is not 1")));
                }
                let q = UnitQuaternion::new_unchecked(Quaternion::new(w, i, j, k));
                Ok(Pose::from_parts(Translation3::new(x, y, z), q))
            }
            (None, None) => Ok(Pose::from_parts(Translation3::new(x, y, z), UnitQuaternion::identity())),
        }
    }
}

fn pose_or_identity(p: &Option<PoseDto>) -> Result<Pose, CliError> {
    p.as_ref().map_or(Ok(Pose::identity()), PoseDto::to_pose)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeDto {
    Box { size: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
    Cone { radius: f64, height: f64 },
    Disk { radius: f64, thickness: f64 },
    ConvexMesh { vertices: Vec<[f64; 3]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveDto {
    #[serde(flatten)]
    pub shape: ShapeDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<PoseDto>,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindDto {
    None,
    Support,
    Contain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusDto {
    Closed,
    Opened,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDto {
    pub kind: KindDto,
    /// Boundary in the surface frame.
    pub polygon: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<PoseDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity_height: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityDto {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub geometry: Vec<PrimitiveDto>,
    #[serde(default)]
    pub surfaces: Vec<SurfaceDto>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fixed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rest_faces: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<StatusDto>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarDto {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportDto {
    pub parent: String,
    pub child: String,
    #[serde(default)]
    pub surface: usize,
    /// Optional in rough goals; missing poses start at the surface centroid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<PlanarDto>,
    #[serde(default = "default_dof")]
    pub dof: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub child_face: Option<usize>,
}

fn default_dof() -> u8 {
    3
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimRefDto {
    pub node: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AboveDto {
    pub upper: String,
    pub lower: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema_version: u32,
    /// Optional only in rough goals, which inherit the scene's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<EntityDto>,
    #[serde(default)]
    pub entities: Vec<EntityDto>,
    #[serde(default)]
    pub supports: Vec<SupportDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub proximal: Vec<[PrimRefDto; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predicates: Vec<AboveDto>,
    /// Status changes a rough goal asks for, by node id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub statuses: BTreeMap<String, StatusDto>,
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: Self =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    /// Canonical text: sorted keys, two-space indentation, trailing newline.
    pub fn to_canonical(&self) -> String {
        canonical(self)
    }

    pub fn from_graph(cg: &ContactGraph) -> Self {
        let root = cg.node(cg.root()).expect("root exists");
        let entities = cg
            .nodes()
            .filter(|n| &n.id != cg.root() && !ContactGraph::is_gripper(&n.id))
            .map(|n| entity_dto(n, cg.status(&n.id)))
            .collect();
        let supports = cg
            .edges()
            .filter(|(c, _)| !ContactGraph::is_gripper(c))
            .map(|(c, e)| SupportDto {
                parent: e.parent.to_string(),
                child: c.to_string(),
                surface: e.placement.surface,
                pose: Some(PlanarDto { x: e.placement.pose.x, y: e.placement.pose.y, yaw: e.placement.pose.yaw }),
                dof: e.placement.dof,
                child_face: e.placement.child_face,
            })
            .collect();
        let prim = |r: &PrimRef| PrimRefDto { node: r.node.to_string(), index: r.index };
        Self {
            schema_version: SCHEMA_VERSION,
            root: Some(entity_dto(root, cg.status(cg.root()))),
            entities,
            supports,
            proximal: cg.proximal().map(|p| [prim(p.first()), prim(p.second())]).collect(),
            swap: cg.swap().map(|s| s.to_string()),
            statuses: BTreeMap::new(),
            predicates: cg
                .predicates()
                .iter()
                .map(|a| AboveDto { upper: a.upper.to_string(), lower: a.lower.to_string() })
                .collect(),
        }
    }

    /// Builds the graph, checking referential integrity and the tree
    /// property. Physical validity is not checked here.
    pub fn to_graph(&self) -> Result<ContactGraph, CliError> {
        let root_dto = self.root.as_ref().ok_or_else(|| CliError::Input("scene has no root entity".into()))?;
        let mut cg = ContactGraph::new(scene_node(root_dto)?);
        let mut statuses = Vec::new();
        if let Some(s) = root_dto.status {
            statuses.push((cg.root().clone(), s));
        }
        for e in &self.entities {
            if e.geometry.is_empty() {
                return Err(CliError::Input(format!("entity {} has no geometry", e.id)));
            }
            cg.insert_detached(scene_node(e)?).map_err(|err| CliError::Input(err.to_string()))?;
            if let Some(s) = e.status {
                statuses.push((NodeId::new(&e.id), s));
            }
        }
        let mut seen = BTreeSet::new();
        for s in &self.supports {
            let (parent, child) = (NodeId::new(&s.parent), NodeId::new(&s.child));
            for id in [&parent, &child] {
                if !cg.contains(id) {
                    return Err(CliError::Input(format!("support {} -> {} references unknown node {id}", s.parent, s.child)));
                }
            }
            if !seen.insert(child.clone()) {
                return Err(CliError::Input(format!("{child} has more than one support")));
            }
            let placement = placement_of(&cg, s)?;
            cg.attach(&child, &parent, placement).map_err(|e| CliError::Input(e.to_string()))?;
        }
        statuses.extend(self.statuses.iter().map(|(n, s)| (NodeId::new(n), *s)));
        for (n, s) in statuses {
            let status = match s {
                StatusDto::Closed => Status::Closed,
                StatusDto::Opened => Status::Opened,
            };
            cg.set_status(&n, status).map_err(|e| CliError::Input(e.to_string()))?;
        }
        for [a, b] in &self.proximal {
            let r = |p: &PrimRefDto| PrimRef { node: NodeId::new(&p.node), index: p.index };
            cg.add_proximal(r(a), r(b)).map_err(|e| CliError::Input(e.to_string()))?;
        }
        cg.set_swap(self.swap.as_ref().map(NodeId::new)).map_err(|e| CliError::Input(e.to_string()))?;
        let mut preds = Vec::new();
        for a in &self.predicates {
            for id in [&a.upper, &a.lower] {
                if !cg.contains(&NodeId::new(id)) {
                    return Err(CliError::Input(format!("predicate references unknown node {id}")));
                }
            }
            preds.push(Above { upper: NodeId::new(&a.upper), lower: NodeId::new(&a.lower) });
        }
        cg.set_predicates(preds);
        cg.check_integrity().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cg)
    }

    /// A rough goal over the node set of `scene`: entities, statuses and the
    /// swap node come from the scene unless this file lists its own, and
    /// nodes without a support here keep their scene relation.
    pub fn merged_onto(&self, scene: &SceneFile) -> SceneFile {
        let mut out = scene.clone();
        if self.root.is_some() {
            out.root = self.root.clone();
        }
        if !self.entities.is_empty() {
            out.entities = self.entities.clone();
        }
        let listed: BTreeSet<&str> = self.supports.iter().map(|s| s.child.as_str()).collect();
        out.supports.retain(|s| !listed.contains(s.child.as_str()));
        out.supports.extend(self.supports.iter().cloned());
        if self.swap.is_some() {
            out.swap = self.swap.clone();
        }
        if !self.predicates.is_empty() {
            out.predicates = self.predicates.clone();
        }
        if !self.proximal.is_empty() {
            out.proximal = self.proximal.clone();
        }
        out.statuses.extend(self.statuses.clone());
        out
    }
}

fn placement_of(cg: &ContactGraph, s: &SupportDto) -> Result<Placement, CliError> {
    let parent = cg.node(&NodeId::new(&s.parent)).map_err(|e| CliError::Input(e.to_string()))?;
    let gripper = ContactGraph::is_gripper(&NodeId::new(&s.parent));
    let surface = if gripper { 0 } else { s.surface };
    if !gripper && surface >= parent.surfaces.len() {
        return Err(CliError::Input(format!("{} has no surface {surface}", s.parent)));
    }
    if s.dof > 3 {
        return Err(CliError::Input(format!("dof of {} must be at most 3", s.child)));
    }
    let pose = match s.pose {
        Some(p) => PlanarPose::new(p.x, p.y, p.yaw),
        None if gripper => PlanarPose::default(),
        None => {
            let c = parent.surfaces[surface].region.centroid();
            PlanarPose::new(c.x, c.y, 0.0)
        }
    };
    Ok(Placement { surface, pose, dof: s.dof, child_face: s.child_face })
}

fn scene_node(e: &EntityDto) -> Result<SceneNode, CliError> {
    if e.id.is_empty() || ContactGraph::is_gripper(&NodeId::new(&e.id)) {
        return Err(CliError::Input(format!("invalid entity id {:?}", e.id)));
    }
    let bad = |err: crate::geom::GeomError| CliError::Input(format!("entity {}: {err}", e.id));
    let mut geometry = Vec::new();
    for g in &e.geometry {
        let kind = match &g.shape {
            ShapeDto::Box { size } => PrimitiveKind::Box { half_extents: Vec3::new(size[0], size[1], size[2]) * 0.5 },
            ShapeDto::Cylinder { radius, height } => PrimitiveKind::Cylinder { radius: *radius, height: *height },
            ShapeDto::Cone { radius, height } => PrimitiveKind::Cone { radius: *radius, height: *height },
            ShapeDto::Disk { radius, thickness } => PrimitiveKind::Disk { radius: *radius, thickness: *thickness },
            ShapeDto::ConvexMesh { vertices } => {
                PrimitiveKind::ConvexMesh { vertices: vertices.iter().map(|v| Vector3::new(v[0], v[1], v[2])).collect() }
            }
        };
        geometry.push(GeometryPrimitive::new(kind, pose_or_identity(&g.pose)?, g.mass).map_err(bad)?);
    }
    let mut node = SceneNode::new(&e.id, &e.label).with_geometry(geometry);
    for s in &e.surfaces {
        let boundary = s.polygon.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        let region = Region2D::new(pose_or_identity(&s.frame)?, boundary).map_err(bad)?;
        let kind = match s.kind {
            KindDto::None => SurfaceKind::None,
            KindDto::Support => SurfaceKind::Support,
            KindDto::Contain => SurfaceKind::Contain,
        };
        if let Some(h) = s.cavity_height {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Input(format!("entity {}: cavity_height must be positive", e.id)));
            }
        }
        node = node.with_surface(Surface { region, kind, cavity_height: s.cavity_height });
    }
    for &f in &e.rest_faces {
        if f >= node.surfaces.len() {
            return Err(CliError::Input(format!("entity {}: rest face {f} does not exist", e.id)));
        }
        node = node.with_rest_face(f);
    }
    node.fixed = e.fixed;
    Ok(node)
}

fn entity_dto(n: &SceneNode, status: Option<Status>) -> EntityDto {
    let geometry = n
        .geometry
        .iter()
        .map(|g| {
            let shape = match &g.kind {
                PrimitiveKind::Box { half_extents: h } => ShapeDto::Box { size: [2.0 * h.x, 2.0 * h.y, 2.0 * h.z] },
                PrimitiveKind::Cylinder { radius, height } => ShapeDto::Cylinder { radius: *radius, height: *height },
                PrimitiveKind::Cone { radius, height } => ShapeDto::Cone { radius: *radius, height: *height },
                PrimitiveKind::Disk { radius, thickness } => ShapeDto::Disk { radius: *radius, thickness: *thickness },
                PrimitiveKind::ConvexMesh { vertices } => {
                    ShapeDto::ConvexMesh { vertices: vertices.iter().map(|v| [v.x, v.y, v.z]).collect() }
                }
            };
            PrimitiveDto { shape, pose: PoseDto::from_pose(&g.local_pose), mass: g.mass }
        })
        .collect();
    let surfaces = n
        .surfaces
        .iter()
        .map(|s| SurfaceDto {
            kind: match s.kind {
                SurfaceKind::None => KindDto::None,
                SurfaceKind::Support => KindDto::Support,
                SurfaceKind::Contain => KindDto::Contain,
            },
            polygon: s.region.boundary().iter().map(|p| [p.x, p.y]).collect(),
            frame: PoseDto::from_pose(&s.region.frame),
            cavity_height: s.cavity_height,
        })
        .collect();
    EntityDto {
        id: n.id.to_string(),
        label: n.label.clone(),
        geometry,
        surfaces,
        fixed: n.fixed,
        rest_faces: n.rest_faces.clone(),
        status: status.map(|s| match s {
            Status::Closed => StatusDto::Closed,
            Status::Opened => StatusDto::Opened,
        }),
    }
}

/// Serializes through a `serde_json::Value`, whose maps keep keys sorted.
pub fn canonical<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).expect("plain data serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}
