use super::{GeomError, OrientedBox, Pose, Vec3};

/// Number of segments used when a circular rim is discretized.
pub const RIM_SEGMENTS: usize = 32;

/// Shape of a primitive, centered on its own local origin.
///
/// Cylinders, disks and cones have their axis along local z. A cone's base
/// sits at `z = -height / 2` and its apex at `z = +height / 2`.
#[derive(Debug, Clone, PartialEq)]
pub enum PrimitiveKind {
    Box { half_extents: Vec3 },
    Cylinder { radius: f64, height: f64 },
    Cone { radius: f64, height: f64 },
    Disk { radius: f64, thickness: f64 },
    ConvexMesh { vertices: Vec<Vec3> },
}

impl PrimitiveKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Box { .. } => "box",
            Self::Cylinder { .. } => "cylinder",
            Self::Cone { .. } => "cone",
            Self::Disk { .. } => "disk",
            Self::ConvexMesh { .. } => "convex_mesh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryPrimitive {
    pub kind: PrimitiveKind,
    /// Placement relative to the owning node frame.
    pub local_pose: Pose,
    pub mass: f64,
}

impl GeometryPrimitive {
    pub fn new(kind: PrimitiveKind, local_pose: Pose, mass: f64) -> Result<Self, GeomError> {
        let p = Self { kind, local_pose, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn cuboid(size: [f64; 3], local_pose: Pose, mass: f64) -> Result<Self, GeomError> {
        Self::new(
            PrimitiveKind::Box {
                half_extents: Vec3::new(size[0], size[1], size[2]) * 0.5,
            },
            local_pose,
            mass,
        )
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(GeomError::InvalidGeometry(format!("{what} must be positive, got {v}")))
            }
        };
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(GeomError::InvalidGeometry(format!("mass must be non-negative, got {}", self.mass)));
        }
        match &self.kind {
            PrimitiveKind::Box { half_extents } => {
                for v in half_extents.iter() {
                    positive(*v, "box extent")?;
                }
            }
            PrimitiveKind::Cylinder { radius, height } | PrimitiveKind::Cone { radius, height } => {
                positive(*radius, "radius")?;
                positive(*height, "height")?;
            }
            PrimitiveKind::Disk { radius, thickness } => {
                positive(*radius, "radius")?;
                positive(*thickness, "thickness")?;
            }
            PrimitiveKind::ConvexMesh { vertices } => {
                if !mesh_is_solid(vertices) {
                    return Err(GeomError::InvalidGeometry(
                        "convex mesh vertices do not span a volume".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Farthest point of the shape along `dir`, in the primitive's own frame.
    pub fn support_local(&self, dir: &Vec3) -> Vec3 {
        match &self.kind {
            PrimitiveKind::Box { half_extents: h } => Vec3::new(
                if dir.x >= 0.0 { h.x } else { -h.x },
                if dir.y >= 0.0 { h.y } else { -h.y },
                if dir.z >= 0.0 { h.z } else { -h.z },
            ),
            PrimitiveKind::Cylinder { radius, height } => round_support(dir, *radius, 0.5 * height),
            PrimitiveKind::Disk { radius, thickness } => round_support(dir, *radius, 0.5 * thickness),
            PrimitiveKind::Cone { radius, height } => {
                let apex = Vec3::new(0.0, 0.0, 0.5 * height);
                let rim = rim_point(dir, *radius, -0.5 * height);
                if apex.dot(dir) >= rim.dot(dir) {
                    apex
                } else {
                    rim
                }
            }
            PrimitiveKind::ConvexMesh { vertices } => {
                let mut best = vertices[0];
                let mut best_d = best.dot(dir);
                for v in &vertices[1..] {
                    let d = v.dot(dir);
                    if d > best_d {
                        best = *v;
                        best_d = d;
                    }
                }
                best
            }
        }
    }

    /// World-space support point when the owning node sits at `node_pose`.
    pub fn support_world(&self, node_pose: &Pose, dir: &Vec3) -> Vec3 {
        let pose = node_pose * self.local_pose;
        let local_dir = pose.rotation.inverse_transform_vector(dir);
        let p = self.support_local(&local_dir);
        (pose * nalgebra::Point3::from(p)).coords
    }

    /// Vertices of the shape (circular rims discretized with
    /// [`RIM_SEGMENTS`]), in the primitive's own frame.
    pub fn local_vertices(&self) -> Vec<Vec3> {
        match &self.kind {
            PrimitiveKind::Box { half_extents: h } => {
                let mut v = Vec::with_capacity(8);
                for sx in [-1.0, 1.0] {
                    for sy in [-1.0, 1.0] {
                        for sz in [-1.0, 1.0] {
                            v.push(Vec3::new(sx * h.x, sy * h.y, sz * h.z));
                        }
                    }
                }
                v
            }
            PrimitiveKind::Cylinder { radius, height } => {
                let mut v = rim(*radius, -0.5 * height);
                v.extend(rim(*radius, 0.5 * height));
                v
            }
            PrimitiveKind::Disk { radius, thickness } => {
                let mut v = rim(*radius, -0.5 * thickness);
                v.extend(rim(*radius, 0.5 * thickness));
                v
            }
            PrimitiveKind::Cone { radius, height } => {
                let mut v = rim(*radius, -0.5 * height);
                v.push(Vec3::new(0.0, 0.0, 0.5 * height));
                v
            }
            PrimitiveKind::ConvexMesh { vertices } => vertices.clone(),
        }
    }

    pub fn world_vertices(&self, node_pose: &Pose) -> Vec<Vec3> {
        let pose = node_pose * self.local_pose;
        self.local_vertices()
            .into_iter()
            .map(|v| (pose * nalgebra::Point3::from(v)).coords)
            .collect()
    }

    /// Center of mass under uniform density, in the primitive's own frame.
    pub fn local_com(&self) -> Vec3 {
        match &self.kind {
            PrimitiveKind::Cone { height, .. } => Vec3::new(0.0, 0.0, -0.25 * height),
            PrimitiveKind::ConvexMesh { vertices } => {
                vertices.iter().sum::<Vec3>() / vertices.len() as f64
            }
            _ => Vec3::zeros(),
        }
    }

    pub fn world_com(&self, node_pose: &Pose) -> Vec3 {
        let pose = node_pose * self.local_pose;
        (pose * nalgebra::Point3::from(self.local_com())).coords
    }

    /// Tight box around the primitive in its owning node's frame.
    pub fn node_aabb(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for axis in 0..3 {
            let mut d = Vec3::zeros();
            d[axis] = 1.0;
            hi[axis] = self.support_world(&Pose::identity(), &d)[axis];
            lo[axis] = self.support_world(&Pose::identity(), &(-d))[axis];
        }
        (lo, hi)
    }

    /// Radius of a sphere around the primitive's origin enclosing it.
    pub fn bounding_radius(&self) -> f64 {
        match &self.kind {
            PrimitiveKind::Box { half_extents } => half_extents.norm(),
            PrimitiveKind::Cylinder { radius, height } | PrimitiveKind::Cone { radius, height } => {
                (radius * radius + 0.25 * height * height).sqrt()
            }
            PrimitiveKind::Disk { radius, thickness } => {
                (radius * radius + 0.25 * thickness * thickness).sqrt()
            }
            PrimitiveKind::ConvexMesh { vertices } => {
                vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }
        }
    }
}

/// Axis-aligned box in node coordinates enclosing all primitives.
pub fn enclosing_box(prims: &[GeometryPrimitive]) -> Option<OrientedBox> {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in prims {
        let (a, b) = p.node_aabb();
        lo = lo.inf(&a);
        hi = hi.sup(&b);
    }
    if prims.is_empty() {
        return None;
    }
    OrientedBox::new((lo + hi) * 0.5, (hi - lo) * 0.5, nalgebra::Matrix3::identity()).ok()
}

fn rim_point(dir: &Vec3, radius: f64, z: f64) -> Vec3 {
    let r = (dir.x * dir.x + dir.y * dir.y).sqrt();
    if r > 0.0 {
        Vec3::new(radius * dir.x / r, radius * dir.y / r, z)
    } else {
        Vec3::new(0.0, 0.0, z)
    }
}

fn round_support(dir: &Vec3, radius: f64, half_height: f64) -> Vec3 {
    rim_point(dir, radius, if dir.z >= 0.0 { half_height } else { -half_height })
}

fn rim(radius: f64, z: f64) -> Vec<Vec3> {
    (0..RIM_SEGMENTS)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / RIM_SEGMENTS as f64;
            Vec3::new(radius * t.cos(), radius * t.sin(), z)
        })
        .collect()
}

fn mesh_is_solid(vertices: &[Vec3]) -> bool {
    if vertices.len() < 4 || vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
        return false;
    }
    let o = vertices[0];
    let Some(a) = vertices.iter().map(|v| v - o).max_by(|x, y| x.norm().total_cmp(&y.norm())) else {
        return false;
    };
    if a.norm() <= 1e-12 {
        return false;
    }
    let Some(b) = vertices
        .iter()
        .map(|v| a.cross(&(v - o)))
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
    else {
        return false;
    };
    if b.norm() <= 1e-12 {
        return false;
    }
    vertices.iter().any(|v| b.dot(&(v - o)).abs() > 1e-12 * a.norm() * b.norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(GeometryPrimitive::cuboid([1.0, 0.0, 1.0], Pose::identity(), 1.0).is_err());
        let flat = PrimitiveKind::ConvexMesh {
            vertices: vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
            ],
        };
        assert!(GeometryPrimitive::new(flat, Pose::identity(), 1.0).is_err());
    }

    #[test]
    fn cone_support_picks_apex_or_rim() {
        let c = GeometryPrimitive::new(PrimitiveKind::Cone { radius: 1.0, height: 2.0 }, Pose::identity(), 1.0)
            .unwrap();
        assert_eq!(c.support_local(&Vec3::z()), Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(c.support_local(&Vec3::x()), Vec3::new(1.0, 0.0, -1.0));
        assert_eq!(c.local_com(), Vec3::new(0.0, 0.0, -0.5));
    }

    #[test]
    fn node_aabb_respects_local_pose() {
        let p = GeometryPrimitive::cuboid(
            [1.0, 2.0, 3.0],
            super::super::pose_from_xyz_rpy([1.0, 0.0, 0.0], [0.0, 0.0, std::f64::consts::FRAC_PI_2]),
            1.0,
        )
        .unwrap();
        let (lo, hi) = p.node_aabb();
        assert!((lo - Vec3::new(0.0, -0.5, -1.5)).norm() < 1e-12);
        assert!((hi - Vec3::new(2.0, 0.5, 1.5)).norm() < 1e-12);
    }
}
