use nalgebra::Matrix3;

use super::{GeomError, Pose, Vec3};

/// Tolerance (m) for corner containment.
pub const CONTAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedBox {
    pub center: Vec3,
    pub half_extents: Vec3,
    /// Columns are the box axes.
    pub rotation: Matrix3<f64>,
}

impl OrientedBox {
    pub fn new(center: Vec3, half_extents: Vec3, rotation: Matrix3<f64>) -> Result<Self, GeomError> {
        if half_extents.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(GeomError::InvalidGeometry(format!(
                "box half-extents must be positive, got {half_extents:?}"
            )));
        }
        let err = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if err > 1e-9 {
            return Err(GeomError::InvalidGeometry(format!(
                "box rotation is not orthonormal (error {err:e})"
            )));
        }
        Ok(Self { center, half_extents, rotation })
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        let mut k = 0;
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let local = Vec3::new(sx * self.half_extents.x, sy * self.half_extents.y, sz * self.half_extents.z);
                    out[k] = self.center + self.rotation * local;
                    k += 1;
                }
            }
        }
        out
    }

    /// Box expressed in the frame that `pose` maps into.
    pub fn transformed(&self, pose: &Pose) -> Self {
        let rot = pose.rotation.to_rotation_matrix();
        Self {
            center: (pose * nalgebra::Point3::from(self.center)).coords,
            half_extents: self.half_extents,
            rotation: rot.matrix() * self.rotation,
        }
    }

    /// Whether `p` lies inside the box, allowing `tol` slack on each face.
    pub fn contains_point(&self, p: &Vec3, tol: f64) -> bool {
        let local = self.rotation.transpose() * (p - self.center);
        (0..3).all(|i| local[i].abs() <= self.half_extents[i] + tol)
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }
}

/// Whether the parent box encloses the union of the children boxes, decided
/// by corner containment with [`CONTAIN_TOL`].
pub fn union_bbox_contained(parent: &OrientedBox, children: &[OrientedBox]) -> bool {
    children
        .iter()
        .all(|c| c.corners().iter().all(|p| parent.contains_point(p, CONTAIN_TOL)))
}
