//! Geometric kernels shared by validation, goal synthesis and planning.
//!
//! All quantities are SI (meters, kilograms). Gravity is fixed to world -z.

mod bbox;
mod com;
mod gjk;
mod hull;
mod primitive;
mod region;

pub use bbox::{union_bbox_contained, OrientedBox, CONTAIN_TOL};
pub use com::{project_com, MassPoint};
pub use gjk::signed_distance3d;
pub use hull::{convex_hull_2d, overlap_region, polygon_area};
pub use primitive::{enclosing_box, GeometryPrimitive, PrimitiveKind, RIM_SEGMENTS};
pub use region::{sdf2d_eval, Region2D, SUPPORT_NORMAL_TOL};

use thiserror::Error;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Pose = nalgebra::Isometry3<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("degenerate hull: {0}")]
    DegenerateHull(String),
    #[error("regions do not overlap")]
    NoContact,
    #[error("total mass must be positive, got {0}")]
    InvalidMass(f64),
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
}

/// Rigid transform from a translation and roll/pitch/yaw angles.
pub fn pose_from_xyz_rpy(xyz: [f64; 3], rpy: [f64; 3]) -> Pose {
    Pose::from_parts(
        nalgebra::Translation3::new(xyz[0], xyz[1], xyz[2]),
        nalgebra::UnitQuaternion::from_euler_angles(rpy[0], rpy[1], rpy[2]),
    )
}

/// Planar transform: translation in the xy-plane followed by a yaw.
pub fn planar_pose(x: f64, y: f64, yaw: f64) -> Pose {
    pose_from_xyz_rpy([x, y, 0.0], [0.0, 0.0, yaw])
}
