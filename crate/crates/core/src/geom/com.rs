use super::{GeomError, GeometryPrimitive, Pose, Region2D, Vec2, Vec3};

/// A point mass, usually the center of mass of one placed primitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassPoint {
    pub position: Vec3,
    pub mass: f64,
}

impl MassPoint {
    pub fn of(primitive: &GeometryPrimitive, node_pose: &Pose) -> Self {
        Self {
            position: primitive.world_com(node_pose),
            mass: primitive.mass,
        }
    }
}

/// Mass-weighted centroid of `points`, projected along gravity onto the
/// plane of `plane` and returned in plane coordinates.
pub fn project_com(points: &[MassPoint], plane: &Region2D) -> Result<Vec2, GeomError> {
    let total: f64 = points.iter().map(|p| p.mass).sum();
    if !(total > 0.0) {
        return Err(GeomError::InvalidMass(total));
    }
    let com = points.iter().map(|p| p.position * p.mass).sum::<Vec3>() / total;
    Ok(plane.to_plane(&com))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::pose_from_xyz_rpy;

    fn plane() -> Region2D {
        Region2D::rectangle(Pose::identity(), 10.0, 10.0).unwrap()
    }

    fn cube_at(x: f64, mass: f64) -> MassPoint {
        let c = GeometryPrimitive::cuboid([1.0; 3], Pose::identity(), mass).unwrap();
        MassPoint::of(&c, &pose_from_xyz_rpy([x, 0.3, 2.0], [0.0; 3]))
    }

    #[test]
    fn single_cube_projects_its_center() {
        let p = project_com(&[cube_at(0.7, 1.0)], &plane()).unwrap();
        assert!((p - Vec2::new(0.7, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn two_equal_cubes_midpoint() {
        let p = project_com(&[cube_at(0.0, 2.0), cube_at(2.0, 2.0)], &plane()).unwrap();
        assert!((p.x - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_is_an_error() {
        assert!(matches!(
            project_com(&[cube_at(0.0, 0.0)], &plane()),
            Err(GeomError::InvalidMass(_))
        ));
        assert!(project_com(&[], &plane()).is_err());
    }

    #[test]
    fn l_shape_matches_voxel_integration() {
        // uniform density 1000 kg/m^3: a 0.4x0.1x0.1 bar and a 0.1x0.1x0.3 post
        let rho = 1000.0;
        let bar = GeometryPrimitive::cuboid(
            [0.4, 0.1, 0.1],
            pose_from_xyz_rpy([0.2, 0.05, 0.05], [0.0; 3]),
            rho * 0.4 * 0.1 * 0.1,
        )
        .unwrap();
        let post = GeometryPrimitive::cuboid(
            [0.1, 0.1, 0.3],
            pose_from_xyz_rpy([0.05, 0.05, 0.25], [0.0; 3]),
            rho * 0.1 * 0.1 * 0.3,
        )
        .unwrap();
        let node = Pose::identity();
        let got = project_com(&[MassPoint::of(&bar, &node), MassPoint::of(&post, &node)], &plane()).unwrap();

        // 100x100x100 voxels over the bounding box [0,0.4]x[0,0.1]x[0,0.4]
        let n = 100;
        let (sx, sy, sz) = (0.4 / n as f64, 0.1 / n as f64, 0.4 / n as f64);
        let (mut mx, mut my, mut m) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) * sx;
            for j in 0..n {
                let y = (j as f64 + 0.5) * sy;
                for k in 0..n {
                    let z = (k as f64 + 0.5) * sz;
                    let in_bar = z < 0.1;
                    let in_post = x < 0.1 && z >= 0.1;
                    if in_bar || in_post {
                        mx += x;
                        my += y;
                        m += 1.0;
                    }
                }
            }
        }
        assert!((got.x - mx / m).abs() < 1e-4);
        assert!((got.y - my / m).abs() < 1e-4);
    }
}
