use super::{GeomError, Pose, Vec2, Vec3};

/// Maximum angle (rad) between a support surface normal and world +z.
pub const SUPPORT_NORMAL_TOL: f64 = 1e-6;

/// A planar region with a polygonal boundary, evaluated as a 2D signed
/// distance field.
///
/// `frame` places the plane in its owner's coordinates: the frame origin is a
/// point on the plane and its local z axis is the outward surface normal.
/// The boundary is expressed in the plane's xy coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Region2D {
    pub frame: Pose,
    boundary: Vec<Vec2>,
}

impl Region2D {
    /// Builds a region, reorienting the boundary counter-clockwise.
    ///
    /// Rejects polygons with fewer than three vertices, zero area or
    /// self-intersections.
    pub fn new(frame: Pose, mut boundary: Vec<Vec2>) -> Result<Self, GeomError> {
        if boundary.len() < 3 {
            return Err(GeomError::InvalidGeometry(format!(
                "region needs at least 3 vertices, got {}",
                boundary.len()
            )));
        }
        if boundary.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeomError::InvalidGeometry("non-finite vertex".into()));
        }
        let area = signed_area(&boundary);
        if area.abs() <= 1e-15 {
            return Err(GeomError::InvalidGeometry("region has zero area".into()));
        }
        if area < 0.0 {
            boundary.reverse();
        }
        if !is_simple(&boundary) {
            return Err(GeomError::InvalidGeometry(
                "region boundary self-intersects".into(),
            ));
        }
        Ok(Self { frame, boundary })
    }

    /// Axis-aligned rectangle centered on the frame origin.
    pub fn rectangle(frame: Pose, width: f64, depth: f64) -> Result<Self, GeomError> {
        let (hw, hd) = (0.5 * width, 0.5 * depth);
        Self::new(
            frame,
            vec![
                Vec2::new(-hw, -hd),
                Vec2::new(hw, -hd),
                Vec2::new(hw, hd),
                Vec2::new(-hw, hd),
            ],
        )
    }

    /// Regular polygon inscribed in a circle of `radius`.
    pub fn disk(frame: Pose, radius: f64, segments: usize) -> Result<Self, GeomError> {
        let pts = (0..segments)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / segments as f64;
                Vec2::new(radius * t.cos(), radius * t.sin())
            })
            .collect();
        Self::new(frame, pts)
    }

    pub fn boundary(&self) -> &[Vec2] {
        &self.boundary
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.boundary)
    }

    pub fn centroid(&self) -> Vec2 {
        let a = self.area();
        let n = self.boundary.len();
        let mut c = Vec2::zeros();
        for i in 0..n {
            let p = self.boundary[i];
            let q = self.boundary[(i + 1) % n];
            let cross = p.x * q.y - q.x * p.y;
            c += (p + q) * cross;
        }
        c / (6.0 * a)
    }

    /// Axis-aligned extent of the boundary as (min, max).
    pub fn extent(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for p in &self.boundary {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    /// Signed distance from `point` (plane coordinates) to the boundary:
    /// negative inside, zero on the boundary, positive outside.
    pub fn sdf(&self, point: Vec2) -> f64 {
        let n = self.boundary.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let d = segment_distance(point, self.boundary[i], self.boundary[(i + 1) % n]);
            best = best.min(d);
        }
        if best == 0.0 {
            return 0.0;
        }
        if winding_number(&self.boundary, point) != 0 {
            -best
        } else {
            best
        }
    }

    /// Same region with its frame composed onto `pose` (owner to world).
    pub fn transformed(&self, pose: &Pose) -> Self {
        Self {
            frame: pose * self.frame,
            boundary: self.boundary.clone(),
        }
    }

    /// Unit outward normal in the owner's coordinates.
    pub fn normal(&self) -> Vec3 {
        self.frame.rotation * Vec3::z()
    }

    /// Whether the plane faces up within [`SUPPORT_NORMAL_TOL`].
    pub fn faces_up(&self) -> bool {
        let cos = self.normal().z.clamp(-1.0, 1.0);
        cos.acos() <= SUPPORT_NORMAL_TOL
    }

    /// Expresses a point given in the owner's coordinates in plane coordinates,
    /// dropping the out-of-plane component (projection along the normal).
    pub fn to_plane(&self, p: &Vec3) -> Vec2 {
        let local = self.frame.inverse_transform_point(&(*p).into());
        Vec2::new(local.x, local.y)
    }

    /// Height of a point above the plane, along the normal.
    pub fn height_of(&self, p: &Vec3) -> f64 {
        self.frame.inverse_transform_point(&(*p).into()).z
    }
}

/// `sdf2d_eval`: checked signed-distance evaluation.
pub fn sdf2d_eval(region: &Region2D, point: Vec2) -> Result<f64, GeomError> {
    if region.area() <= 0.0 {
        return Err(GeomError::InvalidGeometry("degenerate region".into()));
    }
    Ok(region.sdf(point))
}

pub(crate) fn signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

fn cross(o: Vec2, a: Vec2, b: Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn winding_number(poly: &[Vec2], p: Vec2) -> i32 {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a.y <= p.y {
            if b.y > p.y && cross(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && cross(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (d1 == 0.0 && on(c, d, a))
        || (d2 == 0.0 && on(c, d, b))
        || (d3 == 0.0 && on(a, b, c))
        || (d4 == 0.0 && on(a, b, d))
}

fn is_simple(poly: &[Vec2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Region2D {
        Region2D::rectangle(Pose::identity(), 1.0, 1.0).unwrap()
    }

    #[test]
    fn unit_square_values() {
        let r = unit_square();
        assert_eq!(sdf2d_eval(&r, Vec2::new(0.0, 0.0)).unwrap(), -0.5);
        assert_eq!(sdf2d_eval(&r, Vec2::new(0.5, 0.0)).unwrap(), 0.0);
        assert_eq!(sdf2d_eval(&r, Vec2::new(1.5, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn corner_exterior_is_euclidean() {
        let r = unit_square();
        let d = r.sdf(Vec2::new(1.5, 1.5));
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let r = Region2D::new(
            Pose::identity(),
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(1.0, 0.0),
            ],
        )
        .unwrap();
        assert!(r.area() > 0.0);
        assert!(r.sdf(Vec2::new(0.5, 0.5)) < 0.0);
    }

    #[test]
    fn degenerate_regions_rejected() {
        let collinear = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        assert!(matches!(
            Region2D::new(Pose::identity(), collinear),
            Err(GeomError::InvalidGeometry(_))
        ));
        let bowtie = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(Region2D::new(Pose::identity(), bowtie).is_err());
    }

    #[test]
    fn non_convex_region_sign() {
        // L shape
        let r = Region2D::new(
            Pose::identity(),
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(2.0, 0.0),
                Vec2::new(2.0, 1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(1.0, 2.0),
                Vec2::new(0.0, 2.0),
            ],
        )
        .unwrap();
        assert!(r.sdf(Vec2::new(1.5, 1.5)) > 0.0);
        assert!(r.sdf(Vec2::new(0.5, 1.5)) < 0.0);
        assert!((r.area() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn tilted_surface_does_not_face_up() {
        let tilted = super::super::pose_from_xyz_rpy([0.0; 3], [1e-3, 0.0, 0.0]);
        let r = Region2D::rectangle(tilted, 1.0, 1.0).unwrap();
        assert!(!r.faces_up());
        assert!(unit_square().faces_up());
    }
}
