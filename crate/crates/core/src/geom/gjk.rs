//! Signed distance between convex primitives.
//!
//! Separation is computed with GJK on the Minkowski difference; penetration
//! depth with EPA seeded from the final GJK simplex. Both run on exact
//! support functions, so polytopes converge to round-off and curved shapes
//! to the stated tolerances.

use nalgebra::{Matrix2, Matrix3, Translation3};

use super::{GeomError, GeometryPrimitive, Pose, Vec3};

const GJK_MAX_ITERS: usize = 128;
const GJK_REL_TOL: f64 = 1e-12;
const EPA_MAX_ITERS: usize = 256;
const EPA_TOL: f64 = 1e-10;

struct Placed<'a> {
    prim: &'a GeometryPrimitive,
    pose: Pose,
}

impl Placed<'_> {
    fn support(&self, dir: &Vec3) -> Vec3 {
        let local = self.pose.rotation.inverse_transform_vector(dir);
        (self.pose * nalgebra::Point3::from(self.prim.support_local(&local))).coords
    }
}

struct Minkowski<'a> {
    a: Placed<'a>,
    b: Placed<'a>,
}

impl Minkowski<'_> {
    fn support(&self, dir: &Vec3) -> Vec3 {
        self.a.support(dir) - self.b.support(&-dir)
    }
}

/// Signed distance between primitive `a` on a node at `pose_a` and `b` on a
/// node at `pose_b`: positive separation, negative penetration depth.
///
/// The result does not depend on argument order.
pub fn signed_distance3d(
    a: &GeometryPrimitive,
    pose_a: &Pose,
    b: &GeometryPrimitive,
    pose_b: &Pose,
) -> Result<f64, GeomError> {
    a.validate()?;
    b.validate()?;
    let (a, pose_a, b, pose_b) = if order_key(a, pose_a) <= order_key(b, pose_b) {
        (a, pose_a, b, pose_b)
    } else {
        (b, pose_b, a, pose_a)
    };
    let wa = pose_a * a.local_pose;
    let wb = pose_b * b.local_pose;
    // work relative to a's center for conditioning
    let shift = Translation3::from(-wa.translation.vector);
    let m = Minkowski {
        a: Placed { prim: a, pose: shift * wa },
        b: Placed { prim: b, pose: shift * wb },
    };
    Ok(match gjk(&m) {
        Gjk::Separated(d) => d,
        Gjk::Overlap(simplex) => -epa(&m, simplex),
    })
}

fn order_key(p: &GeometryPrimitive, pose: &Pose) -> Vec<u64> {
    let mut key: Vec<u64> = Vec::with_capacity(24);
    key.push(p.kind.name().len() as u64);
    key.extend(p.kind.name().bytes().map(u64::from));
    let mut push = |v: f64| key.push(v.to_bits());
    match &p.kind {
        super::PrimitiveKind::Box { half_extents } => half_extents.iter().for_each(|v| push(*v)),
        super::PrimitiveKind::Cylinder { radius, height } | super::PrimitiveKind::Cone { radius, height } => {
            push(*radius);
            push(*height);
        }
        super::PrimitiveKind::Disk { radius, thickness } => {
            push(*radius);
            push(*thickness);
        }
        super::PrimitiveKind::ConvexMesh { vertices } => vertices.iter().flat_map(|v| v.iter()).for_each(|v| push(*v)),
    }
    for pz in [pose, &p.local_pose] {
        pz.translation.vector.iter().for_each(|v| push(*v));
        pz.rotation.coords.iter().for_each(|v| push(*v));
    }
    key
}

enum Gjk {
    Separated(f64),
    Overlap(Vec<Vec3>),
}

fn gjk(m: &Minkowski) -> Gjk {
    let init_dir = {
        let d = m.a.pose.translation.vector - m.b.pose.translation.vector;
        if d.norm_squared() > 0.0 {
            d
        } else {
            Vec3::x()
        }
    };
    let mut simplex = vec![m.support(&init_dir)];
    let mut v = simplex[0];
    for _ in 0..GJK_MAX_ITERS {
        let vv = v.norm_squared();
        if vv <= 1e-24 {
            return Gjk::Overlap(simplex);
        }
        let w = m.support(&-v);
        if vv - v.dot(&w) <= GJK_REL_TOL * vv {
            return Gjk::Separated(vv.sqrt());
        }
        if simplex.iter().any(|s| (s - w).norm_squared() <= 1e-24) {
            return Gjk::Separated(vv.sqrt());
        }
        simplex.push(w);
        let (closest, reduced) = closest_on_simplex(&simplex);
        simplex = reduced;
        if simplex.len() == 4 {
            return Gjk::Overlap(simplex);
        }
        if closest.norm_squared() >= vv {
            return Gjk::Separated(vv.sqrt());
        }
        v = closest;
    }
    Gjk::Separated(v.norm())
}

/// Point of the simplex nearest the origin and the smallest face carrying it.
fn closest_on_simplex(pts: &[Vec3]) -> (Vec3, Vec<Vec3>) {
    let n = pts.len();
    let mut best: Option<(f64, Vec3, u32)> = None;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let Some(lambda) = affine_projection(&idx.iter().map(|&i| pts[i]).collect::<Vec<_>>()) else {
            continue;
        };
        if lambda.iter().any(|l| *l <= 0.0) {
            continue;
        }
        let p: Vec3 = idx.iter().zip(&lambda).map(|(&i, l)| pts[i] * *l).sum();
        let d = p.norm_squared();
        let better = match &best {
            None => true,
            Some((bd, _, bm)) => d < *bd || (d == *bd && mask.count_ones() < bm.count_ones()),
        };
        if better {
            best = Some((d, p, mask));
        }
    }
    match best {
        Some((_, p, mask)) => (p, (0..n).filter(|i| mask & (1 << i) != 0).map(|i| pts[i]).collect()),
        None => {
            let i = (0..n)
                .min_by(|&i, &j| pts[i].norm_squared().total_cmp(&pts[j].norm_squared()))
                .unwrap_or(0);
            (pts[i], vec![pts[i]])
        }
    }
}

/// Barycentric coordinates of the origin's projection onto the affine hull
/// of `pts`, or `None` when the points are affinely dependent.
fn affine_projection(pts: &[Vec3]) -> Option<Vec<f64>> {
    let p0 = pts[0];
    match pts.len() {
        1 => Some(vec![1.0]),
        2 => {
            let e = pts[1] - p0;
            let ee = e.norm_squared();
            if ee <= 1e-24 {
                return None;
            }
            let t = -e.dot(&p0) / ee;
            Some(vec![1.0 - t, t])
        }
        3 => {
            let (e1, e2) = (pts[1] - p0, pts[2] - p0);
            let g = Matrix2::new(e1.dot(&e1), e1.dot(&e2), e1.dot(&e2), e2.dot(&e2));
            let det = g.determinant();
            if det <= 1e-12 * g[(0, 0)] * g[(1, 1)] || det <= 1e-30 {
                return None;
            }
            let rhs = nalgebra::Vector2::new(-e1.dot(&p0), -e2.dot(&p0));
            let t = g.try_inverse()? * rhs;
            Some(vec![1.0 - t.x - t.y, t.x, t.y])
        }
        4 => {
            let e = Matrix3::from_columns(&[pts[1] - p0, pts[2] - p0, pts[3] - p0]);
            let det = e.determinant();
            let scale = (pts[1] - p0).norm() * (pts[2] - p0).norm() * (pts[3] - p0).norm();
            if det.abs() <= 1e-10 * scale || scale <= 1e-30 {
                return None;
            }
            let t = e.try_inverse()? * (-p0);
            Some(vec![1.0 - t.x - t.y - t.z, t.x, t.y, t.z])
        }
        _ => None,
    }
}

struct Face {
    v: [usize; 3],
    normal: Vec3,
    dist: f64,
}

fn make_face(pts: &[Vec3], v: [usize; 3], interior: &Vec3) -> Option<Face> {
    let (a, b, c) = (pts[v[0]], pts[v[1]], pts[v[2]]);
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len <= 1e-18 {
        return None;
    }
    let mut normal = n / len;
    let mut v = v;
    if normal.dot(&(a - interior)) < 0.0 {
        normal = -normal;
        v.swap(1, 2);
    }
    Some(Face { v, normal, dist: normal.dot(&a) })
}

fn epa(m: &Minkowski, simplex: Vec<Vec3>) -> f64 {
    let Some(mut pts) = inflate(m, simplex) else {
        return 0.0;
    };
    let interior = pts.iter().sum::<Vec3>() / 4.0;
    let mut faces: Vec<Face> = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
        .into_iter()
        .filter_map(|v| make_face(&pts, v, &interior))
        .collect();
    if faces.len() < 4 {
        return 0.0;
    }
    let mut best = 0.0;
    for _ in 0..EPA_MAX_ITERS {
        let Some(face) = faces.iter().min_by(|a, b| a.dist.total_cmp(&b.dist)) else {
            break;
        };
        best = face.dist.max(0.0);
        let normal = face.normal;
        let w = m.support(&normal);
        let wd = normal.dot(&w);
        if wd - face.dist <= EPA_TOL + 1e-9 * face.dist.abs() {
            return best;
        }
        if pts.iter().any(|p| (p - w).norm_squared() <= 1e-24) {
            return best;
        }
        pts.push(w);
        let wi = pts.len() - 1;
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut kept = Vec::with_capacity(faces.len());
        for f in faces.drain(..) {
            if f.normal.dot(&(w - pts[f.v[0]])) > 1e-12 {
                for (a, b) in [(f.v[0], f.v[1]), (f.v[1], f.v[2]), (f.v[2], f.v[0])] {
                    if let Some(k) = horizon.iter().position(|&(x, y)| x == b && y == a) {
                        horizon.swap_remove(k);
                    } else {
                        horizon.push((a, b));
                    }
                }
            } else {
                kept.push(f);
            }
        }
        faces = kept;
        for (a, b) in horizon {
            if let Some(f) = make_face(&pts, [a, b, wi], &interior) {
                faces.push(f);
            }
        }
        if faces.is_empty() {
            return best;
        }
    }
    faces.iter().map(|f| f.dist).fold(best, f64::min).max(0.0)
}

/// Grows a GJK terminal simplex into a full tetrahedron of Minkowski points.
fn inflate(m: &Minkowski, mut pts: Vec<Vec3>) -> Option<Vec<Vec3>> {
    let axes = [Vec3::x(), Vec3::y(), Vec3::z(), -Vec3::x(), -Vec3::y(), -Vec3::z()];
    if pts.len() == 1 {
        for d in &axes {
            let w = m.support(d);
            if (w - pts[0]).norm() > 1e-9 {
                pts.push(w);
                break;
            }
        }
    }
    if pts.len() == 2 {
        let d = (pts[1] - pts[0]).normalize();
        let axis = axes[..3]
            .iter()
            .min_by(|a, b| a.dot(&d).abs().total_cmp(&b.dot(&d).abs()))
            .copied()?;
        let perp = d.cross(&axis).normalize();
        let rot = nalgebra::UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(d), std::f64::consts::PI / 3.0);
        let mut dir = perp;
        for _ in 0..6 {
            let w = m.support(&dir);
            let off = (w - pts[0]) - d * d.dot(&(w - pts[0]));
            if off.norm() > 1e-9 {
                pts.push(w);
                break;
            }
            dir = rot * dir;
        }
    }
    if pts.len() == 3 {
        let n = (pts[1] - pts[0]).cross(&(pts[2] - pts[0]));
        if n.norm() <= 1e-18 {
            return None;
        }
        for dir in [n, -n] {
            let w = m.support(&dir);
            if n.normalize().dot(&(w - pts[0])).abs() > 1e-9 {
                pts.push(w);
                break;
            }
        }
    }
    (pts.len() == 4).then_some(pts)
}
