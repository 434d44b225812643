use super::region::signed_area;
use super::{GeomError, Pose, Region2D, Vec2, Vec3};

/// Minimal convex polygon containing `points`, counter-clockwise, with
/// collinear boundary points removed. The returned region has an identity
/// frame.
pub fn convex_hull_2d(points: &[Vec2]) -> Result<Region2D, GeomError> {
    let hull = hull_points(points);
    if hull.len() < 3 {
        return Err(GeomError::DegenerateHull(format!(
            "{} input points span fewer than 3 hull vertices",
            points.len()
        )));
    }
    Region2D::new(Pose::identity(), hull).map_err(|e| GeomError::DegenerateHull(e.to_string()))
}

/// Andrew's monotone chain. Returns fewer than 3 points for degenerate input.
pub(crate) fn hull_points(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Vec2, a: Vec2, b: Vec2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() >= 3 && signed_area(&lower).abs() <= 1e-18 {
        lower.truncate(2);
    }
    lower
}

pub fn polygon_area(pts: &[Vec2]) -> f64 {
    signed_area(pts).abs()
}

/// Convex hull of the intersection between a parent's supporting region and
/// a child's footprint projected along gravity onto the parent plane.
///
/// Both regions must carry frames in a common (world) coordinate system. The
/// result lives in the parent's frame.
pub fn overlap_region(parent_surface: &Region2D, child_footprint: &Region2D) -> Result<Region2D, GeomError> {
    let projected: Vec<Vec2> = child_footprint
        .boundary()
        .iter()
        .map(|p| {
            let world = child_footprint.frame * nalgebra::Point3::new(p.x, p.y, 0.0);
            parent_surface.to_plane(&Vec3::new(world.x, world.y, world.z))
        })
        .collect();
    let clip = hull_points(&projected);
    if clip.len() < 3 {
        return Err(GeomError::NoContact);
    }
    let clipped = clip_polygon(parent_surface.boundary(), &clip);
    let hull = hull_points(&clipped);
    if hull.len() < 3 || polygon_area(&hull) <= 1e-12 {
        return Err(GeomError::NoContact);
    }
    Region2D::new(parent_surface.frame, hull).map_err(|_| GeomError::NoContact)
}

/// Sutherland-Hodgman clipping of an arbitrary simple `subject` polygon by a
/// convex counter-clockwise `clip` polygon.
pub(crate) fn clip_polygon(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut output = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let side = |p: Vec2| (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        let input = std::mem::take(&mut output);
        let n = input.len();
        for j in 0..n {
            let cur = input[j];
            let prev = input[(j + n - 1) % n];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(intersect(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    output
}

fn intersect(p: Vec2, q: Vec2, sp: f64, sq: f64) -> Vec2 {
    let t = sp / (sp - sq);
    p + (q - p) * t
}
