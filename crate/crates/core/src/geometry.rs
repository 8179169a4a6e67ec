//! Rigid plane frames, PCA plane fitting and the 2D polygon machinery used to
//! bound planes, intersect them and outline vertical obstacles.

use std::collections::HashMap;

use nalgebra::{Matrix3, SymmetricEigen, Vector2, Vector3};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// Below this inclination the ascent direction is ill-defined and the plane
/// frame's x-axis follows world +x instead.
pub const HORIZONTAL_FRAME_TOLERANCE: f64 = 1.0 * std::f64::consts::PI / 180.0;

/// Planes whose normals are closer than this are treated as parallel.
pub const PARALLEL_TOLERANCE: f64 = 1.0 * std::f64::consts::PI / 180.0;

/// Rigid transform from a plane frame to the world frame.
///
/// Columns of `rotation` are the plane's x (ascent), y and z (normal) axes
/// expressed in world coordinates; `translation` is the plane origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Transform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Transform {
    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vec3::zeros() }
    }

    pub fn x_axis(&self) -> Vec3 {
        self.rotation.column(0).into_owned()
    }

    pub fn y_axis(&self) -> Vec3 {
        self.rotation.column(1).into_owned()
    }

    pub fn normal(&self) -> Vec3 {
        self.rotation.column(2).into_owned()
    }

    /// World point to plane coordinates (z is the signed height above the plane).
    pub fn to_local(&self, world: &Vec3) -> Vec3 {
        self.rotation.transpose() * (world - self.translation)
    }

    pub fn to_local_2d(&self, world: &Vec3) -> Vec2 {
        let l = self.to_local(world);
        Vec2::new(l.x, l.y)
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.rotation * local + self.translation
    }

    /// Lift an in-plane point onto the plane surface in world coordinates.
    pub fn lift(&self, p: &Vec2) -> Vec3 {
        self.to_world(&Vec3::new(p.x, p.y, 0.0))
    }

    /// Signed distance of a world point from the plane.
    pub fn height_of(&self, world: &Vec3) -> f64 {
        self.normal().dot(&(world - self.translation))
    }

    /// Heading of the plane x-axis in the world horizontal plane (yaw offset).
    pub fn heading(&self) -> f64 {
        let x = self.x_axis();
        x.y.atan2(x.x)
    }

    /// Angle between the plane normal and world +z.
    pub fn inclination(&self) -> f64 {
        self.normal().z.abs().clamp(0.0, 1.0).acos()
    }
}

/// Result of a PCA plane fit.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneFit {
    pub transform: Transform,
    pub inclination: f64,
    pub thickness: f64,
}

/// Build a right-handed plane frame from a normal and origin using the
/// ascent-direction convention.
pub fn frame_from_normal(normal: &Vec3, origin: Vec3) -> Transform {
    let mut z = normal.normalize();
    if z.z < 0.0 || (z.z == 0.0 && (z.x < 0.0 || (z.x == 0.0 && z.y < 0.0))) {
        z = -z;
    }
    let inclination = z.z.clamp(-1.0, 1.0).acos();
    let reference = if inclination < HORIZONTAL_FRAME_TOLERANCE { Vec3::x() } else { Vec3::z() };
    let mut x = reference - z * z.dot(&reference);
    if x.norm() < 1e-12 {
        x = Vec3::y() - z * z.y;
    }
    let x = x.normalize();
    let y = z.cross(&x);
    Transform { rotation: Matrix3::from_columns(&[x, y, z]), translation: origin }
}

/// Fit a plane through `points` by principal component analysis.
pub fn fit_plane(points: &[Vec3]) -> Result<PlaneFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!("plane fit needs 3 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let smallest = eig.eigenvalues[order[0]].max(0.0);
    let middle = eig.eigenvalues[order[1]].max(0.0);
    let largest = eig.eigenvalues[order[2]].max(0.0);
    if largest <= 0.0 || middle <= 1e-10 * largest {
        return Err(Error::DegenerateInput("points are collinear or coincident".into()));
    }
    let normal = eig.eigenvectors.column(order[0]).into_owned();
    let transform = frame_from_normal(&normal, centroid);
    let inclination = transform.inclination();
    Ok(PlaneFit { transform, inclination, thickness: smallest.sqrt() })
}

fn cross2(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Counter-clockwise, strictly convex polygon in plane coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon2D {
    vertices: Vec<Vec2>,
}

impl ConvexPolygon2D {
    /// Wrap vertices that are already counter-clockwise and convex.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateInput("polygon needs at least 3 vertices".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross2(&(b - a), &(c - b)) <= 0.0 {
                return Err(Error::DegenerateInput("polygon is not strictly convex and counter-clockwise".into()));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| cross2(&self.vertices[i], &self.vertices[(i + 1) % n])).sum::<f64>() * 0.5
    }

    /// Area centroid.
    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let mut acc = Vec2::zeros();
        let mut area2 = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = cross2(&a, &b);
            area2 += w;
            acc += (a + b) * w;
        }
        acc / (3.0 * area2)
    }

    /// Minimum over edges of the signed distance to the edge line; positive inside.
    pub fn signed_depth(&self, p: &Vec2) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let e = self.vertices[(i + 1) % n] - a;
                cross2(&e, &(p - a)) / e.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &Vec2, eps: f64) -> bool {
        self.signed_depth(p) >= -eps
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Parameter interval `[t0, t1]` of the line `origin + t * dir` inside the polygon.
    pub fn clip_line(&self, origin: &Vec2, dir: &Vec2) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let e = self.vertices[(i + 1) % n] - a;
            // inside iff cross(e, p - a) >= 0
            let num = cross2(&e, &(origin - a));
            let den = cross2(&e, dir);
            if den.abs() < 1e-15 {
                if num < 0.0 {
                    return None;
                }
                continue;
            }
            let t = -num / den;
            if den > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }

    /// Separating-axis overlap test.
    pub fn intersects(&self, other: &ConvexPolygon2D) -> bool {
        fn separated(a: &ConvexPolygon2D, b: &ConvexPolygon2D) -> bool {
            let n = a.vertices.len();
            (0..n).any(|i| {
                let p = a.vertices[i];
                let e = a.vertices[(i + 1) % n] - p;
                b.vertices.iter().all(|q| cross2(&e, &(q - p)) < 0.0)
            })
        }
        !separated(self, other) && !separated(other, self)
    }

    /// Area of the intersection with another convex polygon (Sutherland-Hodgman).
    pub fn intersection_area(&self, other: &ConvexPolygon2D) -> f64 {
        let mut output: Vec<Vec2> = self.vertices.clone();
        let n = other.vertices.len();
        for i in 0..n {
            if output.is_empty() {
                break;
            }
            let a = other.vertices[i];
            let e = other.vertices[(i + 1) % n] - a;
            let input = std::mem::take(&mut output);
            let m = input.len();
            for j in 0..m {
                let cur = input[j];
                let prev = input[(j + m - 1) % m];
                let cur_in = cross2(&e, &(cur - a)) >= 0.0;
                let prev_in = cross2(&e, &(prev - a)) >= 0.0;
                if cur_in != prev_in {
                    let d = cur - prev;
                    let t = -cross2(&e, &(prev - a)) / cross2(&e, &d);
                    output.push(prev + d * t);
                }
                if cur_in {
                    output.push(cur);
                }
            }
        }
        if output.len() < 3 {
            return 0.0;
        }
        let m = output.len();
        ((0..m).map(|i| cross2(&output[i], &output[(i + 1) % m])).sum::<f64>() * 0.5).max(0.0)
    }
}

/// Andrew's monotone chain hull; collinear points are dropped.
pub fn convex_hull(points: &[Vec2]) -> Result<ConvexPolygon2D> {
    let mut pts: Vec<Vec2> = points.iter().copied().filter(|p| p.x.is_finite() && p.y.is_finite()).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::DegenerateInput("convex hull needs 3 distinct points".into()));
    }
    let mut lower: Vec<Vec2> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross2(&(lower[lower.len() - 1] - lower[lower.len() - 2]), &(p - lower[lower.len() - 1])) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&(upper[upper.len() - 1] - upper[upper.len() - 2]), &(p - upper[upper.len() - 1])) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateInput("points are collinear".into()));
    }
    ConvexPolygon2D::new(lower)
}

/// Push every vertex outward along its direction from the polygon centroid.
pub fn expand_polygon(poly: &ConvexPolygon2D, margin: f64) -> ConvexPolygon2D {
    if margin <= 0.0 {
        return poly.clone();
    }
    let c = poly.centroid();
    let moved: Vec<Vec2> = poly
        .vertices()
        .iter()
        .map(|v| {
            let d = v - c;
            let len = d.norm();
            if len > 0.0 { v + d * (margin / len) } else { *v }
        })
        .collect();
    // radial displacement can break strict convexity at nearly-flat vertices
    ConvexPolygon2D::new(moved.clone()).or_else(|_| convex_hull(&moved)).unwrap_or_else(|_| poly.clone())
}

/// Segment in world coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment3D {
    pub a: Vec3,
    pub b: Vec3,
}

impl Segment3D {
    pub fn new(a: Vec3, b: Vec3) -> Result<Self> {
        if (b - a).norm() <= 1e-6 {
            return Err(Error::DegenerateInput("segment endpoints coincide".into()));
        }
        Ok(Self { a, b })
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn point_at(&self, t: f64) -> Vec3 {
        self.a + (self.b - self.a) * t
    }

    pub fn midpoint(&self) -> Vec3 {
        self.point_at(0.5)
    }
}

/// A plane frame together with its (unexpanded) convex boundary.
#[derive(Clone, Copy, Debug)]
pub struct PlanePatch<'a> {
    pub transform: &'a Transform,
    pub boundary: &'a ConvexPolygon2D,
}

/// Common segment of two planes' expanded boundaries along their intersection line.
pub fn plane_polygon_intersection(a: PlanePatch<'_>, b: PlanePatch<'_>, margin: f64, min_length: f64) -> Option<Segment3D> {
    let na = a.transform.normal();
    let nb = b.transform.normal();
    let d = na.cross(&nb);
    let sin = d.norm();
    if sin < PARALLEL_TOLERANCE.sin() {
        return None;
    }
    let ha = na.dot(&a.transform.translation);
    let hb = nb.dot(&b.transform.translation);
    let base = (nb.cross(&d) * ha + d.cross(&na) * hb) / (sin * sin);
    let dir = d / sin;

    let clip = |patch: &PlanePatch<'_>| {
        let poly = expand_polygon(patch.boundary, margin);
        let o = patch.transform.to_local_2d(&base);
        let local_dir = patch.transform.rotation.transpose() * dir;
        poly.clip_line(&o, &Vec2::new(local_dir.x, local_dir.y))
    };
    let (a0, a1) = clip(&a)?;
    let (b0, b1) = clip(&b)?;
    let t0 = a0.max(b0);
    let t1 = a1.min(b1);
    if t1 - t0 < min_length {
        return None;
    }
    let p = base + dir * t0;
    let q = base + dir * t1;
    let ordered = if (p.x, p.y, p.z) <= (q.x, q.y, q.z) { (p, q) } else { (q, p) };
    Segment3D::new(ordered.0, ordered.1).ok()
}

fn circumradius(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    let ab = (b - a).norm();
    let bc = (c - b).norm();
    let ca = (a - c).norm();
    let area2 = cross2(&(b - a), &(c - a)).abs();
    if area2 <= 0.0 {
        return f64::INFINITY;
    }
    ab * bc * ca / (2.0 * area2)
}

/// Indices of the points lying on the boundary of the alpha shape of `points`.
///
/// Triangles of the Delaunay triangulation with circumradius at most `alpha`
/// form the alpha complex; points on an edge used by exactly one kept triangle,
/// and points not covered by any kept triangle, are boundary points.
pub fn alpha_shape_boundary(points: &[Vec2], alpha: f64) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::DegenerateInput("alpha shape of an empty set".into()));
    }
    let first = points[0];
    if points.iter().all(|p| (p - first).norm() == 0.0) {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    if points.len() <= 3 {
        return Ok((0..points.len()).collect());
    }
    let dpts: Vec<delaunator::Point> = points.iter().map(|p| delaunator::Point { x: p.x, y: p.y }).collect();
    let tri = delaunator::triangulate(&dpts);
    if tri.triangles.is_empty() {
        // collinear input: everything is boundary
        return Ok((0..points.len()).collect());
    }
    let mut in_any = vec![false; points.len()];
    let mut covered = vec![false; points.len()];
    let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
    for t in tri.triangles.chunks_exact(3) {
        let (i, j, k) = (t[0], t[1], t[2]);
        in_any[i] = true;
        in_any[j] = true;
        in_any[k] = true;
        if circumradius(&points[i], &points[j], &points[k]) > alpha {
            continue;
        }
        covered[i] = true;
        covered[j] = true;
        covered[k] = true;
        for (u, v) in [(i, j), (j, k), (k, i)] {
            *edge_count.entry((u.min(v), u.max(v))).or_insert(0) += 1;
        }
    }
    let mut boundary = vec![false; points.len()];
    for ((u, v), count) in edge_count {
        if count == 1 {
            boundary[u] = true;
            boundary[v] = true;
        }
    }
    Ok((0..points.len()).filter(|&i| boundary[i] || (in_any[i] && !covered[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid_points(f: impl Fn(f64, f64) -> Vec3) -> Vec<Vec3> {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push(f(i as f64 * 0.1, j as f64 * 0.1));
            }
        }
        pts
    }

    #[test]
    fn horizontal_plane_fit() {
        let fit = fit_plane(&grid_points(|x, y| Vec3::new(x, y, 0.0))).unwrap();
        assert!(fit.inclination.abs() < 1e-12);
        assert!((fit.transform.normal() - Vec3::z()).norm() < 1e-12);
        assert!((fit.transform.x_axis() - Vec3::x()).norm() < 1e-12);
        assert!(fit.thickness < 1e-9);
    }

    #[test]
    fn inclined_plane_fit_points_uphill() {
        let t = (30.0f64).to_radians().tan();
        let fit = fit_plane(&grid_points(|x, y| Vec3::new(x, y, x * t))).unwrap();
        assert!((fit.inclination - 30f64.to_radians()).abs() < 1e-6);
        let x = fit.transform.x_axis();
        assert!(x.z > 0.0 && x.x > 0.0);
        assert!(fit.transform.heading().abs() < 1e-9);
        let r = fit.transform.rotation;
        assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-9);
        assert!((r.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vertical_wall_fit() {
        let fit = fit_plane(&grid_points(|y, z| Vec3::new(0.0, y, z))).unwrap();
        assert!((fit.inclination - PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn collinear_points_are_rejected() {
        let pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(matches!(fit_plane(&pts), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.2, 0.7),
            Vec2::new(0.5, 0.0),
        ];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 4);
        assert!((hull.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hull_of_triangle_is_itself() {
        let tri = vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0)];
        let hull = convex_hull(&tri).unwrap();
        assert_eq!(hull.vertices().len(), 3);
        for v in &tri {
            assert!(hull.vertices().contains(v));
        }
    }

    #[test]
    fn hull_rejects_collinear() {
        let pts: Vec<Vec2> = (0..5).map(|i| Vec2::new(i as f64, i as f64)).collect();
        assert!(convex_hull(&pts).is_err());
    }

    #[test]
    fn expanding_a_square() {
        let sq = convex_hull(&[Vec2::new(-0.5, -0.5), Vec2::new(0.5, -0.5), Vec2::new(0.5, 0.5), Vec2::new(-0.5, 0.5)]).unwrap();
        assert_eq!(expand_polygon(&sq, 0.0), sq);
        let big = expand_polygon(&sq, 0.1);
        for v in big.vertices() {
            assert!((v.norm() - (0.5f64.sqrt() + 0.1)).abs() < 1e-12);
        }
    }

    #[test]
    fn clip_line_through_square() {
        let sq = convex_hull(&[Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(2.0, 1.0), Vec2::new(0.0, 1.0)]).unwrap();
        let (t0, t1) = sq.clip_line(&Vec2::new(-1.0, 0.5), &Vec2::new(1.0, 0.0)).unwrap();
        assert!((t0 - 1.0).abs() < 1e-12 && (t1 - 3.0).abs() < 1e-12);
        assert!(sq.clip_line(&Vec2::new(-1.0, 2.0), &Vec2::new(1.0, 0.0)).is_none());
    }

    #[test]
    fn intersection_area_of_offset_squares() {
        let a = convex_hull(&[Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(2.0, 2.0), Vec2::new(0.0, 2.0)]).unwrap();
        let b = convex_hull(&[Vec2::new(1.0, 1.0), Vec2::new(3.0, 1.0), Vec2::new(3.0, 3.0), Vec2::new(1.0, 3.0)]).unwrap();
        assert!((a.intersection_area(&b) - 1.0).abs() < 1e-12);
        assert!(a.intersects(&b));
    }

    #[test]
    fn alpha_shape_small_sets() {
        let tri = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert_eq!(alpha_shape_boundary(&tri, 0.1).unwrap(), vec![0, 1, 2]);
        let sq = vec![Vec2::new(0.0, 0.0), Vec2::new(0.1, 0.0), Vec2::new(0.1, 0.1), Vec2::new(0.0, 0.1)];
        assert_eq!(alpha_shape_boundary(&sq, 0.2).unwrap(), vec![0, 1, 2, 3]);
        let same = vec![Vec2::new(1.0, 1.0); 5];
        assert!(alpha_shape_boundary(&same, 0.2).is_err());
    }
}
