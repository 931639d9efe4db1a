//! Proximity and intersection queries over triangle meshes.

use nalgebra::{Point3, Vector3};

use crate::geometry::{Aabb, TriangleMesh};

pub type Triangle = [Point3<f64>; 3];

pub fn triangle_normal(t: &Triangle) -> Vector3<f64> {
    (t[1] - t[0]).cross(&(t[2] - t[0]))
}

pub fn triangle_aabb(t: &Triangle) -> Aabb {
    Aabb::from_points(t.iter()).unwrap()
}

/// Segment where two triangles cross, or `None` when they are disjoint or
/// coplanar (within `eps` meters).
pub fn triangle_intersection(a: &Triangle, b: &Triangle, eps: f64) -> Option<(Point3<f64>, Point3<f64>)> {
    let na = triangle_normal(a);
    let nb = triangle_normal(b);
    let (la, lb) = (na.norm(), nb.norm());
    if la == 0.0 || lb == 0.0 {
        return None;
    }
    let (na, nb) = (na / la, nb / lb);

    let db = b.map(|p| na.dot(&(p - a[0])));
    if side(&db, eps)? {
        return None;
    }
    let da = a.map(|p| nb.dot(&(p - b[0])));
    if side(&da, eps)? {
        return None;
    }

    let dir = na.cross(&nb);
    if dir.norm() < 1e-12 {
        return None;
    }
    let sa = plane_crossing(a, &da, eps)?;
    let sb = plane_crossing(b, &db, eps)?;
    let o = sa.0;
    let proj = |p: &Point3<f64>| dir.dot(&(p - o));
    let (mut a0, mut a1) = (sa.0, sa.1);
    if proj(&a0) > proj(&a1) {
        std::mem::swap(&mut a0, &mut a1);
    }
    let (mut b0, mut b1) = (sb.0, sb.1);
    if proj(&b0) > proj(&b1) {
        std::mem::swap(&mut b0, &mut b1);
    }
    let lo = if proj(&a0) >= proj(&b0) { a0 } else { b0 };
    let hi = if proj(&a1) <= proj(&b1) { a1 } else { b1 };
    (proj(&lo) <= proj(&hi) + eps).then_some((lo, hi))
}

/// `Some(true)` when all distances lie strictly on one side, `None` when
/// the triangle is coplanar with the plane, `Some(false)` otherwise.
fn side(d: &[f64; 3], eps: f64) -> Option<bool> {
    if d.iter().all(|v| v.abs() <= eps) {
        return None;
    }
    Some(d.iter().all(|&v| v > eps) || d.iter().all(|&v| v < -eps))
}

fn plane_crossing(t: &Triangle, d: &[f64; 3], eps: f64) -> Option<(Point3<f64>, Point3<f64>)> {
    let mut pts: Vec<Point3<f64>> = Vec::with_capacity(3);
    for k in 0..3 {
        if d[k].abs() <= eps {
            pts.push(t[k]);
        }
    }
    for k in 0..3 {
        let j = (k + 1) % 3;
        if (d[k] > eps && d[j] < -eps) || (d[k] < -eps && d[j] > eps) {
            let s = d[k] / (d[k] - d[j]);
            pts.push(t[k] + (t[j] - t[k]) * s);
        }
    }
    match pts.len() {
        0 => None,
        1 => Some((pts[0], pts[0])),
        _ => {
            // Farthest pair.
            let mut best = (pts[0], pts[1], -1.0);
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let dd = (pts[i] - pts[j]).norm_squared();
                    if dd > best.2 {
                        best = (pts[i], pts[j], dd);
                    }
                }
            }
            Some((best.0, best.1))
        }
    }
}

/// Closest point on a triangle to `p`.
pub fn closest_point_on_triangle(p: &Point3<f64>, t: &Triangle) -> Point3<f64> {
    let (a, b, c) = (t[0], t[1], t[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Signed solid angle of a triangle seen from `p` (Van Oosterom-Strackee).
pub fn solid_angle(p: &Point3<f64>, t: &Triangle) -> f64 {
    let a = t[0] - p;
    let b = t[1] - p;
    let c = t[2] - p;
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(&c));
    let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
    2.0 * num.atan2(den)
}

#[derive(Debug, Clone)]
struct Node {
    bb: Aabb,
    /// Leaf: `start..start+count` into `order`; inner: children at `left`
    /// and `left + 1`... stored explicitly.
    left: u32,
    right: u32,
    start: u32,
    count: u32,
}

/// Bounding volume hierarchy over a mesh's triangles.
#[derive(Debug, Clone)]
pub struct MeshBvh {
    tris: Vec<Triangle>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

const LEAF_SIZE: usize = 4;

impl MeshBvh {
    pub fn new(mesh: &TriangleMesh) -> MeshBvh {
        Self::from_triangles(mesh.triangle_iter().collect())
    }

    pub fn from_triangles(tris: Vec<Triangle>) -> MeshBvh {
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let centroids: Vec<Point3<f64>> = tris
            .iter()
            .map(|t| Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0))
            .collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build(&tris, &centroids, &mut order, 0, tris.len(), &mut nodes);
        }
        MeshBvh { tris, order, nodes }
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.tris
    }

    pub fn aabb(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| n.bb)
    }

    /// Indices of triangles whose boxes overlap `query`.
    pub fn overlapping(&self, query: &Aabb, out: &mut Vec<usize>) {
        out.clear();
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !node.bb.intersects(query, 0.0) {
                continue;
            }
            if node.count > 0 {
                for k in node.start..node.start + node.count {
                    let ti = self.order[k as usize] as usize;
                    if triangle_aabb(&self.tris[ti]).intersects(query, 0.0) {
                        out.push(ti);
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
    }

    /// Unsigned distance from `p` to the surface.
    pub fn distance(&self, p: &Point3<f64>) -> f64 {
        let mut best = f64::INFINITY;
        if self.nodes.is_empty() {
            return best;
        }
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.bb.distance_to(p) >= best {
                continue;
            }
            if node.count > 0 {
                for k in node.start..node.start + node.count {
                    let t = &self.tris[self.order[k as usize] as usize];
                    let d = (closest_point_on_triangle(p, t) - p).norm();
                    best = best.min(d);
                }
            } else {
                let (l, r) = (node.left, node.right);
                let dl = self.nodes[l as usize].bb.distance_to(p);
                let dr = self.nodes[r as usize].bb.distance_to(p);
                // Visit the nearer child first.
                if dl < dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best
    }

    /// Generalized winding number of the surface around `p` (≈1 inside a
    /// closed outward-oriented mesh, ≈0 outside).
    pub fn winding_number(&self, p: &Point3<f64>) -> f64 {
        self.tris.iter().map(|t| solid_angle(p, t)).sum::<f64>() / (4.0 * std::f64::consts::PI)
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        match self.aabb() {
            Some(bb) if bb.distance_to(p) == 0.0 => self.winding_number(p) > 0.5,
            _ => false,
        }
    }

    /// Positive inside, negative outside.
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        let d = self.distance(p);
        if self.contains(p) {
            d
        } else {
            -d
        }
    }
}

fn build(
    tris: &[Triangle],
    centroids: &[Point3<f64>],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let bb = order[start..end]
        .iter()
        .map(|&i| triangle_aabb(&tris[i as usize]))
        .reduce(|a, b| a.union(&b))
        .unwrap();
    let id = nodes.len() as u32;
    nodes.push(Node {
        bb,
        left: 0,
        right: 0,
        start: start as u32,
        count: (end - start) as u32,
    });
    if end - start <= LEAF_SIZE {
        return id;
    }
    let ext = bb.extents();
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let mid = (start + end) / 2;
    order[start..end].sort_by(|&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let left = build(tris, centroids, order, start, mid, nodes);
    let right = build(tris, centroids, order, mid, end, nodes);
    let node = &mut nodes[id as usize];
    node.left = left;
    node.right = right;
    node.count = 0;
    id
}

/// Smallest vertical distance `z_upper - z_lower` over all points where
/// the XY projections of the two triangles overlap, or `None` if they do
/// not overlap. Triangles that are vertical in projection are skipped.
pub fn triangle_vertical_gap(upper: &Triangle, lower: &Triangle) -> Option<f64> {
    let pu = project_ccw(upper)?;
    let pl = project_ccw(lower)?;
    let mut poly: Vec<[f64; 2]> = pu.to_vec();
    let mut scratch = Vec::with_capacity(8);
    for k in 0..3 {
        let (a, b) = (pl[k], pl[(k + 1) % 3]);
        clip_half_plane(&mut poly, &mut scratch, a, b);
        if poly.is_empty() {
            return None;
        }
    }
    let zu = plane_height(upper)?;
    let zl = plane_height(lower)?;
    poly.iter().map(|p| zu(p) - zl(p)).min_by(f64::total_cmp)
}

fn project_ccw(t: &Triangle) -> Option<[[f64; 2]; 3]> {
    let p = t.map(|v| [v.x, v.y]);
    let cross = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    let scale = (t[1] - t[0]).norm() * (t[2] - t[0]).norm();
    if cross.abs() <= 1e-12 * scale {
        return None;
    }
    Some(if cross > 0.0 { p } else { [p[0], p[2], p[1]] })
}

/// Height of the triangle's plane as a function of `(x, y)`.
fn plane_height(t: &Triangle) -> Option<impl Fn(&[f64; 2]) -> f64> {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    if n.z == 0.0 {
        return None;
    }
    let o = t[0];
    Some(move |p: &[f64; 2]| o.z - (n.x * (p[0] - o.x) + n.y * (p[1] - o.y)) / n.z)
}

/// Keeps the part of the convex polygon left of the directed line `a -> b`.
fn clip_half_plane(poly: &mut Vec<[f64; 2]>, out: &mut Vec<[f64; 2]>, a: [f64; 2], b: [f64; 2]) {
    let side = |p: &[f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    out.clear();
    let n = poly.len();
    for k in 0..n {
        let cur = poly[k];
        let prev = poly[(k + n - 1) % n];
        let (sc, sp) = (side(&cur), side(&prev));
        if (sc >= 0.0) != (sp >= 0.0) {
            let t = sp / (sp - sc);
            out.push([prev[0] + (cur[0] - prev[0]) * t, prev[1] + (cur[1] - prev[1]) * t]);
        }
        if sc >= 0.0 {
            out.push(cur);
        }
    }
    std::mem::swap(poly, out);
}

/// How far `upper` can move straight down before touching `lower`: the
/// smallest vertical distance between the two surfaces over their
/// overlapping projections, or infinity if nothing lies below. Lower
/// geometry above `upper` counts too, so overlap or touching faces off by
/// rounding give a gap of at most zero.
pub fn vertical_gap(upper: &[Triangle], lower: &MeshBvh) -> f64 {
    let Some(lb) = lower.aabb() else {
        return f64::INFINITY;
    };
    let mut best = f64::INFINITY;
    let mut hits = Vec::new();
    for u in upper {
        let bb = triangle_aabb(u);
        let query = Aabb::new(
            Point3::new(bb.min.x, bb.min.y, lb.min.z),
            Point3::new(bb.max.x, bb.max.y, lb.max.z),
        );
        lower.overlapping(&query, &mut hits);
        for &i in &hits {
            if let Some(g) = triangle_vertical_gap(u, &lower.triangles()[i]) {
                best = best.min(g);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::box_mesh;

    #[test]
    fn crossing_triangles_give_segment() {
        let a = [
            Point3::new(-1.0, -1.0, 0.0),
            Point3::new(1.0, -1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let b = [
            Point3::new(0.0, 0.0, -1.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 2.0, 0.0),
        ];
        let (p, q) = triangle_intersection(&a, &b, 1e-12).unwrap();
        assert!(p.x.abs() < 1e-12 && q.x.abs() < 1e-12);
        assert!(p.z.abs() < 1e-12 && q.z.abs() < 1e-12);
        let (lo, hi) = (p.y.min(q.y), p.y.max(q.y));
        assert!((lo - 0.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn separated_and_coplanar_triangles() {
        let a = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let lifted = a.map(|p| p + Vector3::new(0.0, 0.0, 0.5));
        assert!(triangle_intersection(&a, &lifted, 1e-12).is_none());
        let shifted = a.map(|p| p + Vector3::new(0.2, 0.2, 0.0));
        assert!(triangle_intersection(&a, &shifted, 1e-12).is_none());
    }

    #[test]
    fn cube_distance_and_inside() {
        let cube = box_mesh(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        let bvh = MeshBvh::new(&cube);
        let c = Point3::new(0.5, 0.5, 0.5);
        assert!((bvh.distance(&c) - 0.5).abs() < 1e-12);
        assert!(bvh.contains(&c));
        assert!((bvh.winding_number(&c) - 1.0).abs() < 1e-9);
        let out = Point3::new(2.0, 0.5, 0.5);
        assert!(!bvh.contains(&out));
        assert!((bvh.signed_distance(&out) + 1.0).abs() < 1e-12);
        assert!((bvh.signed_distance(&Point3::new(0.9, 0.5, 0.5)) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn overlap_query() {
        let cube = box_mesh(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        let bvh = MeshBvh::new(&cube);
        let mut out = Vec::new();
        bvh.overlapping(&Aabb::new(Point3::new(0.2, 0.2, 0.9), Point3::new(0.4, 0.4, 1.1)), &mut out);
        out.sort();
        // Only the two top-face triangles.
        assert_eq!(out, vec![2, 3]);
    }

    fn ridge(along_x: bool, z0: f64, apex_up: bool) -> TriangleMesh {
        // Triangular prism of length 2 centered at the origin.
        let h = if apex_up { 0.5 } else { -0.5 };
        let prof = [(-0.5, z0), (0.5, z0), (0.0, z0 + h)];
        let mut v = Vec::new();
        for x in [-1.0, 1.0] {
            for (u, z) in prof {
                v.push(if along_x { Point3::new(x, u, z) } else { Point3::new(u, x, z) });
            }
        }
        let t = vec![[0, 2, 1], [3, 4, 5], [0, 1, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4], [2, 0, 3], [2, 3, 5]];
        TriangleMesh::new(v, t).unwrap()
    }

    fn column_extremes(mesh: &TriangleMesh, x: f64, y: f64) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in mesh.triangle_iter() {
            let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
            if n.z.abs() < 1e-12 {
                continue;
            }
            let z = t[0].z - (n.x * (x - t[0].x) + n.y * (y - t[0].y)) / n.z;
            let p = Point3::new(x, y, z);
            if (closest_point_on_triangle(&p, &t) - p).norm() < 1e-9 {
                lo = lo.min(z);
                hi = hi.max(z);
            }
        }
        lo.is_finite().then_some((lo, hi))
    }

    #[test]
    fn vertical_gap_between_boxes() {
        let lower = MeshBvh::new(&box_mesh(Point3::origin(), Point3::new(1.0, 1.0, 1.0)));
        let upper = box_mesh(Point3::new(0.5, 0.5, 1.25), Point3::new(2.0, 2.0, 2.0));
        let tris: Vec<Triangle> = upper.triangle_iter().collect();
        assert!((vertical_gap(&tris, &lower) - 0.25).abs() < 1e-12);
        let beside = box_mesh(Point3::new(1.5, 0.0, 1.0), Point3::new(2.0, 1.0, 2.0));
        let tris: Vec<Triangle> = beside.triangle_iter().collect();
        assert_eq!(vertical_gap(&tris, &lower), f64::INFINITY);
    }

    #[test]
    fn faces_touching_within_rounding_do_not_let_the_item_drop() {
        // The upper box sits a hair below the lower box's top face, with
        // the floor far below.
        let lower = MeshBvh::new(&TriangleMesh::merge(&[
            box_mesh(Point3::new(-5.0, -5.0, -1.0), Point3::new(5.0, 5.0, 0.0)),
            box_mesh(Point3::origin(), Point3::new(1.0, 1.0, 1.0)),
        ])
        .unwrap());
        let upper = box_mesh(Point3::new(0.2, 0.2, 1.0 - 1e-15), Point3::new(0.8, 0.8, 1.5));
        let tris: Vec<Triangle> = upper.triangle_iter().collect();
        assert!(vertical_gap(&tris, &lower) <= 0.0);
    }

    #[test]
    fn vertical_gap_of_crossing_ridges_matches_sampling() {
        // Ridge edges cross; no vertex of either lies over the other's apex.
        let lower = ridge(true, 0.0, true);
        let upper = ridge(false, 1.3, false);
        let tris: Vec<Triangle> = upper.triangle_iter().collect();
        let gap = vertical_gap(&tris, &MeshBvh::new(&lower));
        let mut sampled = f64::INFINITY;
        let n = 200;
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64);
                if let (Some((ulo, _)), Some((_, lhi))) = (column_extremes(&upper, x, y), column_extremes(&lower, x, y)) {
                    sampled = sampled.min(ulo - lhi);
                }
            }
        }
        assert!((sampled - 0.3).abs() < 1e-9, "{sampled}");
        assert!((gap - sampled).abs() < 1e-9, "{gap} vs {sampled}");
    }
}
