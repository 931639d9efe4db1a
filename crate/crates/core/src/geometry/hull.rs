//! 3D convex hull by quickhull with conflict lists.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;

/// Degeneracy and visibility tolerance in meters.
pub const HULL_TOL: f64 = 1e-9;

struct Face {
    v: [usize; 3],
    normal: Vector3<f64>,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(pts: &[Point3<f64>], v: [usize; 3]) -> Face {
        let (a, b, c) = (pts[v[0]], pts[v[1]], pts[v[2]]);
        let n = (b - a).cross(&(c - a));
        let normal = n / n.norm();
        Face {
            v,
            normal,
            offset: normal.dot(&a.coords),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

/// Convex hull of the mesh vertices as a closed mesh with outward normals.
///
/// Only extreme points survive; points within [`HULL_TOL`] of a hull face
/// are treated as lying on it. Coplanar or collinear inputs are rejected.
pub fn convex_hull(mesh: &TriangleMesh) -> Result<TriangleMesh> {
    convex_hull_points(mesh.vertices())
}

pub fn convex_hull_points(pts: &[Point3<f64>]) -> Result<TriangleMesh> {
    if pts.len() < 4 {
        return Err(Error::Degenerate(format!(
            "convex hull needs at least 4 points, got {}",
            pts.len()
        )));
    }
    let scale = pts
        .iter()
        .map(|p| p.coords.amax())
        .fold(1.0_f64, f64::max);
    let eps = HULL_TOL * scale;

    let simplex = initial_simplex(pts, eps)?;
    let interior = Point3::from(
        simplex.iter().map(|&i| pts[i].coords).sum::<Vector3<f64>>() / 4.0,
    );

    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let [a, b, c, d] = simplex;
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let mut f = Face::new(pts, tri);
        if f.distance(&interior) > 0.0 {
            f = Face::new(pts, [tri[0], tri[2], tri[1]]);
        }
        add_face(&mut faces, &mut edges, f);
    }

    for (i, p) in pts.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.distance(p) > eps) {
            f.outside.push(i);
        }
    }

    let mut cursor = 0;
    loop {
        // Next face with a non-empty conflict list.
        let Some(fi) = (cursor..faces.len())
            .chain(0..cursor)
            .find(|&i| faces[i].alive && !faces[i].outside.is_empty())
        else {
            break;
        };
        cursor = fi;

        let eye = *faces[fi]
            .outside
            .iter()
            .max_by(|&&x, &&y| {
                faces[fi]
                    .distance(&pts[x])
                    .total_cmp(&faces[fi].distance(&pts[y]))
                    .then(y.cmp(&x))
            })
            .unwrap();
        let eye_p = pts[eye];

        // Flood the visible region from the conflict face.
        let mut visible = vec![fi];
        let mut is_visible: HashMap<usize, bool> = HashMap::from([(fi, true)]);
        let mut stack = vec![fi];
        while let Some(f) = stack.pop() {
            let v = faces[f].v;
            for k in 0..3 {
                let nb = edges[&(v[(k + 1) % 3], v[k])];
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let vis = faces[nb].distance(&eye_p) > eps;
                is_visible.insert(nb, vis);
                if vis {
                    visible.push(nb);
                    stack.push(nb);
                }
            }
        }

        let mut horizon = Vec::new();
        let mut orphans = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                let (p, q) = (v[k], v[(k + 1) % 3]);
                let nb = edges[&(q, p)];
                if !is_visible[&nb] {
                    horizon.push((p, q));
                }
            }
        }
        for &f in &visible {
            let v = faces[f].v;
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
            for k in 0..3 {
                edges.remove(&(v[k], v[(k + 1) % 3]));
            }
        }

        let first_new = faces.len();
        for (p, q) in horizon {
            add_face(&mut faces, &mut edges, Face::new(pts, [p, q, eye]));
        }
        for o in orphans {
            if o == eye {
                continue;
            }
            if let Some(f) = faces[first_new..]
                .iter_mut()
                .find(|f| f.distance(&pts[o]) > eps)
            {
                f.outside.push(o);
            }
        }
    }

    let mut remap: HashMap<usize, u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let tri = f.v.map(|i| {
            *remap.entry(i).or_insert_with(|| {
                vertices.push(pts[i]);
                (vertices.len() - 1) as u32
            })
        });
        triangles.push(tri);
    }
    TriangleMesh::new(vertices, triangles)
}

fn add_face(faces: &mut Vec<Face>, edges: &mut HashMap<(usize, usize), usize>, f: Face) {
    let id = faces.len();
    for k in 0..3 {
        edges.insert((f.v[k], f.v[(k + 1) % 3]), id);
    }
    faces.push(f);
}

fn initial_simplex(pts: &[Point3<f64>], eps: f64) -> Result<[usize; 4]> {
    // Most distant pair among the axis-extreme points.
    let mut extremes = Vec::with_capacity(6);
    for k in 0..3 {
        let min = (0..pts.len())
            .min_by(|&i, &j| pts[i][k].total_cmp(&pts[j][k]))
            .unwrap();
        let max = (0..pts.len())
            .max_by(|&i, &j| pts[i][k].total_cmp(&pts[j][k]))
            .unwrap();
        extremes.push(min);
        extremes.push(max);
    }
    let mut best = (0, 0, -1.0);
    for &i in &extremes {
        for &j in &extremes {
            let d = (pts[i] - pts[j]).norm_squared();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (a, b) = (best.0, best.1);
    if best.2.sqrt() <= eps {
        return Err(Error::Degenerate("all points coincide".into()));
    }

    let ab = (pts[b] - pts[a]).normalize();
    let line_dist = |p: &Point3<f64>| {
        let v = p - pts[a];
        (v - ab * v.dot(&ab)).norm()
    };
    let c = (0..pts.len())
        .max_by(|&i, &j| line_dist(&pts[i]).total_cmp(&line_dist(&pts[j])))
        .unwrap();
    if line_dist(&pts[c]) <= eps {
        return Err(Error::Degenerate("points are collinear".into()));
    }

    let n = (pts[b] - pts[a]).cross(&(pts[c] - pts[a])).normalize();
    let plane_dist = |p: &Point3<f64>| n.dot(&(p - pts[a])).abs();
    let d = (0..pts.len())
        .max_by(|&i, &j| plane_dist(&pts[i]).total_cmp(&plane_dist(&pts[j])))
        .unwrap();
    if plane_dist(&pts[d]) <= eps {
        return Err(Error::Degenerate("points are coplanar".into()));
    }
    Ok([a, b, c, d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::box_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_contains(hull: &TriangleMesh, pts: &[Point3<f64>]) {
        for [a, b, c] in hull.triangle_iter() {
            let n = (b - a).cross(&(c - a)).normalize();
            for p in pts {
                assert!(n.dot(&(p - a)) <= 1e-9, "point outside hull face");
            }
        }
    }

    fn is_closed(hull: &TriangleMesh) -> bool {
        let mut edges = HashMap::new();
        for t in hull.triangles() {
            for k in 0..3 {
                *edges.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        edges
            .iter()
            .all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
    }

    #[test]
    fn tetrahedron_is_its_own_hull() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let hull = convex_hull_points(&pts).unwrap();
        assert_eq!(hull.triangles().len(), 4);
        assert_eq!(hull.vertices().len(), 4);
        assert!(hull.signed_volume() > 0.0);
        assert!(is_closed(&hull));
    }

    #[test]
    fn cube_with_interior_point() {
        let cube = box_mesh(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        let mut pts = cube.vertices().to_vec();
        pts.push(Point3::new(0.5, 0.4, 0.6));
        let hull = convex_hull_points(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 8);
        assert_eq!(hull.triangles().len(), 12);
        assert!((hull.signed_volume() - 1.0).abs() < 1e-12);
        check_contains(&hull, &pts);
        assert!(is_closed(&hull));
    }

    #[test]
    fn sphere_points_are_all_extreme() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point3<f64>> = (0..100)
            .map(|_| loop {
                let v = Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let n = v.norm();
                if n > 0.1 && n <= 1.0 {
                    break Point3::from(v / n);
                }
            })
            .collect();
        // Oracle: on a sphere every point is extreme, since the tangent plane
        // at p separates p from every other point.
        for (i, p) in pts.iter().enumerate() {
            for (j, q) in pts.iter().enumerate() {
                if i != j {
                    assert!(p.coords.dot(&(q - p)) < 0.0);
                }
            }
        }
        let hull = convex_hull_points(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 100);
        let mut got: Vec<_> = hull.vertices().iter().map(|p| p.coords.as_slice().to_vec()).collect();
        let mut want: Vec<_> = pts.iter().map(|p| p.coords.as_slice().to_vec()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
        check_contains(&hull, &pts);
        assert!(is_closed(&hull));
    }

    #[test]
    fn coplanar_and_collinear_rejected() {
        let flat: Vec<_> = (0..10)
            .map(|i| Point3::new(i as f64, (i * i) as f64, 0.0))
            .collect();
        assert!(matches!(convex_hull_points(&flat), Err(Error::Degenerate(_))));
        let line: Vec<_> = (0..10).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(matches!(convex_hull_points(&line), Err(Error::Degenerate(_))));
    }

    #[test]
    fn random_clouds_are_contained() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pts: Vec<Point3<f64>> = (0..200)
                .map(|_| {
                    Point3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-0.5..0.5),
                        rng.random_range(0.0..0.3),
                    )
                })
                .collect();
            let hull = convex_hull_points(&pts).unwrap();
            check_contains(&hull, &pts);
            assert!(is_closed(&hull));
        }
    }
}
