//! Incremental 3D convex hull with outside-set bookkeeping.

use std::collections::HashSet;

use serde::Serialize;

use super::LatticeError;
use crate::geom::{Aabb, HalfSpace, Vec3};
use crate::mesh::{box_mesh, TriMesh};

/// Convex polytope stored both as half-spaces and as its vertex set.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexPolytope {
    pub planes: Vec<HalfSpace>,
    pub vertices: Vec<Vec3>,
    /// Triangulated boundary, indices into `vertices`, outward winding.
    pub facets: Vec<[u32; 3]>,
}

impl ConvexPolytope {
    pub fn from_aabb(b: &Aabb) -> Self {
        let mesh = box_mesh(b);
        let axes = [Vec3::x(), Vec3::y(), Vec3::z()];
        let mut planes = Vec::with_capacity(6);
        for (a, axis) in axes.iter().enumerate() {
            planes.push(HalfSpace::new(-axis, -b.min[a]).unwrap());
            planes.push(HalfSpace::new(*axis, b.max[a]).unwrap());
        }
        Self {
            planes,
            vertices: mesh.vertices,
            facets: mesh.triangles,
        }
    }

    /// Largest violation of any plane by `p`; `<= 0` means inside.
    pub fn max_violation(&self, p: &Vec3) -> f64 {
        self.planes
            .iter()
            .map(|h| h.signed_distance(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.max_violation(p) <= tol
    }

    pub fn to_mesh(&self) -> TriMesh {
        TriMesh::new(self.vertices.clone(), self.facets.clone())
    }

    pub fn volume(&self) -> f64 {
        self.to_mesh().signed_volume()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter()).expect("polytope has vertices")
    }
}

struct Face {
    v: [usize; 3],
    normal: Vec3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[Vec3], v: [usize; 3]) -> Self {
        let [a, b, c] = v.map(|i| points[i]);
        let n = (b - a).cross(&(c - a));
        let normal = n / n.norm();
        Self {
            v,
            normal,
            offset: normal.dot(&a),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Convex hull of a point set.
///
/// Points within a relative tolerance of an existing facet are treated as
/// lying on it, so coplanar input (box corners, face centres) produces no
/// sliver facets. Coplanar facets are merged into one half-space.
pub fn convex_hull(points: &[Vec3]) -> Result<ConvexPolytope, LatticeError> {
    if points.len() < 4 {
        return Err(LatticeError::DegenerateInput(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return Err(LatticeError::DegenerateInput("non-finite point".into()));
    }
    let bbox = Aabb::from_points(points.iter()).unwrap();
    let scale = bbox.extent().amax().max(f64::MIN_POSITIVE);
    let eps = 1e-10 * scale;

    let simplex = initial_simplex(points, scale)?;
    let mut faces: Vec<Face> = Vec::new();
    {
        let [a, b, c, d] = simplex;
        let base = Face::new(points, [a, b, c]);
        let tris = if base.distance(&points[d]) > 0.0 {
            [[a, c, b], [a, b, d], [b, c, d], [c, a, d]]
        } else {
            [[a, b, c], [a, d, b], [b, d, c], [c, d, a]]
        };
        faces.extend(tris.iter().map(|t| Face::new(points, *t)));
    }
    let in_simplex: HashSet<usize> = simplex.into_iter().collect();
    for i in (0..points.len()).filter(|i| !in_simplex.contains(i)) {
        assign(&mut faces, 0, i, points, eps);
    }

    while let Some(fi) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) {
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&x, &&y| {
                faces[fi]
                    .distance(&points[x])
                    .total_cmp(&faces[fi].distance(&points[y]))
            })
            .unwrap();
        let p = points[apex];
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&k| faces[k].alive && faces[k].distance(&p) > eps)
            .collect();
        let mut edges = HashSet::new();
        for &k in &visible {
            let v = faces[k].v;
            for e in 0..3 {
                edges.insert((v[e], v[(e + 1) % 3]));
            }
        }
        let mut orphans = Vec::new();
        let mut horizon = Vec::new();
        for &k in &visible {
            let v = faces[k].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                if !edges.contains(&(b, a)) {
                    horizon.push((a, b));
                }
            }
            faces[k].alive = false;
            orphans.append(&mut faces[k].outside);
        }
        let first_new = faces.len();
        for (a, b) in horizon {
            faces.push(Face::new(points, [a, b, apex]));
        }
        for o in orphans.into_iter().filter(|&o| o != apex) {
            assign(&mut faces, first_new, o, points, eps);
        }
    }

    let live: Vec<&Face> = faces.iter().filter(|f| f.alive).collect();
    let mut remap = vec![u32::MAX; points.len()];
    let mut vertices = Vec::new();
    let mut facets = Vec::with_capacity(live.len());
    for f in &live {
        facets.push(f.v.map(|i| {
            if remap[i] == u32::MAX {
                remap[i] = vertices.len() as u32;
                vertices.push(points[i]);
            }
            remap[i]
        }));
    }
    let planes = merge_planes(&live, &vertices, &facets, scale);
    Ok(ConvexPolytope {
        planes,
        vertices,
        facets,
    })
}

/// Convex hull of a mesh's vertices.
pub fn convex_hull_of_mesh(mesh: &TriMesh) -> Result<ConvexPolytope, LatticeError> {
    convex_hull(&mesh.vertices)
}

fn assign(faces: &mut [Face], from: usize, point: usize, points: &[Vec3], eps: f64) {
    let p = points[point];
    if let Some(f) = faces[from..]
        .iter_mut()
        .find(|f| f.alive && f.distance(&p) > eps)
    {
        f.outside.push(point);
    }
}

fn initial_simplex(points: &[Vec3], scale: f64) -> Result<[usize; 4], LatticeError> {
    let tol = 1e-9 * scale;
    let a = (0..points.len())
        .min_by(|&i, &j| {
            let (p, q) = (points[i], points[j]);
            p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z))
        })
        .unwrap();
    let farthest = |f: &dyn Fn(&Vec3) -> f64| -> (usize, f64) {
        (0..points.len())
            .map(|i| (i, f(&points[i])))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap()
    };
    let (b, dab) = farthest(&|p| (p - points[a]).norm());
    if dab <= tol {
        return Err(LatticeError::DegenerateInput("all points coincide".into()));
    }
    let dir = (points[b] - points[a]) / dab;
    let (c, dc) = farthest(&|p| {
        let r = p - points[a];
        (r - dir * r.dot(&dir)).norm()
    });
    if dc <= tol {
        return Err(LatticeError::DegenerateInput("all points are collinear".into()));
    }
    let n = (points[b] - points[a]).cross(&(points[c] - points[a])).normalize();
    let (d, dd) = farthest(&|p| n.dot(&(p - points[a])).abs());
    if dd <= tol {
        return Err(LatticeError::DegenerateInput("all points are coplanar".into()));
    }
    Ok([a, b, c, d])
}

fn merge_planes(faces: &[&Face], vertices: &[Vec3], facets: &[[u32; 3]], scale: f64) -> Vec<HalfSpace> {
    let mut planes: Vec<(Vec3, f64)> = Vec::new();
    for (f, tri) in faces.iter().zip(facets) {
        let hit = planes.iter_mut().find(|(n, o)| {
            n.dot(&f.normal) > 1.0 - 1e-10 && (o - f.offset).abs() <= 1e-9 * scale
        });
        let reach = tri
            .iter()
            .map(|&i| f.normal.dot(&vertices[i as usize]))
            .fold(f.offset, f64::max);
        match hit {
            Some((_, o)) => *o = o.max(reach),
            None => planes.push((f.normal, reach)),
        }
    }
    planes
        .into_iter()
        .map(|(n, o)| HalfSpace {
            normal: [n.x, n.y, n.z],
            offset: o,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_corners() -> Vec<Vec3> {
        Aabb::new(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0)).corners().to_vec()
    }

    #[test]
    fn cube_hull_has_six_planes() {
        let h = convex_hull(&cube_corners()).unwrap();
        assert_eq!(h.planes.len(), 6);
        assert_eq!(h.vertices.len(), 8);
        assert!((h.volume() - 1.0).abs() < 1e-12);
        for p in &h.planes {
            assert!((p.n().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn interior_and_face_points_are_not_vertices() {
        let mut pts = cube_corners();
        pts.push(Vec3::new(0.5, 0.5, 0.5));
        pts.push(Vec3::new(0.5, 0.5, 1.0));
        pts.insert(3, Vec3::new(0.2, 0.7, 0.4));
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.planes.len(), 6);
        assert!(!h.vertices.contains(&Vec3::new(0.5, 0.5, 0.5)));
    }

    #[test]
    fn degenerate_inputs() {
        let flat: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, (i * i) as f64, 0.0)).collect();
        assert!(matches!(convex_hull(&flat), Err(LatticeError::DegenerateInput(_))));
        let line: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(convex_hull(&line), Err(LatticeError::DegenerateInput(_))));
        assert!(convex_hull(&line[..3]).is_err());
    }

    #[test]
    fn hull_is_closed_and_outward() {
        let pts: Vec<Vec3> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.7;
                Vec3::new(t.sin() * (1.0 + 0.3 * (3.0 * t).cos()), (1.3 * t).cos(), (0.37 * t).sin() * 2.0)
            })
            .collect();
        let h = convex_hull(&pts).unwrap();
        let r = crate::mesh::validate_shell(&h.to_mesh());
        assert!(r.closed);
        assert_eq!(r.euler_characteristic, 2);
        assert!(r.signed_volume > 0.0);
        for p in &pts {
            assert!(h.contains(p, 1e-9));
        }
    }
}
