//! Convex polyhedra as indexed boundary representations, clipped by half-spaces.

use std::collections::HashMap;

use crate::geom::{Aabb, HalfSpace, Vec3};
use crate::mesh::{Shell, TriMesh};

/// Vertices within this distance of a clipping plane are treated as lying on it.
pub const CLIP_EPS: f64 = 1e-9;

/// A convex polyhedron: shared vertices plus convex face loops wound
/// counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSolid {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Clipped {
    Unchanged,
    Removed,
    Cut(ConvexSolid),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    In,
    On,
    Out,
}

impl ConvexSolid {
    pub fn from_aabb(b: &Aabb) -> Self {
        let vertices = b.corners().to_vec();
        // corner index bits: x=1, y=2, z=4
        let faces = vec![
            vec![0, 2, 3, 1],
            vec![4, 5, 7, 6],
            vec![0, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
        ];
        Self { vertices, faces }
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter()).expect("solid has vertices")
    }

    /// Fan-triangulated boundary.
    pub fn to_mesh(&self) -> TriMesh {
        let mut triangles = Vec::new();
        for f in &self.faces {
            for k in 1..f.len() - 1 {
                triangles.push([f[0], f[k], f[k + 1]]);
            }
        }
        TriMesh::new(self.vertices.clone(), triangles)
    }

    pub fn to_shell(&self) -> Shell {
        Shell::new(self.to_mesh())
    }

    pub fn volume(&self) -> f64 {
        let o = self.vertices[0];
        let mut v = 0.0;
        for f in &self.faces {
            let a = self.vertices[f[0] as usize] - o;
            for k in 1..f.len() - 1 {
                let b = self.vertices[f[k] as usize] - o;
                let c = self.vertices[f[k + 1] as usize] - o;
                v += a.dot(&b.cross(&c));
            }
        }
        v / 6.0
    }

    pub fn translated(&self, offset: &Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Keeps the part with `signed_distance <= 0`.
    ///
    /// Edge intersections are cached per undirected edge so the two faces
    /// sharing an edge reference the same new vertex, and the cap face is
    /// assembled by chaining the in-plane edges the kept faces leave behind.
    /// The result is therefore closed by construction.
    pub fn clip(&self, plane: &HalfSpace) -> Clipped {
        let dist: Vec<f64> = self.vertices.iter().map(|v| plane.signed_distance(v)).collect();
        let side: Vec<Side> = dist
            .iter()
            .map(|&d| {
                if d > CLIP_EPS {
                    Side::Out
                } else if d < -CLIP_EPS {
                    Side::In
                } else {
                    Side::On
                }
            })
            .collect();
        if !side.contains(&Side::Out) {
            return Clipped::Unchanged;
        }
        if !side.contains(&Side::In) {
            return Clipped::Removed;
        }

        let mut vertices = self.vertices.clone();
        let mut on_plane: Vec<bool> = side.iter().map(|s| *s == Side::On).collect();
        let mut cut_cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        let mut cap_next: HashMap<u32, u32> = HashMap::new();

        for face in &self.faces {
            let mut loop_ = Vec::with_capacity(face.len() + 1);
            for k in 0..face.len() {
                let (a, b) = (face[k], face[(k + 1) % face.len()]);
                let (sa, sb) = (side[a as usize], side[b as usize]);
                if sa != Side::Out {
                    loop_.push(a);
                }
                if (sa == Side::In && sb == Side::Out) || (sa == Side::Out && sb == Side::In) {
                    let key = (a.min(b), a.max(b));
                    let idx = *cut_cache.entry(key).or_insert_with(|| {
                        // evaluate from the lower index so both faces get identical bits
                        let (p, q) = (key.0 as usize, key.1 as usize);
                        let t = dist[p] / (dist[p] - dist[q]);
                        vertices.push(self.vertices[p] + (self.vertices[q] - self.vertices[p]) * t);
                        on_plane.push(true);
                        (vertices.len() - 1) as u32
                    });
                    loop_.push(idx);
                }
            }
            if loop_.len() < 3 {
                continue;
            }
            for k in 0..loop_.len() {
                let (p, q) = (loop_[k], loop_[(k + 1) % loop_.len()]);
                if on_plane[p as usize] && on_plane[q as usize] {
                    // the cap traverses this edge the other way round
                    cap_next.insert(q, p);
                }
            }
            faces.push(loop_);
        }

        if let Some(cap) = chain_cap(&cap_next) {
            faces.push(cap);
        } else if cap_next.len() >= 3 {
            faces.push(sorted_cap(&cap_next, &vertices, &plane.n()));
        }

        // drop vertices no longer referenced
        let mut remap = vec![u32::MAX; vertices.len()];
        let mut kept = Vec::new();
        for f in &mut faces {
            for v in f.iter_mut() {
                if remap[*v as usize] == u32::MAX {
                    remap[*v as usize] = kept.len() as u32;
                    kept.push(vertices[*v as usize]);
                }
                *v = remap[*v as usize];
            }
        }
        Clipped::Cut(ConvexSolid {
            vertices: kept,
            faces,
        })
    }

    /// Clips by every plane in turn; `None` when nothing survives.
    pub fn clip_all(&self, planes: &[HalfSpace]) -> Option<ConvexSolid> {
        let mut current: Option<ConvexSolid> = None;
        for p in planes {
            let src = current.as_ref().unwrap_or(self);
            match src.clip(p) {
                Clipped::Unchanged => {}
                Clipped::Removed => return None,
                Clipped::Cut(s) => current = Some(s),
            }
        }
        Some(current.unwrap_or_else(|| self.clone()))
    }
}

fn chain_cap(next: &HashMap<u32, u32>) -> Option<Vec<u32>> {
    if next.len() < 3 {
        return None;
    }
    let start = *next.keys().min().unwrap();
    let mut out = vec![start];
    let mut cur = start;
    loop {
        let n = *next.get(&cur)?;
        if n == start {
            break;
        }
        if out.len() > next.len() {
            return None;
        }
        out.push(n);
        cur = n;
    }
    (out.len() == next.len()).then_some(out)
}

/// Fallback when the in-plane edges do not form one loop: order the cap
/// points by angle around their centroid.
fn sorted_cap(next: &HashMap<u32, u32>, vertices: &[Vec3], normal: &Vec3) -> Vec<u32> {
    let mut ids: Vec<u32> = next.keys().copied().collect();
    ids.sort_unstable();
    let c = ids.iter().map(|&i| vertices[i as usize]).sum::<Vec3>() / ids.len() as f64;
    let u = (vertices[ids[0] as usize] - c).normalize();
    let v = normal.cross(&u);
    ids.sort_by(|&a, &b| {
        let pa = vertices[a as usize] - c;
        let pb = vertices[b as usize] - c;
        pa.dot(&v).atan2(pa.dot(&u)).total_cmp(&pb.dot(&v).atan2(pb.dot(&u)))
    });
    ids
}
