//! Triangle mesh model, shell validation and file I/O.
//!
//! A [`TriMesh`] is an indexed triangle soup. A [`Shell`] is a mesh that is
//! meant to be a closed solid; shells are the emission unit for every
//! pipeline stage, so an output model is simply a list of shells which the
//! slicer unions.

mod builder;
mod io;
mod obj;
mod stl;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::geom::{triangle_area, Aabb, Vec3};

pub(crate) use builder::MeshBuilder;
pub use io::{emit_mesh, emit_shells, encode, parse_mesh, parse_mesh_bytes, EmitReport, Loaded, MeshFormat};

/// Vertices closer than this are merged on load.
pub const MERGE_TOLERANCE: f64 = 1e-6;
/// Triangles with area at or below this are dropped on load.
pub const DEGENERATE_AREA: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated body: header declares {declared} triangles but {available} bytes of records follow")]
    TruncatedBody { declared: u64, available: u64 },
    #[error("malformed body at line {line}: {msg}")]
    MalformedBody { line: usize, msg: String },
    #[error("mesh contains no triangles")]
    EmptyMesh,
    #[error("write failed: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("{0} triangles cannot be stored in a binary STL")]
    UnrepresentableCount(usize),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub name: Option<String>,
}

/// Counters reported by [`TriMesh::cleanup`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CleanupStats {
    pub merged_vertices: usize,
    pub dropped_degenerate: usize,
    pub dropped_unused_vertices: usize,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        Self {
            vertices,
            triangles,
            name: None,
        }
    }

    /// Builds a mesh from a flat triangle list, merging coincident corners.
    pub fn from_triangle_soup(tris: &[[Vec3; 3]]) -> (Self, CleanupStats) {
        let mut vertices = Vec::with_capacity(tris.len() * 3);
        let mut triangles = Vec::with_capacity(tris.len());
        for t in tris {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(t);
            triangles.push([base, base + 1, base + 2]);
        }
        let mut mesh = Self::new(vertices, triangles);
        let stats = mesh.cleanup();
        (mesh, stats)
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn bbox(&self) -> Option<Aabb> {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|v| self.vertices[v as usize])
    }

    pub fn triangle_normal(&self, i: usize) -> Vec3 {
        let [a, b, c] = self.triangle(i);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len > 0.0 {
            n / len
        } else {
            Vec3::zeros()
        }
    }

    /// Signed enclosed volume by the divergence theorem. Positive for
    /// outward (counter-clockwise seen from outside) winding.
    pub fn signed_volume(&self) -> f64 {
        // Reference point near the mesh keeps the per-triangle terms small.
        let origin = self.bbox().map(|b| b.center()).unwrap_or_else(Vec3::zeros);
        self.triangles
            .iter()
            .map(|t| {
                let a = self.vertices[t[0] as usize] - origin;
                let b = self.vertices[t[1] as usize] - origin;
                let c = self.vertices[t[2] as usize] - origin;
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn translate(&mut self, offset: &Vec3) {
        for v in &mut self.vertices {
            *v += offset;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.vertices {
            *v *= factor;
        }
    }

    /// Appends `other`, re-indexing its triangles.
    pub fn append(&mut self, other: &TriMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
    }

    /// Merges vertices within [`MERGE_TOLERANCE`], drops degenerate
    /// triangles and unused vertices. Vertex order follows first use.
    pub fn cleanup(&mut self) -> CleanupStats {
        let mut stats = CleanupStats::default();
        let before = self.vertices.len();
        let remap = weld(&self.vertices, MERGE_TOLERANCE);
        let mut merged: Vec<Vec3> = Vec::new();
        let mut new_index = vec![u32::MAX; before];
        let mut tris = Vec::with_capacity(self.triangles.len());
        for t in &self.triangles {
            let rep = t.map(|i| remap[i as usize]);
            let [a, b, c] = rep.map(|i| self.vertices[i as usize]);
            if rep[0] == rep[1] || rep[1] == rep[2] || rep[0] == rep[2] || triangle_area(&a, &b, &c) <= DEGENERATE_AREA {
                stats.dropped_degenerate += 1;
                continue;
            }
            let idx = rep.map(|r| {
                let slot = &mut new_index[r as usize];
                if *slot == u32::MAX {
                    *slot = merged.len() as u32;
                    merged.push(self.vertices[r as usize]);
                }
                *slot
            });
            tris.push(idx);
        }
        let distinct = remap.iter().enumerate().filter(|(i, r)| **r as usize == *i).count();
        stats.merged_vertices = before - distinct;
        stats.dropped_unused_vertices = distinct - merged.len();
        self.vertices = merged;
        self.triangles = tris;
        stats
    }
}

/// Maps each vertex to the index of the first vertex within `tol` of it.
fn weld(vertices: &[Vec3], tol: f64) -> Vec<u32> {
    let key = |p: &Vec3| -> [i64; 3] { [p.x, p.y, p.z].map(|c| (c / tol).floor() as i64) };
    let mut grid: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    let mut remap = Vec::with_capacity(vertices.len());
    for (i, p) in vertices.iter().enumerate() {
        let k = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &j in list {
                            if (vertices[j as usize] - p).norm() <= tol {
                                found = Some(j);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        match found {
            Some(j) => remap.push(j),
            None => {
                grid.entry(k).or_default().push(i as u32);
                remap.push(i as u32);
            }
        }
    }
    remap
}

/// A mesh intended to bound a solid, with its closure flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub mesh: TriMesh,
    pub closed: bool,
}

impl Shell {
    pub fn new(mesh: TriMesh) -> Self {
        let closed = validate_shell(&mesh).closed;
        Self { mesh, closed }
    }

    pub fn report(&self) -> ShellReport {
        validate_shell(&self.mesh)
    }

    pub fn volume(&self) -> f64 {
        self.mesh.signed_volume()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellReport {
    pub closed: bool,
    pub boundary_edge_count: usize,
    /// Edges used more than twice or twice with the same orientation.
    pub nonmanifold_edge_count: usize,
    pub signed_volume: f64,
    pub euler_characteristic: i64,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub triangle_count: usize,
}

/// Topology and volume report for a mesh treated as a candidate shell.
///
/// A mesh is closed when every undirected edge is used by exactly two
/// triangles with opposite orientation.
pub fn validate_shell(mesh: &TriMesh) -> ShellReport {
    let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
    let mut used = vec![false; mesh.vertices.len()];
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *directed.entry((a, b)).or_insert(0) += 1;
            used[a as usize] = true;
        }
    }
    let mut undirected: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for (&(a, b), &n) in &directed {
        let e = undirected.entry((a.min(b), a.max(b))).or_insert((0, 0));
        if a < b {
            e.0 += n;
        } else {
            e.1 += n;
        }
    }
    let mut boundary = 0;
    let mut nonmanifold = 0;
    for &(fwd, back) in undirected.values() {
        match (fwd, back) {
            (1, 1) => {}
            (1, 0) | (0, 1) => boundary += 1,
            _ => nonmanifold += 1,
        }
    }
    let v = used.iter().filter(|u| **u).count();
    let e = undirected.len();
    let f = mesh.triangles.len();
    ShellReport {
        closed: boundary == 0 && nonmanifold == 0 && f > 0,
        boundary_edge_count: boundary,
        nonmanifold_edge_count: nonmanifold,
        signed_volume: mesh.signed_volume(),
        euler_characteristic: v as i64 - e as i64 + f as i64,
        vertex_count: v,
        edge_count: e,
        triangle_count: f,
    }
}

/// Closed axis-aligned box with outward winding; 8 vertices, 12 triangles.
pub fn box_mesh(bbox: &Aabb) -> TriMesh {
    let vertices = bbox.corners().to_vec();
    // corner index bits: x=1, y=2, z=4
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let mut triangles = Vec::with_capacity(12);
    for q in quads {
        triangles.push([q[0], q[1], q[2]]);
        triangles.push([q[0], q[2], q[3]]);
    }
    TriMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> TriMesh {
        box_mesh(&Aabb::new(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0)))
    }

    #[test]
    fn cube_is_closed_with_unit_volume() {
        let r = validate_shell(&unit_cube());
        assert!(r.closed);
        assert_eq!(r.boundary_edge_count, 0);
        assert!((r.signed_volume - 1.0).abs() < 1e-12);
        assert_eq!(r.euler_characteristic, 2);
    }

    #[test]
    fn cube_missing_face_has_four_boundary_edges() {
        let mut m = unit_cube();
        m.triangles.truncate(10);
        let r = validate_shell(&m);
        assert!(!r.closed);
        assert_eq!(r.boundary_edge_count, 4);
    }

    #[test]
    fn inverted_cube_has_negative_volume() {
        let mut m = unit_cube();
        for t in &mut m.triangles {
            t.swap(1, 2);
        }
        let r = validate_shell(&m);
        assert!(r.closed);
        assert!((r.signed_volume + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cleanup_merges_and_drops() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 1.0, 0.0);
        let b2 = b + Vec3::new(4e-7, 0.0, 0.0);
        let (m, stats) = TriMesh::from_triangle_soup(&[[a, b, c], [a, c, b2], [a, b, b]]);
        assert_eq!(m.vertices.len(), 3);
        assert_eq!(m.triangles.len(), 2);
        assert_eq!(stats.dropped_degenerate, 1);
    }

    #[test]
    fn volume_invariant_under_reordering() {
        let mut m = unit_cube();
        let v0 = m.signed_volume();
        m.triangles.reverse();
        m.triangles.iter_mut().for_each(|t| t.rotate_left(1));
        assert!((m.signed_volume() - v0).abs() < 1e-12);
    }
}
