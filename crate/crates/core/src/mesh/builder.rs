use std::collections::HashMap;

use super::TriMesh;
use crate::geom::Vec3;

/// Assembles a mesh from planar pieces whose outward direction is known.
/// Vertices are shared by exact coordinate, so pieces that meet along an
/// edge must generate bit-identical corner positions.
#[derive(Default)]
pub(crate) struct MeshBuilder {
    mesh: TriMesh,
    index: HashMap<[u64; 3], u32>,
}

impl MeshBuilder {
    pub fn vertex(&mut self, p: Vec3) -> u32 {
        let key = [p.x, p.y, p.z].map(|c| (c + 0.0).to_bits());
        *self.index.entry(key).or_insert_with(|| {
            self.mesh.vertices.push(p);
            (self.mesh.vertices.len() - 1) as u32
        })
    }

    /// Adds a triangle wound so that its normal agrees with `outward`.
    pub fn tri(&mut self, a: u32, b: u32, c: u32, outward: &Vec3) {
        let v = &self.mesh.vertices;
        let n = (v[b as usize] - v[a as usize]).cross(&(v[c as usize] - v[a as usize]));
        if n.dot(outward) >= 0.0 {
            self.mesh.triangles.push([a, b, c]);
        } else {
            self.mesh.triangles.push([a, c, b]);
        }
    }

    /// Adds a planar convex quad given in cyclic order.
    pub fn quad(&mut self, q: [u32; 4], outward: &Vec3) {
        self.tri(q[0], q[1], q[2], outward);
        self.tri(q[0], q[2], q[3], outward);
    }

    pub fn finish(self) -> TriMesh {
        self.mesh
    }
}
