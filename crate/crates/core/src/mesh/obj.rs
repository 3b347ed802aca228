use std::fmt::Write as _;

use super::{MeshError, TriMesh};
use crate::geom::Vec3;

/// Reads `v` and `f` records; everything else (normals, texture
/// coordinates, groups, materials) is ignored. Polygons are fan-triangulated.
pub(super) fn read(bytes: &[u8]) -> Result<TriMesh, MeshError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| MeshError::MalformedHeader("OBJ file is not valid UTF-8".into()))?;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles = Vec::new();
    let mut name = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let bad = |msg: String| MeshError::MalformedBody { line, msg };
        let mut parts = raw.split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let t = parts.next().ok_or_else(|| bad("vertex needs 3 coordinates".into()))?;
                    *slot = t
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(format!("invalid coordinate `{t}`")))?;
                }
                vertices.push(Vec3::from(c));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in parts {
                    let first = t.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| bad(format!("invalid face index `{t}`")))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(bad(format!("face index {i} out of range")));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(bad("face needs at least 3 vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            Some("o") if name.is_none() => {
                name = Some(parts.collect::<Vec<_>>().join(" "));
            }
            _ => {}
        }
    }
    let mut mesh = TriMesh::new(vertices, triangles);
    mesh.name = name.filter(|n| !n.is_empty());
    Ok(mesh)
}

pub(super) fn write<'a>(meshes: impl Iterator<Item = &'a TriMesh>) -> Vec<u8> {
    let mut v = String::new();
    let mut f = String::new();
    let mut base = 1u64;
    for m in meshes {
        for p in &m.vertices {
            writeln!(v, "v {} {} {}", p.x, p.y, p.z).unwrap();
        }
        for t in &m.triangles {
            writeln!(
                f,
                "f {} {} {}",
                base + t[0] as u64,
                base + t[1] as u64,
                base + t[2] as u64
            )
            .unwrap();
        }
        base += m.vertices.len() as u64;
    }
    let mut out = String::from("# eflesh mesh\n");
    out.push_str(&v);
    out.push_str(&f);
    out.into_bytes()
}
