use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{obj, stl, CleanupStats, MeshError, Shell, TriMesh};
use crate::geom::{Aabb, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    #[default]
    Auto,
    StlBinary,
    StlAscii,
    Obj,
}

impl MeshFormat {
    /// Format implied by a file extension; `.stl` maps to binary.
    pub fn for_path(path: &Path) -> MeshFormat {
        match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
            Some(e) if e == "obj" => MeshFormat::Obj,
            Some(e) if e == "stl" => MeshFormat::StlBinary,
            _ => MeshFormat::Auto,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(MeshFormat::Auto),
            "stl_bin" | "stl-bin" | "stl" => Ok(MeshFormat::StlBinary),
            "stl_ascii" | "stl-ascii" => Ok(MeshFormat::StlAscii),
            "obj" => Ok(MeshFormat::Obj),
            other => Err(format!("unknown mesh format `{other}`")),
        }
    }
}

/// A parsed, cleaned-up mesh and what load-time cleanup did to it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub mesh: TriMesh,
    pub format: MeshFormat,
    pub stats: CleanupStats,
}

/// Reads a mesh file. Coordinates are multiplied by `unit_scale` before
/// vertex merging, so the merge tolerance always applies in millimetres.
pub fn parse_mesh(path: &Path, format: MeshFormat, unit_scale: f64) -> Result<Loaded, MeshError> {
    let bytes = std::fs::read(path).map_err(|source| MeshError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })?;
    let format = match format {
        MeshFormat::Auto if MeshFormat::for_path(path) == MeshFormat::Obj => MeshFormat::Obj,
        f => f,
    };
    parse_mesh_bytes(&bytes, format, unit_scale)
}

pub fn parse_mesh_bytes(bytes: &[u8], format: MeshFormat, unit_scale: f64) -> Result<Loaded, MeshError> {
    let format = match format {
        MeshFormat::Auto => detect(bytes),
        f => f,
    };
    let mut mesh = match format {
        MeshFormat::StlBinary => TriMesh::from_soup_raw(&stl::read_binary(bytes)?),
        MeshFormat::StlAscii => {
            let (tris, name) = stl::read_ascii(bytes)?;
            let mut m = TriMesh::from_soup_raw(&tris);
            m.name = name;
            m
        }
        MeshFormat::Obj => obj::read(bytes)?,
        MeshFormat::Auto => unreachable!(),
    };
    if unit_scale != 1.0 {
        mesh.scale(unit_scale);
    }
    let stats = mesh.cleanup();
    if mesh.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    Ok(Loaded { mesh, format, stats })
}

/// A size-consistent binary STL wins over a leading `solid` keyword, since
/// plenty of binary writers put `solid` in the header.
fn detect(bytes: &[u8]) -> MeshFormat {
    if stl::size_matches_binary(bytes) {
        return MeshFormat::StlBinary;
    }
    if stl::starts_with_solid(bytes) {
        return MeshFormat::StlAscii;
    }
    let head = &bytes[..bytes.len().min(4096)];
    let looks_obj = String::from_utf8_lossy(head)
        .lines()
        .any(|l| l.starts_with("v ") || l.starts_with("f "));
    if looks_obj {
        MeshFormat::Obj
    } else {
        // reported as a header or body error by the binary reader
        MeshFormat::StlBinary
    }
}

impl TriMesh {
    fn from_soup_raw(tris: &[[Vec3; 3]]) -> TriMesh {
        let mut vertices = Vec::with_capacity(tris.len() * 3);
        let mut triangles = Vec::with_capacity(tris.len());
        for t in tris {
            let b = vertices.len() as u32;
            vertices.extend_from_slice(t);
            triangles.push([b, b + 1, b + 2]);
        }
        TriMesh::new(vertices, triangles)
    }
}

/// Summary of one emission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmitReport {
    pub bytes: u64,
    pub triangles: usize,
    /// Box of the coordinates as written (after `f32` rounding for binary STL).
    pub bbox: Option<Aabb>,
}

/// Encodes meshes in order, each mesh's triangles in index order, so
/// repeated encodings of the same input are byte-identical.
pub fn encode(meshes: &[&TriMesh], format: MeshFormat, name: &str) -> Result<(Vec<u8>, EmitReport), MeshError> {
    let count: usize = meshes.iter().map(|m| m.triangles.len()).sum();
    if count == 0 {
        return Err(MeshError::EmptyMesh);
    }
    let tris = || meshes.iter().flat_map(|m| stl::triangles_of(m));
    let (bytes, bbox) = match format {
        MeshFormat::StlBinary | MeshFormat::Auto => (
            stl::write_binary(count, tris())?,
            used_bbox(meshes, |p| p.map(|c| c as f32 as f64)),
        ),
        MeshFormat::StlAscii => (stl::write_ascii(name, tris()), used_bbox(meshes, |p| p)),
        MeshFormat::Obj => (obj::write(meshes.iter().copied()), used_bbox(meshes, |p| p)),
    };
    let report = EmitReport {
        bytes: bytes.len() as u64,
        triangles: count,
        bbox,
    };
    Ok((bytes, report))
}

fn used_bbox(meshes: &[&TriMesh], written: impl Fn(Vec3) -> Vec3) -> Option<Aabb> {
    let mut b: Option<Aabb> = None;
    for m in meshes {
        for t in &m.triangles {
            for &i in t {
                let p = written(m.vertices[i as usize]);
                match &mut b {
                    Some(bb) => bb.include(&p),
                    None => b = Some(Aabb::new(p, p)),
                }
            }
        }
    }
    b
}

fn resolve_format(path: &Path, format: MeshFormat) -> MeshFormat {
    match format {
        MeshFormat::Auto => match MeshFormat::for_path(path) {
            MeshFormat::Auto => MeshFormat::StlBinary,
            f => f,
        },
        f => f,
    }
}

pub fn emit_mesh(mesh: &TriMesh, path: &Path, format: MeshFormat) -> Result<EmitReport, MeshError> {
    let name = mesh.name.clone().unwrap_or_else(|| "eflesh".into());
    let (bytes, report) = encode(&[mesh], resolve_format(path, format), &name)?;
    std::fs::write(path, bytes)?;
    Ok(report)
}

/// Writes a shell set, sorted by shell index then triangle index.
pub fn emit_shells(shells: &[Shell], path: &Path, format: MeshFormat) -> Result<EmitReport, MeshError> {
    let meshes: Vec<&TriMesh> = shells.iter().map(|s| &s.mesh).collect();
    let (bytes, report) = encode(&meshes, resolve_format(path, format), "eflesh")?;
    std::fs::write(path, bytes)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{box_mesh, validate_shell};

    fn cube() -> TriMesh {
        box_mesh(&Aabb::new(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0)))
    }

    #[test]
    fn binary_cube_is_684_bytes_and_parses_back() {
        let (bytes, report) = encode(&[&cube()], MeshFormat::StlBinary, "x").unwrap();
        assert_eq!(bytes.len(), 684);
        assert_eq!(report.bytes, 684);
        let loaded = parse_mesh_bytes(&bytes, MeshFormat::Auto, 1.0).unwrap();
        assert_eq!(loaded.format, MeshFormat::StlBinary);
        assert_eq!(loaded.mesh.vertices.len(), 8);
        assert_eq!(loaded.mesh.triangles.len(), 12);
        assert!(validate_shell(&loaded.mesh).closed);
    }

    #[test]
    fn ascii_drops_degenerate_triangle() {
        let c = cube();
        let mut soup: Vec<_> = (0..12).map(|i| c.triangle(i)).collect();
        soup.push([Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)]);
        let m = TriMesh::from_soup_raw(&soup);
        let (bytes, _) = encode(&[&m], MeshFormat::StlAscii, "cube").unwrap();
        // 13 facets written, one zero-area
        let loaded = parse_mesh_bytes(&bytes, MeshFormat::Auto, 1.0).unwrap();
        assert_eq!(loaded.format, MeshFormat::StlAscii);
        assert_eq!(loaded.mesh.triangles.len(), 12);
        assert_eq!(loaded.stats.dropped_degenerate, 1);
        assert_eq!(loaded.mesh.name.as_deref(), Some("cube"));
    }

    #[test]
    fn short_file_is_malformed_header() {
        let err = parse_mesh_bytes(&[0u8; 40], MeshFormat::StlBinary, 1.0).unwrap_err();
        assert!(matches!(err, MeshError::MalformedHeader(_)));
        let err = parse_mesh_bytes(&[0u8; 40], MeshFormat::Auto, 1.0).unwrap_err();
        assert!(matches!(err, MeshError::MalformedHeader(_)));
    }

    #[test]
    fn count_mismatch_is_truncated_body() {
        let (mut bytes, _) = encode(&[&cube()], MeshFormat::StlBinary, "x").unwrap();
        bytes.truncate(684 - 20);
        let err = parse_mesh_bytes(&bytes, MeshFormat::StlBinary, 1.0).unwrap_err();
        assert!(matches!(err, MeshError::TruncatedBody { declared: 12, .. }));
        let err = parse_mesh_bytes(&bytes, MeshFormat::Auto, 1.0).unwrap_err();
        assert!(matches!(err, MeshError::TruncatedBody { .. }));
    }

    #[test]
    fn empty_inputs() {
        let err = parse_mesh_bytes(b"solid e\nendsolid e\n", MeshFormat::Auto, 1.0).unwrap_err();
        assert!(matches!(err, MeshError::EmptyMesh));
        assert!(matches!(
            encode(&[&TriMesh::default()], MeshFormat::StlBinary, "x"),
            Err(MeshError::EmptyMesh)
        ));
    }

    #[test]
    fn obj_polygons_and_negative_indices() {
        let src = b"o quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -4 -2 -1\n";
        let loaded = parse_mesh_bytes(src, MeshFormat::Obj, 1.0).unwrap();
        assert_eq!(loaded.mesh.triangles.len(), 3);
        assert_eq!(loaded.mesh.name.as_deref(), Some("quad"));
        let bad = parse_mesh_bytes(b"v 0 0 0\nf 1 2 3\n", MeshFormat::Obj, 1.0).unwrap_err();
        assert!(matches!(bad, MeshError::MalformedBody { line: 2, .. }));
    }

    #[test]
    fn unit_scale_applies_before_merge() {
        let (bytes, _) = encode(&[&cube()], MeshFormat::Obj, "x").unwrap();
        let loaded = parse_mesh_bytes(&bytes, MeshFormat::Obj, 25.4).unwrap();
        let b = loaded.mesh.bbox().unwrap();
        assert_eq!(b.max, [25.4; 3]);
    }
}
