use std::fmt::Write as _;

use super::{MeshError, TriMesh};
use crate::geom::Vec3;

pub(super) const HEADER_LEN: usize = 80;
pub(super) const RECORD_LEN: usize = 50;
const HEADER_TEXT: &[u8] = b"eflesh binary stl";

/// True when the byte length matches the record count declared in the header.
pub(super) fn size_matches_binary(bytes: &[u8]) -> bool {
    bytes.len() >= HEADER_LEN + 4
        && (HEADER_LEN + 4) as u64 + declared_count(bytes) as u64 * RECORD_LEN as u64 == bytes.len() as u64
}

pub(super) fn starts_with_solid(bytes: &[u8]) -> bool {
    let trimmed = bytes.iter().position(|b| !b.is_ascii_whitespace()).map(|i| &bytes[i..]);
    matches!(trimmed, Some(t) if t.starts_with(b"solid"))
}

fn declared_count(bytes: &[u8]) -> u32 {
    u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap())
}

pub(super) fn read_binary(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>, MeshError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(MeshError::MalformedHeader(format!(
            "binary STL needs at least {} bytes, file has {}",
            HEADER_LEN + 4,
            bytes.len()
        )));
    }
    let declared = declared_count(bytes) as u64;
    let available = (bytes.len() - HEADER_LEN - 4) as u64;
    if declared * RECORD_LEN as u64 != available {
        return Err(MeshError::TruncatedBody { declared, available });
    }
    let mut tris = Vec::with_capacity(declared as usize);
    for (i, rec) in bytes[HEADER_LEN + 4..].chunks_exact(RECORD_LEN).enumerate() {
        let f = |k: usize| f32::from_le_bytes(rec[k * 4..k * 4 + 4].try_into().unwrap()) as f64;
        // floats 0..3 are the facet normal, recomputed from winding instead
        let v = |j: usize| Vec3::new(f(3 + 3 * j), f(4 + 3 * j), f(5 + 3 * j));
        let t = [v(0), v(1), v(2)];
        if t.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(MeshError::MalformedBody {
                line: i + 1,
                msg: "non-finite vertex coordinate in triangle record".into(),
            });
        }
        tris.push(t);
    }
    Ok(tris)
}

struct Tokens<'a, I: Iterator<Item = (usize, &'a str)>> {
    inner: std::iter::Peekable<I>,
}

impl<'a, I: Iterator<Item = (usize, &'a str)>> Tokens<'a, I> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), MeshError> {
        self.inner.next().ok_or_else(|| MeshError::MalformedBody {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn expect(&mut self, want: &str) -> Result<(), MeshError> {
        match self.next(&format!("`{want}`"))? {
            (_, t) if t == want => Ok(()),
            (line, t) => Err(MeshError::MalformedBody {
                line,
                msg: format!("expected `{want}`, found `{t}`"),
            }),
        }
    }

    fn number(&mut self) -> Result<f64, MeshError> {
        let (line, t) = self.next("a coordinate")?;
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(MeshError::MalformedBody {
                line,
                msg: format!("invalid coordinate `{t}`"),
            }),
        }
    }
}

pub(super) fn read_ascii(bytes: &[u8]) -> Result<(Vec<[Vec3; 3]>, Option<String>), MeshError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| MeshError::MalformedHeader("ASCII STL is not valid UTF-8".into()))?;
    let mut toks = Tokens {
        inner: text
            .lines()
            .enumerate()
            .flat_map(|(ln, line)| line.split_whitespace().map(move |t| (ln + 1, t)))
            .peekable(),
    };

    let first_line = match toks.inner.next() {
        Some((ln, "solid")) => ln,
        _ => return Err(MeshError::MalformedHeader("ASCII STL must start with `solid`".into())),
    };
    let mut name_parts = Vec::new();
    while let Some(&(ln, t)) = toks.inner.peek() {
        if ln != first_line {
            break;
        }
        name_parts.push(t);
        toks.inner.next();
    }
    let name = (!name_parts.is_empty()).then(|| name_parts.join(" "));

    let mut tris = Vec::new();
    loop {
        match toks.next("`facet` or `endsolid`")? {
            (_, "endsolid") => break,
            (_, "facet") => {}
            (line, other) => {
                return Err(MeshError::MalformedBody {
                    line,
                    msg: format!("expected `facet`, found `{other}`"),
                })
            }
        }
        toks.expect("normal")?;
        for _ in 0..3 {
            toks.number()?;
        }
        toks.expect("outer")?;
        toks.expect("loop")?;
        let mut corners = [Vec3::zeros(); 3];
        for corner in &mut corners {
            toks.expect("vertex")?;
            for c in 0..3 {
                corner[c] = toks.number()?;
            }
        }
        toks.expect("endloop")?;
        toks.expect("endfacet")?;
        tris.push(corners);
    }
    Ok((tris, name))
}

fn unit_normal(t: &[Vec3; 3]) -> Vec3 {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        Vec3::zeros()
    }
}

pub(super) fn write_binary<'a>(
    count: usize,
    tris: impl Iterator<Item = [Vec3; 3]> + 'a,
) -> Result<Vec<u8>, MeshError> {
    let n: u32 = count
        .try_into()
        .map_err(|_| MeshError::UnrepresentableCount(count))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + count * RECORD_LEN);
    let mut header = [0u8; HEADER_LEN];
    header[..HEADER_TEXT.len()].copy_from_slice(HEADER_TEXT);
    out.extend_from_slice(&header);
    out.extend_from_slice(&n.to_le_bytes());
    for t in tris {
        let normal = unit_normal(&t);
        for v in std::iter::once(&normal).chain(t.iter()) {
            for c in 0..3 {
                out.extend_from_slice(&(v[c] as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    Ok(out)
}

pub(super) fn write_ascii(name: &str, tris: impl Iterator<Item = [Vec3; 3]>) -> Vec<u8> {
    let mut s = String::new();
    writeln!(s, "solid {name}").unwrap();
    for t in tris {
        let n = unit_normal(&t);
        writeln!(s, "  facet normal {} {} {}", n.x, n.y, n.z).unwrap();
        s.push_str("    outer loop\n");
        for v in &t {
            writeln!(s, "      vertex {} {} {}", v.x, v.y, v.z).unwrap();
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    writeln!(s, "endsolid {name}").unwrap();
    s.into_bytes()
}

pub(super) fn triangles_of(mesh: &TriMesh) -> impl Iterator<Item = [Vec3; 3]> + '_ {
    (0..mesh.triangles.len()).map(move |i| mesh.triangle(i))
}
