//! Mesh file readers: PLY (ASCII and binary little-endian) and OBJ.
//! Quads and larger polygons are fan-triangulated; vertex order is
//! preserved exactly as stored in the file.

use std::fs;
use std::path::Path;

use super::mesh::{MeshError, SceneMesh};
use crate::geom::Vec3;

/// Load a mesh by file extension: `.ply` or `.obj` (case-insensitive).
pub fn load_mesh(path: &Path) -> Result<SceneMesh, MeshError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let bytes = fs::read(path)?;
    let name = path.display().to_string();
    match ext.as_str() {
        "obj" => parse_obj(&bytes, &name),
        "ply" => parse_ply(&bytes, &name),
        _ if bytes.starts_with(b"ply") => parse_ply(&bytes, &name),
        _ => parse_obj(&bytes, &name),
    }
}

fn err(path: &str, line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { path: path.to_string(), line, msg: msg.into() }
}

/// Write a mesh as OBJ, preserving shared-vertex structure. Coordinates are
/// printed with enough digits to round-trip f64 exactly.
pub fn write_obj(mesh: &SceneMesh, path: &Path) -> Result<(), MeshError> {
    use std::fmt::Write as _;
    let mut out = String::new();
    for v in mesh.vertices() {
        writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z).expect("string write");
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------- OBJ ----

fn parse_obj(bytes: &[u8], path: &str) -> Result<SceneMesh, MeshError> {
    let text = String::from_utf8_lossy(bytes);
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let mut it = raw.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut c = [0.0f64; 3];
                for x in &mut c {
                    let tok = it.next().ok_or_else(|| err(path, line, "vertex needs x y z"))?;
                    *x = tok
                        .parse()
                        .map_err(|_| err(path, line, format!("bad coordinate {tok:?}")))?;
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in it {
                    let first = tok.split('/').next().unwrap_or("");
                    let v: i64 = first
                        .parse()
                        .map_err(|_| err(path, line, format!("bad face index {tok:?}")))?;
                    let resolved = if v < 0 {
                        vertices.len() as i64 + v
                    } else {
                        v - 1
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(err(path, line, format!("face index {v} out of range")));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(err(path, line, "face needs at least 3 indices"));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {} // comments, normals, texcoords, groups, materials
        }
    }
    SceneMesh::new(vertices, triangles)
}

// ---------------------------------------------------------------- PLY ----

#[derive(Clone, Copy, PartialEq)]
enum PlyType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PlyType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }
}

enum PlyProp {
    Scalar(PlyType, String),
    List(PlyType, PlyType, String),
}

struct PlyElement {
    name: String,
    count: usize,
    props: Vec<PlyProp>,
}

/// Cursor over the binary body that reads one scalar at a time.
struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    path: String,
    line: usize,
}

impl Cursor<'_> {
    fn scalar(&mut self, t: PlyType) -> Result<f64, MeshError> {
        let n = t.size();
        if self.pos + n > self.data.len() {
            return Err(err(&self.path, self.line, "binary body truncated"));
        }
        let b = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(match t {
            PlyType::I8 => b[0] as i8 as f64,
            PlyType::U8 => b[0] as f64,
            PlyType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            PlyType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            PlyType::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            PlyType::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            PlyType::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            PlyType::F64 => f64::from_le_bytes(b.try_into().unwrap()),
        })
    }
}

fn parse_ply(bytes: &[u8], path: &str) -> Result<SceneMesh, MeshError> {
    // Header is ASCII lines up to and including "end_header".
    let mut line_no = 0usize;
    let mut offset = 0usize;
    let mut header_lines: Vec<String> = Vec::new();
    loop {
        let rest = &bytes[offset..];
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| err(path, line_no + 1, "missing end_header"))?;
        let line = String::from_utf8_lossy(&rest[..nl]).trim_end_matches('\r').to_string();
        offset += nl + 1;
        line_no += 1;
        let done = line.trim() == "end_header";
        header_lines.push(line);
        if done {
            break;
        }
    }
    if header_lines.first().map(|s| s.trim()) != Some("ply") {
        return Err(err(path, 1, "not a ply file (missing magic)"));
    }

    let mut ascii = None;
    let mut elements: Vec<PlyElement> = Vec::new();
    for (i, line) in header_lines.iter().enumerate().skip(1) {
        let ln = i + 1;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("format") => match it.next() {
                Some("ascii") => ascii = Some(true),
                Some("binary_little_endian") => ascii = Some(false),
                other => return Err(err(path, ln, format!("unsupported format {other:?}"))),
            },
            Some("element") => {
                let name = it.next().ok_or_else(|| err(path, ln, "element needs a name"))?;
                let count: usize = it
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| err(path, ln, "element needs a count"))?;
                elements.push(PlyElement { name: name.to_string(), count, props: Vec::new() });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| err(path, ln, "property before any element"))?;
                let t1 = it.next().ok_or_else(|| err(path, ln, "property needs a type"))?;
                if t1 == "list" {
                    let ct = it
                        .next()
                        .and_then(PlyType::parse)
                        .ok_or_else(|| err(path, ln, "bad list count type"))?;
                    let vt = it
                        .next()
                        .and_then(PlyType::parse)
                        .ok_or_else(|| err(path, ln, "bad list value type"))?;
                    let name = it.next().ok_or_else(|| err(path, ln, "list needs a name"))?;
                    el.props.push(PlyProp::List(ct, vt, name.to_string()));
                } else {
                    let t = PlyType::parse(t1)
                        .ok_or_else(|| err(path, ln, format!("unknown type {t1:?}")))?;
                    let name = it.next().ok_or_else(|| err(path, ln, "property needs a name"))?;
                    el.props.push(PlyProp::Scalar(t, name.to_string()));
                }
            }
            Some("comment") | Some("obj_info") | Some("end_header") | None => {}
            Some(other) => return Err(err(path, ln, format!("unknown header record {other:?}"))),
        }
    }
    let ascii = ascii.ok_or_else(|| err(path, 1, "missing format line"))?;

    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    let mut push_face = |idx: &[f64], ln: usize| -> Result<(), MeshError> {
        if idx.len() < 3 {
            return Err(err(path, ln, "face needs at least 3 indices"));
        }
        for k in 1..idx.len() - 1 {
            triangles.push([idx[0] as u32, idx[k] as u32, idx[k + 1] as u32]);
        }
        Ok(())
    };

    if ascii {
        let body = String::from_utf8_lossy(&bytes[offset..]);
        let mut lines = body.lines();
        let mut ln = line_no;
        for el in &elements {
            let xyz = xyz_positions(el, path, ln)?;
            for _ in 0..el.count {
                let row = lines.next().ok_or_else(|| err(path, ln + 1, "body truncated"))?;
                ln += 1;
                let toks: Vec<&str> = row.split_whitespace().collect();
                match el.name.as_str() {
                    "vertex" => {
                        let (xi, yi, zi) = xyz.unwrap();
                        let need = xi.max(yi).max(zi);
                        if toks.len() <= need {
                            return Err(err(path, ln, "vertex row too short"));
                        }
                        let get = |i: usize| -> Result<f64, MeshError> {
                            toks[i]
                                .parse()
                                .map_err(|_| err(path, ln, format!("bad number {:?}", toks[i])))
                        };
                        vertices.push(Vec3::new(get(xi)?, get(yi)?, get(zi)?));
                    }
                    "face" => {
                        let n: usize = toks
                            .first()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| err(path, ln, "face row needs a count"))?;
                        if toks.len() < n + 1 {
                            return Err(err(path, ln, "face row too short"));
                        }
                        let mut idx = Vec::with_capacity(n);
                        for t in &toks[1..=n] {
                            idx.push(
                                t.parse::<f64>()
                                    .map_err(|_| err(path, ln, format!("bad index {t:?}")))?,
                            );
                        }
                        push_face(&idx, ln)?;
                    }
                    _ => {} // unknown elements: skip their rows
                }
            }
        }
    } else {
        let mut cur =
            Cursor { data: bytes, pos: offset, path: path.to_string(), line: line_no };
        for el in &elements {
            let xyz = xyz_positions(el, path, line_no)?;
            for _ in 0..el.count {
                let mut coords = [0.0f64; 3];
                let mut face: Vec<f64> = Vec::new();
                for (pi, prop) in el.props.iter().enumerate() {
                    match prop {
                        PlyProp::Scalar(t, _) => {
                            let v = cur.scalar(*t)?;
                            if el.name == "vertex" {
                                let (xi, yi, zi) = xyz.unwrap();
                                if pi == xi {
                                    coords[0] = v;
                                } else if pi == yi {
                                    coords[1] = v;
                                } else if pi == zi {
                                    coords[2] = v;
                                }
                            }
                        }
                        PlyProp::List(ct, vt, name) => {
                            let n = cur.scalar(*ct)? as usize;
                            let keep = el.name == "face"
                                && (name == "vertex_indices" || name == "vertex_index");
                            for _ in 0..n {
                                let v = cur.scalar(*vt)?;
                                if keep {
                                    face.push(v);
                                }
                            }
                        }
                    }
                }
                if el.name == "vertex" {
                    vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
                } else if el.name == "face" && !face.is_empty() {
                    push_face(&face, line_no)?;
                }
            }
        }
    }

    for (t, tri) in triangles.iter().enumerate() {
        for &i in tri {
            if i as usize >= vertices.len() {
                return Err(err(
                    path,
                    line_no,
                    format!("face {t} references vertex {i} of {}", vertices.len()),
                ));
            }
        }
    }
    SceneMesh::new(vertices, triangles)
}

/// Property positions of x, y, z within a vertex element.
#[allow(clippy::type_complexity)]
fn xyz_positions(
    el: &PlyElement,
    path: &str,
    line: usize,
) -> Result<Option<(usize, usize, usize)>, MeshError> {
    if el.name != "vertex" {
        return Ok(None);
    }
    let mut x = None;
    let mut y = None;
    let mut z = None;
    for (i, p) in el.props.iter().enumerate() {
        if let PlyProp::Scalar(_, name) = p {
            match name.as_str() {
                "x" => x = Some(i),
                "y" => y = Some(i),
                "z" => z = Some(i),
                _ => {}
            }
        }
    }
    match (x, y, z) {
        (Some(x), Some(y), Some(z)) => Ok(Some((x, y, z))),
        _ => Err(err(path, line, "vertex element lacks x/y/z properties")),
    }
}
