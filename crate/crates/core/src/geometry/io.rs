//! Mesh readers (OBJ, STL, OFF) and an OBJ writer.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Stl,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(MeshFormat::Obj),
            "stl" => Some(MeshFormat::Stl),
            "off" => Some(MeshFormat::Off),
            _ => None,
        }
    }
}

/// Loads a mesh, picking the format from the file extension.
pub fn load_mesh_auto(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path).ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        location: "byte 0".into(),
        message: "unknown mesh extension (expected .obj, .stl or .off)".into(),
    })?;
    load_mesh(path, format)
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&bytes, format, path)
}

pub fn parse_mesh(bytes: &[u8], format: MeshFormat, path: &Path) -> Result<TriangleMesh> {
    let (vertices, triangles) = match format {
        MeshFormat::Obj => parse_obj(text(bytes, path)?, path)?,
        MeshFormat::Off => parse_off(text(bytes, path)?, path)?,
        MeshFormat::Stl => parse_stl(bytes, path)?,
    };
    if triangles.is_empty() {
        return Err(Error::validation(format!("{}: mesh has no triangles", path.display())));
    }
    TriangleMesh::new(vertices, triangles)
        .map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

fn text<'a>(bytes: &'a [u8], path: &Path) -> Result<&'a str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        location: format!("byte {}", e.valid_up_to()),
        message: "file is not valid UTF-8".into(),
    })
}

fn line_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        location: format!("line {line}"),
        message: message.into(),
    }
}

fn parse_f64(tok: Option<&str>, path: &Path, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| line_err(path, line, "missing coordinate"))?;
    tok.parse::<f64>()
        .map_err(|_| line_err(path, line, format!("invalid number `{tok}`")))
}

type Parsed = (Vec<Point3<f64>>, Vec<[u32; 3]>);

fn fan(poly: &[u32], out: &mut Vec<[u32; 3]>) {
    for k in 1..poly.len().saturating_sub(1) {
        out.push([poly[0], poly[k], poly[k + 1]]);
    }
}

fn parse_obj(src: &str, path: &Path) -> Result<Parsed> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (n, raw) in src.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), path, line_no)?;
                let y = parse_f64(toks.next(), path, line_no)?;
                let z = parse_f64(toks.next(), path, line_no)?;
                vertices.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in toks {
                    let idx_tok = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_tok
                        .parse()
                        .map_err(|_| line_err(path, line_no, format!("invalid face index `{tok}`")))?;
                    let resolved = match idx {
                        0 => return Err(line_err(path, line_no, "face index 0 is invalid")),
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 {
                        return Err(line_err(path, line_no, format!("face index {idx} out of range")));
                    }
                    poly.push(resolved as u32);
                }
                if poly.len() < 3 {
                    return Err(line_err(path, line_no, "face needs at least 3 vertices"));
                }
                fan(&poly, &mut triangles);
            }
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

fn parse_off(src: &str, path: &Path) -> Result<Parsed> {
    // Tokens paired with their line numbers, comments stripped.
    let toks: Vec<(usize, &str)> = src
        .lines()
        .enumerate()
        .flat_map(|(n, l)| {
            l.split('#')
                .next()
                .unwrap_or("")
                .split_whitespace()
                .map(move |t| (n + 1, t))
        })
        .collect();
    let last_line = src.lines().count().max(1);
    let mut pos = 0usize;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        let tok = toks
            .get(pos)
            .copied()
            .ok_or_else(|| line_err(path, last_line, format!("unexpected end of file reading {what}")))?;
        pos += 1;
        Ok(tok)
    };
    let (line, header) = next("header")?;
    if header != "OFF" {
        return Err(line_err(path, line, "missing OFF header"));
    }
    let mut count = |what: &str| -> Result<usize> {
        let (line, t) = next(what)?;
        t.parse::<usize>()
            .map_err(|_| line_err(path, line, format!("invalid {what} `{t}`")))
    };
    let nv = count("vertex count")?;
    let nf = count("face count")?;
    count("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut c = [0.0; 3];
        for v in &mut c {
            let (line, t) = next("vertex")?;
            *v = parse_f64(Some(t), path, line)?;
        }
        vertices.push(Point3::new(c[0], c[1], c[2]));
    }
    let mut triangles = Vec::new();
    for _ in 0..nf {
        let (line, t) = next("face")?;
        let k: usize = t
            .parse()
            .map_err(|_| line_err(path, line, format!("invalid face size `{t}`")))?;
        let mut poly = Vec::with_capacity(k);
        for _ in 0..k {
            let (line, t) = next("face index")?;
            poly.push(
                t.parse::<u32>()
                    .map_err(|_| line_err(path, line, format!("invalid face index `{t}`")))?,
            );
        }
        if poly.len() < 3 {
            return Err(line_err(path, line, "face needs at least 3 vertices"));
        }
        fan(&poly, &mut triangles);
    }
    Ok((vertices, triangles))
}

/// Welds exactly coincident vertices so STL soups share indices.
struct Welder {
    map: HashMap<[u64; 3], u32>,
    vertices: Vec<Point3<f64>>,
}

impl Welder {
    fn new() -> Self {
        Welder {
            map: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn index(&mut self, p: Point3<f64>) -> u32 {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        *self.map.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            (self.vertices.len() - 1) as u32
        })
    }
}

fn parse_stl(bytes: &[u8], path: &Path) -> Result<Parsed> {
    let looks_ascii = bytes.starts_with(b"solid")
        && std::str::from_utf8(bytes).map(|s| s.contains("facet")).unwrap_or(false);
    if looks_ascii {
        return parse_stl_ascii(text(bytes, path)?, path);
    }
    let byte_err = |at: usize, message: &str| Error::Format {
        path: path.to_path_buf(),
        location: format!("byte {at}"),
        message: message.into(),
    };
    if bytes.len() < 84 {
        return Err(byte_err(bytes.len(), "truncated binary STL header"));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let need = 84 + count * 50;
    if bytes.len() < need {
        return Err(byte_err(bytes.len(), "binary STL shorter than its triangle count"));
    }
    let mut welder = Welder::new();
    let mut triangles = Vec::with_capacity(count);
    for t in 0..count {
        let base = 84 + t * 50 + 12;
        let mut tri = [0u32; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let mut c = [0.0f64; 3];
            for (a, v) in c.iter_mut().enumerate() {
                let off = base + k * 12 + a * 4;
                *v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as f64;
            }
            *slot = welder.index(Point3::new(c[0], c[1], c[2]));
        }
        triangles.push(tri);
    }
    Ok((welder.vertices, triangles))
}

fn parse_stl_ascii(src: &str, path: &Path) -> Result<Parsed> {
    let mut welder = Welder::new();
    let mut triangles = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    for (n, raw) in src.lines().enumerate() {
        let line_no = n + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            Some("vertex") => {
                let x = parse_f64(toks.next(), path, line_no)?;
                let y = parse_f64(toks.next(), path, line_no)?;
                let z = parse_f64(toks.next(), path, line_no)?;
                current.push(welder.index(Point3::new(x, y, z)));
            }
            Some("endloop") => {
                if current.len() < 3 {
                    return Err(line_err(path, line_no, "facet loop has fewer than 3 vertices"));
                }
                fan(&current, &mut triangles);
                current.clear();
            }
            _ => {}
        }
    }
    Ok((welder.vertices, triangles))
}

/// Serializes meshes into one OBJ document, each as its own group.
pub fn to_obj<'a>(meshes: impl IntoIterator<Item = (&'a str, &'a TriangleMesh)>) -> String {
    let mut out = String::new();
    let mut base = 1usize;
    for (name, mesh) in meshes {
        let _ = writeln!(out, "o {name}");
        for v in mesh.vertices() {
            let _ = writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
        }
        for t in mesh.triangles() {
            let _ = writeln!(
                out,
                "f {} {} {}",
                t[0] as usize + base,
                t[1] as usize + base,
                t[2] as usize + base
            );
        }
        base += mesh.vertices().len();
    }
    out
}

pub fn save_obj(path: impl AsRef<Path>, mesh: &TriangleMesh) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_obj([("mesh", mesh)])).map_err(|e| Error::io(path, e))
}
