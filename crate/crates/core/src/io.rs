//! STL and OBJ export, plus readers for inspection and round trips.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::metrics::MeshReport;

pub const STL_HEADER_TAG: &[u8] = b"tpms-forge";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    #[default]
    StlBinary,
    StlAscii,
    Obj,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::StlBinary | ExportFormat::StlAscii => "stl",
            ExportFormat::Obj => "obj",
        }
    }
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "stl" | "stl_binary" => Ok(ExportFormat::StlBinary),
            "stl_ascii" => Ok(ExportFormat::StlAscii),
            "obj" => Ok(ExportFormat::Obj),
            other => Err(Error::InvalidSpec(format!("unknown export format '{other}'"))),
        }
    }
}

fn unit_normal(mesh: &TriangleMesh, t: usize) -> [f32; 3] {
    let n = mesh.cross(t);
    let len = n.norm();
    if len > 0.0 {
        let n = n / len;
        [n.x as f32, n.y as f32, n.z as f32]
    } else {
        [0.0; 3]
    }
}

/// Binary STL. Returns the number of bytes written, `84 + 50·T`.
pub fn write_stl_binary<W: Write>(mesh: &TriangleMesh, mut sink: W) -> Result<u64> {
    let count = u32::try_from(mesh.triangles.len())
        .map_err(|_| Error::Malformed("too many triangles for STL".into()))?;
    let mut header = [0u8; 80];
    header[..STL_HEADER_TAG.len()].copy_from_slice(STL_HEADER_TAG);
    let mut buf = Vec::with_capacity(84 + 50 * mesh.triangles.len());
    buf.extend_from_slice(&header);
    buf.extend_from_slice(&count.to_le_bytes());
    for t in 0..mesh.triangles.len() {
        for c in unit_normal(mesh, t) {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        for p in mesh.corners(t) {
            for c in [p.x, p.y, p.z] {
                buf.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        buf.extend_from_slice(&[0, 0]);
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(buf.len() as u64)
}

pub fn stl_bytes(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::new();
    write_stl_binary(mesh, &mut out).expect("writing to memory");
    out
}

/// Welds on exact coordinate equality, keeping first-seen order.
struct ExactWelder {
    index: HashMap<[u32; 3], u32>,
    vertices: Vec<Point3<f64>>,
}

impl ExactWelder {
    fn new() -> Self {
        ExactWelder {
            index: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn add(&mut self, p: [f32; 3]) -> u32 {
        // -0.0 and 0.0 compare equal
        let key = p.map(|c| (c + 0.0).to_bits());
        let next = self.vertices.len() as u32;
        *self.index.entry(key).or_insert_with(|| {
            self.vertices
                .push(Point3::new(p[0] as f64, p[1] as f64, p[2] as f64));
            next
        })
    }
}

pub fn read_stl_binary(bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() < 84 {
        return Err(Error::Malformed(format!(
            "binary STL needs at least 84 bytes, got {}",
            bytes.len()
        )));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as u64;
    let expected = 84 + 50 * count;
    if bytes.len() as u64 != expected {
        return Err(Error::Malformed(format!(
            "header declares {count} triangles ({expected} bytes) but stream has {} bytes",
            bytes.len()
        )));
    }
    let f = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let mut welder = ExactWelder::new();
    let mut triangles = Vec::with_capacity(count as usize);
    for t in 0..count as usize {
        let base = 84 + 50 * t + 12;
        let mut tri = [0u32; 3];
        for (v, slot) in tri.iter_mut().enumerate() {
            let o = base + 12 * v;
            let p = [f(o), f(o + 4), f(o + 8)];
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Malformed(format!("non-finite vertex in triangle {t}")));
            }
            *slot = welder.add(p);
        }
        triangles.push(tri);
    }
    Ok(TriangleMesh::new(welder.vertices, triangles))
}

pub fn write_stl_ascii<W: Write>(mesh: &TriangleMesh, mut sink: W) -> Result<u64> {
    let mut out = String::from("solid tpms-forge\n");
    for t in 0..mesh.triangles.len() {
        let n = unit_normal(mesh, t);
        out.push_str(&format!("  facet normal {:e} {:e} {:e}\n    outer loop\n", n[0], n[1], n[2]));
        for p in mesh.corners(t) {
            out.push_str(&format!(
                "      vertex {:e} {:e} {:e}\n",
                p.x as f32, p.y as f32, p.z as f32
            ));
        }
        out.push_str("    endloop\n  endfacet\n");
    }
    out.push_str("endsolid tpms-forge\n");
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok(out.len() as u64)
}

pub fn read_stl_ascii(text: &str) -> Result<TriangleMesh> {
    let mut welder = ExactWelder::new();
    let mut triangles = Vec::new();
    let mut corners = Vec::with_capacity(3);
    for (line_no, line) in text.lines().enumerate() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("vertex") => {
                let p: Vec<f32> = words
                    .map(|w| w.parse::<f32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Malformed(format!("line {}: {e}", line_no + 1)))?;
                if p.len() != 3 {
                    return Err(Error::Malformed(format!("line {}: expected 3 coordinates", line_no + 1)));
                }
                corners.push(welder.add([p[0], p[1], p[2]]));
            }
            Some("endloop") => {
                if corners.len() != 3 {
                    return Err(Error::Malformed(format!(
                        "line {}: facet with {} vertices",
                        line_no + 1,
                        corners.len()
                    )));
                }
                triangles.push([corners[0], corners[1], corners[2]]);
                corners.clear();
            }
            _ => {}
        }
    }
    Ok(TriangleMesh::new(welder.vertices, triangles))
}

/// OBJ with 9 significant digits and 1-based indices. Returns the number of
/// lines written.
pub fn write_obj<W: Write>(mesh: &TriangleMesh, mut sink: W) -> Result<u64> {
    let mut out = String::new();
    for p in &mesh.vertices {
        out.push_str(&format!("v {:.8e} {:.8e} {:.8e}\n", p.x, p.y, p.z));
    }
    for t in &mesh.triangles {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok((mesh.vertices.len() + mesh.triangles.len()) as u64)
}

/// Reads `v` and `f` records; polygons are fan triangulated and
/// `v/vt/vn` references reduced to the vertex index.
pub fn read_obj<R: BufRead>(source: R) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (line_no, line) in source.lines().enumerate() {
        let line = line.map_err(|e| Error::Malformed(e.to_string()))?;
        let bad = |msg: String| Error::Malformed(format!("line {}: {msg}", line_no + 1));
        let mut words = line.split_whitespace();
        match words.next() {
            Some("v") => {
                let c: Vec<f64> = words
                    .take(3)
                    .map(|w| w.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| bad(e.to_string()))?;
                if c.len() != 3 || c.iter().any(|x| !x.is_finite()) {
                    return Err(bad("vertex needs three finite coordinates".into()));
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for w in words {
                    let first = w.split('/').next().unwrap_or("");
                    let i: i64 = first.parse().map_err(|_| bad(format!("bad index '{w}'")))?;
                    let n = vertices.len() as i64;
                    let resolved = if i < 0 { n + i } else { i - 1 };
                    if resolved < 0 || resolved >= n {
                        return Err(bad(format!("index {i} out of range")));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(bad("face needs at least three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(TriangleMesh::new(vertices, triangles))
}

/// Reads a mesh file, choosing the parser from the extension and content.
pub fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    let bytes = std::fs::read(path)?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    if ext.as_deref() == Some("obj") {
        return read_obj(bytes.as_slice());
    }
    match read_stl_binary(&bytes) {
        Ok(m) => Ok(m),
        Err(binary_err) => {
            let ascii = std::str::from_utf8(&bytes)
                .ok()
                .filter(|t| t.trim_start().starts_with("solid"));
            match ascii {
                Some(text) => read_stl_ascii(text),
                None => Err(binary_err),
            }
        }
    }
}

pub fn write_mesh(mesh: &TriangleMesh, path: &Path, format: ExportFormat) -> Result<u64> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        ExportFormat::StlBinary => write_stl_binary(mesh, file),
        ExportFormat::StlAscii => write_stl_ascii(mesh, file),
        ExportFormat::Obj => write_obj(mesh, file),
    }
}

/// `brick.stl` → `brick.report.json`.
pub fn sidecar_path(mesh_path: &Path) -> PathBuf {
    mesh_path.with_extension("report.json")
}

pub fn write_report(report: &MeshReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}
