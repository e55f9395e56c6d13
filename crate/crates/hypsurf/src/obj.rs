//! Wavefront OBJ with one normal per vertex and quad faces.

use std::fmt::Write as _;
use std::path::Path;

use hypsurf_core::mesh::{NodeRef, SurfaceComplex};
use hypsurf_core::Vec3;

use crate::error::{Error, Result};
use crate::format::g17;

/// Vertices, normals and faces; face corners are `(vertex, normal)` 0-based.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjMesh {
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub faces: Vec<Vec<(usize, usize)>>,
}

impl ObjMesh {
    /// Deduplicated vertices in [`hypsurf_core::mesh::VertexIndex`] order, one
    /// quad per active grid cell in the cycle `(i,j) (i+1,j) (i+1,j+1) (i,j+1)`.
    pub fn from_complex(c: &SurfaceComplex) -> Self {
        let index = c.vertex_index();
        let reps = index.representatives();
        let vertices = reps.iter().map(|&n| c.node(n).position).collect();
        let normals = reps.iter().map(|&n| c.node(n).normal).collect();
        let mut faces = Vec::with_capacity(c.active_quad_count());
        for (k, s) in c.sectors.iter().enumerate() {
            for (i, j) in s.active_quads() {
                let face = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
                    .iter()
                    .map(|&(a, b)| {
                        let v = index.id(c, NodeRef::new(k, a, b));
                        (v, v)
                    })
                    .collect();
                faces.push(face);
            }
        }
        ObjMesh {
            vertices,
            normals,
            faces,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", g17(v.x), g17(v.y), g17(v.z));
        }
        for n in &self.normals {
            let _ = writeln!(out, "vn {} {} {}", g17(n.x), g17(n.y), g17(n.z));
        }
        for f in &self.faces {
            out.push('f');
            for &(v, n) in f {
                let _ = write!(out, " {}//{}", v + 1, n + 1);
            }
            out.push('\n');
        }
        out
    }

    /// Reads `v`, `vn` and `f` records; comments and blank lines are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut mesh = ObjMesh::default();
        for (ln, line) in text.lines().enumerate() {
            let err = |message: String| Error::Format {
                path: path.to_path_buf(),
                line: ln + 1,
                message,
            };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or_default();
            let rest: Vec<&str> = it.collect();
            match tag {
                "v" | "vn" => {
                    if rest.len() != 3 {
                        return Err(err(format!("`{tag}` needs three coordinates")));
                    }
                    let mut xyz = [0.0; 3];
                    for (x, s) in xyz.iter_mut().zip(&rest) {
                        *x = s.parse().map_err(|_| err(format!("bad number `{s}`")))?;
                    }
                    let p = Vec3::new(xyz[0], xyz[1], xyz[2]);
                    if tag == "v" {
                        mesh.vertices.push(p);
                    } else {
                        mesh.normals.push(p);
                    }
                }
                "f" => {
                    if rest.len() < 3 {
                        return Err(err("face needs at least three corners".into()));
                    }
                    let mut face = Vec::with_capacity(rest.len());
                    for corner in &rest {
                        let mut parts = corner.split('/');
                        let v = parse_index(parts.next(), mesh.vertices.len())
                            .ok_or_else(|| err(format!("bad vertex reference `{corner}`")))?;
                        let n = match (parts.next(), parts.next()) {
                            (Some(_), Some(n)) => parse_index(Some(n), mesh.normals.len())
                                .ok_or_else(|| err(format!("bad normal reference `{corner}`")))?,
                            _ => v,
                        };
                        face.push((v, n));
                    }
                    mesh.faces.push(face);
                }
                other => return Err(err(format!("unsupported record `{other}`"))),
            }
        }
        Ok(mesh)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ObjMesh::parse(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Triangles from splitting each face along the diagonal `0–2`.
    pub fn fan_triangles(&self) -> Vec<[usize; 3]> {
        self.faces
            .iter()
            .flat_map(|f| (1..f.len() - 1).map(move |k| [f[0].0, f[k].0, f[k + 1].0]))
            .collect()
    }
}

fn parse_index(s: Option<&str>, count: usize) -> Option<usize> {
    let k: usize = s?.parse().ok()?;
    (k >= 1 && k <= count).then(|| k - 1)
}
