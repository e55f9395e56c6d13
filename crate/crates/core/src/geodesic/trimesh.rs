use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::mesh::{NodeRef, SurfaceComplex, VertexIndex};
use crate::{Error, Result, Vec3};

/// Tolerance on right angles before a triangle counts as obtuse.
pub const ACUTE_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;
const DEGENERATE_AREA_REL: f64 = 1e-14;

/// Diagonal used to split a quad `a b c d` (cyclic order, `a = (i, j)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagonal {
    /// `a–c`, along `u + v`.
    Main,
    /// `b–d`, along `u - v`.
    Anti,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriangulationReport {
    /// Triangles with an angle above `π/2 + ACUTE_TOL`.
    pub obtuse: usize,
    pub max_angle: f64,
}

/// Triangle mesh with vertex → triangle adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    /// Storage slot each vertex came from, when built from a complex.
    pub back_refs: Vec<NodeRef>,
    pub report: TriangulationReport,
    adj_offsets: Vec<usize>,
    adj: Vec<usize>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if triangles.iter().flatten().any(|&v| v >= n) {
            return Err(Error::invalid("triangle references a missing vertex"));
        }
        let mut counts = vec![0usize; n + 1];
        for t in &triangles {
            for &v in t {
                counts[v + 1] += 1;
            }
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let mut fill = counts.clone();
        let mut adj = vec![0usize; counts[n]];
        for (ti, t) in triangles.iter().enumerate() {
            for &v in t {
                adj[fill[v]] = ti;
                fill[v] += 1;
            }
        }
        let mut report = TriangulationReport::default();
        for t in &triangles {
            let a = max_angle([vertices[t[0]], vertices[t[1]], vertices[t[2]]]);
            report.max_angle = report.max_angle.max(a);
            if a > FRAC_PI_2 + ACUTE_TOL {
                report.obtuse += 1;
            }
        }
        Ok(TriMesh {
            vertices,
            triangles,
            back_refs: Vec::new(),
            report,
            adj_offsets: counts,
            adj,
        })
    }

    /// Splits every quad (cyclic vertex order) along its better diagonal.
    pub fn from_quads(vertices: Vec<Vec3>, quads: &[[usize; 4]]) -> Result<Self> {
        let mut triangles = Vec::with_capacity(2 * quads.len());
        for (k, q) in quads.iter().enumerate() {
            let p = q.map(|v| vertices[v]);
            let diag = choose_diagonal(p).ok_or(Error::DegenerateTriangle { sector: 0, i: k, j: 0 })?;
            triangles.extend(split(*q, diag));
        }
        TriMesh::new(vertices, triangles)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn incident_triangles(&self, v: usize) -> &[usize] {
        &self.adj[self.adj_offsets[v]..self.adj_offsets[v + 1]]
    }

    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        self.vertices[a].distance(self.vertices[b])
    }

    /// Unique undirected edges `(lo, hi)`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

/// Largest interior angle of a triangle; `π` for a degenerate one.
pub fn max_angle(p: [Vec3; 3]) -> f64 {
    let (e0, e1, e2) = (p[1] - p[0], p[2] - p[1], p[0] - p[2]);
    let scale = e0.norm_sq().max(e1.norm_sq()).max(e2.norm_sq());
    if !(e0.cross(e2).norm() > DEGENERATE_AREA_REL * scale) {
        return PI;
    }
    let a0 = e0.angle_to(-e2);
    let a1 = e1.angle_to(-e0);
    let a2 = e2.angle_to(-e1);
    a0.max(a1).max(a2)
}

/// Diagonal minimising the larger triangle angle; ties go to [`Diagonal::Main`].
/// `None` when both splits contain a degenerate triangle.
pub fn choose_diagonal(p: [Vec3; 4]) -> Option<Diagonal> {
    let main = max_angle([p[0], p[1], p[2]]).max(max_angle([p[0], p[2], p[3]]));
    let anti = max_angle([p[0], p[1], p[3]]).max(max_angle([p[1], p[2], p[3]]));
    if main >= PI && anti >= PI {
        return None;
    }
    if main <= anti + TIE_TOL {
        Some(Diagonal::Main)
    } else {
        Some(Diagonal::Anti)
    }
}

fn split(q: [usize; 4], diag: Diagonal) -> [[usize; 3]; 2] {
    let [a, b, c, d] = q;
    match diag {
        Diagonal::Main => [[a, b, c], [a, c, d]],
        Diagonal::Anti => [[a, b, d], [b, c, d]],
    }
}

/// Cyclic corner slots `(i,j), (i+1,j), (i+1,j+1), (i,j+1)` of a quad.
pub fn quad_cycle(i: usize, j: usize) -> [(usize, usize); 4] {
    [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
}

/// Triangulates all active quads of a complex, merging glued nodes.
pub fn triangulate_complex(c: &SurfaceComplex) -> Result<TriMesh> {
    triangulate_indexed(c, &c.vertex_index())
}

/// As [`triangulate_complex`], with a precomputed vertex index.
pub fn triangulate_indexed(c: &SurfaceComplex, index: &VertexIndex) -> Result<TriMesh> {
    let vertices: Vec<Vec3> = index
        .representatives()
        .iter()
        .map(|&n| c.node(n).position)
        .collect();
    let mut triangles = Vec::with_capacity(2 * c.active_quad_count());
    for (k, s) in c.sectors.iter().enumerate() {
        for (i, j) in s.active_quads() {
            let q = quad_cycle(i, j).map(|(a, b)| index.id(c, NodeRef::new(k, a, b)));
            let p = q.map(|v| vertices[v]);
            let diag = choose_diagonal(p).ok_or(Error::DegenerateTriangle { sector: k, i, j })?;
            triangles.extend(split(q, diag));
        }
    }
    let mut mesh = TriMesh::new(vertices, triangles)?;
    mesh.back_refs = index.representatives().to_vec();
    Ok(mesh)
}
