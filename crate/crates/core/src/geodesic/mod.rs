//! Geodesic distance on a triangulated complex by fast marching.
//!
//! Every quad is cut along one diagonal, glued boundary nodes are merged, and
//! distances are propagated from a source set with a planar unfolding of each
//! triangle.

mod dijkstra;
mod march;
mod trimesh;

use alloc::vec;
use alloc::vec::Vec;

pub use dijkstra::dijkstra_bound;
pub use march::{fast_march, unfold_candidate, MarchResult, MarchStats, Source, Unfolded};
pub use trimesh::{
    choose_diagonal, max_angle, quad_cycle, triangulate_complex, triangulate_indexed, Diagonal,
    TriMesh, TriangulationReport, ACUTE_TOL,
};

use crate::mesh::{NodeRef, SurfaceComplex, VertexIndex};
use crate::Result;

/// A value per storage slot of a complex, laid out like [`crate::mesh::SectorGrid::nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    pub values: Vec<Vec<f64>>,
}

impl NodeField {
    pub fn filled(c: &SurfaceComplex, value: f64) -> Self {
        NodeField {
            values: c.sectors.iter().map(|s| vec![value; s.nodes().len()]).collect(),
        }
    }

    pub fn get(&self, c: &SurfaceComplex, n: NodeRef) -> f64 {
        self.values[n.sector][c.sectors[n.sector].slot(n.i, n.j)]
    }

    fn set(&mut self, c: &SurfaceComplex, n: NodeRef, v: f64) {
        self.values[n.sector][c.sectors[n.sector].slot(n.i, n.j)] = v;
    }
}

/// Supplies geodesic distance from the complex origin on its current geometry.
pub trait DistanceProvider {
    fn distances(&mut self, c: &SurfaceComplex) -> Result<NodeField>;
}

/// Full solve on a complex: mesh, march result and per-slot distances.
#[derive(Debug, Clone)]
pub struct ComplexDistance {
    pub mesh: TriMesh,
    pub index: VertexIndex,
    pub march: MarchResult,
    pub field: NodeField,
}

/// Fast marching from `sources` (storage slots with prescribed distance).
pub fn complex_distance(c: &SurfaceComplex, sources: &[(NodeRef, f64)]) -> Result<ComplexDistance> {
    let index = c.vertex_index();
    let mesh = triangulate_indexed(c, &index)?;
    let src: Vec<Source> = sources
        .iter()
        .map(|&(n, d)| Source::new(index.id(c, n), d))
        .collect();
    let march = fast_march(&mesh, &src)?;
    let mut field = NodeField::filled(c, f64::INFINITY);
    for (k, s) in c.sectors.iter().enumerate() {
        for (i, j) in s.active_nodes() {
            let n = NodeRef::new(k, i, j);
            field.set(c, n, march.distances[index.id(c, n)]);
        }
    }
    Ok(ComplexDistance {
        mesh,
        index,
        march,
        field,
    })
}

/// The default provider: fast marching from the origin on the whole complex.
#[derive(Debug, Clone, Default)]
pub struct FastMarching {
    /// Counters from the most recent solve.
    pub stats: MarchStats,
    /// Triangulation summary from the most recent solve.
    pub triangulation: TriangulationReport,
    pub solves: usize,
}

impl DistanceProvider for FastMarching {
    fn distances(&mut self, c: &SurfaceComplex) -> Result<NodeField> {
        let r = complex_distance(c, &[(c.origin, 0.0)])?;
        self.stats = r.march.stats;
        self.triangulation = r.mesh.report;
        self.solves += 1;
        Ok(r.field)
    }
}
