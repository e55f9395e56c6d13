//! Diagnostics recomputed from exported files.

use std::fmt::Write as _;

use hypsurf_core::amsler::{ray_distance_error, StageLog};
use hypsurf_core::curvature::CurvatureSpec;
use hypsurf_core::geodesic::complex_distance;
use hypsurf_core::mesh::{NodeRef, SurfaceComplex};
use hypsurf_core::validate::{quad_diagnostics, validate_complex, GLUING_TOL};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::obj::ObjMesh;
use crate::table::{NodeRow, Topology};

/// Quad residuals above this fail [`DiagnosticsReport::passed`].
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Boundary-ray distance error above this fails [`DiagnosticsReport::passed`].
pub const ARC_LENGTH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub epsilon: f64,
    pub changes: Vec<f64>,
}

impl From<&StageLog> for StageRecord {
    fn from(l: &StageLog) -> Self {
        StageRecord {
            epsilon: l.epsilon,
            changes: l.changes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub sectors: usize,
    pub vertices: usize,
    pub faces: usize,
    /// Largest `‖(ν_12 + ν_0) × (ν_1 + ν_2)‖`.
    pub compatibility: f64,
    pub tangency: f64,
    pub edge_length: f64,
    pub unit_norm: f64,
    pub edge_relation: f64,
    pub route: f64,
    /// Largest `|‖ν‖² - ρ|`.
    pub nu_norm: f64,
    pub bad_nodes: usize,
    pub stages: Vec<StageRecord>,
    /// Largest `|D - t h|` along boundary rays.
    pub ray_arc_length_error: f64,
    pub gluing_position: f64,
    pub gluing_normal: f64,
    pub obtuse_triangles: usize,
    pub max_triangle_angle: f64,
    /// Smallest `π - ∠(e_u, e_v)` over quads.
    pub singular_margin: f64,
    pub label_conflicts: usize,
    pub nonmanifold_edges: usize,
    pub two_colorable: bool,
    pub incidence_mismatches: usize,
    pub branch_incidence: Vec<(NodeRef, usize)>,
    /// Largest disagreement between OBJ records and CSV rows.
    pub mesh_mismatch: f64,
    /// OBJ faces that differ from the faces of the rebuilt complex.
    pub face_mismatches: usize,
}

/// JSON sidecar: the report plus what is needed to reload the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub curvature: CurvatureSpec,
    pub diagnostics: DiagnosticsReport,
    pub topology: Topology,
}

impl DiagnosticsReport {
    /// Builds the report for the complex rebuilt from `rows`, checking
    /// `obj` against the same rows.
    pub fn compute(topology: &Topology, rows: &[NodeRow], obj: &ObjMesh, stages: Vec<StageRecord>) -> Result<Self> {
        let c = topology.rebuild(rows)?;
        let q = quad_diagnostics(&c);
        let v = validate_complex(&c);
        let dist = complex_distance(&c, &[(c.origin, 0.0)])?;
        let index = &dist.index;

        let mut mesh_mismatch: f64 = if obj.vertices.len() == index.len() && obj.normals.len() == index.len() {
            0.0
        } else {
            f64::INFINITY
        };
        for r in rows {
            let (Some(p), Some(n)) = (obj.vertices.get(r.vertex), obj.normals.get(r.vertex)) else {
                mesh_mismatch = f64::INFINITY;
                continue;
            };
            if index.get(&c, r.node) != Some(r.vertex) {
                mesh_mismatch = f64::INFINITY;
            }
            mesh_mismatch = mesh_mismatch
                .max(p.distance(r.state.position))
                .max(n.distance(r.state.normal));
        }
        let expected = ObjMesh::from_complex(&c).faces;
        let face_mismatches = expected.iter().zip(&obj.faces).filter(|(a, b)| a != b).count()
            + expected.len().abs_diff(obj.faces.len());

        Ok(DiagnosticsReport {
            sectors: c.sectors.len(),
            vertices: index.len(),
            faces: obj.faces.len(),
            compatibility: q.compatibility,
            tangency: q.residuals.tangency,
            edge_length: q.residuals.edge_length,
            unit_norm: q.residuals.unit_norm,
            edge_relation: q.residuals.edge_relation,
            route: q.residuals.route,
            nu_norm: q.nu_norm,
            bad_nodes: q.bad_nodes,
            stages,
            ray_arc_length_error: ray_distance_error(&c, &dist.field),
            gluing_position: v.gluing_position,
            gluing_normal: v.gluing_normal,
            obtuse_triangles: dist.mesh.report.obtuse,
            max_triangle_angle: dist.mesh.report.max_angle,
            singular_margin: q.singular_margin,
            label_conflicts: v.label_conflicts,
            nonmanifold_edges: v.nonmanifold_edges,
            two_colorable: v.two_colorable,
            incidence_mismatches: v.incidence_mismatches.len(),
            branch_incidence: v.branch_incidence,
            mesh_mismatch,
            face_mismatches,
        })
    }

    pub fn max_residual(&self) -> f64 {
        [
            self.compatibility,
            self.tangency,
            self.edge_length,
            self.unit_norm,
            self.edge_relation,
            self.route,
            self.nu_norm,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Names of the checks that fail.
    pub fn failures(&self) -> Vec<&'static str> {
        let checks = [
            (self.max_residual() < RESIDUAL_TOL, "quad residuals"),
            (self.bad_nodes == 0, "node data"),
            (self.ray_arc_length_error < ARC_LENGTH_TOL, "boundary arc length"),
            (self.gluing_position < GLUING_TOL && self.gluing_normal < GLUING_TOL, "gluing continuity"),
            (self.label_conflicts == 0, "edge labels"),
            (self.nonmanifold_edges == 0, "manifold edges"),
            (self.two_colorable, "quad 2-colouring"),
            (self.incidence_mismatches == 0, "vertex incidence"),
            (self.mesh_mismatch == 0.0 && self.face_mismatches == 0, "OBJ/CSV agreement"),
        ];
        checks.into_iter().filter(|(ok, _)| !ok).map(|(_, name)| name).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "sectors              {}", self.sectors);
        let _ = writeln!(w, "vertices             {}", self.vertices);
        let _ = writeln!(w, "faces                {}", self.faces);
        let _ = writeln!(w, "compatibility        {:.3e}", self.compatibility);
        let _ = writeln!(w, "tangency             {:.3e}", self.tangency);
        let _ = writeln!(w, "edge length          {:.3e}", self.edge_length);
        let _ = writeln!(w, "unit norm            {:.3e}", self.unit_norm);
        let _ = writeln!(w, "edge relation        {:.3e}", self.edge_relation);
        let _ = writeln!(w, "route                {:.3e}", self.route);
        let _ = writeln!(w, "|nu|^2 - rho         {:.3e}", self.nu_norm);
        let _ = writeln!(w, "bad nodes            {}", self.bad_nodes);
        for (k, st) in self.stages.iter().enumerate() {
            let changes: Vec<String> = st.changes.iter().map(|c| format!("{c:.3e}")).collect();
            let tail = &st.changes[st.changes.len().saturating_sub(3)..];
            let monotone = if tail.windows(2).all(|p| p[1] <= p[0]) { "" } else { " (tail not monotone)" };
            let _ = writeln!(
                w,
                "stage {k} eps={} iterations={} CHANGE [{}]{monotone}",
                st.epsilon,
                st.changes.len(),
                changes.join(", ")
            );
        }
        let _ = writeln!(w, "ray arc length error {:.3e}", self.ray_arc_length_error);
        let _ = writeln!(w, "gluing position      {:.3e}", self.gluing_position);
        let _ = writeln!(w, "gluing normal        {:.3e}", self.gluing_normal);
        let _ = writeln!(w, "obtuse triangles     {}", self.obtuse_triangles);
        let _ = writeln!(w, "max triangle angle   {:.6}", self.max_triangle_angle);
        let _ = writeln!(w, "singular margin      {:.6}", self.singular_margin);
        let _ = writeln!(w, "label conflicts      {}", self.label_conflicts);
        let _ = writeln!(w, "nonmanifold edges    {}", self.nonmanifold_edges);
        let _ = writeln!(w, "two-colourable       {}", self.two_colorable);
        let _ = writeln!(w, "incidence mismatches {}", self.incidence_mismatches);
        for (n, q) in &self.branch_incidence {
            let _ = writeln!(w, "branch point {}:({}, {}) quads={q}", n.sector, n.i, n.j);
        }
        let _ = writeln!(w, "OBJ/CSV mismatch     {:.3e} ({} faces)", self.mesh_mismatch, self.face_mismatches);
        match self.failures().as_slice() {
            [] => {
                let _ = writeln!(w, "status               ok");
            }
            f => {
                let _ = writeln!(w, "status               FAILED: {}", f.join(", "));
            }
        }
        s
    }
}

/// Rows, topology and mesh of an in-memory complex, as they would be exported.
pub fn report_for(c: &SurfaceComplex, stages: Vec<StageRecord>) -> Result<DiagnosticsReport> {
    let rows = crate::table::node_rows(c);
    DiagnosticsReport::compute(&Topology::of(c), &rows, &ObjMesh::from_complex(c), stages)
}
