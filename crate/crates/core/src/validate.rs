//! Structural and numerical checks on a complex.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::lelieuvre::{compatibility_residual, quad_residuals, QuadResiduals};
use crate::mesh::{EdgeLabel, GridAxis, NodeRef, SurfaceComplex};

/// Gluing mismatch accepted by [`ValidationReport::passed`].
pub const GLUING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Mesh edges that received both labels.
    pub label_conflicts: usize,
    /// Mesh edges shared by more than two quads.
    pub nonmanifold_edges: usize,
    pub two_colorable: bool,
    pub gluing_position: f64,
    pub gluing_normal: f64,
    /// Vertices whose quad count is not what the complex records,
    /// as `(vertex, expected, found)`.
    pub incidence_mismatches: Vec<(NodeRef, usize, usize)>,
    /// Quad count at each recorded branch point.
    pub branch_incidence: Vec<(NodeRef, usize)>,
}

impl ValidationReport {
    pub fn labels_consistent(&self) -> bool {
        self.label_conflicts == 0
    }

    pub fn passed(&self) -> bool {
        self.labels_consistent()
            && self.nonmanifold_edges == 0
            && self.two_colorable
            && self.incidence_mismatches.is_empty()
            && self.gluing_position < GLUING_TOL
            && self.gluing_normal < GLUING_TOL
    }
}

/// Checks edge labelling, quad 2-colourability, gluing residuals and
/// vertex–quad incidence.
pub fn validate_complex(c: &SurfaceComplex) -> ValidationReport {
    let index = c.vertex_index();
    let mut quad_verts: Vec<[usize; 4]> = Vec::new();
    let mut edges: BTreeMap<(usize, usize), (EdgeLabel, Vec<usize>)> = BTreeMap::new();
    let mut label_conflicts = 0;

    for (k, s) in c.sectors.iter().enumerate() {
        for (i, j) in s.active_quads() {
            let id = |a, b| index.id(c, NodeRef::new(k, a, b));
            let q = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            let qi = quad_verts.len();
            quad_verts.push(q);
            let li = s.parity.label(GridAxis::I);
            let lj = s.parity.label(GridAxis::J);
            for (a, b, l) in [(q[0], q[1], li), (q[3], q[2], li), (q[0], q[3], lj), (q[1], q[2], lj)] {
                let key = if a < b { (a, b) } else { (b, a) };
                let entry = edges.entry(key).or_insert((l, Vec::new()));
                if entry.0 != l && entry.1.len() == 1 {
                    label_conflicts += 1;
                }
                entry.1.push(qi);
            }
        }
    }

    let nq = quad_verts.len();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); nq];
    let mut nonmanifold_edges = 0;
    let mut boundary_vertex = vec![false; index.len()];
    for (&(a, b), (_, qs)) in &edges {
        match qs.len() {
            1 => {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
            2 => {
                nbrs[qs[0]].push(qs[1]);
                nbrs[qs[1]].push(qs[0]);
            }
            _ => nonmanifold_edges += 1,
        }
    }

    let mut color = vec![u8::MAX; nq];
    let mut two_colorable = true;
    for start in 0..nq {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            for &r in &nbrs[q] {
                if color[r] == u8::MAX {
                    color[r] = 1 - color[q];
                    queue.push_back(r);
                } else if color[r] == color[q] {
                    two_colorable = false;
                }
            }
        }
    }

    let mut count = vec![0usize; index.len()];
    for q in &quad_verts {
        for &v in q {
            count[v] += 1;
        }
    }
    let mut expected: BTreeMap<usize, usize> = BTreeMap::new();
    for bp in &c.branch_points {
        if let Some(v) = index.get(c, bp.node) {
            expected.insert(v, bp.quads);
        }
    }
    let reps = index.representatives();
    let mut incidence_mismatches = Vec::new();
    for v in 0..index.len() {
        let want = match expected.get(&v) {
            Some(&w) => w,
            None if !boundary_vertex[v] && count[v] > 0 => 4,
            None => continue,
        };
        if count[v] != want {
            incidence_mismatches.push((reps[v], want, count[v]));
        }
    }
    let branch_incidence = c
        .branch_points
        .iter()
        .map(|bp| (bp.node, index.get(c, bp.node).map_or(0, |v| count[v])))
        .collect();

    let (gluing_position, gluing_normal) = c.gluing_residuals();
    ValidationReport {
        label_conflicts,
        nonmanifold_edges,
        two_colorable,
        gluing_position,
        gluing_normal,
        incidence_mismatches,
        branch_incidence,
    }
}

/// Per-quad and per-node residual maxima over a complex.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadDiagnostics {
    pub quads: usize,
    pub residuals: QuadResiduals,
    /// Largest `‖(ν_12 + ν_0) × (ν_1 + ν_2)‖`.
    pub compatibility: f64,
    /// Largest `|‖ν‖² - ρ|` over active nodes.
    pub nu_norm: f64,
    /// Smallest `π - ∠(e_u, e_v)` over quads with non-zero edges.
    pub singular_margin: f64,
    /// Nodes with `ρ ≤ 0`, a non-finite field, or a negative distance.
    pub bad_nodes: usize,
}

pub fn quad_diagnostics(c: &SurfaceComplex) -> QuadDiagnostics {
    let mut out = QuadDiagnostics {
        singular_margin: PI,
        ..QuadDiagnostics::default()
    };
    for s in &c.sectors {
        for (i, j) in s.active_quads() {
            let Ok(q) = s.quad_corners(i, j) else { continue };
            out.quads += 1;
            out.residuals = out.residuals.max_with(quad_residuals(&q));
            out.compatibility = out.compatibility.max(compatibility_residual(&q));
            let e_u = q[1].position - q[0].position;
            let e_v = q[2].position - q[0].position;
            if e_u.norm_sq() > 0.0 && e_v.norm_sq() > 0.0 {
                out.singular_margin = out.singular_margin.min(PI - e_u.angle_to(e_v));
            }
        }
        for (i, j) in s.active_nodes() {
            let n = s.node(i, j);
            out.nu_norm = out.nu_norm.max(libm::fabs(n.nu().norm_sq() - n.rho));
            let bad_dist = n.geo_dist < 0.0 || n.geo_dist.is_nan();
            if !(n.rho > 0.0) || !n.position.is_finite() || !n.normal.is_finite() || bad_dist {
                out.bad_nodes += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundarySegment, BranchPoint, GluingMap, Parity, SectorGrid};

    #[test]
    fn single_grid_passes() {
        let c = SurfaceComplex::single(SectorGrid::new(0, 2, 2, Parity::Odd).unwrap());
        let r = validate_complex(&c);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn mismatched_parity_across_gluing_conflicts() {
        let a = SectorGrid::new(0, 2, 2, Parity::Odd).unwrap();
        let b = SectorGrid::new(1, 2, 2, Parity::Odd).unwrap();
        let mut c = SurfaceComplex::single(a);
        c.sectors.push(b);
        // sector 0's j axis (v) onto sector 1's i axis (u)
        c.gluings.push(GluingMap {
            a: BoundarySegment { sector: 0, start: (0, 0), axis: GridAxis::J, len: 3 },
            b: BoundarySegment { sector: 1, start: (0, 0), axis: GridAxis::I, len: 3 },
            ray: None,
        });
        let r = validate_complex(&c);
        assert_eq!(r.label_conflicts, 2);
        assert!(!r.passed());
    }

    #[test]
    fn unrecorded_branch_point_reported() {
        let mut s = SectorGrid::new(0, 3, 3, Parity::Odd).unwrap();
        s.cut = Some(1);
        let mut c = SurfaceComplex::single(s);
        // the cut corner (1,1) is now a boundary vertex; a bogus record fails
        c.branch_points.push(BranchPoint { node: NodeRef::new(0, 1, 1), quads: 5 });
        let r = validate_complex(&c);
        assert_eq!(r.incidence_mismatches, vec![(NodeRef::new(0, 1, 1), 5, 3)]);
    }

    #[test]
    fn flat_grid_diagnostics() {
        let c = SurfaceComplex::single(SectorGrid::new(0, 2, 2, Parity::Odd).unwrap());
        let d = quad_diagnostics(&c);
        assert_eq!(d.quads, 4);
        assert_eq!(d.bad_nodes, 0);
        assert_eq!(d.singular_margin, PI);
    }
}
