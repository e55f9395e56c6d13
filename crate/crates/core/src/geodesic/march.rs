use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::TriMesh;
use crate::{Error, Result};

/// Result of locating the origin and a target in the plane of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unfolded {
    /// `min(through, D_j + D_ij, D_k + D_ik)`.
    pub distance: f64,
    /// Straight-line distance through the triangle, when the unfolding is
    /// feasible and the characteristic crosses the edge `jk`.
    pub through: Option<f64>,
    /// The origin or the target could not be placed (negative discriminant).
    pub infeasible: bool,
}

/// Distance estimate for `r_i` from the triangle `(r_i, r_j, r_k)`.
///
/// The triangle is unfolded with `r_k` at `(0, 0)` and `r_j` at `(D_jk, 0)`.
/// The origin is placed below the edge and `r_i` above it, the largest of the
/// four mirror configurations. The through-triangle value is only used when
/// the segment from the origin to `r_i` actually crosses the edge `jk`;
/// otherwise the estimate falls back to travelling along an edge.
pub fn unfold_candidate(dj: f64, dk: f64, dij: f64, dik: f64, djk: f64) -> Unfolded {
    let edge = (dj + dij).min(dk + dik);
    let fallback = |infeasible| Unfolded {
        distance: edge,
        through: None,
        infeasible,
    };
    if !(djk > 0.0) || !dj.is_finite() || !dk.is_finite() {
        return fallback(true);
    }

    let djk2 = djk * djk;
    let two_djk = 2.0 * djk;
    let disc = |a: f64, b: f64| {
        let (a2, b2) = (a * a, b * b);
        let value = 2.0 * djk2 * b2 - djk2 * djk2 + 2.0 * djk2 * a2 - (a2 - b2) * (a2 - b2);
        let tol = 1e-12 * djk2 * (a2 + b2 + djk2);
        (value, tol)
    };

    let (disc_o, tol_o) = disc(dj, dk);
    let (disc_i, tol_i) = disc(dij, dik);
    if disc_o < -tol_o || disc_i < -tol_i {
        return fallback(true);
    }
    let xo = (dk * dk - dj * dj + djk2) / two_djk;
    let yo = -libm::sqrt(disc_o.max(0.0)) / two_djk;
    let xi = (dik * dik - dij * dij + djk2) / two_djk;
    let yi = libm::sqrt(disc_i.max(0.0)) / two_djk;

    let rise = yi - yo;
    if !(rise > 0.0) {
        return fallback(false);
    }
    let x_cross = xo + (xi - xo) * (-yo / rise);
    let slack = 1e-12 * djk;
    if x_cross < -slack || x_cross > djk + slack {
        return fallback(false);
    }
    let through = libm::hypot(xi - xo, rise);
    Unfolded {
        distance: through.min(edge),
        through: Some(through),
        infeasible: false,
    }
}

/// A source vertex with prescribed distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub vertex: usize,
    pub distance: f64,
}

impl Source {
    pub fn new(vertex: usize, distance: f64) -> Self {
        Source { vertex, distance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MarchStats {
    pub heap_pushes: usize,
    pub heap_pops: usize,
    /// Candidates from triangles whose unfolding was infeasible.
    pub infeasible_unfoldings: usize,
    pub through_updates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarchResult {
    pub distances: Vec<f64>,
    /// Vertices in the order they were accepted.
    pub order: Vec<usize>,
    /// Vertices never reached from any source (distance stays `+∞`).
    pub unreachable: Vec<usize>,
    pub stats: MarchStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Far,
    Considered,
    Accepted,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    distance: f64,
    vertex: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .distance
            .total_cmp(&self.distance)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Geodesic distance from a set of sources by fast marching.
///
/// Each source is its own virtual origin: a through-triangle unfolding is only
/// attempted when both known corners were reached from the same source.
/// Sources keep their prescribed distance.
pub fn fast_march(mesh: &TriMesh, sources: &[Source]) -> Result<MarchResult> {
    if sources.is_empty() {
        return Err(Error::NoSources);
    }
    let n = mesh.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut origin = vec![usize::MAX; n];
    let mut label = vec![Label::Far; n];
    let mut fixed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut stats = MarchStats::default();

    for (k, s) in sources.iter().enumerate() {
        if s.vertex >= n {
            return Err(Error::invalid("source vertex out of range"));
        }
        if !(s.distance >= 0.0 && s.distance.is_finite()) {
            return Err(Error::invalid("source distance must be finite and ≥ 0"));
        }
        if s.distance < dist[s.vertex] {
            dist[s.vertex] = s.distance;
            origin[s.vertex] = k;
        }
        fixed[s.vertex] = true;
    }
    for v in 0..n {
        if fixed[v] {
            label[v] = Label::Considered;
            heap.push(Entry { distance: dist[v], vertex: v });
            stats.heap_pushes += 1;
        }
    }

    let mut order = Vec::with_capacity(n);
    while let Some(Entry { distance, vertex: v }) = heap.pop() {
        stats.heap_pops += 1;
        if label[v] == Label::Accepted || distance > dist[v] {
            continue;
        }
        label[v] = Label::Accepted;
        order.push(v);
        let dv = dist[v];

        for &t in mesh.incident_triangles(v) {
            let tri = mesh.triangles[t];
            let pos = tri.iter().position(|&x| x == v).unwrap_or(0);
            let others = [tri[(pos + 1) % 3], tri[(pos + 2) % 3]];
            for (slot, &i) in others.iter().enumerate() {
                if label[i] == Label::Accepted || fixed[i] {
                    continue;
                }
                let w = others[1 - slot];
                let div = mesh.edge_length(i, v);
                let mut best = dv + div;
                if label[w] == Label::Accepted && origin[w] == origin[v] {
                    let u = unfold_candidate(dv, dist[w], div, mesh.edge_length(i, w), mesh.edge_length(v, w));
                    if u.infeasible {
                        stats.infeasible_unfoldings += 1;
                    }
                    // the new value can never precede the front
                    let c = u.distance.max(dv);
                    if c < best {
                        best = c;
                        if u.through.is_some() {
                            stats.through_updates += 1;
                        }
                    }
                }
                if best < dist[i] {
                    dist[i] = best;
                    origin[i] = origin[v];
                    label[i] = Label::Considered;
                    heap.push(Entry { distance: best, vertex: i });
                    stats.heap_pushes += 1;
                }
            }
        }
    }

    let unreachable = (0..n).filter(|&v| label[v] != Label::Accepted).collect();
    Ok(MarchResult {
        distances: dist,
        order,
        unreachable,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    #[test]
    fn origin_at_corner_k() {
        let h = libm::sqrt(0.5);
        let u = unfold_candidate(1.0, 0.0, h, h, 1.0);
        assert!((u.distance - h).abs() < 1e-15);
        assert!(u.through.is_some());
    }

    #[test]
    fn equilateral_through_value() {
        let u = unfold_candidate(1.0, 1.0, 1.0, 1.0, 1.0);
        let expected = 2.0 * libm::sqrt(0.75);
        assert!((u.distance - expected).abs() < 1e-15);
        assert_eq!(u.through, Some(u.distance));
    }

    #[test]
    fn colinear_origin_uses_edge() {
        // o, r_k, r_j on a line: D_j = D_k + D_jk
        let u = unfold_candidate(2.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(u.through, None);
        assert!(!u.infeasible);
        assert_eq!(u.distance, 2.0);
        // slightly past colinear the origin cannot be placed at all
        let u = unfold_candidate(2.001, 1.0, 1.0, 1.0, 1.0);
        assert!(u.infeasible);
        assert_eq!(u.distance, 2.0);
    }

    #[test]
    fn through_never_exceeds_edge_terms() {
        let u = unfold_candidate(1.3, 1.1, 0.9, 0.7, 0.5);
        assert!(u.distance <= 1.3 + 0.9);
        assert!(u.distance <= 1.1 + 0.7);
    }

    #[test]
    fn empty_sources_rejected() {
        let mesh = TriMesh::new(vec![Vec3::ZERO, Vec3::X, Vec3::Y], vec![[0, 1, 2]]).unwrap();
        assert_eq!(fast_march(&mesh, &[]), Err(Error::NoSources));
    }

    #[test]
    fn all_sources() {
        let mesh = TriMesh::new(vec![Vec3::ZERO, Vec3::X, Vec3::Y], vec![[0, 1, 2]]).unwrap();
        let s: Vec<Source> = (0..3).map(|v| Source::new(v, 0.0)).collect();
        let r = fast_march(&mesh, &s).unwrap();
        assert_eq!(r.distances, vec![0.0; 3]);
    }

    #[test]
    fn disconnected_vertices_reported() {
        let mesh = TriMesh::new(
            vec![Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z * 5.0, Vec3::new(5.0, 0.0, 5.0), Vec3::new(0.0, 5.0, 5.0)],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let r = fast_march(&mesh, &[Source::new(0, 0.0)]).unwrap();
        assert_eq!(r.unreachable, vec![3, 4, 5]);
        assert!(r.distances[4].is_infinite());
    }
}
