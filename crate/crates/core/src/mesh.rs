//! Discrete data model: vertex states, sector grids, gluing maps and the
//! surface complex that ties sectors together.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Marker for a geodesic distance that has not been computed yet.
pub const UNSET_DISTANCE: f64 = f64::INFINITY;

/// Asymptotic direction carried by an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum EdgeLabel {
    U,
    V,
}

impl EdgeLabel {
    /// Sign of the Lelieuvre edge relation: `r_1 = r_0 + ν_1 × ν_0` along
    /// `u`, `r_2 = r_0 - ν_2 × ν_0` along `v`.
    pub fn sign(self) -> f64 {
        match self {
            EdgeLabel::U => 1.0,
            EdgeLabel::V => -1.0,
        }
    }

    pub fn other(self) -> EdgeLabel {
        match self {
            EdgeLabel::U => EdgeLabel::V,
            EdgeLabel::V => EdgeLabel::U,
        }
    }
}

/// Orientation of a sector's grid relative to the asymptotic coordinates.
///
/// `Odd` sectors run `u` along the grid `i` direction, `Even` sectors along
/// `j`. Patched sectors alternate, starting with `Odd` for the first one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    /// Parity of the `k`-th (zero-based) sector around a patched origin.
    pub fn for_sector(k: usize) -> Parity {
        if k.is_multiple_of(2) {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn flipped(self) -> Parity {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        }
    }

    pub fn label(self, axis: GridAxis) -> EdgeLabel {
        match (self, axis) {
            (Parity::Odd, GridAxis::I) | (Parity::Even, GridAxis::J) => EdgeLabel::U,
            _ => EdgeLabel::V,
        }
    }
}

/// One of the two grid directions of a sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum GridAxis {
    I,
    J,
}

impl GridAxis {
    pub fn step(self) -> (usize, usize) {
        match self {
            GridAxis::I => (1, 0),
            GridAxis::J => (0, 1),
        }
    }

    fn slot(self) -> usize {
        match self {
            GridAxis::I => 0,
            GridAxis::J => 1,
        }
    }
}

/// Everything stored at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct VertexState {
    pub position: Vec3,
    /// Unit surface normal.
    pub normal: Vec3,
    /// Rescaled curvature `ρ = (-K)^{-1/2}`.
    pub rho: f64,
    /// Geodesic distance to the origin, [`UNSET_DISTANCE`] until known.
    pub geo_dist: f64,
}

impl VertexState {
    pub fn new(position: Vec3, normal: Vec3, rho: f64) -> Self {
        VertexState {
            position,
            normal,
            rho,
            geo_dist: UNSET_DISTANCE,
        }
    }

    /// Rescaled normal `ν = ρ^{1/2} N`.
    #[inline]
    pub fn nu(&self) -> Vec3 {
        self.normal * libm::sqrt(self.rho)
    }

    pub fn curvature(&self) -> f64 {
        -1.0 / (self.rho * self.rho)
    }
}

impl Default for VertexState {
    fn default() -> Self {
        VertexState::new(Vec3::ZERO, Vec3::Z, 1.0)
    }
}

/// Where the nodes of one boundary axis of a sector come from.
///
/// Boundary data is recomputed from its source before every sweep, so that
/// sectors whose boundaries live on other sectors follow them through the
/// outer iteration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum AxisSource {
    /// Straight ray leaving the complex origin; geodesic distance along it is
    /// arc length.
    Ray {
        start: Vec3,
        normal: Vec3,
        direction: Vec3,
        spacing: f64,
    },
    /// Copy of row `j = b` (for an `I` axis) or column `i = b` (for a `J`
    /// axis) of sector `parent`, starting at node `(b, b)`.
    Inherited { parent: usize, b: usize },
    /// `k`-th straight axis through the branch vertex `(b, b)` of `parent`,
    /// at angle `k·θ/m` from the parent's `i` edge.
    BranchAxis {
        parent: usize,
        b: usize,
        k: usize,
        m: usize,
        theta: f64,
        /// `±1`: rotation sense about the branch normal.
        turn: f64,
        spacing: f64,
    },
    /// Data loaded from elsewhere; never refreshed.
    Detached,
}

impl AxisSource {
    pub fn kind(&self) -> &'static str {
        match self {
            AxisSource::Ray { .. } => "ray",
            AxisSource::Inherited { .. } => "inherited",
            AxisSource::BranchAxis { .. } => "branch-axis",
            AxisSource::Detached => "detached",
        }
    }
}

/// A reference to one storage slot of a complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct NodeRef {
    pub sector: usize,
    pub i: usize,
    pub j: usize,
}

impl NodeRef {
    pub fn new(sector: usize, i: usize, j: usize) -> Self {
        NodeRef { sector, i, j }
    }
}

/// One Amsler-type sector: an `(ni+1) × (nj+1)` grid of vertex states.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SectorGrid {
    pub id: usize,
    pub parity: Parity,
    ni: usize,
    nj: usize,
    nodes: Vec<VertexState>,
    /// Corner index `b` of an excised square: quads with `i, j ≥ b` and nodes
    /// with `i, j > b` are removed.
    pub cut: Option<usize>,
    /// Sources of the `i = …, j = 0` axis and the `i = 0, j = …` axis.
    pub boundary: [AxisSource; 2],
}

impl SectorGrid {
    /// A grid with `ni × nj` quads, every node at its default state.
    pub fn new(id: usize, ni: usize, nj: usize, parity: Parity) -> Result<Self> {
        if ni < 1 || nj < 1 {
            return Err(Error::invalid("sector grids need at least one quad per direction"));
        }
        Ok(SectorGrid {
            id,
            parity,
            ni,
            nj,
            nodes: vec![VertexState::default(); (ni + 1) * (nj + 1)],
            cut: None,
            boundary: [AxisSource::Detached, AxisSource::Detached],
        })
    }

    /// Number of quads along `i`.
    pub fn ni(&self) -> usize {
        self.ni
    }

    /// Number of quads along `j`.
    pub fn nj(&self) -> usize {
        self.nj
    }

    pub fn quads_along(&self, axis: GridAxis) -> usize {
        match axis {
            GridAxis::I => self.ni,
            GridAxis::J => self.nj,
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.ni && j <= self.nj);
        i * (self.nj + 1) + j
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> &VertexState {
        &self.nodes[self.idx(i, j)]
    }

    #[inline]
    pub fn node_mut(&mut self, i: usize, j: usize) -> &mut VertexState {
        let k = self.idx(i, j);
        &mut self.nodes[k]
    }

    /// Position of node `(i, j)` in [`SectorGrid::nodes`].
    pub fn slot(&self, i: usize, j: usize) -> usize {
        self.idx(i, j)
    }

    pub fn set_node(&mut self, i: usize, j: usize, state: VertexState) {
        *self.node_mut(i, j) = state;
    }

    pub fn boundary_source(&self, axis: GridAxis) -> &AxisSource {
        &self.boundary[axis.slot()]
    }

    pub fn set_boundary_source(&mut self, axis: GridAxis, source: AxisSource) {
        self.boundary[axis.slot()] = source;
    }

    pub fn node_active(&self, i: usize, j: usize) -> bool {
        i <= self.ni && j <= self.nj && !matches!(self.cut, Some(b) if i > b && j > b)
    }

    pub fn quad_active(&self, i: usize, j: usize) -> bool {
        i < self.ni && j < self.nj && !matches!(self.cut, Some(b) if i >= b && j >= b)
    }

    /// Active nodes in row-major order.
    pub fn active_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.ni).flat_map(move |i| (0..=self.nj).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.node_active(i, j))
    }

    /// Active quads (by lower-left corner) in row-major order.
    pub fn active_quads(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ni).flat_map(move |i| (0..self.nj).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.quad_active(i, j))
    }

    /// Grid indices of `(f_0, f_1, f_2, f_12)` for the quad at `(i, j)`:
    /// `f_1` is the `u`-neighbour of `f_0` and `f_2` its `v`-neighbour.
    pub fn quad_corner_indices(&self, i: usize, j: usize) -> Result<[(usize, usize); 4]> {
        if i >= self.ni || j >= self.nj {
            return Err(Error::IndexOutOfRange { i, j, ni: self.ni, nj: self.nj });
        }
        let (a, b) = ((i + 1, j), (i, j + 1));
        let (f1, f2) = match self.parity {
            Parity::Odd => (a, b),
            Parity::Even => (b, a),
        };
        Ok([(i, j), f1, f2, (i + 1, j + 1)])
    }

    /// States `(f_0, f_1, f_2, f_12)` of the quad at `(i, j)`.
    pub fn quad_corners(&self, i: usize, j: usize) -> Result<[VertexState; 4]> {
        let c = self.quad_corner_indices(i, j)?;
        Ok(c.map(|(a, b)| *self.node(a, b)))
    }

    pub fn nodes(&self) -> &[VertexState] {
        &self.nodes
    }
}

/// A run of consecutive boundary nodes of one sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BoundarySegment {
    pub sector: usize,
    pub start: (usize, usize),
    pub axis: GridAxis,
    /// Number of nodes in the run.
    pub len: usize,
}

impl BoundarySegment {
    pub fn node(&self, t: usize) -> NodeRef {
        let (di, dj) = self.axis.step();
        NodeRef::new(self.sector, self.start.0 + t * di, self.start.1 + t * dj)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeRef> + '_ {
        (0..self.len).map(move |t| self.node(t))
    }
}

/// Identifies node `t` of segment `a` with node `t` of segment `b`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GluingMap {
    pub a: BoundarySegment,
    pub b: BoundarySegment,
    /// Direction of the shared ray when the glued boundary is a straight line
    /// from the origin.
    pub ray: Option<Vec3>,
}

/// A vertex where the number of incident quads differs from four.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BranchPoint {
    pub node: NodeRef,
    pub quads: usize,
}

/// Sectors glued along shared boundaries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SurfaceComplex {
    pub sectors: Vec<SectorGrid>,
    pub gluings: Vec<GluingMap>,
    pub branch_points: Vec<BranchPoint>,
    pub origin: NodeRef,
}

impl SurfaceComplex {
    pub fn single(sector: SectorGrid) -> Self {
        SurfaceComplex {
            sectors: vec![sector],
            gluings: Vec::new(),
            branch_points: Vec::new(),
            origin: NodeRef::new(0, 0, 0),
        }
    }

    pub fn node(&self, n: NodeRef) -> &VertexState {
        self.sectors[n.sector].node(n.i, n.j)
    }

    /// Deduplicates glued storage slots into mesh vertices.
    pub fn vertex_index(&self) -> VertexIndex {
        VertexIndex::build(self)
    }

    /// Largest position and normal mismatch over all glued node pairs.
    pub fn gluing_residuals(&self) -> (f64, f64) {
        let mut pos: f64 = 0.0;
        let mut nrm: f64 = 0.0;
        for g in &self.gluings {
            for (na, nb) in g.a.nodes().zip(g.b.nodes()) {
                let (sa, sb) = (self.node(na), self.node(nb));
                pos = pos.max(sa.position.distance(sb.position));
                nrm = nrm.max(sa.normal.distance(sb.normal));
            }
        }
        (pos, nrm)
    }

    pub fn active_node_count(&self) -> usize {
        self.sectors.iter().map(|s| s.active_nodes().count()).sum()
    }

    pub fn active_quad_count(&self) -> usize {
        self.sectors.iter().map(|s| s.active_quads().count()).sum()
    }
}

/// Map from storage slots to deduplicated mesh vertex ids.
///
/// Ids are assigned in order of first appearance when walking sectors in
/// order and nodes row-major, so the numbering is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexIndex {
    ids: Vec<Vec<usize>>,
    representatives: Vec<NodeRef>,
}

impl VertexIndex {
    fn build(c: &SurfaceComplex) -> Self {
        let offsets: Vec<usize> = c
            .sectors
            .iter()
            .scan(0usize, |acc, s| {
                let o = *acc;
                *acc += s.nodes.len();
                Some(o)
            })
            .collect();
        let total: usize = c.sectors.iter().map(|s| s.nodes.len()).sum();
        let slot = |n: NodeRef| offsets[n.sector] + c.sectors[n.sector].idx(n.i, n.j);

        let mut uf = UnionFind::new(total);
        for g in &c.gluings {
            for (na, nb) in g.a.nodes().zip(g.b.nodes()) {
                uf.union(slot(na), slot(nb));
            }
        }

        let mut root_id = vec![usize::MAX; total];
        let mut ids = Vec::with_capacity(c.sectors.len());
        let mut representatives = Vec::new();
        for (k, s) in c.sectors.iter().enumerate() {
            let mut sector_ids = vec![usize::MAX; s.nodes.len()];
            for (i, j) in s.active_nodes() {
                let root = uf.find(offsets[k] + s.idx(i, j));
                if root_id[root] == usize::MAX {
                    root_id[root] = representatives.len();
                    representatives.push(NodeRef::new(k, i, j));
                }
                sector_ids[s.idx(i, j)] = root_id[root];
            }
            ids.push(sector_ids);
        }
        VertexIndex { ids, representatives }
    }

    pub fn get(&self, c: &SurfaceComplex, n: NodeRef) -> Option<usize> {
        let s = &c.sectors[n.sector];
        if !s.node_active(n.i, n.j) {
            return None;
        }
        let id = self.ids[n.sector][s.idx(n.i, n.j)];
        (id != usize::MAX).then_some(id)
    }

    /// Id of an active node; panics on excised or out-of-range nodes.
    pub fn id(&self, c: &SurfaceComplex, n: NodeRef) -> usize {
        self.get(c, n).expect("node is not an active vertex")
    }

    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// First storage slot mapped to each vertex id.
    pub fn representatives(&self) -> &[NodeRef] {
        &self.representatives
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller slot as root so numbering follows storage order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}
