//! Per-node CSV and the topology needed to rebuild a complex from it.

use std::path::Path;

use hypsurf_core::mesh::{AxisSource, BranchPoint, GluingMap, GridAxis, NodeRef, Parity, SectorGrid, SurfaceComplex, VertexState};
use hypsurf_core::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::g17;

pub const NODE_COLUMNS: [&str; 13] = [
    "sector_id", "i", "j", "vertex_index", "x", "y", "z", "nx", "ny", "nz", "D", "K", "rho",
];

/// One CSV row: a storage slot of the complex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRow {
    pub node: NodeRef,
    pub vertex: usize,
    pub state: VertexState,
    /// As written; `-1/ρ²` for rows produced here.
    pub curvature: f64,
}

/// Rows for every active slot, sectors in order, `i` then `j`.
pub fn node_rows(c: &SurfaceComplex) -> Vec<NodeRow> {
    let index = c.vertex_index();
    let mut rows = Vec::with_capacity(c.active_node_count());
    for (k, s) in c.sectors.iter().enumerate() {
        for (i, j) in s.active_nodes() {
            let node = NodeRef::new(k, i, j);
            let state = *s.node(i, j);
            rows.push(NodeRow {
                node,
                vertex: index.id(c, node),
                state,
                curvature: state.curvature(),
            });
        }
    }
    rows
}

pub fn write_nodes(rows: &[NodeRow], path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(NODE_COLUMNS).map_err(io)?;
    for r in rows {
        let s = &r.state;
        w.write_record([
            r.node.sector.to_string(),
            r.node.i.to_string(),
            r.node.j.to_string(),
            r.vertex.to_string(),
            g17(s.position.x),
            g17(s.position.y),
            g17(s.position.z),
            g17(s.normal.x),
            g17(s.normal.y),
            g17(s.normal.z),
            g17(s.geo_dist),
            g17(r.curvature),
            g17(s.rho),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_nodes(path: &Path) -> Result<Vec<NodeRow>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let fmt = |line: usize, message: String| Error::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = rd.headers().map_err(|e| fmt(1, e.to_string()))?;
    if header.iter().ne(NODE_COLUMNS) {
        return Err(fmt(1, format!("expected columns {}", NODE_COLUMNS.join(","))));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| fmt(line, e.to_string()))?;
        let int = |c: usize| -> Result<usize> {
            rec[c].parse().map_err(|_| fmt(line, format!("bad {} `{}`", NODE_COLUMNS[c], &rec[c])))
        };
        let num = |c: usize| -> Result<f64> {
            rec[c].parse().map_err(|_| fmt(line, format!("bad {} `{}`", NODE_COLUMNS[c], &rec[c])))
        };
        let mut state = VertexState::new(
            Vec3::new(num(4)?, num(5)?, num(6)?),
            Vec3::new(num(7)?, num(8)?, num(9)?),
            num(12)?,
        );
        state.geo_dist = num(10)?;
        rows.push(NodeRow {
            node: NodeRef::new(int(0)?, int(1)?, int(2)?),
            vertex: int(3)?,
            state,
            curvature: num(11)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorShape {
    pub id: usize,
    pub parity: Parity,
    pub ni: usize,
    pub nj: usize,
    pub cut: Option<usize>,
    pub boundary: [AxisSource; 2],
}

/// Everything about a complex except its node data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub sectors: Vec<SectorShape>,
    pub gluings: Vec<GluingMap>,
    pub branch_points: Vec<BranchPoint>,
    pub origin: NodeRef,
}

impl Topology {
    pub fn of(c: &SurfaceComplex) -> Self {
        Topology {
            sectors: c
                .sectors
                .iter()
                .map(|s| SectorShape {
                    id: s.id,
                    parity: s.parity,
                    ni: s.ni(),
                    nj: s.nj(),
                    cut: s.cut,
                    boundary: [s.boundary_source(GridAxis::I).clone(), s.boundary_source(GridAxis::J).clone()],
                })
                .collect(),
            gluings: c.gluings.clone(),
            branch_points: c.branch_points.clone(),
            origin: c.origin,
        }
    }

    /// Fills the grids from `rows`; every active slot must appear once.
    pub fn rebuild(&self, rows: &[NodeRow]) -> Result<SurfaceComplex> {
        let mut sectors = Vec::with_capacity(self.sectors.len());
        for s in &self.sectors {
            let mut g = SectorGrid::new(s.id, s.ni, s.nj, s.parity)?;
            g.cut = s.cut;
            g.set_boundary_source(GridAxis::I, s.boundary[0].clone());
            g.set_boundary_source(GridAxis::J, s.boundary[1].clone());
            sectors.push(g);
        }
        let mut seen: Vec<Vec<bool>> = sectors.iter().map(|g| vec![false; g.nodes().len()]).collect();
        for r in rows {
            let NodeRef { sector, i, j } = r.node;
            let g = sectors
                .get_mut(sector)
                .filter(|g| i <= g.ni() && j <= g.nj() && g.node_active(i, j))
                .ok_or_else(|| Error::config("nodes", format!("row for inactive or unknown node {sector}:({i}, {j})")))?;
            let slot = g.slot(i, j);
            if std::mem::replace(&mut seen[sector][slot], true) {
                return Err(Error::config("nodes", format!("duplicate row for node {sector}:({i}, {j})")));
            }
            g.set_node(i, j, r.state);
        }
        for (k, g) in sectors.iter().enumerate() {
            if let Some((i, j)) = g.active_nodes().find(|&(i, j)| !seen[k][g.slot(i, j)]) {
                return Err(Error::config("nodes", format!("no row for node {k}:({i}, {j})")));
            }
        }
        Ok(SurfaceComplex {
            sectors,
            gluings: self.gluings.clone(),
            branch_points: self.branch_points.clone(),
            origin: self.origin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hypsurf_core::amsler::{build_patched, PatchSpec};

    #[test]
    fn rows_round_trip_through_csv() {
        let mut c = build_patched(&PatchSpec::symmetric(2, 2, 3, 1.0, 1.0)).unwrap();
        for (k, s) in c.sectors.iter_mut().enumerate() {
            for i in 0..=s.ni() {
                for j in 0..=s.nj() {
                    let n = s.node_mut(i, j);
                    n.position = Vec3::new(0.1 * i as f64, 1.0 / (1 + j) as f64, k as f64 / 7.0);
                    n.rho = 1.0 + 0.3 * (i * j) as f64;
                }
            }
        }
        let rows = node_rows(&c);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.csv");
        write_nodes(&rows, &p).unwrap();
        let back = read_nodes(&p).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.node, b.node);
            assert_eq!(a.vertex, b.vertex);
            assert_eq!(a.state.position, b.state.position);
            assert_eq!(a.state.rho.to_bits(), b.state.rho.to_bits());
            assert!(b.state.geo_dist.is_infinite());
        }
        let rebuilt = Topology::of(&c).rebuild(&back).unwrap();
        assert_eq!(rebuilt, c);
    }

    #[test]
    fn missing_row_rejected() {
        let c = build_patched(&PatchSpec::symmetric(2, 1, 1, 1.0, 1.0)).unwrap();
        let mut rows = node_rows(&c);
        rows.pop();
        assert!(Topology::of(&c).rebuild(&rows).is_err());
    }

    #[test]
    fn header_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_nodes(&p), Err(Error::Format { line: 1, .. })));
    }
}
