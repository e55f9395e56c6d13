//! Branch-point surgery.
//!
//! The square `b ≤ i, j` of a sector is removed and the angle `θ_b` at the
//! corner `(b, b)` is split into `m` equal parts by straight axes in the
//! tangent plane. `m` new sectors fill the gap: the first inherits the
//! parent's row `j = b` as its `i` boundary, the last inherits the column
//! `i = b` as its `j` boundary, and consecutive new sectors share an axis.
//! Parities alternate, so the edge labels only close up when `m` is odd.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use crate::amsler::{check_gluings, converge, seed_sectors, IterationConfig, StageLog};
use crate::curvature::CurvatureSpec;
use crate::geodesic::DistanceProvider;
use crate::mesh::{AxisSource, BoundarySegment, BranchPoint, GluingMap, GridAxis, NodeRef, SectorGrid, SurfaceComplex};
use crate::{Error, Result, Vec3};

/// Corner angles this close to `π` are reported as singular.
pub const SINGULAR_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurgerySpec {
    pub sector: usize,
    pub b: usize,
    pub m: usize,
    /// Edge length along the new axes; defaults to the mean corner edge.
    pub spacing: Option<f64>,
    /// Quads along each new axis; defaults to `ni - b` of the target.
    pub size: Option<usize>,
}

impl SurgerySpec {
    pub fn new(sector: usize, b: usize, m: usize) -> Self {
        SurgerySpec {
            sector,
            b,
            m,
            spacing: None,
            size: None,
        }
    }
}

/// Checks that `m` is an odd branch order of at least 3.
pub fn check_branch_order(m: usize) -> Result<()> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::EvenBranchOrder(m));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitAxes {
    /// Angle between the two grid edges at the corner.
    pub theta: f64,
    /// `±1`: sense of rotation from the `i` edge to the `j` edge about `N_bb`.
    pub turn: f64,
    /// `m - 1` unit directions at angles `kθ/m`, `k = 1 … m-1`.
    pub directions: Vec<Vec3>,
    /// `θ` is within [`SINGULAR_MARGIN`] of `π`.
    pub singular: bool,
    /// Mean length of the two corner edges.
    pub corner_spacing: f64,
}

/// Directions splitting the corner angle at `(b, b)` into `m` equal parts.
pub fn split_angle_axes(sector: &SectorGrid, b: usize, m: usize) -> Result<SplitAxes> {
    if m < 2 {
        return Err(Error::invalid("need at least two parts"));
    }
    if b + 1 > sector.ni() || b + 1 > sector.nj() {
        return Err(Error::IndexOutOfRange {
            i: b + 1,
            j: b + 1,
            ni: sector.ni(),
            nj: sector.nj(),
        });
    }
    let corner = sector.node(b, b);
    let e_i = sector.node(b + 1, b).position - corner.position;
    let e_j = sector.node(b, b + 1).position - corner.position;
    let (li, lj) = (e_i.norm(), e_j.norm());
    let u = e_i
        .normalized()
        .filter(|_| lj > 0.0)
        .ok_or_else(|| Error::invalid("zero-length edge at cut corner"))?;
    let theta = e_i.angle_to(e_j);
    let turn = if e_i.cross(e_j).dot(corner.normal) < 0.0 { -1.0 } else { 1.0 };
    let directions = (1..m)
        .map(|k| u.rotated(corner.normal * turn, k as f64 * theta / m as f64))
        .collect();
    Ok(SplitAxes {
        theta,
        turn,
        directions,
        singular: theta >= PI - SINGULAR_MARGIN,
        corner_spacing: 0.5 * (li + lj),
    })
}

/// Result of one branch-point insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryOutcome {
    pub new_sectors: Range<usize>,
    pub axes: SplitAxes,
    pub log: StageLog,
}

/// Cuts the target sector and attaches `m` new sectors with their gluings
/// and boundary sources. New sectors hold no data yet.
///
/// Does not check that `m` is odd; see [`insert_branch_point`].
pub fn splice_branch_sectors(c: &mut SurfaceComplex, spec: &SurgerySpec) -> Result<(Range<usize>, SplitAxes)> {
    let SurgerySpec { sector, b, m, .. } = *spec;
    if sector >= c.sectors.len() {
        return Err(Error::invalid("surgery target sector does not exist"));
    }
    let parent = &c.sectors[sector];
    if parent.cut.is_some() {
        return Err(Error::invalid("sector already carries a branch point"));
    }
    if b < 1 || b >= parent.ni() || b >= parent.nj() {
        return Err(Error::invalid("cut index must satisfy 1 ≤ b < min(I, J)"));
    }
    let axes = split_angle_axes(parent, b, m)?;
    let spacing = spec.spacing.unwrap_or(axes.corner_spacing);
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid("branch axis spacing must be positive"));
    }
    let size = spec.size.unwrap_or(parent.ni() - b);
    if size < 1 {
        return Err(Error::invalid("new sector size must be ≥ 1"));
    }
    let (pi, pj, parity) = (parent.ni() - b, parent.nj() - b, parent.parity);

    let first = c.sectors.len();
    c.sectors[sector].cut = Some(b);
    let branch_axis = |k: usize| AxisSource::BranchAxis {
        parent: sector,
        b,
        k,
        m,
        theta: axes.theta,
        turn: axes.turn,
        spacing,
    };
    for k in 1..=m {
        let ni = if k == 1 { pi } else { size };
        let nj = if k == m { pj } else { size };
        let p = if k % 2 == 1 { parity } else { parity.flipped() };
        let mut s = SectorGrid::new(first + k - 1, ni, nj, p)?;
        let i_src = if k == 1 {
            AxisSource::Inherited { parent: sector, b }
        } else {
            branch_axis(k - 1)
        };
        let j_src = if k == m {
            AxisSource::Inherited { parent: sector, b }
        } else {
            branch_axis(k)
        };
        s.set_boundary_source(GridAxis::I, i_src);
        s.set_boundary_source(GridAxis::J, j_src);
        c.sectors.push(s);
    }

    let seg = |sector, start, axis, len| BoundarySegment { sector, start, axis, len };
    c.gluings.push(GluingMap {
        a: seg(sector, (b, b), GridAxis::I, pi + 1),
        b: seg(first, (0, 0), GridAxis::I, pi + 1),
        ray: None,
    });
    for k in 0..m - 1 {
        c.gluings.push(GluingMap {
            a: seg(first + k, (0, 0), GridAxis::J, size + 1),
            b: seg(first + k + 1, (0, 0), GridAxis::I, size + 1),
            ray: None,
        });
    }
    c.gluings.push(GluingMap {
        a: seg(first + m - 1, (0, 0), GridAxis::J, pj + 1),
        b: seg(sector, (b, b), GridAxis::J, pj + 1),
        ray: None,
    });
    c.branch_points.push(BranchPoint {
        node: NodeRef::new(sector, b, b),
        quads: 3 + m,
    });
    Ok((first..first + m, axes))
}

/// Inserts a branch point and re-converges the whole complex at `curv`.
pub fn insert_branch_point(
    c: &mut SurfaceComplex,
    spec: &SurgerySpec,
    curv: &CurvatureSpec,
    cfg: &IterationConfig,
    provider: &mut dyn DistanceProvider,
) -> Result<SurgeryOutcome> {
    check_branch_order(spec.m)?;
    let (new_sectors, axes) = splice_branch_sectors(c, spec)?;
    seed_sectors(c, new_sectors.clone(), curv)?;
    let log = converge(c, curv, cfg, provider)?;
    check_gluings(c)?;
    Ok(SurgeryOutcome { new_sectors, axes, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Parity, VertexState};

    fn flat_corner(theta: f64) -> SectorGrid {
        let mut s = SectorGrid::new(0, 2, 2, Parity::Odd).unwrap();
        s.set_node(1, 1, VertexState::new(Vec3::ZERO, Vec3::Z, 1.0));
        s.set_node(2, 1, VertexState::new(Vec3::X, Vec3::Z, 1.0));
        let e = Vec3::new(libm::cos(theta), libm::sin(theta), 0.0);
        s.set_node(1, 2, VertexState::new(e, Vec3::Z, 1.0));
        s
    }

    #[test]
    fn trisection_of_right_angle() {
        let a = split_angle_axes(&flat_corner(PI / 2.0), 1, 3).unwrap();
        assert_eq!(a.directions.len(), 2);
        for (k, d) in a.directions.iter().enumerate() {
            let want = (k + 1) as f64 * PI / 6.0;
            assert!((d.angle_to(Vec3::X) - want).abs() < 1e-12);
            assert!(d.z.abs() < 1e-15);
        }
        assert!(!a.singular);
    }

    #[test]
    fn five_parts() {
        let a = split_angle_axes(&flat_corner(2.0), 1, 5).unwrap();
        assert_eq!(a.directions.len(), 4);
        assert!((a.directions[3].angle_to(Vec3::X) - 1.6).abs() < 1e-12);
    }

    #[test]
    fn clockwise_corner_turns_negative() {
        let mut s = flat_corner(PI / 2.0);
        s.node_mut(1, 2).position = -Vec3::Y;
        let a = split_angle_axes(&s, 1, 3).unwrap();
        assert_eq!(a.turn, -1.0);
        assert!(a.directions[0].y < 0.0);
    }

    #[test]
    fn flat_corner_flagged_singular() {
        let a = split_angle_axes(&flat_corner(PI), 1, 3).unwrap();
        assert!(a.singular);
    }

    #[test]
    fn even_order_rejected() {
        assert_eq!(check_branch_order(4), Err(Error::EvenBranchOrder(4)));
        assert_eq!(check_branch_order(1), Err(Error::EvenBranchOrder(1)));
        assert!(check_branch_order(5).is_ok());
    }

    #[test]
    fn splice_builds_children() {
        let mut c = SurfaceComplex::single(flat_corner(PI / 2.0));
        let (range, _) = splice_branch_sectors(&mut c, &SurgerySpec::new(0, 1, 3)).unwrap();
        assert_eq!(range, 1..4);
        assert_eq!(c.sectors[1].parity, Parity::Odd);
        assert_eq!(c.sectors[2].parity, Parity::Even);
        assert_eq!(c.sectors[3].parity, Parity::Odd);
        assert_eq!(c.gluings.len(), 4);
        assert_eq!(c.branch_points[0].quads, 6);
        assert!(splice_branch_sectors(&mut c, &SurgerySpec::new(0, 1, 3)).is_err());
    }
}
