//! Amsler-type sectors and the outer curvature–distance iteration.
//!
//! A sector is bounded by two straight rays from the origin. Along a ray of
//! direction `s` the normal turns about `-σ s` (with `σ = ±1` the sign of the
//! ray's edge label) by `δ_t = asin(h / (ρ_t ρ_{t+1})^{1/2})`, which makes
//! every boundary edge satisfy the Lelieuvre relation with length `h`.
//!
//! Interior nodes depend on `ρ`, which depends on geodesic distance, which
//! depends on the surface. [`converge`] breaks the cycle by freezing `ρ` from
//! the previous iterate, re-sweeping, and repeating until positions settle.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::curvature::{CurvatureFamily, CurvatureSpec};
use crate::geodesic::{DistanceProvider, NodeField};
use crate::lelieuvre::{sweep_sector, sweep_sector_constant};
use crate::mesh::{
    AxisSource, BoundarySegment, BranchPoint, GluingMap, GridAxis, NodeRef, Parity, SectorGrid,
    SurfaceComplex, VertexState,
};
use crate::{Error, Result, Vec3};

/// Tolerance on the sector angle sum.
pub const ANGLE_SUM_TOL: f64 = 1e-12;
/// Largest allowed normal jump across a gluing after generation.
pub const GLUING_TOL: f64 = 1e-10;

/// One stand-alone sector between two rays from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSpec {
    /// Direction of the `i` axis.
    pub s_a: Vec3,
    /// Direction of the `j` axis.
    pub s_b: Vec3,
    /// Length of the `i` axis.
    pub u_max: f64,
    /// Length of the `j` axis.
    pub v_max: f64,
    pub ni: usize,
    pub nj: usize,
    pub parity: Parity,
}

impl SectorSpec {
    /// Sector in the `z = 0` plane with `s_a = x̂` and `s_b` at angle `phi1`.
    pub fn planar(phi1: f64, u_max: f64, v_max: f64, ni: usize, nj: usize) -> Self {
        SectorSpec {
            s_a: Vec3::X,
            s_b: Vec3::new(libm::cos(phi1), libm::sin(phi1), 0.0),
            u_max,
            v_max,
            ni,
            nj,
            parity: Parity::Odd,
        }
    }

    /// Angle between the two boundary rays.
    pub fn phi1(&self) -> f64 {
        self.s_a.angle_to(self.s_b)
    }

    pub fn validate(&self) -> Result<()> {
        let phi = self.phi1();
        if !(phi > 0.0 && phi < PI) {
            return Err(Error::invalid("sector angle must lie in (0, π)"));
        }
        if !(self.u_max > 0.0 && self.v_max > 0.0) || !self.u_max.is_finite() || !self.v_max.is_finite() {
            return Err(Error::invalid("u_max and v_max must be positive"));
        }
        if libm::fabs(self.s_a.z) > 0.0 || libm::fabs(self.s_b.z) > 0.0 {
            return Err(Error::invalid("boundary rays must lie in the z = 0 plane"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            tol: 1e-4,
            max_iters: 100,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::invalid("tol must be > 0 and max_iters ≥ 1"));
        }
        Ok(())
    }
}

/// Record of one continuation stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageLog {
    pub epsilon: f64,
    /// `CHANGE` after every outer loop.
    pub changes: Vec<f64>,
}

impl StageLog {
    pub fn iterations(&self) -> usize {
        self.changes.len()
    }

    pub fn final_change(&self) -> f64 {
        self.changes.last().copied().unwrap_or(f64::NAN)
    }

    /// Whether the last three `CHANGE` values are nonincreasing.
    pub fn tail_nonincreasing(&self) -> bool {
        let n = self.changes.len();
        let tail = &self.changes[n.saturating_sub(3)..];
        tail.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Geometric ε steps `1, 2, 4, …` capped at `target`.
pub fn auto_schedule(target: f64) -> Vec<f64> {
    if !(target > 1.0) {
        return vec![target];
    }
    let mut out = Vec::new();
    let mut e = 1.0;
    while e < target {
        out.push(e);
        e *= 2.0;
    }
    out.push(target);
    out
}

/// Fails on an empty or decreasing schedule.
pub fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::invalid("ε schedule is empty"));
    }
    if schedule.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::invalid("ε schedule must be nondecreasing"));
    }
    Ok(())
}

/// States along a straight axis of `count` nodes leaving `start`.
///
/// `sign` is the edge-label sign of the axis; `ρ` past the start follows the
/// arc length `start.geo_dist + t h`.
pub fn ray_states(
    start: VertexState,
    direction: Vec3,
    spacing: f64,
    sign: f64,
    count: usize,
    curv: &CurvatureSpec,
) -> Result<Vec<VertexState>> {
    let mut out = Vec::with_capacity(count);
    out.push(start);
    let axis = direction * -sign;
    let mut prev = start;
    for t in 1..count {
        let d = start.geo_dist + t as f64 * spacing;
        let rho = curv.rho(d);
        let ratio = spacing / libm::sqrt(prev.rho * rho);
        if !(ratio <= 1.0) {
            return Err(Error::GridTooCoarse { index: t - 1, ratio });
        }
        let state = VertexState {
            position: start.position + direction * (t as f64 * spacing),
            normal: prev.normal.rotated(axis, libm::asin(ratio)),
            rho,
            geo_dist: d,
        };
        out.push(state);
        prev = state;
    }
    Ok(out)
}

fn axis_states(c: &SurfaceComplex, k: usize, axis: GridAxis, curv: &CurvatureSpec) -> Result<Option<Vec<VertexState>>> {
    let s = &c.sectors[k];
    let count = s.quads_along(axis) + 1;
    let sign = s.parity.label(axis).sign();
    let states = match *s.boundary_source(axis) {
        AxisSource::Detached => return Ok(None),
        AxisSource::Ray {
            start,
            normal,
            direction,
            spacing,
        } => {
            let origin = VertexState {
                position: start,
                normal,
                rho: curv.rho(0.0),
                geo_dist: 0.0,
            };
            ray_states(origin, direction, spacing, sign, count, curv)?
        }
        AxisSource::Inherited { parent, b } => {
            let p = &c.sectors[parent];
            if b + count - 1 > p.quads_along(axis) {
                return Err(Error::invalid("inherited boundary runs past the parent grid"));
            }
            (0..count)
                .map(|t| match axis {
                    GridAxis::I => *p.node(b + t, b),
                    GridAxis::J => *p.node(b, b + t),
                })
                .collect()
        }
        AxisSource::BranchAxis {
            parent,
            b,
            k: step,
            m,
            theta,
            turn,
            spacing,
        } => {
            let p = &c.sectors[parent];
            let corner = *p.node(b, b);
            let e_i = (p.node(b + 1, b).position - corner.position)
                .normalized()
                .ok_or_else(|| Error::invalid("zero-length edge at branch corner"))?;
            let direction = e_i.rotated(corner.normal * turn, step as f64 * theta / m as f64);
            ray_states(corner, direction, spacing, sign, count, curv)?
        }
    };
    Ok(Some(states))
}

/// Recomputes both boundary axes of sector `k` from their sources.
pub fn refresh_boundary(c: &mut SurfaceComplex, k: usize, curv: &CurvatureSpec) -> Result<()> {
    for axis in [GridAxis::I, GridAxis::J] {
        if let Some(states) = axis_states(c, k, axis, curv)? {
            let s = &mut c.sectors[k];
            let (di, dj) = axis.step();
            for (t, st) in states.into_iter().enumerate() {
                s.set_node(t * di, t * dj, st);
            }
        }
    }
    Ok(())
}

/// Single-sector complex with both boundary rays attached (no data yet).
pub fn sector_complex(spec: &SectorSpec) -> Result<SurfaceComplex> {
    spec.validate()?;
    let mut s = SectorGrid::new(0, spec.ni, spec.nj, spec.parity)?;
    s.set_boundary_source(
        GridAxis::I,
        AxisSource::Ray {
            start: Vec3::ZERO,
            normal: Vec3::Z,
            direction: spec.s_a,
            spacing: spec.u_max / spec.ni as f64,
        },
    );
    s.set_boundary_source(
        GridAxis::J,
        AxisSource::Ray {
            start: Vec3::ZERO,
            normal: Vec3::Z,
            direction: spec.s_b,
            spacing: spec.v_max / spec.nj as f64,
        },
    );
    Ok(SurfaceComplex::single(s))
}

/// Sector with boundary rows set and interior untouched.
pub fn init_boundary(spec: &SectorSpec, curv: &CurvatureSpec) -> Result<SectorGrid> {
    curv.validate()?;
    let mut c = sector_complex(spec)?;
    refresh_boundary(&mut c, 0, curv)?;
    Ok(c.sectors.swap_remove(0))
}

/// Refreshes boundaries and runs the constant-curvature sweep on `sectors`.
pub fn seed_sectors(c: &mut SurfaceComplex, sectors: core::ops::Range<usize>, curv: &CurvatureSpec) -> Result<()> {
    for k in sectors {
        refresh_boundary(c, k, curv)?;
        sweep_sector_constant(&mut c.sectors[k])?;
    }
    Ok(())
}

fn apply_distances(c: &mut SurfaceComplex, d: &NodeField, curv: &CurvatureSpec) -> Result<()> {
    for s in c.sectors.iter_mut() {
        let values = &d.values[s.id];
        let active: Vec<(usize, usize)> = s.active_nodes().filter(|&(i, j)| i > 0 && j > 0).collect();
        for (i, j) in active {
            let dist = values[s.slot(i, j)];
            if !dist.is_finite() {
                return Err(Error::Unreachable { sector: s.id, i, j });
            }
            let node = s.node_mut(i, j);
            node.geo_dist = dist;
            node.rho = curv.rho(dist);
        }
    }
    Ok(())
}

fn sweep_all(c: &mut SurfaceComplex, curv: &CurvatureSpec) -> Result<()> {
    for k in 0..c.sectors.len() {
        refresh_boundary(c, k, curv)?;
        let s = &mut c.sectors[k];
        let rho: Vec<f64> = s.nodes().iter().map(|n| n.rho).collect();
        let nj = s.nj();
        sweep_sector(s, |i, j| rho[i * (nj + 1) + j])?;
    }
    Ok(())
}

fn positions(c: &SurfaceComplex) -> Vec<Vec<Vec3>> {
    c.sectors
        .iter()
        .map(|s| s.nodes().iter().map(|n| n.position).collect())
        .collect()
}

fn max_displacement(c: &SurfaceComplex, before: &[Vec<Vec3>]) -> f64 {
    let mut change: f64 = 0.0;
    for (s, old) in c.sectors.iter().zip(before) {
        for (i, j) in s.active_nodes() {
            let d = s.node(i, j).position.distance(old[s.slot(i, j)]);
            if d.is_nan() {
                return f64::NAN;
            }
            change = change.max(d);
        }
    }
    change
}

/// Outer fixed-point iteration at one curvature.
///
/// Each loop measures distance on the current surface, freezes
/// `ρ = ρ(K(D))` at every interior node, re-sweeps all sectors in order and
/// records `CHANGE`, the largest node displacement. Stops once
/// `CHANGE < tol`.
pub fn converge(
    c: &mut SurfaceComplex,
    curv: &CurvatureSpec,
    cfg: &IterationConfig,
    provider: &mut dyn DistanceProvider,
) -> Result<StageLog> {
    curv.validate()?;
    cfg.validate()?;
    let mut log = StageLog {
        epsilon: curv.epsilon,
        changes: Vec::new(),
    };
    for _ in 0..cfg.max_iters {
        let d = provider.distances(c)?;
        apply_distances(c, &d, curv)?;
        let before = positions(c);
        sweep_all(c, curv)?;
        let change = max_displacement(c, &before);
        log.changes.push(change);
        if change < cfg.tol {
            return Ok(log);
        }
        if !change.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence { history: log.changes })
}

/// Runs `schedule` on a complex that already holds a surface.
pub fn warm_continuation(
    c: &mut SurfaceComplex,
    family: CurvatureFamily,
    schedule: &[f64],
    cfg: &IterationConfig,
    provider: &mut dyn DistanceProvider,
) -> Result<Vec<StageLog>> {
    check_schedule(schedule)?;
    let mut logs = Vec::with_capacity(schedule.len());
    for (stage, &epsilon) in schedule.iter().enumerate() {
        let wrap = |e: Error| Error::Stage {
            stage,
            epsilon,
            source: alloc::boxed::Box::new(e),
        };
        let curv = CurvatureSpec::new(family, epsilon)?;
        logs.push(converge(c, &curv, cfg, provider).map_err(wrap)?);
    }
    Ok(logs)
}

/// Seeds every sector with the constant-curvature sweep, then runs `schedule`.
pub fn continuation(
    c: &mut SurfaceComplex,
    family: CurvatureFamily,
    schedule: &[f64],
    cfg: &IterationConfig,
    provider: &mut dyn DistanceProvider,
) -> Result<Vec<StageLog>> {
    check_schedule(schedule)?;
    let curv = CurvatureSpec::new(family, schedule[0])?;
    let n = c.sectors.len();
    seed_sectors(c, 0..n, &curv).map_err(|e| Error::Stage {
        stage: 0,
        epsilon: schedule[0],
        source: alloc::boxed::Box::new(e),
    })?;
    warm_continuation(c, family, schedule, cfg, provider)
}

/// One sector generated at a single curvature.
pub fn generate_sector(
    spec: &SectorSpec,
    curv: &CurvatureSpec,
    cfg: &IterationConfig,
    provider: &mut dyn DistanceProvider,
) -> Result<(SurfaceComplex, StageLog)> {
    let mut c = sector_complex(spec)?;
    let mut logs = continuation(&mut c, curv.family, &[curv.epsilon], cfg, provider)?;
    Ok((c, logs.swap_remove(0)))
}

/// `2n` sectors around a common origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpec {
    /// Opening angles `θ_1 … θ_2n`, counterclockwise from `+x`.
    pub angles: Vec<f64>,
    /// Quads along even-numbered rays.
    pub ni: usize,
    /// Quads along odd-numbered rays.
    pub nj: usize,
    /// Length of even-numbered rays.
    pub u_max: f64,
    /// Length of odd-numbered rays.
    pub v_max: f64,
}

impl PatchSpec {
    pub fn symmetric(n: usize, ni: usize, nj: usize, u_max: f64, v_max: f64) -> Self {
        PatchSpec {
            angles: vec![PI / n as f64; 2 * n],
            ni,
            nj,
            u_max,
            v_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.angles.len();
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::invalid("need an even number (≥ 4) of sectors"));
        }
        if self.angles.iter().any(|&a| !(a > 0.0 && a < PI)) {
            return Err(Error::invalid("sector angles must lie in (0, π)"));
        }
        let sum: f64 = self.angles.iter().sum();
        if !(libm::fabs(sum - TAU) <= ANGLE_SUM_TOL) {
            return Err(Error::AngleSum { sum });
        }
        if self.ni < 1 || self.nj < 1 {
            return Err(Error::invalid("grid sizes must be ≥ 1"));
        }
        if !(self.u_max > 0.0 && self.v_max > 0.0) {
            return Err(Error::invalid("u_max and v_max must be positive"));
        }
        Ok(())
    }

    /// Unit direction of ray `k`.
    pub fn ray(&self, k: usize) -> Vec3 {
        let k = k % self.angles.len();
        let phi: f64 = self.angles[..k].iter().sum();
        Vec3::new(libm::cos(phi), libm::sin(phi), 0.0)
    }

    fn ray_extent(&self, k: usize) -> (usize, f64) {
        if k.is_multiple_of(2) {
            (self.ni, self.u_max)
        } else {
            (self.nj, self.v_max)
        }
    }
}

/// Builds the patched complex: sector `k` spans rays `k` and `k+1`, with its
/// `i` axis on ray `k`; sector `k`'s `j` axis is glued to sector `k+1`'s `i`
/// axis.
pub fn build_patched(spec: &PatchSpec) -> Result<SurfaceComplex> {
    spec.validate()?;
    let count = spec.angles.len();
    let rays: Vec<Vec3> = (0..count).map(|k| spec.ray(k)).collect();
    let mut sectors = Vec::with_capacity(count);
    for k in 0..count {
        let (ni, li) = spec.ray_extent(k);
        let (nj, lj) = spec.ray_extent(k + 1);
        let mut s = SectorGrid::new(k, ni, nj, Parity::for_sector(k))?;
        let ray = |dir: Vec3, len: f64, n: usize| AxisSource::Ray {
            start: Vec3::ZERO,
            normal: Vec3::Z,
            direction: dir,
            spacing: len / n as f64,
        };
        s.set_boundary_source(GridAxis::I, ray(rays[k], li, ni));
        s.set_boundary_source(GridAxis::J, ray(rays[(k + 1) % count], lj, nj));
        sectors.push(s);
    }
    let gluings = (0..count)
        .map(|k| {
            let next = (k + 1) % count;
            let len = spec.ray_extent(k + 1).0 + 1;
            GluingMap {
                a: BoundarySegment {
                    sector: k,
                    start: (0, 0),
                    axis: GridAxis::J,
                    len,
                },
                b: BoundarySegment {
                    sector: next,
                    start: (0, 0),
                    axis: GridAxis::I,
                    len,
                },
                ray: Some(rays[next]),
            }
        })
        .collect();
    let origin = NodeRef::new(0, 0, 0);
    let branch_points = if count == 4 {
        Vec::new()
    } else {
        vec![BranchPoint {
            node: origin,
            quads: count,
        }]
    };
    Ok(SurfaceComplex {
        sectors,
        gluings,
        branch_points,
        origin,
    })
}

/// Fails when glued nodes disagree by more than [`GLUING_TOL`].
pub fn check_gluings(c: &SurfaceComplex) -> Result<()> {
    let (position, normal) = c.gluing_residuals();
    if !(position < GLUING_TOL && normal < GLUING_TOL) {
        return Err(Error::GluingMismatch { position, normal });
    }
    Ok(())
}

/// Generates a patched complex through `schedule`.
pub fn patch_sectors(
    spec: &PatchSpec,
    family: CurvatureFamily,
    schedule: &[f64],
    cfg: &IterationConfig,
    provider: &mut dyn DistanceProvider,
) -> Result<(SurfaceComplex, Vec<StageLog>)> {
    let mut c = build_patched(spec)?;
    let logs = continuation(&mut c, family, schedule, cfg, provider)?;
    check_gluings(&c)?;
    Ok((c, logs))
}

/// Largest `|D - t h|` over the nodes of every ray boundary.
pub fn ray_distance_error(c: &SurfaceComplex, d: &NodeField) -> f64 {
    let mut err: f64 = 0.0;
    for (k, s) in c.sectors.iter().enumerate() {
        for axis in [GridAxis::I, GridAxis::J] {
            if let AxisSource::Ray { spacing, .. } = *s.boundary_source(axis) {
                let (di, dj) = axis.step();
                for t in 0..=s.quads_along(axis) {
                    let got = d.get(c, NodeRef::new(k, t * di, t * dj));
                    err = err.max(libm::fabs(got - t as f64 * spacing));
                }
            }
        }
    }
    err
}
