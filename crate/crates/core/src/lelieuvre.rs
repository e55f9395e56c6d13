//! Discrete Lelieuvre quad updates.
//!
//! On every quad the edges are cross products of rescaled normals:
//!
//! ```text
//! r_1 = r_0 + ν_1 × ν_0        r_2 = r_0 - ν_2 × ν_0
//! ```
//!
//! and the two routes to `r_12` agree iff `(ν_12 + ν_0) × (ν_1 + ν_2) = 0`.
//! Given `f_0, f_1, f_2` and a target `ρ_12`, the closure fixes
//! `ν_12 = C (ν_1 + ν_2) - ν_0` with `C` chosen so that `‖ν_12‖² = ρ_12`.

use crate::mesh::{SectorGrid, VertexState};
use crate::{Error, Result, Vec3};

/// Below this, `ν_1 + ν_2` is treated as zero.
const MIN_W_NORM_SQ: f64 = 1e-24;
/// Relative size of `⟨w, ν_0⟩` under which the direct quadratic branch is used.
const DEGENERATE_REL: f64 = 1e-12;
/// Normals closer than this (in `‖N_a × N_b‖`) mark a flat quad.
const FLAT_TOL: f64 = 1e-14;

/// Rescaled normal `ν = (-K)^{-1/4} N`, so that `‖ν‖² = ρ`.
pub fn scale_normal(normal: Vec3, curvature: f64) -> Result<Vec3> {
    if !(curvature < 0.0) {
        return Err(Error::NonNegativeCurvature(curvature));
    }
    Ok(normal * libm::pow(-curvature, -0.25))
}

/// Known data on three corners of a quad plus the target `ρ_12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSolveInputs {
    pub r0: Vec3,
    pub r1: Vec3,
    pub r2: Vec3,
    pub n0: Vec3,
    pub n1: Vec3,
    pub n2: Vec3,
    pub rho0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho12: f64,
}

impl QuadSolveInputs {
    /// Inputs from the corner states `f_0, f_1, f_2` and a target `ρ_12`.
    pub fn from_states(f0: &VertexState, f1: &VertexState, f2: &VertexState, rho12: f64) -> Self {
        QuadSolveInputs {
            r0: f0.position,
            r1: f1.position,
            r2: f2.position,
            n0: f0.normal,
            n1: f1.normal,
            n2: f2.normal,
            rho0: f0.rho,
            rho1: f1.rho,
            rho2: f2.rho,
            rho12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSolveOutputs {
    pub n12: Vec3,
    pub r12: Vec3,
    /// Closure coefficient in `ν_12 = C (ν_1 + ν_2) - ν_0`.
    pub c: f64,
    /// Curvature perturbation `α`; infinite when the direct branch was used.
    pub alpha: f64,
    /// All four normals coincide, so every edge has zero length.
    pub flat: bool,
}

/// Constant-curvature update (`K ≡ -1`); the `ρ` fields of `input` are ignored.
///
/// `N_12` is the reflection of `-N_0` through the plane with normal
/// `N_1 + N_2`.
pub fn quad_update_constant(input: &QuadSolveInputs) -> Result<QuadSolveOutputs> {
    let w = input.n1 + input.n2;
    let w2 = w.norm_sq();
    if !(w2 > MIN_W_NORM_SQ) {
        return Err(Error::DegenerateQuad);
    }
    let d = w.dot(input.n0);
    let c = 2.0 * d / w2;
    let n12 = w * c - input.n0;
    let r12 = input.r2 + n12.cross(input.n2);
    Ok(QuadSolveOutputs {
        n12,
        r12,
        c,
        alpha: 0.0,
        flat: is_flat(input),
    })
}

/// Variable-curvature update with `ρ_12` taken as known.
pub fn quad_update_variable(input: &QuadSolveInputs) -> Result<QuadSolveOutputs> {
    let nu0 = input.n0 * libm::sqrt(input.rho0);
    let nu1 = input.n1 * libm::sqrt(input.rho1);
    let nu2 = input.n2 * libm::sqrt(input.rho2);
    let w = nu1 + nu2;
    let w2 = w.norm_sq();
    if !(w2 > MIN_W_NORM_SQ) {
        return Err(Error::DegenerateQuad);
    }
    let d = w.dot(nu0);
    let tau = DEGENERATE_REL * libm::sqrt(w2) * libm::sqrt(input.rho0);

    let (c, alpha) = if libm::fabs(d) > tau {
        let alpha = w2 * (input.rho12 - input.rho0) / (d * d);
        let disc = 1.0 + alpha;
        if disc < 0.0 {
            return Err(Error::UnsolvableQuad { discriminant: disc });
        }
        ((1.0 + libm::sqrt(disc)) * d / w2, alpha)
    } else {
        // ⟨w, ν_0⟩ ≈ 0: C² ‖w‖² = ρ_12 - ρ_0 directly
        let diff = input.rho12 - input.rho0;
        if diff < 0.0 {
            return Err(Error::UnsolvableQuad { discriminant: diff });
        }
        (libm::sqrt(diff / w2), f64::INFINITY)
    };

    let nu12 = w * c - nu0;
    let n12 = nu12 / libm::sqrt(input.rho12);
    let r12 = input.r2 + nu12.cross(nu2);
    Ok(QuadSolveOutputs {
        n12,
        r12,
        c,
        alpha,
        flat: is_flat(input),
    })
}

fn is_flat(input: &QuadSolveInputs) -> bool {
    input.n1.cross(input.n0).norm() < FLAT_TOL && input.n2.cross(input.n0).norm() < FLAT_TOL
}

/// `‖(ν_12 + ν_0) × (ν_1 + ν_2)‖` for corners in `(f_0, f_1, f_2, f_12)` order.
pub fn compatibility_residual(q: &[VertexState; 4]) -> f64 {
    let [f0, f1, f2, f12] = q;
    (f12.nu() + f0.nu()).cross(f1.nu() + f2.nu()).norm()
}

/// Per-quad deviations from the discrete Lelieuvre geometry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadResiduals {
    /// Largest `|⟨Δr, N⟩|` over the four edges and both endpoints.
    pub tangency: f64,
    /// Largest `|‖Δr‖ - (ρ_a ρ_b)^{1/2} ‖N_a × N_b‖|`.
    pub edge_length: f64,
    /// Largest `|‖N‖ - 1|` over the corners.
    pub unit_norm: f64,
    /// Largest violation of the signed edge relations.
    pub edge_relation: f64,
    /// Distance between `r_1 - ν_12 × ν_1` and `r_2 + ν_12 × ν_2`.
    pub route: f64,
}

impl QuadResiduals {
    pub fn max_with(self, o: QuadResiduals) -> QuadResiduals {
        QuadResiduals {
            tangency: self.tangency.max(o.tangency),
            edge_length: self.edge_length.max(o.edge_length),
            unit_norm: self.unit_norm.max(o.unit_norm),
            edge_relation: self.edge_relation.max(o.edge_relation),
            route: self.route.max(o.route),
        }
    }
}

/// Residuals for corners in `(f_0, f_1, f_2, f_12)` order.
pub fn quad_residuals(q: &[VertexState; 4]) -> QuadResiduals {
    let [f0, f1, f2, f12] = q;
    // (from, to, sign of the edge relation)
    let edges = [(f0, f1, 1.0), (f0, f2, -1.0), (f2, f12, 1.0), (f1, f12, -1.0)];
    let mut out = QuadResiduals::default();
    for (a, b, sign) in edges {
        let dr = b.position - a.position;
        out.tangency = out
            .tangency
            .max(libm::fabs(dr.dot(a.normal)))
            .max(libm::fabs(dr.dot(b.normal)));
        let expected = libm::sqrt(a.rho * b.rho) * b.normal.cross(a.normal).norm();
        out.edge_length = out.edge_length.max(libm::fabs(dr.norm() - expected));
        let relation = dr - b.nu().cross(a.nu()) * sign;
        out.edge_relation = out.edge_relation.max(relation.norm());
    }
    for f in q {
        out.unit_norm = out.unit_norm.max(libm::fabs(f.normal.norm() - 1.0));
    }
    let via1 = f1.position - f12.nu().cross(f1.nu());
    let via2 = f2.position + f12.nu().cross(f2.nu());
    out.route = via1.distance(via2);
    out
}

/// Fills the interior of a sector from its boundary rows `(i, 0)` and
/// `(0, j)` with [`quad_update_variable`], row by row.
///
/// `rho(i, j)` supplies the target `ρ` of every interior node; boundary nodes
/// keep their stored state. Excised corners are skipped.
pub fn sweep_sector<F>(sector: &mut SectorGrid, rho: F) -> Result<()>
where
    F: Fn(usize, usize) -> f64,
{
    sweep_with(sector, |f0, f1, f2, i, j| {
        let rho12 = rho(i, j);
        let out = quad_update_variable(&QuadSolveInputs::from_states(f0, f1, f2, rho12))?;
        Ok((out, rho12))
    })
}

/// Fills the interior with the constant-curvature update, storing `ρ = 1`.
pub fn sweep_sector_constant(sector: &mut SectorGrid) -> Result<()> {
    sweep_with(sector, |f0, f1, f2, _, _| {
        let out = quad_update_constant(&QuadSolveInputs::from_states(f0, f1, f2, 1.0))?;
        Ok((out, 1.0))
    })
}

fn sweep_with<U>(sector: &mut SectorGrid, mut update: U) -> Result<()>
where
    U: FnMut(&VertexState, &VertexState, &VertexState, usize, usize) -> Result<(QuadSolveOutputs, f64)>,
{
    for i in 0..sector.ni() {
        for j in 0..sector.nj() {
            if !sector.quad_active(i, j) {
                continue;
            }
            let [f0, f1, f2, _] = sector.quad_corners(i, j)?;
            let (out, rho12) =
                update(&f0, &f1, &f2, i + 1, j + 1).map_err(|e| e.at(sector.id, i + 1, j + 1))?;
            let node = sector.node_mut(i + 1, j + 1);
            node.position = out.r12;
            node.normal = out.n12;
            node.rho = rho12;
        }
    }
    Ok(())
}
