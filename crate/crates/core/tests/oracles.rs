use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use hypsurf_core::amsler::{
    build_patched, continuation, generate_sector, init_boundary, warm_continuation, IterationConfig, PatchSpec,
    SectorSpec,
};
use hypsurf_core::curvature::{CurvatureFamily, CurvatureSpec};
use hypsurf_core::geodesic::{
    choose_diagonal, dijkstra_bound, fast_march, triangulate_complex, unfold_candidate, Diagonal, FastMarching,
    Source, TriMesh,
};
use hypsurf_core::lelieuvre::{compatibility_residual, quad_residuals, quad_update_variable, QuadSolveInputs};
use hypsurf_core::mesh::{Parity, SectorGrid, SurfaceComplex, VertexState};
use hypsurf_core::surgery::{split_angle_axes, SurgerySpec};
use hypsurf_core::validate::validate_complex;
use hypsurf_core::Vec3;

fn tilted(theta: f64) -> (Vec3, Vec3, Vec3) {
    let (s, c) = (theta.sin(), theta.cos());
    (Vec3::Z, Vec3::new(s, 0.0, c), Vec3::new(0.0, s, c))
}

/// Larger root of `‖C w - ν0‖² = ρ12` by bisection.
fn closure_root(w: Vec3, nu0: Vec3, rho12: f64) -> f64 {
    let f = |c: f64| (w * c - nu0).norm_sq() - rho12;
    // f is a parabola in C with vertex at ⟨w,ν0⟩/‖w‖²
    let mut lo = w.dot(nu0) / w.norm_sq();
    let mut hi = lo + 1.0;
    while f(hi) < 0.0 {
        hi += 1.0;
    }
    assert!(f(lo) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn variable_update_matches_root_finding_oracle() {
    let (n0, n1, n2) = tilted(0.2);
    let r0 = Vec3::ZERO;
    let inp = QuadSolveInputs {
        r0,
        r1: r0 + n1.cross(n0),
        r2: r0 - n2.cross(n0),
        n0,
        n1,
        n2,
        rho0: 1.0,
        rho1: 1.0,
        rho2: 1.0,
        rho12: 1.1,
    };
    let out = quad_update_variable(&inp).unwrap();
    let c = closure_root(n1 + n2, n0, 1.1);
    assert!((out.c - c).abs() < 1e-12, "{} vs {}", out.c, c);
    // frozen oracle values
    assert!((c - 1.0246862184608176).abs() < 1e-12);
    let nu12 = (n1 + n2) * c - n0;
    assert!((out.n12 * 1.1f64.sqrt() - nu12).max_abs() < 1e-12);

    let q = [
        VertexState::new(inp.r0, n0, 1.0),
        VertexState::new(inp.r1, n1, 1.0),
        VertexState::new(inp.r2, n2, 1.0),
        VertexState::new(out.r12, out.n12, 1.1),
    ];
    assert!((q[3].nu().norm_sq() - 1.1).abs() < 1e-12);
    let res = quad_residuals(&q);
    assert!(res.route < 1e-12);
    assert!(res.tangency < 1e-12);
    assert!(compatibility_residual(&q) < 1e-12);
}

#[test]
fn rectangle_diagonal_tie_break() {
    let p = [
        Vec3::ZERO,
        Vec3::new(2.0, 0.0, 0.0),
        Vec3::new(2.0, 1.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
    ];
    // independent evaluation: law of cosines on all four candidate triangles
    let angle = |a: Vec3, b: Vec3, c: Vec3| {
        let (ab, bc, ca) = (a.distance(b), b.distance(c), c.distance(a));
        let cos = |x: f64, y: f64, z: f64| ((y * y + z * z - x * x) / (2.0 * y * z)).acos();
        cos(bc, ab, ca).max(cos(ca, ab, bc)).max(cos(ab, bc, ca))
    };
    let main = angle(p[0], p[1], p[2]).max(angle(p[0], p[2], p[3]));
    let anti = angle(p[0], p[1], p[3]).max(angle(p[1], p[2], p[3]));
    assert!((main - anti).abs() < 1e-12);
    assert_eq!(choose_diagonal(p), Some(Diagonal::Main));
}

fn flat_grid(n: usize) -> TriMesh {
    let h = 1.0 / n as f64;
    let mut v = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            v.push(Vec3::new(i as f64 * h, j as f64 * h, 0.0));
        }
    }
    let id = |i: usize, j: usize| i * (n + 1) + j;
    let quads: Vec<[usize; 4]> = (0..n)
        .flat_map(|i| (0..n).map(move |j| [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]))
        .collect();
    TriMesh::from_quads(v, &quads).unwrap()
}

#[test]
fn flat_grid_corner_source_is_euclidean() {
    let mesh = flat_grid(16);
    assert_eq!(mesh.report.obtuse, 0);
    let r = fast_march(&mesh, &[Source::new(0, 0.0)]).unwrap();
    assert!((r.distances[16 * 17 + 16] - SQRT_2).abs() < 1e-9);
    for (k, p) in mesh.vertices.iter().enumerate() {
        assert!((r.distances[k] - p.norm()).abs() < 1e-9, "vertex {k}");
    }
}

#[test]
fn flat_grid_two_sources_is_euclidean() {
    let mesh = flat_grid(16);
    let far = 16 * 17 + 16;
    let r = fast_march(&mesh, &[Source::new(0, 0.0), Source::new(far, 0.0)]).unwrap();
    let centre = 8 * 17 + 8;
    assert!((r.distances[centre] - SQRT_2 / 2.0).abs() < 1e-9);
    let corner = Vec3::new(1.0, 1.0, 0.0);
    for (k, p) in mesh.vertices.iter().enumerate() {
        let want = p.norm().min(p.distance(corner));
        assert!((r.distances[k] - want).abs() < 1e-9, "vertex {k}");
    }
}

#[test]
fn unfold_equilateral_origin_reconstruction() {
    // origin at (0.5, -√0.75), target at (0.5, √0.75)
    let (xo, yo) = (0.5, -(0.75f64).sqrt());
    let (xi, yi) = (0.5, (0.75f64).sqrt());
    let want = ((xi - xo) * (xi - xo) + (yi - yo) * (yi - yo)).sqrt();
    let u = unfold_candidate(1.0, 1.0, 1.0, 1.0, 1.0);
    assert!((u.distance - want).abs() < 1e-15);
    assert!((u.distance - 1.7320508075688772).abs() < 1e-15);
}

#[test]
fn dijkstra_square_diagonal() {
    let mesh = flat_grid(1);
    let d = dijkstra_bound(&mesh, &[Source::new(0, 0.0)]);
    assert!((d[3] - SQRT_2).abs() < 1e-15);
}

#[test]
fn linear_boundary_angles() {
    let (n, eps) = (10, 1.0);
    let h = 1.0 / n as f64;
    let spec = SectorSpec::planar(FRAC_PI_2, 1.0, 1.0, n, n);
    let s = init_boundary(&spec, &CurvatureSpec::linear(eps)).unwrap();
    for i in 0..n {
        let want = (h * ((1.0 + i as f64 * h) * (1.0 + (i + 1) as f64 * h)).powf(0.25)).asin();
        let got = s.node(i, 0).normal.angle_to(s.node(i + 1, 0).normal);
        assert!((got - want).abs() < 1e-12, "edge {i}");
        let e = s.node(i + 1, 0).position - s.node(i, 0).position;
        assert!(e.dot(s.node(i, 0).normal).abs() < 1e-12);
        assert!(e.dot(s.node(i + 1, 0).normal).abs() < 1e-12);
    }
}

#[test]
fn warm_start_needs_fewer_iterations() {
    let spec = SectorSpec::planar(FRAC_PI_2, 1.0, 1.0, 20, 20);
    let cfg = IterationConfig::default();
    let mut fm = FastMarching::default();
    let (mut warm, _) = generate_sector(&spec, &CurvatureSpec::linear(1.0), &cfg, &mut fm).unwrap();
    let warm_log = warm_continuation(&mut warm, CurvatureFamily::Linear, &[10.0], &cfg, &mut fm).unwrap();
    let (_, cold) = generate_sector(&spec, &CurvatureSpec::linear(10.0), &cfg, &mut fm).unwrap();
    assert!(warm_log[0].iterations() < cold.iterations(), "{warm_log:?} {cold:?}");
}

#[test]
fn single_sector_linear_converges() {
    let spec = SectorSpec::planar(FRAC_PI_2, 1.0, 1.0, 30, 30);
    let mut fm = FastMarching::default();
    let (c, log) = generate_sector(&spec, &CurvatureSpec::linear(1.0), &IterationConfig::default(), &mut fm).unwrap();
    assert!(log.iterations() <= 20);
    let s = &c.sectors[0];
    for (i, j) in s.active_quads() {
        let r = quad_residuals(&s.quad_corners(i, j).unwrap());
        assert!(r.route < 1e-10 && r.tangency < 1e-10 && r.edge_length < 1e-10);
    }
}

#[test]
fn patched_vertex_count_after_dedup() {
    let (ni, nj) = (5, 7);
    let c = build_patched(&PatchSpec::symmetric(2, ni, nj, 1.0, 1.0)).unwrap();
    let mut c = c;
    let mut fm = FastMarching::default();
    continuation(&mut c, CurvatureFamily::Constant, &[0.0], &IterationConfig::default(), &mut fm).unwrap();
    let mesh = triangulate_complex(&c).unwrap();
    // 4 grids, minus one copy of each of the 4 rays, plus the origin counted once
    let slots = 4 * (ni + 1) * (nj + 1);
    let duplicates = 2 * (ni + 1) + 2 * (nj + 1) - 1;
    assert_eq!(mesh.vertex_count(), slots - duplicates);
    assert_eq!(mesh.vertex_count(), (2 * ni + 1) * (2 * nj + 1));
    let report = validate_complex(&c);
    assert!(report.passed(), "{report:?}");
}

#[test]
fn split_axes_tangent_on_curved_sector() {
    let spec = SectorSpec::planar(FRAC_PI_2, 1.0, 1.0, 16, 16);
    let mut fm = FastMarching::default();
    let (c, _) = generate_sector(&spec, &CurvatureSpec::linear(1.0), &IterationConfig::default(), &mut fm).unwrap();
    let s = &c.sectors[0];
    let axes = split_angle_axes(s, 8, 3).unwrap();
    let n = s.node(8, 8).normal;
    for d in &axes.directions {
        assert!(d.dot(n).abs() < 1e-10);
        assert!((d.norm() - 1.0).abs() < 1e-12);
    }
    assert!(axes.theta > 0.0 && axes.theta < PI);
}

#[test]
fn recursive_surgery_validates() {
    use hypsurf_core::surgery::insert_branch_point;
    let spec = SectorSpec::planar(FRAC_PI_2, 1.0, 1.0, 12, 12);
    let curv = CurvatureSpec::linear(1.0);
    let cfg = IterationConfig::default();
    let mut fm = FastMarching::default();
    let (mut c, _) = generate_sector(&spec, &curv, &cfg, &mut fm).unwrap();
    let first = insert_branch_point(&mut c, &SurgerySpec::new(0, 6, 3), &curv, &cfg, &mut fm).unwrap();
    for k in first.new_sectors.clone() {
        insert_branch_point(&mut c, &SurgerySpec::new(k, 3, 3), &curv, &cfg, &mut fm).unwrap();
    }
    let report = validate_complex(&c);
    assert!(report.passed(), "{report:?}");
    assert_eq!(report.branch_incidence.len(), 4);
    assert_eq!(c.sectors.len(), 1 + 3 + 9);
}

#[test]
fn unit_single_sector_counts() {
    let mut s = SectorGrid::new(0, 1, 1, Parity::Odd).unwrap();
    for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        s.node_mut(i, j).position = Vec3::new(i as f64, j as f64, 0.0);
    }
    let c = SurfaceComplex::single(s);
    assert_eq!(triangulate_complex(&c).unwrap().vertex_count(), 4);
}

#[test]
fn forced_even_branch_order_breaks_labelling() {
    use hypsurf_core::surgery::splice_branch_sectors;
    let spec = SectorSpec::planar(FRAC_PI_2, 1.0, 1.0, 8, 8);
    let (base, _) = generate_sector(&spec, &CurvatureSpec::constant(), &IterationConfig::default(), &mut FastMarching::default()).unwrap();
    for m in 2..=6 {
        let mut c = base.clone();
        splice_branch_sectors(&mut c, &SurgerySpec::new(0, 4, m)).unwrap();
        let r = validate_complex(&c);
        let labels_ok = r.labels_consistent() && r.two_colorable;
        assert_eq!(labels_ok, m % 2 == 1, "m={m}: {r:?}");
    }
}

#[test]
fn inherited_boundaries_are_bitwise_copies() {
    use hypsurf_core::surgery::insert_branch_point;
    let spec = SectorSpec::planar(FRAC_PI_2, 1.0, 1.0, 12, 12);
    let curv = CurvatureSpec::linear(1.0);
    let cfg = IterationConfig::default();
    let mut fm = FastMarching::default();
    let (mut c, _) = generate_sector(&spec, &curv, &cfg, &mut fm).unwrap();
    let b = 5;
    let out = insert_branch_point(&mut c, &SurgerySpec::new(0, b, 5), &curv, &cfg, &mut fm).unwrap();
    let (first, last) = (out.new_sectors.start, out.new_sectors.end - 1);
    let bits = |v: &VertexState| [v.position.x, v.position.y, v.position.z, v.normal.x, v.normal.y, v.normal.z].map(f64::to_bits);
    for t in 0..=12 - b {
        assert_eq!(bits(c.sectors[first].node(t, 0)), bits(c.sectors[0].node(b + t, b)));
        assert_eq!(bits(c.sectors[last].node(0, t)), bits(c.sectors[0].node(b, b + t)));
    }
    assert!(c.gluing_residuals().1 < 1e-10);
}
