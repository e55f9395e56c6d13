use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypsurf::obj::ObjMesh;
use hypsurf::report::RunRecord;
use hypsurf::run::read_record;
use hypsurf_core::Vec3;

fn hypsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypsurf")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

fn run_in(dir: &Path, cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--quiet"];
    args.extend_from_slice(extra);
    let o = hypsurf(&args);
    assert!(
        o.status.success(),
        "{cmd} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn record(dir: &Path) -> RunRecord {
    read_record(&dir.join("report.json")).unwrap()
}

const LINEAR: &str = "[curvature]\nfamily = \"LINEAR\"\nepsilon = 4\n[sectors]\nn = 2\n[grid]\nI = 12\n";

#[test]
fn constant_baseline_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[curvature]\nfamily = \"CONSTANT\"\n[sectors]\nn = 2\n[grid]\nI = 10\n");
    run_in(dir.path(), "generate", &cfg, &[]);
    let r = record(dir.path()).diagnostics;
    assert!(r.passed(), "{}", r.to_text());
    assert!(r.max_residual() < 1e-10);
    assert_eq!(r.stages.len(), 1);
    assert_eq!(r.stages[0].changes, vec![0.0]);
    assert_eq!(r.sectors, 4);
    assert_eq!(r.faces, 4 * 10 * 10);
}

#[test]
fn obj_reimport_reexport_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LINEAR);
    run_in(dir.path(), "generate", &cfg, &["--grid", "7,5"]);
    let path = dir.path().join("mesh.obj");
    let text = std::fs::read_to_string(&path).unwrap();
    let again = ObjMesh::parse(&text, &path).unwrap().to_text();
    assert_eq!(again, text);
    let faces = text.lines().filter(|l| l.starts_with("f ")).count();
    assert_eq!(faces, 4 * 7 * 5);
}

#[test]
fn identical_config_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let cfg = write_config(d.path(), LINEAR);
        run_in(d.path(), "generate", &cfg, &["--sectors", "3"]);
    }
    for f in ["mesh.obj", "mesh.csv", "report.txt", "report.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn distance_on_flat_grid_is_euclidean() {
    let dir = tempfile::tempdir().unwrap();
    let n = 16;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut obj = ObjMesh::default();
    for j in 0..=n {
        for i in 0..=n {
            obj.vertices.push(Vec3::new(i as f64 / n as f64, j as f64 / n as f64, 0.0));
            obj.normals.push(Vec3::Z);
        }
    }
    for j in 0..n {
        for i in 0..n {
            let f = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            obj.faces.push(f.iter().map(|&v| (v, v)).collect());
        }
    }
    let mesh = dir.path().join("flat.obj");
    obj.write(&mesh).unwrap();
    // two-source exactness holds for opposite corners, where the
    // bisector follows the anti-diagonal
    let far = id(n, n);
    for (sources, points) in [("0", vec![0]), (&*format!("0,{far}"), vec![0, far])] {
        let o = hypsurf(&["distance", "--mesh", mesh.to_str().unwrap(), "--sources", sources, "--out", dir.path().to_str().unwrap(), "--quiet"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let mut rd = csv::Reader::from_path(dir.path().join("distance.csv")).unwrap();
        let mut err: f64 = 0.0;
        for (k, rec) in rd.records().enumerate() {
            let rec = rec.unwrap();
            let d: f64 = rec[4].parse().unwrap();
            let exact = points
                .iter()
                .map(|&p| obj.vertices[p].distance(obj.vertices[k]))
                .fold(f64::INFINITY, f64::min);
            err = err.max((d - exact).abs());
        }
        assert!(err < 1e-9, "sources {sources}: {err}");
    }
}

#[test]
fn surgery_on_every_sector() {
    let dir = tempfile::tempdir().unwrap();
    let mut body = String::from(LINEAR);
    for k in 0..4 {
        body += &format!("[[surgery]]\nsector = {k}\nb = 6\nm = 3\n");
    }
    let cfg = write_config(dir.path(), &body);
    run_in(dir.path(), "generate", &cfg, &[]);
    run_in(dir.path(), "surgery", &cfg, &[]);
    let r = record(dir.path()).diagnostics;
    assert!(r.passed(), "{}", r.to_text());
    assert_eq!(r.sectors, 4 + 4 * 3);
    let quads: Vec<usize> = r.branch_incidence.iter().map(|b| b.1).collect();
    assert_eq!(quads, vec![6; 4]);
    run_in(dir.path(), "validate", &cfg, &[]);

    // same result when surgery has to generate first
    let fresh = tempfile::tempdir().unwrap();
    let cfg2 = write_config(fresh.path(), &body);
    run_in(fresh.path(), "surgery", &cfg2, &[]);
    let x = std::fs::read(dir.path().join("mesh.obj")).unwrap();
    let y = std::fs::read(fresh.path().join("mesh.obj")).unwrap();
    assert!(x == y);
}

#[test]
fn validate_recomputes_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LINEAR);
    run_in(dir.path(), "generate", &cfg, &["--grid", "6,6"]);

    // cached numbers in the sidecar are not trusted
    let side = dir.path().join("report.json");
    let mut rec = record(dir.path());
    let honest = rec.diagnostics.clone();
    rec.diagnostics.compatibility = 1.0;
    std::fs::write(&side, serde_json::to_string(&rec).unwrap()).unwrap();
    let o = hypsurf(&["validate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, honest.to_text());

    // a moved vertex is caught
    let csv = dir.path().join("mesh.csv");
    let data = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = data.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[30].split(',').map(String::from).collect();
    cells[6] = "0.5".into();
    lines[30] = cells.join(",");
    std::fs::write(&csv, lines.join("\n") + "\n").unwrap();
    let o = hypsurf(&["validate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("validation failed"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let bad = write_config(dir.path(), "[curvature]\nfamily = \"LINEAR\"\n[sectors]\nn = 2\n[grid]\nI = -3\n");
    let o = hypsurf(&["generate", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.I"));

    let o = hypsurf(&["generate", "--out", out]);
    assert_eq!(code(&o), 1);
    let o = hypsurf(&["generate", "--grid", "3", "--out", out]);
    assert_eq!(code(&o), 1);

    let coarse = write_config(dir.path(), "[curvature]\nfamily = \"LINEAR\"\nepsilon = 50\n[sectors]\nn = 2\n[grid]\nI = 2\n");
    let o = hypsurf(&["generate", "--config", coarse.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("stage") && msg.contains("sector 0"), "{msg}");

    let stalled = write_config(dir.path(), "[curvature]\nfamily = \"LINEAR\"\nepsilon = 1\n[sectors]\nn = 2\n[grid]\nI = 6\n[iteration]\nmax_iters = 1\n");
    let o = hypsurf(&["generate", "--config", stalled.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}
