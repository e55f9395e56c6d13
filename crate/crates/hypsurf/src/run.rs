//! The subcommands as library calls.

use std::path::{Path, PathBuf};

use hypsurf_core::amsler::{patch_sectors, StageLog};
use hypsurf_core::geodesic::{fast_march, FastMarching, Source, TriMesh};
use hypsurf_core::mesh::SurfaceComplex;
use hypsurf_core::surgery::insert_branch_point;

use crate::config::{OutputPaths, RunConfig};
use crate::error::{Error, Result};
use crate::format::g17;
use crate::obj::ObjMesh;
use crate::report::{DiagnosticsReport, RunRecord, StageRecord};
use crate::table::{node_rows, read_nodes, write_nodes, Topology};

/// A complex together with the run history that produced it.
#[derive(Debug, Clone)]
pub struct Run {
    pub complex: SurfaceComplex,
    pub stages: Vec<StageRecord>,
}

fn records(logs: &[StageLog]) -> Vec<StageRecord> {
    logs.iter().map(StageRecord::from).collect()
}

/// Continuation over the configured schedule on the patched complex.
pub fn generate(cfg: &RunConfig) -> Result<Run> {
    let mut fm = FastMarching::default();
    let (complex, logs) = patch_sectors(&cfg.patch, cfg.curvature.family, &cfg.schedule, &cfg.iteration, &mut fm)?;
    Ok(Run {
        complex,
        stages: records(&logs),
    })
}

/// Inserts the configured branch points in order, re-converging after each.
pub fn apply_surgery(run: &mut Run, cfg: &RunConfig) -> Result<()> {
    let mut fm = FastMarching::default();
    for spec in &cfg.surgery {
        let out = insert_branch_point(&mut run.complex, spec, &cfg.curvature, &cfg.iteration, &mut fm)?;
        run.stages.push(StageRecord::from(&out.log));
    }
    Ok(())
}

/// Writes the OBJ mesh and the per-node CSV.
pub fn export_mesh(c: &SurfaceComplex, obj: &Path, csv: &Path) -> Result<()> {
    ObjMesh::from_complex(c).write(obj)?;
    write_nodes(&node_rows(c), csv)
}

/// Writes OBJ, CSV, then builds the report from the files just written and
/// writes it as text and JSON.
pub fn export(run: &Run, cfg: &RunConfig, paths: &OutputPaths) -> Result<DiagnosticsReport> {
    for p in [&paths.mesh, &paths.csv, &paths.report] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    export_mesh(&run.complex, &paths.mesh, &paths.csv)?;
    let topology = Topology::of(&run.complex);
    let diagnostics = DiagnosticsReport::compute(
        &topology,
        &read_nodes(&paths.csv)?,
        &ObjMesh::read(&paths.mesh)?,
        run.stages.clone(),
    )?;
    std::fs::write(&paths.report, diagnostics.to_text()).map_err(|e| Error::io(&paths.report, e))?;
    let record = RunRecord {
        curvature: cfg.curvature,
        diagnostics: diagnostics.clone(),
        topology,
    };
    write_json(&record, &paths.sidecar())?;
    Ok(diagnostics)
}

fn write_json(record: &RunRecord, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(record).map_err(|e| Error::io(path, e.into()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_record(path: &Path) -> Result<RunRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Reloads an exported run from its CSV and JSON sidecar.
pub fn load_run(paths: &OutputPaths) -> Result<(Run, RunRecord)> {
    let record = read_record(&paths.sidecar())?;
    let complex = record.topology.rebuild(&read_nodes(&paths.csv)?)?;
    let run = Run {
        complex,
        stages: record.diagnostics.stages.clone(),
    };
    Ok((run, record))
}

/// Recomputes the report of an exported run without touching its files.
pub fn validate(paths: &OutputPaths) -> Result<DiagnosticsReport> {
    let record = read_record(&paths.sidecar())?;
    DiagnosticsReport::compute(
        &record.topology,
        &read_nodes(&paths.csv)?,
        &ObjMesh::read(&paths.mesh)?,
        record.diagnostics.stages,
    )
}

/// Parses `v[:d],v[:d],…` (0-based vertex indices, optional start distance).
pub fn parse_sources(text: &str) -> Result<Vec<Source>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let bad = || Error::config("--sources", format!("expected vertex[:distance], got `{s}`"));
            let (v, d) = s.split_once(':').unwrap_or((s, "0"));
            Ok(Source::new(v.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?))
        })
        .collect()
}

/// Fast marching on an OBJ mesh; quads are split along their better diagonal.
pub fn mesh_distance(obj: &ObjMesh, sources: &[Source]) -> Result<Vec<f64>> {
    let mesh = if obj.faces.iter().all(|f| f.len() == 4) {
        let quads: Vec<[usize; 4]> = obj.faces.iter().map(|f| [f[0].0, f[1].0, f[2].0, f[3].0]).collect();
        TriMesh::from_quads(obj.vertices.clone(), &quads)?
    } else {
        TriMesh::new(obj.vertices.clone(), obj.fan_triangles())?
    };
    Ok(fast_march(&mesh, sources)?.distances)
}

pub fn write_distances(obj: &ObjMesh, d: &[f64], path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["vertex_index", "x", "y", "z", "D"]).map_err(io)?;
    for (k, (p, d)) in obj.vertices.iter().zip(d).enumerate() {
        w.write_record([k.to_string(), g17(p.x), g17(p.y), g17(p.z), g17(*d)]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Output location of `distance`.
pub fn distance_path(out: &Path) -> PathBuf {
    out.join("distance.csv")
}
