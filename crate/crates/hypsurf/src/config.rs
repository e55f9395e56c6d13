//! Run configuration (TOML).
//!
//! ```toml
//! seed = 0
//!
//! [curvature]
//! family = "LINEAR"        # CONSTANT | LINEAR | RING
//! epsilon = 50.0
//! schedule = [1.0, 10.0, 50.0]
//! params = { radius = 0.5, scale = 20.0 }   # RING only
//!
//! [sectors]
//! n = 3                    # 2n sectors
//! angles = [...]           # optional, 2n opening angles summing to 2π
//!
//! [grid]
//! I = 20
//! J = 20
//! u_max = 1.0
//! v_max = 1.0
//!
//! [iteration]
//! tol = 1e-4
//! max_iters = 100
//!
//! [[surgery]]
//! sector = 0
//! b = 6
//! m = 3
//!
//! [output]
//! mesh = "mesh.obj"
//! csv = "mesh.csv"
//! report = "report.txt"
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hypsurf_core::amsler::{auto_schedule, IterationConfig, PatchSpec, ANGLE_SUM_TOL};
use hypsurf_core::curvature::{CurvatureFamily, CurvatureSpec};
use hypsurf_core::surgery::SurgerySpec;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Family and target `ε` (the last schedule entry).
    pub curvature: CurvatureSpec,
    pub schedule: Vec<f64>,
    pub patch: PatchSpec,
    pub iteration: IterationConfig,
    pub surgery: Vec<SurgerySpec>,
    pub output: OutputPaths,
    /// Reserved; nothing random happens in a run.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub mesh: PathBuf,
    pub csv: PathBuf,
    pub report: PathBuf,
}

impl OutputPaths {
    /// JSON sidecar next to the text report.
    pub fn sidecar(&self) -> PathBuf {
        self.report.with_extension("json")
    }

    pub fn under(&self, dir: &Path) -> OutputPaths {
        OutputPaths {
            mesh: dir.join(&self.mesh),
            csv: dir.join(&self.csv),
            report: dir.join(&self.report),
        }
    }
}

impl Default for OutputPaths {
    fn default() -> Self {
        OutputPaths {
            mesh: "mesh.obj".into(),
            csv: "mesh.csv".into(),
            report: "report.txt".into(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    curvature: RawCurvature,
    sectors: RawSectors,
    grid: RawGrid,
    #[serde(default)]
    iteration: RawIteration,
    #[serde(default)]
    surgery: Vec<RawSurgery>,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurvature {
    family: String,
    epsilon: Option<f64>,
    schedule: Option<Vec<f64>>,
    params: Option<RawParams>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    radius: Option<f64>,
    scale: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSectors {
    n: usize,
    angles: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "I")]
    i: usize,
    #[serde(rename = "J")]
    j: Option<usize>,
    #[serde(default = "one")]
    u_max: f64,
    #[serde(default = "one")]
    v_max: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawIteration {
    tol: Option<f64>,
    max_iters: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurgery {
    sector: usize,
    b: usize,
    m: usize,
    spacing: Option<f64>,
    size: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    mesh: Option<PathBuf>,
    csv: Option<PathBuf>,
    report: Option<PathBuf>,
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub epsilon: Option<f64>,
    pub sectors: Option<usize>,
    pub grid: Option<(usize, usize)>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::new(text);
    let raw: Raw = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().message().trim())
    })?;
    let cfg = from_raw(raw)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn from_raw(raw: Raw) -> Result<RunConfig> {
    let c = raw.curvature;
    let family = match c.family.to_ascii_uppercase().as_str() {
        "CONSTANT" | "LINEAR" if c.params.is_some() => {
            return Err(Error::config("curvature.params", "only RING takes parameters"));
        }
        "CONSTANT" => CurvatureFamily::Constant,
        "LINEAR" => CurvatureFamily::Linear,
        "RING" => {
            let CurvatureFamily::Ring { radius, scale } = CurvatureFamily::RING_DEFAULT else {
                unreachable!()
            };
            let p = c.params.unwrap_or(RawParams {
                radius: None,
                scale: None,
            });
            CurvatureFamily::Ring {
                radius: p.radius.unwrap_or(radius),
                scale: p.scale.unwrap_or(scale),
            }
        }
        other => {
            return Err(Error::config(
                "curvature.family",
                format!("unknown family `{other}`, expected CONSTANT, LINEAR or RING"),
            ))
        }
    };
    let schedule = match (c.schedule, c.epsilon) {
        (Some(s), Some(e)) if s.last() != Some(&e) => {
            return Err(Error::config("curvature.schedule", "last entry must equal curvature.epsilon"));
        }
        (Some(s), _) => s,
        (None, e) => auto_schedule(e.unwrap_or(0.0)),
    };
    let epsilon = schedule.last().copied().unwrap_or(0.0);

    let n = raw.sectors.n;
    let angles = raw
        .sectors
        .angles
        .unwrap_or_else(|| vec![PI / n.max(1) as f64; 2 * n]);
    let patch = PatchSpec {
        angles,
        ni: raw.grid.i,
        nj: raw.grid.j.unwrap_or(raw.grid.i),
        u_max: raw.grid.u_max,
        v_max: raw.grid.v_max,
    };
    let defaults = IterationConfig::default();
    let iteration = IterationConfig {
        tol: raw.iteration.tol.unwrap_or(defaults.tol),
        max_iters: raw.iteration.max_iters.unwrap_or(defaults.max_iters),
    };
    let surgery = raw
        .surgery
        .into_iter()
        .map(|s| SurgerySpec {
            sector: s.sector,
            b: s.b,
            m: s.m,
            spacing: s.spacing,
            size: s.size,
        })
        .collect();
    let d = OutputPaths::default();
    let output = OutputPaths {
        mesh: raw.output.mesh.unwrap_or(d.mesh),
        csv: raw.output.csv.unwrap_or(d.csv),
        report: raw.output.report.unwrap_or(d.report),
    };
    Ok(RunConfig {
        curvature: CurvatureSpec { family, epsilon },
        schedule,
        patch,
        iteration,
        surgery,
        output,
        seed: raw.seed,
    })
}

impl RunConfig {
    /// Range checks, each reported against its config path.
    pub fn validate(&self) -> Result<()> {
        if let CurvatureFamily::Ring { radius, scale } = self.curvature.family {
            if !(radius >= 0.0 && radius.is_finite()) {
                return Err(Error::config("curvature.params.radius", "must be finite and ≥ 0"));
            }
            if !scale.is_finite() {
                return Err(Error::config("curvature.params.scale", "must be finite"));
            }
        }
        if self.schedule.is_empty() {
            return Err(Error::config("curvature.schedule", "must not be empty"));
        }
        for (k, e) in self.schedule.iter().enumerate() {
            if !(*e >= 0.0 && e.is_finite()) {
                return Err(Error::config(format!("curvature.schedule[{k}]"), "must be finite and ≥ 0"));
            }
            if k > 0 && *e < self.schedule[k - 1] {
                return Err(Error::config(format!("curvature.schedule[{k}]"), "schedule must be nondecreasing"));
            }
        }
        let count = self.patch.angles.len();
        if count < 4 {
            return Err(Error::config("sectors.n", "need n ≥ 2"));
        }
        if !count.is_multiple_of(2) {
            return Err(Error::config("sectors.angles", "need an even number of angles"));
        }
        for (k, a) in self.patch.angles.iter().enumerate() {
            if !(*a > 0.0 && *a < PI) {
                return Err(Error::config(format!("sectors.angles[{k}]"), "must lie in (0, π)"));
            }
        }
        let sum: f64 = self.patch.angles.iter().sum();
        if (sum - 2.0 * PI).abs() > ANGLE_SUM_TOL {
            return Err(Error::config("sectors.angles", format!("must sum to 2π, got {sum}")));
        }
        if self.patch.ni < 1 {
            return Err(Error::config("grid.I", "must be ≥ 1"));
        }
        if self.patch.nj < 1 {
            return Err(Error::config("grid.J", "must be ≥ 1"));
        }
        if !(self.patch.u_max > 0.0 && self.patch.u_max.is_finite()) {
            return Err(Error::config("grid.u_max", "must be positive"));
        }
        if !(self.patch.v_max > 0.0 && self.patch.v_max.is_finite()) {
            return Err(Error::config("grid.v_max", "must be positive"));
        }
        if !(self.iteration.tol > 0.0 && self.iteration.tol.is_finite()) {
            return Err(Error::config("iteration.tol", "must be positive"));
        }
        if self.iteration.max_iters < 1 {
            return Err(Error::config("iteration.max_iters", "must be ≥ 1"));
        }
        for (k, s) in self.surgery.iter().enumerate() {
            if s.m < 3 || s.m.is_multiple_of(2) {
                return Err(Error::config(
                    format!("surgery[{k}].m"),
                    format!("branch order must be odd and at least 3, got {}", s.m),
                ));
            }
            if s.b < 1 {
                return Err(Error::config(format!("surgery[{k}].b"), "must be ≥ 1"));
            }
            if let Some(h) = s.spacing {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::config(format!("surgery[{k}].spacing"), "must be positive"));
                }
            }
            if s.size == Some(0) {
                return Err(Error::config(format!("surgery[{k}].size"), "must be ≥ 1"));
            }
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if let Some(tol) = o.tol {
            self.iteration.tol = tol;
        }
        if let Some(e) = o.epsilon {
            self.schedule = auto_schedule(e);
            self.curvature.epsilon = e;
        }
        if let Some(n) = o.sectors {
            self.patch.angles = vec![PI / n.max(1) as f64; 2 * n];
        }
        if let Some((i, j)) = o.grid {
            self.patch.ni = i;
            self.patch.nj = j;
        }
        self.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(e: Error) -> String {
        match e {
            Error::Config { path, .. } => path,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("[curvature]\nfamily = \"CONSTANT\"\n[sectors]\nn = 2\n[grid]\nI = 20\n").unwrap();
        assert_eq!(c.curvature, CurvatureSpec::constant());
        assert_eq!(c.schedule, vec![0.0]);
        assert_eq!(c.patch, PatchSpec::symmetric(2, 20, 20, 1.0, 1.0));
        assert_eq!(c.iteration.tol, 1e-4);
        assert_eq!(c.iteration.max_iters, 100);
        assert!(c.surgery.is_empty());
        assert_eq!(c.output, OutputPaths::default());
    }

    #[test]
    fn linear_with_schedule() {
        let c = parse_config(
            "[curvature]\nfamily = \"linear\"\nepsilon = 50\nschedule = [1, 10, 50]\n[sectors]\nn = 3\n[grid]\nI = 12\nJ = 8\n",
        )
        .unwrap();
        assert_eq!(c.curvature, CurvatureSpec::linear(50.0));
        assert_eq!(c.schedule, vec![1.0, 10.0, 50.0]);
        assert_eq!(c.patch.angles.len(), 6);
        assert_eq!((c.patch.ni, c.patch.nj), (12, 8));
    }

    #[test]
    fn epsilon_alone_expands_to_doubling_schedule() {
        let c = parse_config("[curvature]\nfamily = \"LINEAR\"\nepsilon = 10\n[sectors]\nn = 2\n[grid]\nI = 4\n").unwrap();
        assert_eq!(c.schedule, vec![1.0, 2.0, 4.0, 8.0, 10.0]);
    }

    #[test]
    fn even_branch_order_rejected() {
        let e = parse_config(
            "[curvature]\nfamily = \"CONSTANT\"\n[sectors]\nn = 2\n[grid]\nI = 8\n[[surgery]]\nsector = 0\nb = 3\nm = 4\n",
        )
        .unwrap_err();
        assert_eq!(path_of(e), "surgery[0].m");
    }

    #[test]
    fn type_errors_name_the_field() {
        let e = parse_config("[curvature]\nfamily = \"CONSTANT\"\n[sectors]\nn = 2\n[grid]\nI = \"x\"\n").unwrap_err();
        assert_eq!(path_of(e), "grid.I");
        let e = parse_config("[curvature]\nfamily = \"CONSTANT\"\n[sectors]\nn = 2\n[grid]\nI = 4\nK = 1\n").unwrap_err();
        assert_eq!(path_of(e), "grid.K");
    }

    #[test]
    fn range_errors_name_the_field() {
        let base = "[curvature]\nfamily = \"CONSTANT\"\n[sectors]\nn = 2\n[grid]\nI = 4\n";
        let e = parse_config(&format!("{base}[iteration]\ntol = -1\n")).unwrap_err();
        assert_eq!(path_of(e), "iteration.tol");
        let e = parse_config(&base.replace("n = 2", "n = 2\nangles = [1, 1, 1, 1]")).unwrap_err();
        assert_eq!(path_of(e), "sectors.angles");
        let e = parse_config(&base.replace("CONSTANT", "CUBIC")).unwrap_err();
        assert_eq!(path_of(e), "curvature.family");
        let e = parse_config(&base.replace("CONSTANT\"", "LINEAR\"\nepsilon = 3\nschedule = [1, 2]")).unwrap_err();
        assert_eq!(path_of(e), "curvature.schedule");
    }

    #[test]
    fn ring_params() {
        let c = parse_config(
            "[curvature]\nfamily = \"RING\"\nepsilon = 2\nschedule = [2]\nparams = { radius = 0.25 }\n[sectors]\nn = 2\n[grid]\nI = 4\n",
        )
        .unwrap();
        assert_eq!(c.curvature.family, CurvatureFamily::Ring { radius: 0.25, scale: 20.0 });
    }

    #[test]
    fn overrides() {
        let mut c = parse_config("[curvature]\nfamily = \"LINEAR\"\nepsilon = 1\n[sectors]\nn = 2\n[grid]\nI = 4\n").unwrap();
        c.apply_overrides(&Overrides {
            tol: Some(1e-6),
            epsilon: Some(3.0),
            sectors: Some(3),
            grid: Some((5, 6)),
        })
        .unwrap();
        assert_eq!(c.iteration.tol, 1e-6);
        assert_eq!(c.schedule, vec![1.0, 2.0, 3.0]);
        assert_eq!(c.patch.angles.len(), 6);
        assert_eq!((c.patch.ni, c.patch.nj), (5, 6));
        assert!(c.apply_overrides(&Overrides { sectors: Some(1), ..Overrides::default() }).is_err());
    }
}
