use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hypsurf::config::{load_config, OutputPaths, Overrides, RunConfig};
use hypsurf::obj::ObjMesh;
use hypsurf::report::DiagnosticsReport;
use hypsurf::run;
use hypsurf::{Error, Result};

#[derive(Parser)]
#[command(name = "hypsurf", version, about = "Discrete hyperbolic surfaces with prescribed curvature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Target ε; replaces the schedule with the doubling one.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Half the number of sectors.
    #[arg(long, global = true)]
    sectors: Option<usize>,
    /// Quads per sector as `I,J`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Continuation and patching; writes mesh, CSV and report.
    Generate,
    /// Applies the configured surgeries to the run in `--out` (generated first if absent).
    Surgery,
    /// Geodesic distance on an OBJ mesh.
    Distance {
        #[arg(long)]
        mesh: PathBuf,
        /// Comma separated `vertex[:distance]`, 0-based.
        #[arg(long, default_value = "0")]
        sources: String,
    },
    /// Recomputes and prints the report of the run in `--out`.
    Validate,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or("expected I,J")?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((p(i)?, p(j)?))
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Error::config("--config", "this subcommand needs a config file"))?;
        let mut cfg = load_config(path)?;
        cfg.apply_overrides(&Overrides {
            tol: self.tol,
            epsilon: self.epsilon,
            sectors: self.sectors,
            grid: self.grid,
        })?;
        Ok(cfg)
    }

    fn paths(&self) -> Result<OutputPaths> {
        let names = match &self.config {
            Some(p) => load_config(p)?.output,
            None => OutputPaths::default(),
        };
        Ok(names.under(&self.out))
    }

    fn say(&self, text: &str) {
        if !self.quiet {
            print!("{text}");
        }
    }

    fn finish(&self, report: &DiagnosticsReport) -> Result<()> {
        self.say(&report.to_text());
        Ok(())
    }

    fn execute(&self) -> Result<()> {
        match &self.command {
            Command::Generate => {
                let cfg = self.run_config()?;
                let r = run::generate(&cfg)?;
                let report = run::export(&r, &cfg, &cfg.output.under(&self.out))?;
                self.finish(&report)
            }
            Command::Surgery => {
                let cfg = self.run_config()?;
                let paths = cfg.output.under(&self.out);
                let mut r = if paths.sidecar().exists() {
                    run::load_run(&paths)?.0
                } else {
                    run::generate(&cfg)?
                };
                run::apply_surgery(&mut r, &cfg)?;
                let report = run::export(&r, &cfg, &paths)?;
                self.finish(&report)
            }
            Command::Distance { mesh, sources } => {
                let obj = ObjMesh::read(mesh)?;
                let d = run::mesh_distance(&obj, &run::parse_sources(sources)?)?;
                std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
                let path = run::distance_path(&self.out);
                run::write_distances(&obj, &d, &path)?;
                self.say(&format!("wrote {} distances to {}\n", d.len(), path.display()));
                Ok(())
            }
            Command::Validate => {
                let report = run::validate(&self.paths()?)?;
                self.say(&report.to_text());
                match report.failures().as_slice() {
                    [] => Ok(()),
                    f => Err(Error::Validation(f.join(", "))),
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
