//! End-to-end run: solve, export, hash, and describe the artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cournot_mfg::spi::spi_solve_with;
use cournot_mfg::{EquilibriumSolution, IterationDiagnostics};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::RunError;
use crate::export::{self, default_times, last_time_index, FieldWhich, SeriesKind};
use crate::plots::emit_plots;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub converged: bool,
    pub status: String,
    pub iterations: usize,
    pub final_residual: Option<f64>,
    pub q_max: f64,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<Artifact>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Solves without writing anything.
pub fn solve(
    config: &RunConfig,
    on_iteration: impl FnMut(&IterationDiagnostics<f64>),
) -> Result<EquilibriumSolution<f64>, RunError> {
    let p = config.build()?;
    spi_solve_with(&p.params, &p.grid, &p.m0, &p.terminal, &p.q0, &p.spi, on_iteration).map_err(RunError::Numerical)
}

pub fn run(config: &RunConfig) -> Result<RunManifest, RunError> {
    run_with(config, |_| {}).map(|(manifest, _)| manifest)
}

/// Runs the solver, writes the requested artifacts plus `manifest.json`.
pub fn run_with(
    config: &RunConfig,
    on_iteration: impl FnMut(&IterationDiagnostics<f64>),
) -> Result<(RunManifest, EquilibriumSolution<f64>), RunError> {
    let problem = config.build()?;
    let out = &config.output;
    // validate requested times before spending time on the solve
    let last_nodal = problem.grid.time_steps();
    if let Some(&bad) = out.field_times.iter().find(|&&tau| tau > last_nodal) {
        return Err(RunError::Usage(format!("field time index {bad} exceeds N_T = {last_nodal}")));
    }
    std::fs::create_dir_all(&out.directory).map_err(|e| RunError::io(&out.directory, e))?;

    let start = Instant::now();
    let sol = solve(config, on_iteration)?;
    let wall = start.elapsed().as_secs_f64();

    let mut files: Vec<PathBuf> = Vec::new();
    let dir = out.directory.as_path();
    if out.series {
        for kind in [SeriesKind::Price, SeriesKind::Production, SeriesKind::Mass] {
            let path = dir.join(kind.file_name());
            export::export_series(&sol, kind, &path)?;
            files.push(path);
        }
    }
    if out.convergence {
        let path = dir.join(SeriesKind::Convergence.file_name());
        export::export_series(&sol, SeriesKind::Convergence, &path)?;
        files.push(path);
    }
    if out.fields {
        for which in FieldWhich::ALL {
            let last = last_time_index(&sol, which);
            let times: Vec<usize> = if out.field_times.is_empty() {
                default_times(last)
            } else {
                out.field_times.iter().map(|&tau| tau.min(last)).collect()
            };
            let path = dir.join(which.file_name());
            export::export_field(&sol, which, &times, &path)?;
            files.push(path);
        }
    }
    let mut warnings = Vec::new();
    if out.plots {
        let (written, w) = emit_plots(&sol, dir);
        files.extend(written);
        warnings.extend(w);
    }

    let mut artifacts = Vec::new();
    for path in &files {
        let bytes = std::fs::read(path).map_err(|e| RunError::io(path, e))?;
        artifacts.push(Artifact {
            file: path.file_name().expect("artifact has a file name").to_string_lossy().into_owned(),
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = RunManifest {
        config: config.clone(),
        converged: sol.converged,
        status: if sol.converged { "converged" } else { "max-iters-reached" }.to_string(),
        iterations: sol.iterations(),
        final_residual: sol.final_residual(),
        q_max: problem.params.q_max(),
        wall_clock_seconds: wall,
        artifacts,
        warnings,
    };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    export::write_file(&path, &json)?;
    Ok((manifest, sol))
}

/// Re-reads every artifact listed in `dir/manifest.json` and returns those
/// whose hash does not match.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, RunError> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| RunError::io(&path, e))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    let mut bad = Vec::new();
    for a in &manifest.artifacts {
        let p = dir.join(&a.file);
        let bytes = std::fs::read(&p).map_err(|e| RunError::io(&p, e))?;
        if sha256_hex(&bytes) != a.sha256 {
            bad.push(a.file.clone());
        }
    }
    Ok(bad)
}
