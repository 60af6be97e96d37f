//! Subcommand implementations.

pub mod fit;
pub mod laser;
pub mod lattice;
pub mod modes;
pub mod simulate;

use std::path::{Path, PathBuf};

use pcavity_core::config::PipelineConfig;
use pcavity_core::geometry::{build_graded_lattice, rasterize, DielectricGrid, HoleList};
use sha2::{Digest, Sha256};

use crate::{CliError, GlobalOpts};

pub fn load_config(global: &GlobalOpts) -> Result<(PipelineConfig, PathBuf), CliError> {
    let path = global
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs --config".into()))?;
    let cfg = PipelineConfig::from_path(path)?;
    Ok((cfg, path.clone()))
}

pub fn ensure_out(global: &GlobalOpts) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&global.out).map_err(|e| {
        CliError::Compute(format!("cannot create {}: {e}", global.out.display()))
    })?;
    Ok(global.out.clone())
}

/// Build the hole list and rasterized grid from the config, with a
/// provenance digest of the lattice parameters carried into the sidecar.
pub fn build_grid_from_config(
    cfg: &PipelineConfig,
    max_mem_mb: usize,
) -> Result<(HoleList, DielectricGrid), CliError> {
    let spec = cfg.lattice()?.to_spec();
    spec.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut params = cfg.raster()?.to_params(spec.a_nm)?;
    // honor the global memory cap (8-byte cells)
    params.max_cells = params
        .max_cells
        .min(max_mem_mb.saturating_mul(1024 * 1024) / 8);
    let holes = build_graded_lattice(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let mut grid = rasterize(&holes, &spec, &params).map_err(|e| match e {
        pcavity_core::geometry::GeometryError::GridTooLarge { .. } => {
            CliError::Config(e.to_string())
        }
        other => CliError::Compute(other.to_string()),
    })?;
    let spec_text = serde_json::to_string(&spec)
        .map_err(|e| CliError::Compute(format!("spec digest: {e}")))?;
    grid.provenance = Some(hex::encode(Sha256::digest(spec_text.as_bytes())));
    Ok((holes, grid))
}

pub fn join_out(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}
