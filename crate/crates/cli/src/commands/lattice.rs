//! `pcavity lattice`: hole CSV + dielectric grid files from the config.

use pcavity_core::io;
use serde::Serialize;

use crate::manifest::ManifestBuilder;
use crate::{CliError, GlobalOpts};

#[derive(Serialize)]
struct LatticeSummary {
    n_holes: usize,
    min_radius_nm: f64,
    max_radius_nm: f64,
    footprint_x_nm: f64,
    footprint_y_nm: f64,
    grid_nx: usize,
    grid_ny: usize,
    dx_nm: f64,
    n_eff: f64,
    air_fill_fraction: f64,
}

pub fn run(global: &GlobalOpts) -> Result<(), CliError> {
    let (cfg, cfg_path) = super::load_config(global)?;
    let out = super::ensure_out(global)?;
    let mut manifest =
        ManifestBuilder::new(&out, "lattice").with_config(Some(&cfg_path))?;

    let (holes, grid) = super::build_grid_from_config(&cfg, global.max_mem)?;
    let holes_path = super::join_out(&out, "holes.csv");
    io::write_holes_csv(&holes_path, &holes)?;
    manifest.add(&holes_path);

    let grid_base = super::join_out(&out, "grid");
    io::write_grid(&grid_base, &grid)?;
    manifest.add(&grid_base.with_extension("f64"));
    manifest.add(&grid_base.with_extension("json"));

    let (fx, fy) = holes.footprint_nm();
    let summary = LatticeSummary {
        n_holes: holes.len(),
        min_radius_nm: holes.min_radius_nm(),
        max_radius_nm: holes.max_radius_nm(),
        footprint_x_nm: fx,
        footprint_y_nm: fy,
        grid_nx: grid.nx(),
        grid_ny: grid.ny(),
        dx_nm: grid.dx_nm,
        n_eff: grid.n_eff,
        air_fill_fraction: grid.air_fill_fraction(),
    };
    let summary_path = super::join_out(&out, "lattice.json");
    crate::report::write_json(&summary_path, &summary)?;
    manifest.add(&summary_path);

    if global.verbose {
        eprintln!(
            "lattice: {} holes, grid {}x{} at {:.3} nm",
            holes.len(),
            grid.nx(),
            grid.ny(),
            grid.dx_nm
        );
    }
    manifest.write()
}
