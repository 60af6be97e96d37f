//! File formats shared by the CLI: little-endian f64 row-major flat binaries
//! with JSON sidecars for grids and snapshots, and the CSV schemas for hole
//! lists, probe records, L-L curves, and fit inputs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdtd::{FieldComponent, FieldRecord, Snapshot, Symmetry};
use crate::geometry::{DielectricGrid, Hole, HoleList};
use crate::laser::LLCurve;
use crate::spectra::{LLData, Spectrum};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("CSV error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("JSON error on {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("bad file contents in {path}: {what}")]
    Format { path: PathBuf, what: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---- flat binary arrays ----

fn write_f64_le(path: &Path, data: &Array2<f64>) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for &v in data.iter() {
        w.write_all(&v.to_le_bytes()).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_f64_le(path: &Path, shape: (usize, usize)) -> Result<Array2<f64>, IoError> {
    let mut r = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err(path))?;
    let expect = shape.0 * shape.1 * 8;
    if bytes.len() != expect {
        return Err(IoError::Format {
            path: path.to_path_buf(),
            what: format!("expected {expect} bytes for shape {shape:?}, found {}", bytes.len()),
        });
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Array2::from_shape_vec(shape, data).expect("shape checked"))
}

// ---- dielectric grid ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSidecar {
    pub format: String,
    /// (ny, nx), row-major.
    pub shape: (usize, usize),
    pub dx_nm: f64,
    pub origin_nm: (f64, f64),
    pub n_eff: f64,
    /// Hex digest of the generating lattice spec, when known.
    pub provenance_sha256: Option<String>,
    /// The grade profile is an in-house approximation of the published
    /// design; this note travels with every grid.
    pub profile_note: String,
}

pub const F64LE_ROW_MAJOR: &str = "f64le-rowmajor";
pub const PROFILE_NOTE: &str = "hole-radius grade profile: normalized product of per-axis \
power laws, saturated at the larger edge value; an approximation chosen to match published \
endpoint radii, not a published formula";

/// Write `<base>.f64` and `<base>.json`.
pub fn write_grid(base: &Path, grid: &DielectricGrid) -> Result<(), IoError> {
    write_f64_le(&base.with_extension("f64"), &grid.eps)?;
    let sidecar = GridSidecar {
        format: F64LE_ROW_MAJOR.to_string(),
        shape: grid.eps.dim(),
        dx_nm: grid.dx_nm,
        origin_nm: grid.origin_nm,
        n_eff: grid.n_eff,
        provenance_sha256: grid.provenance.clone(),
        profile_note: PROFILE_NOTE.to_string(),
    };
    let path = base.with_extension("json");
    let f = File::create(&path).map_err(io_err(&path))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &sidecar).map_err(|source| IoError::Json {
        path,
        source,
    })
}

pub fn read_grid(base: &Path) -> Result<DielectricGrid, IoError> {
    let path = base.with_extension("json");
    let f = File::open(&path).map_err(io_err(&path))?;
    let sidecar: GridSidecar =
        serde_json::from_reader(BufReader::new(f)).map_err(|source| IoError::Json {
            path: path.clone(),
            source,
        })?;
    if sidecar.format != F64LE_ROW_MAJOR {
        return Err(IoError::Format {
            path,
            what: format!("unsupported format {}", sidecar.format),
        });
    }
    let eps = read_f64_le(&base.with_extension("f64"), sidecar.shape)?;
    Ok(DielectricGrid {
        eps,
        dx_nm: sidecar.dx_nm,
        origin_nm: sidecar.origin_nm,
        n_eff: sidecar.n_eff,
        provenance: sidecar.provenance_sha256,
    })
}

// ---- snapshots ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotSidecar {
    pub format: String,
    pub shape: (usize, usize),
    pub step: usize,
    pub t_norm: f64,
    pub dx_norm: f64,
    pub unfolded: bool,
    /// Component file names relative to the sidecar.
    pub components: SnapshotFiles,
    /// Source center frequency of the run, for downstream consistency checks.
    pub center_freq_norm: Option<f64>,
    pub symmetry: (Symmetry, Symmetry),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotFiles {
    pub hz: String,
    pub ex: String,
    pub ey: String,
}

/// Write `<base>_hz.f64`, `<base>_ex.f64`, `<base>_ey.f64`, `<base>.json`.
pub fn write_snapshot(
    base: &Path,
    snap: &Snapshot,
    center_freq_norm: Option<f64>,
    symmetry: (Symmetry, Symmetry),
) -> Result<(), IoError> {
    let stem = base
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "snapshot".to_string());
    let name = |c: &str| format!("{stem}_{c}.f64");
    let with = |c: &str| base.with_file_name(name(c));
    write_f64_le(&with("hz"), &snap.hz)?;
    write_f64_le(&with("ex"), &snap.ex)?;
    write_f64_le(&with("ey"), &snap.ey)?;
    let sidecar = SnapshotSidecar {
        format: F64LE_ROW_MAJOR.to_string(),
        shape: snap.shape(),
        step: snap.step,
        t_norm: snap.t_norm,
        dx_norm: snap.dx_norm,
        unfolded: snap.unfolded,
        components: SnapshotFiles {
            hz: name("hz"),
            ex: name("ex"),
            ey: name("ey"),
        },
        center_freq_norm,
        symmetry,
    };
    let path = base.with_extension("json");
    let f = File::create(&path).map_err(io_err(&path))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &sidecar)
        .map_err(|source| IoError::Json { path, source })
}

pub fn read_snapshot(base: &Path) -> Result<(Snapshot, SnapshotSidecar), IoError> {
    let path = base.with_extension("json");
    let f = File::open(&path).map_err(io_err(&path))?;
    let sidecar: SnapshotSidecar =
        serde_json::from_reader(BufReader::new(f)).map_err(|source| IoError::Json {
            path: path.clone(),
            source,
        })?;
    let dir = base.parent().unwrap_or(Path::new("."));
    let snap = Snapshot {
        step: sidecar.step,
        t_norm: sidecar.t_norm,
        dx_norm: sidecar.dx_norm,
        hz: read_f64_le(&dir.join(&sidecar.components.hz), sidecar.shape)?,
        ex: read_f64_le(&dir.join(&sidecar.components.ex), sidecar.shape)?,
        ey: read_f64_le(&dir.join(&sidecar.components.ey), sidecar.shape)?,
        unfolded: sidecar.unfolded,
    };
    Ok((snap, sidecar))
}

// ---- CSV formats ----

/// Hole list: columns x_nm, y_nm, r_nm.
pub fn write_holes_csv(path: &Path, holes: &HoleList) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let wrap = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(["x_nm", "y_nm", "r_nm"]).map_err(wrap)?;
    for h in &holes.holes {
        w.write_record([
            format!("{:.6}", h.x_nm),
            format!("{:.6}", h.y_nm),
            format!("{:.6}", h.r_nm),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_holes_csv(path: &Path) -> Result<HoleList, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut holes = Vec::new();
    for rec in r.deserialize::<(f64, f64, f64)>() {
        let (x_nm, y_nm, r_nm) = rec.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        holes.push(Hole { x_nm, y_nm, r_nm });
    }
    Ok(HoleList { holes })
}

/// Probe record: columns step, t_normalized, value.
pub fn write_record_csv(path: &Path, record: &FieldRecord) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let wrap = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(["step", "t_normalized", "value"]).map_err(wrap)?;
    for (k, &v) in record.samples.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            format!("{:.9}", (k + 1) as f64 * record.dt),
            format!("{v:.17e}"),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_record_csv(
    path: &Path,
    dt: f64,
    start_step: usize,
    component: FieldComponent,
) -> Result<FieldRecord, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut samples = Vec::new();
    for rec in r.deserialize::<(usize, f64, f64)>() {
        let (_, _, v) = rec.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        samples.push(v);
    }
    Ok(FieldRecord {
        dt,
        samples,
        start_step,
        position_nm: (0.0, 0.0),
        component,
    })
}

/// L-L curve: columns pump_uW, N_cm3, S_photons, emitted_arb.
pub fn write_ll_curve_csv(path: &Path, curve: &LLCurve) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let wrap = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(["pump_uW", "N_cm3", "S_photons", "emitted_arb"])
        .map_err(wrap)?;
    for p in &curve.points {
        w.write_record([
            format!("{:.9}", p.pump_uw),
            format!("{:.9e}", p.n_cm3),
            format!("{:.9e}", p.s_photons),
            format!("{:.9e}", p.emitted_arb),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(io_err(path))
}

/// Measured spectrum: columns wavelength_nm, power_arb.
pub fn read_spectrum_csv(path: &Path) -> Result<Spectrum, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut wavelength_nm = Vec::new();
    let mut power = Vec::new();
    for rec in r.deserialize::<(f64, f64)>() {
        let (w, p) = rec.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        wavelength_nm.push(w);
        power.push(p);
    }
    Ok(Spectrum {
        wavelength_nm,
        power,
        meta: Default::default(),
    })
}

pub fn write_spectrum_csv(path: &Path, spectrum: &Spectrum) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let wrap = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(["wavelength_nm", "power_arb"]).map_err(wrap)?;
    for (x, y) in spectrum.wavelength_nm.iter().zip(&spectrum.power) {
        w.write_record([format!("{x:.9}"), format!("{y:.9e}")])
            .map_err(wrap)?;
    }
    w.flush().map_err(io_err(path))
}

/// Measured L-L data: columns pump_uW, line_arb, background_arb.
pub fn read_ll_csv(path: &Path) -> Result<LLData, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut pump_uw = Vec::new();
    let mut line_power = Vec::new();
    let mut background_power = Vec::new();
    for rec in r.deserialize::<(f64, f64, f64)>() {
        let (p, l, b) = rec.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        pump_uw.push(p);
        line_power.push(l);
        background_power.push(b);
    }
    Ok(LLData {
        pump_uw,
        line_power,
        background_power,
    })
}

/// Polarizer scan: columns angle_deg, power_arb. Returns radians.
pub fn read_polarization_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut angles = Vec::new();
    let mut powers = Vec::new();
    for rec in r.deserialize::<(f64, f64)>() {
        let (a, p) = rec.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        angles.push(a.to_radians());
        powers.push(p);
    }
    Ok((angles, powers))
}
