//! 2D TE-polarized Yee-grid FDTD solver (fields Hz, Ex, Ey).
//!
//! Normalized units throughout: lengths in lattice constants (a = 1), c = 1,
//! so time is in units of a/c and frequencies are the usual a/lambda.
//! Conversions to nm happen at the reporting layer.
//!
//! The solver supports CPML absorbing boundaries, PEC walls, and
//! symmetry-selective mirror walls on the low-x / low-y boundaries that
//! enforce a chosen parity of Hz, which halves or quarters the domain.

mod pml;
mod source;

pub use pml::{PmlParams, PmlState};
pub use source::SourceSpec;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::DielectricGrid;

#[derive(Debug, Error)]
pub enum FdtdError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("field divergence (NaN/Inf) detected at step {step}")]
    Diverged { step: usize },
    #[error("snapshots would need {need} bytes, cap is {cap}")]
    SnapshotMemory { need: usize, cap: usize },
    #[error("shape mismatch: fields are {field:?}, grid is {grid:?}")]
    ShapeMismatch {
        field: (usize, usize),
        grid: (usize, usize),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldComponent {
    Hz,
    Ex,
    Ey,
}

/// Parity of Hz under the mirror at the low wall of an axis.
///
/// The derived parities follow from the curl equations: with Hz parity s
/// under the x-mirror, Ex has parity s and Ey parity -s; with Hz parity t
/// under the y-mirror, Ex has parity -t and Ey parity t.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    #[default]
    None,
    Even,
    Odd,
}

impl Symmetry {
    fn sign(self) -> Option<f64> {
        match self {
            Symmetry::None => None,
            Symmetry::Even => Some(1.0),
            Symmetry::Odd => Some(-1.0),
        }
    }
}

/// One FDTD run description. Lengths in nm, frequencies in a/lambda with
/// `a = unit_a_nm`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Normalization length (the lattice constant), nm.
    pub unit_a_nm: f64,
    /// Time step in units of dx; the 2D stability bound is 1/sqrt(2).
    pub courant: f64,
    pub n_steps: usize,
    /// Absorbing boundaries; `None` closes the box with PEC walls.
    pub pml: Option<PmlParams>,
    pub sources: Vec<SourceSpec>,
    /// Probe positions (nm).
    pub probes: Vec<(f64, f64)>,
    pub probe_component: FieldComponent,
    /// Capture a snapshot every this many steps (0 = never).
    pub snapshot_stride: usize,
    /// Restrict snapshot capture to an inclusive step range.
    pub snapshot_window: Option<(usize, usize)>,
    pub symmetry_x: Symmetry,
    pub symmetry_y: Symmetry,
    /// Record the discrete field energy after every step.
    pub track_energy: bool,
    pub max_snapshot_bytes: usize,
}

impl SimConfig {
    pub fn new(unit_a_nm: f64, n_steps: usize) -> Self {
        SimConfig {
            unit_a_nm,
            courant: 0.5,
            n_steps,
            pml: Some(PmlParams::default()),
            sources: Vec::new(),
            probes: Vec::new(),
            probe_component: FieldComponent::Hz,
            snapshot_stride: 0,
            snapshot_window: None,
            symmetry_x: Symmetry::None,
            symmetry_y: Symmetry::None,
            track_energy: false,
            max_snapshot_bytes: 1 << 30,
        }
    }

    pub fn is_cfl_stable(&self) -> bool {
        self.courant <= 1.0 / 2.0_f64.sqrt() + 1e-12
    }

    /// Everything except the CFL bound, which is checked separately so that
    /// instability demonstrations remain possible.
    pub fn validate(&self, grid: &DielectricGrid) -> Result<(), FdtdError> {
        if !(self.unit_a_nm > 0.0) {
            return Err(FdtdError::InvalidConfig("unit_a_nm must be positive".into()));
        }
        if self.n_steps == 0 {
            return Err(FdtdError::InvalidConfig("n_steps must be positive".into()));
        }
        if !(self.courant > 0.0) {
            return Err(FdtdError::InvalidConfig("courant must be positive".into()));
        }
        if let Some(pml) = &self.pml {
            pml.validate()?;
            let t = pml.thickness_cells;
            if grid.nx() < 2 * t + 4 || grid.ny() < 2 * t + 4 {
                return Err(FdtdError::InvalidConfig(format!(
                    "grid {}x{} too small for {t}-cell PML",
                    grid.nx(),
                    grid.ny()
                )));
            }
        }
        for s in &self.sources {
            s.validate()?;
            if grid_index(grid, s.position_nm).is_none() {
                return Err(FdtdError::InvalidConfig(format!(
                    "source at {:?} nm lies outside the grid",
                    s.position_nm
                )));
            }
        }
        for &p in &self.probes {
            if grid_index(grid, p).is_none() {
                return Err(FdtdError::InvalidConfig(format!(
                    "probe at {p:?} nm lies outside the grid"
                )));
            }
        }
        if self.snapshot_stride > 0 {
            let count = snapshot_steps(self).len();
            let need = count * 3 * grid.nx() * grid.ny() * std::mem::size_of::<f64>();
            if need > self.max_snapshot_bytes {
                return Err(FdtdError::SnapshotMemory {
                    need,
                    cap: self.max_snapshot_bytes,
                });
            }
        }
        Ok(())
    }
}

fn snapshot_steps(config: &SimConfig) -> Vec<usize> {
    if config.snapshot_stride == 0 {
        return Vec::new();
    }
    let (lo, hi) = config.snapshot_window.unwrap_or((1, config.n_steps));
    (1..=config.n_steps)
        .filter(|s| s % config.snapshot_stride == 0 && *s >= lo && *s <= hi)
        .collect()
}

/// Nearest cell index for a physical position, or None when outside.
pub fn grid_index(grid: &DielectricGrid, pos_nm: (f64, f64)) -> Option<(usize, usize)> {
    let i = ((pos_nm.0 - grid.origin_nm.0) / grid.dx_nm).round();
    let j = ((pos_nm.1 - grid.origin_nm.1) / grid.dx_nm).round();
    if i < 0.0 || j < 0.0 || i as usize >= grid.nx() || j as usize >= grid.ny() {
        None
    } else {
        Some((i as usize, j as usize))
    }
}

/// Time series recorded at one probe point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    /// Normalized time step.
    pub dt: f64,
    pub samples: Vec<f64>,
    /// First sample index after every source window has closed; analysis
    /// starts here.
    pub start_step: usize,
    pub position_nm: (f64, f64),
    pub component: FieldComponent,
}

/// Full-field capture, co-registered with the dielectric grid.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t_norm: f64,
    /// Cell size in normalized units.
    pub dx_norm: f64,
    pub hz: Array2<f64>,
    pub ex: Array2<f64>,
    pub ey: Array2<f64>,
    /// Whether a symmetry-halved run has been unfolded to the full domain.
    pub unfolded: bool,
}

impl Snapshot {
    pub fn shape(&self) -> (usize, usize) {
        self.hz.dim()
    }

    /// Unfold a half/quarter-domain snapshot across its mirror walls,
    /// applying the per-component parities.
    pub fn unfold(&self, symmetry_x: Symmetry, symmetry_y: Symmetry) -> Snapshot {
        let mut hz = self.hz.clone();
        let mut ex = self.ex.clone();
        let mut ey = self.ey.clone();
        if let Some(s) = symmetry_x.sign() {
            hz = unfold_x(&hz, s, true);
            ex = unfold_x(&ex, s, true);
            ey = unfold_x(&ey, -s, false);
        }
        if let Some(t) = symmetry_y.sign() {
            hz = unfold_y(&hz, t, true);
            ex = unfold_y(&ex, -t, false);
            ey = unfold_y(&ey, t, true);
        }
        Snapshot {
            step: self.step,
            t_norm: self.t_norm,
            dx_norm: self.dx_norm,
            hz,
            ex,
            ey,
            unfolded: true,
        }
    }
}

/// Mirror a field array across the low-x wall. `half_offset` marks
/// components that live at half-integer x (Hz, Ex); integer-x components
/// (Ey) have a sample on the wall itself.
fn unfold_x(a: &Array2<f64>, sign: f64, half_offset: bool) -> Array2<f64> {
    let (ny, nx) = a.dim();
    let mut out = Array2::zeros((ny, 2 * nx));
    for j in 0..ny {
        for k in 0..2 * nx {
            out[(j, k)] = if k >= nx {
                a[(j, k - nx)]
            } else if half_offset {
                sign * a[(j, nx - 1 - k)]
            } else if k == 0 {
                0.0
            } else {
                sign * a[(j, nx - k)]
            };
        }
    }
    out
}

fn unfold_y(a: &Array2<f64>, sign: f64, half_offset: bool) -> Array2<f64> {
    let (ny, nx) = a.dim();
    let mut out = Array2::zeros((2 * ny, nx));
    for k in 0..2 * ny {
        for i in 0..nx {
            out[(k, i)] = if k >= ny {
                a[(k - ny, i)]
            } else if half_offset {
                sign * a[(ny - 1 - k, i)]
            } else if k == 0 {
                0.0
            } else {
                sign * a[(ny - k, i)]
            };
        }
    }
    out
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<FieldRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Discrete invariant energy per step (staggered-consistent form),
    /// present when `track_energy` was set.
    pub energy: Vec<f64>,
    pub dt: f64,
    pub source_end_step: usize,
}

/// Exclusive-use time stepper. Separate solvers may run concurrently; one
/// solver's stepping parallelizes internally over row bands with output
/// independent of the thread count.
pub struct Solver {
    nx: usize,
    ny: usize,
    dx: f64,
    dt: f64,
    hz: Vec<f64>,
    ex: Vec<f64>,
    ey: Vec<f64>,
    hz_prev: Vec<f64>,
    /// dt / (dx * eps) at Ex and Ey positions.
    cex: Vec<f64>,
    cey: Vec<f64>,
    /// eps at Ex / Ey positions (for energy sums).
    eps_ex: Vec<f64>,
    eps_ey: Vec<f64>,
    pml: Option<PmlState>,
    sym_x: Symmetry,
    sym_y: Symmetry,
    step_index: usize,
    track_energy: bool,
    last_energy: f64,
    sources: Vec<(usize, SourceSpec)>,
}

impl Solver {
    pub fn new(grid: &DielectricGrid, config: &SimConfig) -> Result<Solver, FdtdError> {
        config.validate(grid)?;
        let (ny, nx) = grid.eps.dim();
        let dx = grid.dx_nm / config.unit_a_nm;
        let dt = config.courant * dx;
        let eps = grid.eps.as_slice().expect("standard layout");

        let mut eps_ex = vec![0.0; nx * ny];
        let mut eps_ey = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let e = eps[j * nx + i];
                eps_ex[j * nx + i] = if j > 0 {
                    0.5 * (e + eps[(j - 1) * nx + i])
                } else {
                    e
                };
                eps_ey[j * nx + i] = if i > 0 {
                    0.5 * (e + eps[j * nx + i - 1])
                } else {
                    e
                };
            }
        }
        let cex: Vec<f64> = eps_ex.iter().map(|&e| dt / (dx * e)).collect();
        let cey: Vec<f64> = eps_ey.iter().map(|&e| dt / (dx * e)).collect();

        let pml = config.pml.as_ref().map(|p| {
            PmlState::new(
                p,
                nx,
                ny,
                dx,
                dt,
                config.symmetry_x == Symmetry::None,
                config.symmetry_y == Symmetry::None,
            )
        });
        let sources = config
            .sources
            .iter()
            .map(|s| {
                let (i, j) = grid_index(grid, s.position_nm).expect("validated");
                (j * nx + i, s.clone())
            })
            .collect();
        Ok(Solver {
            nx,
            ny,
            dx,
            dt,
            hz: vec![0.0; nx * ny],
            ex: vec![0.0; nx * ny],
            ey: vec![0.0; nx * ny],
            hz_prev: Vec::new(),
            cex,
            cey,
            eps_ex,
            eps_ey,
            pml,
            sym_x: config.symmetry_x,
            sym_y: config.symmetry_y,
            step_index: 0,
            track_energy: config.track_energy,
            last_energy: 0.0,
            sources,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn field(&self, component: FieldComponent) -> &[f64] {
        match component {
            FieldComponent::Hz => &self.hz,
            FieldComponent::Ex => &self.ex,
            FieldComponent::Ey => &self.ey,
        }
    }

    /// One leapfrog update: H then E, with CPML corrections in the boundary
    /// layers and mirror conditions on symmetry walls.
    pub fn step(&mut self) -> Result<(), FdtdError> {
        if self.track_energy {
            if self.hz_prev.len() != self.hz.len() {
                self.hz_prev = self.hz.clone();
            } else {
                self.hz_prev.copy_from_slice(&self.hz);
            }
        }
        self.update_h();
        if self.track_energy {
            // invariant pairing: E at step n with Hz at n -/+ 1/2
            self.last_energy = self.invariant_energy();
        }
        let t_h = (self.step_index as f64 + 0.5) * self.dt;
        self.apply_sources(t_h, true);
        self.update_e();
        let t_e = (self.step_index as f64 + 1.0) * self.dt;
        self.apply_sources(t_e, false);
        self.step_index += 1;
        if self.step_index.is_multiple_of(256) && !self.hz.iter().all(|v| v.is_finite()) {
            return Err(FdtdError::Diverged {
                step: self.step_index,
            });
        }
        Ok(())
    }

    fn update_h(&mut self) {
        let nx = self.nx;
        let ny = self.ny;
        let dtdx = self.dt / self.dx;
        let ex = &self.ex;
        let ey = &self.ey;
        match &mut self.pml {
            None => {
                self.hz
                    .par_chunks_mut(nx)
                    .enumerate()
                    .for_each(|(j, hz_row)| {
                        let ex_row = &ex[j * nx..(j + 1) * nx];
                        let ex_up = if j + 1 < ny {
                            &ex[(j + 1) * nx..(j + 2) * nx]
                        } else {
                            &[]
                        };
                        let ey_row = &ey[j * nx..(j + 1) * nx];
                        for i in 0..nx {
                            let dey = if i + 1 < nx { ey_row[i + 1] } else { 0.0 } - ey_row[i];
                            let dex = if j + 1 < ny { ex_up[i] } else { 0.0 } - ex_row[i];
                            hz_row[i] -= dtdx * (dey - dex);
                        }
                    });
            }
            Some(pml) => {
                let (bxh, cxh) = (&pml.bx_half, &pml.cx_half);
                let (byh, cyh) = (&pml.by_half, &pml.cy_half);
                self.hz
                    .par_chunks_mut(nx)
                    .zip(pml.psi_hz_x.par_chunks_mut(nx))
                    .zip(pml.psi_hz_y.par_chunks_mut(nx))
                    .enumerate()
                    .for_each(|(j, ((hz_row, psix_row), psiy_row))| {
                        let ex_row = &ex[j * nx..(j + 1) * nx];
                        let ex_up = if j + 1 < ny {
                            &ex[(j + 1) * nx..(j + 2) * nx]
                        } else {
                            &[]
                        };
                        let ey_row = &ey[j * nx..(j + 1) * nx];
                        let (by, cy) = (byh[j], cyh[j]);
                        for i in 0..nx {
                            let dey = if i + 1 < nx { ey_row[i + 1] } else { 0.0 } - ey_row[i];
                            let dex = if j + 1 < ny { ex_up[i] } else { 0.0 } - ex_row[i];
                            let mut ddey = dey;
                            let mut ddex = dex;
                            if cxh[i] != 0.0 {
                                psix_row[i] = bxh[i] * psix_row[i] + cxh[i] * dey;
                                ddey += psix_row[i];
                            }
                            if cy != 0.0 {
                                psiy_row[i] = by * psiy_row[i] + cy * dex;
                                ddex += psiy_row[i];
                            }
                            hz_row[i] -= dtdx * (ddey - ddex);
                        }
                    });
            }
        }
    }

    fn update_e(&mut self) {
        let nx = self.nx;
        let hz = &self.hz;
        let cex = &self.cex;
        let cey = &self.cey;
        let sx = self.sym_x.sign();
        let sy = self.sym_y.sign();
        match &mut self.pml {
            None => {
                self.ex
                    .par_chunks_mut(nx)
                    .enumerate()
                    .for_each(|(j, ex_row)| {
                        let hz_row = &hz[j * nx..(j + 1) * nx];
                        if j == 0 {
                            if let Some(t) = sy {
                                for i in 0..nx {
                                    ex_row[i] += cex[i] * ((1.0 - t) * hz_row[i]);
                                }
                            }
                        } else {
                            let hz_dn = &hz[(j - 1) * nx..j * nx];
                            for i in 0..nx {
                                ex_row[i] += cex[j * nx + i] * (hz_row[i] - hz_dn[i]);
                            }
                        }
                    });
                self.ey
                    .par_chunks_mut(nx)
                    .enumerate()
                    .for_each(|(j, ey_row)| {
                        let hz_row = &hz[j * nx..(j + 1) * nx];
                        if let Some(s) = sx {
                            ey_row[0] -= cey[j * nx] * ((1.0 - s) * hz_row[0]);
                        }
                        for i in 1..nx {
                            ey_row[i] -= cey[j * nx + i] * (hz_row[i] - hz_row[i - 1]);
                        }
                    });
            }
            Some(pml) => {
                let (byi, cyi) = (&pml.by_int, &pml.cy_int);
                let (bxi, cxi) = (&pml.bx_int, &pml.cx_int);
                self.ex
                    .par_chunks_mut(nx)
                    .zip(pml.psi_ex_y.par_chunks_mut(nx))
                    .enumerate()
                    .for_each(|(j, (ex_row, psi_row))| {
                        let hz_row = &hz[j * nx..(j + 1) * nx];
                        if j == 0 {
                            if let Some(t) = sy {
                                for i in 0..nx {
                                    ex_row[i] += cex[i] * ((1.0 - t) * hz_row[i]);
                                }
                            }
                            return;
                        }
                        let hz_dn = &hz[(j - 1) * nx..j * nx];
                        let (by, cy) = (byi[j], cyi[j]);
                        for i in 0..nx {
                            let mut d = hz_row[i] - hz_dn[i];
                            if cy != 0.0 {
                                psi_row[i] = by * psi_row[i] + cy * d;
                                d += psi_row[i];
                            }
                            ex_row[i] += cex[j * nx + i] * d;
                        }
                    });
                self.ey
                    .par_chunks_mut(nx)
                    .zip(pml.psi_ey_x.par_chunks_mut(nx))
                    .enumerate()
                    .for_each(|(j, (ey_row, psi_row))| {
                        let hz_row = &hz[j * nx..(j + 1) * nx];
                        if let Some(s) = sx {
                            ey_row[0] -= cey[j * nx] * ((1.0 - s) * hz_row[0]);
                        }
                        for i in 1..nx {
                            let mut d = hz_row[i] - hz_row[i - 1];
                            if cxi[i] != 0.0 {
                                psi_row[i] = bxi[i] * psi_row[i] + cxi[i] * d;
                                d += psi_row[i];
                            }
                            ey_row[i] -= cey[j * nx + i] * d;
                        }
                    });
            }
        }
    }

    fn apply_sources(&mut self, t: f64, magnetic: bool) {
        for (idx, spec) in &self.sources {
            let is_h = matches!(spec.component, FieldComponent::Hz);
            if is_h != magnetic {
                continue;
            }
            let v = spec.value(t, self.dt);
            match spec.component {
                FieldComponent::Hz => self.hz[*idx] += v,
                FieldComponent::Ex => self.ex[*idx] += v,
                FieldComponent::Ey => self.ey[*idx] += v,
            }
        }
    }

    /// Invariant energy measured at the correct leapfrog phase during the
    /// last step (only meaningful with energy tracking on).
    pub fn tracked_energy(&self) -> f64 {
        self.last_energy
    }

    /// Discrete invariant energy: eps E^2 paired with the product of
    /// consecutive Hz half-steps. Exactly conserved in a lossless closed box,
    /// up to rounding. Correct only between the H and E updates of a step.
    fn invariant_energy(&self) -> f64 {
        let cell = self.dx * self.dx;
        let e_part: f64 = self
            .ex
            .iter()
            .zip(&self.eps_ex)
            .map(|(&e, &eps)| eps * e * e)
            .sum::<f64>()
            + self
                .ey
                .iter()
                .zip(&self.eps_ey)
                .map(|(&e, &eps)| eps * e * e)
                .sum::<f64>();
        let h_part: f64 = if self.hz_prev.len() == self.hz.len() {
            self.hz
                .iter()
                .zip(&self.hz_prev)
                .map(|(&a, &b)| a * b)
                .sum()
        } else {
            self.hz.iter().map(|&h| h * h).sum()
        };
        0.5 * (e_part + h_part) * cell
    }

    /// Plain pointwise energy of the current fields (no time staggering).
    pub fn pointwise_energy(&self) -> f64 {
        let cell = self.dx * self.dx;
        let e: f64 = self
            .ex
            .iter()
            .zip(&self.eps_ex)
            .map(|(&v, &eps)| eps * v * v)
            .sum::<f64>()
            + self
                .ey
                .iter()
                .zip(&self.eps_ey)
                .map(|(&v, &eps)| eps * v * v)
                .sum::<f64>();
        let h: f64 = self.hz.iter().map(|&v| v * v).sum();
        0.5 * (e + h) * cell
    }

    pub fn snapshot(&self) -> Snapshot {
        let shape = (self.ny, self.nx);
        Snapshot {
            step: self.step_index,
            t_norm: self.step_index as f64 * self.dt,
            dx_norm: self.dx,
            hz: Array2::from_shape_vec(shape, self.hz.clone()).unwrap(),
            ex: Array2::from_shape_vec(shape, self.ex.clone()).unwrap(),
            ey: Array2::from_shape_vec(shape, self.ey.clone()).unwrap(),
            unfolded: false,
        }
    }
}

/// Run a configured simulation to completion.
///
/// Deterministic: identical `(grid, config)` produce bit-identical records
/// regardless of thread count.
pub fn run(grid: &DielectricGrid, config: &SimConfig) -> Result<RunOutput, FdtdError> {
    let mut solver = Solver::new(grid, config)?;
    let dt = solver.dt();
    let source_end_step = config
        .sources
        .iter()
        .map(|s| s.end_step(dt))
        .max()
        .unwrap_or(0)
        .min(config.n_steps);

    let probe_idx: Vec<usize> = config
        .probes
        .iter()
        .map(|&p| {
            let (i, j) = grid_index(grid, p).expect("validated");
            j * grid.nx() + i
        })
        .collect();
    let mut records: Vec<FieldRecord> = config
        .probes
        .iter()
        .map(|&p| FieldRecord {
            dt,
            samples: Vec::with_capacity(config.n_steps),
            start_step: source_end_step,
            position_nm: p,
            component: config.probe_component,
        })
        .collect();
    let snap_steps = snapshot_steps(config);
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let mut energy = Vec::new();

    for step in 1..=config.n_steps {
        solver.step()?;
        if config.track_energy {
            energy.push(solver.tracked_energy());
        }
        let field = solver.field(config.probe_component);
        for (rec, &idx) in records.iter_mut().zip(&probe_idx) {
            let v = field[idx];
            if !v.is_finite() {
                return Err(FdtdError::Diverged { step });
            }
            rec.samples.push(v);
        }
        if snap_steps.binary_search(&step).is_ok() {
            snapshots.push(solver.snapshot());
        }
    }
    Ok(RunOutput {
        records,
        snapshots,
        energy,
        dt,
        source_end_step,
    })
}

/// Pointwise field energy of a snapshot against its dielectric map:
/// sum of (eps |E|^2 + |H|^2) / 2 over cells, times the cell area
/// (simulation units).
pub fn total_energy(snapshot: &Snapshot, grid: &DielectricGrid) -> Result<f64, FdtdError> {
    if snapshot.shape() != grid.eps.dim() {
        return Err(FdtdError::ShapeMismatch {
            field: snapshot.shape(),
            grid: grid.eps.dim(),
        });
    }
    let cell = snapshot.dx_norm * snapshot.dx_norm;
    let mut acc = 0.0;
    for (&eps, (&hz, (&ex, &ey))) in grid
        .eps
        .iter()
        .zip(snapshot.hz.iter().zip(snapshot.ex.iter().zip(snapshot.ey.iter())))
    {
        acc += eps * (ex * ex + ey * ey) + hz * hz;
    }
    Ok(0.5 * acc * cell)
}
