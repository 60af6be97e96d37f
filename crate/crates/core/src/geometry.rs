//! Graded square-lattice hole patterns and their dielectric rasterization.
//!
//! The cavity is a square lattice of air holes in a high-index membrane whose
//! hole radius grows from the cavity center outward. The lattice geometry is
//! produced by [`build_graded_lattice`], turned into a relative-permittivity
//! map by [`rasterize`], and the membrane is reduced to an equivalent 2D
//! index with [`effective_index`].

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),
    #[error("graded radii reach r/a = {max_r_over_a:.4} >= 0.5; holes would merge")]
    HolesMerge { max_r_over_a: f64 },
    #[error("raster pitch dx = {dx_nm} nm exceeds a/10 = {limit_nm} nm")]
    PitchTooCoarse { dx_nm: f64, limit_nm: f64 },
    #[error(
        "raster grid of {nx} x {ny} cells ({bytes} bytes) exceeds the cap of {max_cells} cells"
    )]
    GridTooLarge {
        nx: usize,
        ny: usize,
        bytes: usize,
        max_cells: usize,
    },
    #[error("invalid slab parameters: {0}")]
    InvalidSlab(String),
}

/// Parametric description of a graded square lattice in a slab membrane.
///
/// Lengths are in nm. `n_cols` sites run along x at pitch `a_nm`, `n_rows`
/// along y. The hole radius over lattice constant grades from
/// `r_over_a_center` at the cavity center to `r_over_a_edge_x` /
/// `r_over_a_edge_y` at the lattice edges with exponent `grade_exponent`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub a_nm: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub r_over_a_center: f64,
    pub r_over_a_edge_x: f64,
    pub r_over_a_edge_y: f64,
    pub grade_exponent: f64,
    /// Membrane thickness.
    pub d_nm: f64,
    pub n_slab: f64,
    pub n_clad: f64,
    /// Rigid shift of the hole pattern relative to the cavity center, for
    /// robustness studies. Nonzero values break the mirror symmetry.
    #[serde(default)]
    pub center_offset_nm: (f64, f64),
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let err = |m: String| Err(GeometryError::InvalidSpec(m));
        if !(self.a_nm > 0.0) {
            return err(format!("a_nm must be positive, got {}", self.a_nm));
        }
        if self.n_rows < 3 || self.n_cols < 3 {
            return err(format!(
                "n_rows and n_cols must be >= 3, got {} x {}",
                self.n_rows, self.n_cols
            ));
        }
        for (name, v) in [
            ("r_over_a_center", self.r_over_a_center),
            ("r_over_a_edge_x", self.r_over_a_edge_x),
            ("r_over_a_edge_y", self.r_over_a_edge_y),
        ] {
            if !(v > 0.0) {
                return err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.r_over_a_edge_x < self.r_over_a_center
            || self.r_over_a_edge_y < self.r_over_a_center
        {
            return err(
                "edge r/a must be >= center r/a (outward-growing grade)".to_string(),
            );
        }
        let max_ra = self.max_r_over_a();
        if max_ra >= 0.5 {
            return Err(GeometryError::HolesMerge {
                max_r_over_a: max_ra,
            });
        }
        if !(self.grade_exponent > 0.0) {
            return err(format!(
                "grade_exponent must be positive, got {}",
                self.grade_exponent
            ));
        }
        if !(self.d_nm > 0.0) {
            return err(format!("d_nm must be positive, got {}", self.d_nm));
        }
        if !(self.n_slab > self.n_clad) || !(self.n_clad >= 1.0) {
            return err(format!(
                "need n_slab > n_clad >= 1, got n_slab = {}, n_clad = {}",
                self.n_slab, self.n_clad
            ));
        }
        Ok(())
    }

    /// Largest r/a the grade can produce (the profile saturates at the
    /// larger edge value, see [`build_graded_lattice`]).
    pub fn max_r_over_a(&self) -> f64 {
        self.r_over_a_center
            .max(self.r_over_a_edge_x)
            .max(self.r_over_a_edge_y)
    }

    /// r/a at normalized axis distances `u = |x|/x_max`, `v = |y|/y_max`.
    ///
    /// Each axis carries a power-law profile from the center value `c` to its
    /// edge value, `P(u) = c + (e - c) u^p`. The two profiles combine
    /// multiplicatively, normalized so the center keeps the center value:
    /// `r/a = Px(u) * Py(v) / c`, saturated at the larger edge value so that
    /// corner holes never exceed the designed maximum radius.
    pub fn r_over_a_at(&self, u: f64, v: f64) -> f64 {
        let c = self.r_over_a_center;
        let p = self.grade_exponent;
        let px = c + (self.r_over_a_edge_x - c) * u.powf(p);
        let py = c + (self.r_over_a_edge_y - c) * v.powf(p);
        (px * py / c).min(self.max_r_over_a())
    }
}

/// One circular air hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub x_nm: f64,
    pub y_nm: f64,
    pub r_nm: f64,
}

/// The concrete hole set produced by a [`LatticeSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleList {
    pub holes: Vec<Hole>,
}

impl HoleList {
    pub fn len(&self) -> usize {
        self.holes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holes.is_empty()
    }

    pub fn min_radius_nm(&self) -> f64 {
        self.holes.iter().map(|h| h.r_nm).fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius_nm(&self) -> f64 {
        self.holes.iter().map(|h| h.r_nm).fold(0.0, f64::max)
    }

    /// Bounding box (width, height) in nm including hole radii.
    pub fn footprint_nm(&self) -> (f64, f64) {
        let mut w: f64 = 0.0;
        let mut h: f64 = 0.0;
        for hole in &self.holes {
            w = w.max(hole.x_nm.abs() + hole.r_nm);
            h = h.max(hole.y_nm.abs() + hole.r_nm);
        }
        (2.0 * w, 2.0 * h)
    }

    /// Largest coordinate mismatch (nm) between the list and its mirror
    /// image about the given axis. Zero for a perfectly symmetric pattern.
    pub fn mirror_asymmetry_nm(&self, about_y_axis: bool) -> f64 {
        let mut worst: f64 = f64::INFINITY;
        let mut max_err: f64 = 0.0;
        for hole in &self.holes {
            let (mx, my) = if about_y_axis {
                (-hole.x_nm, hole.y_nm)
            } else {
                (hole.x_nm, -hole.y_nm)
            };
            // nearest partner of equal radius
            worst = f64::INFINITY;
            for other in &self.holes {
                let d = (other.x_nm - mx).abs().max((other.y_nm - my).abs());
                let d = d.max((other.r_nm - hole.r_nm).abs());
                worst = worst.min(d);
            }
            max_err = max_err.max(worst);
        }
        let _ = worst;
        max_err
    }
}

/// Build the graded hole pattern for `spec`.
///
/// Sites form a plain square lattice at pitch `a`. Along each axis the sites
/// are centered on the cavity: an even site count straddles the center (so
/// the cavity center lies in the dielectric between the two central rows),
/// an odd count puts a site on the center line. The radius at each site
/// follows [`LatticeSpec::r_over_a_at`].
pub fn build_graded_lattice(spec: &LatticeSpec) -> Result<HoleList, GeometryError> {
    spec.validate()?;
    let a = spec.a_nm;
    let x_half = (spec.n_cols - 1) as f64 / 2.0;
    let y_half = (spec.n_rows - 1) as f64 / 2.0;
    let x_max = x_half * a;
    let y_max = y_half * a;
    let (off_x, off_y) = spec.center_offset_nm;

    let mut holes = Vec::with_capacity(spec.n_rows * spec.n_cols);
    for j in 0..spec.n_rows {
        let y = (j as f64 - y_half) * a;
        let v = y.abs() / y_max;
        for i in 0..spec.n_cols {
            let x = (i as f64 - x_half) * a;
            let u = x.abs() / x_max;
            let r = spec.r_over_a_at(u, v) * a;
            if r >= a / 2.0 {
                return Err(GeometryError::HolesMerge {
                    max_r_over_a: r / a,
                });
            }
            holes.push(Hole {
                x_nm: x + off_x,
                y_nm: y + off_y,
                r_nm: r,
            });
        }
    }
    Ok(HoleList { holes })
}

/// Rasterized relative-permittivity map on a uniform grid.
///
/// `eps` has shape `(ny, nx)`; cell `(j, i)` is centered at
/// `origin_nm + (i * dx, j * dx)`. The physical domain spans half a cell
/// beyond the outermost cell centers on every side.
#[derive(Debug, Clone)]
pub struct DielectricGrid {
    pub eps: Array2<f64>,
    pub dx_nm: f64,
    /// Center of cell (0, 0).
    pub origin_nm: (f64, f64),
    /// Background index used for the dielectric (effective slab index).
    pub n_eff: f64,
    /// Hex digest of the generating spec, carried into sidecar files.
    pub provenance: Option<String>,
}

impl DielectricGrid {
    pub fn nx(&self) -> usize {
        self.eps.ncols()
    }

    pub fn ny(&self) -> usize {
        self.eps.nrows()
    }

    /// Physical extent (width, height) in nm.
    pub fn extent_nm(&self) -> (f64, f64) {
        (
            self.nx() as f64 * self.dx_nm,
            self.ny() as f64 * self.dx_nm,
        )
    }

    pub fn x_of(&self, i: usize) -> f64 {
        self.origin_nm.0 + i as f64 * self.dx_nm
    }

    pub fn y_of(&self, j: usize) -> f64 {
        self.origin_nm.1 + j as f64 * self.dx_nm
    }

    /// Fraction of the domain area occupied by air, weighting boundary cells
    /// by their smoothed permittivity.
    pub fn air_fill_fraction(&self) -> f64 {
        let eps_bg = self.n_eff * self.n_eff;
        if (eps_bg - 1.0).abs() < 1e-12 {
            return 0.0;
        }
        let total: f64 = self.eps.iter().map(|&e| (eps_bg - e) / (eps_bg - 1.0)).sum();
        total / self.eps.len() as f64
    }

    /// Worst relative asymmetry of the eps map under reflection about the
    /// grid's vertical (x -> -x) or horizontal mirror.
    pub fn mirror_asymmetry(&self, about_y_axis: bool) -> f64 {
        let (ny, nx) = self.eps.dim();
        let mut worst: f64 = 0.0;
        for j in 0..ny {
            for i in 0..nx {
                let m = if about_y_axis {
                    self.eps[(j, nx - 1 - i)]
                } else {
                    self.eps[(ny - 1 - j, i)]
                };
                let e = self.eps[(j, i)];
                worst = worst.max((e - m).abs() / e.max(m));
            }
        }
        worst
    }

    /// Right half of the grid (cell centers with x >= 0), for runs with a
    /// mirror wall on the x = 0 plane. Requires an even column count.
    pub fn half_x(&self) -> DielectricGrid {
        let nx = self.nx();
        assert!(nx.is_multiple_of(2), "half_x requires an even column count");
        let eps = self.eps.slice(ndarray::s![.., nx / 2..]).to_owned();
        DielectricGrid {
            eps,
            dx_nm: self.dx_nm,
            origin_nm: (self.x_of(nx / 2), self.origin_nm.1),
            n_eff: self.n_eff,
            provenance: self.provenance.clone(),
        }
    }

    /// Upper half (cell centers with y >= 0), for a mirror wall on y = 0.
    pub fn half_y(&self) -> DielectricGrid {
        let ny = self.ny();
        assert!(ny.is_multiple_of(2), "half_y requires an even row count");
        let eps = self.eps.slice(ndarray::s![ny / 2.., ..]).to_owned();
        DielectricGrid {
            eps,
            dx_nm: self.dx_nm,
            origin_nm: (self.origin_nm.0, self.y_of(ny / 2)),
            n_eff: self.n_eff,
            provenance: self.provenance.clone(),
        }
    }
}

/// Boundary-cell treatment when rasterizing circles onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    /// Cell takes the permittivity at its center point.
    Staircase,
    /// Boundary cells take the area-weighted mean of the two permittivities,
    /// estimated by subsampling each cell.
    AreaAverage,
}

/// Raster controls. `pad_nm` is added around the hole footprint on every
/// side; the cell counts are rounded up to even so the grid can be halved
/// at a mirror plane.
#[derive(Debug, Clone)]
pub struct RasterParams {
    pub dx_nm: f64,
    pub smoothing: Smoothing,
    pub pad_nm: f64,
    /// Normalized design frequency a/lambda used for the effective-index
    /// reduction of the slab.
    pub design_freq: f64,
    pub max_cells: usize,
}

impl RasterParams {
    pub fn new(dx_nm: f64) -> Self {
        RasterParams {
            dx_nm,
            smoothing: Smoothing::AreaAverage,
            pad_nm: 0.0,
            design_freq: 0.25,
            max_cells: 1 << 25,
        }
    }

    pub fn with_pad(mut self, pad_nm: f64) -> Self {
        self.pad_nm = pad_nm;
        self
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }
}

const SUBSAMPLES: usize = 16;

/// Rasterize a hole pattern into the 2D permittivity map `eps = n_eff^2`
/// in the dielectric and `eps = 1` inside air holes.
pub fn rasterize(
    holes: &HoleList,
    spec: &LatticeSpec,
    params: &RasterParams,
) -> Result<DielectricGrid, GeometryError> {
    spec.validate()?;
    let dx = params.dx_nm;
    let limit = spec.a_nm / 10.0;
    if dx > limit * (1.0 + 1e-12) {
        return Err(GeometryError::PitchTooCoarse {
            dx_nm: dx,
            limit_nm: limit,
        });
    }
    let (fw, fh) = holes.footprint_nm();
    let width = fw + 2.0 * params.pad_nm;
    let height = fh + 2.0 * params.pad_nm;
    let even = |n: usize| if n.is_multiple_of(2) { n } else { n + 1 };
    let nx = even((width / dx).ceil() as usize).max(2);
    let ny = even((height / dx).ceil() as usize).max(2);
    if nx.saturating_mul(ny) > params.max_cells {
        return Err(GeometryError::GridTooLarge {
            nx,
            ny,
            bytes: nx * ny * std::mem::size_of::<f64>(),
            max_cells: params.max_cells,
        });
    }

    let lambda_nm = spec.a_nm / params.design_freq;
    let n_eff = effective_index(spec.d_nm, spec.n_slab, spec.n_clad, lambda_nm, Polarization::Te)?;
    let eps_bg = n_eff * n_eff;

    // Grid centered on the cavity: cell centers at +-dx/2, +-3dx/2, ...
    let origin = (-(nx as f64) * dx / 2.0 + dx / 2.0, -(ny as f64) * dx / 2.0 + dx / 2.0);

    let mut eps = Array2::from_elem((ny, nx), eps_bg);
    let smoothing = params.smoothing;
    eps.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y = origin.1 + j as f64 * dx;
            for hole in &holes.holes {
                // skip holes that cannot touch this row
                if (y - hole.y_nm).abs() > hole.r_nm + dx {
                    continue;
                }
                let i_lo = (((hole.x_nm - hole.r_nm - dx - origin.0) / dx).floor() as isize).max(0)
                    as usize;
                let i_hi = ((((hole.x_nm + hole.r_nm + dx - origin.0) / dx).ceil() as isize)
                    .min(nx as isize - 1)) as usize;
                for (i, cell) in row.iter_mut().enumerate().take(i_hi + 1).skip(i_lo) {
                    let x = origin.0 + i as f64 * dx;
                    match smoothing {
                        Smoothing::Staircase => {
                            if inside(x, y, hole) {
                                *cell = 1.0;
                            }
                        }
                        Smoothing::AreaAverage => {
                            let frac = coverage(x, y, dx, hole);
                            if frac > 0.0 {
                                let air = 1.0_f64;
                                let blended = frac * air + (1.0 - frac) * eps_bg;
                                // a cell can be touched by at most one hole
                                // (holes never overlap), so combining with the
                                // current value keeps previously carved air
                                *cell = cell.min(blended);
                            }
                        }
                    }
                }
            }
        });

    Ok(DielectricGrid {
        eps,
        dx_nm: dx,
        origin_nm: origin,
        n_eff,
        provenance: None,
    })
}

fn inside(x: f64, y: f64, hole: &Hole) -> bool {
    let dx = x - hole.x_nm;
    let dy = y - hole.y_nm;
    dx * dx + dy * dy < hole.r_nm * hole.r_nm
}

/// Fraction of the cell centered at (x, y) covered by the hole, from an
/// NxN subsample of the cell.
fn coverage(x: f64, y: f64, dx: f64, hole: &Hole) -> f64 {
    // quick accept/reject by cell-corner distance
    let half = dx / 2.0;
    let cx = (x - hole.x_nm).abs() + half;
    let cy = (y - hole.y_nm).abs() + half;
    let r2 = hole.r_nm * hole.r_nm;
    if cx * cx + cy * cy <= r2 {
        return 1.0;
    }
    let nearest_x = ((x - hole.x_nm).abs() - half).max(0.0);
    let nearest_y = ((y - hole.y_nm).abs() - half).max(0.0);
    if nearest_x * nearest_x + nearest_y * nearest_y >= r2 {
        return 0.0;
    }
    let mut hits = 0usize;
    for sj in 0..SUBSAMPLES {
        let sy = y - half + (sj as f64 + 0.5) * dx / SUBSAMPLES as f64;
        for si in 0..SUBSAMPLES {
            let sx = x - half + (si as f64 + 0.5) * dx / SUBSAMPLES as f64;
            if inside(sx, sy, hole) {
                hits += 1;
            }
        }
    }
    hits as f64 / (SUBSAMPLES * SUBSAMPLES) as f64
}

/// Polarization of the slab mode used for the effective-index reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Polarization {
    Te,
    Tm,
}

/// Effective index of the fundamental guided mode of a symmetric slab.
///
/// Solves the transcendental slab dispersion relation by bisection on the
/// fundamental branch to a relative tolerance of 1e-10. The fundamental mode
/// of a symmetric slab always exists, so valid inputs cannot fail.
pub fn effective_index(
    d_nm: f64,
    n_slab: f64,
    n_clad: f64,
    lambda_nm: f64,
    polarization: Polarization,
) -> Result<f64, GeometryError> {
    if !(n_slab > n_clad) || !(n_clad > 0.0) {
        return Err(GeometryError::InvalidSlab(format!(
            "need n_slab > n_clad > 0, got {n_slab}, {n_clad}"
        )));
    }
    if !(d_nm > 0.0) || !(lambda_nm > 0.0) {
        return Err(GeometryError::InvalidSlab(format!(
            "need d, lambda > 0, got d = {d_nm}, lambda = {lambda_nm}"
        )));
    }
    // Fundamental even mode in reduced variables: u = kappa*d/2 solves
    //   u tan u = q * sqrt(R^2 - u^2),   u in (0, min(R, pi/2)),
    // with R = (pi d / lambda) sqrt(n_slab^2 - n_clad^2) and q = 1 for TE,
    // (n_slab/n_clad)^2 for TM. The left side grows from 0, the right side
    // falls to 0 (or the left diverges at pi/2), so the bracket is robust.
    let q = match polarization {
        Polarization::Te => 1.0,
        Polarization::Tm => (n_slab / n_clad).powi(2),
    };
    let r = std::f64::consts::PI * d_nm / lambda_nm
        * (n_slab * n_slab - n_clad * n_clad).sqrt();
    let u_hi = r.min(std::f64::consts::FRAC_PI_2 * (1.0 - 1e-15));
    let g = |u: f64| u * u.tan() - q * (r * r - u * u).max(0.0).sqrt();
    let mut lo = 0.0;
    let mut hi = u_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * u_hi {
            break;
        }
    }
    let u = 0.5 * (lo + hi);
    let k0 = 2.0 * std::f64::consts::PI / lambda_nm;
    let kappa = 2.0 * u / d_nm;
    let n_eff = (n_slab * n_slab - (kappa / k0).powi(2)).sqrt();
    Ok(n_eff.clamp(n_clad, n_slab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_spec() -> LatticeSpec {
        // grade chosen so realized radii span 70..110 nm: center 70/a and
        // corner saturation at 110/a
        LatticeSpec {
            a_nm: 305.0,
            n_rows: 32,
            n_cols: 25,
            r_over_a_center: 70.0 / 305.0,
            r_over_a_edge_x: 110.0 / 305.0,
            r_over_a_edge_y: 110.0 / 305.0,
            grade_exponent: 2.0,
            d_nm: 252.0,
            n_slab: 3.4,
            n_clad: 1.0,
            center_offset_nm: (0.0, 0.0),
        }
    }

    #[test]
    fn graded_lattice_radii_span_and_footprint() {
        let spec = reference_spec();
        let holes = build_graded_lattice(&spec).unwrap();
        assert_eq!(holes.len(), 32 * 25);
        // rows straddle the cavity center, so the innermost sites sit half a
        // pitch away from it and the realized minimum is a hair above 70 nm
        let r_min = holes.min_radius_nm();
        assert!((70.0..70.2).contains(&r_min), "min radius {r_min}");
        assert_relative_eq!(holes.max_radius_nm(), 110.0, max_relative = 1e-9);
        for h in &holes.holes {
            assert!(h.r_nm >= 70.0 - 1e-9 && h.r_nm <= 110.0 + 1e-9);
        }
        // total cavity dimensions on the order of 8 x 11 um
        let (w, h) = holes.footprint_nm();
        assert!((w - 8000.0).abs() / 8000.0 < 0.2, "width {w} nm");
        assert!((h - 11000.0).abs() / 11000.0 < 0.2, "height {h} nm");
    }

    #[test]
    fn zero_grade_gives_uniform_lattice() {
        let mut spec = reference_spec();
        spec.r_over_a_center = 0.3;
        spec.r_over_a_edge_x = 0.3;
        spec.r_over_a_edge_y = 0.3;
        let holes = build_graded_lattice(&spec).unwrap();
        for h in &holes.holes {
            assert_relative_eq!(h.r_nm, 0.3 * spec.a_nm, max_relative = 1e-12);
        }
    }

    /// Independent evaluation of the documented profile formula per site.
    fn oracle_radius(spec: &LatticeSpec, i: usize, j: usize) -> f64 {
        let xh = (spec.n_cols - 1) as f64 / 2.0;
        let yh = (spec.n_rows - 1) as f64 / 2.0;
        let u = ((i as f64 - xh) * spec.a_nm).abs() / (xh * spec.a_nm);
        let v = ((j as f64 - yh) * spec.a_nm).abs() / (yh * spec.a_nm);
        let c = spec.r_over_a_center;
        let px = c + (spec.r_over_a_edge_x - c) * u.powf(spec.grade_exponent);
        let py = c + (spec.r_over_a_edge_y - c) * v.powf(spec.grade_exponent);
        let cap = spec
            .r_over_a_center
            .max(spec.r_over_a_edge_x)
            .max(spec.r_over_a_edge_y);
        (px * py / c).min(cap) * spec.a_nm
    }

    #[test]
    fn nine_by_nine_radii_table_matches_direct_profile_evaluation() {
        let spec = LatticeSpec {
            a_nm: 400.0,
            n_rows: 9,
            n_cols: 9,
            r_over_a_center: 0.23,
            r_over_a_edge_x: 0.36,
            r_over_a_edge_y: 0.36,
            grade_exponent: 2.0,
            d_nm: 252.0,
            n_slab: 3.4,
            n_clad: 1.0,
            center_offset_nm: (0.0, 0.0),
        };
        let holes = build_graded_lattice(&spec).unwrap();
        for j in 0..9 {
            for i in 0..9 {
                let expected = oracle_radius(&spec, i, j);
                let got = holes.holes[j * 9 + i].r_nm;
                assert_relative_eq!(got, expected, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn lattice_is_mirror_symmetric() {
        let holes = build_graded_lattice(&reference_spec()).unwrap();
        assert!(holes.mirror_asymmetry_nm(true) < 1e-9);
        assert!(holes.mirror_asymmetry_nm(false) < 1e-9);
    }

    #[test]
    fn grade_is_monotone_along_both_axes() {
        let spec = reference_spec();
        let holes = build_graded_lattice(&spec).unwrap();
        // positive x axis: row straddles center, use the row just above
        let row: Vec<&Hole> = holes
            .holes
            .iter()
            .filter(|h| (h.y_nm - spec.a_nm / 2.0).abs() < 1e-6 && h.x_nm >= -1e-9)
            .collect();
        assert!(row.len() > 3);
        for pair in row.windows(2) {
            assert!(pair[1].r_nm >= pair[0].r_nm - 1e-12);
        }
        let col: Vec<&Hole> = holes
            .holes
            .iter()
            .filter(|h| h.x_nm.abs() < 1e-6 && h.y_nm >= 0.0)
            .collect();
        assert!(col.len() > 3);
        for pair in col.windows(2) {
            assert!(pair[1].r_nm >= pair[0].r_nm - 1e-12);
        }
    }

    #[test]
    fn merged_holes_rejected() {
        let mut spec = reference_spec();
        spec.r_over_a_edge_x = 0.55;
        assert!(matches!(
            build_graded_lattice(&spec),
            Err(GeometryError::HolesMerge { .. })
        ));
    }

    #[test]
    fn center_offset_shifts_pattern() {
        let mut spec = reference_spec();
        spec.center_offset_nm = (10.0, -5.0);
        let shifted = build_graded_lattice(&spec).unwrap();
        spec.center_offset_nm = (0.0, 0.0);
        let base = build_graded_lattice(&spec).unwrap();
        for (a, b) in base.holes.iter().zip(&shifted.holes) {
            assert_relative_eq!(b.x_nm - a.x_nm, 10.0, max_relative = 1e-12);
            assert_relative_eq!(b.y_nm - a.y_nm, -5.0, max_relative = 1e-12);
        }
    }

    // --- rasterize ---

    fn single_hole_spec() -> (HoleList, LatticeSpec) {
        let spec = LatticeSpec {
            a_nm: 300.0,
            n_rows: 3,
            n_cols: 3,
            r_over_a_center: 0.3,
            r_over_a_edge_x: 0.3,
            r_over_a_edge_y: 0.3,
            grade_exponent: 2.0,
            d_nm: 252.0,
            n_slab: 3.4,
            n_clad: 1.0,
            center_offset_nm: (0.0, 0.0),
        };
        (HoleList { holes: vec![] }, spec)
    }

    #[test]
    fn staircase_single_hole_is_indicator_function() {
        let (mut holes, spec) = single_hole_spec();
        let dx = 10.0;
        // hole centered on a cell center: cell centers sit at +-dx/2 from the
        // origin, so center the hole at (dx/2, dx/2)
        let hole = Hole {
            x_nm: dx / 2.0,
            y_nm: dx / 2.0,
            r_nm: dx * 5.0,
        };
        holes.holes.push(hole);
        let params = RasterParams::new(dx)
            .with_pad(3.0 * dx)
            .with_smoothing(Smoothing::Staircase);
        let grid = rasterize(&holes, &spec, &params).unwrap();
        let eps_bg = grid.n_eff * grid.n_eff;
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let expected = if inside(grid.x_of(i), grid.y_of(j), &hole) {
                    1.0
                } else {
                    eps_bg
                };
                assert_relative_eq!(grid.eps[(j, i)], expected, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn area_average_half_covered_cell() {
        let (mut holes, spec) = single_hole_spec();
        let dx = 10.0;
        let hole = Hole {
            x_nm: dx / 2.0,
            y_nm: dx / 2.0,
            r_nm: dx * 5.0,
        };
        holes.holes.push(hole);
        let params = RasterParams::new(dx).with_pad(3.0 * dx);
        let grid = rasterize(&holes, &spec, &params).unwrap();
        let eps_bg = grid.n_eff * grid.n_eff;
        // a cell fully inside the hole
        let (jc, ic) = (
            ((hole.y_nm - grid.origin_nm.1) / dx).round() as usize,
            ((hole.x_nm - grid.origin_nm.0) / dx).round() as usize,
        );
        assert_relative_eq!(grid.eps[(jc, ic)], 1.0, max_relative = 1e-12);
        // the cell centered on the rim at the hole's east edge is close to
        // half-covered (locally straight boundary through the cell center)
        let i_edge = ((hole.x_nm + hole.r_nm - grid.origin_nm.0) / dx).round() as usize;
        let half = (1.0 + eps_bg) / 2.0;
        let got = grid.eps[(jc, i_edge)];
        assert!(
            (got - half).abs() / (eps_bg - 1.0) < 0.02,
            "eps {got} vs half-coverage value {half}"
        );
    }

    #[test]
    fn raster_fill_fraction_matches_analytic_area() {
        let spec = reference_spec();
        let holes = build_graded_lattice(&spec).unwrap();
        let params = RasterParams::new(spec.a_nm / 20.0);
        let grid = rasterize(&holes, &spec, &params).unwrap();
        let hole_area: f64 = holes
            .holes
            .iter()
            .map(|h| std::f64::consts::PI * h.r_nm * h.r_nm)
            .sum();
        let (w, h) = grid.extent_nm();
        let analytic = hole_area / (w * h);
        let raster = grid.air_fill_fraction();
        assert!(
            (raster - analytic).abs() / analytic < 0.01,
            "raster {raster} vs analytic {analytic}"
        );
    }

    #[test]
    fn area_average_beats_staircase_and_both_converge() {
        let spec = reference_spec();
        let holes = build_graded_lattice(&spec).unwrap();
        let hole_area: f64 = holes
            .holes
            .iter()
            .map(|h| std::f64::consts::PI * h.r_nm * h.r_nm)
            .sum();
        let err_at = |dx: f64, sm: Smoothing| {
            let params = RasterParams::new(dx).with_smoothing(sm);
            let grid = rasterize(&holes, &spec, &params).unwrap();
            let (w, h) = grid.extent_nm();
            let analytic = hole_area / (w * h);
            (grid.air_fill_fraction() - analytic).abs() / analytic
        };
        let dx = spec.a_nm / 12.0;
        let aa = err_at(dx, Smoothing::AreaAverage);
        let sc = err_at(dx, Smoothing::Staircase);
        assert!(aa < sc, "area-average {aa} should beat staircase {sc}");
        let aa_fine = err_at(dx / 2.0, Smoothing::AreaAverage);
        assert!(aa_fine < aa, "finer grid should reduce error");
    }

    #[test]
    fn raster_map_is_mirror_symmetric() {
        let spec = reference_spec();
        let holes = build_graded_lattice(&spec).unwrap();
        let grid = rasterize(&holes, &spec, &RasterParams::new(spec.a_nm / 16.0)).unwrap();
        assert!(grid.mirror_asymmetry(true) < 1e-12);
        assert!(grid.mirror_asymmetry(false) < 1e-12);
    }

    #[test]
    fn oversized_grid_refused_with_size_report() {
        let spec = reference_spec();
        let holes = build_graded_lattice(&spec).unwrap();
        let mut params = RasterParams::new(spec.a_nm / 20.0);
        params.max_cells = 1000;
        match rasterize(&holes, &spec, &params) {
            Err(GeometryError::GridTooLarge { nx, ny, bytes, .. }) => {
                assert!(nx * ny > 1000);
                assert_eq!(bytes, nx * ny * 8);
            }
            other => panic!("expected GridTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn coarse_pitch_rejected() {
        let (mut holes, spec) = single_hole_spec();
        holes.holes.push(Hole {
            x_nm: 0.0,
            y_nm: 0.0,
            r_nm: 90.0,
        });
        let params = RasterParams::new(spec.a_nm / 5.0);
        assert!(matches!(
            rasterize(&holes, &spec, &params),
            Err(GeometryError::PitchTooCoarse { .. })
        ));
    }

    // --- effective_index ---

    /// Frozen oracle value: dense-scan root bracketing of the TE dispersion
    /// relation at 1e6 points over (n_clad, n_slab), refined by bisection.
    const NEFF_TE_252_1300: f64 = 2.953370855305164;

    /// Independent dense-scan oracle over n_eff.
    fn neff_scan_oracle(d: f64, ns: f64, nc: f64, lam: f64) -> f64 {
        let k0 = 2.0 * std::f64::consts::PI / lam;
        let f = |ne: f64| {
            let kappa = k0 * (ns * ns - ne * ne).sqrt();
            let gamma = k0 * (ne * ne - nc * nc).sqrt();
            (kappa * d / 2.0).tan() - gamma / kappa
        };
        let n = 1_000_000;
        let mut best: Option<(f64, f64)> = None;
        for i in 0..n {
            let a = nc + (ns - nc) * (i as f64 + 1e-9) / n as f64;
            let b = nc + (ns - nc) * (i as f64 + 1.0) / n as f64;
            let (fa, fb) = (f(a), f(b));
            // skip tan branch jumps (both values huge)
            if fa.is_finite() && fb.is_finite() && fa * fb < 0.0 && fa.abs() < 50.0 && fb.abs() < 50.0
            {
                best = Some((a, b)); // keep the largest-n_eff root
            }
        }
        let (mut lo, mut hi) = best.expect("oracle found no root");
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn effective_index_matches_dense_scan_oracle() {
        let got = effective_index(252.0, 3.4, 1.0, 1300.0, Polarization::Te).unwrap();
        assert_relative_eq!(got, NEFF_TE_252_1300, max_relative = 1e-9);
        let oracle = neff_scan_oracle(252.0, 3.4, 1.0, 1300.0);
        assert_relative_eq!(got, oracle, max_relative = 1e-7);
    }

    #[test]
    fn effective_index_thick_slab_limit() {
        let lam = 1300.0;
        let got = effective_index(100.0 * lam, 3.4, 1.0, lam, Polarization::Te).unwrap();
        assert!((3.4 - got) / 3.4 < 1e-3, "n_eff {got}");
    }

    #[test]
    fn effective_index_thin_slab_limit() {
        let lam = 1300.0;
        let got = effective_index(lam / 1000.0, 3.4, 1.0, lam, Polarization::Te).unwrap();
        assert!(got - 1.0 < 1e-3, "n_eff {got}");
    }

    #[test]
    fn effective_index_monotone_in_thickness_and_index() {
        let lam = 1300.0;
        let mut prev = 0.0;
        for d in [50.0, 100.0, 200.0, 400.0, 800.0] {
            let v = effective_index(d, 3.4, 1.0, lam, Polarization::Te).unwrap();
            assert!(v > prev, "not monotone in d at {d}: {v} <= {prev}");
            prev = v;
        }
        let mut prev = 0.0;
        for ns in [1.5, 2.0, 2.5, 3.0, 3.5] {
            let v = effective_index(252.0, ns, 1.0, lam, Polarization::Te).unwrap();
            assert!(v > prev, "not monotone in n_slab at {ns}: {v} <= {prev}");
            prev = v;
        }
    }

    #[test]
    fn effective_index_tm_below_te() {
        let te = effective_index(252.0, 3.4, 1.0, 1300.0, Polarization::Te).unwrap();
        let tm = effective_index(252.0, 3.4, 1.0, 1300.0, Polarization::Tm).unwrap();
        assert!(tm < te);
        assert!(tm > 1.0 && tm < 3.4);
    }

    #[test]
    fn half_grids_share_the_mirror_plane() {
        let spec = reference_spec();
        let holes = build_graded_lattice(&spec).unwrap();
        let grid = rasterize(&holes, &spec, &RasterParams::new(spec.a_nm / 12.0)).unwrap();
        let hx = grid.half_x();
        assert_eq!(hx.nx(), grid.nx() / 2);
        assert_relative_eq!(hx.origin_nm.0, grid.dx_nm / 2.0, max_relative = 1e-9);
        for j in 0..hx.ny() {
            for i in 0..hx.nx() {
                assert_eq!(hx.eps[(j, i)], grid.eps[(j, i + grid.nx() / 2)]);
            }
        }
        let hy = grid.half_y();
        assert_eq!(hy.ny(), grid.ny() / 2);
        assert_relative_eq!(hy.origin_nm.1, grid.dx_nm / 2.0, max_relative = 1e-9);
    }
}
