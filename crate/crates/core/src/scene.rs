//! Physical configuration: background medium, antenna ring, anomalies and the
//! imaging grid, plus the scenario file that describes them.
//!
//! Scene objects are validated on construction and immutable afterwards;
//! sharing them across threads is safe.

use crate::error::{Error, Result};
use crate::geom::Point;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
/// Vacuum permeability, H/m. Also the fixed permeability of every medium here.
pub const VACUUM_PERMEABILITY: f64 = 4.0e-7 * PI;

/// Complex background wavenumber from the medium parameters.
///
/// `k` is the principal square root of `omega^2 * mu * (eps_b*eps0 + i*sigma_b/omega)`
/// (the quantity under the root is `k^2`); `eps_b` is the relative
/// permittivity. For physical inputs the result has `Re(k) > 0, Im(k) >= 0`.
pub fn wavenumber(eps_b: f64, sigma_b: f64, mu: f64, freq: f64) -> Result<Complex64> {
    validate_medium(eps_b, sigma_b, mu, freq)?;
    let omega = 2.0 * PI * freq;
    let k_squared = Complex64::new(
        omega * omega * mu * eps_b * VACUUM_PERMITTIVITY,
        omega * mu * sigma_b,
    );
    Ok(k_squared.sqrt())
}

fn validate_medium(eps_b: f64, sigma_b: f64, mu: f64, freq: f64) -> Result<()> {
    if !(eps_b > 0.0) || !eps_b.is_finite() {
        return Err(Error::Config(format!("eps_b must be positive, got {eps_b}")));
    }
    if !(sigma_b >= 0.0) || !sigma_b.is_finite() {
        return Err(Error::Config(format!(
            "sigma_b must be non-negative, got {sigma_b}"
        )));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Config(format!("mu must be positive, got {mu}")));
    }
    if !(freq > 0.0) || !freq.is_finite() {
        return Err(Error::Config(format!("freq must be positive, got {freq}")));
    }
    Ok(())
}

/// Homogeneous lossy background.
#[derive(Debug, Clone, PartialEq)]
pub struct Medium {
    eps_b: f64,
    sigma_b: f64,
    mu: f64,
    freq: f64,
    omega: f64,
    k: Complex64,
}

impl Medium {
    pub fn new(eps_b: f64, sigma_b: f64, mu: f64, freq: f64) -> Result<Self> {
        let k = wavenumber(eps_b, sigma_b, mu, freq)?;
        Ok(Medium {
            eps_b,
            sigma_b,
            mu,
            freq,
            omega: 2.0 * PI * freq,
            k,
        })
    }

    /// Relative background permittivity.
    pub fn eps_b(&self) -> f64 {
        self.eps_b
    }

    /// Background conductivity, S/m.
    pub fn sigma_b(&self) -> f64 {
        self.sigma_b
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    /// Angular frequency `2 pi f`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Complex background wavenumber.
    pub fn k(&self) -> Complex64 {
        self.k
    }

    /// Background wavelength `2 pi / Re(k)`.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k.re
    }

    /// `Im(k^2) / Re(k^2)`, a loss diagnostic.
    pub fn loss_tangent(&self) -> f64 {
        self.sigma_b / (self.omega * self.eps_b * VACUUM_PERMITTIVITY)
    }
}

/// A small circular anomaly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anomaly {
    center: Point,
    rho: f64,
    eps: f64,
    sigma: f64,
}

impl Anomaly {
    pub fn new(center: Point, rho: f64, eps: f64, sigma: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Config(format!(
                "anomaly radius must be positive, got {rho}"
            )));
        }
        if !(eps > 0.0) || !(sigma >= 0.0) {
            return Err(Error::Config(format!(
                "anomaly material must satisfy eps > 0, sigma >= 0 (got eps={eps}, sigma={sigma})"
            )));
        }
        Ok(Anomaly {
            center,
            rho,
            eps,
            sigma,
        })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Disk radius, m.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Complex material contrast of an anomaly against the background:
/// `(eps_m - eps_b)/eps_b + i (sigma_m - sigma_b)/(omega sigma_b)`.
///
/// The formula divides by `sigma_b`; a lossless background cannot carry
/// anomalies under this data model.
pub fn contrast(anomaly: &Anomaly, medium: &Medium) -> Result<Complex64> {
    if medium.sigma_b == 0.0 {
        return Err(Error::Config(
            "contrast is undefined for sigma_b = 0 (division by the background conductivity)"
                .into(),
        ));
    }
    Ok(Complex64::new(
        (anomaly.eps - medium.eps_b) / medium.eps_b,
        (anomaly.sigma - medium.sigma_b) / (medium.omega * medium.sigma_b),
    ))
}

/// Ring of transmit/receive antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray {
    radius: f64,
    angles: Vec<f64>,
    positions: Vec<Point>,
}

impl AntennaArray {
    /// Evenly spaced ring using the layout `theta_n = 3 pi/2 - 2 pi (n-1)/N`
    /// (1-based `n`): antenna 1 sits at the bottom of the circle and the
    /// index runs clockwise.
    pub fn circular(count: usize, radius: f64) -> Result<Self> {
        let angles = (0..count)
            .map(|i| 1.5 * PI - 2.0 * PI * i as f64 / count as f64)
            .collect();
        Self::from_angles(radius, angles)
    }

    /// Ring with explicit angles (radians).
    pub fn from_angles(radius: f64, angles: Vec<f64>) -> Result<Self> {
        if angles.len() < 3 {
            return Err(Error::Config(format!(
                "antenna array needs at least 3 elements, got {}",
                angles.len()
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!(
                "array radius must be positive, got {radius}"
            )));
        }
        let positions = angles
            .iter()
            .map(|&t| Point::new(radius * t.cos(), radius * t.sin()))
            .collect();
        Ok(AntennaArray {
            radius,
            angles,
            positions,
        })
    }

    pub fn count(&self) -> usize {
        self.angles.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Position of antenna `idx` (0-based).
    pub fn position(&self, idx: usize) -> Point {
        self.positions[idx]
    }

    /// Index of the antenna closest to `p` (0-based).
    pub fn nearest_to(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, a) in self.positions.iter().enumerate() {
            let d = a.distance_to(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Cartesian lattice clipped to a disk, enumerated row-major from the top row
/// (largest y) with x ascending inside each row.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagingGrid {
    center: Point,
    radius: f64,
    spacing: f64,
    half_cells: usize,
    points: Vec<Point>,
    cells: Vec<(usize, usize)>,
    index: Vec<Option<usize>>,
}

impl ImagingGrid {
    pub fn build(center: Point, radius: f64, spacing: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Validation(format!(
                "grid radius must be positive, got {radius}"
            )));
        }
        if !(spacing > 0.0) || spacing > radius {
            return Err(Error::Validation(format!(
                "grid spacing must satisfy 0 < spacing <= radius (got spacing={spacing}, radius={radius})"
            )));
        }
        let n = (radius / spacing).floor() as usize;
        let side = 2 * n + 1;
        let mut points = Vec::new();
        let mut cells = Vec::new();
        let mut index = vec![None; side * side];
        let r2 = radius * radius;
        for iy in 0..side {
            let dy = (n as f64 - iy as f64) * spacing;
            for ix in 0..side {
                let dx = (ix as f64 - n as f64) * spacing;
                if dx * dx + dy * dy <= r2 {
                    index[iy * side + ix] = Some(points.len());
                    points.push(Point::new(center.x + dx, center.y + dy));
                    cells.push((ix, iy));
                }
            }
        }
        Ok(ImagingGrid {
            center,
            radius,
            spacing,
            half_cells: n,
            points,
            cells,
            index,
        })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// In-disk sample points, row-major.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Lattice side length (`2n + 1` cells per axis).
    pub fn side(&self) -> usize {
        2 * self.half_cells + 1
    }

    /// Lattice cell of a point index: `(ix, iy)` with `iy = 0` the top row.
    pub fn cell_of(&self, point: usize) -> (usize, usize) {
        self.cells[point]
    }

    /// Point index stored at lattice cell `(ix, iy)`, if inside the disk.
    pub fn point_at_cell(&self, ix: usize, iy: usize) -> Option<usize> {
        self.index[iy * self.side() + ix]
    }

    /// Indices of the up-to-8 lattice neighbours of a point that lie in the disk.
    pub fn neighbors(&self, point: usize) -> Vec<usize> {
        let (ix, iy) = self.cells[point];
        let side = self.side() as i64;
        let mut out = Vec::with_capacity(8);
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let jx = ix as i64 + dx;
                let jy = iy as i64 + dy;
                if jx < 0 || jy < 0 || jx >= side || jy >= side {
                    continue;
                }
                if let Some(p) = self.index[(jy * side + jx) as usize] {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// Fully validated physical configuration.
#[derive(Debug, Clone)]
pub struct Scene {
    medium: Medium,
    array: AntennaArray,
    anomalies: Vec<Anomaly>,
    grid: Arc<ImagingGrid>,
}

impl Scene {
    pub fn new(
        medium: Medium,
        array: AntennaArray,
        anomalies: Vec<Anomaly>,
        grid: ImagingGrid,
    ) -> Result<Self> {
        for (i, an) in anomalies.iter().enumerate() {
            let offset = an.center.distance_to(grid.center());
            if offset + an.rho >= grid.radius() {
                return Err(Error::Config(format!(
                    "anomaly {} (center ({}, {}), rho {}) is not strictly inside the imaging disk",
                    i + 1,
                    an.center.x,
                    an.center.y,
                    an.rho
                )));
            }
            for (j, a) in array.positions().iter().enumerate() {
                if an.center.distance_to(*a) <= an.rho {
                    return Err(Error::Config(format!(
                        "anomaly {} overlaps antenna {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
            let chi = contrast(an, &medium)?;
            if chi.norm() == 0.0 {
                return Err(Error::Config(format!(
                    "anomaly {} has zero contrast against the background and is invisible",
                    i + 1
                )));
            }
        }
        Ok(Scene {
            medium,
            array,
            anomalies,
            grid: Arc::new(grid),
        })
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn array(&self) -> &AntennaArray {
        &self.array
    }

    pub fn anomalies(&self) -> &[Anomaly] {
        &self.anomalies
    }

    pub fn grid(&self) -> &Arc<ImagingGrid> {
        &self.grid
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let medium = Medium::new(
            cfg.medium.eps_b,
            cfg.medium.sigma_b,
            VACUUM_PERMEABILITY,
            cfg.medium.freq,
        )?;
        let array = match &cfg.array.angles {
            Some(angles) => {
                if angles.len() != cfg.array.n {
                    return Err(Error::Config(format!(
                        "array.angles has {} entries but array.n = {}",
                        angles.len(),
                        cfg.array.n
                    )));
                }
                AntennaArray::from_angles(cfg.array.radius, angles.clone())?
            }
            None => AntennaArray::circular(cfg.array.n, cfg.array.radius)?,
        };
        let anomalies = cfg
            .anomalies
            .iter()
            .map(|a| Anomaly::new(Point::new(a.x, a.y), a.rho, a.eps, a.sigma))
            .collect::<Result<Vec<_>>>()?;
        let spacing = cfg.grid.spacing.unwrap_or(cfg.grid.radius / 64.0);
        let grid = ImagingGrid::build(Point::ORIGIN, cfg.grid.radius, spacing)?;
        Scene::new(medium, array, anomalies, grid)
    }

    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            medium: MediumConfig {
                eps_b: self.medium.eps_b,
                sigma_b: self.medium.sigma_b,
                freq: self.medium.freq,
            },
            array: ArrayConfig {
                n: self.array.count(),
                radius: self.array.radius(),
                angles: None,
            },
            anomalies: self
                .anomalies
                .iter()
                .map(|a| AnomalyConfig {
                    x: a.center.x,
                    y: a.center.y,
                    rho: a.rho,
                    eps: a.eps,
                    sigma: a.sigma,
                })
                .collect(),
            grid: GridConfig {
                radius: self.grid.radius(),
                spacing: Some(self.grid.spacing()),
            },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("scenario file: {e}")))?;
        Scene::from_config(&cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_config()).expect("scenario config always serialises")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Scene::from_toml_str(&text)
    }
}

/// Scenario file schema. Unknown keys are rejected.
///
/// ```toml
/// [medium]
/// eps_b = 78.0
/// sigma_b = 0.2
/// freq = 925e6
///
/// [array]
/// n = 16
/// radius = 0.09
/// # angles = [...]      # optional explicit layout, radians, length n
///
/// [[anomalies]]
/// x = 0.0
/// y = -0.045
/// rho = 0.0032
/// eps = 55.0
/// sigma = 1.2
///
/// [grid]
/// radius = 0.085
/// # spacing = 0.0013    # optional, defaults to radius / 64
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub medium: MediumConfig,
    pub array: ArrayConfig,
    #[serde(default)]
    pub anomalies: Vec<AnomalyConfig>,
    pub grid: GridConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub eps_b: f64,
    pub sigma_b: f64,
    pub freq: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub n: usize,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnomalyConfig {
    pub x: f64,
    pub y: f64,
    pub rho: f64,
    pub eps: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}
