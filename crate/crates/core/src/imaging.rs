//! Direct sampling imaging: the normalised inner-product indicator per
//! transmitter, its multi-transmitter combination, and the peak readout that
//! turns maps into location estimates.

use crate::error::{Error, Result};
use crate::forward::{incident_field, IncidentFieldSource, ScatteringData};
use crate::geom::Point;
use crate::scene::{ImagingGrid, Scene};
use num_complex::Complex64;
use rayon::prelude::*;
use std::path::Path;
use std::sync::Arc;

/// Which transmitter produced an indicator map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transmitter {
    /// Single transmitting antenna (0-based index).
    Single(usize),
    /// Pointwise maximum over several transmitters.
    Combined,
}

/// Normalised indicator values on the imaging grid, all in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct IndicatorMap {
    grid: Arc<ImagingGrid>,
    values: Vec<f64>,
    transmitter: Transmitter,
    freq: f64,
}

impl IndicatorMap {
    pub(crate) fn from_parts(
        grid: Arc<ImagingGrid>,
        values: Vec<f64>,
        transmitter: Transmitter,
        freq: f64,
    ) -> Self {
        IndicatorMap {
            grid,
            values,
            transmitter,
            freq,
        }
    }

    pub fn grid(&self) -> &Arc<ImagingGrid> {
        &self.grid
    }

    /// One value per grid point, row-major like the grid's point list.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transmitter(&self) -> Transmitter {
        self.transmitter
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the largest value (first in row-major order on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Value at the grid point closest to `p`.
    pub fn value_near(&self, p: Point) -> f64 {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.grid.points().iter().enumerate() {
            let d = q.distance_to(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        self.values[best]
    }

    /// CSV rows `x_m,y_m,value`, row-major.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("x_m,y_m,value\n");
        for (p, v) in self.grid.points().iter().zip(&self.values) {
            out.push_str(&format!("{},{},{}\n", p.x, p.y, v));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    /// 8-bit binary PGM over the full bounding lattice; value 1 maps to 255
    /// and pixels outside the imaging disk are black.
    pub fn to_pgm_bytes(&self) -> Vec<u8> {
        let side = self.grid.side();
        let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
        for iy in 0..side {
            for ix in 0..side {
                let pixel = match self.grid.point_at_cell(ix, iy) {
                    Some(idx) => (self.values[idx] * 255.0).round().clamp(0.0, 255.0) as u8,
                    None => 0,
                };
                out.push(pixel);
            }
        }
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pgm_bytes())?;
        Ok(())
    }
}

/// Direct sampling indicator for transmitter `n_prime` (0-based):
/// at each grid point `r`,
///
/// `|sum_n S(n, n') conj(E(r, a_n))| / (||S(., n')|| ||E(r, .)||)`
///
/// with all sums over the measured receivers `n != n'`. Values land in
/// `[0, 1]` by the Cauchy-Schwarz inequality.
pub fn dsm_indicator(
    data: &ScatteringData,
    source: &IncidentFieldSource,
    scene: &Scene,
    n_prime: usize,
) -> Result<IndicatorMap> {
    let n = scene.array().count();
    if data.n() != n {
        return Err(Error::Validation(format!(
            "data has {} antennas, scene has {}",
            data.n(),
            n
        )));
    }
    if data.freq() != scene.medium().freq() {
        return Err(Error::Validation(format!(
            "data frequency {} does not match scenario frequency {}",
            data.freq(),
            scene.medium().freq()
        )));
    }
    if n_prime >= n {
        return Err(Error::Validation(format!(
            "transmitter {} out of range 1..={}",
            n_prime + 1,
            n
        )));
    }
    let column = data.column(n_prime);
    if column.is_empty() {
        return Err(Error::Validation(format!(
            "no measured entries for transmitter {}",
            n_prime + 1
        )));
    }
    let data_norm = column
        .iter()
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if data_norm == 0.0 {
        return Err(Error::DegenerateData(format!(
            "scattering data for transmitter {} has zero norm",
            n_prime + 1
        )));
    }

    let values = scene
        .grid()
        .points()
        .par_iter()
        .map(|&r| -> Result<f64> {
            let mut inner = Complex64::new(0.0, 0.0);
            let mut field_norm_sq = 0.0;
            for &(rx, s) in &column {
                let e = incident_field(source, scene, rx, r)?;
                inner += s * e.conj();
                field_norm_sq += e.norm_sqr();
            }
            if field_norm_sq == 0.0 {
                // unreachable for the analytic source: H_0^(1) has no zeros
                // in the closed upper half-plane
                return Err(Error::DegenerateData(format!(
                    "incident field norm vanished at grid point ({}, {})",
                    r.x, r.y
                )));
            }
            Ok(inner.norm() / (data_norm * field_norm_sq.sqrt()))
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(IndicatorMap {
        grid: Arc::clone(scene.grid()),
        values,
        transmitter: Transmitter::Single(n_prime),
        freq: data.freq(),
    })
}

/// Multi-transmitter indicator: the pointwise maximum of the per-transmitter
/// maps for every listed transmitter (0-based indices).
pub fn mdsm_indicator(
    data: &ScatteringData,
    source: &IncidentFieldSource,
    scene: &Scene,
    transmitters: &[usize],
) -> Result<IndicatorMap> {
    if transmitters.is_empty() {
        return Err(Error::Validation("empty transmitter set".into()));
    }
    let mut combined: Option<Vec<f64>> = None;
    for &t in transmitters {
        let map = dsm_indicator(data, source, scene, t)?;
        combined = Some(match combined {
            None => map.values,
            Some(mut acc) => {
                for (a, v) in acc.iter_mut().zip(&map.values) {
                    *a = a.max(*v);
                }
                acc
            }
        });
    }
    Ok(IndicatorMap {
        grid: Arc::clone(scene.grid()),
        values: combined.unwrap(),
        transmitter: Transmitter::Combined,
        freq: data.freq(),
    })
}

/// One extracted peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub location: Point,
    pub value: f64,
    /// 1-based, ordered by descending value (row-major on ties).
    pub rank: usize,
}

/// Result of peak extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    /// Set when the map was constant and no peak is meaningful.
    pub constant_map: bool,
}

impl PeakSet {
    /// CSV rows `rank,x_m,y_m,value`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("rank,x_m,y_m,value\n");
        for p in &self.peaks {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.rank, p.location.x, p.location.y, p.value
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

/// Local maxima of the map over the 8-neighbour lattice graph, greedily
/// thinned by non-maximum suppression: candidates are visited in descending
/// value (row-major on ties) and kept while they clear
/// `threshold * global_max` and stay at least `radius` away from every peak
/// kept so far.
pub fn extract_peaks(map: &IndicatorMap, threshold: f64, radius: f64) -> Result<PeakSet> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Validation(format!(
            "peak threshold must be in (0, 1], got {threshold}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::Validation(format!(
            "suppression radius must be positive, got {radius}"
        )));
    }
    let values = map.values();
    if values.is_empty() {
        return Err(Error::Validation("empty map".into()));
    }
    let global_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let global_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if global_max == global_min {
        return Ok(PeakSet {
            peaks: Vec::new(),
            constant_map: true,
        });
    }

    let grid = map.grid();
    let mut candidates: Vec<usize> = (0..values.len())
        .filter(|&i| grid.neighbors(i).iter().all(|&j| values[i] >= values[j]))
        .collect();
    candidates.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let cutoff = threshold * global_max;
    let mut peaks: Vec<Peak> = Vec::new();
    for i in candidates {
        if values[i] < cutoff {
            break; // sorted descending, nothing below can qualify
        }
        let loc = grid.points()[i];
        if peaks.iter().all(|p| p.location.distance_to(loc) >= radius) {
            peaks.push(Peak {
                location: loc,
                value: values[i],
                rank: peaks.len() + 1,
            });
        }
    }
    Ok(PeakSet {
        peaks,
        constant_map: false,
    })
}

/// Distance from each true anomaly centre to its assigned peak, using the
/// one-to-one assignment of the top-M peaks that minimises the total
/// distance. Anomalies left without a peak report `None`.
pub fn localization_error(peaks: &PeakSet, scene: &Scene) -> Result<Vec<Option<f64>>> {
    let centers: Vec<Point> = scene.anomalies().iter().map(|a| a.center()).collect();
    if centers.is_empty() {
        return Err(Error::Validation(
            "scene has no anomalies to localise".into(),
        ));
    }
    let m = centers.len();
    let top: Vec<Point> = peaks.peaks.iter().take(m).map(|p| p.location).collect();

    // exhaustive assignment; peak and anomaly counts are tiny
    let mut best: Option<(f64, Vec<Option<usize>>)> = None;
    let mut assignment: Vec<Option<usize>> = vec![None; m];
    fn recurse(
        peak: usize,
        top: &[Point],
        centers: &[Point],
        used: &mut Vec<bool>,
        assignment: &mut Vec<Option<usize>>,
        cost: f64,
        best: &mut Option<(f64, Vec<Option<usize>>)>,
    ) {
        if peak == top.len() {
            if best.as_ref().map_or(true, |(c, _)| cost < *c) {
                *best = Some((cost, assignment.clone()));
            }
            return;
        }
        for anomaly in 0..centers.len() {
            if used[anomaly] {
                continue;
            }
            used[anomaly] = true;
            assignment[anomaly] = Some(peak);
            recurse(
                peak + 1,
                top,
                centers,
                used,
                assignment,
                cost + top[peak].distance_to(centers[anomaly]),
                best,
            );
            assignment[anomaly] = None;
            used[anomaly] = false;
        }
    }
    let mut used = vec![false; m];
    recurse(0, &top, &centers, &mut used, &mut assignment, 0.0, &mut best);

    let (_, assignment) = best.expect("at least the empty assignment exists");
    Ok(assignment
        .iter()
        .enumerate()
        .map(|(anomaly, peak)| peak.map(|p| top[p].distance_to(centers[anomaly])))
        .collect())
}
