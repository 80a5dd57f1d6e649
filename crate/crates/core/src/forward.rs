//! Forward data synthesis: incident fields, Born-approximated scattering
//! parameters, background subtraction and additive measurement noise, plus
//! the on-disk formats for S-parameter and tabulated-field data.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::scene::{contrast, Scene};
use crate::specfun::hankel1_0;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::path::Path;

/// Header of the S-parameter CSV format.
pub const SPARAM_HEADER: &str = "freq_hz,tx,rx,re,im";
/// Header of the tabulated incident-field CSV format.
pub const FIELD_HEADER: &str = "antenna,x_m,y_m,re,im";

/// Scattered-field S-parameter matrix at one frequency.
///
/// Entry `(rx, tx)` is the response at receiver `rx` to transmitter `tx`.
/// The diagonal is never measurable (the transmitting antenna cannot
/// receive); unmeasured entries hold NaN so that any code path that
/// mistakenly consumes them poisons its output visibly.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    freq: f64,
    n: usize,
    values: Vec<Complex64>,
    mask: Vec<bool>,
}

/// Equality over the measured entries only; the NaN filler is meaningless.
impl PartialEq for ScatteringData {
    fn eq(&self, other: &Self) -> bool {
        self.freq == other.freq
            && self.n == other.n
            && self.mask == other.mask
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.mask)
                .all(|((a, b), &m)| !m || a == b)
    }
}

impl ScatteringData {
    /// Builds a matrix from measured `(tx, rx, value)` triples (0-based
    /// indices). Diagonal or duplicate entries are rejected.
    pub fn from_entries(freq: f64, n: usize, entries: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut data = ScatteringData::empty(freq, n);
        for &(tx, rx, v) in entries {
            if tx >= n || rx >= n {
                return Err(Error::Validation(format!(
                    "antenna index out of range: tx={tx}, rx={rx}, n={n}"
                )));
            }
            if tx == rx {
                return Err(Error::Validation(format!(
                    "diagonal entry ({tx}, {rx}) is unmeasurable"
                )));
            }
            let idx = rx * n + tx;
            if data.mask[idx] {
                return Err(Error::Validation(format!(
                    "duplicate entry for tx={tx}, rx={rx}"
                )));
            }
            data.values[idx] = v;
            data.mask[idx] = true;
        }
        Ok(data)
    }

    fn empty(freq: f64, n: usize) -> Self {
        ScatteringData {
            freq,
            n,
            values: vec![Complex64::new(f64::NAN, f64::NAN); n * n],
            mask: vec![false; n * n],
        }
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    /// Number of antennas.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_measured(&self, rx: usize, tx: usize) -> bool {
        self.mask[rx * self.n + tx]
    }

    /// Measured value, or `None` for masked entries.
    pub fn get(&self, rx: usize, tx: usize) -> Option<Complex64> {
        if self.is_measured(rx, tx) {
            Some(self.values[rx * self.n + tx])
        } else {
            None
        }
    }

    /// Measured `(rx, value)` pairs of the column for transmitter `tx`.
    pub fn column(&self, tx: usize) -> Vec<(usize, Complex64)> {
        (0..self.n)
            .filter(|&rx| self.is_measured(rx, tx))
            .map(|rx| (rx, self.values[rx * self.n + tx]))
            .collect()
    }

    pub fn measured_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Copy with every measured entry multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> ScatteringData {
        let mut out = self.clone();
        for (v, &m) in out.values.iter_mut().zip(&self.mask) {
            if m {
                *v *= c;
            }
        }
        out
    }

    /// Serialises the measured entries as CSV (antenna indices are 1-based,
    /// rows ordered by transmitter then receiver).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(SPARAM_HEADER);
        out.push('\n');
        for tx in 0..self.n {
            for rx in 0..self.n {
                if let Some(v) = self.get(rx, tx) {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        self.freq,
                        tx + 1,
                        rx + 1,
                        v.re,
                        v.im
                    ));
                }
            }
        }
        out
    }

    /// Parses the CSV format. Antenna count is inferred from the largest
    /// index unless `expected_n` pins it; absent pairs stay masked.
    pub fn from_csv_str(text: &str, expected_n: Option<usize>) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == SPARAM_HEADER => {}
            Some((_, h)) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header '{SPARAM_HEADER}', got '{h}'"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
        let mut rows: Vec<(usize, usize, Complex64)> = Vec::new();
        let mut freq: Option<f64> = None;
        let mut max_idx = 0usize;
        for (i, raw) in lines {
            let line_no = i + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let f = parse_field::<f64>(fields[0], "freq_hz", line_no)?;
            let tx = parse_field::<usize>(fields[1], "tx", line_no)?;
            let rx = parse_field::<usize>(fields[2], "rx", line_no)?;
            let re = parse_field::<f64>(fields[3], "re", line_no)?;
            let im = parse_field::<f64>(fields[4], "im", line_no)?;
            if tx == 0 || rx == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: "antenna indices are 1-based".into(),
                });
            }
            if tx == rx {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("diagonal entry tx=rx={tx} is unmeasurable"),
                });
            }
            match freq {
                None => freq = Some(f),
                Some(prev) if prev == f => {}
                Some(prev) => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("inconsistent frequency: {f} after {prev}"),
                    })
                }
            }
            max_idx = max_idx.max(tx).max(rx);
            rows.push((tx - 1, rx - 1, Complex64::new(re, im)));
        }
        let freq = freq.ok_or(Error::Parse {
            line: 1,
            message: "file contains no data rows".into(),
        })?;
        let n = match expected_n {
            Some(n) => {
                if max_idx > n {
                    return Err(Error::Validation(format!(
                        "data references antenna {max_idx} but the scenario has {n}"
                    )));
                }
                n
            }
            None => max_idx,
        };
        ScatteringData::from_entries(freq, n, &rows)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_file(path: &Path, expected_n: Option<usize>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text, expected_n)
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, name: &str, line: usize) -> Result<T> {
    s.trim().parse::<T>().map_err(|_| Error::Parse {
        line,
        message: format!("field '{name}': cannot parse '{s}'"),
    })
}

/// Where the incident field comes from: the closed-form cylindrical wave or a
/// grid of samples imported from an external solver.
#[derive(Debug, Clone)]
pub enum IncidentFieldSource {
    Analytic,
    Tabulated(TabulatedField),
}

/// Incident field of antenna `antenna` (0-based) evaluated at `r`.
///
/// The analytic variant is `-(i/4) H_0^(1)(k |r - a_n|)`; the tabulated
/// variant interpolates bilinearly on its own grid and refuses to
/// extrapolate.
pub fn incident_field(
    source: &IncidentFieldSource,
    scene: &Scene,
    antenna: usize,
    r: Point,
) -> Result<Complex64> {
    match source {
        IncidentFieldSource::Analytic => {
            let a = scene.array().position(antenna);
            let d = r.distance_to(a);
            if d == 0.0 {
                return Err(Error::Singularity(format!(
                    "incident field evaluated at antenna {} itself",
                    antenna + 1
                )));
            }
            let h = hankel1_0(scene.medium().k() * d)?;
            Ok(Complex64::new(0.0, -0.25) * h)
        }
        IncidentFieldSource::Tabulated(t) => t.evaluate(antenna, r),
    }
}

/// Born-approximated scattered S-parameters for every transmit/receive pair:
///
/// `S(n, n') = (i k^2 / (4 omega mu)) sum_m rho_m^3 chi(r_m) E(a_n', r_m) E(r_m, a_n)`
///
/// The diagonal stays masked. Reciprocity `S(n, n') = S(n', n)` holds exactly
/// because the summand is symmetric in the two antennas.
pub fn born_synthesize(scene: &Scene, source: &IncidentFieldSource) -> Result<ScatteringData> {
    let n = scene.array().count();
    let medium = scene.medium();
    let prefactor =
        Complex64::i() * medium.k() * medium.k() / (4.0 * medium.omega() * medium.mu());

    // amplitude rho^3 chi and per-antenna field at each anomaly centre
    let mut weights = Vec::with_capacity(scene.anomalies().len());
    let mut fields = Vec::with_capacity(scene.anomalies().len());
    for anomaly in scene.anomalies() {
        let chi = contrast(anomaly, medium)?;
        weights.push(anomaly.rho().powi(3) * chi);
        let at_antennas = (0..n)
            .map(|a| incident_field(source, scene, a, anomaly.center()))
            .collect::<Result<Vec<_>>>()?;
        fields.push(at_antennas);
    }

    // each unordered pair is computed once and written to both entries,
    // which keeps reciprocity bit-exact
    let mut data = ScatteringData::empty(scene.medium().freq(), n);
    for tx in 0..n {
        for rx in tx + 1..n {
            let mut sum = Complex64::new(0.0, 0.0);
            for (w, f) in weights.iter().zip(&fields) {
                sum += w * f[tx] * f[rx];
            }
            let value = prefactor * sum;
            data.values[rx * n + tx] = value;
            data.mask[rx * n + tx] = true;
            data.values[tx * n + rx] = value;
            data.mask[tx * n + rx] = true;
        }
    }
    Ok(data)
}

/// Entry-wise difference `total - background` over commonly measured entries;
/// masks are intersected. Frequency and antenna count must match.
pub fn subtract_background(
    total: &ScatteringData,
    background: &ScatteringData,
) -> Result<ScatteringData> {
    if total.n != background.n {
        return Err(Error::Validation(format!(
            "antenna count mismatch: {} vs {}",
            total.n, background.n
        )));
    }
    if total.freq != background.freq {
        return Err(Error::Validation(format!(
            "frequency mismatch: {} vs {}",
            total.freq, background.freq
        )));
    }
    let mut out = ScatteringData::empty(total.freq, total.n);
    for i in 0..total.values.len() {
        if total.mask[i] && background.mask[i] {
            out.values[i] = total.values[i] - background.values[i];
            out.mask[i] = true;
        }
    }
    Ok(out)
}

/// Adds circularly-symmetric complex Gaussian noise to the measured entries,
/// scaled so the ensemble SNR matches `snr_db`. `snr_db = +inf` means no
/// noise. Deterministic for a fixed seed.
pub fn add_noise(data: &ScatteringData, snr_db: f64, seed: u64) -> ScatteringData {
    if snr_db.is_infinite() && snr_db > 0.0 {
        return data.clone();
    }
    let measured: Vec<usize> = (0..data.values.len()).filter(|&i| data.mask[i]).collect();
    if measured.is_empty() {
        return data.clone();
    }
    let signal_power: f64 =
        measured.iter().map(|&i| data.values[i].norm_sqr()).sum::<f64>() / measured.len() as f64;
    let noise_power = signal_power / 10f64.powf(snr_db / 10.0);
    let sigma = (noise_power / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = data.clone();
    for &i in &measured {
        let g_re: f64 = StandardNormal.sample(&mut rng);
        let g_im: f64 = StandardNormal.sample(&mut rng);
        out.values[i] += Complex64::new(sigma * g_re, sigma * g_im);
    }
    out
}

/// Complex field samples on per-antenna rectangular grids.
#[derive(Debug, Clone)]
pub struct TabulatedField {
    grids: Vec<FieldGrid>,
}

#[derive(Debug, Clone)]
struct FieldGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// `vals[iy * xs.len() + ix]` with both axes ascending.
    vals: Vec<Complex64>,
}

impl TabulatedField {
    /// Builds per-antenna grids from `(antenna, x, y, value)` samples
    /// (antenna 1-based, as in the file format). Every antenna's samples
    /// must fill a complete rectangular lattice.
    pub fn from_samples(samples: &[(usize, f64, f64, Complex64)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Validation("tabulated field has no samples".into()));
        }
        let n = samples.iter().map(|s| s.0).max().unwrap();
        if samples.iter().any(|s| s.0 == 0) {
            return Err(Error::Validation("antenna indices are 1-based".into()));
        }
        let mut grids = Vec::with_capacity(n);
        for antenna in 1..=n {
            let rows: Vec<&(usize, f64, f64, Complex64)> =
                samples.iter().filter(|s| s.0 == antenna).collect();
            if rows.is_empty() {
                return Err(Error::Validation(format!(
                    "tabulated field misses antenna {antenna}"
                )));
            }
            let mut xs: Vec<f64> = rows.iter().map(|s| s.1).collect();
            let mut ys: Vec<f64> = rows.iter().map(|s| s.2).collect();
            if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Validation(
                    "tabulated field coordinates must be finite".into(),
                ));
            }
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup();
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ys.dedup();
            if rows.len() != xs.len() * ys.len() {
                return Err(Error::Validation(format!(
                    "antenna {antenna}: {} samples do not fill the {}x{} lattice",
                    rows.len(),
                    xs.len(),
                    ys.len()
                )));
            }
            let mut vals = vec![None; xs.len() * ys.len()];
            for s in rows {
                let ix = xs.binary_search_by(|p| p.partial_cmp(&s.1).unwrap()).unwrap();
                let iy = ys.binary_search_by(|p| p.partial_cmp(&s.2).unwrap()).unwrap();
                let slot = &mut vals[iy * xs.len() + ix];
                if slot.is_some() {
                    return Err(Error::Validation(format!(
                        "antenna {antenna}: duplicate sample at ({}, {})",
                        s.1, s.2
                    )));
                }
                *slot = Some(s.3);
            }
            let vals = vals.into_iter().map(Option::unwrap).collect();
            grids.push(FieldGrid { xs, ys, vals });
        }
        Ok(TabulatedField { grids })
    }

    pub fn antenna_count(&self) -> usize {
        self.grids.len()
    }

    /// Bilinear interpolation within the antenna's own grid; points outside
    /// the grid hull are a coverage error.
    pub fn evaluate(&self, antenna: usize, r: Point) -> Result<Complex64> {
        let grid = self.grids.get(antenna).ok_or_else(|| {
            Error::Validation(format!(
                "tabulated field has {} antennas, index {} requested",
                self.grids.len(),
                antenna + 1
            ))
        })?;
        let (ix, tx) = locate(&grid.xs, r.x).ok_or_else(|| {
            Error::Coverage(format!(
                "x = {} outside tabulated coverage [{}, {}]",
                r.x,
                grid.xs[0],
                grid.xs[grid.xs.len() - 1]
            ))
        })?;
        let (iy, ty) = locate(&grid.ys, r.y).ok_or_else(|| {
            Error::Coverage(format!(
                "y = {} outside tabulated coverage [{}, {}]",
                r.y,
                grid.ys[0],
                grid.ys[grid.ys.len() - 1]
            ))
        })?;
        let nx = grid.xs.len();
        let v00 = grid.vals[iy * nx + ix];
        let v10 = grid.vals[iy * nx + ix + 1];
        let v01 = grid.vals[(iy + 1) * nx + ix];
        let v11 = grid.vals[(iy + 1) * nx + ix + 1];
        let top = v00 * (1.0 - tx) + v10 * tx;
        let bottom = v01 * (1.0 - tx) + v11 * tx;
        Ok(top * (1.0 - ty) + bottom * ty)
    }

    /// Serialises all per-antenna grids, row-major from the top row.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(FIELD_HEADER);
        out.push('\n');
        for (a, grid) in self.grids.iter().enumerate() {
            let nx = grid.xs.len();
            for iy in (0..grid.ys.len()).rev() {
                for ix in 0..nx {
                    let v = grid.vals[iy * nx + ix];
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        a + 1,
                        grid.xs[ix],
                        grid.ys[iy],
                        v.re,
                        v.im
                    ));
                }
            }
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == FIELD_HEADER => {}
            Some((_, h)) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header '{FIELD_HEADER}', got '{h}'"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
        let mut samples = Vec::new();
        for (i, raw) in lines {
            let line_no = i + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let antenna = parse_field::<usize>(fields[0], "antenna", line_no)?;
            let x = parse_field::<f64>(fields[1], "x_m", line_no)?;
            let y = parse_field::<f64>(fields[2], "y_m", line_no)?;
            let re = parse_field::<f64>(fields[3], "re", line_no)?;
            let im = parse_field::<f64>(fields[4], "im", line_no)?;
            samples.push((antenna, x, y, Complex64::new(re, im)));
        }
        TabulatedField::from_samples(&samples)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }
}

/// Cell index and interpolation weight for `v` on an ascending axis, or
/// `None` outside the covered interval.
fn locate(axis: &[f64], v: f64) -> Option<(usize, f64)> {
    let last = axis.len() - 1;
    if axis.len() < 2 || v < axis[0] || v > axis[last] {
        return None;
    }
    if v == axis[last] {
        return Some((last - 1, 1.0));
    }
    let hi = axis.partition_point(|&a| a <= v);
    let i = hi - 1;
    Some(((i).min(last - 1), (v - axis[i]) / (axis[i + 1] - axis[i])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Anomaly, AntennaArray, ImagingGrid, Medium, VACUUM_PERMEABILITY};

    fn test_scene(anomalies: Vec<Anomaly>) -> Scene {
        let medium = Medium::new(78.0, 0.2, VACUUM_PERMEABILITY, 925e6).unwrap();
        let array = AntennaArray::circular(16, 0.09).unwrap();
        let grid = ImagingGrid::build(Point::ORIGIN, 0.085, 0.085 / 16.0).unwrap();
        Scene::new(medium, array, anomalies, grid).unwrap()
    }

    fn fixture_anomaly(x: f64, y: f64) -> Anomaly {
        Anomaly::new(Point::new(x, y), 0.0032, 55.0, 1.2).unwrap()
    }

    #[test]
    fn analytic_incident_field_matches_hankel() {
        // lossless medium, point at distance 1/k from an antenna
        let medium = Medium::new(78.0, 0.0, VACUUM_PERMEABILITY, 925e6).unwrap();
        let array = AntennaArray::circular(16, 0.09).unwrap();
        let grid = ImagingGrid::build(Point::ORIGIN, 0.085, 0.01).unwrap();
        let scene = Scene::new(medium, array, vec![], grid).unwrap();
        let k = scene.medium().k().re;
        let a = scene.array().position(0);
        let r = Point::new(a.x, a.y + 1.0 / k); // |r - a| = 1/k, so k d = 1
        let e = incident_field(&IncidentFieldSource::Analytic, &scene, 0, r).unwrap();
        let h1 = hankel1_0(Complex64::new(1.0, 0.0)).unwrap();
        let expect = Complex64::new(0.0, -0.25) * h1;
        assert!((e - expect).norm() < 1e-12 * expect.norm());

        // radial symmetry: equidistant points give bit-identical values
        let r2 = Point::new(a.x, a.y - 1.0 / k);
        let e2 = incident_field(&IncidentFieldSource::Analytic, &scene, 0, r2).unwrap();
        assert_eq!(e, e2);

        // singular at the antenna itself
        assert!(matches!(
            incident_field(&IncidentFieldSource::Analytic, &scene, 0, a),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn born_empty_scene_is_exactly_zero() {
        let scene = test_scene(vec![]);
        let data = born_synthesize(&scene, &IncidentFieldSource::Analytic).unwrap();
        assert_eq!(data.measured_count(), 16 * 15);
        for tx in 0..16 {
            for rx in 0..16 {
                if rx != tx {
                    assert_eq!(data.get(rx, tx).unwrap(), Complex64::new(0.0, 0.0));
                } else {
                    assert!(data.get(rx, tx).is_none());
                }
            }
        }
    }

    #[test]
    fn born_single_pair_matches_hand_composition() {
        let anomaly = fixture_anomaly(0.01, -0.03);
        let scene = test_scene(vec![anomaly]);
        let src = IncidentFieldSource::Analytic;
        let data = born_synthesize(&scene, &src).unwrap();

        let m = scene.medium();
        let chi = contrast(&anomaly, m).unwrap();
        let e_tx = incident_field(&src, &scene, 2, anomaly.center()).unwrap();
        let e_rx = incident_field(&src, &scene, 7, anomaly.center()).unwrap();
        let expect = Complex64::i() * m.k() * m.k() / (4.0 * m.omega() * m.mu())
            * anomaly.rho().powi(3)
            * chi
            * e_tx
            * e_rx;
        let got = data.get(7, 2).unwrap();
        assert!((got - expect).norm() <= 1e-14 * expect.norm());
    }

    #[test]
    fn born_reciprocity_is_exact() {
        let scene = test_scene(vec![fixture_anomaly(0.01, -0.03), fixture_anomaly(-0.02, 0.04)]);
        let data = born_synthesize(&scene, &IncidentFieldSource::Analytic).unwrap();
        for tx in 0..16 {
            for rx in 0..tx {
                assert_eq!(data.get(rx, tx), data.get(tx, rx));
            }
        }
    }

    #[test]
    fn born_is_linear_in_anomalies() {
        let a1 = fixture_anomaly(0.01, -0.03);
        let a2 = fixture_anomaly(-0.02, 0.04);
        let src = IncidentFieldSource::Analytic;
        let both = born_synthesize(&test_scene(vec![a1, a2]), &src).unwrap();
        let only1 = born_synthesize(&test_scene(vec![a1]), &src).unwrap();
        let only2 = born_synthesize(&test_scene(vec![a2]), &src).unwrap();
        for tx in 0..16 {
            for rx in 0..16 {
                if rx == tx {
                    continue;
                }
                let sum = only1.get(rx, tx).unwrap() + only2.get(rx, tx).unwrap();
                let got = both.get(rx, tx).unwrap();
                assert!((got - sum).norm() <= 1e-14 * sum.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn born_scales_with_contrast() {
        // doubling both material differences doubles chi and hence the data
        let base = Anomaly::new(Point::new(0.01, -0.03), 0.0032, 55.0, 1.2).unwrap();
        let doubled = Anomaly::new(Point::new(0.01, -0.03), 0.0032, 32.0, 2.2).unwrap();
        let src = IncidentFieldSource::Analytic;
        let d1 = born_synthesize(&test_scene(vec![base]), &src).unwrap();
        let d2 = born_synthesize(&test_scene(vec![doubled]), &src).unwrap();
        for tx in 0..16 {
            for rx in 0..16 {
                if rx == tx {
                    continue;
                }
                let a = d1.get(rx, tx).unwrap() * 2.0;
                let b = d2.get(rx, tx).unwrap();
                assert!((a - b).norm() <= 1e-12 * a.norm());
            }
        }
    }

    #[test]
    fn subtract_identities() {
        let scene = test_scene(vec![fixture_anomaly(0.01, -0.03)]);
        let total = born_synthesize(&scene, &IncidentFieldSource::Analytic).unwrap();

        let zero = subtract_background(&total, &total).unwrap();
        assert!(zero
            .column(0)
            .iter()
            .all(|(_, v)| *v == Complex64::new(0.0, 0.0)));

        let empty = born_synthesize(&test_scene(vec![]), &IncidentFieldSource::Analytic).unwrap();
        let recovered = subtract_background(&total, &empty).unwrap();
        assert_eq!(recovered, total);

        let other = ScatteringData::from_entries(925e6, 4, &[(0, 1, Complex64::new(1.0, 0.0))])
            .unwrap();
        assert!(matches!(
            subtract_background(&total, &other),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn noise_determinism_and_identity() {
        let scene = test_scene(vec![fixture_anomaly(0.01, -0.03)]);
        let data = born_synthesize(&scene, &IncidentFieldSource::Analytic).unwrap();
        let a = add_noise(&data, 20.0, 42);
        let b = add_noise(&data, 20.0, 42);
        assert_eq!(a, b);
        let c = add_noise(&data, 20.0, 43);
        assert_ne!(a, c);
        let clean = add_noise(&data, f64::INFINITY, 42);
        assert_eq!(clean, data);
    }

    #[test]
    fn noise_hits_requested_snr() {
        // 101 antennas -> 10100 measured unit-magnitude entries
        let n = 101;
        let mut entries = Vec::new();
        for tx in 0..n {
            for rx in 0..n {
                if tx != rx {
                    entries.push((tx, rx, Complex64::new(1.0, 0.0)));
                }
            }
        }
        let data = ScatteringData::from_entries(1e9, n, &entries).unwrap();
        let snr_db = 20.0;
        let noisy = add_noise(&data, snr_db, 7);
        let noise_power: f64 = entries
            .iter()
            .map(|&(tx, rx, v)| (noisy.get(rx, tx).unwrap() - v).norm_sqr())
            .sum::<f64>()
            / entries.len() as f64;
        let measured_db = 10.0 * (1.0 / noise_power).log10();
        assert!(
            (measured_db - snr_db).abs() < 0.5,
            "measured {measured_db} dB, requested {snr_db} dB"
        );
    }

    #[test]
    fn sparam_csv_roundtrip() {
        let scene = test_scene(vec![fixture_anomaly(0.01, -0.03)]);
        let data = born_synthesize(&scene, &IncidentFieldSource::Analytic).unwrap();
        let text = data.to_csv_string();
        assert!(text.starts_with("freq_hz,tx,rx,re,im\n"));
        let parsed = ScatteringData::from_csv_str(&text, Some(16)).unwrap();
        assert_eq!(parsed, data);
        // serialisation is deterministic
        assert_eq!(parsed.to_csv_string(), text);
    }

    #[test]
    fn sparam_csv_diagnostics() {
        let bad_header = "freq,tx,rx,re,im\n";
        assert!(matches!(
            ScatteringData::from_csv_str(bad_header, None),
            Err(Error::Parse { line: 1, .. })
        ));
        let diag = "freq_hz,tx,rx,re,im\n1e9,2,2,0.0,0.0\n";
        assert!(matches!(
            ScatteringData::from_csv_str(diag, None),
            Err(Error::Parse { line: 2, .. })
        ));
        let dup = "freq_hz,tx,rx,re,im\n1e9,1,2,0.0,0.0\n1e9,1,2,0.0,0.0\n";
        assert!(ScatteringData::from_csv_str(dup, None).is_err());
        let junk = "freq_hz,tx,rx,re,im\n1e9,1,2,zero,0.0\n";
        match ScatteringData::from_csv_str(junk, None) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("re"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let oversize = "freq_hz,tx,rx,re,im\n1e9,1,5,0.0,0.0\n";
        assert!(ScatteringData::from_csv_str(oversize, Some(5)).is_ok());
        assert!(ScatteringData::from_csv_str(oversize, Some(4)).is_err());
    }

    /// Tabulates the analytic field of one antenna on a square patch around
    /// `centre` and returns max relative interpolation error at probe points.
    fn tabulation_error(scene: &Scene, spacing: f64) -> f64 {
        let centre = Point::new(0.0, 0.01);
        let half = 0.02;
        let mut samples = Vec::new();
        let cells = (2.0 * half / spacing).ceil() as usize;
        for iy in 0..=cells {
            for ix in 0..=cells {
                let p = Point::new(centre.x - half + ix as f64 * spacing,
                                   centre.y - half + iy as f64 * spacing);
                for a in 0..scene.array().count() {
                    let v = incident_field(&IncidentFieldSource::Analytic, scene, a, p).unwrap();
                    samples.push((a + 1, p.x, p.y, v));
                }
            }
        }
        let field = TabulatedField::from_samples(&samples).unwrap();
        let tab = IncidentFieldSource::Tabulated(field);
        let mut worst = 0.0f64;
        // probe strictly inside the patch, off the tabulation lattice
        for iy in 0..30 {
            for ix in 0..30 {
                let p = Point::new(
                    centre.x - half + (0.031 + 0.938 * ix as f64 / 29.0) * 2.0 * half,
                    centre.y - half + (0.047 + 0.921 * iy as f64 / 29.0) * 2.0 * half,
                );
                let exact = incident_field(&IncidentFieldSource::Analytic, scene, 3, p).unwrap();
                let approx = incident_field(&tab, scene, 3, p).unwrap();
                worst = worst.max((approx - exact).norm() / exact.norm());
            }
        }
        worst
    }

    #[test]
    fn tabulated_field_tracks_analytic() {
        let scene = test_scene(vec![]);
        let lambda = scene.medium().wavelength();
        // Bilinear interpolation of an oscillatory field has worst-case
        // relative error ~(k h)^2 / 8: ~3.1e-3 at lambda/40, ~7.7e-4 at
        // lambda/80. Assert the measured bounds at both spacings.
        let coarse = tabulation_error(&scene, lambda / 40.0);
        assert!(coarse < 4e-3, "lambda/40 interpolation error {coarse}");
        let fine = tabulation_error(&scene, lambda / 80.0);
        assert!(fine < 1e-3, "lambda/80 interpolation error {fine}");
        assert!(fine < coarse);
    }

    #[test]
    fn tabulated_field_refuses_extrapolation() {
        let samples = vec![
            (1, 0.0, 0.0, Complex64::new(1.0, 0.0)),
            (1, 1.0, 0.0, Complex64::new(2.0, 0.0)),
            (1, 0.0, 1.0, Complex64::new(3.0, 0.0)),
            (1, 1.0, 1.0, Complex64::new(4.0, 0.0)),
        ];
        let field = TabulatedField::from_samples(&samples).unwrap();
        // interior bilinear value
        let v = field.evaluate(0, Point::new(0.5, 0.5)).unwrap();
        assert!((v - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        // boundary corners are covered
        assert!(field.evaluate(0, Point::new(1.0, 1.0)).is_ok());
        assert!(matches!(
            field.evaluate(0, Point::new(1.0001, 0.5)),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn tabulated_field_requires_complete_lattice() {
        let samples = vec![
            (1, 0.0, 0.0, Complex64::new(1.0, 0.0)),
            (1, 1.0, 0.0, Complex64::new(2.0, 0.0)),
            (1, 0.0, 1.0, Complex64::new(3.0, 0.0)),
        ];
        assert!(TabulatedField::from_samples(&samples).is_err());
    }

    #[test]
    fn tabulated_csv_roundtrip() {
        let samples = vec![
            (1, 0.0, 0.0, Complex64::new(1.0, -1.5)),
            (1, 0.25, 0.0, Complex64::new(2.0, 0.125)),
            (1, 0.0, 0.5, Complex64::new(3.0, 0.0)),
            (1, 0.25, 0.5, Complex64::new(4.0, -0.0625)),
            (2, 0.0, 0.0, Complex64::new(0.5, 0.5)),
            (2, 1.0, 0.0, Complex64::new(0.25, 0.0)),
            (2, 0.0, 2.0, Complex64::new(0.125, 0.0)),
            (2, 1.0, 2.0, Complex64::new(1.0, 1.0)),
        ];
        let field = TabulatedField::from_samples(&samples).unwrap();
        let text = field.to_csv_string();
        let again = TabulatedField::from_csv_str(&text).unwrap();
        assert_eq!(again.antenna_count(), 2);
        for &(a, x, y, v) in &samples {
            let got = again.evaluate(a - 1, Point::new(x, y)).unwrap();
            assert_eq!(got, v);
        }
        assert_eq!(again.to_csv_string(), text);
    }
}
