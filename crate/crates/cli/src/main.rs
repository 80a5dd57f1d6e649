//! `dsm` — synthesise, image, verify and post-process scattered S-parameter
//! data for small anomalies in a lossy disk.
//!
//! Exit codes: 0 success, 2 input error, 3 degenerate data, 1 internal error.

mod manifest;

use clap::{Parser, Subcommand};
use dsm_core::forward::{add_noise, born_synthesize, subtract_background, IncidentFieldSource, ScatteringData};
use dsm_core::imaging::{dsm_indicator, extract_peaks, mdsm_indicator, IndicatorMap};
use dsm_core::oracle::{verify_self, verify_theorem, TheoremParams};
use dsm_core::scene::Scene;
use dsm_core::specfun::SeriesBudget;
use dsm_core::Error;
use manifest::RunManifest;
use std::path::{Path, PathBuf};
use std::time::Instant;

const EXIT_INPUT: i32 = 2;
const EXIT_DEGENERATE: i32 = 3;
const EXIT_INTERNAL: i32 = 1;

#[derive(Parser)]
#[command(name = "dsm", version, about = "Direct-sampling microwave imaging toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesise scattered S-parameters for a scenario file
    Simulate {
        /// Scenario TOML file
        #[arg(long)]
        scenario: PathBuf,
        /// Output S-parameter CSV
        #[arg(long)]
        out: PathBuf,
        /// Signal-to-noise ratio in dB; omit for noise-free data
        #[arg(long)]
        snr_db: Option<f64>,
        /// Seed for the noise generator
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute indicator maps and peak estimates from measured data
    Image {
        #[arg(long)]
        scenario: PathBuf,
        /// S-parameter CSV (scattered field, background already subtracted)
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated 1-based transmitter indices, or "all"
        #[arg(long, default_value = "all")]
        transmitters: String,
        /// Prefix for the map/peak output files
        #[arg(long)]
        out_prefix: String,
        /// Peak threshold as a fraction of the map maximum
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Peak suppression radius in metres (default: half the background wavelength)
        #[arg(long)]
        suppression_radius: Option<f64>,
        /// Tabulated incident-field CSV to use instead of the analytic field
        #[arg(long)]
        incident_field: Option<PathBuf>,
    },
    /// Compare the indicator map of synthetic data against its series structure
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Transmitter index, 1-based
        #[arg(long, default_value_t = 1)]
        n_prime: usize,
        /// Series truncation cap (default: sized for the scenario grid)
        #[arg(long)]
        s_max: Option<usize>,
        /// Series tail tolerance
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Report output path
        #[arg(long)]
        out: PathBuf,
        /// Compare the indicator map against itself (plumbing check)
        #[arg(long)]
        self_check: bool,
    },
    /// Entry-wise difference of two S-parameter files (total - background)
    Subtract {
        #[arg(long)]
        total: PathBuf,
        #[arg(long)]
        background: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the tool version
    Version,
}

/// A failed run: exit code plus the diagnostic printed to stderr.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(err: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: err.to_string(),
        }
    }

    fn output(err: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            message: err.to_string(),
        }
    }

    /// Classifies core errors raised while computing on validated inputs.
    fn compute(err: Error) -> Self {
        let code = match &err {
            Error::DegenerateData(_) => EXIT_DEGENERATE,
            Error::Io(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            scenario,
            out,
            snr_db,
            seed,
        } => cmd_simulate(&scenario, &out, snr_db, seed),
        Command::Image {
            scenario,
            data,
            transmitters,
            out_prefix,
            threshold,
            suppression_radius,
            incident_field,
        } => cmd_image(
            &scenario,
            &data,
            &transmitters,
            &out_prefix,
            threshold,
            suppression_radius,
            incident_field.as_deref(),
        ),
        Command::Verify {
            scenario,
            n_prime,
            s_max,
            tol,
            out,
            self_check,
        } => cmd_verify(&scenario, n_prime, s_max, tol, &out, self_check),
        Command::Subtract {
            total,
            background,
            out,
        } => cmd_subtract(&total, &background, &out),
        Command::Version => {
            println!("dsm {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn load_scene(path: &Path) -> Result<Scene, Failure> {
    Scene::load(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_manifest(manifest: &mut RunManifest, start: Instant, path: &Path) -> Result<(), Failure> {
    manifest.duration_ms = start.elapsed().as_millis();
    manifest.write(path).map_err(Failure::output)
}

fn cmd_simulate(
    scenario: &Path,
    out: &Path,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<(), Failure> {
    let start = Instant::now();
    let scene = load_scene(scenario)?;
    let clean = born_synthesize(&scene, &IncidentFieldSource::Analytic).map_err(Failure::compute)?;
    let data = add_noise(&clean, snr_db.unwrap_or(f64::INFINITY), seed);
    data.write_file(out).map_err(Failure::output)?;

    let mut manifest = RunManifest::new("simulate");
    manifest.add_input(scenario).map_err(Failure::input)?;
    manifest.add_output(out);
    write_manifest(&mut manifest, start, &manifest_path(out))
}

fn parse_transmitters(spec: &str, n: usize) -> Result<Vec<usize>, Failure> {
    if spec.trim() == "all" {
        return Ok((0..n).collect());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let idx: usize = part
            .trim()
            .parse()
            .map_err(|_| Failure::input(format!("bad transmitter index '{part}'")))?;
        if idx == 0 || idx > n {
            return Err(Failure::input(format!(
                "transmitter {idx} out of range 1..={n}"
            )));
        }
        out.push(idx - 1);
    }
    if out.is_empty() {
        return Err(Failure::input("empty transmitter list"));
    }
    Ok(out)
}

fn write_map_products(
    map: &IndicatorMap,
    stem: &str,
    threshold: f64,
    radius: f64,
    manifest: &mut RunManifest,
) -> Result<(), Failure> {
    let csv = PathBuf::from(format!("{stem}.csv"));
    let pgm = PathBuf::from(format!("{stem}.pgm"));
    let peaks_csv = PathBuf::from(format!("{stem}_peaks.csv"));
    map.write_csv(&csv).map_err(Failure::output)?;
    map.write_pgm(&pgm).map_err(Failure::output)?;
    let peaks = extract_peaks(map, threshold, radius).map_err(Failure::compute)?;
    if peaks.constant_map {
        eprintln!("warning: {stem}: constant map, no peaks extracted");
    }
    peaks.write_csv(&peaks_csv).map_err(Failure::output)?;
    manifest.add_output(&csv);
    manifest.add_output(&pgm);
    manifest.add_output(&peaks_csv);
    Ok(())
}

fn cmd_image(
    scenario: &Path,
    data_path: &Path,
    transmitters: &str,
    out_prefix: &str,
    threshold: f64,
    suppression_radius: Option<f64>,
    incident_field: Option<&Path>,
) -> Result<(), Failure> {
    let start = Instant::now();
    let scene = load_scene(scenario)?;
    let n = scene.array().count();
    let data = ScatteringData::read_file(data_path, Some(n))
        .map_err(|e| Failure::input(format!("{}: {e}", data_path.display())))?;
    let chosen = parse_transmitters(transmitters, n)?;
    let radius = suppression_radius.unwrap_or(scene.medium().wavelength() / 2.0);
    let source = match incident_field {
        None => IncidentFieldSource::Analytic,
        Some(path) => {
            let field = dsm_core::forward::TabulatedField::read_file(path)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            IncidentFieldSource::Tabulated(field)
        }
    };

    let mut manifest = RunManifest::new("image");
    manifest.add_input(scenario).map_err(Failure::input)?;
    manifest.add_input(data_path).map_err(Failure::input)?;
    if let Some(path) = incident_field {
        manifest.add_input(path).map_err(Failure::input)?;
    }

    let mut maps = Vec::new();
    for &t in &chosen {
        let map = dsm_indicator(&data, &source, &scene, t).map_err(Failure::compute)?;
        write_map_products(
            &map,
            &format!("{out_prefix}_t{:02}", t + 1),
            threshold,
            radius,
            &mut manifest,
        )?;
        maps.push(map);
    }
    if chosen.len() >= 2 {
        let combined =
            mdsm_indicator(&data, &source, &scene, &chosen).map_err(Failure::compute)?;
        write_map_products(
            &combined,
            &format!("{out_prefix}_mdsm"),
            threshold,
            radius,
            &mut manifest,
        )?;
    }
    write_manifest(
        &mut manifest,
        start,
        &PathBuf::from(format!("{out_prefix}.manifest")),
    )
}

fn cmd_verify(
    scenario: &Path,
    n_prime: usize,
    s_max: Option<usize>,
    tol: f64,
    out: &Path,
    self_check: bool,
) -> Result<(), Failure> {
    let start = Instant::now();
    let scene = load_scene(scenario)?;
    if n_prime == 0 || n_prime > scene.array().count() {
        return Err(Failure::input(format!(
            "transmitter {n_prime} out of range 1..={}",
            scene.array().count()
        )));
    }
    let default = TheoremParams::default_budget(&scene);
    let budget = SeriesBudget::new(s_max.unwrap_or(default.s_max()), tol)
        .map_err(Failure::compute)?;
    let data = born_synthesize(&scene, &IncidentFieldSource::Analytic).map_err(Failure::compute)?;
    let report = if self_check {
        verify_self(&data, &scene, n_prime - 1, budget)
    } else {
        verify_theorem(&data, &scene, n_prime - 1, budget)
    }
    .map_err(Failure::compute)?;
    std::fs::write(out, report.to_text()).map_err(Failure::output)?;

    let mut manifest = RunManifest::new("verify");
    manifest.add_input(scenario).map_err(Failure::input)?;
    manifest.add_output(out);
    write_manifest(&mut manifest, start, &manifest_path(out))
}

fn cmd_subtract(total: &Path, background: &Path, out: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let total_data = ScatteringData::read_file(total, None)
        .map_err(|e| Failure::input(format!("{}: {e}", total.display())))?;
    let background_data = ScatteringData::read_file(background, None)
        .map_err(|e| Failure::input(format!("{}: {e}", background.display())))?;
    let diff = subtract_background(&total_data, &background_data).map_err(Failure::compute)?;
    diff.write_file(out).map_err(Failure::output)?;

    let mut manifest = RunManifest::new("subtract");
    manifest.add_input(total).map_err(Failure::input)?;
    manifest.add_input(background).map_err(Failure::input)?;
    manifest.add_output(out);
    write_manifest(&mut manifest, start, &manifest_path(out))
}

fn manifest_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest", out.display()))
}
