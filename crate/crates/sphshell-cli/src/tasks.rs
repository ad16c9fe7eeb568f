//! Scenario execution: runs the configured task, writes deterministic CSV
//! outputs plus a machine-readable `manifest.json` into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use sphshell::fields::{bistatic_rcs, gain_pattern, PlaneWaveSpec};
use sphshell::gsm::{
    compose, compose_ports_only, load_gsm, null_antenna, save_gsm, transparent_antenna,
    AntennaGsm, GsmSet,
};
use sphshell::media::{SegmentProfile, ShellGeometry};
use sphshell::oracles::{neumann_compose, staircase_convergence};
use sphshell::specfun::mode::{modes, truncation_degree, Polarization};
use sphshell::sso::{assemble_with_lmax, SsoSet};
use sphshell::wavenumber_vacuum;

use crate::config::{AntennaSpec, ScenarioConfig, TaskSpec};

/// Execution failure, carrying its process exit code.
#[derive(Debug)]
pub enum RunError {
    /// Bad configuration or inputs (exit 2).
    Config(String),
    /// Numerical failure during computation (exit 3).
    Numeric(String),
    /// A validation task reported failures (exit 4).
    Validation(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) => 3,
            RunError::Validation(_) => 4,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Numeric(m) => write!(f, "numeric failure: {m}"),
            RunError::Validation(m) => write!(f, "validation failure: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<crate::config::ConfigError> for RunError {
    fn from(e: crate::config::ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl From<sphshell::Error> for RunError {
    fn from(e: sphshell::Error) -> Self {
        RunError::Numeric(e.to_string())
    }
}

type Result<T> = std::result::Result<T, RunError>;

fn io_err<T>(context: &str, e: std::io::Error) -> Result<T> {
    Err(RunError::Config(format!("{context}: {e}")))
}

/// Options common to every subcommand.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config_path: PathBuf,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub lmax_override: Option<u32>,
    /// Tolerance used by the `validate` task's checks.
    pub tol: f64,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    task: &'static str,
    config_path: String,
    config_sha256: String,
    lmax: u32,
    num_frequencies: usize,
    /// How many times an antenna GSM file was parsed during this run.
    antenna_parse_count: usize,
    total_ms: f64,
    /// Wall time of each computed point (frequency or sweep point).
    per_point_ms: Vec<f64>,
    outputs: Vec<String>,
}

/// The antenna model, resolved once per run.
struct AntennaSource {
    /// One GSM per configured frequency, in order.
    per_frequency: Vec<AntennaGsm>,
    parse_count: usize,
}

fn task_name(task: &TaskSpec) -> &'static str {
    match task {
        TaskSpec::Sso => "sso",
        TaskSpec::Compose => "compose",
        TaskSpec::Sparams => "sparams",
        TaskSpec::Pattern { .. } => "pattern",
        TaskSpec::Rcs { .. } => "rcs",
        TaskSpec::Validate => "validate",
        TaskSpec::Sweep { .. } => "sweep",
    }
}

/// Pick one truncation degree for the whole run: the file's, the override,
/// or the largest default truncation over the frequency grid.
fn resolve_lmax(
    config: &ScenarioConfig,
    file_set: Option<&GsmSet>,
    override_lmax: Option<u32>,
) -> Result<u32> {
    if let Some(set) = file_set {
        if let Some(k) = override_lmax {
            if k != set.lmax {
                return Err(RunError::Config(format!(
                    "--lmax-override {k} conflicts with the antenna file's Lmax = {}",
                    set.lmax
                )));
            }
        }
        return Ok(set.lmax);
    }
    if let Some(k) = override_lmax {
        return Ok(k);
    }
    let mut lmax = 0;
    for &f in &config.frequencies_hz {
        let kf = config.exterior.wavenumber(wavenumber_vacuum(f)).norm();
        lmax = lmax.max(truncation_degree(kf, config.ra)?);
    }
    Ok(lmax)
}

fn resolve_antenna(
    config: &ScenarioConfig,
    geometry: &ShellGeometry,
    override_lmax: Option<u32>,
) -> Result<(AntennaSource, u32)> {
    match &config.antenna {
        AntennaSpec::File(path) => {
            let set = load_gsm(path).map_err(|e| {
                RunError::Config(format!("antenna file {}: {e}", path.display()))
            })?;
            set.check_bubble(geometry)
                .map_err(|e| RunError::Config(e.to_string()))?;
            let lmax = resolve_lmax(config, Some(&set), override_lmax)?;
            let per_frequency = config
                .frequencies_hz
                .iter()
                .map(|&f| {
                    set.at_frequency(f).cloned().ok_or_else(|| {
                        RunError::Config(format!(
                            "antenna file {} has no block at {f} Hz",
                            path.display()
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((AntennaSource { per_frequency, parse_count: 1 }, lmax))
        }
        AntennaSpec::Transparent { ports } => {
            let lmax = resolve_lmax(config, None, override_lmax)?;
            let per_frequency = config
                .frequencies_hz
                .iter()
                .map(|&f| transparent_antenna(f, lmax, *ports))
                .collect();
            Ok((AntennaSource { per_frequency, parse_count: 0 }, lmax))
        }
        AntennaSpec::Null => {
            let lmax = resolve_lmax(config, None, override_lmax)?;
            let per_frequency =
                config.frequencies_hz.iter().map(|&f| null_antenna(f, lmax)).collect();
            Ok((AntennaSource { per_frequency, parse_count: 0 }, lmax))
        }
    }
}

/// Shortest round-trip decimal form; deterministic for a given value.
fn fmt(x: f64) -> String {
    format!("{x}")
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    let write = |w: &mut csv::Writer<std::fs::File>, rec: &[String]| {
        w.write_record(rec)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    };
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write(&mut w, &header)?;
    for row in rows {
        write(&mut w, row)?;
    }
    w.flush().or_else(|e| io_err(&path.display().to_string(), e))
}

/// Compute a per-frequency quantity in parallel, preserving order and
/// recording per-point wall time.
fn per_frequency<T: Send>(
    frequencies: &[f64],
    f: impl Fn(usize, f64) -> Result<T> + Sync,
) -> Result<(Vec<T>, Vec<f64>)> {
    let results: Vec<(T, f64)> = frequencies
        .par_iter()
        .enumerate()
        .map(|(i, &freq)| {
            let start = Instant::now();
            let value = f(i, freq)?;
            Ok((value, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}

fn mag_phase(z: Complex64) -> (f64, f64) {
    (20.0 * z.norm().log10(), z.im.atan2(z.re).to_degrees())
}

/// Directions of the xOz-plane cut: phi = 0 descending into phi = 180.
/// Returns (theta_deg, phi_deg, theta_rad, phi_rad) per point.
fn xoz_cut(step_deg: f64) -> Vec<(f64, f64, f64, f64)> {
    let n = (360.0 / step_deg).round() as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 * step_deg;
            let (theta, phi): (f64, f64) =
                if t <= 180.0 { (t, 0.0) } else { (360.0 - t, 180.0) };
            (theta, phi, theta.to_radians(), phi.to_radians())
        })
        .collect()
}

fn effective_gsms(
    config: &ScenarioConfig,
    geometry: &ShellGeometry,
    antenna: &AntennaSource,
    lmax: u32,
) -> Result<(Vec<sphshell::gsm::EffectiveGsm>, Vec<f64>)> {
    per_frequency(&config.frequencies_hz, |i, f| {
        let sso = assemble_with_lmax(geometry, f, lmax)?;
        Ok(compose(&antenna.per_frequency[i], &sso)?)
    })
}

/// Run the configured task; returns the list of files written.
pub fn run(config: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    if let Some(n) = opts.threads {
        // A pre-existing global pool (e.g. a second run in one process) is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    std::fs::create_dir_all(&opts.out)
        .or_else(|e| io_err(&opts.out.display().to_string(), e))?;
    let start = Instant::now();
    let geometry = config.geometry(None)?;
    let (antenna, lmax) = resolve_antenna(config, &geometry, opts.lmax_override)?;

    let (outputs, per_point_ms) = match &config.task {
        TaskSpec::Sso => run_sso(config, &geometry, lmax, &opts.out)?,
        TaskSpec::Compose => run_compose(config, &geometry, &antenna, lmax, &opts.out)?,
        TaskSpec::Sparams => run_sparams(config, &geometry, &antenna, lmax, &opts.out)?,
        TaskSpec::Pattern { v, step_deg } => {
            run_pattern(config, &geometry, &antenna, lmax, v, *step_deg, &opts.out)?
        }
        TaskSpec::Rcs { theta_inc_deg, phi_inc_deg, pol_phi, step_deg } => run_rcs(
            config,
            &geometry,
            &antenna,
            lmax,
            *theta_inc_deg,
            *phi_inc_deg,
            *pol_phi,
            *step_deg,
            &opts.out,
        )?,
        TaskSpec::Validate => run_validate(config, &geometry, lmax, opts.tol, &opts.out)?,
        TaskSpec::Sweep { layer, param, from, to, points } => run_sweep(
            config,
            &antenna,
            lmax,
            (*layer, *param),
            (*from, *to, *points),
            &opts.out,
        )?,
    };

    let config_bytes = std::fs::read(&opts.config_path)
        .or_else(|e| io_err(&opts.config_path.display().to_string(), e))?;
    let manifest = Manifest {
        tool: "sphshell",
        version: env!("CARGO_PKG_VERSION"),
        task: task_name(&config.task),
        config_path: opts.config_path.display().to_string(),
        config_sha256: format!("{:x}", Sha256::digest(&config_bytes)),
        lmax,
        num_frequencies: config.frequencies_hz.len(),
        antenna_parse_count: antenna.parse_count,
        total_ms: start.elapsed().as_secs_f64() * 1e3,
        per_point_ms,
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
    };
    let manifest_path = opts.out.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| RunError::Numeric(format!("manifest: {e}")))?;
    std::fs::write(&manifest_path, json + "\n")
        .or_else(|e| io_err(&manifest_path.display().to_string(), e))?;

    let mut all = outputs;
    all.push(manifest_path);
    Ok(all)
}

type TaskOutput = (Vec<PathBuf>, Vec<f64>);

fn run_sso(
    config: &ScenarioConfig,
    geometry: &ShellGeometry,
    lmax: u32,
    out: &Path,
) -> Result<TaskOutput> {
    let (sets, ms): (Vec<SsoSet>, Vec<f64>) =
        per_frequency(&config.frequencies_hz, |_, f| {
            Ok(assemble_with_lmax(geometry, f, lmax)?)
        })?;
    let mut rows = Vec::new();
    for set in &sets {
        // The diagonals are constant across (sigma, m); report one row per
        // (tau, l) by picking each pair's first linear index.
        for pol in [Polarization::Te, Polarization::Tm] {
            for l in 1..=set.lmax {
                let i = modes(set.lmax)
                    .position(|n| n.pol == pol && n.l == l)
                    .expect("every (tau, l) occurs");
                let mut row = vec![
                    fmt(set.frequency_hz),
                    pol.tau().to_string(),
                    l.to_string(),
                ];
                for diag in [&set.t, &set.phi, &set.rho, &set.psi] {
                    row.push(fmt(diag[i].re));
                    row.push(fmt(diag[i].im));
                }
                rows.push(row);
            }
        }
    }
    let path = out.join("sso.csv");
    write_csv(
        &path,
        &[
            "freq_hz", "tau", "l", "t_re", "t_im", "phi_re", "phi_im", "rho_re", "rho_im",
            "psi_re", "psi_im",
        ],
        &rows,
    )?;
    Ok((vec![path], ms))
}

fn run_compose(
    config: &ScenarioConfig,
    geometry: &ShellGeometry,
    antenna: &AntennaSource,
    lmax: u32,
    out: &Path,
) -> Result<TaskOutput> {
    let (effs, ms) = effective_gsms(config, geometry, antenna, lmax)?;
    let entries = effs
        .into_iter()
        .map(|e| AntennaGsm::new(e.frequency_hz, e.lmax, e.gamma, e.r, e.t, e.s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let set = GsmSet {
        lmax,
        num_ports: antenna.per_frequency[0].num_ports(),
        bubble_eps: config.bubble.eps,
        bubble_mu: config.bubble.mu,
        entries,
    };
    let path = out.join("effective_gsm.json");
    save_gsm(&set, &path)?;
    Ok((vec![path], ms))
}

fn run_sparams(
    config: &ScenarioConfig,
    geometry: &ShellGeometry,
    antenna: &AntennaSource,
    lmax: u32,
    out: &Path,
) -> Result<TaskOutput> {
    let (gammas, ms) = per_frequency(&config.frequencies_hz, |i, f| {
        let sso = assemble_with_lmax(geometry, f, lmax)?;
        Ok(compose_ports_only(&antenna.per_frequency[i], &sso)?)
    })?;
    let mut rows = Vec::new();
    for (gamma, &f) in gammas.iter().zip(&config.frequencies_hz) {
        for i in 0..gamma.nrows() {
            for j in 0..gamma.ncols() {
                let (db, deg) = mag_phase(gamma[[i, j]]);
                rows.push(vec![
                    fmt(f),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    fmt(db),
                    fmt(deg),
                ]);
            }
        }
    }
    let path = out.join("sparams.csv");
    write_csv(&path, &["freq_hz", "port_i", "port_j", "mag_db", "phase_deg"], &rows)?;
    Ok((vec![path], ms))
}

fn field_rows(
    f: f64,
    cut: &[(f64, f64, f64, f64)],
    quantity: &str,
    values: &[f64],
) -> Vec<Vec<String>> {
    cut.iter()
        .zip(values)
        .map(|(&(theta_deg, phi_deg, _, _), &v)| {
            vec![
                fmt(f),
                fmt(theta_deg),
                fmt(phi_deg),
                quantity.to_string(),
                fmt(v),
                fmt(0.0),
            ]
        })
        .collect()
}

const FIELD_HEADER: [&str; 6] =
    ["freq_hz", "theta_deg", "phi_deg", "quantity", "value_re", "value_im"];

fn run_pattern(
    config: &ScenarioConfig,
    geometry: &ShellGeometry,
    antenna: &AntennaSource,
    lmax: u32,
    v: &[Complex64],
    step_deg: f64,
    out: &Path,
) -> Result<TaskOutput> {
    let ports = antenna.per_frequency[0].num_ports();
    if v.len() != ports {
        return Err(RunError::Config(format!(
            "pattern drive `v` has {} entries but the antenna has {ports} ports",
            v.len()
        )));
    }
    let cut = xoz_cut(step_deg);
    let directions: Vec<(f64, f64)> = cut.iter().map(|&(_, _, t, p)| (t, p)).collect();
    let (effs, ms) = effective_gsms(config, geometry, antenna, lmax)?;
    let mut rows = Vec::new();
    for eff in &effs {
        let gains = gain_pattern(eff, v, &directions)?;
        rows.extend(field_rows(eff.frequency_hz, &cut, "gain", &gains));
    }
    let path = out.join("pattern.csv");
    write_csv(&path, &FIELD_HEADER, &rows)?;
    Ok((vec![path], ms))
}

#[allow(clippy::too_many_arguments)]
fn run_rcs(
    config: &ScenarioConfig,
    geometry: &ShellGeometry,
    antenna: &AntennaSource,
    lmax: u32,
    theta_inc_deg: f64,
    phi_inc_deg: f64,
    pol_phi: bool,
    step_deg: f64,
    out: &Path,
) -> Result<TaskOutput> {
    let polarization = if pol_phi {
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    } else {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    };
    let spec = PlaneWaveSpec::new(
        theta_inc_deg.to_radians(),
        phi_inc_deg.to_radians(),
        polarization,
        1.0,
    )?;
    let cut = xoz_cut(step_deg);
    let directions: Vec<(f64, f64)> = cut.iter().map(|&(_, _, t, p)| (t, p)).collect();
    let (effs, ms) = effective_gsms(config, geometry, antenna, lmax)?;
    let mut rows = Vec::new();
    for eff in &effs {
        let sigma = bistatic_rcs(eff, &spec, &config.exterior, eff.frequency_hz, &directions)?;
        rows.extend(field_rows(eff.frequency_hz, &cut, "rcs_m2", &sigma));
    }
    let path = out.join("rcs.csv");
    write_csv(&path, &FIELD_HEADER, &rows)?;
    Ok((vec![path], ms))
}

struct Check {
    name: &'static str,
    max_error: f64,
    threshold: f64,
    note: &'static str,
}

impl Check {
    fn passed(&self) -> bool {
        self.max_error <= self.threshold
    }
}

fn geometry_is_lossless(g: &ShellGeometry) -> bool {
    let region_ok = |r: &sphshell::media::HomogeneousRegion| r.eps.im == 0.0 && r.mu.im == 0.0;
    region_ok(&g.bubble)
        && region_ok(&g.exterior)
        && g.segments.iter().all(|s| match &s.profile {
            SegmentProfile::Constant(m) => m.is_lossless(),
            SegmentProfile::Radial(p) => (0..=8).all(|i| {
                let r = s.r_inner + (s.r_outer - s.r_inner) * i as f64 / 8.0;
                p.sample(r).is_lossless()
            }),
        })
}

fn run_validate(
    config: &ScenarioConfig,
    geometry: &ShellGeometry,
    lmax: u32,
    tol: f64,
    out: &Path,
) -> Result<TaskOutput> {
    let start = Instant::now();
    let f0 = config.frequencies_hz[0];
    let mut checks = Vec::new();

    // 1. Vacuum shell of the same radii must reduce to the identity map.
    let vacuum = ShellGeometry::new(
        geometry.rb,
        geometry.ra,
        sphshell::media::HomogeneousRegion::vacuum(),
        sphshell::media::HomogeneousRegion::vacuum(),
        vec![sphshell::media::LayerSegment::constant(
            geometry.rb,
            geometry.ra,
            sphshell::media::MediumSample::vacuum(),
        )],
    )?;
    let vset = assemble_with_lmax(&vacuum, f0, lmax.min(8))?;
    let mut dev = 0.0f64;
    for i in 0..vset.mode_count() {
        dev = dev.max(vset.t[i].norm());
        dev = dev.max(vset.rho[i].norm());
        dev = dev.max((vset.phi[i] - 1.0).norm());
        dev = dev.max((vset.psi[i] - 1.0).norm());
    }
    checks.push(Check {
        name: "vacuum_identity",
        max_error: dev,
        threshold: 1e-10,
        note: "vacuum shell reduces to the identity operators",
    });

    // 2. Per-mode energy: |1 + 2t| = 1 when lossless, <= 1 otherwise.
    let lossless = geometry_is_lossless(geometry);
    let mut energy_dev = 0.0f64;
    for &f in &config.frequencies_hz {
        let set = assemble_with_lmax(geometry, f, lmax)?;
        for &t in &set.t {
            let s_mag = (1.0 + 2.0 * t).norm();
            let dev = if lossless { (s_mag - 1.0).abs() } else { (s_mag - 1.0).max(0.0) };
            energy_dev = energy_dev.max(dev);
        }
    }
    checks.push(Check {
        name: if lossless { "transition_unitarity" } else { "transition_passivity" },
        max_error: energy_dev,
        threshold: tol,
        note: "per-mode |1 + 2t| against the lossless/passive bound",
    });

    // 3. Neumann multiple-bounce series agrees with the direct solve.
    let sso = assemble_with_lmax(geometry, f0, lmax)?;
    let probe = transparent_antenna(f0, lmax, 1);
    match neumann_compose(&probe, &sso, 400) {
        Ok(series) => {
            let direct = compose(&probe, &sso)?;
            let pairs = [
                (&series.gamma, &direct.gamma),
                (&series.r, &direct.r),
                (&series.t, &direct.t),
                (&series.s, &direct.s),
            ];
            let diff = pairs
                .iter()
                .flat_map(|(a, b)| a.iter().zip(b.iter()))
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            checks.push(Check {
                name: "neumann_vs_direct",
                max_error: diff,
                threshold: tol.max(1e-10),
                note: "multiple-bounce series vs direct linear solve",
            });
        }
        Err(_) => checks.push(Check {
            name: "neumann_vs_direct",
            max_error: 0.0,
            threshold: 1.0,
            note: "skipped: bounce series does not converge for this shell",
        }),
    }

    // 4. Staircase discretization is consistent with direct integration.
    let graded = geometry.segments.iter().any(|s| !s.is_constant());
    let ns: &[usize] = if graded { &[8, 16] } else { &[4] };
    let table = staircase_convergence(geometry, ns, std::slice::from_ref(&probe))?;
    let (err, thr) = if graded {
        // Halving the step must not grow the error, and n = 16 should be
        // within engineering accuracy of the ODE solution.
        let improving = table[1].max_error <= table[0].max_error * 1.05;
        (if improving { table[1].max_error } else { f64::INFINITY }, 1e-3)
    } else {
        (table[0].max_error, 1e-9)
    };
    checks.push(Check {
        name: "staircase_consistency",
        max_error: err,
        threshold: thr,
        note: "staircased shell vs direct ODE integration",
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!("{status}  {:<24} max_error = {:.3e}  (limit {:.1e})", c.name, c.max_error, c.threshold);
        rows.push(vec![
            c.name.to_string(),
            status.to_string(),
            fmt(c.max_error),
            fmt(c.threshold),
            c.note.to_string(),
        ]);
        if !c.passed() {
            failures.push(c.name);
        }
    }
    let path = out.join("validate.csv");
    write_csv(&path, &["check", "status", "max_error", "threshold", "note"], &rows)?;
    if !failures.is_empty() {
        return Err(RunError::Validation(format!("checks failed: {}", failures.join(", "))));
    }
    Ok((vec![path], vec![start.elapsed().as_secs_f64() * 1e3]))
}

fn run_sweep(
    config: &ScenarioConfig,
    antenna: &AntennaSource,
    lmax: u32,
    (layer, param): (usize, crate::config::SweepParam),
    (from, to, points): (f64, f64, usize),
    out: &Path,
) -> Result<TaskOutput> {
    let values: Vec<f64> = (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect();
    // Each point rebuilds only the shell; the antenna blocks are reused as-is.
    let results: Vec<(Vec<Vec<String>>, f64)> = values
        .par_iter()
        .map(|&value| {
            let start = Instant::now();
            let geometry = config.geometry(Some((layer, param, value)))?;
            let mut rows = Vec::new();
            for (i, &f) in config.frequencies_hz.iter().enumerate() {
                let sso = assemble_with_lmax(&geometry, f, lmax)?;
                let gamma = compose_ports_only(&antenna.per_frequency[i], &sso)?;
                for r in 0..gamma.nrows() {
                    for c in 0..gamma.ncols() {
                        let (db, deg) = mag_phase(gamma[[r, c]]);
                        rows.push(vec![
                            fmt(value),
                            fmt(f),
                            (r + 1).to_string(),
                            (c + 1).to_string(),
                            fmt(db),
                            fmt(deg),
                        ]);
                    }
                }
            }
            Ok((rows, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut ms = Vec::new();
    for (r, t) in results {
        rows.extend(r);
        ms.push(t);
    }
    let path = out.join("sweep.csv");
    write_csv(
        &path,
        &["param_value", "freq_hz", "port_i", "port_j", "mag_db", "phase_deg"],
        &rows,
    )?;
    Ok((vec![path], ms))
}
