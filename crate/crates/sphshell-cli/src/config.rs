//! Scenario configuration: a line-oriented sectioned key-value format.
//!
//! ```text
//! [geometry]
//! rb_mm = 150
//! ra_mm = 180
//! bubble_eps = 1
//! exterior_eps = 1
//! layer = iso from_mm=150 to_mm=180 eps=5-0.5*j mu=1
//!
//! [frequency]
//! start_ghz = 3.2
//! stop_ghz = 3.8
//! points = 7
//!
//! [antenna]
//! type = transparent
//!
//! [task]
//! type = sso
//! ```
//!
//! `#` starts a comment. Material values are expressions in the grammar of
//! [`crate::expr`]; `profile` layers may reference the radius `r` (meters),
//! all other values must be constants.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use sphshell::media::{
    HomogeneousRegion, LayerSegment, MediumSample, RadialProfile, ShellGeometry,
};

use crate::expr::{self, Expr};

/// A configuration problem, anchored to a config file line.
#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(ConfigError { line, message: message.into() })
}

/// Material description of one layer, kept symbolic so sweeps can modify it.
#[derive(Debug, Clone)]
pub enum LayerKind {
    Iso { eps: Complex64, mu: Complex64 },
    Uniaxial { eps_perp: Complex64, eps_r: Complex64, mu_perp: Complex64, mu_r: Complex64 },
    Profile { eps_perp: Expr, eps_r: Expr, mu_perp: Expr, mu_r: Expr },
}

#[derive(Debug, Clone)]
pub struct LayerSpec {
    pub r_inner: f64,
    pub r_outer: f64,
    pub kind: LayerKind,
}

/// Which antenna model a scenario uses.
#[derive(Debug, Clone, PartialEq)]
pub enum AntennaSpec {
    /// S = 1, T = 0, R = 0, Gamma = 0 with the given port count.
    Transparent { ports: usize },
    /// S = 1, R = 0, T = 0, Gamma = 1, single port.
    Null,
    /// Load a GSM interchange file.
    File(PathBuf),
}

/// The sweepable scalar parameters of an isotropic layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    EpsRe,
    EpsIm,
    MuRe,
    MuIm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSpec {
    Sso,
    Compose,
    Sparams,
    Pattern {
        /// Port drive amplitudes, one per port.
        v: Vec<Complex64>,
        step_deg: f64,
    },
    Rcs {
        theta_inc_deg: f64,
        phi_inc_deg: f64,
        /// "theta" or "phi" linear polarization.
        pol_phi: bool,
        step_deg: f64,
    },
    Validate,
    Sweep {
        /// 1-based index into the layer list; must be an `iso` layer.
        layer: usize,
        param: SweepParam,
        from: f64,
        to: f64,
        points: usize,
    },
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub rb: f64,
    pub ra: f64,
    pub bubble: HomogeneousRegion,
    pub exterior: HomogeneousRegion,
    pub layers: Vec<LayerSpec>,
    pub frequencies_hz: Vec<f64>,
    pub antenna: AntennaSpec,
    pub task: TaskSpec,
}

impl ScenarioConfig {
    /// Build the shell geometry, optionally overriding one sweep parameter.
    pub fn geometry(&self, sweep: Option<(usize, SweepParam, f64)>) -> Result<ShellGeometry> {
        let mut segments = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let segment = match &layer.kind {
                LayerKind::Iso { eps, mu } => {
                    let (mut eps, mut mu) = (*eps, *mu);
                    if let Some((index, param, value)) = sweep {
                        if index == i + 1 {
                            match param {
                                SweepParam::EpsRe => eps.re = value,
                                SweepParam::EpsIm => eps.im = value,
                                SweepParam::MuRe => mu.re = value,
                                SweepParam::MuIm => mu.im = value,
                            }
                        }
                    }
                    LayerSegment::constant(
                        layer.r_inner,
                        layer.r_outer,
                        MediumSample::isotropic(eps, mu),
                    )
                }
                LayerKind::Uniaxial { eps_perp, eps_r, mu_perp, mu_r } => LayerSegment::constant(
                    layer.r_inner,
                    layer.r_outer,
                    MediumSample {
                        eps_perp: *eps_perp,
                        eps_r: *eps_r,
                        mu_perp: *mu_perp,
                        mu_r: *mu_r,
                    },
                ),
                LayerKind::Profile { eps_perp, eps_r, mu_perp, mu_r } => {
                    let close = |e: &Expr| -> Arc<dyn Fn(f64) -> Complex64 + Send + Sync> {
                        let e = e.clone();
                        Arc::new(move |r| e.eval(r).expect("profile validated over the layer"))
                    };
                    LayerSegment::radial(
                        layer.r_inner,
                        layer.r_outer,
                        RadialProfile {
                            eps_perp: close(eps_perp),
                            eps_r: close(eps_r),
                            mu_perp: close(mu_perp),
                            mu_r: close(mu_r),
                            d_eps_perp: None,
                            d_mu_perp: None,
                        },
                    )
                }
            };
            segments.push(segment);
        }
        ShellGeometry::new(self.rb, self.ra, self.bubble, self.exterior, segments)
            .map_err(|e| ConfigError { line: 0, message: format!("geometry: {e}") })
    }
}

/// One `key = value` line with its position.
struct Entry {
    line: usize,
    value: String,
}

/// Sectioned key-value file split into per-section maps; duplicate `layer`
/// keys are collected in order.
struct Sections {
    values: BTreeMap<(String, String), Entry>,
    layers: Vec<Entry>,
}

fn split_sections(text: &str, path: &Path) -> Result<Sections> {
    let mut section = String::new();
    let mut values = BTreeMap::new();
    let mut layers = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return err(line_no, "unterminated section header");
            };
            let name = name.trim();
            if !["geometry", "frequency", "antenna", "task"].contains(&name) {
                return err(line_no, format!("unknown section `[{name}]`"));
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(line_no, "expected `key = value` or `[section]`");
        };
        if section.is_empty() {
            return err(line_no, "key appears before any section header");
        }
        let key = key.trim().to_string();
        let entry = Entry { line: line_no, value: value.trim().to_string() };
        if section == "geometry" && key == "layer" {
            layers.push(entry);
        } else if values.insert((section.clone(), key.clone()), entry).is_some() {
            return err(line_no, format!("duplicate key `{key}` in [{section}]"));
        }
    }
    if values.is_empty() && layers.is_empty() {
        return err(0, format!("{}: empty configuration", path.display()));
    }
    Ok(Sections { values, layers })
}

impl Sections {
    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.values.remove(&(section.to_string(), key.to_string()))
    }

    fn require(&mut self, section: &str, key: &str) -> Result<Entry> {
        self.take(section, key)
            .ok_or_else(|| ConfigError { line: 0, message: format!("missing `{key}` in [{section}]") })
    }
}

fn parse_f64(e: &Entry, key: &str) -> Result<f64> {
    e.value
        .parse::<f64>()
        .map_err(|_| ConfigError { line: e.line, message: format!("`{key}`: bad number `{}`", e.value) })
}

fn parse_usize(e: &Entry, key: &str) -> Result<usize> {
    e.value
        .parse::<usize>()
        .map_err(|_| ConfigError { line: e.line, message: format!("`{key}`: bad integer `{}`", e.value) })
}

/// A constant complex value written in the expression grammar.
fn parse_constant(value: &str, line: usize, key: &str) -> Result<Complex64> {
    let e = expr::parse(value)
        .map_err(|e| ConfigError { line, message: format!("`{key}`: {e}") })?;
    if e.depends_on_radius() {
        return err(line, format!("`{key}` must be constant, but references `r`"));
    }
    e.eval(0.0).map_err(|e| ConfigError { line, message: format!("`{key}`: {e}") })
}

fn parse_layer(entry: &Entry, rb: f64, ra: f64) -> Result<LayerSpec> {
    let line = entry.line;
    let mut tokens = entry.value.split_whitespace();
    let Some(kind) = tokens.next() else {
        return err(line, "empty layer definition");
    };
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for token in tokens {
        let Some((k, v)) = token.split_once('=') else {
            return err(line, format!("layer option `{token}` is not of the form key=value"));
        };
        if fields.insert(k, v).is_some() {
            return err(line, format!("duplicate layer option `{k}`"));
        }
    }
    let mut take_mm = |key: &str| -> Result<f64> {
        let v = fields
            .remove(key)
            .ok_or_else(|| ConfigError { line, message: format!("layer is missing `{key}`") })?;
        v.parse::<f64>()
            .map(|mm| mm * 1e-3)
            .map_err(|_| ConfigError { line, message: format!("`{key}`: bad number `{v}`") })
    };
    let r_inner = take_mm("from_mm")?;
    let r_outer = take_mm("to_mm")?;
    if !(rb..=ra).contains(&r_inner) || !(rb..=ra).contains(&r_outer) || r_inner >= r_outer {
        return err(line, format!("layer radii [{r_inner}, {r_outer}] m must nest inside [rb, ra]"));
    }

    let mut constant = |key: &str| -> Result<Complex64> {
        let v = fields
            .remove(key)
            .ok_or_else(|| ConfigError { line, message: format!("layer is missing `{key}`") })?;
        parse_constant(v, line, key)
    };
    let kind = match kind {
        "iso" => LayerKind::Iso { eps: constant("eps")?, mu: constant("mu")? },
        "uniaxial" => LayerKind::Uniaxial {
            eps_perp: constant("eps_perp")?,
            eps_r: constant("eps_r")?,
            mu_perp: constant("mu_perp")?,
            mu_r: constant("mu_r")?,
        },
        "profile" => {
            let mut profile = |key: &str| -> Result<Expr> {
                let v = fields.remove(key).ok_or_else(|| ConfigError {
                    line,
                    message: format!("layer is missing `{key}`"),
                })?;
                let e = expr::parse(v)
                    .map_err(|e| ConfigError { line, message: format!("`{key}`: {e}") })?;
                // Validate over the layer so later evaluation cannot fail.
                for i in 0..=64 {
                    let r = r_inner + (r_outer - r_inner) * i as f64 / 64.0;
                    e.eval(r)
                        .map_err(|e| ConfigError { line, message: format!("`{key}`: {e}") })?;
                }
                Ok(e)
            };
            LayerKind::Profile {
                eps_perp: profile("eps_perp")?,
                eps_r: profile("eps_r")?,
                mu_perp: profile("mu_perp")?,
                mu_r: profile("mu_r")?,
            }
        }
        other => {
            return err(
                line,
                format!(
                    "unknown layer type `{other}`: shells are limited to isotropic or radially \
                     uniaxial media (`iso`, `uniaxial`, `profile`)"
                ),
            );
        }
    };
    if let Some((k, _)) = fields.into_iter().next() {
        return err(line, format!("unknown layer option `{k}`"));
    }
    Ok(LayerSpec { r_inner, r_outer, kind })
}

fn parse_complex_list(value: &str, line: usize, key: &str) -> Result<Vec<Complex64>> {
    value
        .split_whitespace()
        .map(|tok| parse_constant(tok, line, key))
        .collect()
}

fn parse_task(sections: &mut Sections) -> Result<TaskSpec> {
    let kind = sections.require("task", "type")?;
    let task = match kind.value.as_str() {
        "sso" => TaskSpec::Sso,
        "compose" => TaskSpec::Compose,
        "sparams" => TaskSpec::Sparams,
        "pattern" => {
            let v = match sections.take("task", "v") {
                Some(e) => parse_complex_list(&e.value, e.line, "v")?,
                None => vec![Complex64::new(1.0, 0.0)],
            };
            let step_deg = match sections.take("task", "step_deg") {
                Some(e) => parse_f64(&e, "step_deg")?,
                None => 1.0,
            };
            if !(step_deg > 0.0) {
                return err(kind.line, "`step_deg` must be positive");
            }
            TaskSpec::Pattern { v, step_deg }
        }
        "rcs" => {
            let theta_inc_deg = match sections.take("task", "theta_inc_deg") {
                Some(e) => parse_f64(&e, "theta_inc_deg")?,
                None => 0.0,
            };
            let phi_inc_deg = match sections.take("task", "phi_inc_deg") {
                Some(e) => parse_f64(&e, "phi_inc_deg")?,
                None => 0.0,
            };
            let pol_phi = match sections.take("task", "pol") {
                None => false,
                Some(e) => match e.value.as_str() {
                    "theta" => false,
                    "phi" => true,
                    other => {
                        return err(e.line, format!("`pol` must be theta or phi, got `{other}`"));
                    }
                },
            };
            let step_deg = match sections.take("task", "step_deg") {
                Some(e) => parse_f64(&e, "step_deg")?,
                None => 1.0,
            };
            TaskSpec::Rcs { theta_inc_deg, phi_inc_deg, pol_phi, step_deg }
        }
        "validate" => TaskSpec::Validate,
        "sweep" => {
            let layer_entry = sections.require("task", "layer")?;
            let layer = parse_usize(&layer_entry, "layer")?;
            let param_entry = sections.require("task", "param")?;
            let param = match param_entry.value.as_str() {
                "eps_re" => SweepParam::EpsRe,
                "eps_im" => SweepParam::EpsIm,
                "mu_re" => SweepParam::MuRe,
                "mu_im" => SweepParam::MuIm,
                other => {
                    return err(
                        param_entry.line,
                        format!("`param` must be one of eps_re, eps_im, mu_re, mu_im; got `{other}`"),
                    );
                }
            };
            let from = parse_f64(&sections.require("task", "from")?, "from")?;
            let to = parse_f64(&sections.require("task", "to")?, "to")?;
            let points = parse_usize(&sections.require("task", "points")?, "points")?;
            if points < 2 {
                return err(kind.line, "`points` must be at least 2 for a sweep");
            }
            TaskSpec::Sweep { layer, param, from, to, points }
        }
        other => {
            return err(
                kind.line,
                format!(
                    "unknown task type `{other}` (expected sso, compose, sparams, pattern, rcs, \
                     validate or sweep)"
                ),
            );
        }
    };
    Ok(task)
}

/// Parse and validate a scenario file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { line: 0, message: format!("{}: {e}", path.display()) })?;
    let mut sections = split_sections(&text, path)?;

    // [geometry]
    let rb = parse_f64(&sections.require("geometry", "rb_mm")?, "rb_mm")? * 1e-3;
    let ra = parse_f64(&sections.require("geometry", "ra_mm")?, "ra_mm")? * 1e-3;
    let mut region = |key_eps: &str, key_mu: &str| -> Result<HomogeneousRegion> {
        let eps = match sections.take("geometry", key_eps) {
            Some(e) => parse_constant(&e.value, e.line, key_eps)?,
            None => Complex64::new(1.0, 0.0),
        };
        let mu = match sections.take("geometry", key_mu) {
            Some(e) => parse_constant(&e.value, e.line, key_mu)?,
            None => Complex64::new(1.0, 0.0),
        };
        Ok(HomogeneousRegion::new(eps, mu))
    };
    let bubble = region("bubble_eps", "bubble_mu")?;
    let exterior = region("exterior_eps", "exterior_mu")?;
    let layers = std::mem::take(&mut sections.layers)
        .iter()
        .map(|e| parse_layer(e, rb, ra))
        .collect::<Result<Vec<_>>>()?;

    // [frequency]
    let start_entry = sections.require("frequency", "start_ghz")?;
    let start = parse_f64(&start_entry, "start_ghz")?;
    let (stop, stop_line) = match sections.take("frequency", "stop_ghz") {
        Some(e) => (parse_f64(&e, "stop_ghz")?, e.line),
        None => (start, start_entry.line),
    };
    let points = match sections.take("frequency", "points") {
        Some(e) => parse_usize(&e, "points")?,
        None => 1,
    };
    if !(start > 0.0) {
        return err(start_entry.line, "`start_ghz` must be positive");
    }
    if stop < start {
        return err(stop_line, format!("`stop_ghz` = {stop} is below `start_ghz` = {start}"));
    }
    if points == 0 || (points == 1 && stop != start) || (points > 1 && stop == start) {
        return err(stop_line, "`points` must match the span: 1 point for a single frequency");
    }
    let frequencies_hz = (0..points)
        .map(|i| {
            let f = if points == 1 {
                start
            } else {
                start + (stop - start) * i as f64 / (points - 1) as f64
            };
            f * 1e9
        })
        .collect();

    // [antenna]
    let antenna = if let Some(e) = sections.take("antenna", "gsm_file") {
        if sections.take("antenna", "type").is_some() {
            return err(e.line, "give either `gsm_file` or `type`, not both");
        }
        let p = PathBuf::from(&e.value);
        let resolved =
            if p.is_relative() { path.parent().unwrap_or(Path::new(".")).join(p) } else { p };
        AntennaSpec::File(resolved)
    } else {
        let e = sections.require("antenna", "type")?;
        match e.value.as_str() {
            "transparent" => {
                let ports = match sections.take("antenna", "ports") {
                    Some(p) => parse_usize(&p, "ports")?,
                    None => 1,
                };
                if ports == 0 {
                    return err(e.line, "`ports` must be at least 1");
                }
                AntennaSpec::Transparent { ports }
            }
            "null" => AntennaSpec::Null,
            other => {
                return err(
                    e.line,
                    format!("unknown antenna type `{other}` (expected transparent or null)"),
                );
            }
        }
    };

    let task = parse_task(&mut sections)?;

    // Everything must have been consumed.
    if let Some(((section, key), entry)) = sections.values.iter().next() {
        return err(entry.line, format!("unknown key `{key}` in [{section}]"));
    }

    // Cross-field validation.
    if let TaskSpec::Sweep { layer, .. } = task {
        match layers.get(layer.wrapping_sub(1)) {
            Some(LayerSpec { kind: LayerKind::Iso { .. }, .. }) => {}
            Some(_) => return err(0, format!("sweep layer {layer} is not an `iso` layer")),
            None => return err(0, format!("sweep layer {layer} does not exist")),
        }
    }

    let config = ScenarioConfig { rb, ra, bubble, exterior, layers, frequencies_hz, antenna, task };
    // Surface geometry invariant violations (coverage gaps, overlaps) now.
    config.geometry(None)?;
    Ok(config)
}
