//! Scenario files: load, validate, resolve defaults, and re-emit.
//!
//! Scenarios are JSON documents with snake_case keys and SI units suffixed
//! into the names (`wind_speed_mps`, `density_kgm3`, `dt_s`). Loading is
//! strict: unknown keys are rejected, and every violation is reported with
//! its JSON-pointer path rather than stopping at the first.
//!
//! `emit_resolved` writes the fully resolved document (all defaults
//! applied). Re-loading that document reproduces the identical scenario, so
//! a run's `scenario.resolved.json` replays it byte-for-byte under the same
//! seed.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;
use thiserror::Error;

use crate::containment::{EscapeEdges, PressureLevel, Scenario, SpillConfig};
use crate::control::{ControlConfig, SensorConfig};
use crate::field::{LevitatorUnit, DEFAULT_MAX_POWER_SCALE, FREQUENCY_MAX_HZ, FREQUENCY_MIN_HZ};
use crate::geom::{Rect, Vec2};
use crate::physics::{Environment, OilType};
use crate::planner::PlannerConfig;
use crate::spill::{DriftParams, RadiusSpec};

/// Default sound speeds by medium label, m/s.
pub const SOUND_SPEED_SEAWATER: f64 = 1480.0;
pub const SOUND_SPEED_AIR: f64 = 343.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// JSON-pointer path of the offending value.
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pointer, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario:\n{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ValidationIssue>),
}

/// Load and fully validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_scenario_str(&text)
}

/// Load a scenario from JSON text.
pub fn load_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    scenario_from_value(&value)
}

// ---------------------------------------------------------------------------
// value helpers

struct Issues(Vec<ValidationIssue>);

impl Issues {
    fn report(&mut self, pointer: impl Into<String>, message: impl Into<String>) {
        self.0.push(ValidationIssue {
            pointer: pointer.into(),
            message: message.into(),
        });
    }
}

fn as_object<'a>(
    value: &'a Value,
    pointer: &str,
    issues: &mut Issues,
) -> Option<&'a Map<String, Value>> {
    match value {
        Value::Object(map) => Some(map),
        _ => {
            issues.report(pointer, "expected an object");
            None
        }
    }
}

fn deny_unknown(map: &Map<String, Value>, pointer: &str, allowed: &[&str], issues: &mut Issues) {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            issues.report(format!("{pointer}/{key}"), "unknown key");
        }
    }
}

fn field<'a>(map: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
    match map.get(key) {
        None | Some(Value::Null) => None,
        Some(v) => Some(v),
    }
}

fn req_f64(map: &Map<String, Value>, pointer: &str, key: &str, issues: &mut Issues) -> Option<f64> {
    match field(map, key) {
        Some(v) => v.as_f64().or_else(|| {
            issues.report(format!("{pointer}/{key}"), "expected a number");
            None
        }),
        None => {
            issues.report(format!("{pointer}/{key}"), "missing required key");
            None
        }
    }
}

fn opt_f64(
    map: &Map<String, Value>,
    pointer: &str,
    key: &str,
    default: f64,
    issues: &mut Issues,
) -> f64 {
    match field(map, key) {
        Some(v) => v.as_f64().unwrap_or_else(|| {
            issues.report(format!("{pointer}/{key}"), "expected a number");
            default
        }),
        None => default,
    }
}

fn req_u64(map: &Map<String, Value>, pointer: &str, key: &str, issues: &mut Issues) -> Option<u64> {
    match field(map, key) {
        Some(v) => v.as_u64().or_else(|| {
            issues.report(
                format!("{pointer}/{key}"),
                "expected a non-negative integer",
            );
            None
        }),
        None => {
            issues.report(format!("{pointer}/{key}"), "missing required key");
            None
        }
    }
}

fn opt_u64(
    map: &Map<String, Value>,
    pointer: &str,
    key: &str,
    default: u64,
    issues: &mut Issues,
) -> u64 {
    match field(map, key) {
        Some(v) => v.as_u64().unwrap_or_else(|| {
            issues.report(
                format!("{pointer}/{key}"),
                "expected a non-negative integer",
            );
            default
        }),
        None => default,
    }
}

fn opt_bool(
    map: &Map<String, Value>,
    pointer: &str,
    key: &str,
    default: bool,
    issues: &mut Issues,
) -> bool {
    match field(map, key) {
        Some(v) => v.as_bool().unwrap_or_else(|| {
            issues.report(format!("{pointer}/{key}"), "expected a boolean");
            default
        }),
        None => default,
    }
}

fn opt_str<'a>(
    map: &'a Map<String, Value>,
    pointer: &str,
    key: &str,
    issues: &mut Issues,
) -> Option<&'a str> {
    match field(map, key) {
        Some(v) => v.as_str().or_else(|| {
            issues.report(format!("{pointer}/{key}"), "expected a string");
            None
        }),
        None => None,
    }
}

fn xy_pair(value: &Value, pointer: &str, issues: &mut Issues) -> Option<Vec2> {
    let arr = value.as_array();
    match arr {
        Some(items) if items.len() == 2 => {
            let x = items[0].as_f64();
            let y = items[1].as_f64();
            match (x, y) {
                (Some(x), Some(y)) => Some(Vec2::new(x, y)),
                _ => {
                    issues.report(pointer, "expected two numbers");
                    None
                }
            }
        }
        _ => {
            issues.report(pointer, "expected an [x, y] pair");
            None
        }
    }
}

// ---------------------------------------------------------------------------
// section loaders

fn load_environment(root: &Map<String, Value>, issues: &mut Issues) -> Option<Environment> {
    let Some(section) = field(root, "environment") else {
        issues.report("/environment", "missing required key");
        return None;
    };
    let map = as_object(section, "/environment", issues)?;
    let p = "/environment";
    deny_unknown(
        map,
        p,
        &[
            "wind_speed_mps",
            "water_density_kgm3",
            "medium",
            "sound_speed_mps",
            "gravity_mps2",
            "spreading_constant",
        ],
        issues,
    );
    let wind = req_f64(map, p, "wind_speed_mps", issues);
    let water_density = opt_f64(map, p, "water_density_kgm3", 1000.0, issues);
    let gravity = opt_f64(map, p, "gravity_mps2", 9.81, issues);
    let spreading = opt_f64(map, p, "spreading_constant", 1.0, issues);

    let medium = opt_str(map, p, "medium", issues);
    let explicit_speed = field(map, "sound_speed_mps").and_then(Value::as_f64);
    if field(map, "sound_speed_mps").is_some() && explicit_speed.is_none() {
        issues.report(format!("{p}/sound_speed_mps"), "expected a number");
    }
    let sound_speed = match (medium, explicit_speed) {
        (_, Some(speed)) => Some(speed),
        (Some("seawater") | None, None) => Some(SOUND_SPEED_SEAWATER),
        (Some("air"), None) => Some(SOUND_SPEED_AIR),
        (Some("custom"), None) => {
            issues.report(
                format!("{p}/sound_speed_mps"),
                "medium \"custom\" needs an explicit sound_speed_mps",
            );
            None
        }
        (Some(other), None) => {
            issues.report(
                format!("{p}/medium"),
                format!("unknown medium \"{other}\" (use seawater, air, or custom)"),
            );
            None
        }
    };

    let check_positive = |issues: &mut Issues, key: &str, value: f64, strict: bool| {
        let ok = value.is_finite() && if strict { value > 0.0 } else { value >= 0.0 };
        if !ok {
            issues.report(
                format!("{p}/{key}"),
                if strict {
                    "must be a positive number"
                } else {
                    "must be a non-negative number"
                },
            );
        }
        ok
    };
    let mut ok = true;
    if let Some(w) = wind {
        ok &= check_positive(issues, "wind_speed_mps", w, false);
    } else {
        ok = false;
    }
    ok &= check_positive(issues, "water_density_kgm3", water_density, true);
    ok &= check_positive(issues, "gravity_mps2", gravity, true);
    ok &= check_positive(issues, "spreading_constant", spreading, true);
    if let Some(c) = sound_speed {
        ok &= check_positive(issues, "sound_speed_mps", c, true);
    } else {
        ok = false;
    }
    if !ok {
        return None;
    }
    Some(Environment {
        wind_speed: wind.unwrap(),
        water_density,
        sound_speed: sound_speed.unwrap(),
        gravity,
        spreading_constant: spreading,
    })
}

fn load_oil(root: &Map<String, Value>, issues: &mut Issues) -> Option<OilType> {
    let Some(section) = field(root, "oil") else {
        issues.report("/oil", "missing required key");
        return None;
    };
    let map = as_object(section, "/oil", issues)?;
    let p = "/oil";
    deny_unknown(map, p, &["name", "density_kgm3", "viscosity_pas"], issues);
    let name = opt_str(map, p, "name", issues).unwrap_or("oil").to_string();
    let density = req_f64(map, p, "density_kgm3", issues)?;
    let viscosity = req_f64(map, p, "viscosity_pas", issues)?;
    let mut ok = true;
    if !(density > 0.0 && density.is_finite()) {
        issues.report(format!("{p}/density_kgm3"), "must be a positive number");
        ok = false;
    }
    if !(viscosity > 0.0 && viscosity.is_finite()) {
        issues.report(format!("{p}/viscosity_pas"), "must be a positive number");
        ok = false;
    }
    ok.then_some(OilType {
        name,
        density,
        viscosity,
    })
}

fn load_radius_spec(value: &Value, pointer: &str, issues: &mut Issues) -> Option<RadiusSpec> {
    let map = as_object(value, pointer, issues)?;
    deny_unknown(map, pointer, &["fixed_m", "lognormal"], issues);
    let fixed = field(map, "fixed_m");
    let lognormal = field(map, "lognormal");
    match (fixed, lognormal) {
        (Some(v), None) => {
            let Some(r) = v.as_f64() else {
                issues.report(format!("{pointer}/fixed_m"), "expected a number");
                return None;
            };
            if !(r > 0.0 && r.is_finite()) {
                issues.report(format!("{pointer}/fixed_m"), "must be a positive number");
                return None;
            }
            Some(RadiusSpec::Fixed(r))
        }
        (None, Some(v)) => {
            let sub = as_object(v, &format!("{pointer}/lognormal"), issues)?;
            let sp = format!("{pointer}/lognormal");
            deny_unknown(sub, &sp, &["median_m", "sigma"], issues);
            let median = req_f64(sub, &sp, "median_m", issues)?;
            let sigma = req_f64(sub, &sp, "sigma", issues)?;
            let mut ok = true;
            if !(median > 0.0 && median.is_finite()) {
                issues.report(format!("{sp}/median_m"), "must be a positive number");
                ok = false;
            }
            if !(sigma > 0.0 && sigma.is_finite()) {
                issues.report(format!("{sp}/sigma"), "must be a positive number");
                ok = false;
            }
            ok.then_some(RadiusSpec::LogNormal { median, sigma })
        }
        _ => {
            issues.report(pointer, "expected exactly one of fixed_m or lognormal");
            None
        }
    }
}

fn load_spill(root: &Map<String, Value>, issues: &mut Issues) -> Option<SpillConfig> {
    let Some(section) = field(root, "spill") else {
        issues.report("/spill", "missing required key");
        return None;
    };
    let map = as_object(section, "/spill", issues)?;
    let p = "/spill";
    deny_unknown(
        map,
        p,
        &["origin_m", "count", "radius_m", "k_wind", "d0_m2ps"],
        issues,
    );
    let origin = match field(map, "origin_m") {
        Some(v) => xy_pair(v, &format!("{p}/origin_m"), issues),
        None => {
            issues.report(format!("{p}/origin_m"), "missing required key");
            None
        }
    };
    let count = req_u64(map, p, "count", issues);
    if let Some(c) = count {
        if c == 0 || c > u32::MAX as u64 {
            issues.report(format!("{p}/count"), "must be between 1 and 2^32-1");
        }
    }
    let radius_spec = match field(map, "radius_m") {
        Some(v) => load_radius_spec(v, &format!("{p}/radius_m"), issues),
        None => {
            issues.report(format!("{p}/radius_m"), "missing required key");
            None
        }
    };
    let defaults = DriftParams::default();
    let k_wind = opt_f64(map, p, "k_wind", defaults.k_wind, issues);
    let d0 = opt_f64(map, p, "d0_m2ps", defaults.d0, issues);
    if !(k_wind >= 0.0 && k_wind.is_finite()) {
        issues.report(format!("{p}/k_wind"), "must be a non-negative number");
    }
    if !(d0 >= 0.0 && d0.is_finite()) {
        issues.report(format!("{p}/d0_m2ps"), "must be a non-negative number");
    }
    Some(SpillConfig {
        origin: origin?,
        count: count?.try_into().ok()?,
        radius_spec: radius_spec?,
        drift: DriftParams { k_wind, d0 },
    })
}

fn load_unit(
    value: &Value,
    index: usize,
    sound_speed: Option<f64>,
    issues: &mut Issues,
) -> Option<LevitatorUnit> {
    let p = format!("/levitators/{index}");
    let map = as_object(value, &p, issues)?;
    deny_unknown(
        map,
        &p,
        &[
            "id",
            "position_m",
            "heading_rad",
            "num_transducers",
            "power_per_transducer_w",
            "frequency_hz",
            "aperture_m2",
            "reflector_gap_m",
            "depth_setpoint_m",
            "power_scale",
            "max_power_scale",
        ],
        issues,
    );
    let id = opt_u64(map, &p, "id", index as u64, issues) as u32;
    let position = match field(map, "position_m") {
        Some(v) => xy_pair(v, &format!("{p}/position_m"), issues),
        None => {
            issues.report(format!("{p}/position_m"), "missing required key");
            None
        }
    };
    let heading = opt_f64(map, &p, "heading_rad", 0.0, issues);
    let num_transducers = req_u64(map, &p, "num_transducers", issues);
    let power = req_f64(map, &p, "power_per_transducer_w", issues);
    let frequency = opt_f64(map, &p, "frequency_hz", 40_000.0, issues);
    let aperture = req_f64(map, &p, "aperture_m2", issues);
    let gap = req_f64(map, &p, "reflector_gap_m", issues);
    let depth = opt_f64(map, &p, "depth_setpoint_m", 0.0, issues);
    let power_scale = opt_f64(map, &p, "power_scale", 1.0, issues);
    let max_power_scale = opt_f64(map, &p, "max_power_scale", DEFAULT_MAX_POWER_SCALE, issues);

    let mut ok = true;
    match num_transducers {
        Some(n) if n >= 1 => {}
        Some(_) => {
            issues.report(format!("{p}/num_transducers"), "must be at least 1");
            ok = false;
        }
        None => ok = false,
    }
    if let Some(w) = power {
        if !(w > 0.0 && w.is_finite()) {
            issues.report(
                format!("{p}/power_per_transducer_w"),
                "must be a positive number",
            );
            ok = false;
        }
    } else {
        ok = false;
    }
    if !(FREQUENCY_MIN_HZ..=FREQUENCY_MAX_HZ).contains(&frequency) {
        issues.report(
            format!("{p}/frequency_hz"),
            format!("must lie in [{FREQUENCY_MIN_HZ}, {FREQUENCY_MAX_HZ}] Hz"),
        );
        ok = false;
    }
    if let Some(a) = aperture {
        if !(a > 0.0 && a.is_finite()) {
            issues.report(format!("{p}/aperture_m2"), "must be a positive number");
            ok = false;
        }
    } else {
        ok = false;
    }
    match gap {
        Some(g) if g > 0.0 && g.is_finite() => {
            if let Some(c) = sound_speed {
                let quarter = c / frequency / 4.0;
                if g < quarter {
                    issues.report(
                        format!("{p}/reflector_gap_m"),
                        format!(
                            "no trapping node fits: gap {g} m < quarter wavelength {quarter} m"
                        ),
                    );
                    ok = false;
                }
            }
        }
        Some(_) => {
            issues.report(format!("{p}/reflector_gap_m"), "must be a positive number");
            ok = false;
        }
        None => ok = false,
    }
    if !(depth >= 0.0 && depth.is_finite()) {
        issues.report(
            format!("{p}/depth_setpoint_m"),
            "must be a non-negative number",
        );
        ok = false;
    }
    if !(max_power_scale > 0.0 && max_power_scale.is_finite()) {
        issues.report(format!("{p}/max_power_scale"), "must be a positive number");
        ok = false;
    }
    if !(power_scale >= 0.0 && power_scale <= max_power_scale) {
        issues.report(
            format!("{p}/power_scale"),
            format!("must lie in [0, max_power_scale={max_power_scale}]"),
        );
        ok = false;
    }
    if !ok {
        return None;
    }
    Some(LevitatorUnit {
        id,
        position: position?,
        heading,
        num_transducers: num_transducers? as u32,
        power_per_transducer: power?,
        frequency,
        aperture_area: aperture?,
        reflector_gap: gap?,
        depth_setpoint: depth,
        power_scale,
        max_power_scale,
    })
}

fn load_levitators(
    root: &Map<String, Value>,
    sound_speed: Option<f64>,
    issues: &mut Issues,
) -> Vec<LevitatorUnit> {
    let Some(section) = field(root, "levitators") else {
        return Vec::new();
    };
    let Some(items) = section.as_array() else {
        issues.report("/levitators", "expected an array");
        return Vec::new();
    };
    let mut units = Vec::new();
    for (index, item) in items.iter().enumerate() {
        if let Some(unit) = load_unit(item, index, sound_speed, issues) {
            units.push(unit);
        }
    }
    let mut seen = std::collections::HashSet::new();
    for (index, unit) in units.iter().enumerate() {
        if !seen.insert(unit.id) {
            issues.report(
                format!("/levitators/{index}/id"),
                format!("duplicate unit id {}", unit.id),
            );
        }
    }
    units
}

fn load_escape_edges(value: &Value, pointer: &str, issues: &mut Issues) -> EscapeEdges {
    let mut edges = EscapeEdges {
        north: false,
        south: false,
        east: false,
        west: false,
    };
    let Some(items) = value.as_array() else {
        issues.report(pointer, "expected an array of edge names");
        return EscapeEdges::default();
    };
    for (i, item) in items.iter().enumerate() {
        match item.as_str() {
            Some("north") => edges.north = true,
            Some("south") => edges.south = true,
            Some("east") => edges.east = true,
            Some("west") => edges.west = true,
            _ => issues.report(
                format!("{pointer}/{i}"),
                "expected one of \"north\", \"south\", \"east\", \"west\"",
            ),
        }
    }
    edges
}

struct SimSection {
    wind_dir: f64,
    dt: f64,
    duration: f64,
    domain_bounds: Rect,
    escape_edges: EscapeEdges,
    pressure_level: Option<PressureLevel>,
    capture_distance: Option<f64>,
}

fn load_sim(root: &Map<String, Value>, issues: &mut Issues) -> Option<SimSection> {
    let Some(section) = field(root, "sim") else {
        issues.report("/sim", "missing required key");
        return None;
    };
    let map = as_object(section, "/sim", issues)?;
    let p = "/sim";
    deny_unknown(
        map,
        p,
        &[
            "wind_dir_rad",
            "dt_s",
            "duration_s",
            "domain_bounds_m",
            "escape_edges",
            "pressure_level",
            "capture_distance_m",
        ],
        issues,
    );
    let wind_dir = opt_f64(map, p, "wind_dir_rad", 0.0, issues);
    let dt = req_f64(map, p, "dt_s", issues);
    let duration = req_f64(map, p, "duration_s", issues);
    if let Some(dt) = dt {
        if !(dt > 0.0 && dt.is_finite()) {
            issues.report(format!("{p}/dt_s"), "must be a positive number");
        } else if let Some(d) = duration {
            if !(d >= 0.0 && d.is_finite()) {
                issues.report(format!("{p}/duration_s"), "must be a non-negative number");
            } else if d != 0.0 && d < dt {
                issues.report(format!("{p}/duration_s"), "must be 0 or at least dt_s");
            }
        }
    }
    let domain = match field(map, "domain_bounds_m") {
        Some(v) => {
            let dp = format!("{p}/domain_bounds_m");
            as_object(v, &dp, issues).and_then(|sub| {
                deny_unknown(sub, &dp, &["min_m", "max_m"], issues);
                let min = match field(sub, "min_m") {
                    Some(v) => xy_pair(v, &format!("{dp}/min_m"), issues),
                    None => {
                        issues.report(format!("{dp}/min_m"), "missing required key");
                        None
                    }
                };
                let max = match field(sub, "max_m") {
                    Some(v) => xy_pair(v, &format!("{dp}/max_m"), issues),
                    None => {
                        issues.report(format!("{dp}/max_m"), "missing required key");
                        None
                    }
                };
                let rect = Rect::new(min?, max?);
                if !rect.is_valid() {
                    issues.report(dp.clone(), "max_m must exceed min_m on both axes");
                    return None;
                }
                Some(rect)
            })
        }
        None => {
            issues.report(format!("{p}/domain_bounds_m"), "missing required key");
            None
        }
    };
    let escape_edges = match field(map, "escape_edges") {
        Some(v) => load_escape_edges(v, &format!("{p}/escape_edges"), issues),
        None => EscapeEdges::default(),
    };
    let pressure_level = match opt_str(map, p, "pressure_level", issues) {
        Some("none") => Some(PressureLevel::None),
        Some("low") => Some(PressureLevel::Low),
        Some("medium") => Some(PressureLevel::Medium),
        Some("high") => Some(PressureLevel::High),
        Some(other) => {
            issues.report(
                format!("{p}/pressure_level"),
                format!("unknown level \"{other}\" (use none, low, medium, or high)"),
            );
            None
        }
        None => None,
    };
    let capture_distance = field(map, "capture_distance_m").and_then(Value::as_f64);
    if field(map, "capture_distance_m").is_some() && capture_distance.is_none() {
        issues.report(format!("{p}/capture_distance_m"), "expected a number");
    }
    if let Some(c) = capture_distance {
        if !(c > 0.0 && c.is_finite()) {
            issues.report(
                format!("{p}/capture_distance_m"),
                "must be a positive number",
            );
        }
    }
    Some(SimSection {
        wind_dir,
        dt: dt?,
        duration: duration?,
        domain_bounds: domain?,
        escape_edges,
        pressure_level,
        capture_distance,
    })
}

fn load_sensors(value: &Value, pointer: &str, issues: &mut Issues) -> SensorConfig {
    let defaults = SensorConfig::default();
    let Some(map) = as_object(value, pointer, issues) else {
        return defaults;
    };
    deny_unknown(
        map,
        pointer,
        &[
            "pressure_sigma_pa",
            "temperature_sigma_c",
            "hydrophone_sigma_pa",
            "dissolved_oxygen_sigma_mgl",
            "oil_content_sigma",
            "temperature_baseline_c",
            "dissolved_oxygen_baseline_mgl",
            "k_do_mgl",
            "oil_content_radius_m",
            "oil_content_ref_density_per_m2",
        ],
        issues,
    );
    let cfg = SensorConfig {
        pressure_sigma: opt_f64(
            map,
            pointer,
            "pressure_sigma_pa",
            defaults.pressure_sigma,
            issues,
        ),
        temperature_sigma: opt_f64(
            map,
            pointer,
            "temperature_sigma_c",
            defaults.temperature_sigma,
            issues,
        ),
        hydrophone_sigma: opt_f64(
            map,
            pointer,
            "hydrophone_sigma_pa",
            defaults.hydrophone_sigma,
            issues,
        ),
        dissolved_oxygen_sigma: opt_f64(
            map,
            pointer,
            "dissolved_oxygen_sigma_mgl",
            defaults.dissolved_oxygen_sigma,
            issues,
        ),
        oil_content_sigma: opt_f64(
            map,
            pointer,
            "oil_content_sigma",
            defaults.oil_content_sigma,
            issues,
        ),
        temperature_baseline: opt_f64(
            map,
            pointer,
            "temperature_baseline_c",
            defaults.temperature_baseline,
            issues,
        ),
        dissolved_oxygen_baseline: opt_f64(
            map,
            pointer,
            "dissolved_oxygen_baseline_mgl",
            defaults.dissolved_oxygen_baseline,
            issues,
        ),
        k_do: opt_f64(map, pointer, "k_do_mgl", defaults.k_do, issues),
        oil_content_radius: opt_f64(
            map,
            pointer,
            "oil_content_radius_m",
            defaults.oil_content_radius,
            issues,
        ),
        oil_content_ref_density: opt_f64(
            map,
            pointer,
            "oil_content_ref_density_per_m2",
            defaults.oil_content_ref_density,
            issues,
        ),
    };
    for (key, sigma) in [
        ("pressure_sigma_pa", cfg.pressure_sigma),
        ("temperature_sigma_c", cfg.temperature_sigma),
        ("hydrophone_sigma_pa", cfg.hydrophone_sigma),
        ("dissolved_oxygen_sigma_mgl", cfg.dissolved_oxygen_sigma),
        ("oil_content_sigma", cfg.oil_content_sigma),
    ] {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            issues.report(format!("{pointer}/{key}"), "must be a non-negative number");
        }
    }
    if !(cfg.oil_content_radius > 0.0) {
        issues.report(
            format!("{pointer}/oil_content_radius_m"),
            "must be a positive number",
        );
    }
    if !(cfg.oil_content_ref_density > 0.0) {
        issues.report(
            format!("{pointer}/oil_content_ref_density_per_m2"),
            "must be a positive number",
        );
    }
    cfg
}

fn load_control(root: &Map<String, Value>, issues: &mut Issues) -> ControlConfig {
    let defaults = ControlConfig::default();
    let Some(section) = field(root, "control") else {
        return defaults;
    };
    let Some(map) = as_object(section, "/control", issues) else {
        return defaults;
    };
    let p = "/control";
    deny_unknown(
        map,
        p,
        &[
            "enabled",
            "cadence_steps",
            "target_margin",
            "gain",
            "design_droplet_radius_m",
            "min_power_scale",
            "sensors",
        ],
        issues,
    );
    let cfg = ControlConfig {
        enabled: opt_bool(map, p, "enabled", defaults.enabled, issues),
        cadence_steps: opt_u64(
            map,
            p,
            "cadence_steps",
            defaults.cadence_steps as u64,
            issues,
        ) as u32,
        target_margin: opt_f64(map, p, "target_margin", defaults.target_margin, issues),
        gain: opt_f64(map, p, "gain", defaults.gain, issues),
        design_droplet_radius: opt_f64(
            map,
            p,
            "design_droplet_radius_m",
            defaults.design_droplet_radius,
            issues,
        ),
        min_power_scale: opt_f64(map, p, "min_power_scale", defaults.min_power_scale, issues),
        sensor: match field(map, "sensors") {
            Some(v) => load_sensors(v, "/control/sensors", issues),
            None => defaults.sensor,
        },
    };
    if let Err(message) = cfg.validate() {
        issues.report(p, message);
    }
    cfg
}

fn load_planner(root: &Map<String, Value>, issues: &mut Issues) -> PlannerConfig {
    let defaults = PlannerConfig::default();
    let Some(section) = field(root, "planner") else {
        return defaults;
    };
    let Some(map) = as_object(section, "/planner", issues) else {
        return defaults;
    };
    let p = "/planner";
    deny_unknown(
        map,
        p,
        &[
            "inflation",
            "overlap",
            "design_droplet_radius_m",
            "arc_degrees",
            "horizon_s",
        ],
        issues,
    );
    let cfg = PlannerConfig {
        inflation: opt_f64(map, p, "inflation", defaults.inflation, issues),
        overlap: opt_f64(map, p, "overlap", defaults.overlap, issues),
        design_droplet_radius: opt_f64(
            map,
            p,
            "design_droplet_radius_m",
            defaults.design_droplet_radius,
            issues,
        ),
        arc_degrees: opt_f64(map, p, "arc_degrees", defaults.arc_degrees, issues),
        horizon: opt_f64(map, p, "horizon_s", defaults.horizon, issues),
    };
    if let Err(message) = cfg.validate() {
        issues.report(p, message);
    }
    cfg
}

/// Parse a `levitators` array in scenario-file form, as plan output embeds.
pub fn units_from_value(value: &Value) -> Result<Vec<LevitatorUnit>, ScenarioError> {
    let mut issues = Issues(Vec::new());
    let Some(items) = value.as_array() else {
        issues.report("/levitators", "expected an array");
        return Err(ScenarioError::Invalid(issues.0));
    };
    let mut units = Vec::new();
    for (index, item) in items.iter().enumerate() {
        if let Some(unit) = load_unit(item, index, None, &mut issues) {
            units.push(unit);
        }
    }
    if issues.0.is_empty() {
        Ok(units)
    } else {
        Err(ScenarioError::Invalid(issues.0))
    }
}

/// Build a scenario from a parsed JSON document, collecting every violation.
pub fn scenario_from_value(value: &Value) -> Result<Scenario, ScenarioError> {
    let mut issues = Issues(Vec::new());
    let Some(root) = as_object(value, "", &mut issues) else {
        return Err(ScenarioError::Invalid(issues.0));
    };
    deny_unknown(
        root,
        "",
        &[
            "environment",
            "oil",
            "spill",
            "levitators",
            "sim",
            "control",
            "planner",
        ],
        &mut issues,
    );
    let env = load_environment(root, &mut issues);
    let oil = load_oil(root, &mut issues);
    let spill = load_spill(root, &mut issues);
    let units = load_levitators(root, env.as_ref().map(|e| e.sound_speed), &mut issues);
    let sim = load_sim(root, &mut issues);
    let control = load_control(root, &mut issues);
    let planner = load_planner(root, &mut issues);

    if let (Some(env), Some(oil)) = (env.as_ref(), oil.as_ref()) {
        if oil.density >= env.water_density {
            issues.report(
                "/oil/density_kgm3",
                format!(
                    "oil density {} must be below water density {} for a buoyant spill",
                    oil.density, env.water_density
                ),
            );
        }
    }

    if !issues.0.is_empty() {
        return Err(ScenarioError::Invalid(issues.0));
    }
    let (Some(env), Some(oil), Some(spill), Some(sim)) = (env, oil, spill, sim) else {
        unreachable!("missing sections must have reported issues");
    };
    Ok(Scenario {
        env,
        oil,
        spill,
        units,
        wind_dir: sim.wind_dir,
        dt: sim.dt,
        duration: sim.duration,
        domain_bounds: sim.domain_bounds,
        escape_edges: sim.escape_edges,
        pressure_level: sim.pressure_level,
        capture_distance: sim.capture_distance,
        control,
        planner,
    })
}

// ---------------------------------------------------------------------------
// emission

fn edges_to_value(edges: &EscapeEdges) -> Value {
    let mut names = Vec::new();
    if edges.north {
        names.push("north");
    }
    if edges.south {
        names.push("south");
    }
    if edges.east {
        names.push("east");
    }
    if edges.west {
        names.push("west");
    }
    json!(names)
}

fn radius_spec_to_value(spec: &RadiusSpec) -> Value {
    match spec {
        RadiusSpec::Fixed(r) => json!({ "fixed_m": r }),
        RadiusSpec::LogNormal { median, sigma } => {
            json!({ "lognormal": { "median_m": median, "sigma": sigma } })
        }
    }
}

/// Scenario-file form of one unit; shared by resolved-scenario emission and
/// plan output so plans paste straight into a `levitators` list.
pub fn unit_to_value(unit: &LevitatorUnit) -> Value {
    json!({
        "id": unit.id,
        "position_m": [unit.position.x, unit.position.y],
        "heading_rad": unit.heading,
        "num_transducers": unit.num_transducers,
        "power_per_transducer_w": unit.power_per_transducer,
        "frequency_hz": unit.frequency,
        "aperture_m2": unit.aperture_area,
        "reflector_gap_m": unit.reflector_gap,
        "depth_setpoint_m": unit.depth_setpoint,
        "power_scale": unit.power_scale,
        "max_power_scale": unit.max_power_scale,
    })
}

fn medium_label(sound_speed: f64) -> &'static str {
    if sound_speed == SOUND_SPEED_SEAWATER {
        "seawater"
    } else if sound_speed == SOUND_SPEED_AIR {
        "air"
    } else {
        "custom"
    }
}

/// The fully resolved document: every default applied and written out.
pub fn resolved_to_value(scenario: &Scenario) -> Value {
    json!({
        "environment": {
            "wind_speed_mps": scenario.env.wind_speed,
            "water_density_kgm3": scenario.env.water_density,
            "medium": medium_label(scenario.env.sound_speed),
            "sound_speed_mps": scenario.env.sound_speed,
            "gravity_mps2": scenario.env.gravity,
            "spreading_constant": scenario.env.spreading_constant,
        },
        "oil": {
            "name": scenario.oil.name,
            "density_kgm3": scenario.oil.density,
            "viscosity_pas": scenario.oil.viscosity,
        },
        "spill": {
            "origin_m": [scenario.spill.origin.x, scenario.spill.origin.y],
            "count": scenario.spill.count,
            "radius_m": radius_spec_to_value(&scenario.spill.radius_spec),
            "k_wind": scenario.spill.drift.k_wind,
            "d0_m2ps": scenario.spill.drift.d0,
        },
        "levitators": scenario.units.iter().map(unit_to_value).collect::<Vec<_>>(),
        "sim": {
            "wind_dir_rad": scenario.wind_dir,
            "dt_s": scenario.dt,
            "duration_s": scenario.duration,
            "domain_bounds_m": {
                "min_m": [scenario.domain_bounds.min.x, scenario.domain_bounds.min.y],
                "max_m": [scenario.domain_bounds.max.x, scenario.domain_bounds.max.y],
            },
            "escape_edges": edges_to_value(&scenario.escape_edges),
            "pressure_level": scenario.pressure_level.map(|l| l.label()),
            "capture_distance_m": scenario.capture_distance,
        },
        "control": {
            "enabled": scenario.control.enabled,
            "cadence_steps": scenario.control.cadence_steps,
            "target_margin": scenario.control.target_margin,
            "gain": scenario.control.gain,
            "design_droplet_radius_m": scenario.control.design_droplet_radius,
            "min_power_scale": scenario.control.min_power_scale,
            "sensors": {
                "pressure_sigma_pa": scenario.control.sensor.pressure_sigma,
                "temperature_sigma_c": scenario.control.sensor.temperature_sigma,
                "hydrophone_sigma_pa": scenario.control.sensor.hydrophone_sigma,
                "dissolved_oxygen_sigma_mgl": scenario.control.sensor.dissolved_oxygen_sigma,
                "oil_content_sigma": scenario.control.sensor.oil_content_sigma,
                "temperature_baseline_c": scenario.control.sensor.temperature_baseline,
                "dissolved_oxygen_baseline_mgl": scenario.control.sensor.dissolved_oxygen_baseline,
                "k_do_mgl": scenario.control.sensor.k_do,
                "oil_content_radius_m": scenario.control.sensor.oil_content_radius,
                "oil_content_ref_density_per_m2": scenario.control.sensor.oil_content_ref_density,
            },
        },
        "planner": {
            "inflation": scenario.planner.inflation,
            "overlap": scenario.planner.overlap,
            "design_droplet_radius_m": scenario.planner.design_droplet_radius,
            "arc_degrees": scenario.planner.arc_degrees,
            "horizon_s": scenario.planner.horizon,
        },
    })
}

/// Pretty-printed resolved scenario with a trailing newline.
pub fn emit_resolved(scenario: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(&resolved_to_value(scenario))
        .expect("resolved scenario serializes");
    text.push('\n');
    text
}

/// Hex SHA-256 of the resolved document; identifies a scenario in reports.
pub fn scenario_digest(scenario: &Scenario) -> String {
    let digest = Sha256::digest(emit_resolved(scenario).as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}
