//! Couples the spill transport with the levitator field: per-step trapping
//! and release, escape accounting, report assembly, and the chained
//! four-trial bench protocol.
//!
//! Step ordering is fixed so runs replay exactly: controller update (on its
//! cadence), then droplet motion, then trap checks, then the escape sweep,
//! then the series sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{
    control_step, sample_sensors, ControlConfig, ControllerState, SensorKind, SensorReading,
};
use crate::field::{ArpField, FieldError, LevitatorUnit};
use crate::geom::{Rect, Vec2, Vec3};
use crate::physics::{required_trapping_pressure, Environment, OilType};
use crate::planner::PlannerConfig;
use crate::spill::{DriftParams, Droplet, DropletState, RadiusSpec, SpillError, SpillState};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid scenario:\n{}", .0.join("\n"))]
    InvalidScenario(Vec<String>),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Spill(#[from] SpillError),
}

/// Bench pressure presets: multipliers applied as `power_scale` on every
/// unit. Low is the smallest preset that clears the 1 mm droplet threshold
/// on the bench unit (6 x 0.816 Pa ~ 4.9 Pa against 3.924 Pa required).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PressureLevel {
    None,
    Low,
    Medium,
    High,
}

impl PressureLevel {
    pub fn multiplier(self) -> f64 {
        match self {
            PressureLevel::None => 0.0,
            PressureLevel::Low => 6.0,
            PressureLevel::Medium => 12.0,
            PressureLevel::High => 24.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PressureLevel::None => "none",
            PressureLevel::Low => "low",
            PressureLevel::Medium => "medium",
            PressureLevel::High => "high",
        }
    }
}

/// Which domain edges absorb droplets. A droplet crossing a closed edge is
/// clamped back to the wall instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeEdges {
    pub north: bool,
    pub south: bool,
    pub east: bool,
    pub west: bool,
}

impl Default for EscapeEdges {
    fn default() -> Self {
        EscapeEdges {
            north: true,
            south: true,
            east: true,
            west: true,
        }
    }
}

/// Spill seeding block of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpillConfig {
    pub origin: Vec2,
    pub count: u32,
    pub radius_spec: RadiusSpec,
    pub drift: DriftParams,
}

/// A fully resolved simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub env: Environment,
    pub oil: OilType,
    pub spill: SpillConfig,
    pub units: Vec<LevitatorUnit>,
    /// Wind direction, radians from +x.
    pub wind_dir: f64,
    /// s
    pub dt: f64,
    /// s
    pub duration: f64,
    pub domain_bounds: Rect,
    pub escape_edges: EscapeEdges,
    pub pressure_level: Option<PressureLevel>,
    /// Axial half-width of a node's capture basin, m. `None` means a
    /// quarter wavelength per unit.
    pub capture_distance: Option<f64>,
    pub control: ControlConfig,
    pub planner: PlannerConfig,
}

impl Scenario {
    /// Engine-level validation; returns every violation, not just the first.
    pub fn validate(&self) -> Result<(), RunError> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0) {
            problems.push(format!("dt must be positive, got {}", self.dt));
        }
        if self.duration != 0.0 && self.duration < self.dt {
            problems.push(format!(
                "duration must be 0 or at least dt, got {} vs dt {}",
                self.duration, self.dt
            ));
        }
        if !self.domain_bounds.is_valid() {
            problems.push("domain bounds are degenerate".to_string());
        }
        if self.spill.count == 0 {
            problems.push("spill count must be at least 1".to_string());
        }
        if self.oil.density >= self.env.water_density {
            problems.push(format!(
                "oil density {} must be below water density {} for a buoyant spill",
                self.oil.density, self.env.water_density
            ));
        }
        if let Some(d) = self.capture_distance {
            if !(d > 0.0) {
                problems.push(format!("capture distance must be positive, got {d}"));
            }
        }
        for unit in &self.units {
            if let Err(e) = unit.validate() {
                problems.push(e.to_string());
            } else if let Err(e) = crate::field::node_geometry(unit, &self.env) {
                problems.push(e.to_string());
            }
        }
        if let Err(e) = self.control.validate() {
            problems.push(e);
        }
        if let Err(e) = self.planner.validate() {
            problems.push(e);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(RunError::InvalidScenario(problems))
        }
    }
}

/// One row of the trapped/escaped/free time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub trapped_fraction: f64,
    pub escaped_fraction: f64,
    pub free_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTrapCount {
    pub unit_id: u32,
    pub count: u64,
}

/// Everything a finished run reports. Serializes deterministically, so
/// seed-matched runs produce byte-identical documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub scenario_digest: String,
    pub droplet_count: u32,
    pub steps: u64,
    pub final_free: u64,
    pub final_trapped: u64,
    pub final_escaped: u64,
    pub per_unit_trapped: Vec<UnitTrapCount>,
    pub samples: Vec<Sample>,
}

/// One row of the chained bench protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub pressure_level: String,
    pub initial_trapped_pct: f64,
    pub final_trapped_pct: f64,
    pub duration_min: f64,
}

/// Result of a trap check: the droplet's next state and position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapDecision {
    pub state: DropletState,
    pub position: Vec3,
}

/// Apply the threshold rule to one droplet.
///
/// A free droplet is captured when it sits within the capture distance of
/// some unit's node plane and the local field meets the pressure needed to
/// hold its radius; it then snaps to the nearest point of that node plane
/// within the unit's beam radius. A trapped droplet is released when the
/// field at its node falls below that pressure.
pub fn trap_check(
    droplet: &Droplet,
    oil: &OilType,
    field: &ArpField,
    capture_distance: Option<f64>,
) -> TrapDecision {
    let unchanged = TrapDecision {
        state: droplet.state,
        position: droplet.position,
    };
    let required = match required_trapping_pressure(droplet.radius, oil, field.medium()) {
        Ok(p) => p,
        Err(_) => return unchanged,
    };
    match droplet.state {
        DropletState::Escaped => unchanged,
        DropletState::Trapped { .. } => {
            let local = field.arp_at(droplet.position);
            if local < required {
                TrapDecision {
                    state: DropletState::Free,
                    position: droplet.position,
                }
            } else {
                unchanged
            }
        }
        DropletState::Free => {
            let local = field.arp_at(droplet.position);
            if local <= 0.0 || local < required {
                return unchanged;
            }
            // pick the closest-driven unit whose node basin contains us
            let mut best: Option<(usize, usize, f64)> = None;
            for idx in 0..field.units().len() {
                let geom = field.node_geometry(idx);
                let capture = capture_distance.unwrap_or(geom.spacing / 2.0);
                let unit = &field.units()[idx];
                let offset = unit.reflector_depth() - droplet.position.z;
                let (node_idx, node_offset) = geom.nearest_node(offset);
                if (offset - node_offset).abs() > capture {
                    continue;
                }
                let contribution = field.unit_contribution(idx, droplet.position);
                if contribution <= 0.0 {
                    continue;
                }
                match best {
                    Some((_, _, c)) if c >= contribution => {}
                    _ => best = Some((idx, node_idx, contribution)),
                }
            }
            let Some((unit_idx, node_idx, _)) = best else {
                return unchanged;
            };
            let unit = &field.units()[unit_idx];
            let node_z = field.node_depth(unit_idx, node_idx);
            let rs = field.radial_scale(unit_idx);
            let delta = droplet.position.surface() - unit.position;
            let d = delta.norm();
            let snapped_xy = if d <= rs || d == 0.0 {
                droplet.position.surface()
            } else {
                unit.position + delta.scale(rs / d)
            };
            TrapDecision {
                state: DropletState::Trapped {
                    unit: unit.id,
                    node: node_idx as u32,
                },
                position: Vec3::new(snapped_xy.x, snapped_xy.y, node_z),
            }
        }
    }
}

/// A running simulation. Keeps the spill, the field, and the series so the
/// chained protocol can switch power levels mid-stream.
pub struct Simulation {
    scenario: Scenario,
    seed: u64,
    /// Digest of the scenario as handed in, before presets or control
    /// touch any power scale.
    digest: String,
    field: ArpField,
    spill: SpillState,
    sensor_rng: ChaCha8Rng,
    step_index: u64,
    samples: Vec<Sample>,
    telemetry: Vec<SensorReading>,
}

impl Simulation {
    pub fn new(scenario: Scenario, seed: u64) -> Result<Self, RunError> {
        scenario.validate()?;
        let digest = crate::scenario::scenario_digest(&scenario);
        let mut scenario = scenario;
        if let Some(level) = scenario.pressure_level {
            apply_power_scale(&mut scenario.units, level.multiplier());
        }
        let mut spill = SpillState::seed(
            scenario.spill.origin,
            scenario.spill.count,
            &scenario.spill.radius_spec,
            scenario.oil.clone(),
            seed,
        )?;
        spill.drift = scenario.spill.drift;
        let field = ArpField::new(scenario.units.clone(), scenario.env.clone())?;
        let mut sensor_rng = ChaCha8Rng::seed_from_u64(seed);
        sensor_rng.set_stream(1); // keep sensor noise off the spill's stream
        let mut sim = Simulation {
            scenario,
            seed,
            digest,
            field,
            spill,
            sensor_rng,
            step_index: 0,
            samples: Vec::new(),
            telemetry: Vec::new(),
        };
        sim.record_sample();
        Ok(sim)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn spill(&self) -> &SpillState {
        &self.spill
    }

    pub fn field(&self) -> &ArpField {
        &self.field
    }

    pub fn telemetry(&self) -> &[SensorReading] {
        &self.telemetry
    }

    /// Set every unit's power multiplier and rebuild the field.
    pub fn set_pressure_level(&mut self, level: PressureLevel) -> Result<(), RunError> {
        apply_power_scale(&mut self.scenario.units, level.multiplier());
        self.rebuild_field()
    }

    fn rebuild_field(&mut self) -> Result<(), RunError> {
        self.field = ArpField::new(self.scenario.units.clone(), self.scenario.env.clone())?;
        Ok(())
    }

    fn record_sample(&mut self) {
        let (free, trapped, escaped) = self.spill.state_counts();
        let n = self.spill.droplets.len() as f64;
        self.samples.push(Sample {
            t: self.spill.time,
            trapped_fraction: trapped as f64 / n,
            escaped_fraction: escaped as f64 / n,
            free_fraction: free as f64 / n,
        });
    }

    fn control_due(&self) -> bool {
        self.scenario.control.enabled
            && self
                .step_index
                .is_multiple_of(self.scenario.control.cadence_steps as u64)
    }

    fn run_control(&mut self) -> Result<(), RunError> {
        let required = required_trapping_pressure(
            self.scenario.control.design_droplet_radius,
            &self.scenario.oil,
            &self.scenario.env,
        )
        .map_err(|e| RunError::InvalidScenario(vec![e.to_string()]))?;
        let mut changed = false;
        let mut new_units = self.scenario.units.clone();
        for (idx, unit) in self.field.units().iter().enumerate() {
            let readings = sample_sensors(
                &self.spill,
                &self.field,
                idx,
                &self.scenario.control.sensor,
                self.spill.time,
                &mut self.sensor_rng,
            );
            let pressure = readings
                .iter()
                .find(|r| r.kind == SensorKind::Pressure)
                .expect("sensor pack always includes pressure");
            let ctrl = ControllerState {
                unit_id: unit.id,
                target_margin: self.scenario.control.target_margin,
                gain: self.scenario.control.gain,
                min_power_scale: self.scenario.control.min_power_scale,
                max_power_scale: unit.max_power_scale,
            };
            let updated = control_step(&ctrl, pressure, required, unit);
            if updated.power_scale != unit.power_scale {
                changed = true;
            }
            new_units[idx] = updated;
            self.telemetry.extend(readings);
        }
        if changed {
            self.scenario.units = new_units;
            self.rebuild_field()?;
        }
        Ok(())
    }

    /// One full step: control cadence, motion, trap checks, escape sweep,
    /// then sampling.
    pub fn step_once(&mut self) -> Result<(), RunError> {
        if self.control_due() {
            self.run_control()?;
        }
        self.spill
            .step(&self.scenario.env, self.scenario.wind_dir, self.scenario.dt);
        let capture = self.scenario.capture_distance;
        for i in 0..self.spill.droplets.len() {
            let decision = trap_check(
                &self.spill.droplets[i],
                &self.scenario.oil,
                &self.field,
                capture,
            );
            self.spill.droplets[i].state = decision.state;
            self.spill.droplets[i].position = decision.position;
        }
        self.apply_escape();
        self.step_index += 1;
        self.record_sample();
        Ok(())
    }

    fn apply_escape(&mut self) {
        let bounds = self.scenario.domain_bounds;
        let edges = self.scenario.escape_edges;
        for droplet in &mut self.spill.droplets {
            if droplet.state != DropletState::Free {
                continue;
            }
            let p = &mut droplet.position;
            let mut escaped = false;
            if p.x < bounds.min.x {
                if edges.west {
                    escaped = true;
                } else {
                    p.x = bounds.min.x;
                }
            }
            if p.x > bounds.max.x {
                if edges.east {
                    escaped = true;
                } else {
                    p.x = bounds.max.x;
                }
            }
            if p.y < bounds.min.y {
                if edges.south {
                    escaped = true;
                } else {
                    p.y = bounds.min.y;
                }
            }
            if p.y > bounds.max.y {
                if edges.north {
                    escaped = true;
                } else {
                    p.y = bounds.max.y;
                }
            }
            if escaped {
                droplet.state = DropletState::Escaped;
            }
        }
    }

    /// Advance by `duration` seconds (floor(duration/dt) whole steps).
    pub fn run_for(&mut self, duration: f64) -> Result<(), RunError> {
        let steps = (duration / self.scenario.dt + 1e-9).floor() as u64;
        for _ in 0..steps {
            self.step_once()?;
        }
        Ok(())
    }

    pub fn trapped_fraction(&self) -> f64 {
        let (_, trapped, _) = self.spill.state_counts();
        trapped as f64 / self.spill.droplets.len() as f64
    }

    pub fn report(&self) -> SimReport {
        let (free, trapped, escaped) = self.spill.state_counts();
        let mut per_unit: Vec<UnitTrapCount> = self
            .scenario
            .units
            .iter()
            .map(|u| UnitTrapCount {
                unit_id: u.id,
                count: 0,
            })
            .collect();
        for droplet in &self.spill.droplets {
            if let DropletState::Trapped { unit, .. } = droplet.state {
                if let Some(entry) = per_unit.iter_mut().find(|e| e.unit_id == unit) {
                    entry.count += 1;
                }
            }
        }
        SimReport {
            seed: self.seed,
            scenario_digest: self.digest.clone(),
            droplet_count: self.spill.droplets.len() as u32,
            steps: self.step_index,
            final_free: free as u64,
            final_trapped: trapped as u64,
            final_escaped: escaped as u64,
            per_unit_trapped: per_unit,
            samples: self.samples.clone(),
        }
    }
}

fn apply_power_scale(units: &mut [LevitatorUnit], scale: f64) {
    for unit in units {
        unit.power_scale = scale.min(unit.max_power_scale);
    }
}

/// Run a scenario to completion.
pub fn run(scenario: &Scenario, seed: u64) -> Result<SimReport, RunError> {
    let mut sim = Simulation::new(scenario.clone(), seed)?;
    sim.run_for(scenario.duration)?;
    Ok(sim.report())
}

/// Trial plan of the chained bench protocol: pressure level and minutes.
pub const POC_TRIALS: [(PressureLevel, f64); 4] = [
    (PressureLevel::None, 30.0),
    (PressureLevel::Low, 20.0),
    (PressureLevel::Medium, 10.0),
    (PressureLevel::High, 10.0),
];

/// Run the chained four-trial protocol: each trial starts from the previous
/// trial's droplet states, only the pressure preset changes.
pub fn replicate_poc(base: &Scenario, seed: u64) -> Result<Vec<TrialRecord>, RunError> {
    replicate_poc_detailed(base, seed).map(|(records, _)| records)
}

/// As [`replicate_poc`], but also returns the report covering the whole
/// chained run.
pub fn replicate_poc_detailed(
    base: &Scenario,
    seed: u64,
) -> Result<(Vec<TrialRecord>, SimReport), RunError> {
    let mut scenario = base.clone();
    scenario.pressure_level = Some(PressureLevel::None);
    let mut sim = Simulation::new(scenario, seed)?;
    let mut records = Vec::with_capacity(POC_TRIALS.len());
    for (level, minutes) in POC_TRIALS {
        sim.set_pressure_level(level)?;
        let initial = sim.trapped_fraction() * 100.0;
        sim.run_for(minutes * 60.0)?;
        let fin = sim.trapped_fraction() * 100.0;
        records.push(TrialRecord {
            pressure_level: level.label().to_string(),
            initial_trapped_pct: initial,
            final_trapped_pct: fin,
            duration_min: minutes,
        });
    }
    Ok((records, sim.report()))
}
