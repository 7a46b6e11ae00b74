//! Sensor emulation and the per-unit power controller.
//!
//! Each unit carries a sensor pack: a pressure probe at its first node
//! plane, a hydrophone on the drive signal, a water thermometer, a dissolved
//! oxygen probe, and an oil-content analyzer reading the local free-droplet
//! density. Readings get Gaussian noise from a dedicated seed stream so runs
//! stay replayable.
//!
//! The controller holds the node pressure at `target_margin` times the
//! pressure required to trap the design droplet, acting multiplicatively on
//! `power_scale`:
//!
//! ```text
//! s <- clamp(s * (1 + gain * (margin*required - measured) / max(measured, eps)))
//! ```
//!
//! With a linear plant (measured proportional to `s`) the normalized error
//! contracts by `1 - gain` per step, so gain 0.5 halves it every cycle. A
//! unit at zero power is a fixed point of the law: the controller scales
//! power, it does not switch units on.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::field::{ArpField, LevitatorUnit};
use crate::geom::Vec3;
use crate::spill::SpillState;

/// Division guard in the control law, Pa.
pub const MEASUREMENT_EPSILON_PA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensorKind {
    Pressure,
    Temperature,
    Hydrophone,
    DissolvedOxygen,
    OilContent,
}

impl SensorKind {
    pub fn label(self) -> &'static str {
        match self {
            SensorKind::Pressure => "pressure_pa",
            SensorKind::Temperature => "temperature_c",
            SensorKind::Hydrophone => "hydrophone_pa",
            SensorKind::DissolvedOxygen => "dissolved_oxygen_mgl",
            SensorKind::OilContent => "oil_content",
        }
    }
}

/// One telemetry row. `aux` carries the hydrophone's frequency in Hz and is
/// empty for every other kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    pub unit_id: u32,
    pub kind: SensorKind,
    pub value: f64,
    pub aux: Option<f64>,
    pub timestamp: f64,
    pub noise_sigma: f64,
}

/// Noise levels and baselines for the sensor pack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub pressure_sigma: f64,
    pub temperature_sigma: f64,
    pub hydrophone_sigma: f64,
    pub dissolved_oxygen_sigma: f64,
    pub oil_content_sigma: f64,
    /// deg C
    pub temperature_baseline: f64,
    /// mg/L with no oil present
    pub dissolved_oxygen_baseline: f64,
    /// mg/L of DO depression per unit oil content
    pub k_do: f64,
    /// Horizontal radius of the oil-content sample, m.
    pub oil_content_radius: f64,
    /// Droplets per m^2 that saturate the analyzer at 1.0.
    pub oil_content_ref_density: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            pressure_sigma: 0.01,
            temperature_sigma: 0.1,
            hydrophone_sigma: 0.01,
            dissolved_oxygen_sigma: 0.05,
            oil_content_sigma: 0.005,
            temperature_baseline: 15.0,
            dissolved_oxygen_baseline: 8.0,
            k_do: 4.0,
            oil_content_radius: 1.0,
            oil_content_ref_density: 100.0,
        }
    }
}

impl SensorConfig {
    /// All noise sigmas zero; baselines unchanged.
    pub fn noiseless() -> Self {
        SensorConfig {
            pressure_sigma: 0.0,
            temperature_sigma: 0.0,
            hydrophone_sigma: 0.0,
            dissolved_oxygen_sigma: 0.0,
            oil_content_sigma: 0.0,
            ..SensorConfig::default()
        }
    }
}

/// Per-unit controller parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub unit_id: u32,
    /// Desired local-ARP over required-ARP ratio, >= 1.
    pub target_margin: f64,
    pub gain: f64,
    pub min_power_scale: f64,
    pub max_power_scale: f64,
}

/// Scenario-level controller block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub enabled: bool,
    /// Run the controller every this many simulation steps.
    pub cadence_steps: u32,
    pub target_margin: f64,
    pub gain: f64,
    /// m; sets the pressure setpoint via the trapping threshold.
    pub design_droplet_radius: f64,
    pub min_power_scale: f64,
    pub sensor: SensorConfig,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            enabled: false,
            cadence_steps: 10,
            target_margin: 1.25,
            gain: 0.5,
            design_droplet_radius: 1e-3,
            min_power_scale: 0.0,
            sensor: SensorConfig::default(),
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.cadence_steps == 0 {
            return Err("control cadence must be at least 1 step".to_string());
        }
        if !(self.target_margin >= 1.0) {
            return Err(format!(
                "target margin must be >= 1, got {}",
                self.target_margin
            ));
        }
        if !(self.gain > 0.0) {
            return Err(format!(
                "controller gain must be positive, got {}",
                self.gain
            ));
        }
        if !(self.design_droplet_radius > 0.0) {
            return Err(format!(
                "design droplet radius must be positive, got {}",
                self.design_droplet_radius
            ));
        }
        Ok(())
    }
}

/// Read the full sensor pack of one unit. Draws exactly five normals per
/// call in a fixed order, so telemetry is reproducible per seed stream.
pub fn sample_sensors(
    spill: &SpillState,
    field: &ArpField,
    unit_idx: usize,
    cfg: &SensorConfig,
    timestamp: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<SensorReading> {
    let unit: &LevitatorUnit = &field.units()[unit_idx];
    let mut noise = |sigma: f64| -> f64 {
        let n: f64 = StandardNormal.sample(rng);
        sigma * n
    };

    // probe at the first node plane, on the unit axis
    let probe = Vec3::new(
        unit.position.x,
        unit.position.y,
        field.node_depth(unit_idx, 0),
    );
    let pressure = field.arp_at(probe) + noise(cfg.pressure_sigma);
    let temperature = cfg.temperature_baseline + noise(cfg.temperature_sigma);
    let hydrophone = field.peak_arp(unit_idx) + noise(cfg.hydrophone_sigma);

    let area = std::f64::consts::PI * cfg.oil_content_radius * cfg.oil_content_radius;
    let nearby = spill
        .droplets
        .iter()
        .filter(|d| {
            d.is_free()
                && d.position.surface().distance_sq(unit.position)
                    <= cfg.oil_content_radius * cfg.oil_content_radius
        })
        .count();
    let density = nearby as f64 / area;
    let content = (density / cfg.oil_content_ref_density).clamp(0.0, 1.0);
    let dissolved_oxygen =
        cfg.dissolved_oxygen_baseline - cfg.k_do * content + noise(cfg.dissolved_oxygen_sigma);
    let oil_content = (content + noise(cfg.oil_content_sigma)).clamp(0.0, 1.0);

    vec![
        SensorReading {
            unit_id: unit.id,
            kind: SensorKind::Pressure,
            value: pressure,
            aux: None,
            timestamp,
            noise_sigma: cfg.pressure_sigma,
        },
        SensorReading {
            unit_id: unit.id,
            kind: SensorKind::Temperature,
            value: temperature,
            aux: None,
            timestamp,
            noise_sigma: cfg.temperature_sigma,
        },
        SensorReading {
            unit_id: unit.id,
            kind: SensorKind::Hydrophone,
            value: hydrophone,
            aux: Some(unit.frequency),
            timestamp,
            noise_sigma: cfg.hydrophone_sigma,
        },
        SensorReading {
            unit_id: unit.id,
            kind: SensorKind::DissolvedOxygen,
            value: dissolved_oxygen,
            aux: None,
            timestamp,
            noise_sigma: cfg.dissolved_oxygen_sigma,
        },
        SensorReading {
            unit_id: unit.id,
            kind: SensorKind::OilContent,
            value: oil_content,
            aux: None,
            timestamp,
            noise_sigma: cfg.oil_content_sigma,
        },
    ]
}

/// One proportional update from a pressure reading. Panics on a non-pressure
/// reading; the caller picks the right row out of the pack.
pub fn control_step(
    ctrl: &ControllerState,
    reading: &SensorReading,
    required: f64,
    unit: &LevitatorUnit,
) -> LevitatorUnit {
    assert_eq!(
        reading.kind,
        SensorKind::Pressure,
        "controller consumes pressure readings"
    );
    let measured = reading.value;
    let error = ctrl.target_margin * required - measured;
    let correction = 1.0 + ctrl.gain * error / measured.max(MEASUREMENT_EPSILON_PA);
    let mut updated = unit.clone();
    updated.power_scale =
        (unit.power_scale * correction).clamp(ctrl.min_power_scale, ctrl.max_power_scale);
    updated
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ArpField;
    use crate::geom::Vec2;
    use crate::physics::{Environment, OilType};
    use crate::spill::{RadiusSpec, SpillState};
    use rand::SeedableRng;

    fn air() -> Environment {
        Environment::new(0.0, 1000.0, 343.0, 9.81, 1.0).unwrap()
    }

    fn setup() -> (SpillState, ArpField) {
        let oil = OilType::new("light", 700.0, 0.05).unwrap();
        let spill = SpillState::seed(Vec2::ZERO, 100, &RadiusSpec::Fixed(1e-3), oil, 3).unwrap();
        let mut unit = LevitatorUnit::bench(0, Vec2::new(50.0, 0.0));
        unit.power_scale = 6.0;
        let field = ArpField::new(vec![unit], air()).unwrap();
        (spill, field)
    }

    fn reading(value: f64) -> SensorReading {
        SensorReading {
            unit_id: 0,
            kind: SensorKind::Pressure,
            value,
            aux: None,
            timestamp: 0.0,
            noise_sigma: 0.0,
        }
    }

    fn ctrl() -> ControllerState {
        ControllerState {
            unit_id: 0,
            target_margin: 1.25,
            gain: 0.5,
            min_power_scale: 0.0,
            max_power_scale: 32.0,
        }
    }

    #[test]
    fn noiseless_pressure_reading_equals_field() {
        let (spill, field) = setup();
        let cfg = SensorConfig::noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let readings = sample_sensors(&spill, &field, 0, &cfg, 0.0, &mut rng);
        let pressure = readings
            .iter()
            .find(|r| r.kind == SensorKind::Pressure)
            .unwrap();
        let probe = Vec3::new(50.0, 0.0, field.node_depth(0, 0));
        assert_eq!(pressure.value, field.arp_at(probe));
        let hydro = readings
            .iter()
            .find(|r| r.kind == SensorKind::Hydrophone)
            .unwrap();
        assert_eq!(hydro.value, field.peak_arp(0));
        assert_eq!(hydro.aux, Some(40_000.0));
    }

    #[test]
    fn no_droplets_nearby_means_clean_water_readings() {
        let (spill, field) = setup(); // unit 50 m from the spill, sample radius 1 m
        let cfg = SensorConfig::noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let readings = sample_sensors(&spill, &field, 0, &cfg, 0.0, &mut rng);
        let content = readings
            .iter()
            .find(|r| r.kind == SensorKind::OilContent)
            .unwrap();
        assert_eq!(content.value, 0.0);
        let oxygen = readings
            .iter()
            .find(|r| r.kind == SensorKind::DissolvedOxygen)
            .unwrap();
        assert_eq!(oxygen.value, cfg.dissolved_oxygen_baseline);
    }

    #[test]
    fn noisy_sample_mean_obeys_clt() {
        let (spill, field) = setup();
        let cfg = SensorConfig {
            pressure_sigma: 0.5,
            ..SensorConfig::noiseless()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let truth = {
            let mut quiet = ChaCha8Rng::seed_from_u64(9);
            sample_sensors(
                &spill,
                &field,
                0,
                &SensorConfig::noiseless(),
                0.0,
                &mut quiet,
            )[0]
            .value
        };
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| sample_sensors(&spill, &field, 0, &cfg, 0.0, &mut rng)[0].value)
            .sum::<f64>()
            / n as f64;
        // 3 sigma of the sample mean: 3 * 0.5 / sqrt(1e4)
        assert!(
            (mean - truth).abs() < 3.0 * 0.5 / 100.0,
            "mean {mean} vs {truth}"
        );
    }

    #[test]
    fn sensors_are_deterministic_per_seed() {
        let (spill, field) = setup();
        let cfg = SensorConfig::default();
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        let ra = sample_sensors(&spill, &field, 0, &cfg, 1.0, &mut a);
        let rb = sample_sensors(&spill, &field, 0, &cfg, 1.0, &mut b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn control_fixed_point_at_target() {
        let unit = LevitatorUnit::bench(0, Vec2::ZERO);
        let required = 3.924;
        let at_target = reading(1.25 * required);
        let updated = control_step(&ctrl(), &at_target, required, &unit);
        assert_eq!(updated.power_scale, unit.power_scale);
    }

    #[test]
    fn control_raises_power_when_below_target() {
        let unit = LevitatorUnit::bench(0, Vec2::ZERO);
        let required = 3.924;
        let low = reading(0.5 * 1.25 * required);
        let updated = control_step(&ctrl(), &low, required, &unit);
        assert!(updated.power_scale > unit.power_scale);
    }

    #[test]
    fn control_respects_bounds() {
        let mut unit = LevitatorUnit::bench(0, Vec2::ZERO);
        unit.power_scale = 31.0;
        let required = 3.924;
        let way_low = reading(0.01);
        let updated = control_step(&ctrl(), &way_low, required, &unit);
        assert_eq!(updated.power_scale, 32.0);

        // a huge reading shrinks power by at most (1 - gain) per step,
        // so the floor clamp engages on the way down
        let floored = ControllerState {
            min_power_scale: 0.4,
            ..ctrl()
        };
        unit.power_scale = 0.5;
        let way_high = reading(1e6);
        let updated = control_step(&floored, &way_high, required, &unit);
        assert_eq!(updated.power_scale, 0.4);
    }

    #[test]
    fn noiseless_loop_converges_and_matches_scalar_oracle() {
        // linear plant: measured = slope * power_scale
        let slope = 0.8163265306122449;
        let required = 3.924;
        let target = 1.25 * required;
        let controller = ctrl();
        let mut unit = LevitatorUnit::bench(0, Vec2::ZERO);
        unit.power_scale = 0.5 * target / slope; // start at half the setpoint

        // independent oracle on the normalized iteration x <- x + g(1 - x)
        let mut oracle_x = 0.5;
        let mut steps_to_converge = None;
        for step in 1..=50 {
            let measured = slope * unit.power_scale;
            unit = control_step(&controller, &reading(measured), required, &unit);
            oracle_x += 0.5 * (1.0 - oracle_x);
            let x = slope * unit.power_scale / target;
            assert!(
                (x - oracle_x).abs() < 1e-9,
                "step {step}: {x} vs oracle {oracle_x}"
            );
            if steps_to_converge.is_none() && (x - 1.0).abs() <= 0.02 {
                steps_to_converge = Some(step);
            }
        }
        let steps = steps_to_converge.expect("loop must converge within 50 steps");
        assert!(steps <= 50, "took {steps}");
        let final_measured = slope * unit.power_scale;
        assert!(((final_measured - target) / target).abs() < 0.02);
    }

    #[test]
    fn error_shrinks_every_step_for_unit_gain_range() {
        for gain in [0.25, 0.5, 0.75, 1.0] {
            let slope = 2.0;
            let required = 3.924;
            let target = 1.25 * required;
            let controller = ControllerState { gain, ..ctrl() };
            let mut unit = LevitatorUnit::bench(0, Vec2::ZERO);
            unit.power_scale = 0.3 * target / slope;
            let mut last_error = f64::INFINITY;
            for _ in 0..20 {
                let measured = slope * unit.power_scale;
                let error = (measured - target).abs();
                assert!(error < last_error || error == 0.0, "gain {gain}");
                last_error = error;
                unit = control_step(&controller, &reading(measured), required, &unit);
            }
        }
    }
}
