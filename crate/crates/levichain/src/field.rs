//! Levitator units and the effective radiation-pressure field they produce.
//!
//! One unit is a floated transducer array facing a reflector plate below it;
//! the standing wave that forms in the gap has node planes every half
//! wavelength, starting a quarter wavelength off the rigid reflector. The
//! effective field of a unit is separable: an axial cos^2 profile whose
//! maxima sit exactly on the node planes, times a radial Gaussian with scale
//! `sqrt(aperture_area / pi)`, with the on-node peak pinned to `2I/c` for
//! the unit's driven power.
//!
//! Units in a chain are independent oscillators with no phase locking, so a
//! multi-unit field takes the maximum of the per-unit contributions rather
//! than their sum; summing incoherent pressures would fabricate constructive
//! gain.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::geom::{Vec2, Vec3};
use crate::physics::{acoustic_intensity, arp_from_intensity, Environment, PhysicsError};

/// Allowed transducer drive band, Hz.
pub const FREQUENCY_MIN_HZ: f64 = 20_000.0;
pub const FREQUENCY_MAX_HZ: f64 = 100_000.0;

/// Typical levitation band, Hz; scenario defaults live here.
pub const FREQUENCY_BAND_DEFAULT_HZ: (f64, f64) = (40_000.0, 60_000.0);

/// Default ceiling on the feedback-controlled power multiplier.
pub const DEFAULT_MAX_POWER_SCALE: f64 = 32.0;

/// Beyond this many radial scales a unit's Gaussian term is below f64
/// noise, so field queries skip it. Distance-based, hence invariant under
/// power scaling.
const RADIAL_CUTOFF_SCALES: f64 = 7.0;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("unit {unit_id}: no trapping node fits (reflector gap {gap} m < quarter wavelength {quarter} m)")]
    NoTrappingNode {
        unit_id: u32,
        gap: f64,
        quarter: f64,
    },
    #[error("unit {unit_id}: frequency {frequency} Hz outside allowed band [{FREQUENCY_MIN_HZ}, {FREQUENCY_MAX_HZ}] Hz")]
    FrequencyOutOfBand { unit_id: u32, frequency: f64 },
    #[error(
        "target spacing {target} m unreachable within the frequency band; nearest achievable is {nearest} m at {clamped_frequency} Hz"
    )]
    SpacingUnreachable {
        target: f64,
        nearest: f64,
        clamped_frequency: f64,
    },
    #[error("unit {unit_id}: {source}")]
    Physics {
        unit_id: u32,
        #[source]
        source: PhysicsError,
    },
    #[error("unit {unit_id}: invalid {name}: {value}")]
    InvalidUnit {
        unit_id: u32,
        name: &'static str,
        value: f64,
    },
}

/// One semi-submersible levitator.
///
/// The transducer plane floats at `depth_setpoint` below the surface and the
/// reflector plate hangs `reflector_gap` below that. `power_scale` is the
/// feedback-controlled multiplier on the total transducer power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevitatorUnit {
    pub id: u32,
    pub position: Vec2,
    pub heading: f64,
    pub num_transducers: u32,
    pub power_per_transducer: f64,
    pub frequency: f64,
    pub aperture_area: f64,
    pub reflector_gap: f64,
    pub depth_setpoint: f64,
    pub power_scale: f64,
    pub max_power_scale: f64,
}

impl LevitatorUnit {
    /// Bench-style unit: 14 transducers of 1 W at 40 kHz over 0.1 m^2.
    pub fn bench(id: u32, position: Vec2) -> Self {
        LevitatorUnit {
            id,
            position,
            heading: 0.0,
            num_transducers: 14,
            power_per_transducer: 1.0,
            frequency: 40_000.0,
            aperture_area: 0.1,
            reflector_gap: 0.05,
            depth_setpoint: 0.0,
            power_scale: 1.0,
            max_power_scale: DEFAULT_MAX_POWER_SCALE,
        }
    }

    /// Total driven power including the feedback multiplier, W.
    pub fn driven_power(&self) -> f64 {
        self.power_scale * self.num_transducers as f64 * self.power_per_transducer
    }

    /// Effective beam radius of the aperture, m.
    pub fn radial_scale(&self) -> f64 {
        (self.aperture_area / PI).sqrt()
    }

    /// Depth of the transducer plane, m below the surface.
    pub fn transducer_depth(&self) -> f64 {
        self.depth_setpoint
    }

    /// Depth of the reflector plate, m below the surface.
    pub fn reflector_depth(&self) -> f64 {
        self.depth_setpoint + self.reflector_gap
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let bad = |name, value| {
            Err(FieldError::InvalidUnit {
                unit_id: self.id,
                name,
                value,
            })
        };
        if self.num_transducers < 1 {
            return bad("num_transducers", self.num_transducers as f64);
        }
        if !(self.power_per_transducer > 0.0) {
            return bad("power_per_transducer", self.power_per_transducer);
        }
        if !(self.aperture_area > 0.0) {
            return bad("aperture_area", self.aperture_area);
        }
        if !(self.reflector_gap > 0.0) {
            return bad("reflector_gap", self.reflector_gap);
        }
        if self.depth_setpoint < 0.0 {
            return bad("depth_setpoint", self.depth_setpoint);
        }
        if !(self.frequency >= FREQUENCY_MIN_HZ && self.frequency <= FREQUENCY_MAX_HZ) {
            return Err(FieldError::FrequencyOutOfBand {
                unit_id: self.id,
                frequency: self.frequency,
            });
        }
        if !(self.max_power_scale > 0.0) {
            return bad("max_power_scale", self.max_power_scale);
        }
        if !(self.power_scale >= 0.0 && self.power_scale <= self.max_power_scale) {
            return bad("power_scale", self.power_scale);
        }
        Ok(())
    }
}

/// Node-plane layout inside one unit's gap.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGeometry {
    /// Distances from the reflector plate along the gap axis, ascending;
    /// all strictly inside (0, reflector_gap).
    pub node_offsets: Vec<f64>,
    /// Half wavelength, m.
    pub spacing: f64,
}

impl NodeGeometry {
    /// Index and offset of the node plane nearest an offset-from-reflector.
    pub fn nearest_node(&self, offset: f64) -> (usize, f64) {
        // offsets are quarter + k*spacing; invert directly
        let quarter = self.spacing / 2.0;
        let k = ((offset - quarter) / self.spacing).round().max(0.0) as usize;
        let k = k.min(self.node_offsets.len() - 1);
        (k, self.node_offsets[k])
    }
}

/// Node planes for one unit: spacing `c/(2f)`, first plane a quarter
/// wavelength off the rigid reflector, enumerated until the gap runs out.
pub fn node_geometry(unit: &LevitatorUnit, env: &Environment) -> Result<NodeGeometry, FieldError> {
    let wavelength = env.sound_speed / unit.frequency;
    let spacing = env.sound_speed / (2.0 * unit.frequency);
    let quarter = wavelength / 4.0;
    if unit.reflector_gap < quarter {
        return Err(FieldError::NoTrappingNode {
            unit_id: unit.id,
            gap: unit.reflector_gap,
            quarter,
        });
    }
    let mut node_offsets = Vec::new();
    let mut k = 0usize;
    loop {
        let offset = quarter + k as f64 * spacing;
        if offset >= unit.reflector_gap {
            break;
        }
        node_offsets.push(offset);
        k += 1;
    }
    if node_offsets.is_empty() {
        // gap == quarter exactly: the node would sit on the gap boundary
        return Err(FieldError::NoTrappingNode {
            unit_id: unit.id,
            gap: unit.reflector_gap,
            quarter,
        });
    }
    Ok(NodeGeometry {
        node_offsets,
        spacing,
    })
}

/// On-node pressure peak for one unit: `2I/c` at the driven power.
pub fn unit_peak_arp(unit: &LevitatorUnit, env: &Environment) -> Result<f64, FieldError> {
    let wrap = |source| FieldError::Physics {
        unit_id: unit.id,
        source,
    };
    let intensity = acoustic_intensity(unit.driven_power(), unit.aperture_area).map_err(wrap)?;
    arp_from_intensity(intensity, env.sound_speed).map_err(wrap)
}

/// Retune a unit so its node spacing becomes `target_spacing`.
///
/// Fails with the nearest achievable spacing when `c/(2·spacing)` falls
/// outside the allowed band.
pub fn tune_frequency(
    unit: &LevitatorUnit,
    target_spacing: f64,
    env: &Environment,
) -> Result<LevitatorUnit, FieldError> {
    assert!(target_spacing > 0.0, "target spacing must be positive");
    let frequency = env.sound_speed / (2.0 * target_spacing);
    if !(FREQUENCY_MIN_HZ..=FREQUENCY_MAX_HZ).contains(&frequency) {
        let clamped = frequency.clamp(FREQUENCY_MIN_HZ, FREQUENCY_MAX_HZ);
        return Err(FieldError::SpacingUnreachable {
            target: target_spacing,
            nearest: env.sound_speed / (2.0 * clamped),
            clamped_frequency: clamped,
        });
    }
    let mut tuned = unit.clone();
    tuned.frequency = frequency;
    Ok(tuned)
}

/// Immutable multi-unit pressure field; queries are safe to share across
/// threads. Rebuild after changing any unit's power or tuning.
#[derive(Debug, Clone)]
pub struct ArpField {
    units: Vec<LevitatorUnit>,
    medium: Environment,
    geoms: Vec<NodeGeometry>,
    peaks: Vec<f64>,
    radial_scales: Vec<f64>,
}

impl ArpField {
    pub fn new(units: Vec<LevitatorUnit>, medium: Environment) -> Result<Self, FieldError> {
        let mut geoms = Vec::with_capacity(units.len());
        let mut peaks = Vec::with_capacity(units.len());
        let mut radial_scales = Vec::with_capacity(units.len());
        for unit in &units {
            unit.validate()?;
            geoms.push(node_geometry(unit, &medium)?);
            peaks.push(unit_peak_arp(unit, &medium)?);
            radial_scales.push(unit.radial_scale());
        }
        Ok(ArpField {
            units,
            medium,
            geoms,
            peaks,
            radial_scales,
        })
    }

    pub fn units(&self) -> &[LevitatorUnit] {
        &self.units
    }

    pub fn medium(&self) -> &Environment {
        &self.medium
    }

    pub fn node_geometry(&self, unit_idx: usize) -> &NodeGeometry {
        &self.geoms[unit_idx]
    }

    pub fn peak_arp(&self, unit_idx: usize) -> f64 {
        self.peaks[unit_idx]
    }

    pub fn radial_scale(&self, unit_idx: usize) -> f64 {
        self.radial_scales[unit_idx]
    }

    /// Depth below the surface of node plane `node_idx` of unit `unit_idx`.
    pub fn node_depth(&self, unit_idx: usize, node_idx: usize) -> f64 {
        self.units[unit_idx].reflector_depth() - self.geoms[unit_idx].node_offsets[node_idx]
    }

    /// Per-unit field contribution at a point; zero outside the unit's gap
    /// window or beyond the radial cutoff.
    pub fn unit_contribution(&self, unit_idx: usize, point: Vec3) -> f64 {
        let unit = &self.units[unit_idx];
        let radial_scale = self.radial_scales[unit_idx];
        let d_radial = unit.position.distance(point.surface());
        if d_radial > RADIAL_CUTOFF_SCALES * radial_scale {
            return 0.0;
        }
        // standing wave lives between transducer plane and reflector plate
        if point.z < unit.transducer_depth() || point.z > unit.reflector_depth() {
            return 0.0;
        }
        let offset = unit.reflector_depth() - point.z;
        let geom = &self.geoms[unit_idx];
        let (_, node_offset) = geom.nearest_node(offset);
        // cos^2 about the nearest node plane == sin^2(2*pi*offset/lambda),
        // but evaluates to exactly 1 on the plane itself
        let phase = PI * (offset - node_offset) / geom.spacing;
        let axial = phase.cos().powi(2);
        let r = d_radial / radial_scale;
        let radial = (-(r * r)).exp();
        self.peaks[unit_idx] * axial * radial
    }

    /// Effective pressure at a point: max over unit contributions, Pa.
    pub fn arp_at(&self, point: Vec3) -> f64 {
        let mut best = 0.0f64;
        for idx in 0..self.units.len() {
            let value = self.unit_contribution(idx, point);
            if value > best {
                best = value;
            }
        }
        best
    }
}
