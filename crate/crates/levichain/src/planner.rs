//! Barrier geometry and chain placement.
//!
//! The barrier is a circular arc inflated from the forecast slick extent and
//! bisected by the downwind direction. Units go onto it by arc length at a
//! pitch derived from the capture radius: the radial distance at which a
//! unit's node-plane pressure decays to the trapping threshold of the design
//! droplet,
//!
//! ```text
//! rho_eff = radial_scale * sqrt(ln(peak / required))
//! ```
//!
//! Spacing `2 * rho_eff * (1 - overlap)` then tiles the whole polyline with
//! overlapping capture discs, so planned coverage is 1 up to arc-sampling
//! tolerance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{node_geometry, unit_peak_arp, FieldError, LevitatorUnit};
use crate::geom::Vec2;
use crate::physics::{required_trapping_pressure, Environment, OilType, PhysicsError};

/// Arc sampling pitch for coverage scoring, m.
const COVERAGE_SAMPLE_STEP: f64 = 0.01;

/// Maximum chord error when discretizing arcs, m.
const MAX_CHORD_ERROR: f64 = 1.0;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("unit cannot trap design droplet at any power: peak {peak_at_max} Pa <= required {required} Pa at max power scale")]
    InfeasibleAtAnyPower { peak_at_max: f64, required: f64 },
    #[error("unit cannot trap design droplet at its configured power: peak {peak} Pa <= required {required} Pa (raising power_scale toward {max_power_scale} would work)")]
    InfeasibleAsConfigured {
        peak: f64,
        required: f64,
        max_power_scale: f64,
    },
    #[error("barrier needs at least 2 vertices")]
    DegenerateBarrier,
    #[error("overlap must lie in [0, 0.9], got {0}")]
    BadOverlap(f64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

/// Planner block of a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Barrier radius margin over the forecast p90 radius.
    pub inflation: f64,
    /// Capture-disc overlap fraction in [0, 0.9].
    pub overlap: f64,
    /// m
    pub design_droplet_radius: f64,
    /// Arc span of the barrier, degrees in (0, 360].
    pub arc_degrees: f64,
    /// Forecast horizon the barrier is planned against, s.
    pub horizon: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            inflation: 1.2,
            overlap: 0.2,
            design_droplet_radius: 1e-3,
            arc_degrees: 360.0,
            horizon: 600.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.inflation > 0.0) {
            return Err(format!(
                "planner inflation must be positive, got {}",
                self.inflation
            ));
        }
        if !(0.0..=0.9).contains(&self.overlap) {
            return Err(format!(
                "planner overlap must lie in [0, 0.9], got {}",
                self.overlap
            ));
        }
        if !(self.design_droplet_radius > 0.0) {
            return Err(format!(
                "planner design droplet radius must be positive, got {}",
                self.design_droplet_radius
            ));
        }
        if !(self.arc_degrees > 0.0 && self.arc_degrees <= 360.0) {
            return Err(format!(
                "planner arc must lie in (0, 360] degrees, got {}",
                self.arc_degrees
            ));
        }
        if !(self.horizon >= 0.0) {
            return Err(format!(
                "planner horizon must be non-negative, got {}",
                self.horizon
            ));
        }
        Ok(())
    }
}

/// Open or closed chain of surface vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierPolyline {
    pub vertices: Vec<Vec2>,
    pub closed: bool,
}

impl BarrierPolyline {
    pub fn new(vertices: Vec<Vec2>, closed: bool) -> Result<Self, PlanError> {
        if vertices.len() < 2 {
            return Err(PlanError::DegenerateBarrier);
        }
        let barrier = BarrierPolyline { vertices, closed };
        for (a, b) in barrier.segments() {
            if a.distance(b) == 0.0 {
                return Err(PlanError::DegenerateBarrier);
            }
        }
        Ok(barrier)
    }

    /// Consecutive vertex pairs, wrapping when closed.
    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn total_length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    /// Point and tangent angle at arc length `s` from the first vertex.
    pub fn point_at(&self, s: f64) -> (Vec2, f64) {
        let mut remaining = s.max(0.0);
        let mut last = (self.vertices[0], 0.0);
        for (a, b) in self.segments() {
            let len = a.distance(b);
            let dir = b - a;
            let heading = dir.y.atan2(dir.x);
            if remaining <= len {
                return (a + dir.scale(remaining / len), heading);
            }
            remaining -= len;
            last = (b, heading);
        }
        last
    }
}

/// Planned placements along a barrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub position: Vec2,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPlan {
    pub placements: Vec<Placement>,
    pub template: LevitatorUnit,
    /// Arc-length pitch between units, m.
    pub spacing: f64,
    /// Effective capture radius the spacing was derived from, m.
    pub capture_radius: f64,
    /// Fraction of the barrier within one capture radius of a unit.
    pub coverage: f64,
}

impl ChainPlan {
    /// Instantiate the template at every placement, ids in chain order.
    pub fn units(&self) -> Vec<LevitatorUnit> {
        self.placements
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut unit = self.template.clone();
                unit.id = i as u32;
                unit.position = p.position;
                unit.heading = p.heading;
                unit
            })
            .collect()
    }
}

/// Arc barrier around a forecast slick: radius `inflation * radius_p90`,
/// centered on the forecast centroid, bisected by the downwind direction,
/// discretized to at most one metre of sagitta.
pub fn barrier_from_forecast(
    centroid: Vec2,
    radius_p90: f64,
    wind_dir: f64,
    arc_degrees: f64,
    inflation: f64,
) -> Result<BarrierPolyline, PlanError> {
    assert!(radius_p90 > 0.0, "forecast radius must be positive");
    assert!(
        arc_degrees > 0.0 && arc_degrees <= 360.0,
        "arc must lie in (0, 360] degrees"
    );
    let radius = inflation * radius_p90;
    let arc_rad = arc_degrees.to_radians();
    let closed = arc_degrees == 360.0;

    // sagitta R(1 - cos(d/2)) <= MAX_CHORD_ERROR, floor of 16 segments
    let max_step = if radius > MAX_CHORD_ERROR {
        2.0 * (1.0 - MAX_CHORD_ERROR / radius).acos()
    } else {
        arc_rad
    };
    let segments = ((arc_rad / max_step).ceil() as usize).max(16);

    let start = wind_dir - arc_rad / 2.0;
    let vertex_count = if closed { segments } else { segments + 1 };
    let vertices = (0..vertex_count)
        .map(|i| {
            let angle = start + arc_rad * i as f64 / segments as f64;
            centroid + Vec2::from_angle(angle).scale(radius)
        })
        .collect();
    BarrierPolyline::new(vertices, closed)
}

/// Capture radius of a unit whose node-plane peak is `peak` against a
/// `required` threshold; `None` when the unit cannot reach the threshold.
pub fn capture_radius(peak: f64, required: f64, radial_scale: f64) -> Option<f64> {
    if peak > required && required > 0.0 {
        Some(radial_scale * (peak / required).ln().sqrt())
    } else {
        None
    }
}

/// Place copies of `template` along the barrier at the capture-derived
/// pitch. Fails when the template cannot trap the design droplet.
pub fn plan_chain(
    barrier: &BarrierPolyline,
    template: &LevitatorUnit,
    env: &Environment,
    oil: &OilType,
    design_droplet_radius: f64,
    overlap: f64,
) -> Result<ChainPlan, PlanError> {
    if !(0.0..=0.9).contains(&overlap) {
        return Err(PlanError::BadOverlap(overlap));
    }
    template.validate()?;
    node_geometry(template, env)?;
    let required = required_trapping_pressure(design_droplet_radius, oil, env)?;
    let peak = unit_peak_arp(template, env)?;
    let rho_eff = match capture_radius(peak, required, template.radial_scale()) {
        Some(r) => r,
        None => {
            let mut at_max = template.clone();
            at_max.power_scale = at_max.max_power_scale;
            let peak_at_max = unit_peak_arp(&at_max, env)?;
            return Err(if peak_at_max <= required {
                PlanError::InfeasibleAtAnyPower {
                    peak_at_max,
                    required,
                }
            } else {
                PlanError::InfeasibleAsConfigured {
                    peak,
                    required,
                    max_power_scale: template.max_power_scale,
                }
            });
        }
    };

    let spacing = 2.0 * rho_eff * (1.0 - overlap);
    let length = barrier.total_length();
    let count = (length / spacing).ceil().max(1.0) as usize;
    let placements: Vec<Placement> = (0..count)
        .map(|i| {
            // closed chains tile from s=0; open chains center each pitch cell
            let s = if barrier.closed {
                i as f64 * spacing
            } else {
                spacing / 2.0 + i as f64 * spacing
            };
            let (position, heading) = barrier.point_at(s.min(length));
            Placement { position, heading }
        })
        .collect();

    let mut plan = ChainPlan {
        placements,
        template: template.clone(),
        spacing,
        capture_radius: rho_eff,
        coverage: 0.0,
    };
    plan.coverage = coverage_fraction(&plan, barrier, design_droplet_radius, oil, env)?;
    Ok(plan)
}

/// Fraction of the barrier arc length within the capture radius of some
/// placed unit, by 1 cm arc sampling.
pub fn coverage_fraction(
    plan: &ChainPlan,
    barrier: &BarrierPolyline,
    design_droplet_radius: f64,
    oil: &OilType,
    env: &Environment,
) -> Result<f64, PlanError> {
    if plan.placements.is_empty() {
        return Ok(0.0);
    }
    let required = required_trapping_pressure(design_droplet_radius, oil, env)?;
    let peak = unit_peak_arp(&plan.template, env)?;
    let Some(rho_eff) = capture_radius(peak, required, plan.template.radial_scale()) else {
        return Ok(0.0);
    };
    // closed-disc membership; the relative epsilon keeps exact-boundary
    // samples from flipping on 1-ulp noise
    let rho_sq = rho_eff * rho_eff * (1.0 + 1e-9);
    let length = barrier.total_length();
    let bins = (length / COVERAGE_SAMPLE_STEP).ceil().max(1.0) as usize;
    let mut covered = 0usize;
    for bin in 0..bins {
        let s = (bin as f64 + 0.5) * length / bins as f64;
        let (point, _) = barrier.point_at(s);
        if plan
            .placements
            .iter()
            .any(|p| p.position.distance_sq(point) <= rho_sq)
        {
            covered += 1;
        }
    }
    Ok(covered as f64 / bins as f64)
}
