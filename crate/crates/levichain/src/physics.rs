//! Closed-form spill and acoustic formulas.
//!
//! Everything here is a pure function over the two material/medium value
//! types, [`OilType`] and [`Environment`]. All quantities are SI.
//!
//! Two spill-rate variants exist on purpose. `oil_spill_rate_signed` keeps
//! the spreading expression `A·W·(η/ρo − 1/ρw)` exactly as written, which
//! comes out negative for typical oils. `oil_spill_rate_effective` takes its
//! magnitude and is what the transport model consumes as a non-negative
//! spreading driver.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PhysicsError {
    #[error("focus area must be positive, got {0} m^2")]
    NonPositiveArea(f64),
    #[error("total power must be non-negative, got {0} W")]
    NegativePower(f64),
    #[error("sound speed must be positive, got {0} m/s")]
    NonPositiveSoundSpeed(f64),
    #[error("intensity must be non-negative, got {0} W/m^2")]
    NegativeIntensity(f64),
    #[error("droplet radius must be positive, got {0} m")]
    NonPositiveRadius(f64),
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Oil material constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OilType {
    pub name: String,
    /// kg/m^3
    pub density: f64,
    /// Pa-s
    pub viscosity: f64,
}

impl OilType {
    pub fn new(
        name: impl Into<String>,
        density: f64,
        viscosity: f64,
    ) -> Result<Self, PhysicsError> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(PhysicsError::InvalidParameter {
                name: "oil density",
                value: density,
            });
        }
        if !(viscosity > 0.0) || !viscosity.is_finite() {
            return Err(PhysicsError::InvalidParameter {
                name: "oil viscosity",
                value: viscosity,
            });
        }
        Ok(OilType {
            name: name.into(),
            density,
            viscosity,
        })
    }
}

/// Medium and forcing constants shared by every formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// m/s, >= 0
    pub wind_speed: f64,
    /// kg/m^3
    pub water_density: f64,
    /// m/s, speed of sound in the propagation medium
    pub sound_speed: f64,
    /// m/s^2
    pub gravity: f64,
    /// dimensionless spreading constant
    pub spreading_constant: f64,
}

impl Environment {
    pub fn new(
        wind_speed: f64,
        water_density: f64,
        sound_speed: f64,
        gravity: f64,
        spreading_constant: f64,
    ) -> Result<Self, PhysicsError> {
        let check = |name: &'static str, value: f64, strict: bool| {
            let ok = value.is_finite() && if strict { value > 0.0 } else { value >= 0.0 };
            if ok {
                Ok(())
            } else {
                Err(PhysicsError::InvalidParameter { name, value })
            }
        };
        check("wind speed", wind_speed, false)?;
        check("water density", water_density, true)?;
        check("sound speed", sound_speed, true)?;
        check("gravity", gravity, true)?;
        check("spreading constant", spreading_constant, true)?;
        Ok(Environment {
            wind_speed,
            water_density,
            sound_speed,
            gravity,
            spreading_constant,
        })
    }
}

/// Signed spreading rate `A·W·(η/ρo − 1/ρw)`, exactly as written.
///
/// Negative for typical oils; kept verbatim for reference output. Use
/// [`oil_spill_rate_effective`] to drive the transport model.
pub fn oil_spill_rate_signed(env: &Environment, oil: &OilType) -> f64 {
    env.spreading_constant
        * env.wind_speed
        * (oil.viscosity / oil.density - 1.0 / env.water_density)
}

/// Non-negative spreading driver `A·W·|η/ρo − 1/ρw|`, 1/s.
pub fn oil_spill_rate_effective(env: &Environment, oil: &OilType) -> f64 {
    oil_spill_rate_signed(env, oil).abs()
}

/// Sound intensity `P/A` over the focus area, W/m^2.
pub fn acoustic_intensity(total_power: f64, focus_area: f64) -> Result<f64, PhysicsError> {
    if !(focus_area > 0.0) {
        return Err(PhysicsError::NonPositiveArea(focus_area));
    }
    if total_power < 0.0 {
        return Err(PhysicsError::NegativePower(total_power));
    }
    Ok(total_power / focus_area)
}

/// Acoustic radiation pressure `2I/c`, Pa.
pub fn arp_from_intensity(intensity: f64, sound_speed: f64) -> Result<f64, PhysicsError> {
    if !(sound_speed > 0.0) {
        return Err(PhysicsError::NonPositiveSoundSpeed(sound_speed));
    }
    if intensity < 0.0 {
        return Err(PhysicsError::NegativeIntensity(intensity));
    }
    Ok(2.0 * intensity / sound_speed)
}

/// Net buoyant force magnitude on a droplet of `radius`, N.
///
/// `(4π r³ g / 3) · |ρw − ρo|` — the force the trap has to oppose. The
/// magnitude convention keeps the quantity positive for buoyant oil.
pub fn buoyant_arf(radius: f64, oil: &OilType, env: &Environment) -> f64 {
    let volume_factor = 4.0 * PI * radius.powi(3) / 3.0;
    volume_factor * env.gravity * (env.water_density - oil.density).abs()
}

/// Pressure a trap node must exert to hold a droplet of `radius`, Pa.
///
/// `buoyant_arf / (π r²)`, which simplifies to `4 r g |ρw − ρo| / 3`.
pub fn required_trapping_pressure(
    radius: f64,
    oil: &OilType,
    env: &Environment,
) -> Result<f64, PhysicsError> {
    if !(radius > 0.0) {
        return Err(PhysicsError::NonPositiveRadius(radius));
    }
    Ok(buoyant_arf(radius, oil, env) / (PI * radius * radius))
}
