//! Lagrangian droplet spill: seeding, wind drift, diffusion, forecasting.
//!
//! A spill is a fixed population of droplets seeded at an origin. Each step
//! moves every `Free` droplet by a deterministic downwind drift
//! `k_wind * W * dt` plus isotropic Gaussian diffusion with per-axis standard
//! deviation `sqrt(2 D dt)`, where the diffusion coefficient grows with the
//! effective spreading rate: `D = d0 * (1 + rate * t)`.
//!
//! Reproducibility contract: one ChaCha generator seeded per run, and every
//! step draws exactly two standard normals per droplet in id order, whether
//! or not the droplet is free to move. Trapping or escaping a droplet
//! therefore never shifts the draws any other droplet sees, which keeps
//! seed-matched runs comparable across power levels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Vec2, Vec3};
use crate::physics::{oil_spill_rate_effective, Environment, OilType};

#[derive(Debug, Error, PartialEq)]
pub enum SpillError {
    #[error("droplet count must be at least 1")]
    EmptySpill,
    #[error("invalid radius spec: {0}")]
    InvalidRadiusSpec(String),
}

/// Droplet radius distribution at seeding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RadiusSpec {
    /// Every droplet gets the same radius, m.
    Fixed(f64),
    /// Log-normal sizes: `median` in m, `sigma` the log-space spread.
    LogNormal { median: f64, sigma: f64 },
}

impl RadiusSpec {
    fn validate(&self) -> Result<(), SpillError> {
        match *self {
            RadiusSpec::Fixed(r) if r > 0.0 && r.is_finite() => Ok(()),
            RadiusSpec::Fixed(r) => {
                Err(SpillError::InvalidRadiusSpec(format!("fixed radius {r} m")))
            }
            RadiusSpec::LogNormal { median, sigma }
                if median > 0.0 && median.is_finite() && sigma > 0.0 && sigma.is_finite() =>
            {
                Ok(())
            }
            RadiusSpec::LogNormal { median, sigma } => Err(SpillError::InvalidRadiusSpec(format!(
                "lognormal median {median} m sigma {sigma}"
            ))),
        }
    }
}

/// Transport coefficients. Defaults: 3% wind drift factor and a base
/// diffusion of 0.01 m^2/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    /// Fraction of the wind speed the surface slick drifts at.
    pub k_wind: f64,
    /// Base diffusion coefficient, m^2/s.
    pub d0: f64,
}

impl Default for DriftParams {
    fn default() -> Self {
        DriftParams {
            k_wind: 0.03,
            d0: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropletState {
    /// Drifting on the surface.
    Free,
    /// Held at a node plane of the given unit.
    Trapped { unit: u32, node: u32 },
    /// Left the domain; absorbing.
    Escaped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Droplet {
    pub id: u32,
    pub position: Vec3,
    /// m
    pub radius: f64,
    pub state: DropletState,
}

impl Droplet {
    pub fn is_free(&self) -> bool {
        self.state == DropletState::Free
    }
}

/// The evolving spill. Owns its generator; clone to fork a what-if run.
#[derive(Debug, Clone)]
pub struct SpillState {
    pub droplets: Vec<Droplet>,
    /// s since seeding
    pub time: f64,
    pub origin: Vec2,
    pub seed: u64,
    pub oil: OilType,
    pub drift: DriftParams,
    /// Latest `A·W·|η/ρo − 1/ρw|` seen by `step`, 1/s.
    pub effective_rate: f64,
    rng: ChaCha8Rng,
}

impl SpillState {
    /// Seed `count` droplets at `origin` on the surface, all `Free`.
    /// Identical seeds give bit-identical states.
    pub fn seed(
        origin: Vec2,
        count: u32,
        radius_spec: &RadiusSpec,
        oil: OilType,
        seed: u64,
    ) -> Result<Self, SpillError> {
        if count == 0 {
            return Err(SpillError::EmptySpill);
        }
        radius_spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut droplets = Vec::with_capacity(count as usize);
        match *radius_spec {
            RadiusSpec::Fixed(radius) => {
                for id in 0..count {
                    droplets.push(Droplet {
                        id,
                        position: Vec3::new(origin.x, origin.y, 0.0),
                        radius,
                        state: DropletState::Free,
                    });
                }
            }
            RadiusSpec::LogNormal { median, sigma } => {
                let dist = LogNormal::new(median.ln(), sigma)
                    .map_err(|e| SpillError::InvalidRadiusSpec(e.to_string()))?;
                for id in 0..count {
                    droplets.push(Droplet {
                        id,
                        position: Vec3::new(origin.x, origin.y, 0.0),
                        radius: dist.sample(&mut rng),
                        state: DropletState::Free,
                    });
                }
            }
        }
        Ok(SpillState {
            droplets,
            time: 0.0,
            origin,
            seed,
            oil,
            drift: DriftParams::default(),
            effective_rate: 0.0,
            rng,
        })
    }

    /// Diffusion coefficient at time `t` under `env`, m^2/s.
    pub fn diffusion_coefficient(&self, env: &Environment, t: f64) -> f64 {
        let rate = oil_spill_rate_effective(env, &self.oil);
        self.drift.d0 * (1.0 + rate * t)
    }

    /// Advance every droplet by `dt` seconds of wind drift plus diffusion.
    /// Trapped and escaped droplets stay put but still consume their draws.
    pub fn step(&mut self, env: &Environment, wind_dir: f64, dt: f64) {
        assert!(dt > 0.0, "dt must be positive");
        self.effective_rate = oil_spill_rate_effective(env, &self.oil);
        let diffusion = self.diffusion_coefficient(env, self.time);
        let sigma = (2.0 * diffusion * dt).sqrt();
        let drift_len = self.drift.k_wind * env.wind_speed * dt;
        let drift = Vec2::from_angle(wind_dir).scale(drift_len);
        for droplet in &mut self.droplets {
            let nx: f64 = StandardNormal.sample(&mut self.rng);
            let ny: f64 = StandardNormal.sample(&mut self.rng);
            if droplet.state == DropletState::Free {
                droplet.position.x += drift.x + sigma * nx;
                droplet.position.y += drift.y + sigma * ny;
            }
        }
        self.time += dt;
    }

    /// Centroid of the free droplets (all droplets when none are free).
    pub fn centroid(&self) -> Vec2 {
        let mut sum = Vec2::ZERO;
        let mut n = 0usize;
        for droplet in self.droplets.iter().filter(|d| d.is_free()) {
            sum = sum + droplet.position.surface();
            n += 1;
        }
        if n == 0 {
            for droplet in &self.droplets {
                sum = sum + droplet.position.surface();
            }
            n = self.droplets.len();
        }
        sum.scale(1.0 / n as f64)
    }

    /// 90th-percentile radial distance of free droplets from the centroid.
    pub fn radius_p90(&self) -> f64 {
        let centroid = self.centroid();
        let mut distances: Vec<f64> = self
            .droplets
            .iter()
            .filter(|d| d.is_free())
            .map(|d| d.position.surface().distance(centroid))
            .collect();
        if distances.is_empty() {
            return 0.0;
        }
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = ((0.9 * distances.len() as f64).ceil() as usize).max(1);
        distances[rank - 1]
    }

    /// Where the slick will be after `horizon` seconds: drifted centroid and
    /// a diffusion-inflated 90th-percentile radius.
    ///
    /// The radial growth uses the Rayleigh p90 of 2-D diffusion,
    /// `1.517 * sqrt(4 D horizon)`, with D frozen at the current time.
    pub fn forecast_drift(&self, env: &Environment, wind_dir: f64, horizon: f64) -> (Vec2, f64) {
        assert!(horizon >= 0.0, "horizon must be non-negative");
        let drift_len = self.drift.k_wind * env.wind_speed * horizon;
        let centroid = self.centroid() + Vec2::from_angle(wind_dir).scale(drift_len);
        let diffusion = self.diffusion_coefficient(env, self.time);
        let radius = self.radius_p90() + 1.517 * (4.0 * diffusion * horizon).sqrt();
        (centroid, radius)
    }

    /// Counts of (free, trapped, escaped) droplets.
    pub fn state_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0usize, 0usize, 0usize);
        for droplet in &self.droplets {
            match droplet.state {
                DropletState::Free => counts.0 += 1,
                DropletState::Trapped { .. } => counts.1 += 1,
                DropletState::Escaped => counts.2 += 1,
            }
        }
        counts
    }
}
