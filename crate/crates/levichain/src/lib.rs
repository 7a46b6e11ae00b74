//! Acoustic-levitator barriers for surface oil spills: physics, fields,
//! spill transport, containment runs, chain planning, and feedback control.
//!
//! The crate models a chain of floated ultrasonic levitator units as
//! standing-wave trapping fields, evolves a droplet spill under wind and
//! diffusion, and decides where along a barrier the units go. Everything is
//! deterministic per seed: a scenario file plus a seed replays exactly.
//!
//! A quick tour:
//!
//! ```
//! use levichain::physics::{self, Environment, OilType};
//!
//! let env = Environment::new(0.0, 1000.0, 343.0, 9.81, 1.0).unwrap();
//! let oil = OilType::new("light", 700.0, 0.05).unwrap();
//!
//! // 14 transducers of 1 W focused over 0.1 m^2
//! let intensity = physics::acoustic_intensity(14.0, 0.1).unwrap();
//! let pressure = physics::arp_from_intensity(intensity, env.sound_speed).unwrap();
//! let needed = physics::required_trapping_pressure(1e-3, &oil, &env).unwrap();
//!
//! assert!((intensity - 140.0).abs() < 1e-9);
//! assert!((pressure - 0.8163265306122449).abs() < 1e-12);
//! assert!((needed - 3.924).abs() < 1e-12);
//! assert!(pressure < needed); // base power cannot hold a 1 mm droplet
//! ```
//!
//! The `book/` directory of the repository walks through each subsystem;
//! its code snippets compile and run as part of `cargo test --doc`.

pub mod containment;
pub mod control;
pub mod field;
pub mod geom;
pub mod physics;
pub mod planner;
pub mod report;
pub mod scenario;
pub mod spill;

pub use containment::{replicate_poc, run, PressureLevel, Scenario, SimReport, TrialRecord};
pub use field::{ArpField, LevitatorUnit};
pub use physics::{Environment, OilType};
pub use scenario::{load_scenario, load_scenario_str, ScenarioError};
pub use spill::{RadiusSpec, SpillState};

// The guide's code snippets run as doctests so the book cannot drift from
// the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spill-physics.md")]
    mod spill_physics {}
    #[doc = include_str!("../../../book/src/acoustic-trapping.md")]
    mod acoustic_trapping {}
    #[doc = include_str!("../../../book/src/levitator-fields.md")]
    mod levitator_fields {}
    #[doc = include_str!("../../../book/src/spill-simulation.md")]
    mod spill_simulation {}
    #[doc = include_str!("../../../book/src/containment-runs.md")]
    mod containment_runs {}
    #[doc = include_str!("../../../book/src/chain-planning.md")]
    mod chain_planning {}
    #[doc = include_str!("../../../book/src/feedback-control.md")]
    mod feedback_control {}
    #[doc = include_str!("../../../book/src/scenarios-and-cli.md")]
    mod scenarios_and_cli {}
}
