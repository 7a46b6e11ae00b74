//! Property tests for the library invariants.

use proptest::prelude::*;

use levichain::field::{node_geometry, unit_peak_arp, ArpField, LevitatorUnit};
use levichain::geom::{Vec2, Vec3};
use levichain::physics::{
    arp_from_intensity, buoyant_arf, oil_spill_rate_effective, oil_spill_rate_signed,
    required_trapping_pressure, Environment, OilType,
};
use levichain::planner::{barrier_from_forecast, plan_chain};
use levichain::spill::{DriftParams, RadiusSpec, SpillState};

fn air() -> Environment {
    Environment::new(0.0, 1000.0, 343.0, 9.81, 1.0).unwrap()
}

fn light_oil() -> OilType {
    OilType::new("light", 700.0, 0.05).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if b == 0.0 {
        a.abs() <= tol
    } else {
        ((a - b) / b).abs() <= tol
    }
}

proptest! {
    #[test]
    fn arp_is_linear_in_intensity(intensity in 0.0..1e6f64, scale in 0.0..1e3f64) {
        let base = arp_from_intensity(intensity, 1480.0).unwrap();
        let scaled = arp_from_intensity(scale * intensity, 1480.0).unwrap();
        prop_assert!(rel_close(scaled, scale * base, 1e-12));
    }

    #[test]
    fn arf_scales_with_radius_cubed(radius in 1e-6..1e-1f64) {
        let f1 = buoyant_arf(radius, &light_oil(), &air());
        let f2 = buoyant_arf(2.0 * radius, &light_oil(), &air());
        prop_assert!(rel_close(f2, 8.0 * f1, 1e-12));
    }

    #[test]
    fn required_pressure_times_area_recovers_force(radius in 1e-6..1e-1f64) {
        let oil = light_oil();
        let env = air();
        let pressure = required_trapping_pressure(radius, &oil, &env).unwrap();
        let force = buoyant_arf(radius, &oil, &env);
        prop_assert!(rel_close(pressure * std::f64::consts::PI * radius * radius, force, 1e-12));
    }

    #[test]
    fn effective_rate_is_non_negative_magnitude(
        wind in 0.0..60.0f64,
        density in 600.0..999.0f64,
        viscosity in 1e-4..1.0f64,
        spreading in 0.1..10.0f64,
    ) {
        let env = Environment::new(wind, 1000.0, 1480.0, 9.81, spreading).unwrap();
        let oil = OilType::new("x", density, viscosity).unwrap();
        let eff = oil_spill_rate_effective(&env, &oil);
        prop_assert!(eff >= 0.0);
        prop_assert_eq!(eff, oil_spill_rate_signed(&env, &oil).abs());
    }

    #[test]
    fn field_never_exceeds_peak(
        x in -1.0..1.0f64,
        y in -1.0..1.0f64,
        z in 0.0..0.06f64,
        power in 0.0..32.0f64,
    ) {
        let mut unit = LevitatorUnit::bench(0, Vec2::ZERO);
        unit.power_scale = power;
        let other = LevitatorUnit::bench(1, Vec2::new(0.3, 0.1));
        let field = ArpField::new(vec![unit, other], air()).unwrap();
        let cap = field.peak_arp(0).max(field.peak_arp(1));
        prop_assert!(field.arp_at(Vec3::new(x, y, z)) <= cap);
    }

    #[test]
    fn field_is_rigid_motion_invariant(
        x in -0.5..0.5f64,
        y in -0.5..0.5f64,
        z in 0.0..0.05f64,
        angle in 0.0..std::f64::consts::TAU,
        shift_x in -10.0..10.0f64,
        shift_y in -10.0..10.0f64,
    ) {
        let units = vec![
            LevitatorUnit::bench(0, Vec2::ZERO),
            LevitatorUnit::bench(1, Vec2::new(0.4, -0.2)),
        ];
        let shift = Vec2::new(shift_x, shift_y);
        let moved: Vec<LevitatorUnit> = units
            .iter()
            .map(|u| {
                let mut m = u.clone();
                m.position = u.position.rotate(angle) + shift;
                m.heading += angle;
                m
            })
            .collect();
        let field = ArpField::new(units, air()).unwrap();
        let field_moved = ArpField::new(moved, air()).unwrap();
        let p = Vec3::new(x, y, z);
        let q2 = Vec2::new(x, y).rotate(angle) + shift;
        let q = Vec3::new(q2.x, q2.y, z);
        prop_assert!(rel_close(field_moved.arp_at(q), field.arp_at(p), 1e-9));
    }

    #[test]
    fn field_scales_with_power(
        x in -0.5..0.5f64,
        z in 0.0..0.05f64,
        scale in 0.0..4.0f64,
    ) {
        let base = LevitatorUnit::bench(0, Vec2::ZERO);
        let mut boosted = base.clone();
        boosted.power_scale = base.power_scale * scale;
        let f1 = ArpField::new(vec![base], air()).unwrap();
        let f2 = ArpField::new(vec![boosted], air()).unwrap();
        let p = Vec3::new(x, 0.0, z);
        prop_assert!(rel_close(f2.arp_at(p), scale * f1.arp_at(p), 1e-12));
    }

    #[test]
    fn node_count_grows_with_gap(gap in 0.003..0.2f64, extra in 0.0..0.2f64) {
        let mut unit = LevitatorUnit::bench(0, Vec2::ZERO);
        unit.reflector_gap = gap;
        let n1 = node_geometry(&unit, &air()).unwrap().node_offsets.len();
        unit.reflector_gap = gap + extra;
        let n2 = node_geometry(&unit, &air()).unwrap().node_offsets.len();
        prop_assert!(n2 >= n1);
    }

    #[test]
    fn on_axis_field_is_periodic_between_nodes(k in 0usize..8, frac in 0.0..1.0f64) {
        let mut unit = LevitatorUnit::bench(0, Vec2::ZERO);
        unit.reflector_gap = 0.05;
        let field = ArpField::new(vec![unit], air()).unwrap();
        let geom = field.node_geometry(0).clone();
        prop_assume!(k + 1 < geom.node_offsets.len());
        let reflector = field.units()[0].reflector_depth();
        // same fractional position inside two consecutive node cells
        let z1 = reflector - (geom.node_offsets[k] + frac * geom.spacing);
        let z2 = reflector - (geom.node_offsets[k + 1] + frac * geom.spacing);
        prop_assume!(z2 >= 0.0);
        let a = field.arp_at(Vec3::new(0.0, 0.0, z1));
        let b = field.arp_at(Vec3::new(0.0, 0.0, z2));
        prop_assert!((a - b).abs() <= 1e-9 * field.peak_arp(0));
    }

    #[test]
    fn spill_steps_preserve_ids_and_count(
        count in 1u32..200,
        seed in 0u64..1000,
        steps in 1usize..20,
    ) {
        let mut spill = SpillState::seed(
            Vec2::ZERO,
            count,
            &RadiusSpec::Fixed(1e-3),
            light_oil(),
            seed,
        ).unwrap();
        let env = Environment::new(5.0, 1000.0, 1480.0, 9.81, 1.0).unwrap();
        let ids: Vec<u32> = spill.droplets.iter().map(|d| d.id).collect();
        for _ in 0..steps {
            spill.step(&env, 0.3, 1.0);
        }
        prop_assert_eq!(spill.droplets.len(), count as usize);
        let after: Vec<u32> = spill.droplets.iter().map(|d| d.id).collect();
        prop_assert_eq!(ids, after);
    }

    #[test]
    fn seeded_runs_are_bit_identical(seed in 0u64..500) {
        let env = Environment::new(7.0, 1000.0, 1480.0, 9.81, 1.0).unwrap();
        let mut a = SpillState::seed(
            Vec2::ZERO, 50, &RadiusSpec::LogNormal { median: 1e-3, sigma: 0.4 }, light_oil(), seed,
        ).unwrap();
        let mut b = SpillState::seed(
            Vec2::ZERO, 50, &RadiusSpec::LogNormal { median: 1e-3, sigma: 0.4 }, light_oil(), seed,
        ).unwrap();
        a.drift = DriftParams { k_wind: 0.03, d0: 0.02 };
        b.drift = DriftParams { k_wind: 0.03, d0: 0.02 };
        for _ in 0..10 {
            a.step(&env, 1.2, 2.0);
            b.step(&env, 1.2, 2.0);
        }
        prop_assert_eq!(a.droplets, b.droplets);
    }

    #[test]
    fn plans_cover_any_feasible_barrier(
        radius in 5.0..80.0f64,
        arc in 60.0..360.0f64,
        wind_dir in 0.0..std::f64::consts::TAU,
        overlap in 0.0..0.9f64,
    ) {
        let barrier = barrier_from_forecast(Vec2::ZERO, radius, wind_dir, arc, 1.2).unwrap();
        let mut template = LevitatorUnit::bench(0, Vec2::ZERO);
        template.power_scale = 24.0;
        let plan = plan_chain(&barrier, &template, &air(), &light_oil(), 1e-3, overlap).unwrap();
        prop_assert!(plan.coverage >= 1.0 - 1e-3, "coverage {}", plan.coverage);
        // spacing formula
        let required = required_trapping_pressure(1e-3, &light_oil(), &air()).unwrap();
        let peak = unit_peak_arp(&template, &air()).unwrap();
        let rho = template.radial_scale() * (peak / required).ln().sqrt();
        prop_assert!(rel_close(plan.spacing, 2.0 * rho * (1.0 - overlap), 1e-12));
    }
}
