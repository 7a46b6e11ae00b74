//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with `cargo test -p levichain-cli --test acceptance
//! -- --nocapture` to see every line.

use std::time::Instant;

use levichain::containment::{replicate_poc, run, EscapeEdges, Scenario, SpillConfig};
use levichain::control::{control_step, ControlConfig, ControllerState, SensorKind, SensorReading};
use levichain::field::{node_geometry, LevitatorUnit};
use levichain::geom::{Rect, Vec2};
use levichain::physics::{
    acoustic_intensity, arp_from_intensity, buoyant_arf, required_trapping_pressure, Environment,
    OilType,
};
use levichain::planner::{barrier_from_forecast, plan_chain, PlannerConfig};
use levichain::scenario::{emit_resolved, load_scenario_str};
use levichain::spill::{DriftParams, RadiusSpec, SpillState};

const POC_BENCH: &str = include_str!("../scenarios/poc_bench.json");

fn conclude(number: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {number} ({name}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} ({name}) failed: {detail}");
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Criterion 1: the worked bench arithmetic lands on the published rounded
/// figures inside their tolerances, in milliseconds.
#[test]
fn acceptance_1_bench_arithmetic_pinning() {
    let started = Instant::now();
    let env = Environment::new(0.0, 1000.0, 343.0, 9.81, 1.0).unwrap();
    let oil = OilType::new("bench", 700.0, 0.05).unwrap();

    let intensity = acoustic_intensity(14.0, 0.1).unwrap();
    let arp = arp_from_intensity(intensity, env.sound_speed).unwrap();
    let arf = buoyant_arf(1e-3, &oil, &env);
    let required = required_trapping_pressure(1e-3, &oil, &env).unwrap();
    let elapsed = started.elapsed();

    let mut failures = Vec::new();
    if rel_err(intensity, 140.0) > 1e-12 {
        failures.push(format!("intensity {intensity} != 140"));
    }
    if rel_err(arp, 0.815) > 0.005 {
        failures.push(format!("arp {arp} not within 0.5% of 0.815"));
    }
    if rel_err(arf, 1.23e-5) > 0.01 {
        failures.push(format!("arf {arf} not within 1% of 1.23e-5"));
    }
    if rel_err(required, 3.91) > 0.02 {
        failures.push(format!("required {required} not within 2% of 3.91"));
    }
    if elapsed.as_millis() > 50 {
        failures.push(format!("formulas took {elapsed:?}, expected milliseconds"));
    }

    // the CLI path reports the same numbers
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_levichain"))
        .args([
            "physics",
            "--radius-m",
            "0.001",
            "--oil-density",
            "700",
            "--water-density",
            "1000",
        ])
        .output()
        .expect("physics subcommand runs");
    let text = String::from_utf8_lossy(&output.stdout);
    for needle in [
        "intensity_w_m2: 140",
        "arp_pa: 0.816327",
        "arf_n: 1.232761e-5",
        "required_arp_pa: 3.924",
    ] {
        if !text.contains(needle) {
            failures.push(format!("cli output missing `{needle}`"));
        }
    }

    conclude(
        1,
        "bench arithmetic pinning",
        failures.is_empty(),
        &failures.join("; "),
    );
}

/// Criterion 2: chained trials order strictly none < low < medium < high
/// with a zero `none` row, for at least 9 of 10 fixed seeds, under a minute.
#[test]
fn acceptance_2_trial_ordering_across_seed_sweep() {
    let scenario = load_scenario_str(POC_BENCH).unwrap();
    let seeds: Vec<u64> = (1..=10).collect();
    let started = Instant::now();
    let mut outcomes: Vec<Option<bool>> = vec![None; seeds.len()];
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let chunk = seeds.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (seed_chunk, out_chunk) in seeds.chunks(chunk).zip(outcomes.chunks_mut(chunk)) {
            let scenario = &scenario;
            scope.spawn(move || {
                for (seed, slot) in seed_chunk.iter().zip(out_chunk.iter_mut()) {
                    let records = replicate_poc(scenario, *seed).unwrap();
                    let zero_none = records[0].pressure_level == "none"
                        && records[0].initial_trapped_pct == 0.0
                        && records[0].final_trapped_pct == 0.0;
                    let strictly_increasing = records
                        .windows(2)
                        .all(|w| w[1].final_trapped_pct > w[0].final_trapped_pct);
                    *slot = Some(zero_none && strictly_increasing);
                }
            });
        }
    });
    let elapsed = started.elapsed();
    let passing = outcomes.iter().filter(|o| o.unwrap_or(false)).count();

    let pass = passing >= 9 && elapsed.as_secs() < 60;
    conclude(
        2,
        "trial ordering across seeds",
        pass,
        &format!("{passing}/10 seeds ordered, elapsed {elapsed:?} (limit 60 s)"),
    );
}

/// Criterion 3: node spacing c/(2f) against independent arithmetic to 1e-12.
#[test]
fn acceptance_3_node_geometry() {
    let mut failures = Vec::new();
    let cases = [
        (343.0, 40_000.0, 4.2875e-3),
        (1480.0, 60_000.0, 12.333333333333333e-3),
    ];
    for (sound_speed, frequency, expected) in cases {
        let env = Environment::new(0.0, 1000.0, sound_speed, 9.81, 1.0).unwrap();
        let mut unit = LevitatorUnit::bench(0, Vec2::ZERO);
        unit.frequency = frequency;
        let geom = node_geometry(&unit, &env).unwrap();
        // independent arithmetic route
        let independent = sound_speed / (2.0 * frequency);
        if rel_err(geom.spacing, expected) > 1e-12 || rel_err(geom.spacing, independent) > 1e-12 {
            failures.push(format!(
                "c={sound_speed} f={frequency}: spacing {} vs {expected}",
                geom.spacing
            ));
        }
    }
    conclude(
        3,
        "node geometry",
        failures.is_empty(),
        &failures.join("; "),
    );
}

fn quick_scenario(count: u32, duration: f64, power_scale: f64) -> Scenario {
    let mut unit = LevitatorUnit::bench(0, Vec2::new(0.4, 0.0));
    unit.reflector_gap = 0.024;
    unit.power_scale = power_scale;
    Scenario {
        env: Environment::new(0.0, 1000.0, 343.0, 9.81, 1.0).unwrap(),
        oil: OilType::new("bench", 700.0, 0.05).unwrap(),
        spill: SpillConfig {
            origin: Vec2::ZERO,
            count,
            radius_spec: RadiusSpec::Fixed(1e-3),
            drift: DriftParams {
                k_wind: 0.03,
                d0: 3e-5,
            },
        },
        units: vec![unit],
        wind_dir: 0.0,
        dt: 1.0,
        duration,
        domain_bounds: Rect::new(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0)),
        escape_edges: EscapeEdges::default(),
        pressure_level: None,
        capture_distance: None,
        control: ControlConfig::default(),
        planner: PlannerConfig::default(),
    }
}

/// Criterion 4: the property bundle — mass balance, power monotonicity,
/// zero field, determinism, drift linearity, diffusion MSD.
#[test]
fn acceptance_4_property_suite() {
    let mut failures = Vec::new();

    // mass balance at every step
    let report = run(&quick_scenario(1000, 300.0, 12.0), 3).unwrap();
    for sample in &report.samples {
        let sum = sample.trapped_fraction + sample.escaped_fraction + sample.free_fraction;
        if (sum - 1.0).abs() > 1e-12 {
            failures.push(format!("mass balance off at t={}: {sum}", sample.t));
            break;
        }
    }
    if report.final_free + report.final_trapped + report.final_escaped
        != u64::from(report.droplet_count)
    {
        failures.push("final counts do not sum to the seeded count".into());
    }

    // trapped fraction monotone over 5 power levels x 5 seeds
    'outer: for seed in 1..=5u64 {
        let mut last = -1.0f64;
        for power in [0.0, 3.0, 6.0, 12.0, 24.0] {
            let report = run(&quick_scenario(600, 240.0, power), seed).unwrap();
            let trapped = report.final_trapped as f64 / f64::from(report.droplet_count);
            if trapped < last {
                failures.push(format!(
                    "power monotonicity broken at seed {seed} power {power}"
                ));
                break 'outer;
            }
            last = trapped;
        }
    }

    // zero field traps nothing, ever
    let zero = run(&quick_scenario(800, 240.0, 0.0), 4).unwrap();
    if zero.samples.iter().any(|s| s.trapped_fraction != 0.0) {
        failures.push("zero-power field trapped droplets".into());
    }

    // determinism: byte-identical reports per seed
    let a = run(&quick_scenario(500, 180.0, 6.0), 9).unwrap();
    let b = run(&quick_scenario(500, 180.0, 6.0), 9).unwrap();
    if serde_json::to_vec(&a).unwrap() != serde_json::to_vec(&b).unwrap() {
        failures.push("seed-matched reports differ".into());
    }

    // drift linear in wind with diffusion off, 1e-9 relative
    let drift_run = |wind: f64| {
        let mut spill = SpillState::seed(
            Vec2::ZERO,
            10,
            &RadiusSpec::Fixed(1e-3),
            OilType::new("b", 700.0, 0.05).unwrap(),
            2,
        )
        .unwrap();
        spill.drift = DriftParams {
            k_wind: 0.03,
            d0: 0.0,
        };
        let env = Environment::new(wind, 1000.0, 343.0, 9.81, 1.0).unwrap();
        for _ in 0..50 {
            spill.step(&env, 0.0, 1.0);
        }
        spill.centroid().x
    };
    let x1 = drift_run(10.0);
    let x2 = drift_run(20.0);
    if rel_err(x1, 50.0 * 0.03 * 10.0) > 1e-9 || rel_err(x2, 2.0 * x1) > 1e-9 {
        failures.push(format!("drift linearity broken: {x1} vs {x2}"));
    }

    // diffusion MSD = 4 D0 t within 10% at 1e4 droplets
    let mut spill = SpillState::seed(
        Vec2::ZERO,
        10_000,
        &RadiusSpec::Fixed(1e-3),
        OilType::new("b", 700.0, 0.05).unwrap(),
        7,
    )
    .unwrap();
    spill.drift = DriftParams {
        k_wind: 0.03,
        d0: 0.01,
    };
    let env = Environment::new(0.0, 1000.0, 343.0, 9.81, 1.0).unwrap();
    for _ in 0..100 {
        spill.step(&env, 0.0, 1.0);
    }
    let msd = spill
        .droplets
        .iter()
        .map(|d| d.position.surface().norm_sq())
        .sum::<f64>()
        / spill.droplets.len() as f64;
    if rel_err(msd, 4.0 * 0.01 * 100.0) > 0.10 {
        failures.push(format!("diffusion MSD {msd} not within 10% of 4"));
    }

    conclude(
        4,
        "property suite",
        failures.is_empty(),
        &failures.join("; "),
    );
}

/// Criterion 5: full coverage on a 120 m closed circle, and a planned
/// barrier beats no barrier on escaped fraction, seed for seed.
#[test]
fn acceptance_5_planner_geometry_and_end_to_end() {
    let mut failures = Vec::new();
    let env = Environment::new(5.0, 1000.0, 1480.0, 9.81, 1.0).unwrap();
    let oil = OilType::new("crude", 900.0, 0.05).unwrap();
    let mut template = LevitatorUnit::bench(0, Vec2::ZERO);
    template.num_transducers = 28;
    template.power_per_transducer = 5.0;
    template.reflector_gap = 0.048;
    template.power_scale = 6.0; // the low-band preset level

    // 1.2 x 100 m forecast radius = the 120 m circle
    let circle = barrier_from_forecast(Vec2::ZERO, 100.0, 0.0, 360.0, 1.2).unwrap();
    let plan = plan_chain(&circle, &template, &env, &oil, 1e-3, 0.2).unwrap();
    if plan.coverage < 0.999 {
        failures.push(format!(
            "coverage {} < 0.999 on the 120 m circle",
            plan.coverage
        ));
    }

    // seed-matched end-to-end comparison on a compact ring
    let ring = barrier_from_forecast(Vec2::ZERO, 8.0, 0.0, 360.0, 1.2).unwrap();
    let ring_plan = plan_chain(&ring, &template, &env, &oil, 1e-3, 0.2).unwrap();
    let base = Scenario {
        env: env.clone(),
        oil: oil.clone(),
        spill: SpillConfig {
            origin: Vec2::ZERO,
            count: 2000,
            radius_spec: RadiusSpec::Fixed(1e-3),
            drift: DriftParams {
                k_wind: 0.03,
                d0: 0.01,
            },
        },
        units: Vec::new(),
        wind_dir: 0.0,
        dt: 1.0,
        duration: 300.0,
        domain_bounds: Rect::new(Vec2::new(-30.0, -30.0), Vec2::new(30.0, 30.0)),
        escape_edges: EscapeEdges::default(),
        pressure_level: None,
        capture_distance: None,
        control: ControlConfig::default(),
        planner: PlannerConfig::default(),
    };
    let mut fenced = base.clone();
    fenced.units = ring_plan.units();
    for seed in [1u64, 2, 3] {
        let open = run(&base, seed).unwrap();
        let closed = run(&fenced, seed).unwrap();
        if closed.final_escaped >= open.final_escaped {
            failures.push(format!(
                "seed {seed}: escaped {} with barrier vs {} without",
                closed.final_escaped, open.final_escaped
            ));
        }
    }

    conclude(
        5,
        "planner geometry and end-to-end",
        failures.is_empty(),
        &failures.join("; "),
    );
}

/// Criterion 6: the noiseless loop reaches 2% of the setpoint within 50
/// steps at gain 0.5 and tracks the scalar iteration exactly.
#[test]
fn acceptance_6_control_convergence() {
    let mut failures = Vec::new();
    let slope = 0.8163265306122449; // node pressure per unit of power scale
    let required = 3.9240000000000004;
    let target = 1.25 * required;
    let controller = ControllerState {
        unit_id: 0,
        target_margin: 1.25,
        gain: 0.5,
        min_power_scale: 0.0,
        max_power_scale: 32.0,
    };
    let mut unit = LevitatorUnit::bench(0, Vec2::ZERO);
    unit.power_scale = 0.5 * target / slope;

    let mut oracle = 0.5f64; // normalized pressure, x <- x + g(1 - x)
    let mut converged_at = None;
    for step in 1..=50 {
        let reading = SensorReading {
            unit_id: 0,
            kind: SensorKind::Pressure,
            value: slope * unit.power_scale,
            aux: None,
            timestamp: step as f64,
            noise_sigma: 0.0,
        };
        unit = control_step(&controller, &reading, required, &unit);
        oracle += 0.5 * (1.0 - oracle);
        let x = slope * unit.power_scale / target;
        if (x - oracle).abs() > 1e-9 {
            failures.push(format!(
                "step {step}: loop {x} diverged from oracle {oracle}"
            ));
            break;
        }
        if converged_at.is_none() && (x - 1.0).abs() <= 0.02 {
            converged_at = Some(step);
        }
    }
    match converged_at {
        Some(step) if step <= 50 => {}
        _ => failures.push("loop did not reach 2% of the setpoint in 50 steps".into()),
    }

    conclude(
        6,
        "control convergence",
        failures.is_empty(),
        &failures.join("; "),
    );
}

/// Criterion 7: scenario round-trip identity, and a replay from the
/// resolved artifact reproduces the time series byte-for-byte.
#[test]
fn acceptance_7_io_round_trip_and_replay() {
    let mut failures: Vec<String> = Vec::new();

    // load -> emit -> load -> emit is a fixed point
    let loaded = load_scenario_str(POC_BENCH).unwrap();
    let emitted = emit_resolved(&loaded);
    let reloaded = load_scenario_str(&emitted).unwrap();
    if loaded != reloaded {
        failures.push("resolved scenario did not round-trip".into());
    }
    if emitted != emit_resolved(&reloaded) {
        failures.push("emission is not byte-stable".into());
    }

    // replay via the CLI from scenario.resolved.json
    let dir = tempfile::tempdir().unwrap();
    let scenario_path = dir.path().join("small.json");
    let mut doc: serde_json::Value = serde_json::from_str(POC_BENCH).unwrap();
    doc["spill"]["count"] = serde_json::json!(500);
    doc["sim"]["duration_s"] = serde_json::json!(120.0);
    doc["sim"]["pressure_level"] = serde_json::json!("medium");
    std::fs::write(&scenario_path, serde_json::to_string(&doc).unwrap()).unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let bin = env!("CARGO_BIN_EXE_levichain");
    let run_cli = |scenario: &std::path::Path, out: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args([
                "simulate",
                "--scenario",
                scenario.to_str().unwrap(),
                "--seed",
                "21",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .expect("simulate runs");
        assert!(status.success());
    };
    run_cli(&scenario_path, &out_a);
    run_cli(&out_a.join("scenario.resolved.json"), &out_b);
    let a = std::fs::read(out_a.join("timeseries.csv")).unwrap();
    let b = std::fs::read(out_b.join("timeseries.csv")).unwrap();
    if a != b {
        failures.push("replay from scenario.resolved.json changed timeseries.csv".into());
    }

    conclude(
        7,
        "io round trip and replay",
        failures.is_empty(),
        &failures.join("; "),
    );
}
