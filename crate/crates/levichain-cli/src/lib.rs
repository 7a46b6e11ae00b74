//! Command-line front end: scenario runs, chain planning, the chained bench
//! protocol, and report re-emission.
//!
//! Exit codes: 0 on success, 1 for usage/validation problems, 2 for runtime
//! failures. Every run writes `scenario.resolved.json` next to its outputs
//! so a published number replays from the artifact directory alone.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use levichain::containment::{
    replicate_poc_detailed, Scenario, SimReport, Simulation, TrialRecord,
};
use levichain::physics::{
    acoustic_intensity, arp_from_intensity, buoyant_arf, oil_spill_rate_effective,
    oil_spill_rate_signed, required_trapping_pressure, Environment, OilType,
};
use levichain::planner::{barrier_from_forecast, plan_chain};
use levichain::report::RunArtifacts;
use levichain::scenario::{
    emit_resolved, load_scenario, load_scenario_str, units_from_value, ScenarioError,
};
use levichain::spill::SpillState;

/// Bench scenario shipped with the binary; also at `scenarios/poc_bench.json`.
pub const POC_BENCH_SCENARIO: &str = include_str!("../scenarios/poc_bench.json");

const DEFAULT_OUT_DIR: &str = "out";
const OUT_DIR_ENV: &str = "LEVICHAIN_OUT";

#[derive(Parser)]
#[command(
    name = "levichain",
    about = "Acoustic-levitator barrier simulation and planning for surface oil spills",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form spill and trapping quantities for given inputs.
    Physics(PhysicsArgs),
    /// Run a scenario and write its artifacts.
    Simulate(SimulateArgs),
    /// Place a levitator chain around the forecast spill perimeter.
    Plan(PlanArgs),
    /// Run the chained four-trial bench protocol on the bundled scenario.
    Poc(PocArgs),
    /// Re-emit a run's summary from its artifact directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct PhysicsArgs {
    /// Droplet radius, m.
    #[arg(long = "radius-m", default_value_t = 1e-3)]
    radius_m: f64,
    /// Oil density, kg/m^3.
    #[arg(long = "oil-density", default_value_t = 700.0)]
    oil_density: f64,
    /// Water density, kg/m^3.
    #[arg(long = "water-density", default_value_t = 1000.0)]
    water_density: f64,
    /// Oil viscosity, Pa-s.
    #[arg(long = "viscosity", default_value_t = 0.05)]
    viscosity: f64,
    /// Wind speed, m/s.
    #[arg(long = "wind-speed", default_value_t = 0.0)]
    wind_speed: f64,
    /// Spreading constant.
    #[arg(long = "spreading-constant", default_value_t = 1.0)]
    spreading_constant: f64,
    /// Sound speed in the medium, m/s.
    #[arg(long = "sound-speed", default_value_t = 343.0)]
    sound_speed: f64,
    /// Gravity, m/s^2.
    #[arg(long = "gravity", default_value_t = 9.81)]
    gravity: f64,
    /// Total transducer power, W.
    #[arg(long = "power-w", default_value_t = 14.0)]
    power_w: f64,
    /// Focus area, m^2.
    #[arg(long = "area-m2", default_value_t = 0.1)]
    area_m2: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file to run.
    #[arg(long)]
    scenario: PathBuf,
    /// RNG seed; equal seeds replay byte-identically.
    #[arg(long)]
    seed: u64,
    /// Output directory (default: $LEVICHAIN_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// plan.json whose levitators replace the scenario's.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Seed sweep, e.g. `seeds=1..10` (inclusive); writes seed-N subdirs.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario file; its first levitator is the chain template.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (default: $LEVICHAIN_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PocArgs {
    /// RNG seed for the chained trials.
    #[arg(long)]
    seed: u64,
    /// Output directory (default: $LEVICHAIN_OUT or ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Alternative bench scenario file (default: the bundled one).
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct ReportArgs {
    /// Artifact directory of a previous run.
    #[arg(long = "in")]
    in_dir: PathBuf,
    #[arg(long, value_enum)]
    format: ReportFormat,
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(err: ScenarioError) -> Self {
        match err {
            ScenarioError::Io { .. } => CliError::Runtime(err.to_string()),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<levichain::containment::RunError> for CliError {
    fn from(err: levichain::containment::RunError) -> Self {
        match err {
            levichain::containment::RunError::InvalidScenario(_) => {
                CliError::Validation(err.to_string())
            }
            _ => CliError::Runtime(err.to_string()),
        }
    }
}

impl From<levichain::planner::PlanError> for CliError {
    fn from(err: levichain::planner::PlanError) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.to_string())
    }
}

/// Entry point used by both `main` and the test suite.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders its own usage/help text; --help and --version
            // are successes, everything else is a usage error
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Physics(args) => cmd_physics(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Plan(args) => cmd_plan(&args),
        Command::Poc(args) => cmd_poc(&args),
        Command::Report(args) => cmd_report(&args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}

/// Compact numeric formatting: plain decimals in mid range, scientific
/// elsewhere, trailing zeros trimmed.
fn fmt_quantity(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let magnitude = value.abs();
    if (1e-3..1e7).contains(&magnitude) {
        let text = format!("{value:.6}");
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        let text = format!("{value:.6e}");
        match text.split_once('e') {
            Some((mantissa, exponent)) => {
                let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
                format!("{mantissa}e{exponent}")
            }
            None => text,
        }
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.clone();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(DEFAULT_OUT_DIR),
    }
}

fn cmd_physics(args: &PhysicsArgs) -> Result<(), CliError> {
    let env = Environment::new(
        args.wind_speed,
        args.water_density,
        args.sound_speed,
        args.gravity,
        args.spreading_constant,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let oil = OilType::new("cli", args.oil_density, args.viscosity)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let intensity = acoustic_intensity(args.power_w, args.area_m2)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let arp = arp_from_intensity(intensity, env.sound_speed)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let arf = buoyant_arf(args.radius_m, &oil, &env);
    let required = required_trapping_pressure(args.radius_m, &oil, &env)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    println!("intensity_w_m2: {}", fmt_quantity(intensity));
    println!("arp_pa: {}", fmt_quantity(arp));
    println!("arf_n: {}", fmt_quantity(arf));
    println!("required_arp_pa: {}", fmt_quantity(required));
    println!(
        "osr_signed: {}",
        fmt_quantity(oil_spill_rate_signed(&env, &oil))
    );
    println!(
        "osr_effective_per_s: {}",
        fmt_quantity(oil_spill_rate_effective(&env, &oil))
    );
    println!(
        "note: trapping holds when local pressure meets required_arp_pa; \
         rounded handbook figures (0.815 Pa, 1.23e-5 N, 3.91 Pa) agree within 2%"
    );
    Ok(())
}

fn load_with_plan(args: &SimulateArgs) -> Result<Scenario, CliError> {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(plan_path) = &args.plan {
        let text = std::fs::read_to_string(plan_path)?;
        let doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("plan file: {e}")))?;
        let Some(units) = doc.get("levitators") else {
            return Err(CliError::Validation(
                "plan file has no levitators array".to_string(),
            ));
        };
        scenario.units = units_from_value(units)?;
    }
    Ok(scenario)
}

fn run_one(scenario: &Scenario, seed: u64, dir: &Path) -> Result<SimReport, CliError> {
    let artifacts = RunArtifacts::create(dir)?;
    artifacts.write_string("scenario.resolved.json", &emit_resolved(scenario))?;
    let mut sim = Simulation::new(scenario.clone(), seed)?;
    sim.run_for(scenario.duration)?;
    let report = sim.report();
    artifacts.write_string("report.json", &levichain::report::report_json(&report))?;
    artifacts.write_timeseries(&report)?;
    artifacts.write_telemetry(sim.telemetry())?;
    Ok(report)
}

fn parse_sweep(text: &str) -> Result<(u64, u64), CliError> {
    let bad = || {
        CliError::Validation(format!(
            "cannot parse sweep \"{text}\"; expected seeds=A..B with A <= B"
        ))
    };
    let range = text.strip_prefix("seeds=").ok_or_else(bad)?;
    let (a, b) = range.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let scenario = load_with_plan(args)?;
    let base_dir = out_dir(&args.out);
    match &args.sweep {
        None => {
            let report = run_one(&scenario, args.seed, &base_dir)?;
            print_report_summary(&report, &base_dir);
            Ok(())
        }
        Some(sweep) => {
            let (first, last) = parse_sweep(sweep)?;
            let seeds: Vec<u64> = (first..=last).collect();
            let workers = std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1);
            let mut results: Vec<Option<Result<SimReport, CliError>>> =
                seeds.iter().map(|_| None).collect();
            std::thread::scope(|scope| {
                for (chunk_seeds, chunk_results) in seeds
                    .chunks(seeds.len().div_ceil(workers))
                    .zip(results.chunks_mut(seeds.len().div_ceil(workers)))
                {
                    let scenario = &scenario;
                    let base_dir = &base_dir;
                    scope.spawn(move || {
                        for (seed, slot) in chunk_seeds.iter().zip(chunk_results.iter_mut()) {
                            let dir = base_dir.join(format!("seed-{seed}"));
                            *slot = Some(run_one(scenario, *seed, &dir));
                        }
                    });
                }
            });
            for (seed, slot) in seeds.iter().zip(results) {
                let report = slot.expect("every sweep slot filled")?;
                println!(
                    "seed {seed}: trapped {} escaped {} free {} -> {}",
                    report.final_trapped,
                    report.final_escaped,
                    report.final_free,
                    base_dir.join(format!("seed-{seed}")).display()
                );
            }
            Ok(())
        }
    }
}

fn print_report_summary(report: &SimReport, dir: &Path) {
    let n = f64::from(report.droplet_count);
    println!("scenario_digest: {}", report.scenario_digest);
    println!("seed: {}", report.seed);
    println!("steps: {}", report.steps);
    println!(
        "trapped_fraction: {}",
        fmt_quantity(report.final_trapped as f64 / n)
    );
    println!(
        "escaped_fraction: {}",
        fmt_quantity(report.final_escaped as f64 / n)
    );
    println!(
        "free_fraction: {}",
        fmt_quantity(report.final_free as f64 / n)
    );
    println!("artifacts: {}", dir.display());
}

fn cmd_plan(args: &PlanArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let Some(template) = scenario.units.first() else {
        return Err(CliError::Validation(
            "plan needs at least one levitator in the scenario as the chain template".to_string(),
        ));
    };
    // all droplets sit at the origin before release, so the forecast needs
    // no RNG: positions are degenerate and radii do not enter the geometry
    let spill = SpillState::seed(
        scenario.spill.origin,
        scenario.spill.count,
        &scenario.spill.radius_spec,
        scenario.oil.clone(),
        0,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let mut spill = spill;
    spill.drift = scenario.spill.drift;
    let (centroid, radius_p90) =
        spill.forecast_drift(&scenario.env, scenario.wind_dir, scenario.planner.horizon);
    if !(radius_p90 > 0.0) {
        return Err(CliError::Validation(
            "forecast spill radius is zero; increase planner horizon_s or spill d0_m2ps"
                .to_string(),
        ));
    }
    let barrier = barrier_from_forecast(
        centroid,
        radius_p90,
        scenario.wind_dir,
        scenario.planner.arc_degrees,
        scenario.planner.inflation,
    )?;
    let plan = plan_chain(
        &barrier,
        template,
        &scenario.env,
        &scenario.oil,
        scenario.planner.design_droplet_radius,
        scenario.planner.overlap,
    )?;

    let dir = out_dir(&args.out);
    let artifacts = RunArtifacts::create(&dir)?;
    artifacts.write_string("scenario.resolved.json", &emit_resolved(&scenario))?;
    artifacts.write_string("plan.json", &levichain::report::plan_json(&plan))?;

    println!(
        "forecast_centroid_m: [{}, {}]",
        fmt_quantity(centroid.x),
        fmt_quantity(centroid.y)
    );
    println!("forecast_radius_p90_m: {}", fmt_quantity(radius_p90));
    println!(
        "barrier_radius_m: {}",
        fmt_quantity(scenario.planner.inflation * radius_p90)
    );
    println!("unit_count: {}", plan.placements.len());
    println!("spacing_m: {}", fmt_quantity(plan.spacing));
    println!("capture_radius_m: {}", fmt_quantity(plan.capture_radius));
    println!("coverage: {}", fmt_quantity(plan.coverage));
    println!("artifacts: {}", dir.display());
    Ok(())
}

fn cmd_poc(args: &PocArgs) -> Result<(), CliError> {
    let scenario = match &args.scenario {
        Some(path) => load_scenario(path)?,
        None => load_scenario_str(POC_BENCH_SCENARIO)?,
    };
    let (records, report) = replicate_poc_detailed(&scenario, args.seed)?;

    let dir = out_dir(&args.out);
    let artifacts = RunArtifacts::create(&dir)?;
    artifacts.write_string("scenario.resolved.json", &emit_resolved(&scenario))?;
    artifacts.write_string("trials.json", &levichain::report::trials_json(&records))?;
    artifacts.write_string("report.json", &levichain::report::report_json(&report))?;
    artifacts.write_timeseries(&report)?;

    println!("trial,pressure_level,initial_trapped_pct,final_trapped_pct,duration_min");
    for (index, record) in records.iter().enumerate() {
        println!(
            "{},{},{},{},{}",
            index + 1,
            record.pressure_level,
            fmt_quantity(record.initial_trapped_pct),
            fmt_quantity(record.final_trapped_pct),
            fmt_quantity(record.duration_min),
        );
    }
    let ordered = records
        .windows(2)
        .all(|w| w[1].final_trapped_pct > w[0].final_trapped_pct);
    println!("strictly_increasing: {ordered}");
    println!("artifacts: {}", dir.display());
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let report_path = args.in_dir.join("report.json");
    let trials_path = args.in_dir.join("trials.json");
    // a poc directory carries both files; the trial table is its summary
    if trials_path.exists() {
        let text = std::fs::read_to_string(&trials_path)?;
        let records: Vec<TrialRecord> = serde_json::from_str(&text)
            .map_err(|e| CliError::Runtime(format!("corrupt trials.json: {e}")))?;
        match args.format {
            ReportFormat::Json => print!("{text}"),
            ReportFormat::Csv => {
                println!("pressure_level,initial_trapped_pct,final_trapped_pct,duration_min");
                for record in records {
                    println!(
                        "{},{},{},{}",
                        record.pressure_level,
                        fmt_quantity(record.initial_trapped_pct),
                        fmt_quantity(record.final_trapped_pct),
                        fmt_quantity(record.duration_min),
                    );
                }
            }
        }
        Ok(())
    } else if report_path.exists() {
        let text = std::fs::read_to_string(&report_path)?;
        let report: SimReport = serde_json::from_str(&text)
            .map_err(|e| CliError::Runtime(format!("corrupt report.json: {e}")))?;
        match args.format {
            ReportFormat::Json => print!("{text}"),
            ReportFormat::Csv => {
                println!("metric,value");
                println!("seed,{}", report.seed);
                println!("scenario_digest,{}", report.scenario_digest);
                println!("droplet_count,{}", report.droplet_count);
                println!("steps,{}", report.steps);
                println!("final_free,{}", report.final_free);
                println!("final_trapped,{}", report.final_trapped);
                println!("final_escaped,{}", report.final_escaped);
            }
        }
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "no report.json or trials.json under {}",
            args.in_dir.display()
        )))
    }
}
