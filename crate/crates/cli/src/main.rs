use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rairs::energy::{flight_range, grasp_energy, reflect_energy, size_irs};
use rairs::harness::{run_experiment, ExperimentConfig, ExperimentResult};
use rairs::io::{plan_rows, read_plan_rows, trajectory_rows, write_plans, write_traffic, write_trajectories};
use rairs::oracle::{run_suite, validate_plan_rows, SuiteOptions};
use rairs::planner::Strategy;
use rairs::scenario::Scenario;
use rairs::{Error, Result};

#[derive(Parser)]
#[command(name = "rairs", version, about = "Robotic aerial IRS placement, routing and Monte Carlo evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single trial and write its placements and trajectories.
    Plan(PlanArgs),
    /// Monte Carlo sweep over strategies, sigma values and trials.
    Sweep(SweepArgs),
    /// Energy budget, flight range and IRS sizing report.
    Energy(ConfigArg),
    /// Run the reference checks, or validate a plan CSV.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario file; reference defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Log-scale traffic spread; the scenario value when omitted.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    trial: usize,
    #[arg(long, value_delimiter = ',', default_values_t = Strategy::ALL.map(|s| s.to_string()))]
    strategy: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.8, 2.8, 3.6])]
    sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = Strategy::ALL.map(|s| s.to_string()))]
    strategy: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte Carlo draws per fading check.
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    /// Plan CSV to check instead of running the reference checks.
    #[arg(long)]
    plan: Option<PathBuf>,
}

fn load_scenario(arg: &ConfigArg) -> Result<Scenario> {
    match &arg.config {
        Some(p) => Scenario::load(p),
        None => Ok(Scenario::default()),
    }
}

fn parse_strategies(names: &[String]) -> Result<Vec<Strategy>> {
    names.iter().map(|s| s.trim().parse()).collect()
}

fn print_summary(result: &ExperimentResult) {
    println!("strategy     sigma  trials  mean_gain (±95%)     served_traffic (±95%)");
    for s in &result.summary {
        println!(
            "{:<12} {:<6} {:<7} {:>8.4} ± {:<8.4}  {:>12.1} ± {:.1}",
            s.strategy.as_str(),
            s.sigma,
            s.trials,
            s.mean_gain.mean,
            s.mean_gain.ci95,
            s.served_traffic.mean,
            s.served_traffic.ci95
        );
    }
}

fn cmd_plan(args: PlanArgs) -> Result<()> {
    let scenario = load_scenario(&args.config)?;
    let sigma = args.sigma.unwrap_or(scenario.traffic.sigma_log);
    let mut config = ExperimentConfig::new(scenario);
    config.strategies = parse_strategies(&args.strategy)?;
    config.sigmas = vec![sigma];
    config.trials = args.trial + 1;
    config.master_seed = args.seed;
    config.validate()?;
    rairs::io::prepare_output_dir(&args.out, &config)?;

    // only the requested trial is computed
    let prepared = rairs::harness::Prepared::new(&config.scenario)?;
    let inputs = rairs::harness::trial_inputs(&config.scenario, &prepared, args.seed, sigma, args.trial)?;
    let mut plans = Vec::new();
    let mut trajectories = Vec::new();
    for &s in &config.strategies {
        let out = rairs::harness::run_strategy(&config.scenario, &prepared, &inputs, args.seed, s)?;
        let m = &out.metrics;
        println!(
            "{:<12} weak grids {:>3}  placed {:>2}  mean gain {:.4}  served traffic {:.1}{}",
            s.as_str(),
            m.weak_grids,
            m.placed,
            m.mean_gain,
            m.served_traffic,
            m.total_distance.map_or(String::new(), |d| format!("  flown {d:.1} m")),
        );
        plans.extend(plan_rows(args.trial, &out.plan, &inputs.tensor, &prepared.layout));
        if let Some(tr) = &out.trajectory {
            trajectories.extend(trajectory_rows(args.trial, tr, &prepared.layout, &config.scenario.platform)?);
        }
    }
    write_plans(&args.out.join("plans.csv"), &plans)?;
    write_trajectories(&args.out.join("trajectories.csv"), &trajectories)?;
    write_traffic(&args.out.join("traffic.csv"), &inputs.traffic)?;
    rairs::io::write_layout(&args.out.join("layout.csv"), &prepared.layout)?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut config = ExperimentConfig::new(load_scenario(&args.config)?);
    config.strategies = parse_strategies(&args.strategy)?;
    config.sigmas = args.sigma;
    config.trials = args.trials;
    config.master_seed = args.seed;
    config.out_dir = Some(args.out.clone());
    let result = run_experiment(&config)?;
    print_summary(&result);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_energy(args: ConfigArg) -> Result<()> {
    let sc = load_scenario(&args)?;
    let p = &sc.platform;
    let fr = flight_range(p);
    println!("service time        {:.1} h", p.service_hours);
    println!("battery             {:.0} J", p.battery);
    println!("grasping energy     {:.0} J", grasp_energy(p));
    println!("reflecting energy   {:.0} J", reflect_energy(p));
    println!("propulsion budget   {:.0} J", fr.budget_j);
    if fr.feasible {
        println!("flight range        {:.1} m", fr.meters);
    } else {
        println!("flight range        0 m (hold energy exceeds battery)");
    }
    let lambda = sc.radio.wavelength();
    let d_min = sc.geometry.h3_m;
    match size_irs(d_min, lambda) {
        Ok(s) => println!(
            "compliant IRS       {0}x{0} = {1} elements, far field {2:.3} m <= D_min {3} m",
            s.n_r, s.n_elements, s.fraunhofer, d_min
        ),
        Err(e) => println!("compliant IRS       none: {e}"),
    }
    let side = (sc.radio.n_elements as f64).sqrt().round() as usize;
    println!(
        "configured IRS      {0}x{0} = {1} elements, far field {2:.3} m",
        side,
        sc.radio.n_elements,
        rairs::energy::fraunhofer_distance(side, lambda)
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<bool> {
    if let Some(path) = &args.plan {
        let m = match &args.config.config {
            Some(_) => Some(load_scenario(&args.config)?.solver.uavs),
            None => None,
        };
        let rows = read_plan_rows(fs::File::open(path)?)?;
        return match validate_plan_rows(&rows, m) {
            Ok(()) => {
                println!("PASS {} ({} rows)", path.display(), rows.len());
                Ok(true)
            }
            Err(msg) => Err(Error::Validation(msg)),
        };
    }
    let opts = SuiteOptions {
        seed: args.seed,
        draws: args.draws,
        ..SuiteOptions::default()
    };
    let checks = run_suite(&opts);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn error_line(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Plan(a) => cmd_plan(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Energy(a) => cmd_energy(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", serde_json::json!({ "error": "validation", "message": "reference checks failed" }));
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::FAILURE
        }
    }
}

