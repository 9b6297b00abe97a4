//! Monte Carlo experiment runner.
//!
//! A trial is identified by `(sigma, trial index)`; its channel, traffic
//! and random-placement streams are derived from the master seed and the
//! trial index only, so all strategies and all σ values of one trial see
//! the same LoS draws and the same standard-normal traffic deviates.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::channel::ChannelRealization;
use crate::error::{invalid, Error, Result};
use crate::geometry::{compute_distances, DistanceTables, ScenarioLayout};
use crate::planner::{
    build_gain_tensor, evaluate_plan, solve_p1, solve_random, solve_terrestrial, GainTensor, PlacementPlan, Strategy,
};
use crate::rng::{substream, Purpose};
use crate::routing::{solve_p2, TrajectoryPlan};
use crate::scenario::Scenario;
use crate::traffic::{sample_traffic, TrafficField};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub strategies: Vec<Strategy>,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        ExperimentConfig {
            scenario,
            strategies: Strategy::ALL.to_vec(),
            sigmas: vec![1.8, 2.8, 3.6],
            trials: 100,
            master_seed: 2024,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("at least one trial is required"));
        }
        if self.sigmas.is_empty() {
            return Err(invalid("at least one sigma is required"));
        }
        if self.strategies.is_empty() {
            return Err(invalid("at least one strategy is required"));
        }
        for &s in &self.sigmas {
            self.scenario.traffic_model(s)?;
        }
        self.scenario.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub strategy: Strategy,
    pub sigma: f64,
    pub trial: usize,
    pub weak_grids: usize,
    /// Fleet size actually placed: `min(M, |Q|)`.
    pub placed: usize,
    pub mean_gain: f64,
    pub matching_weight: f64,
    pub served_traffic: f64,
    /// Mobile fleet only.
    pub total_distance: Option<f64>,
    /// Mobile fleet only: every UAV's mission energy fits its battery.
    pub energy_feasible: Option<bool>,
}

/// Shared per-scenario state, built once per experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub layout: ScenarioLayout,
    pub distances: DistanceTables,
}

impl Prepared {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let layout = scenario.layout()?;
        let distances = compute_distances(&layout);
        Ok(Prepared { layout, distances })
    }
}

/// Everything random about one `(sigma, trial)`.
#[derive(Debug, Clone)]
pub struct TrialInputs {
    pub sigma: f64,
    pub trial: usize,
    pub realization: ChannelRealization,
    pub traffic: TrafficField,
    pub tensor: GainTensor,
}

pub fn trial_inputs(
    scenario: &Scenario,
    prepared: &Prepared,
    master_seed: u64,
    sigma: f64,
    trial: usize,
) -> Result<TrialInputs> {
    let mut ch_rng = substream(master_seed, trial as u64, Purpose::Channel);
    let realization = ChannelRealization::sample(&prepared.distances, &scenario.radio, &mut ch_rng)?;
    let model = scenario.traffic_model(sigma)?;
    let mut tr_rng = substream(master_seed, trial as u64, Purpose::Traffic);
    let traffic = sample_traffic(&model, prepared.layout.num_cells(), &mut tr_rng)?;
    let tensor = build_gain_tensor(&realization, &prepared.distances, &traffic, &scenario.radio)?;
    Ok(TrialInputs {
        sigma,
        trial,
        realization,
        traffic,
        tensor,
    })
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub metrics: TrialMetrics,
    pub plan: PlacementPlan,
    pub trajectory: Option<TrajectoryPlan>,
}

pub fn run_strategy(
    scenario: &Scenario,
    prepared: &Prepared,
    inputs: &TrialInputs,
    master_seed: u64,
    strategy: Strategy,
) -> Result<TrialOutcome> {
    let tensor = &inputs.tensor;
    let solver = &scenario.solver;
    let placed = solver.uavs.min(tensor.num_weak()).min(tensor.sites());
    let plan = match strategy {
        Strategy::Robotic => solve_p1(tensor, placed)?,
        Strategy::Terrestrial => solve_terrestrial(tensor, placed, solver.terrestrial_mode)?,
        Strategy::Random => {
            let mut rng = substream(master_seed, inputs.trial as u64, Purpose::RandomPlacement);
            solve_random(tensor, placed, &mut rng, solver.random_mode, solver.max_iterations)?
        }
    };
    let eval = evaluate_plan(&plan, tensor, placed)?;
    let trajectory = match strategy {
        Strategy::Robotic => Some(solve_p2(&plan, &prepared.layout, &scenario.platform)?),
        _ => None,
    };
    let metrics = TrialMetrics {
        strategy,
        sigma: inputs.sigma,
        trial: inputs.trial,
        weak_grids: tensor.num_weak(),
        placed,
        mean_gain: eval.objective,
        matching_weight: eval.matching_weight,
        served_traffic: eval.served_traffic,
        total_distance: trajectory.as_ref().map(|t| t.total_distance),
        energy_feasible: trajectory.as_ref().map(TrajectoryPlan::all_feasible),
    };
    Ok(TrialOutcome {
        metrics,
        plan,
        trajectory,
    })
}

fn with_context(e: Error, trial: usize, strategy: &str, sigma: f64) -> Error {
    Error::Trial {
        trial,
        strategy: strategy.to_string(),
        sigma,
        source: Box::new(e),
    }
}

/// Runs one strategy on one trial from scratch.
pub fn run_trial(config: &ExperimentConfig, sigma: f64, trial: usize, strategy: Strategy) -> Result<TrialOutcome> {
    let ctx = |e| with_context(e, trial, strategy.as_str(), sigma);
    let prepared = Prepared::new(&config.scenario).map_err(ctx)?;
    let inputs = trial_inputs(&config.scenario, &prepared, config.master_seed, sigma, trial).map_err(ctx)?;
    run_strategy(&config.scenario, &prepared, &inputs, config.master_seed, strategy).map_err(ctx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub sigma: f64,
    pub trials: usize,
    pub mean_gain: Stat,
    pub served_traffic: Stat,
    pub total_distance: Option<Stat>,
}

/// Sample mean, sample standard deviation and 95% normal half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat {
            mean,
            std,
            ci95: 1.96 * std / n.sqrt(),
        }
    }
}

pub fn summarize(rows: &[TrialMetrics], strategies: &[Strategy], sigmas: &[f64]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for &strategy in strategies {
        for &sigma in sigmas {
            let sel: Vec<&TrialMetrics> = rows
                .iter()
                .filter(|r| r.strategy == strategy && r.sigma == sigma)
                .collect();
            if sel.is_empty() {
                continue;
            }
            let gains: Vec<f64> = sel.iter().map(|r| r.mean_gain).collect();
            let served: Vec<f64> = sel.iter().map(|r| r.served_traffic).collect();
            let dist: Vec<f64> = sel.iter().filter_map(|r| r.total_distance).collect();
            out.push(SummaryRow {
                strategy,
                sigma,
                trials: sel.len(),
                mean_gain: Stat::of(&gains),
                served_traffic: Stat::of(&served),
                total_distance: (!dist.is_empty()).then(|| Stat::of(&dist)),
            });
        }
    }
    out
}

/// One finished `(sigma, trial)` with all requested strategies.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub inputs: TrialInputs,
    pub outcomes: Vec<TrialOutcome>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<TrialMetrics>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    pub fn summary_for(&self, strategy: Strategy, sigma: f64) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.strategy == strategy && s.sigma == sigma)
    }
}

/// Full strategy × σ × trial cross product. Trials run in parallel; results
/// are collected in index order, so output never depends on scheduling.
/// When an output directory is configured it is created and its metadata
/// written before any compute, and all CSVs are written at the end.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if let Some(dir) = &config.out_dir {
        crate::io::prepare_output_dir(dir, config)?;
    }
    let prepared = Prepared::new(&config.scenario)?;

    let jobs: Vec<(f64, usize)> = config
        .sigmas
        .iter()
        .flat_map(|&s| (0..config.trials).map(move |t| (s, t)))
        .collect();

    let records = jobs
        .par_iter()
        .map(|&(sigma, trial)| {
            let inputs = trial_inputs(&config.scenario, &prepared, config.master_seed, sigma, trial)
                .map_err(|e| with_context(e, trial, "inputs", sigma))?;
            let outcomes = config
                .strategies
                .iter()
                .map(|&s| {
                    run_strategy(&config.scenario, &prepared, &inputs, config.master_seed, s)
                        .map_err(|e| with_context(e, trial, s.as_str(), sigma))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrialRecord { inputs, outcomes })
        })
        .collect::<Result<Vec<_>>>()?;

    // strategy-major row order: strategy, sigma, trial
    let mut rows = Vec::with_capacity(records.len() * config.strategies.len());
    for (k, _) in config.strategies.iter().enumerate() {
        rows.extend(records.iter().map(|r| r.outcomes[k].metrics.clone()));
    }
    let summary = summarize(&rows, &config.strategies, &config.sigmas);
    let result = ExperimentResult { records, rows, summary };

    if let Some(dir) = &config.out_dir {
        crate::io::write_experiment(dir, config, &prepared.layout, &result)?;
    }
    Ok(result)
}
