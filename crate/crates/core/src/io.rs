//! CSV outputs (header row, dot decimals, fixed column order) and the plan
//! CSV reader.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{fly_energy, PlatformParams};
use crate::error::Result;
use crate::geometry::ScenarioLayout;
use crate::harness::{ExperimentConfig, ExperimentResult, SummaryRow, TrialMetrics};
use crate::planner::{GainTensor, PlacementPlan, Strategy};
use crate::rng::GENERATOR_NAME;
use crate::routing::TrajectoryPlan;
use crate::traffic::TrafficField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub strategy: Strategy,
    pub trial: usize,
    /// 1-based.
    pub epoch: usize,
    pub grid_row: usize,
    pub grid_col: usize,
    pub site_x: f64,
    pub site_y: f64,
    pub gain: f64,
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub trial: usize,
    pub uav_id: usize,
    /// 1-based; epoch `T + 1` is the return leg to the BS.
    pub epoch: usize,
    pub site_x: f64,
    pub site_y: f64,
    pub leg_m: f64,
    pub cumulative_m: f64,
    #[serde(rename = "e_fly_J")]
    pub e_fly_j: f64,
    pub feasible_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub strategy: Strategy,
    pub sigma: f64,
    pub trial: usize,
    pub weak_grids: usize,
    pub placed: usize,
    pub mean_gain: f64,
    pub matching_weight: f64,
    pub served_traffic: f64,
    pub total_distance_m: Option<f64>,
    pub energy_feasible: Option<bool>,
}

impl From<&TrialMetrics> for TrialRow {
    fn from(m: &TrialMetrics) -> Self {
        TrialRow {
            strategy: m.strategy,
            sigma: m.sigma,
            trial: m.trial,
            weak_grids: m.weak_grids,
            placed: m.placed,
            mean_gain: m.mean_gain,
            matching_weight: m.matching_weight,
            served_traffic: m.served_traffic,
            total_distance_m: m.total_distance,
            energy_feasible: m.energy_feasible,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SummaryCsvRow {
    strategy: Strategy,
    sigma: f64,
    trials: usize,
    mean_gain_mean: f64,
    mean_gain_std: f64,
    mean_gain_ci95: f64,
    served_traffic_mean: f64,
    served_traffic_std: f64,
    served_traffic_ci95: f64,
    total_distance_mean: Option<f64>,
    total_distance_std: Option<f64>,
}

impl From<&SummaryRow> for SummaryCsvRow {
    fn from(s: &SummaryRow) -> Self {
        SummaryCsvRow {
            strategy: s.strategy,
            sigma: s.sigma,
            trials: s.trials,
            mean_gain_mean: s.mean_gain.mean,
            mean_gain_std: s.mean_gain.std,
            mean_gain_ci95: s.mean_gain.ci95,
            served_traffic_mean: s.served_traffic.mean,
            served_traffic_std: s.served_traffic.std,
            served_traffic_ci95: s.served_traffic.ci95,
            total_distance_mean: s.total_distance.map(|d| d.mean),
            total_distance_std: s.total_distance.map(|d| d.std),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct LayoutRow {
    kind: &'static str,
    index: usize,
    row: usize,
    col: usize,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct TrafficRow {
    epoch: usize,
    grid_index: usize,
    demand: f64,
}

pub fn plan_rows(trial: usize, plan: &PlacementPlan, tensor: &GainTensor, layout: &ScenarioLayout) -> Vec<PlanRow> {
    let mut rows = Vec::new();
    for (t, pairs) in plan.assignments.iter().enumerate() {
        for &(grid, site) in pairs {
            let q = tensor.position(grid).expect("plans only reference weak grids");
            let (grid_row, grid_col) = layout.cell_row_col(grid);
            let p = layout.candidate_sites[site];
            rows.push(PlanRow {
                strategy: plan.strategy,
                trial,
                epoch: t + 1,
                grid_row,
                grid_col,
                site_x: p.x,
                site_y: p.y,
                gain: tensor.gain(t, q, site),
                demand: tensor.demand(t, q),
            });
        }
    }
    rows
}

pub fn trajectory_rows(
    trial: usize,
    traj: &TrajectoryPlan,
    layout: &ScenarioLayout,
    platform: &PlatformParams,
) -> Result<Vec<TrajectoryRow>> {
    let mut rows = Vec::new();
    for (uav, route) in traj.routes.iter().enumerate() {
        let feasible = traj.energy[uav].feasible;
        let stops = route
            .iter()
            .map(|&j| layout.candidate_sites[j])
            .chain(std::iter::once(layout.bs_position));
        for (k, p) in stops.enumerate() {
            let cumulative = traj.cumulative[uav][k];
            rows.push(TrajectoryRow {
                trial,
                uav_id: uav,
                epoch: k + 1,
                site_x: p.x,
                site_y: p.y,
                leg_m: traj.legs[uav][k],
                cumulative_m: cumulative,
                e_fly_j: fly_energy(cumulative, platform)?,
                feasible_flag: feasible,
            });
        }
    }
    Ok(rows)
}

pub fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_rows(fs::File::create(path)?, rows)
}

/// Empty files still get a header row.
fn write_file_with_header<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(header)?;
        wtr.flush()?;
        Ok(())
    } else {
        write_file(path, rows)
    }
}

const PLAN_HEADER: &[&str] = &[
    "strategy", "trial", "epoch", "grid_row", "grid_col", "site_x", "site_y", "gain", "demand",
];
const TRAJECTORY_HEADER: &[&str] = &[
    "trial", "uav_id", "epoch", "site_x", "site_y", "leg_m", "cumulative_m", "e_fly_J", "feasible_flag",
];

pub fn write_plans(path: &Path, rows: &[PlanRow]) -> Result<()> {
    write_file_with_header(path, PLAN_HEADER, rows)
}

pub fn write_trajectories(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    write_file_with_header(path, TRAJECTORY_HEADER, rows)
}

pub fn write_layout(path: &Path, layout: &ScenarioLayout) -> Result<()> {
    let cells = layout.cell_centers.iter().enumerate().map(|(i, p)| {
        let (row, col) = layout.cell_row_col(i);
        LayoutRow {
            kind: "cell",
            index: i,
            row,
            col,
            x: p.x,
            y: p.y,
        }
    });
    let sites = layout.candidate_sites.iter().enumerate().map(|(j, p)| {
        let (row, col) = layout.site_row_col(j);
        LayoutRow {
            kind: "site",
            index: j,
            row,
            col,
            x: p.x,
            y: p.y,
        }
    });
    let bs = LayoutRow {
        kind: "bs",
        index: 0,
        row: layout.grid_rows,
        col: layout.grid_cols,
        x: layout.bs_position.x,
        y: layout.bs_position.y,
    };
    let rows: Vec<LayoutRow> = cells.chain(sites).chain(std::iter::once(bs)).collect();
    write_file(path, &rows)
}

pub fn write_traffic(path: &Path, field: &TrafficField) -> Result<()> {
    let rows: Vec<TrafficRow> = (0..field.epochs())
        .flat_map(|t| {
            field.epoch_row(t).iter().enumerate().map(move |(i, &demand)| TrafficRow {
                epoch: t + 1,
                grid_index: i,
                demand,
            })
        })
        .collect();
    write_file(path, &rows)
}

/// Parses a plan CSV as written by [`write_plans`].
pub fn read_plan_rows<R: Read>(r: R) -> Result<Vec<PlanRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

fn metadata_text(config: &ExperimentConfig) -> String {
    let strategies: Vec<&str> = config.strategies.iter().map(Strategy::as_str).collect();
    let sigmas: Vec<String> = config.sigmas.iter().map(|s| s.to_string()).collect();
    format!(
        "generator = \"{GENERATOR_NAME}\"\nmaster_seed = {}\ntrials = {}\nsigmas = [{}]\nstrategies = [{}]\n\n# scenario\n{}",
        config.master_seed,
        config.trials,
        sigmas.join(", "),
        strategies.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", "),
        config.scenario.to_text()
    )
}

/// Creates the output directory and writes run metadata; fails before any
/// simulation work if the directory is not writable.
pub fn prepare_output_dir(dir: &Path, config: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("metadata.toml"), metadata_text(config))?;
    Ok(())
}

pub fn write_experiment(
    dir: &Path,
    config: &ExperimentConfig,
    layout: &ScenarioLayout,
    result: &ExperimentResult,
) -> Result<()> {
    let trials: Vec<TrialRow> = result.rows.iter().map(TrialRow::from).collect();
    write_file(&dir.join("trials.csv"), &trials)?;
    let summary: Vec<SummaryCsvRow> = result.summary.iter().map(SummaryCsvRow::from).collect();
    write_file(&dir.join("summary.csv"), &summary)?;
    write_layout(&dir.join("layout.csv"), layout)?;

    for &sigma in &config.sigmas {
        let mut plans = Vec::new();
        let mut trajectories = Vec::new();
        for rec in result.records.iter().filter(|r| r.inputs.sigma == sigma) {
            for out in &rec.outcomes {
                plans.extend(plan_rows(rec.inputs.trial, &out.plan, &rec.inputs.tensor, layout));
                if let Some(tr) = &out.trajectory {
                    trajectories.extend(trajectory_rows(rec.inputs.trial, tr, layout, &config.scenario.platform)?);
                }
            }
        }
        write_plans(&dir.join(format!("plans_sigma_{sigma}.csv")), &plans)?;
        if config.strategies.contains(&Strategy::Robotic) {
            write_trajectories(&dir.join(format!("trajectories_sigma_{sigma}.csv")), &trajectories)?;
        }
    }
    Ok(())
}
