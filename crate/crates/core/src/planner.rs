//! Traffic-gated gain tensor and the placement problems: the mobile fleet
//! (re-placed every epoch), the fixed terrestrial baseline and the random
//! baseline.
//!
//! Constraints have no coupling across epochs, so the mobile problem is one
//! independent cardinality-`m` maximum-weight bipartite matching per epoch,
//! solved exactly by successive shortest paths on a unit-capacity flow
//! network. The objective counts an unserved weak grid as a unit gain, so
//! edge weights are `G − 1 ≥ 0` and the reported average is
//! `1 + weight / (|T|·|Q|)`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{cascaded_snr_db, snr_ratio, ChannelRealization, RadioParams};
use crate::error::{invalid, Error, Result};
use crate::geometry::DistanceTables;
use crate::traffic::{gate_gain, TrafficField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Robotic,
    Terrestrial,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Robotic, Strategy::Terrestrial, Strategy::Random];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Robotic => "robotic",
            Strategy::Terrestrial => "terrestrial",
            Strategy::Random => "random",
        }
    }

    /// Fixed strategies must keep the epoch-1 placement for every epoch.
    pub fn is_fixed(&self) -> bool {
        !matches!(self, Strategy::Robotic)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "robotic" => Ok(Strategy::Robotic),
            "terrestrial" => Ok(Strategy::Terrestrial),
            "random" => Ok(Strategy::Random),
            other => Err(invalid(format!("unknown strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerrestrialMode {
    /// Optimize on the first epoch only and keep that placement.
    #[default]
    Epoch1,
    /// Best fixed placement given every epoch's gains.
    Clairvoyant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandomMode {
    /// Uniform feasible support drawn directly.
    #[default]
    Direct,
    /// Set `m` random cells of the grid×site matrix and retry until the
    /// exclusivity constraints hold.
    Rejection,
}

/// `G_tij` over epochs × weak grids × sites, with the weak grids' demand.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTensor {
    gains: Vec<f64>,
    demand: Vec<f64>,
    epochs: usize,
    /// Layout indices of the weak-coverage grids, ascending.
    weak_grids: Vec<usize>,
    sites: usize,
}

impl GainTensor {
    /// `gains` is row-major `[epoch][weak grid][site]`, `demand` is
    /// `[epoch][weak grid]`.
    pub fn from_parts(
        epochs: usize,
        weak_grids: Vec<usize>,
        sites: usize,
        gains: Vec<f64>,
        demand: Vec<f64>,
    ) -> Result<Self> {
        let q = weak_grids.len();
        if gains.len() != epochs * q * sites {
            return Err(invalid(format!(
                "gain tensor has {} entries, expected {epochs}x{q}x{sites}",
                gains.len()
            )));
        }
        if demand.len() != epochs * q {
            return Err(invalid("demand must have one entry per (epoch, weak grid)"));
        }
        if let Some(g) = gains.iter().find(|g| !(**g >= 1.0 && g.is_finite())) {
            return Err(invalid(format!("gain entries must be finite and >= 1, found {g}")));
        }
        if weak_grids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("weak grid indices must be strictly ascending"));
        }
        Ok(GainTensor {
            gains,
            demand,
            epochs,
            weak_grids,
            sites,
        })
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn weak_grids(&self) -> &[usize] {
        &self.weak_grids
    }

    pub fn num_weak(&self) -> usize {
        self.weak_grids.len()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn is_empty(&self) -> bool {
        self.weak_grids.is_empty()
    }

    /// Gain by weak-grid position `q` (not layout index).
    pub fn gain(&self, epoch: usize, q: usize, site: usize) -> f64 {
        self.gains[(epoch * self.num_weak() + q) * self.sites + site]
    }

    pub fn demand(&self, epoch: usize, q: usize) -> f64 {
        self.demand[epoch * self.num_weak() + q]
    }

    /// Slice `[weak grid][site]` of one epoch.
    pub fn epoch_gains(&self, epoch: usize) -> &[f64] {
        let len = self.num_weak() * self.sites;
        &self.gains[epoch * len..(epoch + 1) * len]
    }

    /// Position of a layout grid index inside the weak set.
    pub fn position(&self, grid: usize) -> Option<usize> {
        self.weak_grids.binary_search(&grid).ok()
    }

    pub fn max_entry(&self) -> f64 {
        self.gains.iter().copied().fold(1.0, f64::max)
    }
}

/// Composes the SNR ratio of every (weak grid, site) pair with the traffic
/// gate of every epoch. An empty weak set yields an empty tensor, for which
/// every plan is empty with objective 1.
pub fn build_gain_tensor(
    realization: &ChannelRealization,
    distances: &DistanceTables,
    traffic: &TrafficField,
    params: &RadioParams,
) -> Result<GainTensor> {
    let q = &realization.weak_set;
    let sites = distances.num_sites();
    let epochs = traffic.epochs();

    let mut ratio = Vec::with_capacity(q.len() * sites);
    for &i in q {
        let gd = realization.direct_snr_db[i];
        for j in 0..sites {
            let gc = cascaded_snr_db(distances.r_bs_site[j], distances.site_ut(i, j), params)?;
            ratio.push(snr_ratio(gd, gc));
        }
    }

    let mut gains = Vec::with_capacity(epochs * ratio.len());
    let mut demand = Vec::with_capacity(epochs * q.len());
    for t in 0..epochs {
        let thr = traffic.threshold[t];
        for (qi, &i) in q.iter().enumerate() {
            let f = traffic.at(t, i);
            demand.push(f);
            gains.extend(ratio[qi * sites..(qi + 1) * sites].iter().map(|&g| gate_gain(g, f, thr)));
        }
    }
    GainTensor::from_parts(epochs, q.clone(), sites, gains, demand)
}

/// One (weak-grid position, site) selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub q: usize,
    pub site: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSolution {
    /// Sorted by weak-grid position.
    pub pairs: Vec<Pair>,
    /// `Σ (G − 1)` over the selected pairs.
    pub weight: f64,
}

const GAIN_EPS: f64 = 1e-12;

/// Exact cardinality-`m` maximum of `Σ (G − 1)` over one epoch's
/// `rows × cols` gain matrix with row and column exclusivity.
///
/// Successive shortest paths (Bellman–Ford with a FIFO queue, since
/// residual costs go negative) augment one unit at a time while the best
/// path still improves the weight. Remaining slots are filled with
/// zero-weight pairs taken from the lowest free rows and columns.
pub fn solve_epoch(gains: &[f64], rows: usize, cols: usize, m: usize) -> Result<EpochSolution> {
    if gains.len() != rows * cols {
        return Err(invalid(format!("gain matrix has {} entries, expected {rows}x{cols}", gains.len())));
    }
    if m > rows.min(cols) {
        return Err(Error::Infeasible(format!(
            "cannot place exactly {m} surfaces with {rows} weak grids and {cols} sites"
        )));
    }

    let mut net = FlowNetwork::new(rows + cols + 2);
    let (src, sink) = (0, rows + cols + 1);
    for r in 0..rows {
        net.add_edge(src, 1 + r, 0.0);
    }
    // row-to-column edges are added in (row, col) order, which fixes the
    // scan order and so the result on ties
    let mut pair_edges = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let w = gains[r * cols + c] - 1.0;
            if w > GAIN_EPS {
                pair_edges.push((net.add_edge(1 + r, 1 + rows + c, -w), r, c));
            }
        }
    }
    for c in 0..cols {
        net.add_edge(1 + rows + c, sink, 0.0);
    }

    for _ in 0..m {
        if !net.augment_if_negative(src, sink) {
            break;
        }
    }

    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut pairs = Vec::with_capacity(m);
    for &(e, r, c) in &pair_edges {
        if net.edges[e].cap == 0 {
            pairs.push(Pair { q: r, site: c });
            row_used[r] = true;
            col_used[c] = true;
        }
    }
    let free_rows = (0..rows).filter(|&r| !row_used[r]);
    let free_cols = (0..cols).filter(|&c| !col_used[c]);
    let fill = m - pairs.len();
    pairs.extend(free_rows.zip(free_cols).take(fill).map(|(q, site)| Pair { q, site }));
    pairs.sort();

    let weight = pairs.iter().map(|p| gains[p.q * cols + p.site] - 1.0).sum();
    Ok(EpochSolution { pairs, weight })
}

struct FlowEdge {
    to: usize,
    cap: u8,
    cost: f64,
}

struct FlowNetwork {
    edges: Vec<FlowEdge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds a unit-capacity edge and its residual twin; returns the forward id.
    fn add_edge(&mut self, from: usize, to: usize, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(FlowEdge { to, cap: 1, cost });
        self.edges.push(FlowEdge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Pushes one unit along the cheapest path if its cost is negative.
    fn augment_if_negative(&mut self, src: usize, sink: usize) -> bool {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        let mut queued = vec![false; n];
        let mut relaxations = vec![0usize; n];
        let mut queue = VecDeque::new();
        dist[src] = 0.0;
        queue.push_back(src);
        queued[src] = true;

        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &e in &self.adj[u] {
                let edge = &self.edges[e];
                if edge.cap == 0 {
                    continue;
                }
                let nd = dist[u] + edge.cost;
                if nd < dist[edge.to] - GAIN_EPS {
                    dist[edge.to] = nd;
                    via[edge.to] = e;
                    relaxations[edge.to] += 1;
                    // guards against rounding-induced negative cycles
                    if !queued[edge.to] && relaxations[edge.to] <= n {
                        queued[edge.to] = true;
                        queue.push_back(edge.to);
                    }
                }
            }
        }

        if !(dist[sink] < -GAIN_EPS) {
            return false;
        }
        let mut v = sink;
        while v != src {
            let e = via[v];
            self.edges[e].cap -= 1;
            self.edges[e ^ 1].cap += 1;
            v = self.edges[e ^ 1].to;
        }
        true
    }
}

/// Selected (layout grid, site) pairs for every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementPlan {
    pub strategy: Strategy,
    /// Per epoch, `(grid, site)` in layout indices sorted by grid.
    pub assignments: Vec<Vec<(usize, usize)>>,
    pub objective: f64,
    /// `Σ_t Σ_selected (G − 1)`.
    pub matching_weight: f64,
}

impl PlacementPlan {
    pub fn epochs(&self) -> usize {
        self.assignments.len()
    }

    /// Sites occupied at `epoch`, ascending.
    pub fn sites_at(&self, epoch: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.assignments[epoch].iter().map(|&(_, j)| j).collect();
        s.sort_unstable();
        s
    }
}

/// Average traffic-aware gain with unit gain for unserved weak grids.
pub fn objective_from_weight(weight: f64, epochs: usize, weak: usize) -> f64 {
    if epochs == 0 || weak == 0 {
        1.0
    } else {
        1.0 + weight / (epochs * weak) as f64
    }
}

fn check_m(tensor: &GainTensor, m: usize) -> Result<()> {
    if m > tensor.num_weak().min(tensor.sites()) {
        return Err(Error::Infeasible(format!(
            "cannot place exactly {m} surfaces with {} weak grids and {} sites",
            tensor.num_weak(),
            tensor.sites()
        )));
    }
    Ok(())
}

fn to_layout(tensor: &GainTensor, pairs: &[Pair]) -> Vec<(usize, usize)> {
    pairs.iter().map(|p| (tensor.weak_grids[p.q], p.site)).collect()
}

fn plan_weight(tensor: &GainTensor, per_epoch: &[Vec<Pair>]) -> f64 {
    per_epoch
        .iter()
        .enumerate()
        .map(|(t, pairs)| pairs.iter().map(|p| tensor.gain(t, p.q, p.site) - 1.0).sum::<f64>())
        .sum()
}

fn finish(tensor: &GainTensor, strategy: Strategy, per_epoch: Vec<Vec<Pair>>) -> PlacementPlan {
    let weight = plan_weight(tensor, &per_epoch);
    PlacementPlan {
        strategy,
        assignments: per_epoch.iter().map(|p| to_layout(tensor, p)).collect(),
        objective: objective_from_weight(weight, tensor.epochs(), tensor.num_weak()),
        matching_weight: weight,
    }
}

/// Mobile fleet: an independent exact solve per epoch.
pub fn solve_p1(tensor: &GainTensor, m: usize) -> Result<PlacementPlan> {
    check_m(tensor, m)?;
    let (rows, cols) = (tensor.num_weak(), tensor.sites());
    let per_epoch = (0..tensor.epochs())
        .map(|t| solve_epoch(tensor.epoch_gains(t), rows, cols, m).map(|s| s.pairs))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(tensor, Strategy::Robotic, per_epoch))
}

/// Fixed surfaces: one placement held for all epochs.
pub fn solve_terrestrial(tensor: &GainTensor, m: usize, mode: TerrestrialMode) -> Result<PlacementPlan> {
    check_m(tensor, m)?;
    let (rows, cols) = (tensor.num_weak(), tensor.sites());
    if tensor.epochs() == 0 {
        return Ok(finish(tensor, Strategy::Terrestrial, Vec::new()));
    }
    let pairs = match mode {
        TerrestrialMode::Epoch1 => solve_epoch(tensor.epoch_gains(0), rows, cols, m)?.pairs,
        TerrestrialMode::Clairvoyant => {
            // sum of (G − 1) over epochs, shifted back so solve_epoch sees gains
            let mut summed = vec![1.0; rows * cols];
            for t in 0..tensor.epochs() {
                for (acc, g) in summed.iter_mut().zip(tensor.epoch_gains(t)) {
                    *acc += g - 1.0;
                }
            }
            solve_epoch(&summed, rows, cols, m)?.pairs
        }
    };
    Ok(finish(tensor, Strategy::Terrestrial, vec![pairs; tensor.epochs()]))
}

/// Random fixed baseline: a uniformly random feasible first-epoch support
/// held for all epochs.
pub fn solve_random<R: Rng + ?Sized>(
    tensor: &GainTensor,
    m: usize,
    rng: &mut R,
    mode: RandomMode,
    max_iterations: usize,
) -> Result<PlacementPlan> {
    check_m(tensor, m)?;
    let pairs = match mode {
        RandomMode::Direct => random_support(tensor.num_weak(), tensor.sites(), m, rng),
        RandomMode::Rejection => rejection_support(tensor.num_weak(), tensor.sites(), m, rng, max_iterations)?,
    };
    Ok(finish(tensor, Strategy::Random, vec![pairs; tensor.epochs()]))
}

/// `m` distinct rows, `m` distinct columns and a uniform bijection between
/// them: every feasible support is equally likely.
pub fn random_support<R: Rng + ?Sized>(rows: usize, cols: usize, m: usize, rng: &mut R) -> Vec<Pair> {
    let mut rs = index::sample(rng, rows, m).into_vec();
    rs.sort_unstable();
    let mut cs = index::sample(rng, cols, m).into_vec();
    cs.shuffle(rng);
    let mut pairs: Vec<Pair> = rs.into_iter().zip(cs).map(|(q, site)| Pair { q, site }).collect();
    pairs.sort();
    pairs
}

pub fn rejection_support<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    m: usize,
    rng: &mut R,
    max_iterations: usize,
) -> Result<Vec<Pair>> {
    for _ in 0..max_iterations {
        let cells = index::sample(rng, rows * cols, m);
        let mut pairs: Vec<Pair> = cells
            .iter()
            .map(|c| Pair {
                q: c / cols,
                site: c % cols,
            })
            .collect();
        let mut rows_seen = vec![false; rows];
        let mut cols_seen = vec![false; cols];
        let ok = pairs
            .iter()
            .all(|p| !std::mem::replace(&mut rows_seen[p.q], true) & !std::mem::replace(&mut cols_seen[p.site], true));
        if ok {
            pairs.sort();
            return Ok(pairs);
        }
    }
    Err(Error::Terminated(max_iterations))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanEvaluation {
    pub objective: f64,
    pub matching_weight: f64,
    /// Aggregate demand of served grids per epoch.
    pub served_per_epoch: Vec<f64>,
    pub served_traffic: f64,
}

/// Checks a plan against the tensor's constraints: exactly `m` pairs per
/// epoch, exclusive grids and sites, weak grids only, and a constant
/// placement for fixed strategies.
pub fn check_plan(plan: &PlacementPlan, tensor: &GainTensor, m: usize) -> Result<()> {
    if plan.epochs() != tensor.epochs() {
        return Err(Error::Validation(format!(
            "plan covers {} epochs, tensor has {}",
            plan.epochs(),
            tensor.epochs()
        )));
    }
    for (t, pairs) in plan.assignments.iter().enumerate() {
        if pairs.len() != m {
            return Err(Error::Validation(format!(
                "placement count: epoch {t} has {} pairs, expected exactly {m}",
                pairs.len()
            )));
        }
        let mut grids: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let mut sites: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        grids.sort_unstable();
        sites.sort_unstable();
        if grids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("area exclusivity: epoch {t} serves a grid twice")));
        }
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("site exclusivity: epoch {t} uses a site twice")));
        }
        if let Some(g) = grids.iter().find(|g| tensor.position(**g).is_none()) {
            return Err(Error::Validation(format!("epoch {t} serves grid {g} outside the weak set")));
        }
        if let Some(s) = sites.iter().find(|s| **s >= tensor.sites()) {
            return Err(Error::Validation(format!("epoch {t} uses unknown site {s}")));
        }
        if plan.strategy.is_fixed() && pairs != &plan.assignments[0] {
            return Err(Error::Validation(format!(
                "fixed placement: {} plan changes at epoch {t}",
                plan.strategy
            )));
        }
    }
    Ok(())
}

pub fn evaluate_plan(plan: &PlacementPlan, tensor: &GainTensor, m: usize) -> Result<PlanEvaluation> {
    check_plan(plan, tensor, m)?;
    let mut weight = 0.0;
    let mut served_per_epoch = Vec::with_capacity(plan.epochs());
    for (t, pairs) in plan.assignments.iter().enumerate() {
        let mut served = 0.0;
        for &(grid, site) in pairs {
            let q = tensor.position(grid).expect("checked above");
            weight += tensor.gain(t, q, site) - 1.0;
            served += tensor.demand(t, q);
        }
        served_per_epoch.push(served);
    }
    Ok(PlanEvaluation {
        objective: objective_from_weight(weight, tensor.epochs(), tensor.num_weak()),
        matching_weight: weight,
        served_traffic: served_per_epoch.iter().sum(),
        served_per_epoch,
    })
}
