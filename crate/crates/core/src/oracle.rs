//! Reference checks that stay independent of the production code paths:
//! per-sample fading simulation, exhaustive enumeration and constraint
//! validators written against the raw problem statements. Used by the test
//! suites and by `rairs validate`.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::channel::{cascade_amplification, los_probability, CascadeForm};
use crate::energy::{flight_range, PlatformParams};
use crate::geometry::{Point2, ScenarioLayout};
use crate::io::PlanRow;
use crate::planner::{solve_epoch, PlacementPlan};
use crate::rng::{substream, Purpose};
use crate::routing::{solve_assignment, solve_p2, TrajectoryPlan};

/// One draw of a Rician channel coefficient with unit mean power:
/// `√(K/(1+K)) e^{jψ} + √(1/(1+K)) CN(0,1)`.
pub fn sample_rician<R: Rng + ?Sized>(k: f64, rng: &mut R) -> (f64, f64) {
    let comp = Normal::new(0.0, (0.5f64).sqrt()).expect("valid normal");
    let los = (k / (1.0 + k)).sqrt();
    let scat = (1.0 / (1.0 + k)).sqrt();
    let psi = rng.random::<f64>() * 2.0 * PI;
    let re = los * psi.cos() + scat * comp.sample(rng);
    let im = los * psi.sin() + scat * comp.sample(rng);
    (re, im)
}

pub fn sample_rician_amplitude<R: Rng + ?Sized>(k: f64, rng: &mut R) -> f64 {
    let (re, im) = sample_rician(k, rng);
    re.hypot(im)
}

const CHUNK: usize = 1000;

fn chunked_mean<F>(draws: usize, seed: u64, f: F) -> f64
where
    F: Fn(&mut rand_chacha::ChaCha20Rng) -> f64 + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    let sums: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64, Purpose::Oracle);
            let n = CHUNK.min(draws - c * CHUNK);
            (0..n).map(|_| f(&mut rng)).sum()
        })
        .collect();
    sums.iter().sum::<f64>() / draws as f64
}

/// Empirical `E|h|²` of the direct-link coefficient.
pub fn direct_power_monte_carlo(k: f64, draws: usize, seed: u64) -> f64 {
    chunked_mean(draws, seed, |rng| {
        let (re, im) = sample_rician(k, rng);
        re * re + im * im
    })
}

/// Empirical mean amplitude times `2/√π`.
pub fn rician_mean_monte_carlo(k: f64, draws: usize, seed: u64) -> f64 {
    chunked_mean(draws, seed, |rng| sample_rician_amplitude(k, rng)) * 2.0 / PI.sqrt()
}

/// Empirical `E|Σ_l α_l β_l|²` for `n` elements whose reflection phases
/// cancel both hops' phases exactly, each hop unit-power Rician with `k`.
pub fn cascade_power_monte_carlo(n: usize, k: f64, draws: usize, seed: u64) -> f64 {
    chunked_mean(draws, seed, |rng| {
        let s: f64 = (0..n)
            .map(|_| sample_rician_amplitude(k, rng) * sample_rician_amplitude(k, rng))
            .sum();
        s * s
    })
}

/// Best `Σ (G − 1)` over all supports of exactly `m` pairs with distinct
/// rows and columns, by exhaustive search. `None` when infeasible.
pub fn brute_force_epoch(gains: &[f64], rows: usize, cols: usize, m: usize) -> Option<f64> {
    fn go(g: &[f64], rows: usize, cols: usize, r: usize, left: usize, used: &mut Vec<bool>) -> Option<f64> {
        if left == 0 {
            return Some(0.0);
        }
        if rows - r < left {
            return None;
        }
        let mut best = go(g, rows, cols, r + 1, left, used);
        for c in 0..cols {
            if used[c] {
                continue;
            }
            used[c] = true;
            if let Some(rest) = go(g, rows, cols, r + 1, left - 1, used) {
                let v = g[r * cols + c] - 1.0 + rest;
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
            used[c] = false;
        }
        best
    }
    go(gains, rows, cols, 0, m, &mut vec![false; cols])
}

/// Every feasible support of exactly `m` pairs, each sorted by row.
pub fn enumerate_supports(rows: usize, cols: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(
        rows: usize,
        cols: usize,
        r: usize,
        left: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if rows - r < left {
            return;
        }
        for c in 0..cols {
            if !used[c] {
                used[c] = true;
                cur.push((r, c));
                go(rows, cols, r + 1, left - 1, used, cur, out);
                cur.pop();
                used[c] = false;
            }
        }
        go(rows, cols, r + 1, left, used, cur, out);
    }
    let mut out = Vec::new();
    go(rows, cols, 0, m, &mut vec![false; cols], &mut Vec::new(), &mut out);
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn brute_force_assignment(cost: &[f64], n: usize) -> f64 {
    permutations(n)
        .iter()
        .map(|p| p.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Minimum total transition distance over every joint choice of UAV-to-site
/// permutations for all epochs at once. UAVs start on `sites[0]` in order.
pub fn brute_force_routing(sites: &[Vec<Point2>]) -> f64 {
    fn go(sites: &[Vec<Point2>], t: usize, pos: &[Point2], perms: &[Vec<usize>]) -> f64 {
        if t == sites.len() {
            return 0.0;
        }
        perms
            .iter()
            .map(|p| {
                let next: Vec<Point2> = p.iter().map(|&k| sites[t][k]).collect();
                let step: f64 = pos.iter().zip(&next).map(|(a, b)| a.dist(b)).sum();
                step + go(sites, t + 1, &next, perms)
            })
            .fold(f64::INFINITY, f64::min)
    }
    match sites.first() {
        None => 0.0,
        Some(first) => go(sites, 1, first, &permutations(first.len())),
    }
}

/// Checks placement constraints straight from the problem statement:
/// exactly `m` selections per epoch, at most one surface per site, at most
/// one surface per grid, grids drawn from `weak`, and for fixed strategies
/// the first epoch's selection repeated.
pub fn validate_placement(plan: &PlacementPlan, weak: &[usize], sites: usize, m: usize) -> Result<(), String> {
    let weak: HashSet<usize> = weak.iter().copied().collect();
    for (t, pairs) in plan.assignments.iter().enumerate() {
        if pairs.len() != m {
            return Err(format!("epoch {t}: {} selections, need exactly {m}", pairs.len()));
        }
        let mut per_site = HashSet::new();
        let mut per_grid = HashSet::new();
        for &(i, j) in pairs {
            if !weak.contains(&i) {
                return Err(format!("epoch {t}: grid {i} is not weak"));
            }
            if j >= sites {
                return Err(format!("epoch {t}: site {j} out of range"));
            }
            if !per_site.insert(j) {
                return Err(format!("epoch {t}: site {j} hosts two surfaces"));
            }
            if !per_grid.insert(i) {
                return Err(format!("epoch {t}: grid {i} served twice"));
            }
        }
        if plan.strategy.is_fixed() {
            let first: HashSet<_> = plan.assignments[0].iter().collect();
            let here: HashSet<_> = pairs.iter().collect();
            if first != here {
                return Err(format!("epoch {t}: fixed placement moved"));
            }
        }
    }
    Ok(())
}

/// Checks a trajectory against its placement: every transition is a
/// permutation of the occupied sites, legs are the planar distances between
/// consecutive stops (BS at both ends), totals add up, and each UAV's
/// mission energy fits its battery.
pub fn validate_trajectory(
    traj: &TrajectoryPlan,
    plan: &PlacementPlan,
    layout: &ScenarioLayout,
    platform: &PlatformParams,
) -> Result<(), String> {
    let epochs = plan.epochs();
    let m = plan.assignments.first().map_or(0, Vec::len);
    if traj.routes.len() != m {
        return Err(format!("{} routes for {m} surfaces", traj.routes.len()));
    }
    for t in 0..epochs {
        let mut want: Vec<usize> = plan.assignments[t].iter().map(|p| p.1).collect();
        let mut got: Vec<usize> = traj.routes.iter().map(|r| r[t]).collect();
        want.sort_unstable();
        got.sort_unstable();
        if want != got {
            return Err(format!("epoch {t}: occupied sites differ from the placement"));
        }
    }
    let hold = platform.service_seconds() * (platform.p_grasp + platform.p_irs);
    let mut total = 0.0;
    for (u, route) in traj.routes.iter().enumerate() {
        let stops: Vec<Point2> = std::iter::once(layout.bs_position)
            .chain(route.iter().map(|&j| layout.candidate_sites[j]))
            .chain(std::iter::once(layout.bs_position))
            .collect();
        let mut run = 0.0;
        for (k, w) in stops.windows(2).enumerate() {
            let d = w[0].dist(&w[1]);
            if (traj.legs[u][k] - d).abs() > 1e-9 {
                return Err(format!("uav {u} leg {k}: {} m recorded, {d} m actual", traj.legs[u][k]));
            }
            run += d;
            if (traj.cumulative[u][k] - run).abs() > 1e-6 {
                return Err(format!("uav {u}: cumulative distance drifts at leg {k}"));
            }
        }
        let mission = platform.p_fly * run / platform.v_fly + hold;
        if mission > platform.battery {
            return Err(format!("uav {u}: mission energy {mission} J exceeds battery"));
        }
        total += run;
    }
    if (total - traj.total_distance).abs() > 1e-6 * total.max(1.0) {
        return Err("total distance differs from the sum of legs".into());
    }
    Ok(())
}

/// Validates plan CSV rows grouped by (strategy, trial): every epoch
/// present, the same number of pairs in every epoch (equal to `m` if given),
/// distinct grids and sites per epoch, fixed strategies constant.
pub fn validate_plan_rows(rows: &[PlanRow], m: Option<usize>) -> Result<(), String> {
    type Key = (String, usize);
    let mut groups: BTreeMap<Key, BTreeMap<usize, Vec<&PlanRow>>> = BTreeMap::new();
    for r in rows {
        if r.epoch == 0 {
            return Err(format!("{} trial {}: epochs are 1-based", r.strategy, r.trial));
        }
        groups
            .entry((r.strategy.to_string(), r.trial))
            .or_default()
            .entry(r.epoch)
            .or_default()
            .push(r);
    }
    for ((strategy, trial), epochs) in &groups {
        let last = *epochs.keys().last().expect("non-empty group");
        if last != epochs.len() {
            return Err(format!("{strategy} trial {trial}: missing epochs"));
        }
        let expected = m.unwrap_or_else(|| epochs.values().next().map_or(0, Vec::len));
        let mut first: Option<HashSet<(usize, usize, u64, u64)>> = None;
        for (t, rs) in epochs {
            if rs.len() != expected {
                return Err(format!("{strategy} trial {trial} epoch {t}: {} pairs, expected {expected}", rs.len()));
            }
            let grids: HashSet<_> = rs.iter().map(|r| (r.grid_row, r.grid_col)).collect();
            let sites: HashSet<_> = rs.iter().map(|r| (r.site_x.to_bits(), r.site_y.to_bits())).collect();
            if grids.len() != rs.len() {
                return Err(format!("{strategy} trial {trial} epoch {t}: a grid is served twice"));
            }
            if sites.len() != rs.len() {
                return Err(format!("{strategy} trial {trial} epoch {t}: a site hosts two surfaces"));
            }
            let support: HashSet<_> = rs
                .iter()
                .map(|r| (r.grid_row, r.grid_col, r.site_x.to_bits(), r.site_y.to_bits()))
                .collect();
            if strategy != "robotic" {
                match &first {
                    None => first = Some(support),
                    Some(f) if *f != support => {
                        return Err(format!("{strategy} trial {trial} epoch {t}: fixed placement moved"))
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Monte Carlo draws per fading check.
    pub draws: usize,
    pub epoch_instances: usize,
    pub assignment_instances: usize,
    pub routing_instances: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 1,
            draws: 100_000,
            epoch_instances: 200,
            assignment_instances: 100,
            routing_instances: 20,
        }
    }
}

/// Integer-valued quarter steps keep every partial sum exact in `f64`.
fn quarter_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random_bool(0.3) {
        1.0
    } else {
        1.0 + rng.random_range(0..=40) as f64 / 4.0
    }
}

pub fn check_epoch_exactness(instances: usize, seed: u64) -> Check {
    let mut rng = substream(seed, 1 << 40, Purpose::Oracle);
    for k in 0..instances {
        let rows = rng.random_range(1..=6);
        let cols = rng.random_range(1..=6);
        let m = rng.random_range(0..=3usize.min(rows).min(cols));
        let g: Vec<f64> = (0..rows * cols).map(|_| quarter_gain(&mut rng)).collect();
        let exact = brute_force_epoch(&g, rows, cols, m).expect("feasible by construction");
        match solve_epoch(&g, rows, cols, m) {
            Ok(s) if s.weight == exact && s.pairs.len() == m => {}
            Ok(s) => {
                return Check::new(
                    "placement solver vs enumeration",
                    false,
                    format!("instance {k}: solver {} vs brute force {exact}", s.weight),
                )
            }
            Err(e) => return Check::new("placement solver vs enumeration", false, format!("instance {k}: {e}")),
        }
    }
    Check::new("placement solver vs enumeration", true, format!("{instances} instances, zero gap"))
}

pub fn check_assignment_exactness(instances: usize, n: usize, seed: u64) -> Check {
    let mut rng = substream(seed, 2 << 40, Purpose::Oracle);
    for k in 0..instances {
        let c: Vec<f64> = (0..n * n).map(|_| rng.random_range(0..100) as f64).collect();
        let exact = brute_force_assignment(&c, n);
        match solve_assignment(&c, n) {
            Ok(a) if a.cost == exact => {}
            Ok(a) => {
                return Check::new(
                    "assignment vs permutations",
                    false,
                    format!("instance {k}: Hungarian {} vs brute force {exact}", a.cost),
                )
            }
            Err(e) => return Check::new("assignment vs permutations", false, format!("instance {k}: {e}")),
        }
    }
    Check::new("assignment vs permutations", true, format!("{instances} random {n}x{n} matrices"))
}

pub fn check_routing_exactness(instances: usize, epochs: usize, m: usize, seed: u64) -> Check {
    use crate::geometry::{build_layout, Heights};
    use crate::planner::Strategy;

    let layout = build_layout(6, 6, 20.0, Heights::default()).expect("valid layout");
    let mut rng = substream(seed, 3 << 40, Purpose::Oracle);
    for k in 0..instances {
        let assignments: Vec<Vec<(usize, usize)>> = (0..epochs)
            .map(|_| {
                rand::seq::index::sample(&mut rng, layout.num_sites(), m)
                    .into_iter()
                    .enumerate()
                    .collect()
            })
            .collect();
        let plan = PlacementPlan {
            strategy: Strategy::Robotic,
            assignments,
            objective: 1.0,
            matching_weight: 0.0,
        };
        let traj = match solve_p2(&plan, &layout, &PlatformParams::default()) {
            Ok(t) => t,
            Err(e) => return Check::new("routing vs joint enumeration", false, format!("instance {k}: {e}")),
        };
        let sites: Vec<Vec<Point2>> = (0..epochs)
            .map(|t| plan.sites_at(t).iter().map(|&j| layout.candidate_sites[j]).collect())
            .collect();
        let exact = brute_force_routing(&sites);
        if (traj.transition_distance - exact).abs() > 1e-9 * exact.max(1.0) {
            return Check::new(
                "routing vs joint enumeration",
                false,
                format!("instance {k}: chained {} vs joint {exact}", traj.transition_distance),
            );
        }
    }
    Check::new(
        "routing vs joint enumeration",
        true,
        format!("{instances} instances, T={epochs}, M={m}"),
    )
}

pub fn check_cascade(n: usize, k_linear: f64, draws: usize, seed: u64) -> Check {
    let closed = cascade_amplification(n, k_linear, CascadeForm::Corrected).expect("n >= 1");
    let mc = cascade_power_monte_carlo(n, k_linear, draws, seed ^ (n as u64) << 20);
    let rel = (closed - mc).abs() / mc;
    Check::new(
        format!("cascade gain N={n} K={k_linear}"),
        rel <= 0.02,
        format!("closed form {closed:.6e}, Monte Carlo {mc:.6e}, rel err {rel:.4}"),
    )
}

pub fn run_suite(opts: &SuiteOptions) -> Vec<Check> {
    let mut checks = Vec::new();

    let p36 = los_probability(36.0).unwrap_or(f64::NAN);
    let edge = 18.0f64;
    let far_branch = 18.0 / edge + (-edge / 36.0).exp() * (1.0 - 18.0 / edge);
    let gap = (los_probability(edge).unwrap_or(f64::NAN) - far_branch).abs();
    checks.push(Check::new(
        "LoS probability values",
        los_probability(10.0).ok() == Some(1.0) && (p36 - 0.683940).abs() <= 1e-6 && gap < 1e-12,
        format!("Pr(36 m) = {p36:.6}, branch gap at 18 m = {gap:e}"),
    ));

    for k in [0.0, 10.0] {
        let p = direct_power_monte_carlo(k, opts.draws, opts.seed);
        checks.push(Check::new(
            format!("direct fading unit power K={k}"),
            (p - 1.0).abs() <= 0.01,
            format!("E|h|^2 = {p:.5}"),
        ));
    }

    for n in [16, 64, 256, 2304] {
        for k in [0.0, 10.0] {
            checks.push(check_cascade(n, k, opts.draws, opts.seed));
        }
    }
    let literal = cascade_amplification(2304, 10.0, CascadeForm::Uncorrected).unwrap_or(f64::NAN);
    checks.push(Check::new(
        "uncorrected cascade form breaks the N^2 bound",
        literal > 2304.0 * 2304.0,
        format!("{literal:.3e} vs N^2 = {:.3e}", 2304.0 * 2304.0),
    ));

    let fr = flight_range(&PlatformParams::default());
    checks.push(Check::new(
        "flight range with reference platform",
        fr.meters > 12_900.0 && fr.meters < 13_000.0,
        format!("{:.1} m", fr.meters),
    ));

    checks.push(check_epoch_exactness(opts.epoch_instances, opts.seed));
    checks.push(check_assignment_exactness(opts.assignment_instances, 7, opts.seed));
    checks.push(check_routing_exactness(opts.routing_instances, 3, 3, opts.seed));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_count_formula() {
        // C(3,m)^2 m!
        assert_eq!(enumerate_supports(3, 3, 0).len(), 1);
        assert_eq!(enumerate_supports(3, 3, 1).len(), 9);
        assert_eq!(enumerate_supports(3, 3, 2).len(), 18);
        assert_eq!(enumerate_supports(3, 3, 3).len(), 6);
        assert_eq!(enumerate_supports(2, 4, 2).len(), 12);
    }

    #[test]
    fn brute_force_small_cases() {
        assert_eq!(brute_force_epoch(&[2.0, 3.0, 4.0, 1.0], 2, 2, 1), Some(3.0));
        assert_eq!(brute_force_epoch(&[2.0, 3.0, 4.0, 1.5], 2, 2, 2), Some(5.0));
        assert_eq!(brute_force_epoch(&[2.0; 4], 2, 2, 3), None);
        assert_eq!(brute_force_assignment(&[1.0, 2.0, 3.0, 1.0], 2), 2.0);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn routing_brute_force_prefers_staying() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(30.0, 40.0);
        assert_eq!(brute_force_routing(&[vec![a, b], vec![b, a]]), 0.0);
        assert_eq!(brute_force_routing(&[vec![a], vec![b]]), 50.0);
    }

    #[test]
    fn plan_row_validator() {
        use crate::planner::Strategy;
        let row = |s: Strategy, e: usize, g: usize, x: f64| PlanRow {
            strategy: s,
            trial: 0,
            epoch: e,
            grid_row: g,
            grid_col: 0,
            site_x: x,
            site_y: 0.0,
            gain: 1.0,
            demand: 1.0,
        };
        let ok = vec![row(Strategy::Robotic, 1, 0, 0.0), row(Strategy::Robotic, 2, 1, 20.0)];
        assert!(validate_plan_rows(&ok, Some(1)).is_ok());
        assert!(validate_plan_rows(&ok, Some(2)).is_err());
        let moved = vec![row(Strategy::Random, 1, 0, 0.0), row(Strategy::Random, 2, 1, 20.0)];
        assert!(validate_plan_rows(&moved, None).is_err());
        let clash = vec![row(Strategy::Robotic, 1, 0, 0.0), row(Strategy::Robotic, 1, 1, 0.0)];
        assert!(validate_plan_rows(&clash, None).is_err());
        let gap = vec![row(Strategy::Robotic, 2, 0, 0.0)];
        assert!(validate_plan_rows(&gap, None).is_err());
    }

    #[test]
    fn small_suite_passes() {
        let opts = SuiteOptions {
            draws: 20_000,
            epoch_instances: 30,
            assignment_instances: 5,
            routing_instances: 3,
            ..SuiteOptions::default()
        };
        let checks = run_suite(&opts);
        for c in &checks {
            // cascade checks at 2e4 draws are still well inside 2%
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
