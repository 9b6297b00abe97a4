//! Trajectory planning: which physical RA-IRS flies to which occupied site
//! at every epoch transition.
//!
//! The total distance is additive over transitions and every transition is
//! an independent permutation choice, so chaining one exact assignment per
//! transition is optimal for the whole horizon. Depot legs (BS out at the
//! start, back at the end) do not depend on the choice and are only
//! accounted.

use crate::energy::{EnergyLedger, PlatformParams};
use crate::error::{invalid, Error, Result};
use crate::geometry::ScenarioLayout;
use crate::planner::PlacementPlan;

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCosts {
    pub m: usize,
    /// Occupied sites per epoch, ascending; row/column order of the matrices.
    pub sites: Vec<Vec<usize>>,
    /// One row-major `m × m` planar distance matrix per consecutive pair.
    pub matrices: Vec<Vec<f64>>,
    pub depot_out: Vec<f64>,
    pub depot_back: Vec<f64>,
}

pub fn transition_costs(plan: &PlacementPlan, layout: &ScenarioLayout) -> Result<TransitionCosts> {
    let epochs = plan.epochs();
    let m = plan.assignments.first().map_or(0, Vec::len);
    let mut sites = Vec::with_capacity(epochs);
    for t in 0..epochs {
        let s = plan.sites_at(t);
        if s.len() != m {
            return Err(Error::Validation(format!(
                "epoch {t} occupies {} sites, expected {m}",
                s.len()
            )));
        }
        if let Some(j) = s.iter().find(|j| **j >= layout.num_sites()) {
            return Err(Error::Validation(format!("epoch {t} uses unknown site {j}")));
        }
        sites.push(s);
    }

    let pos = |j: usize| layout.candidate_sites[j];
    let matrices = sites
        .windows(2)
        .map(|w| {
            w[0].iter()
                .flat_map(|&a| w[1].iter().map(move |&b| pos(a).dist(&pos(b))))
                .collect()
        })
        .collect();
    let bs = layout.bs_position;
    let depot_out = sites.first().map_or_else(Vec::new, |s| s.iter().map(|&j| bs.dist(&pos(j))).collect());
    let depot_back = sites.last().map_or_else(Vec::new, |s| s.iter().map(|&j| pos(j).dist(&bs)).collect());

    Ok(TransitionCosts {
        m,
        sites,
        matrices,
        depot_out,
        depot_back,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `perm[row] = column`.
    pub perm: Vec<usize>,
    pub cost: f64,
}

/// Exact minimum-cost perfect matching of a square `n × n` cost matrix.
///
/// Hungarian method with row potentials, O(n³). Among optimal permutations
/// the lexicographically smallest is returned.
pub fn solve_assignment(cost: &[f64], n: usize) -> Result<Assignment> {
    if cost.len() != n * n {
        return Err(invalid(format!(
            "assignment needs a square matrix, got {} entries for n = {n}",
            cost.len()
        )));
    }
    if let Some(c) = cost.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(invalid(format!("costs must be finite and non-negative, found {c}")));
    }
    if n == 0 {
        return Ok(Assignment {
            perm: Vec::new(),
            cost: 0.0,
        });
    }

    let rows: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..n).collect();
    let best = hungarian(cost, n, &rows, &cols);
    let tol = 1e-9 * best.max(1.0);

    // fix rows one by one to the smallest column that keeps the optimum
    let mut perm = Vec::with_capacity(n);
    let mut free_cols = cols;
    let mut remaining = best;
    for r in 0..n {
        let sub_rows: Vec<usize> = (r + 1..n).collect();
        let mut chosen = None;
        for (k, &c) in free_cols.iter().enumerate() {
            let mut rest_cols = free_cols.clone();
            rest_cols.remove(k);
            let rest = hungarian(cost, n, &sub_rows, &rest_cols);
            let here = cost[r * n + c] + rest;
            if here <= remaining + tol {
                chosen = Some((k, rest));
                break;
            }
        }
        let (k, rest) = chosen.expect("some column attains the optimum");
        perm.push(free_cols.remove(k));
        remaining = rest;
    }
    let total = perm.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
    Ok(Assignment { perm, cost: total })
}

/// Optimal cost of the square sub-problem on `rows × cols` of `cost`.
fn hungarian(cost: &[f64], stride: usize, rows: &[usize], cols: &[usize]) -> f64 {
    let n = rows.len();
    debug_assert_eq!(n, cols.len());
    if n == 0 {
        return 0.0;
    }
    let a = |i: usize, j: usize| cost[rows[i - 1] * stride + cols[j - 1]];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=n).map(|j| a(p[j], j)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    /// `routes[uav][epoch]` = site index.
    pub routes: Vec<Vec<usize>>,
    /// `legs[uav]` has `T + 1` entries: BS→first site, the `T − 1`
    /// transitions, last site→BS.
    pub legs: Vec<Vec<f64>>,
    /// Running sum of `legs`, same shape.
    pub cumulative: Vec<Vec<f64>>,
    pub total_distance: f64,
    /// Optimized middle part only.
    pub transition_distance: f64,
    pub depot_distance: f64,
    pub energy: Vec<EnergyLedger>,
}

impl TrajectoryPlan {
    pub fn uavs(&self) -> usize {
        self.routes.len()
    }

    pub fn all_feasible(&self) -> bool {
        self.energy.iter().all(|e| e.feasible)
    }
}

pub fn solve_p2(plan: &PlacementPlan, layout: &ScenarioLayout, platform: &PlatformParams) -> Result<TrajectoryPlan> {
    let costs = transition_costs(plan, layout)?;
    let (m, epochs) = (costs.m, costs.sites.len());

    // UAV k starts on the k-th occupied site of the first epoch
    let mut slot: Vec<usize> = (0..m).collect();
    let mut routes: Vec<Vec<usize>> = (0..m).map(|_| Vec::with_capacity(epochs)).collect();
    let mut legs: Vec<Vec<f64>> = (0..m).map(|_| Vec::with_capacity(epochs + 1)).collect();
    if epochs > 0 {
        for u in 0..m {
            routes[u].push(costs.sites[0][u]);
            legs[u].push(costs.depot_out[u]);
        }
    }

    let mut transition_distance = 0.0;
    for (t, matrix) in costs.matrices.iter().enumerate() {
        let a = solve_assignment(matrix, m)?;
        transition_distance += a.cost;
        for u in 0..m {
            let from = slot[u];
            let to = a.perm[from];
            legs[u].push(matrix[from * m + to]);
            routes[u].push(costs.sites[t + 1][to]);
            slot[u] = to;
        }
    }
    if epochs > 0 {
        for u in 0..m {
            legs[u].push(costs.depot_back[slot[u]]);
        }
    }

    let cumulative: Vec<Vec<f64>> = legs
        .iter()
        .map(|l| {
            l.iter()
                .scan(0.0, |acc, x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let energy = cumulative
        .iter()
        .map(|c| EnergyLedger::for_distance(c.last().copied().unwrap_or(0.0), platform))
        .collect::<Result<Vec<_>>>()?;
    let depot_distance = costs.depot_out.iter().sum::<f64>() + costs.depot_back.iter().sum::<f64>();

    Ok(TrajectoryPlan {
        routes,
        total_distance: cumulative.iter().filter_map(|c| c.last()).sum(),
        legs,
        cumulative,
        transition_distance,
        depot_distance,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_layout, Heights, Point2};
    use crate::planner::Strategy;

    fn plan(assignments: Vec<Vec<(usize, usize)>>) -> PlacementPlan {
        PlacementPlan {
            strategy: Strategy::Robotic,
            assignments,
            objective: 1.0,
            matching_weight: 0.0,
        }
    }

    #[test]
    fn assignment_examples() {
        let a = solve_assignment(&[0.0, 5.0, 5.0, 0.0], 2).unwrap();
        assert_eq!(a.perm, vec![0, 1]);
        assert_eq!(a.cost, 0.0);
        let a = solve_assignment(&[1.0, 2.0, 3.0, 1.0], 2).unwrap();
        assert_eq!(a.perm, vec![0, 1]);
        assert_eq!(a.cost, 2.0);
        assert!(solve_assignment(&[1.0, 2.0, 3.0], 2).is_err());
        assert!(solve_assignment(&[-1.0], 1).is_err());
        assert_eq!(solve_assignment(&[], 0).unwrap().perm, Vec::<usize>::new());
    }

    #[test]
    fn assignment_ties_take_lexicographic_minimum() {
        // every permutation costs 3
        let a = solve_assignment(&[1.0; 9], 3).unwrap();
        assert_eq!(a.perm, vec![0, 1, 2]);
        // both 3-cycles cost 3
        let c = [3.0, 1.0, 1.0, 1.0, 3.0, 1.0, 1.0, 1.0, 3.0];
        let a = solve_assignment(&c, 3).unwrap();
        assert_eq!(a.cost, 3.0);
        assert_eq!(a.perm, vec![1, 2, 0]);
    }

    #[test]
    fn transition_distances() {
        let l = build_layout(4, 4, 10.0, Heights::default()).unwrap();
        let origin = l.site_at(Point2::new(0.0, 0.0)).unwrap();
        let far = l.site_at(Point2::new(30.0, 40.0)).unwrap();
        let p = plan(vec![vec![(0, origin)], vec![(1, far)]]);
        let c = transition_costs(&p, &l).unwrap();
        assert_eq!(c.matrices, vec![vec![50.0]]);
        let bs = l.bs_position;
        assert_eq!(c.depot_out, vec![bs.dist(&Point2::new(0.0, 0.0))]);
        assert_eq!(c.depot_back, vec![bs.dist(&Point2::new(30.0, 40.0))]);
    }

    #[test]
    fn mismatched_epoch_sizes_rejected() {
        let l = build_layout(3, 3, 10.0, Heights::default()).unwrap();
        let p = plan(vec![vec![(0, 0), (1, 1)], vec![(0, 2)]]);
        assert!(matches!(transition_costs(&p, &l), Err(Error::Validation(_))));
    }

    #[test]
    fn static_plan_only_flies_depot_legs() {
        let l = build_layout(9, 9, 20.0, Heights::default()).unwrap();
        let epoch = vec![(0, 0), (5, 17), (9, 42)];
        let p = plan(vec![epoch; 12]);
        let tr = solve_p2(&p, &l, &PlatformParams::default()).unwrap();
        assert_eq!(tr.transition_distance, 0.0);
        assert!((tr.total_distance - tr.depot_distance).abs() < 1e-9);
        for r in &tr.routes {
            assert!(r.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn stay_put_beats_swap() {
        let l = build_layout(4, 4, 10.0, Heights::default()).unwrap();
        let p = plan(vec![vec![(0, 3), (1, 20)], vec![(2, 20), (3, 3)]]);
        let tr = solve_p2(&p, &l, &PlatformParams::default()).unwrap();
        assert_eq!(tr.transition_distance, 0.0);
        assert_eq!(tr.routes, vec![vec![3, 3], vec![20, 20]]);
    }

    #[test]
    fn legs_conserve_total() {
        let l = build_layout(5, 5, 20.0, Heights::default()).unwrap();
        let p = plan(vec![vec![(0, 0), (1, 7)], vec![(0, 35), (1, 12)], vec![(0, 2), (1, 30)]]);
        let tr = solve_p2(&p, &l, &PlatformParams::default()).unwrap();
        let sum: f64 = tr.legs.iter().flatten().sum();
        assert!((sum - tr.total_distance).abs() < 1e-9);
        assert!((tr.transition_distance + tr.depot_distance - tr.total_distance).abs() < 1e-9);
        for c in &tr.cumulative {
            assert!(c.windows(2).all(|w| w[1] >= w[0]));
            assert_eq!(c.len(), 4);
        }
        for t in 0..3 {
            let mut visited: Vec<usize> = tr.routes.iter().map(|r| r[t]).collect();
            visited.sort_unstable();
            assert_eq!(visited, p.sites_at(t));
        }
        assert!(tr.all_feasible());
    }

    #[test]
    fn empty_plan_has_no_trajectories() {
        let l = build_layout(2, 2, 20.0, Heights::default()).unwrap();
        let tr = solve_p2(&plan(vec![vec![]; 3]), &l, &PlatformParams::default()).unwrap();
        assert_eq!(tr.uavs(), 0);
        assert_eq!(tr.total_distance, 0.0);
    }
}
