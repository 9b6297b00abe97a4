use std::collections::HashMap;

use proptest::prelude::*;
use rairs::oracle::{brute_force_epoch, enumerate_supports, validate_placement};
use rairs::planner::{
    evaluate_plan, solve_epoch, solve_p1, solve_random, solve_terrestrial, GainTensor, RandomMode, TerrestrialMode,
};
use rairs::rng::{substream, Purpose};

fn tensor_strategy() -> impl Strategy<Value = (GainTensor, usize)> {
    (1usize..=3, 1usize..=4, 1usize..=4).prop_flat_map(|(t, q, j)| {
        let cells = t * q * j;
        (
            prop::collection::vec(prop_oneof![Just(1.0), 1.0f64..20.0], cells),
            0..=q.min(j),
        )
            .prop_map(move |(g, m)| {
                let demand = vec![10.0; t * q];
                (GainTensor::from_parts(t, (0..q).collect(), j, g, demand).unwrap(), m)
            })
    })
}

proptest! {
    #[test]
    fn clairvoyant_dominates_epoch1((tensor, m) in tensor_strategy()) {
        let e1 = solve_terrestrial(&tensor, m, TerrestrialMode::Epoch1).unwrap();
        let cv = solve_terrestrial(&tensor, m, TerrestrialMode::Clairvoyant).unwrap();
        prop_assert!(cv.objective >= e1.objective - 1e-12);
    }

    #[test]
    fn relocation_dominates_fixed((tensor, m) in tensor_strategy()) {
        let p1 = solve_p1(&tensor, m).unwrap();
        let cv = solve_terrestrial(&tensor, m, TerrestrialMode::Clairvoyant).unwrap();
        prop_assert!(p1.objective >= cv.objective - 1e-12);
        prop_assert!(p1.objective >= 1.0);
    }

    #[test]
    fn reported_objective_matches_evaluation((tensor, m) in tensor_strategy(), seed in any::<u64>()) {
        let mut rng = substream(seed, 0, Purpose::RandomPlacement);
        let plans = [
            solve_p1(&tensor, m).unwrap(),
            solve_terrestrial(&tensor, m, TerrestrialMode::Epoch1).unwrap(),
            solve_random(&tensor, m, &mut rng, RandomMode::Direct, 1000).unwrap(),
        ];
        for plan in &plans {
            let ev = evaluate_plan(plan, &tensor, m).unwrap();
            prop_assert!((ev.objective - plan.objective).abs() < 1e-12);
            prop_assert!(validate_placement(plan, &(0..tensor.num_weak()).collect::<Vec<_>>(), tensor.sites(), m).is_ok());
        }
    }

    #[test]
    fn more_sites_never_hurt(g in prop::collection::vec(1.0f64..10.0, 12), m in 0usize..=3) {
        // 3 grids x 4 sites, then only the first 3 sites
        let narrow: Vec<f64> = g.chunks(4).flat_map(|r| r[..3].to_vec()).collect();
        let wide = solve_epoch(&g, 3, 4, m).unwrap().weight;
        let small = solve_epoch(&narrow, 3, 3, m).unwrap().weight;
        prop_assert!(wide >= small - 1e-12);
    }

    #[test]
    fn epoch_solver_is_exact(g in prop::collection::vec(prop_oneof![Just(1.0), 1.0f64..5.0], 20), m in 0usize..=4) {
        let s = solve_epoch(&g, 4, 5, m).unwrap();
        let exact = brute_force_epoch(&g, 4, 5, m).unwrap();
        prop_assert!((s.weight - exact).abs() < 1e-9);
        prop_assert_eq!(s.pairs.len(), m);
    }
}

#[test]
fn random_supports_are_uniform() {
    let draws = 10_000;
    let tensor = GainTensor::from_parts(1, vec![0, 1, 2], 3, vec![1.0; 9], vec![1.0; 3]).unwrap();
    for m in 1..=3 {
        let supports = enumerate_supports(3, 3, m);
        let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let mut rng = substream(99, m as u64, Purpose::RandomPlacement);
        for _ in 0..draws {
            let mut plan = solve_random(&tensor, m, &mut rng, RandomMode::Direct, 1).unwrap().assignments[0].clone();
            plan.sort_unstable();
            *counts.entry(plan).or_default() += 1;
        }
        assert_eq!(counts.len(), supports.len(), "m={m}: every support reached");
        let p = 1.0 / supports.len() as f64;
        let expected = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for (s, c) in &counts {
            assert!(
                (*c as f64 - expected).abs() <= 3.0 * sd + 1.0,
                "m={m} support {s:?}: {c} vs {expected:.1}"
            );
        }
    }
}

#[test]
fn rejection_sampler_matches_direct_support_count() {
    let tensor = GainTensor::from_parts(1, vec![0, 1, 2], 3, vec![1.0; 9], vec![1.0; 3]).unwrap();
    let mut rng = substream(5, 0, Purpose::RandomPlacement);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..5000 {
        let plan = solve_random(&tensor, 2, &mut rng, RandomMode::Rejection, 10_000).unwrap();
        seen.insert(plan.assignments[0].clone());
    }
    assert_eq!(seen.len(), enumerate_supports(3, 3, 2).len());
}
