use rairs::harness::{run_experiment, run_trial, summarize, trial_inputs, ExperimentConfig, Prepared};
use rairs::planner::Strategy;
use rairs::scenario::Scenario;

fn config(trials: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Scenario::default());
    c.trials = trials;
    c
}

#[test]
fn reference_tensor_shape_and_priorities() {
    let sc = Scenario::default();
    let prepared = Prepared::new(&sc).unwrap();
    for trial in 0..10 {
        let inputs = trial_inputs(&sc, &prepared, 2024, 2.8, trial).unwrap();
        let t = &inputs.tensor;
        if t.is_empty() {
            continue;
        }
        assert_eq!(t.epochs(), 12);
        assert_eq!(t.sites(), 100);
        let max = t.max_entry();
        assert!(max > 1.0 && max < 1e4, "max gain {max}");
        // the strongest entry sits at an NLoS grid far from the BS
        let (mut best, mut at) = (0.0, 0);
        for e in 0..t.epochs() {
            for q in 0..t.num_weak() {
                for j in 0..t.sites() {
                    let g = t.gain(e, q, j);
                    assert!(g >= 1.0);
                    if g > best {
                        best = g;
                        at = t.weak_grids()[q];
                    }
                }
            }
        }
        assert!(inputs.realization.nlos_set.contains(&at));
        assert!(prepared.distances.l_bs_ut[at] > 40.0, "grid {at}");
    }
}

#[test]
fn trial_rows_do_not_depend_on_execution_order() {
    let c = config(6);
    let result = run_experiment(&c).unwrap();
    for &trial in &[5usize, 0, 3] {
        for s in Strategy::ALL {
            let alone = run_trial(&c, 2.8, trial, s).unwrap().metrics;
            let in_batch = result
                .rows
                .iter()
                .find(|m| m.strategy == s && m.sigma == 2.8 && m.trial == trial)
                .unwrap();
            assert_eq!(&alone, in_batch);
        }
    }
}

#[test]
fn summary_is_recomputable_from_rows() {
    let c = config(5);
    let result = run_experiment(&c).unwrap();
    assert_eq!(result.rows.len(), 3 * 3 * 5);
    assert_eq!(result.summary.len(), 9);
    assert_eq!(summarize(&result.rows, &c.strategies, &c.sigmas), result.summary);
}

#[test]
fn metrics_respect_invariants() {
    let result = run_experiment(&config(10)).unwrap();
    for m in &result.rows {
        assert!(m.mean_gain >= 1.0);
        assert!(m.served_traffic >= 0.0);
        assert_eq!(m.total_distance.is_some(), m.strategy == Strategy::Robotic);
        assert_ne!(m.energy_feasible, Some(false));
    }
}

#[test]
fn unwritable_output_fails_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let mut c = config(1);
    c.out_dir = Some(blocker.join("out"));
    let err = run_experiment(&c).unwrap_err();
    assert_eq!(err.kind(), "io");
}

#[test]
fn scenario_text_round_trips() {
    let sc = Scenario::default();
    let back = Scenario::parse(&sc.to_text()).unwrap();
    assert_eq!(back, sc);
    assert!(Scenario::parse("[geometry]\nrowz = 3\n").is_err());
}
