use rairs::channel::{
    cascade_amplification, los_probability, nlos_set_from_draws, rician_amplitude_mean, CascadeForm, LosRule,
};
use rairs::oracle::{direct_power_monte_carlo, rician_mean_monte_carlo};
use rairs::rng::{substream, Purpose};
use rand::Rng;
use rairs::traffic::{sample_traffic, TrafficModel};

#[test]
fn nlos_set_size_matches_expectation() {
    let d: Vec<f64> = (1..=60).map(|k| 5.0 * k as f64).collect();
    let p_nlos: Vec<f64> = d.iter().map(|&x| 1.0 - los_probability(x).unwrap()).collect();
    let mean: f64 = p_nlos.iter().sum();
    let var: f64 = p_nlos.iter().map(|p| p * (1.0 - p)).sum();
    let runs = 2000;
    let mut rng = substream(11, 0, Purpose::Channel);
    let total: usize = (0..runs)
        .map(|_| {
            let u: Vec<f64> = d.iter().map(|_| rng.random::<f64>()).collect();
            nlos_set_from_draws(&d, &u, LosRule::Conventional).unwrap().len()
        })
        .sum();
    let avg = total as f64 / runs as f64;
    let se = (var / runs as f64).sqrt();
    assert!((avg - mean).abs() <= 3.0 * se, "{avg} vs {mean} ± {se}");
}

#[test]
fn direct_fading_has_unit_power() {
    for k in [0.0, 1.0, 10.0, 100.0] {
        let p = direct_power_monte_carlo(k, 100_000, 3);
        assert!((p - 1.0).abs() < 0.01, "K={k}: {p}");
    }
}

#[test]
fn amplitude_mean_matches_sampling() {
    for k in [0.0, 2.0, 10.0] {
        let closed = rician_amplitude_mean(k).unwrap();
        let mc = rician_mean_monte_carlo(k, 200_000, 4);
        assert!((closed - mc).abs() / closed < 0.005, "K={k}: {closed} vs {mc}");
    }
}

#[test]
fn amplification_stays_within_bounds() {
    for n in [1usize, 4, 100, 2304] {
        let mut prev = 0.0;
        for k in [0.0, 0.5, 1.0, 10.0, 100.0, 1e4] {
            let a = cascade_amplification(n, k, CascadeForm::Corrected).unwrap();
            let nf = n as f64;
            assert!(a >= nf - 1e-9 && a <= nf * nf + 1e-6, "N={n} K={k}: {a}");
            assert!(a >= prev);
            prev = a;
        }
    }
}

#[test]
fn traffic_log_scale_parameters_recovered() {
    for sigma in [1.8, 2.8, 3.6] {
        let model = TrafficModel {
            sigma_log: sigma,
            epoch_profile: vec![1.0],
            ..TrafficModel::default()
        };
        let mut rng = substream(21, 0, Purpose::Traffic);
        let field = sample_traffic(&model, 100_000, &mut rng).unwrap();
        let logs: Vec<f64> = field.epoch_row(0).iter().map(|x| x.ln()).collect();
        let n = logs.len() as f64;
        let mu = logs.iter().sum::<f64>() / n;
        let sd = (logs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - sigma).abs() / sigma < 0.02, "sigma {sigma}: fitted {sd}");
        let want_mu = 702f64.ln() - sigma * sigma / 2.0;
        assert!((mu - want_mu).abs() < 0.05, "sigma {sigma}: mu {mu} vs {want_mu}");
    }
}
