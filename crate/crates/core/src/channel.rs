//! Stochastic LoS/NLoS realization and closed-form average SNRs for the
//! direct BS→UT link and the IRS-cascaded BS→IRS→UT link.
//!
//! SNR composition happens in linear power units; dB appears only at the
//! edges (parameters in, reported SNRs out).

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::DistanceTables;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planar distance below which a link is always LoS.
pub const LOS_BREAKPOINT_M: f64 = 18.0;
const LOS_DECAY_M: f64 = 36.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// How the NLoS set is built from the per-grid uniform draw `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LosRule {
    /// Grid is NLoS when `r > Pr_LoS(d)`.
    #[default]
    Conventional,
    /// Grid is NLoS when `Pr_LoS(d) > r`: high LoS probability means NLoS.
    Inverted,
}

/// Which closed form of the cascaded-link amplification to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CascadeForm {
    /// `N + π²/16 (N² − N) m⁴`, bounded by `N²`.
    #[default]
    Corrected,
    /// Laguerre term in the denominator of the bracket. Exceeds `N²` at
    /// realistic parameters; kept for comparison only.
    Uncorrected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub carrier_freq: f64,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub a_d_db: f64,
    pub a_t_db: f64,
    pub a_r_db: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub k_d_db: f64,
    pub k_c_db: f64,
    pub snr_threshold_db: f64,
    pub n_elements: usize,
    pub cascade_form: CascadeForm,
    pub los_rule: LosRule,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            carrier_freq: 28e9,
            tx_power_dbm: 37.0,
            noise_power_dbm: -95.0,
            a_d_db: -61.38,
            a_t_db: -56.38,
            a_r_db: -56.38,
            eta1: 2.1,
            eta2: 3.17,
            eta3: 2.4,
            k_d_db: 10.0,
            k_c_db: 10.0,
            snr_threshold_db: 10.0,
            n_elements: 48 * 48,
            cascade_form: CascadeForm::Corrected,
            los_rule: LosRule::Conventional,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_freq > 0.0) {
            return Err(invalid("carrier frequency must be positive"));
        }
        if !(self.eta1 > 0.0 && self.eta1 <= self.eta2) {
            return Err(invalid(format!(
                "LoS exponent eta1={} must be positive and not exceed NLoS exponent eta2={}",
                self.eta1, self.eta2
            )));
        }
        if !(self.eta3 > 0.0 && self.eta3 < self.eta2) {
            return Err(invalid(format!(
                "cascaded exponent eta3={} must be positive and below eta2={}",
                self.eta3, self.eta2
            )));
        }
        let side = (self.n_elements as f64).sqrt().round() as usize;
        if side == 0 || side * side != self.n_elements || !side.is_multiple_of(4) {
            return Err(invalid(format!(
                "n_elements={} must be N_r^2 with N_r a positive multiple of 4",
                self.n_elements
            )));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// `P_t − N_0` in dB.
    pub fn link_budget_db(&self) -> f64 {
        self.tx_power_dbm - self.noise_power_dbm
    }

    pub fn k_c_linear(&self) -> f64 {
        db_to_linear(self.k_c_db)
    }

    pub fn k_d_linear(&self) -> f64 {
        db_to_linear(self.k_d_db)
    }
}

/// Empirical LoS probability for a planar BS–UT distance `d`.
pub fn los_probability(d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(invalid(format!("distance must be non-negative, got {d}")));
    }
    if d < LOS_BREAKPOINT_M {
        return Ok(1.0);
    }
    let ratio = LOS_BREAKPOINT_M / d;
    Ok(ratio + (-d / LOS_DECAY_M).exp() * (1.0 - ratio))
}

/// Applies `rule` to fixed draws; one draw per grid.
pub fn nlos_set_from_draws(d2_bs_ut: &[f64], draws: &[f64], rule: LosRule) -> Result<Vec<usize>> {
    if d2_bs_ut.len() != draws.len() {
        return Err(invalid("one draw per grid is required"));
    }
    let mut set = Vec::new();
    for (i, (&d, &r)) in d2_bs_ut.iter().zip(draws).enumerate() {
        let p = los_probability(d)?;
        let nlos = match rule {
            LosRule::Conventional => r > p,
            LosRule::Inverted => p > r,
        };
        if nlos {
            set.push(i);
        }
    }
    Ok(set)
}

/// Draws a fresh uniform per grid and returns `(nlos_set, draws)`.
pub fn draw_nlos_set<R: Rng + ?Sized>(
    distances: &DistanceTables,
    rule: LosRule,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let draws: Vec<f64> = (0..distances.d2_bs_ut.len()).map(|_| rng.random::<f64>()).collect();
    let set = nlos_set_from_draws(&distances.d2_bs_ut, &draws, rule)?;
    Ok((set, draws))
}

/// Direct-link large-scale path loss in dB; NLoS grids take `eta2`.
pub fn direct_path_loss_db(l: f64, nlos: bool, params: &RadioParams) -> Result<f64> {
    if !(l > 0.0) {
        return Err(invalid(format!("direct distance must be positive, got {l}")));
    }
    let eta = if nlos { params.eta2 } else { params.eta1 };
    Ok(params.a_d_db - 10.0 * eta * l.log10())
}

/// Average direct SNR in dB; small-scale fading has unit mean power.
pub fn direct_snr_db(pl_db: f64, params: &RadioParams) -> f64 {
    pl_db + params.link_budget_db()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub nlos_set: Vec<usize>,
    pub direct_snr_db: Vec<f64>,
    pub weak_set: Vec<usize>,
    pub los_draws: Vec<f64>,
}

impl ChannelRealization {
    /// Builds a realization from explicit LoS draws.
    pub fn from_draws(distances: &DistanceTables, params: &RadioParams, los_draws: Vec<f64>) -> Result<Self> {
        let nlos_set = nlos_set_from_draws(&distances.d2_bs_ut, &los_draws, params.los_rule)?;
        let mut nlos = vec![false; los_draws.len()];
        for &i in &nlos_set {
            nlos[i] = true;
        }
        let direct_snr_db = distances
            .l_bs_ut
            .iter()
            .zip(&nlos)
            .map(|(&l, &n)| direct_path_loss_db(l, n, params).map(|pl| direct_snr_db(pl, params)))
            .collect::<Result<Vec<_>>>()?;
        let mut real = ChannelRealization {
            nlos_set,
            direct_snr_db,
            weak_set: Vec::new(),
            los_draws,
        };
        real.weak_set = weak_coverage_set(&real, params);
        Ok(real)
    }

    pub fn sample<R: Rng + ?Sized>(distances: &DistanceTables, params: &RadioParams, rng: &mut R) -> Result<Self> {
        let draws = (0..distances.d2_bs_ut.len()).map(|_| rng.random::<f64>()).collect();
        Self::from_draws(distances, params, draws)
    }
}

/// NLoS grids whose average direct SNR falls below the threshold.
pub fn weak_coverage_set(realization: &ChannelRealization, params: &RadioParams) -> Vec<usize> {
    realization
        .nlos_set
        .iter()
        .copied()
        .filter(|&i| realization.direct_snr_db[i] < params.snr_threshold_db)
        .collect()
}

/// `e^{-x} I_ν(x)` for ν ∈ {0, 1}, x ≥ 0.
pub(crate) fn bessel_i_scaled(nu: u32, x: f64) -> f64 {
    debug_assert!(nu <= 1 && x >= 0.0);
    if x <= 30.0 {
        // ascending series
        let half = x / 2.0;
        let mut term = if nu == 0 { 1.0 } else { half };
        let mut sum = term;
        let q = half * half;
        for k in 1..500 {
            term *= q / (k as f64 * (k + nu as usize) as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        // Hankel asymptotic expansion
        let mu = 4.0 * (nu * nu) as f64;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Laguerre function of degree 1/2 at `-k`, for `k ≥ 0`.
pub fn laguerre_half_neg(k: f64) -> f64 {
    let x = k / 2.0;
    (1.0 + k) * bessel_i_scaled(0, x) + k * bessel_i_scaled(1, x)
}

/// `√(1/(1+K)) · L_{1/2}(−K)`: the mean amplitude of a unit-power Rician
/// variate scaled by `2/√π`. Equals 1 for Rayleigh and tends to `2/√π`.
pub fn rician_amplitude_mean(k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(invalid(format!("Rician factor must be non-negative, got {k}")));
    }
    Ok((1.0 / (1.0 + k)).sqrt() * laguerre_half_neg(k))
}

/// Average coherent-combining power gain of an `n`-element IRS under
/// cascaded Rician fading with factor `k_c` on both hops.
pub fn cascade_amplification(n: usize, k_c: f64, form: CascadeForm) -> Result<f64> {
    if n == 0 {
        return Err(invalid("IRS needs at least one element"));
    }
    let n = n as f64;
    let pairs = n * n - n;
    let coef = PI * PI / 16.0;
    let m = rician_amplitude_mean(k_c)?;
    Ok(match form {
        CascadeForm::Corrected => n + coef * pairs * m.powi(4),
        CascadeForm::Uncorrected => {
            let bracket = (1.0 / (1.0 + k_c)).sqrt() / laguerre_half_neg(k_c);
            n + coef * pairs / bracket.powi(4)
        }
    })
}

/// Cascaded-link path loss in dB for BS→site distance `r` and site→UT
/// distance `d`.
pub fn cascaded_path_loss_db(r: f64, d: f64, params: &RadioParams) -> Result<f64> {
    if !(r > 0.0 && d > 0.0) {
        return Err(invalid(format!("cascaded distances must be positive, got R={r}, D={d}")));
    }
    Ok(params.a_t_db - 10.0 * params.eta3 * r.log10() + params.a_r_db - 10.0 * params.eta3 * d.log10())
}

/// Average cascaded SNR in dB assuming identical per-element path losses
/// and ideal phase alignment.
pub fn cascaded_snr_db(r: f64, d: f64, params: &RadioParams) -> Result<f64> {
    let amp = cascade_amplification(params.n_elements, params.k_c_linear(), params.cascade_form)?;
    Ok(cascaded_path_loss_db(r, d, params)? + linear_to_db(amp) + params.link_budget_db())
}

/// Aggregated-to-direct SNR ratio, `(γ_d + γ_c) / γ_d` in linear power.
pub fn snr_ratio(gamma_d_db: f64, gamma_c_db: f64) -> f64 {
    1.0 + db_to_linear(gamma_c_db - gamma_d_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn los_examples() {
        assert_eq!(los_probability(10.0).unwrap(), 1.0);
        let p36 = 0.5 + (-1f64).exp() * 0.5;
        assert!(close(los_probability(36.0).unwrap(), p36, 1e-15));
        assert!(close(los_probability(36.0).unwrap(), 0.683940, 1e-6));
        assert!(close(los_probability(72.0).unwrap(), 0.351501, 1e-6));
        assert_eq!(los_probability(18.0).unwrap(), 1.0);
        assert!(los_probability(-1.0).is_err());
        assert!(los_probability(f64::NAN).is_err());
    }

    #[test]
    fn nlos_boundary_draws() {
        let d = vec![5.0, 40.0, 90.0, 120.0];
        let zeros = vec![0.0; 4];
        let ones = vec![1.0; 4];
        assert_eq!(nlos_set_from_draws(&d, &zeros, LosRule::Inverted).unwrap(), vec![0, 1, 2, 3]);
        assert!(nlos_set_from_draws(&d, &ones, LosRule::Inverted).unwrap().is_empty());
        assert!(nlos_set_from_draws(&d, &zeros, LosRule::Conventional).unwrap().is_empty());
        assert_eq!(nlos_set_from_draws(&d, &ones, LosRule::Conventional).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn direct_link_examples() {
        let p = RadioParams::default();
        assert!(close(direct_path_loss_db(1.0, true, &p).unwrap(), -61.38, 1e-12));
        assert!(close(direct_path_loss_db(1.0, false, &p).unwrap(), -61.38, 1e-12));
        assert!(close(direct_path_loss_db(100.0, false, &p).unwrap(), -103.38, 1e-9));
        assert!(close(direct_path_loss_db(100.0, true, &p).unwrap(), -124.78, 1e-9));
        assert!(direct_path_loss_db(0.0, true, &p).is_err());

        assert!(close(direct_snr_db(-124.78, &p), 7.22, 1e-9));
        assert!(close(direct_snr_db(-103.38, &p), 28.62, 1e-9));
        assert_eq!(direct_snr_db(-(p.tx_power_dbm - p.noise_power_dbm), &p), 0.0);
    }

    #[test]
    fn weak_set_thresholds() {
        let mut real = ChannelRealization {
            nlos_set: vec![1, 3],
            direct_snr_db: vec![0.0, 5.0, -3.0, 40.0],
            weak_set: vec![],
            los_draws: vec![0.5; 4],
        };
        let mut p = RadioParams::default();
        p.snr_threshold_db = f64::NEG_INFINITY;
        assert!(weak_coverage_set(&real, &p).is_empty());
        p.snr_threshold_db = f64::INFINITY;
        assert_eq!(weak_coverage_set(&real, &p), vec![1, 3]);
        p.snr_threshold_db = 10.0;
        real.weak_set = weak_coverage_set(&real, &p);
        assert_eq!(real.weak_set, vec![1]);
    }

    #[test]
    fn weak_set_distance_cutoff() {
        // NLoS grids are weak exactly beyond the distance where the budget hits 10 dB
        let p = RadioParams::default();
        let cutoff = 10f64.powf((37.0 + 95.0 - 61.38 - 10.0) / 31.7);
        assert!(close(cutoff, 81.7, 0.05));
        let below = direct_snr_db(direct_path_loss_db(cutoff * 0.999, true, &p).unwrap(), &p);
        let above = direct_snr_db(direct_path_loss_db(cutoff * 1.001, true, &p).unwrap(), &p);
        assert!(below > 10.0 && above < 10.0);
    }

    /// Independent route to `I_ν(x)`: trapezoid rule on
    /// `(1/π) ∫₀^π e^{x cos θ} cos(νθ) dθ`, periodic so it converges fast.
    fn bessel_quadrature_scaled(nu: u32, x: f64) -> f64 {
        let n = 4000;
        let h = PI / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let th = k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            s += w * (x * (th.cos() - 1.0)).exp() * (nu as f64 * th).cos();
        }
        s * h / PI
    }

    #[test]
    fn bessel_matches_quadrature() {
        for &x in &[0.0, 0.1, 1.0, 2.5, 5.0, 12.0, 29.9, 30.1, 45.0, 200.0] {
            for nu in 0..=1 {
                let a = bessel_i_scaled(nu, x);
                let b = bessel_quadrature_scaled(nu, x);
                assert!(close(a, b, 1e-12 * b.abs().max(1e-300) + 1e-15), "nu={nu} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rician_mean_examples() {
        assert!(close(rician_amplitude_mean(0.0).unwrap(), 1.0, 1e-15));
        assert!(close(laguerre_half_neg(10.0), 3.6587, 1e-4));
        assert!(close(rician_amplitude_mean(10.0).unwrap(), 1.10313, 1e-5));
        let limit = 2.0 / PI.sqrt();
        assert!(close(rician_amplitude_mean(1e4).unwrap(), limit, 1e-3));
        assert!(rician_amplitude_mean(-0.1).is_err());
    }

    #[test]
    fn cascade_examples() {
        assert_eq!(cascade_amplification(1, 10.0, CascadeForm::Corrected).unwrap(), 1.0);
        let a = cascade_amplification(2304, 10.0, CascadeForm::Corrected).unwrap();
        assert!(close(a, 4.8495e6, 0.001 * 4.8495e6), "{a}");
        assert!(close(linear_to_db(a), 66.86, 0.01));
        let full = cascade_amplification(2304, 1e6, CascadeForm::Corrected).unwrap();
        assert!(close(full, 5_308_416.0, 0.001 * 5_308_416.0));
        let literal = cascade_amplification(2304, 10.0, CascadeForm::Uncorrected).unwrap();
        assert!(literal > 2304.0 * 2304.0);
        assert!(close(literal, 7e10, 0.05 * 7e10), "{literal}");
        assert!(cascade_amplification(0, 1.0, CascadeForm::Corrected).is_err());
    }

    #[test]
    fn cascaded_snr_examples() {
        let p = RadioParams::default();
        let pl = cascaded_path_loss_db(50.0, 20.0, &p).unwrap();
        assert!(close(pl, -184.76, 0.01), "{pl}");
        let g = cascaded_snr_db(50.0, 20.0, &p).unwrap();
        assert!(close(g, 14.10, 0.01), "{g}");
        assert!(close(cascaded_path_loss_db(1.0, 1.0, &p).unwrap(), -112.76, 1e-9));
        let doubled = cascaded_snr_db(100.0, 40.0, &p).unwrap();
        assert!(close(g - doubled, 2.0 * 10.0 * 2.4 * 2f64.log10(), 1e-9));
        assert!(close(g - doubled, 14.45, 0.005));
        assert!(cascaded_snr_db(0.0, 1.0, &p).is_err());
    }

    #[test]
    fn snr_ratio_examples() {
        assert_eq!(snr_ratio(7.22, f64::NEG_INFINITY), 1.0);
        assert!(close(snr_ratio(3.0, 3.0), 2.0, 1e-15));
        let g = snr_ratio(7.22, 14.10);
        let expected = (db_to_linear(7.22) + db_to_linear(14.10)) / db_to_linear(7.22);
        assert!(close(g, expected, 1e-12));
        assert!(close(g, 5.875, 0.002), "{g}");
    }

    #[test]
    fn params_validation() {
        assert!(RadioParams::default().validate().is_ok());
        let mut p = RadioParams::default();
        p.n_elements = 2300;
        assert!(p.validate().is_err());
        p.n_elements = 36; // 6x6
        assert!(p.validate().is_err());
        p = RadioParams::default();
        p.eta3 = 3.5;
        assert!(p.validate().is_err());
        p = RadioParams::default();
        p.eta1 = 4.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn los_probability_decreasing(a in 18.0f64..2000.0, b in 18.0f64..2000.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let (plo, phi) = (los_probability(lo).unwrap(), los_probability(hi).unwrap());
            prop_assert!(phi < plo);
            prop_assert!(phi > 0.0 && plo <= 1.0);
        }

        #[test]
        fn cascade_bounded_and_monotone(n in 1usize..5000, k in 0.0f64..1e4, dk in 0.0f64..100.0) {
            let a = cascade_amplification(n, k, CascadeForm::Corrected).unwrap();
            let nf = n as f64;
            prop_assert!(a >= nf * (1.0 - 1e-12) && a <= nf * nf * (1.0 + 1e-12));
            let ak = cascade_amplification(n, k + dk, CascadeForm::Corrected).unwrap();
            prop_assert!(ak >= a * (1.0 - 1e-12));
            let an = cascade_amplification(n + 1, k, CascadeForm::Corrected).unwrap();
            prop_assert!(an >= a);
        }

        #[test]
        fn snr_ratio_at_least_one_and_power_invariant(gd in -30.0f64..60.0, gc in -60.0f64..60.0, shift in -20.0f64..20.0) {
            let g = snr_ratio(gd, gc);
            prop_assert!(g >= 1.0);
            let shifted = snr_ratio(gd + shift, gc + shift);
            prop_assert!((g - shifted).abs() <= 1e-9 * g);
        }
    }
}
