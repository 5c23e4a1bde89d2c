//! Closed forms for the observable case: per-level net benefit, the
//! dominant joining threshold, the stationary distribution under a
//! threshold strategy, the welfare rate, and the numeric search for the
//! socially optimal threshold.

use crate::ctmc::ChainSpec;
use crate::model::{
    EconParams, MeasureSource, ModelParams, ObservableRegime, PerformanceReport, ThresholdStrategy,
};
use crate::unobservable;

/// Fate of a customer who joins behind `n` others: probability of reaching
/// service before the next catastrophe, and the expected time in system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SojournStats {
    pub p_serve: f64,
    pub e_sojourn: f64,
}

/// `p_serve = (mu/(mu+xi))^(n+1)` and `e_sojourn = (1 - p_serve)/xi`: the
/// joiner needs `n + 1` service completions to win the race against an
/// exponential catastrophe clock.
pub fn sojourn_stats(params: &ModelParams, n: u32) -> SojournStats {
    let survive = params.mu / (params.mu + params.xi);
    let p_serve = survive.powf(f64::from(n) + 1.0);
    SojournStats { p_serve, e_sojourn: (1.0 - p_serve) / params.xi }
}

/// Expected net benefit of a customer who joins behind `n` others:
/// `r_s p_serve + r_f (1 - p_serve) - c e_sojourn`.
pub fn net_benefit(params: &ModelParams, econ: &EconParams, n: u32) -> f64 {
    let stats = sojourn_stats(params, n);
    econ.r_s * stats.p_serve + (econ.r_f - econ.c / params.xi) * (1.0 - stats.p_serve)
}

/// The joining threshold before flooring, `ln K / ln S - 1` with
/// `K = (c/xi - r_f) / (r_s - r_f + c/xi)` and `S = mu/(mu+xi)`.
/// Only defined in the finite-threshold regime.
pub fn continuous_threshold(params: &ModelParams, econ: &EconParams) -> Option<f64> {
    if crate::model::classify_observable(params, econ) != ObservableRegime::FiniteThreshold {
        return None;
    }
    let c_over_xi = econ.c / params.xi;
    let k = (c_over_xi - econ.r_f) / (econ.r_s - econ.r_f + c_over_xi);
    let s = params.mu / (params.mu + params.xi);
    Some(k.ln() / s.ln() - 1.0)
}

/// The dominant pure strategy: balk always, enter always, or a finite
/// threshold obtained by flooring [`continuous_threshold`].
///
/// Values within 1e-9 below an integer are snapped up before flooring;
/// indifferent customers enter, and floating point must not talk them out
/// of it.
pub fn equilibrium_threshold(params: &ModelParams, econ: &EconParams) -> ThresholdStrategy {
    match crate::model::classify_observable(params, econ) {
        ObservableRegime::AlwaysBalk => ThresholdStrategy::AlwaysBalk,
        ObservableRegime::AlwaysEnter => ThresholdStrategy::AlwaysEnter,
        ObservableRegime::FiniteThreshold => {
            let v = continuous_threshold(params, econ).expect("finite-threshold regime");
            let nearest = v.round();
            let floored = if (nearest - v).abs() <= 1e-9 { nearest } else { v.floor() };
            ThresholdStrategy::Finite(floored.max(0.0) as u32)
        }
    }
}

/// How the stationary masses were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassSource {
    /// The two-root closed form.
    ClosedForm,
    /// Closed-form evaluation was about to lose more than six significant
    /// digits; the masses come from the chain solver instead.
    SolverFallback,
}

/// Stationary distribution under a finite threshold `n`: mass
/// `xi/(xi+eta)` on the repair state and `p_k1[k] = d1 x1^k + d2 x2^k` on
/// the operative levels `k = 0..=n+1`, with `x1`, `x2` the characteristic
/// roots at full participation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableStationary {
    pub threshold_n: u32,
    pub p00: f64,
    /// Masses of levels `0..=threshold_n + 1`.
    pub p_k1: Vec<f64>,
    pub d1: f64,
    pub d2: f64,
    pub x1: f64,
    pub x2: f64,
    pub source: MassSource,
}

/// Relative cancellation beyond which the closed form has lost more than
/// six significant digits and the solver takes over.
const CANCELLATION_LIMIT: f64 = 1e6;

struct ThresholdCoefficients {
    x1: f64,
    x2: f64,
    /// `(mu+xi) x1 - lambda`, positive.
    w1: f64,
    /// `(mu+xi) x2 - lambda`, negative.
    w2: f64,
    /// `(x2/x1)^n`.
    ratio_pow_n: f64,
    /// Common factor `eta xi / ((xi+eta)(a - b (x2/x1)^n))`, where `a` and
    /// `b` weight the two root powers in the normalizing denominator.
    scale: f64,
    cancellation: f64,
}

/// The raw coefficient formulas carry `x1^n`, which overflows for large
/// thresholds. Everything is divided through by `x1^n` first, so only
/// powers of quantities below one remain.
fn threshold_coefficients(params: &ModelParams, n: u32) -> ThresholdCoefficients {
    let p = params;
    let roots = unobservable::char_roots(p, 1.0);
    let (x1, x2) = (roots.x1, roots.x2);
    let w1 = (p.mu + p.xi) * x1 - p.lambda;
    let w2 = (p.mu + p.xi) * x2 - p.lambda;
    let a = (p.lambda + p.xi - p.mu * x2) * w1;
    let b = (p.lambda + p.xi - p.mu * x1) * w2;
    let ratio_pow_n = (x2 / x1).powf(f64::from(n));
    let denom = a - b * ratio_pow_n;
    let cancellation = (a.abs() + (b * ratio_pow_n).abs()) / denom.abs();
    let scale = p.eta * p.xi / ((p.xi + p.eta) * denom);
    ThresholdCoefficients { x1, x2, w1, w2, ratio_pow_n, scale, cancellation }
}

pub fn stationary_observable(params: &ModelParams, threshold_n: u32) -> ObservableStationary {
    let coef = threshold_coefficients(params, threshold_n);
    let p00 = params.xi / (params.xi + params.eta);
    let d1 = -coef.w2 * coef.ratio_pow_n * coef.scale;
    let d2 = coef.w1 * coef.scale;

    if coef.cancellation <= CANCELLATION_LIMIT && coef.scale.is_finite() {
        let n = f64::from(threshold_n);
        let ratio = coef.x2 / coef.x1;
        let mut p_k1 = Vec::with_capacity(threshold_n as usize + 2);
        for k in 0..=threshold_n + 1 {
            // d1 x1^k + d2 x2^k, regrouped so every power has base < 1:
            // scale * x2^k * (w1 - w2 (x2/x1)^(n-k))
            let kf = f64::from(k);
            let bracket = coef.w1 - coef.w2 * ratio.powf(n - kf);
            p_k1.push(coef.scale * coef.x2.powf(kf) * bracket);
        }
        ObservableStationary {
            threshold_n,
            p00,
            p_k1,
            d1,
            d2,
            x1: coef.x1,
            x2: coef.x2,
            source: MassSource::ClosedForm,
        }
    } else {
        let spec = ChainSpec::for_threshold(*params, threshold_n);
        let pi = crate::ctmc::stationary(&spec).expect("threshold chain is finite and irreducible");
        ObservableStationary {
            threshold_n,
            p00,
            p_k1: pi[1..].to_vec(),
            d1,
            d2,
            x1: coef.x1,
            x2: coef.x2,
            source: MassSource::SolverFallback,
        }
    }
}

/// Performance measures under a finite threshold, summed over the
/// stationary masses. Arrivals seeing more than `threshold_n` customers
/// balk, so the service/flush split only runs up to the threshold while the
/// mean queue length covers every level.
pub fn performance_observable(
    params: &ModelParams,
    econ: &EconParams,
    threshold_n: u32,
) -> PerformanceReport {
    let st = stationary_observable(params, threshold_n);
    let survive = params.mu / (params.mu + params.xi);
    let mut p_ser = 0.0;
    let mut p_cat = 0.0;
    let mut e_q = 0.0;
    let mut survive_pow = survive;
    for (k, &mass) in st.p_k1.iter().enumerate() {
        if k <= threshold_n as usize {
            p_ser += mass * survive_pow;
            p_cat += mass * (1.0 - survive_pow);
        }
        e_q += k as f64 * mass;
        survive_pow *= survive;
    }
    let social_rate = params.lambda * (p_ser * econ.r_s + p_cat * econ.r_f) - econ.c * e_q;
    PerformanceReport { p_ser, p_cat, e_q, social_rate, source: MeasureSource::ClosedForm }
}

/// Welfare rate under a threshold strategy.
///
/// Balking always generates nothing; entering always is the mixed strategy
/// with probability one on the untruncated chain, so it is routed through
/// the unobservable closed form; a finite threshold sums the stationary
/// masses.
pub fn social_benefit_observable(
    params: &ModelParams,
    econ: &EconParams,
    strategy: ThresholdStrategy,
) -> f64 {
    match strategy {
        ThresholdStrategy::AlwaysBalk => 0.0,
        ThresholdStrategy::AlwaysEnter => {
            unobservable::social_benefit_unobservable(params, econ, 1.0)
        }
        ThresholdStrategy::Finite(n) => performance_observable(params, econ, n).social_rate,
    }
}

/// The welfare rate under a finite threshold as one reduced expression,
/// with the geometric sums already folded away. Kept alongside the
/// summation route so the two can be checked against each other; both carry
/// the same `x1^n` normalization.
pub fn social_benefit_observable_direct(params: &ModelParams, econ: &EconParams, n: u32) -> f64 {
    let p = params;
    let coef = threshold_coefficients(p, n);
    let (x1, x2) = (coef.x1, coef.x2);
    let nf = f64::from(n);
    let t = coef.ratio_pow_n;
    // d1(n) with the x1^n factor divided out
    let d1_hat = -coef.w2 * coef.scale;
    let d2 = coef.w1 * coef.scale;
    let mu_xi = p.mu + p.xi;
    let survive_pow = (p.mu / mu_xi).powf(nf + 1.0); // S^(n+1)
    let x2n = x2.powf(nf);

    // throughput split: lambda (r_s - r_f) P_ser
    let ser1 = p.mu * d1_hat * (t - x1 * x2n * survive_pow) / (mu_xi - p.mu * x1);
    let ser2 = p.mu * d2 * (1.0 - (p.mu * x2 / mu_xi).powf(nf + 1.0)) / (mu_xi - p.mu * x2);
    let service_part = p.lambda * (econ.r_s - econ.r_f) * (ser1 + ser2);

    // lambda r_f times the joining fraction (all operative mass short of the
    // blocked top level)
    let join_mass = p.eta / (p.xi + p.eta) - d1_hat * x2n * x1 - d2 * x2.powf(nf + 1.0);
    let compensation_part = p.lambda * econ.r_f * join_mass;

    // c E[Q], with 1/(1-x1)^2 rewritten through (1-x1)(1-x2) = -xi/mu
    let c_mu2_xi2 = econ.c * p.mu * p.mu / (p.xi * p.xi);
    let q1 = d1_hat
        * x1
        * (1.0 - x2).powi(2)
        * (t - (nf + 2.0) * x2n * x1 + (nf + 1.0) * x2n * x1 * x1);
    let q2 = d2
        * x2
        * (1.0 - x1).powi(2)
        * (1.0 - (nf + 2.0) * x2.powf(nf + 1.0) + (nf + 1.0) * x2.powf(nf + 2.0));
    service_part + compensation_part - c_mu2_xi2 * (q1 + q2)
}

/// Result of the exhaustive social-threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocialThresholdSearch {
    pub strategy: ThresholdStrategy,
    pub value: f64,
    pub n_cap: u32,
    /// The maximum sat exactly at the cap, so the true optimum may lie
    /// beyond it.
    pub cap_reached: bool,
}

/// Exhaustively evaluates balking plus every finite threshold up to
/// `n_cap` and returns the welfare maximizer, breaking ties toward the
/// smaller system.
pub fn optimal_threshold_social(
    params: &ModelParams,
    econ: &EconParams,
    n_cap: u32,
) -> SocialThresholdSearch {
    let mut best = SocialThresholdSearch {
        strategy: ThresholdStrategy::AlwaysBalk,
        value: 0.0,
        n_cap,
        cap_reached: false,
    };
    for n in 0..=n_cap {
        let value = social_benefit_observable(params, econ, ThresholdStrategy::Finite(n));
        if value > best.value {
            best.strategy = ThresholdStrategy::Finite(n);
            best.value = value;
        }
    }
    best.cap_reached = best.strategy == ThresholdStrategy::Finite(n_cap);
    best
}

/// Default search bound: twice the equilibrium threshold (observed optima
/// sit below the equilibrium, the factor is margin), with floors for tiny
/// and infinite equilibria.
pub fn default_search_cap(params: &ModelParams, econ: &EconParams) -> u32 {
    match equilibrium_threshold(params, econ) {
        ThresholdStrategy::Finite(n) => (2 * n).max(64),
        _ => 1024,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctmc;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn fig1_params() -> ModelParams {
        ModelParams::new(7.0, 4.0, 0.4, 2.0).unwrap()
    }

    fn fig1_econ() -> EconParams {
        EconParams::new(7.0, 0.0, 3.0).unwrap()
    }

    #[test]
    fn sojourn_one_term_case() {
        let params = fig1_params();
        let stats = sojourn_stats(&params, 0);
        assert_relative_eq!(stats.p_serve, 4.0 / 4.4, max_relative = 1e-12);
        assert_relative_eq!(stats.e_sojourn, 1.0 / 4.4, max_relative = 1e-12);
    }

    #[test]
    fn sojourn_monotone_with_saturating_wait() {
        let params = fig1_params();
        let mut prev = sojourn_stats(&params, 0);
        for n in 1..=100 {
            let cur = sojourn_stats(&params, n);
            assert!(cur.p_serve < prev.p_serve);
            assert!(cur.e_sojourn > prev.e_sojourn);
            assert!(cur.e_sojourn <= 1.0 / params.xi);
            prev = cur;
        }
        // the wait saturates at the mean time to the next catastrophe
        assert_abs_diff_eq!(sojourn_stats(&params, 500).e_sojourn, 1.0 / params.xi, epsilon = 1e-9);
    }

    #[test]
    fn benefit_positive_when_compensation_covers_waiting() {
        let params = fig1_params();
        let econ = EconParams::new(7.0, 3.0 / 0.4, 3.0).unwrap();
        for n in 0..200 {
            let expected = econ.r_s * sojourn_stats(&params, n).p_serve;
            assert_relative_eq!(net_benefit(&params, &econ, n), expected, max_relative = 1e-12);
            assert!(net_benefit(&params, &econ, n) > 0.0);
        }
    }

    #[test]
    fn benefit_saturates_at_compensation_minus_waiting() {
        let params = fig1_params();
        let econ = fig1_econ();
        assert_abs_diff_eq!(
            net_benefit(&params, &econ, 2000),
            econ.r_f - econ.c / params.xi,
            epsilon = 1e-9
        );
    }

    #[test]
    fn benefit_changes_sign_at_equilibrium_threshold() {
        let params = fig1_params();
        let econ = fig1_econ();
        assert!(net_benefit(&params, &econ, 5) > 0.0);
        assert!(net_benefit(&params, &econ, 6) < 0.0);
    }

    #[test]
    fn equilibrium_threshold_reference_value() {
        // ln(7.5/14.5)/ln(4/4.4) - 1 = 5.91..., floored to 5
        let params = fig1_params();
        let econ = fig1_econ();
        assert_eq!(equilibrium_threshold(&params, &econ), ThresholdStrategy::Finite(5));

        // brute-force scan of the benefit sign change
        let mut expected = None;
        for n in 0..10_000 {
            if net_benefit(&params, &econ, n) >= 0.0 && net_benefit(&params, &econ, n + 1) < 0.0 {
                expected = Some(n);
                break;
            }
        }
        assert_eq!(expected, Some(5));
    }

    #[test]
    fn equilibrium_threshold_outer_regimes() {
        let params = fig1_params();
        let generous = EconParams::new(7.0, 8.0, 3.0).unwrap();
        assert!(generous.r_f >= generous.c / params.xi);
        assert_eq!(equilibrium_threshold(&params, &generous), ThresholdStrategy::AlwaysEnter);

        // compensation far below the worst-case waiting cost with no reward
        let hopeless = EconParams::new(0.1, 0.0, 3.0).unwrap();
        assert!(hopeless.r_f < hopeless.c / params.xi - params.mu * hopeless.r_s / params.xi);
        assert_eq!(equilibrium_threshold(&params, &hopeless), ThresholdStrategy::AlwaysBalk);
    }

    #[test]
    fn equilibrium_threshold_ignores_repair_rate() {
        let econ = fig1_econ();
        let reference = equilibrium_threshold(&fig1_params(), &econ);
        for eta in [0.1, 1.0, 10.0] {
            let params = ModelParams { eta, ..fig1_params() };
            assert_eq!(equilibrium_threshold(&params, &econ), reference);
        }
    }

    #[test]
    fn threshold_consistency_on_parameter_grid() {
        // the floored threshold must keep the marginal customer willing and
        // the next one unwilling
        let mut scenarios = Vec::new();
        for (lambda, mu, xi) in [(7.0, 4.0, 0.4), (2.0, 3.0, 1.0), (1.0, 0.7, 0.05)] {
            for r_s in [1.0, 4.0, 9.0] {
                for r_f in [0.0, 0.4, 2.0] {
                    scenarios.push((lambda, mu, xi, r_s, r_f));
                }
            }
        }
        for (lambda, mu, xi, r_s, r_f) in scenarios {
            let params = ModelParams::new(lambda, mu, xi, 1.0).unwrap();
            let econ = EconParams::new(r_s, r_f, 3.0).unwrap();
            if let ThresholdStrategy::Finite(n) = equilibrium_threshold(&params, &econ) {
                assert!(net_benefit(&params, &econ, n) >= 0.0, "joining must pay at {n}");
                assert!(net_benefit(&params, &econ, n + 1) < 0.0, "balking must win at {}", n + 1);
            }
        }
    }

    #[test]
    fn vanishing_catastrophe_rate_recovers_classical_threshold() {
        // for (lambda, mu, r_s, c) = (7, 2, 7, 3) the classical threshold is
        // mu r_s / c - 1
        let reference: f64 = 2.0 * 7.0 / 3.0 - 1.0;
        let mut prev_err = f64::INFINITY;
        for xi in [1e-2, 1e-4, 1e-6] {
            let params = ModelParams::new(7.0, 2.0, xi, 1.0).unwrap();
            let econ = EconParams::new(7.0, 0.0, 3.0).unwrap();
            let v = continuous_threshold(&params, &econ).unwrap();
            let err = (v - reference).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-3);
    }

    #[test]
    fn stationary_repair_mass_is_rate_ratio() {
        let params = fig1_params();
        for n in [0, 3, 17] {
            let st = stationary_observable(&params, n);
            assert_relative_eq!(st.p00, params.xi / (params.xi + params.eta), max_relative = 1e-15);
        }
    }

    #[test]
    fn stationary_matches_three_state_solve() {
        let params = fig1_params();
        let st = stationary_observable(&params, 0);
        assert_eq!(st.source, MassSource::ClosedForm);
        let spec = ChainSpec::for_threshold(params, 0);
        let pi = ctmc::stationary(&spec).unwrap();
        assert_eq!(st.p_k1.len(), 2);
        for (closed, solved) in st.p_k1.iter().zip(&pi[1..]) {
            assert_abs_diff_eq!(closed, solved, epsilon = 1e-10);
        }
        // and against the hand solution of the three-state chain
        let denom = (params.xi + params.eta) * (params.lambda + params.mu + params.xi);
        assert_abs_diff_eq!(
            st.p_k1[0],
            params.eta * (params.mu + params.xi) / denom,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(st.p_k1[1], params.eta * params.lambda / denom, epsilon = 1e-12);
    }

    #[test]
    fn stationary_masses_normalized_and_positive() {
        for (lambda, mu, xi, eta) in [(7.0, 4.0, 0.4, 2.0), (1.0, 3.0, 0.9, 0.3), (5.0, 1.0, 0.2, 4.0)] {
            let params = ModelParams::new(lambda, mu, xi, eta).unwrap();
            for n in [0, 1, 6, 30, 200] {
                let st = stationary_observable(&params, n);
                assert!(st.p_k1.iter().all(|&m| m >= 0.0));
                let total: f64 = st.p00 + st.p_k1.iter().sum::<f64>();
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
                // the coefficient representation reproduces each mass
                if st.source == MassSource::ClosedForm && n <= 30 {
                    for (k, &mass) in st.p_k1.iter().enumerate() {
                        let direct = st.d1 * st.x1.powi(k as i32) + st.d2 * st.x2.powi(k as i32);
                        assert_abs_diff_eq!(mass, direct, epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn stationary_satisfies_balance_equations() {
        let params = fig1_params();
        for n in [0u32, 2, 9, 40] {
            let st = stationary_observable(&params, n);
            let p = |k: i64| -> f64 {
                if k < 0 || k as usize >= st.p_k1.len() {
                    0.0
                } else {
                    st.p_k1[k as usize]
                }
            };
            let lam = |k: i64| if k <= i64::from(n) { params.lambda } else { 0.0 };
            // repair state
            let operative: f64 = st.p_k1.iter().sum();
            assert_abs_diff_eq!(params.eta * st.p00, params.xi * operative, epsilon = 1e-10);
            // operative levels
            for k in 0..=i64::from(n) + 1 {
                let service = if k > 0 { params.mu } else { 0.0 };
                let outflow = (lam(k) + service + params.xi) * p(k);
                let mut inflow = lam(k - 1) * p(k - 1) + params.mu * p(k + 1);
                if k == 0 {
                    inflow += params.eta * st.p00;
                }
                assert_abs_diff_eq!(outflow, inflow, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn social_benefit_of_balking_is_zero() {
        assert_eq!(
            social_benefit_observable(&fig1_params(), &fig1_econ(), ThresholdStrategy::AlwaysBalk),
            0.0
        );
    }

    #[test]
    fn social_benefit_matches_oracle_at_reference_point() {
        let params = fig1_params();
        let econ = fig1_econ();
        let closed = social_benefit_observable(&params, &econ, ThresholdStrategy::Finite(3));
        let spec = ChainSpec::for_threshold(params, 3);
        let oracle = ctmc::performance_measures(&spec, &ctmc::stationary(&spec).unwrap(), &econ);
        assert_relative_eq!(closed, oracle.social_rate, max_relative = 1e-8);
    }

    #[test]
    fn entering_always_equals_full_participation() {
        let params = fig1_params();
        let econ = EconParams::new(7.0, 8.0, 3.0).unwrap();
        assert_abs_diff_eq!(
            social_benefit_observable(&params, &econ, ThresholdStrategy::AlwaysEnter),
            unobservable::social_benefit_unobservable(&params, &econ, 1.0),
            epsilon = 1e-10
        );
    }

    #[test]
    fn reduced_expression_agrees_with_level_sums() {
        for (lambda, mu, xi, eta) in [(7.0, 4.0, 0.4, 2.0), (7.0, 2.0, 0.7, 1.0), (2.0, 5.0, 1.3, 0.6)] {
            let params = ModelParams::new(lambda, mu, xi, eta).unwrap();
            for (r_s, r_f) in [(7.0, 0.0), (7.0, 3.0), (4.0, 9.0)] {
                let econ = EconParams::new(r_s, r_f, 3.0).unwrap();
                for n in [0, 1, 4, 12, 60] {
                    let sums = performance_observable(&params, &econ, n).social_rate;
                    let direct = social_benefit_observable_direct(&params, &econ, n);
                    assert_abs_diff_eq!(sums, direct, epsilon = 1e-9 * (1.0 + sums.abs()));
                }
            }
        }
    }

    #[test]
    fn large_thresholds_stay_finite_and_approach_full_participation() {
        // powers of x1 > 1 would overflow without the normalization
        let params = fig1_params();
        let econ = fig1_econ();
        let big = social_benefit_observable(&params, &econ, ThresholdStrategy::Finite(5000));
        assert!(big.is_finite());
        let full = unobservable::social_benefit_unobservable(&params, &econ, 1.0);
        assert_abs_diff_eq!(big, full, epsilon = 1e-9);
        let direct = social_benefit_observable_direct(&params, &econ, 5000);
        assert!(direct.is_finite());
        assert_abs_diff_eq!(direct, full, epsilon = 1e-9);
    }

    #[test]
    fn social_search_balks_when_joining_never_pays() {
        let params = fig1_params();
        let econ = EconParams::new(0.1, 0.0, 3.0).unwrap();
        assert_eq!(
            crate::model::classify_observable(&params, &econ),
            crate::model::ObservableRegime::AlwaysBalk
        );
        let search = optimal_threshold_social(&params, &econ, 64);
        assert_eq!(search.strategy, ThresholdStrategy::AlwaysBalk);
        assert_eq!(search.value, 0.0);
        assert!(!search.cap_reached);
        // exhaustive confirmation
        for n in 0..=64 {
            assert!(
                social_benefit_observable(&params, &econ, ThresholdStrategy::Finite(n)) <= 0.0
            );
        }
    }

    #[test]
    fn social_search_stays_below_equilibrium_at_reference_point() {
        let params = fig1_params();
        let econ = fig1_econ();
        let cap = default_search_cap(&params, &econ);
        assert_eq!(cap, 64); // 2 * 5 floored up to the minimum
        let search = optimal_threshold_social(&params, &econ, cap);
        match search.strategy {
            ThresholdStrategy::Finite(n_soc) => assert!(n_soc <= 5),
            other => panic!("expected a finite optimum, got {other:?}"),
        }
        assert!(!search.cap_reached);
        assert!(search.value > 0.0);
    }

    #[test]
    fn social_search_flags_cap_when_objective_keeps_rising() {
        // compensation above c/xi makes welfare nondecreasing in the
        // threshold, so a small cap must be reported as binding
        let params = fig1_params();
        let econ = EconParams::new(7.0, 8.0, 3.0).unwrap();
        let search = optimal_threshold_social(&params, &econ, 8);
        assert!(search.cap_reached);
        assert_eq!(search.strategy, ThresholdStrategy::Finite(8));
    }
}
