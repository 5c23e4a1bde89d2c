//! Closed forms for the unobservable case: characteristic roots, the
//! stationary distribution under a mixed strategy, the entrant's expected
//! net benefit, the mixed equilibrium, and the socially optimal joining
//! probability.

use thiserror::Error;

use crate::model::{
    EconParams, MeasureSource, MixedStrategy, ModelParams, PerformanceReport, UnobservableRegime,
};

/// Roots of the level-balance characteristic equation
/// `(lambda q + mu + xi) x = lambda q + mu x^2` for joining probability `q`.
///
/// `x2` is the geometric ratio of the stationary queue-length law;
/// `0 <= x2 < 1 < x1` whenever `xi > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharRoots {
    pub x1: f64,
    pub x2: f64,
    pub q: f64,
}

/// Solves the characteristic quadratic. The large root is computed by the
/// additive branch of the quadratic formula and the small one through the
/// product of roots, which keeps `x2` accurate when `lambda * q` is tiny.
pub fn char_roots(params: &ModelParams, q: f64) -> CharRoots {
    debug_assert!((0.0..=1.0).contains(&q), "joining probability out of range: {q}");
    let b = params.lambda * q + params.mu + params.xi;
    let disc = b * b - 4.0 * params.lambda * q * params.mu;
    let root = disc.sqrt();
    let x1 = (b + root) / (2.0 * params.mu);
    let x2 = params.lambda * q / (params.mu * x1);
    CharRoots { x1, x2, q }
}

/// Stationary distribution under a mixed strategy: mass `xi/(xi+eta)` on the
/// repair state and a geometric law with ratio `x2(q)` across the operative
/// levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnobservableStationary {
    pub q: f64,
    pub p00: f64,
    pub geometric_ratio: f64,
    operative_mass: f64,
}

impl UnobservableStationary {
    /// Mass on state `(k, 1)`: `eta (1 - x2) x2^k / (xi + eta)`.
    pub fn level_mass(&self, k: u32) -> f64 {
        self.operative_mass * (1.0 - self.geometric_ratio) * self.geometric_ratio.powf(f64::from(k))
    }

    /// Mean number in system, `eta x2 / ((xi + eta)(1 - x2))`. Finite for
    /// every `q` in `[0, 1]` because `x2 < 1`.
    pub fn mean_queue(&self) -> f64 {
        self.operative_mass * self.geometric_ratio / (1.0 - self.geometric_ratio)
    }
}

pub fn stationary_unobservable(params: &ModelParams, q: f64) -> UnobservableStationary {
    let x2 = char_roots(params, q).x2;
    UnobservableStationary {
        q,
        p00: params.xi / (params.xi + params.eta),
        geometric_ratio: x2,
        operative_mass: params.eta / (params.xi + params.eta),
    }
}

/// Expected net benefit of a customer joining with probability `q_tagged` on
/// finding the server operative, while everyone else joins with probability
/// `q_others`. Linear in `q_tagged`.
pub fn net_benefit(params: &ModelParams, econ: &EconParams, q_tagged: f64, q_others: f64) -> f64 {
    let x2 = char_roots(params, q_others).x2;
    let c_over_xi = econ.c / params.xi;
    // probability that an entrant eventually gets served, averaged over the
    // queue length seen on arrival
    let serve_prob = params.mu * (1.0 - x2) / (params.mu + params.xi - params.mu * x2);
    q_tagged * ((econ.r_s - econ.r_f + c_over_xi) * serve_prob + econ.r_f - c_over_xi)
}

/// The unique mixed equilibrium joining probability.
///
/// Zero and one on the outer regimes; in between,
/// `(c - xi r_f + xi r_s)(mu r_s + xi r_f - c) / (lambda (c - xi r_f) r_s)`,
/// clamped to `[0, 1]` to absorb rounding at the regime boundaries.
pub fn equilibrium_mixed(params: &ModelParams, econ: &EconParams) -> MixedStrategy {
    let q = match crate::model::classify_unobservable(params, econ) {
        UnobservableRegime::Balk => 0.0,
        UnobservableRegime::Enter => 1.0,
        UnobservableRegime::Interior => {
            let num = (econ.c - params.xi * econ.r_f + params.xi * econ.r_s)
                * (params.mu * econ.r_s + params.xi * econ.r_f - econ.c);
            let den = params.lambda * (econ.c - params.xi * econ.r_f) * econ.r_s;
            (num / den).clamp(0.0, 1.0)
        }
    };
    MixedStrategy::new(q).expect("equilibrium probability clamped to [0, 1]")
}

/// Welfare generated per time unit when everyone joins with probability `q`:
/// `eta x2 [mu r_s (1 - x2) + xi r_f - c] / ((xi + eta)(1 - x2))`.
pub fn social_benefit_unobservable(params: &ModelParams, econ: &EconParams, q: f64) -> f64 {
    let x2 = char_roots(params, q).x2;
    if x2 == 0.0 {
        return 0.0;
    }
    params.eta * x2 * (params.mu * econ.r_s * (1.0 - x2) + params.xi * econ.r_f - econ.c)
        / ((params.xi + params.eta) * (1.0 - x2))
}

/// The socially optimal joining probability and the welfare rate it yields.
///
/// Closed form: zero below the balk cutoff, one at or above
/// `c/xi - mu r_s (1 - x2)^2 / xi`, and in between
/// `sqrt(D)(mu r_s - sqrt(D))(xi r_s + sqrt(D)) / (lambda D r_s)` with
/// `D = mu r_s (c - xi r_f)`.
pub fn optimal_mixed_social(params: &ModelParams, econ: &EconParams) -> (MixedStrategy, f64) {
    let c_over_xi = econ.c / params.xi;
    let lower = c_over_xi - params.mu * econ.r_s / params.xi;
    let q = if econ.r_f <= lower {
        0.0
    } else {
        let x2_full = char_roots(params, 1.0).x2;
        let upper = c_over_xi - params.mu * econ.r_s * (1.0 - x2_full).powi(2) / params.xi;
        if econ.r_f >= upper {
            1.0
        } else {
            let d = params.mu * econ.r_s * (econ.c - params.xi * econ.r_f);
            let root = d.sqrt();
            let q = root * (params.mu * econ.r_s - root) * (params.xi * econ.r_s + root)
                / (params.lambda * d * econ.r_s);
            q.clamp(0.0, 1.0)
        }
    };
    let strategy = MixedStrategy::new(q).expect("social optimum clamped to [0, 1]");
    (strategy, social_benefit_unobservable(params, econ, q))
}

/// Closed-form performance measures under a mixed strategy.
pub fn performance_unobservable(
    params: &ModelParams,
    econ: &EconParams,
    q: f64,
) -> PerformanceReport {
    let st = stationary_unobservable(params, q);
    let x2 = st.geometric_ratio;
    let operative = params.eta / (params.xi + params.eta);
    let p_ser = q * operative * params.mu * (1.0 - x2) / (params.mu + params.xi - params.mu * x2);
    let p_cat = q * operative - p_ser;
    let e_q = st.mean_queue();
    let social_rate = params.lambda * (p_ser * econ.r_s + p_cat * econ.r_f) - econ.c * e_q;
    PerformanceReport { p_ser, p_cat, e_q, social_rate, source: MeasureSource::ClosedForm }
}

/// One step of the vanishing-catastrophe-rate comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitStep {
    pub xi: f64,
    pub q_e: f64,
    pub abs_error: f64,
}

/// Output of [`eh_limit_check`]: the classical no-catastrophe joining
/// probability `(mu - c/r_s)/lambda` and the equilibrium error at each `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub reference: f64,
    pub steps: Vec<LimitStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LimitError {
    #[error("interior regime requires mu * r_s > c, got mu * r_s = {mu_rs} with c = {c}")]
    PreconditionViolated { mu_rs: f64, c: f64 },
}

/// Tracks how fast the mixed equilibrium approaches the classical
/// no-catastrophe joining probability as `xi` shrinks. The compensation is
/// set to zero and the repair rate to one; neither affects `q_e`.
pub fn eh_limit_check(
    lambda: f64,
    mu: f64,
    r_s: f64,
    c: f64,
    xi_sequence: &[f64],
) -> Result<LimitReport, LimitError> {
    if !(mu * r_s > c) {
        return Err(LimitError::PreconditionViolated { mu_rs: mu * r_s, c });
    }
    let reference = (mu - c / r_s) / lambda;
    let steps = xi_sequence
        .iter()
        .map(|&xi| {
            let params = ModelParams { lambda, mu, xi, eta: 1.0 };
            let econ = EconParams { r_s, r_f: 0.0, c };
            let q_e = equilibrium_mixed(&params, &econ).probability();
            LimitStep { xi, q_e, abs_error: (q_e - reference).abs() }
        })
        .collect();
    Ok(LimitReport { reference, steps })
}
