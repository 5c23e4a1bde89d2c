//! Shared parameter and strategy types, input validation, and regime
//! classification for the joining game.

use thiserror::Error;

use crate::unobservable;

/// Validation failures for model and economic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ValidationError {
    /// A rate that must be strictly positive was zero or negative.
    #[error("{name} must be strictly positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    /// A reward or compensation was negative.
    #[error("{name} must be non-negative, got {value}")]
    NegativeEconValue { name: &'static str, value: f64 },
    /// A value was NaN or infinite.
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    /// A joining probability outside `[0, 1]`.
    #[error("joining probability must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
}

/// Operational rates of the queue: Poisson arrivals at `lambda`, exponential
/// service at `mu`, Poisson catastrophes at `xi` (each one flushes every
/// customer and takes the server down), and exponential repairs at `eta`.
/// Arrivals during a repair are lost.
///
/// All four rates must be strictly positive and finite. A zero catastrophe
/// rate is rejected rather than special-cased: every benefit expression
/// divides by `xi`. The vanishing-`xi` behavior is covered by dedicated
/// limit checks in the analytics modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    pub xi: f64,
    pub eta: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, mu: f64, xi: f64, eta: f64) -> Result<Self, ValidationError> {
        let params = Self { lambda, mu, xi, eta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let fields = [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("xi", self.xi),
            ("eta", self.eta),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ValidationError::NonFinite { name, value });
            }
            if value <= 0.0 {
                return Err(ValidationError::NonPositiveRate { name, value });
            }
        }
        Ok(())
    }
}

/// Reward-cost structure: `r_s` on service completion, `r_f` as compensation
/// when a catastrophe flushes the customer, and a waiting cost of `c` per
/// time unit spent in the system.
///
/// `r_s = 0` is permitted (degenerate but well defined); `c` must be
/// strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconParams {
    pub r_s: f64,
    pub r_f: f64,
    pub c: f64,
}

impl EconParams {
    pub fn new(r_s: f64, r_f: f64, c: f64) -> Result<Self, ValidationError> {
        let econ = Self { r_s, r_f, c };
        econ.validate()?;
        Ok(econ)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        for (name, value) in [("r_s", self.r_s), ("r_f", self.r_f), ("c", self.c)] {
            if !value.is_finite() {
                return Err(ValidationError::NonFinite { name, value });
            }
        }
        if self.r_s < 0.0 {
            return Err(ValidationError::NegativeEconValue { name: "r_s", value: self.r_s });
        }
        if self.r_f < 0.0 {
            return Err(ValidationError::NegativeEconValue { name: "r_f", value: self.r_f });
        }
        if self.c < 0.0 {
            return Err(ValidationError::NegativeEconValue { name: "c", value: self.c });
        }
        if self.c == 0.0 {
            return Err(ValidationError::NonPositiveRate { name: "c", value: self.c });
        }
        Ok(())
    }
}

/// Validates a full scenario in one call.
pub fn validate(params: &ModelParams, econ: &EconParams) -> Result<(), ValidationError> {
    params.validate()?;
    econ.validate()
}

/// Pure strategy for customers that observe the queue length: balk always,
/// join iff at most `n` customers are seen (and the server is up), or join
/// always.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdStrategy {
    AlwaysBalk,
    Finite(u32),
    AlwaysEnter,
}

impl ThresholdStrategy {
    /// Probability of joining when `level` customers are seen on arrival at
    /// an operative system.
    pub fn join_probability(&self, level: u32) -> f64 {
        match self {
            ThresholdStrategy::AlwaysBalk => 0.0,
            ThresholdStrategy::Finite(n) => {
                if level <= *n {
                    1.0
                } else {
                    0.0
                }
            }
            ThresholdStrategy::AlwaysEnter => 1.0,
        }
    }
}

/// Mixed strategy for customers that cannot observe the state: join with
/// probability `q` whenever the server is found operative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedStrategy {
    q: f64,
}

impl MixedStrategy {
    pub fn new(q: f64) -> Result<Self, ValidationError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(ValidationError::ProbabilityOutOfRange(q));
        }
        Ok(Self { q })
    }

    pub fn probability(&self) -> f64 {
        self.q
    }
}

/// Either kind of joining rule, as consumed by the oracle and the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Threshold(ThresholdStrategy),
    Mixed(MixedStrategy),
}

impl Strategy {
    pub fn join_probability(&self, level: u32) -> f64 {
        match self {
            Strategy::Threshold(t) => t.join_probability(level),
            Strategy::Mixed(m) => m.probability(),
        }
    }
}

/// Which dominant strategy rules the observable game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableRegime {
    /// Compensation so poor that joining never pays, even at an empty queue.
    AlwaysBalk,
    /// A finite joining threshold exists.
    FiniteThreshold,
    /// Compensation covers the worst-case waiting cost; always join.
    AlwaysEnter,
}

/// Which branch the unobservable mixed equilibrium falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnobservableRegime {
    Balk,
    Interior,
    Enter,
}

/// Classifies the observable game.
///
/// With cutoffs `lower = c/xi - mu r_s/xi` and `upper = c/xi`:
/// balk for `r_f < lower`, a finite threshold for `lower <= r_f < upper`,
/// and enter for `r_f >= upper`. Ties follow these inequalities exactly;
/// indifferent customers enter.
pub fn classify_observable(params: &ModelParams, econ: &EconParams) -> ObservableRegime {
    let c_over_xi = econ.c / params.xi;
    let lower = c_over_xi - params.mu * econ.r_s / params.xi;
    if econ.r_f < lower {
        ObservableRegime::AlwaysBalk
    } else if econ.r_f < c_over_xi {
        ObservableRegime::FiniteThreshold
    } else {
        ObservableRegime::AlwaysEnter
    }
}

/// Classifies the unobservable game.
///
/// Balk for `r_f <= c/xi - mu r_s/xi`, enter for
/// `r_f >= c/xi - mu r_s (1 - x2)/xi` with `x2` the geometric ratio at
/// full participation, interior in between.
pub fn classify_unobservable(params: &ModelParams, econ: &EconParams) -> UnobservableRegime {
    let c_over_xi = econ.c / params.xi;
    let lower = c_over_xi - params.mu * econ.r_s / params.xi;
    if econ.r_f <= lower {
        return UnobservableRegime::Balk;
    }
    let x2 = unobservable::char_roots(params, 1.0).x2;
    let upper = c_over_xi - params.mu * econ.r_s * (1.0 - x2) / params.xi;
    if econ.r_f >= upper {
        UnobservableRegime::Enter
    } else {
        UnobservableRegime::Interior
    }
}

/// Where a set of performance figures came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureSource {
    ClosedForm,
    CtmcOracle,
    Simulation,
}

/// Long-run performance of the system under a fixed strategy.
///
/// `p_ser` and `p_cat` are the fractions of all arriving customers that end
/// up served or flushed by a catastrophe, `e_q` is the mean number in
/// system, and `social_rate` is the welfare generated per time unit:
/// `lambda p_ser r_s + lambda p_cat r_f - c e_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceReport {
    pub p_ser: f64,
    pub p_cat: f64,
    pub e_q: f64,
    pub social_rate: f64,
    pub source: MeasureSource,
}
