//! Cross-check suite: every closed form is compared against an independent
//! route (the chain solver or a tail-certified series) over a random
//! parameter grid, together with the structural properties of the
//! equilibria. Consumed by the `verify` command and the acceptance tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::ctmc::{self, ChainSpec};
use crate::model::{
    classify_observable, classify_unobservable, EconParams, ModelParams, ObservableRegime,
    ThresholdStrategy, UnobservableRegime,
};
use crate::observable;
use crate::unobservable;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum VerifyError {
    #[error("the verification grid must contain at least one point")]
    EmptyGrid,
}

/// Configuration of the random verification grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub size: usize,
    pub seed: u64,
    /// Fault-injection factor: the observable welfare closed form is
    /// multiplied by `1 + perturb` before comparison, so a nonzero value
    /// must make the suite fail. Zero in normal operation.
    pub perturb: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { size: 200, seed: 0x5EED, perturb: 0.0 }
    }
}

/// Outcome of one check: the worst discrepancy seen across the grid, the
/// allowed tolerance, and where the worst case occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub worst_case: String,
}

impl CheckOutcome {
    fn from_cases(name: &'static str, tolerance: f64, cases: Vec<(f64, String)>) -> Self {
        let (worst, worst_case) = cases
            .into_iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap_or((0.0, String::from("no applicable grid points")));
        CheckOutcome { name, passed: worst <= tolerance, worst, tolerance, worst_case }
    }
}

/// One grid point: a full scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub params: ModelParams,
    pub econ: EconParams,
}

impl GridPoint {
    fn describe(&self) -> String {
        format!(
            "lambda={:.6}, mu={:.6}, xi={:.6}, eta={:.6}, r_s={:.6}, r_f={:.6}, c={:.6}",
            self.params.lambda,
            self.params.mu,
            self.params.xi,
            self.params.eta,
            self.econ.r_s,
            self.econ.r_f,
            self.econ.c
        )
    }
}

/// Samples a scenario grid covering all three regimes: load `lambda/mu` in
/// (0.1, 5), catastrophe rate in (0.01, 2), repair rate in (0.1, 5), and
/// compensation drawn below the balk cutoff, inside the band, or above
/// `c/xi` with equal weight.
pub fn sample_grid(size: usize, seed: u64) -> Vec<GridPoint> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let mu = rng.gen_range(0.5..4.0);
            let lambda = mu * rng.gen_range(0.1..5.0);
            let xi = rng.gen_range(0.01..2.0);
            let eta = rng.gen_range(0.1..5.0);
            let c = rng.gen_range(0.2..4.0);
            let style: f64 = rng.gen();
            let (r_s, r_f) = if style < 1.0 / 3.0 {
                // balk-prone: reward small enough that the lower cutoff is
                // positive, compensation below it
                let r_s = rng.gen_range(0.0..c / mu);
                let lower = (c - mu * r_s) / xi;
                (r_s, rng.gen_range(0.0..lower))
            } else if style < 2.0 / 3.0 {
                // enter-prone: compensation at or above the waiting cost of
                // an entire catastrophe cycle
                (rng.gen_range(0.1..8.0), c / xi + rng.gen_range(0.0..3.0))
            } else {
                (rng.gen_range(0.5..8.0), rng.gen_range(0.0..c / xi))
            };
            GridPoint { params: ModelParams { lambda, mu, xi, eta }, econ: EconParams { r_s, r_f, c } }
        })
        .collect()
}

/// Relative discrepancy with an absolute floor of one unit, so values near
/// zero are compared absolutely.
fn discrepancy(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Observable welfare closed form against the chain oracle, at a random
/// threshold up to 50 per grid point.
pub fn check_observable_social_vs_oracle(points: &[GridPoint], perturb: f64) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(0xA11CE);
    let cases = points
        .iter()
        .map(|point| {
            let n = rng.gen_range(0..=50u32);
            let closed = observable::social_benefit_observable(
                &point.params,
                &point.econ,
                ThresholdStrategy::Finite(n),
            ) * (1.0 + perturb);
            let spec = ChainSpec::for_threshold(point.params, n);
            let oracle =
                ctmc::performance_measures(&spec, &ctmc::stationary(&spec).unwrap(), &point.econ);
            (discrepancy(closed, oracle.social_rate), format!("{}, n={n}", point.describe()))
        })
        .collect();
    CheckOutcome::from_cases("obs-social-closed-vs-ctmc", 1e-8, cases)
}

/// Unobservable welfare closed form against the tail-certified series.
pub fn check_unobservable_social_vs_series(points: &[GridPoint]) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(0xB0B);
    let cases = points
        .iter()
        .map(|point| {
            let q = rng.gen_range(0.0..=1.0);
            let closed = unobservable::social_benefit_unobservable(&point.params, &point.econ, q);
            let series = series_social_unobservable(&point.params, &point.econ, q);
            (discrepancy(closed, series), format!("{}, q={q:.6}", point.describe()))
        })
        .collect();
    CheckOutcome::from_cases("unobs-social-closed-vs-series", 1e-9, cases)
}

/// The reduced single-expression welfare formula against the level sums.
pub fn check_observable_direct_vs_sums(points: &[GridPoint]) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(0xD1CE);
    let cases = points
        .iter()
        .map(|point| {
            let n = rng.gen_range(0..=80u32);
            let sums = observable::social_benefit_observable(
                &point.params,
                &point.econ,
                ThresholdStrategy::Finite(n),
            );
            let direct = observable::social_benefit_observable_direct(&point.params, &point.econ, n);
            (discrepancy(direct, sums), format!("{}, n={n}", point.describe()))
        })
        .collect();
    CheckOutcome::from_cases("obs-social-direct-vs-levelsum", 1e-10, cases)
}

/// Closed-form threshold stationary masses against the solver, per state.
pub fn check_stationary_observable(points: &[GridPoint]) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(0x57A7E);
    let cases = points
        .iter()
        .map(|point| {
            let n = rng.gen_range(0..=50u32);
            let closed = observable::stationary_observable(&point.params, n);
            let spec = ChainSpec::for_threshold(point.params, n);
            let pi = ctmc::stationary(&spec).unwrap();
            let mut worst = (closed.p00 - pi[0]).abs();
            for (mass, solved) in closed.p_k1.iter().zip(&pi[1..]) {
                worst = worst.max((mass - solved).abs());
            }
            (worst, format!("{}, n={n}", point.describe()))
        })
        .collect();
    CheckOutcome::from_cases("obs-stationary-closed-vs-ctmc", 1e-10, cases)
}

/// Geometric stationary law against the solver for mixed strategies. Points
/// whose certified truncation would be enormous are skipped; the series
/// check still covers them.
pub fn check_stationary_unobservable(points: &[GridPoint]) -> CheckOutcome {
    let mut rng = ChaCha12Rng::seed_from_u64(0x6E0);
    let mut cases = Vec::new();
    for point in points {
        let q = rng.gen_range(0.0..=1.0);
        let spec = match ChainSpec::for_mixed(point.params, q) {
            Ok(spec) if spec.truncation_k <= 800 => spec,
            _ => continue,
        };
        let pi = ctmc::stationary(&spec).unwrap();
        let law = unobservable::stationary_unobservable(&point.params, q);
        let mut worst = (law.p00 - pi[0]).abs();
        for k in 0..=spec.truncation_k {
            worst = worst.max((law.level_mass(k as u32) - pi[k + 1]).abs());
        }
        cases.push((worst, format!("{}, q={q:.6}", point.describe())));
    }
    CheckOutcome::from_cases("unobs-stationary-closed-vs-ctmc", 1e-8, cases)
}

/// In the finite-threshold regime the marginal customer at the threshold
/// must be willing and the next one unwilling.
pub fn check_threshold_fixed_point(points: &[GridPoint]) -> CheckOutcome {
    let cases = points
        .iter()
        .filter(|point| {
            classify_observable(&point.params, &point.econ) == ObservableRegime::FiniteThreshold
        })
        .map(|point| {
            let violation = match observable::equilibrium_threshold(&point.params, &point.econ) {
                ThresholdStrategy::Finite(n) => {
                    let at = observable::net_benefit(&point.params, &point.econ, n);
                    let beyond = observable::net_benefit(&point.params, &point.econ, n + 1);
                    (-at).max(beyond).max(0.0)
                }
                _ => f64::INFINITY,
            };
            (violation, point.describe())
        })
        .collect();
    CheckOutcome::from_cases("obs-threshold-sign-change", 0.0, cases)
}

/// Interior mixed equilibria must leave the entrant exactly indifferent.
pub fn check_mixed_fixed_point(points: &[GridPoint]) -> CheckOutcome {
    let cases = points
        .iter()
        .filter(|point| {
            classify_unobservable(&point.params, &point.econ) == UnobservableRegime::Interior
        })
        .map(|point| {
            let q_e = unobservable::equilibrium_mixed(&point.params, &point.econ).probability();
            let residual = unobservable::net_benefit(&point.params, &point.econ, 1.0, q_e).abs();
            (residual, point.describe())
        })
        .collect();
    CheckOutcome::from_cases("unobs-equilibrium-fixed-point", 1e-9, cases)
}

/// The social optimum never exceeds the equilibrium joining probability.
pub fn check_qsoc_below_qe(points: &[GridPoint]) -> CheckOutcome {
    let cases = points
        .iter()
        .map(|point| {
            let q_e = unobservable::equilibrium_mixed(&point.params, &point.econ).probability();
            let q_soc = unobservable::optimal_mixed_social(&point.params, &point.econ)
                .0
                .probability();
            ((q_soc - q_e).max(0.0), point.describe())
        })
        .collect();
    CheckOutcome::from_cases("qsoc-below-qe", 0.0, cases)
}

/// Interior social optima must satisfy the stationarity quadratic
/// `mu r_s x^2 - 2 mu r_s x + (mu r_s + xi r_f - c) = 0` at `x = x2(q_soc)`.
pub fn check_first_order_condition(points: &[GridPoint]) -> CheckOutcome {
    let cases = points
        .iter()
        .filter_map(|point| {
            let (q_soc, _) = unobservable::optimal_mixed_social(&point.params, &point.econ);
            let q = q_soc.probability();
            if q <= 0.0 || q >= 1.0 {
                return None;
            }
            let x = unobservable::char_roots(&point.params, q).x2;
            let mrs = point.params.mu * point.econ.r_s;
            let residual =
                (mrs * x * x - 2.0 * mrs * x + (mrs + point.params.xi * point.econ.r_f - point.econ.c))
                    .abs();
            Some((residual, point.describe()))
        })
        .collect();
    CheckOutcome::from_cases("qsoc-first-order-condition", 1e-9, cases)
}

/// Welfare at the equilibrium never beats welfare at the social optimum.
/// A hair of slack absorbs rounding when the two probabilities coincide.
pub fn check_social_value_order(points: &[GridPoint]) -> CheckOutcome {
    let cases = points
        .iter()
        .map(|point| {
            let q_e = unobservable::equilibrium_mixed(&point.params, &point.econ).probability();
            let (_, at_soc) = unobservable::optimal_mixed_social(&point.params, &point.econ);
            let at_e =
                unobservable::social_benefit_unobservable(&point.params, &point.econ, q_e);
            ((at_e - at_soc).max(0.0), point.describe())
        })
        .collect();
    CheckOutcome::from_cases("welfare-qe-below-qsoc", 1e-12, cases)
}

/// Equilibria and social optima must not read the repair rate.
pub fn check_eta_invariance(points: &[GridPoint]) -> CheckOutcome {
    let cases = points
        .iter()
        .map(|point| {
            let reference_n = observable::equilibrium_threshold(&point.params, &point.econ);
            let reference_qe =
                unobservable::equilibrium_mixed(&point.params, &point.econ).probability();
            let reference_qsoc = unobservable::optimal_mixed_social(&point.params, &point.econ)
                .0
                .probability();
            let mut worst = 0.0f64;
            for eta in [0.1, 1.0, 10.0] {
                let params = ModelParams { eta, ..point.params };
                if observable::equilibrium_threshold(&params, &point.econ) != reference_n {
                    worst = f64::INFINITY;
                }
                let qe = unobservable::equilibrium_mixed(&params, &point.econ).probability();
                let qsoc =
                    unobservable::optimal_mixed_social(&params, &point.econ).0.probability();
                worst = worst.max((qe - reference_qe).abs()).max((qsoc - reference_qsoc).abs());
            }
            (worst, point.describe())
        })
        .collect();
    CheckOutcome::from_cases("eta-invariance", 0.0, cases)
}

/// The entrant benefit falls strictly in the crowd's joining probability
/// wherever `r_s - r_f + c/xi > 0`; with compensation above that level the
/// benefit grows with congestion instead, so such points are skipped.
pub fn check_monotone_best_response(points: &[GridPoint]) -> CheckOutcome {
    let cases = points
        .iter()
        .filter(|point| point.econ.r_s - point.econ.r_f + point.econ.c / point.params.xi > 0.0)
        .map(|point| {
            let mut worst = 0.0f64;
            let mut prev = unobservable::net_benefit(&point.params, &point.econ, 1.0, 0.0);
            for i in 1..=20 {
                let q = f64::from(i) / 20.0;
                let cur = unobservable::net_benefit(&point.params, &point.econ, 1.0, q);
                worst = worst.max(cur - prev);
                prev = cur;
            }
            (worst.max(0.0), point.describe())
        })
        .collect();
    CheckOutcome::from_cases("monotone-best-response", 0.0, cases)
}

/// As the catastrophe rate vanishes the continuous threshold approaches the
/// classical `mu r_s / c - 1`, with the error shrinking along the sequence.
pub fn check_naor_limit() -> CheckOutcome {
    let reference: f64 = 2.0 * 7.0 / 3.0 - 1.0;
    let mut errors = Vec::new();
    for xi in [1e-2, 1e-4, 1e-6] {
        let params = ModelParams { lambda: 7.0, mu: 2.0, xi, eta: 1.0 };
        let econ = EconParams { r_s: 7.0, r_f: 0.0, c: 3.0 };
        let v = observable::continuous_threshold(&params, &econ)
            .expect("small xi keeps the scenario in the finite-threshold regime");
        errors.push((v - reference).abs());
    }
    let decreasing = errors.windows(2).all(|pair| pair[1] < pair[0]);
    let worst = if decreasing { *errors.last().unwrap() } else { f64::INFINITY };
    CheckOutcome {
        name: "naor-threshold-limit",
        passed: worst <= 1e-3,
        worst,
        tolerance: 1e-3,
        worst_case: format!("errors along xi = 1e-2, 1e-4, 1e-6: {errors:?}"),
    }
}

/// As the catastrophe rate vanishes the mixed equilibrium approaches the
/// classical joining probability.
pub fn check_eh_limit() -> CheckOutcome {
    let report = unobservable::eh_limit_check(7.0, 2.0, 7.0, 3.0, &[1e-2, 1e-4, 1e-6])
        .expect("mu r_s > c holds");
    let decreasing =
        report.steps.windows(2).all(|pair| pair[1].abs_error < pair[0].abs_error);
    let worst =
        if decreasing { report.steps.last().unwrap().abs_error } else { f64::INFINITY };
    CheckOutcome {
        name: "eh-equilibrium-limit",
        passed: worst <= 1e-4,
        worst,
        tolerance: 1e-4,
        worst_case: format!(
            "errors along xi = 1e-2, 1e-4, 1e-6: {:?}",
            report.steps.iter().map(|s| s.abs_error).collect::<Vec<_>>()
        ),
    }
}

/// Runs the whole suite over a freshly sampled grid.
pub fn run_checks(config: &GridConfig) -> Result<Vec<CheckOutcome>, VerifyError> {
    if config.size == 0 {
        return Err(VerifyError::EmptyGrid);
    }
    let points = sample_grid(config.size, config.seed);
    Ok(vec![
        check_observable_social_vs_oracle(&points, config.perturb),
        check_unobservable_social_vs_series(&points),
        check_observable_direct_vs_sums(&points),
        check_stationary_observable(&points),
        check_stationary_unobservable(&points),
        check_threshold_fixed_point(&points),
        check_mixed_fixed_point(&points),
        check_qsoc_below_qe(&points),
        check_first_order_condition(&points),
        check_social_value_order(&points),
        check_eta_invariance(&points),
        check_monotone_best_response(&points),
        check_naor_limit(),
        check_eh_limit(),
    ])
}

/// Welfare rate under a mixed strategy by direct summation of the level
/// series, truncated once the certified geometric tail bound drops below
/// 1e-14 of the running sums. Independent of the collapsed closed form.
pub fn series_social_unobservable(params: &ModelParams, econ: &EconParams, q: f64) -> f64 {
    let law = unobservable::stationary_unobservable(params, q);
    let x2 = law.geometric_ratio;
    if x2 == 0.0 {
        return 0.0;
    }
    let survive = params.mu / (params.mu + params.xi);
    let head = params.eta * (1.0 - x2) / (params.xi + params.eta);
    let mut p_ser = 0.0;
    let mut p_cat = 0.0;
    let mut e_q = 0.0;
    let mut x2_pow = 1.0;
    let mut survive_pow = survive;
    let mut k = 0u64;
    loop {
        let mass = head * x2_pow;
        p_ser += mass * q * survive_pow;
        p_cat += mass * q * (1.0 - survive_pow);
        e_q += k as f64 * mass;
        // bound the neglected remainder of all three sums
        let tail = head * x2_pow * x2 / (1.0 - x2);
        let weight = k as f64 + 1.0 + 1.0 / (1.0 - x2);
        if tail * weight < 1e-14 * (1.0 + p_ser + p_cat + e_q) || k > 20_000_000 {
            break;
        }
        k += 1;
        x2_pow *= x2;
        survive_pow *= survive;
    }
    params.lambda * (p_ser * econ.r_s + p_cat * econ.r_f) - econ.c * e_q
}

/// Entrant benefit by summing the per-level benefit against the geometric
/// law seen on arrival; the independent route behind the collapsed form.
pub fn series_entrant_benefit(params: &ModelParams, econ: &EconParams, q: f64) -> f64 {
    let x2 = unobservable::char_roots(params, q).x2;
    let bound = econ.r_s.abs() + econ.r_f.abs() + econ.c / params.xi;
    let mut total = 0.0;
    let mut weight = 1.0 - x2;
    let mut k = 0u32;
    loop {
        total += weight * observable::net_benefit(params, econ, k);
        let tail = weight * x2 / (1.0 - x2).max(f64::MIN_POSITIVE);
        if tail * bound < 1e-14 * (1.0 + total.abs()) || k > 5_000_000 {
            break;
        }
        weight *= x2;
        k += 1;
    }
    total
}
