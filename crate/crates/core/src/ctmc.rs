//! Independent verification backbone: builds the generator of the (possibly
//! truncated) chain under a given strategy, solves for the stationary
//! distribution by direct elimination, and recomputes every performance
//! measure by summation. Nothing here relies on the closed forms it is used
//! to check.

use thiserror::Error;

use crate::model::{
    EconParams, MeasureSource, MixedStrategy, ModelParams, PerformanceReport, Strategy,
    ThresholdStrategy,
};
use crate::unobservable;

/// Hard cap on the retained queue levels of a truncated chain.
pub const MAX_TRUNCATION: usize = 5000;

/// Neglected geometric tail mass allowed when truncating a mixed-strategy
/// chain.
const TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OracleError {
    #[error("truncation at level {required} exceeds the cap of {MAX_TRUNCATION}")]
    TruncationTooLarge { required: usize },
    #[error("stationary system is singular at pivot {pivot}")]
    SingularSystem { pivot: usize },
}

/// A finite chain to solve: the repair state plus operative levels
/// `0..=truncation_k`, with arrivals admitted according to `strategy`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub params: ModelParams,
    pub strategy: Strategy,
    pub truncation_k: usize,
}

impl ChainSpec {
    /// Chain under a finite threshold `n`; arrivals are blocked at level
    /// `n + 1`, so the chain is naturally finite with `truncation_k = n + 1`.
    pub fn for_threshold(params: ModelParams, n: u32) -> Self {
        Self {
            params,
            strategy: Strategy::Threshold(ThresholdStrategy::Finite(n)),
            truncation_k: n as usize + 1,
        }
    }

    /// Chain under a mixed strategy, truncated where the geometric tail mass
    /// bound `x2^k / (1 - x2)` drops below 1e-12.
    pub fn for_mixed(params: ModelParams, q: f64) -> Result<Self, OracleError> {
        let strategy = Strategy::Mixed(
            MixedStrategy::new(q).expect("mixed chain requires a probability in [0, 1]"),
        );
        let x2 = unobservable::char_roots(&params, q).x2;
        let required = if x2 == 0.0 {
            1
        } else {
            ((TAIL_MASS * (1.0 - x2)).ln() / x2.ln()).ceil().max(1.0) as usize
        };
        if required > MAX_TRUNCATION {
            return Err(OracleError::TruncationTooLarge { required });
        }
        Ok(Self { params, strategy, truncation_k: required })
    }

    /// Repair state plus levels `0..=truncation_k`.
    pub fn state_count(&self) -> usize {
        self.truncation_k + 2
    }
}

/// Dense generator of the chain. State 0 is the repair state `(0, 0)`;
/// state `1 + k` is the operative level `(k, 1)`. Row sums are zero.
pub fn build_generator(spec: &ChainSpec) -> Vec<Vec<f64>> {
    let m = spec.state_count();
    let p = &spec.params;
    let mut gen = vec![vec![0.0; m]; m];
    gen[0][1] = p.eta;
    for k in 0..=spec.truncation_k {
        let row = k + 1;
        if k < spec.truncation_k {
            gen[row][row + 1] = p.lambda * spec.strategy.join_probability(k as u32);
        }
        if k > 0 {
            gen[row][row - 1] = p.mu;
        }
        gen[row][0] = p.xi;
    }
    for (i, row) in gen.iter_mut().enumerate() {
        let total: f64 = row.iter().sum();
        row[i] = -total;
    }
    gen
}

/// Stationary distribution of a generator: solves `pi G = 0` with the
/// normalization row replacing the last balance equation, by Gaussian
/// elimination with partial pivoting.
pub fn solve_stationary(generator: &[Vec<f64>]) -> Result<Vec<f64>, OracleError> {
    let m = generator.len();
    let mut a = vec![vec![0.0; m]; m];
    for (i, row) in generator.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            a[j][i] = value;
        }
    }
    for slot in a[m - 1].iter_mut() {
        *slot = 1.0;
    }
    let mut rhs = vec![0.0; m];
    rhs[m - 1] = 1.0;
    gaussian_solve(a, rhs)
}

fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, OracleError> {
    let m = a.len();
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty pivot range");
        if a[pivot_row][col].abs() < 1e-300 {
            return Err(OracleError::SingularSystem { pivot: col });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..m {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                let pivot = &upper[col];
                for (slot, &coef) in lower[0][col..].iter_mut().zip(&pivot[col..]) {
                    *slot -= factor * coef;
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; m];
    for col in (0..m).rev() {
        let mut acc = b[col];
        for j in col + 1..m {
            acc -= a[col][j] * x[j];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// Builds and solves the chain in one step.
pub fn stationary(spec: &ChainSpec) -> Result<Vec<f64>, OracleError> {
    solve_stationary(&build_generator(spec))
}

/// Performance measures by direct summation over the solved distribution:
/// the joining fraction at each level splits into eventual service with
/// probability `(mu/(mu+xi))^(k+1)` and flush otherwise.
pub fn performance_measures(
    spec: &ChainSpec,
    stationary: &[f64],
    econ: &EconParams,
) -> PerformanceReport {
    let p = &spec.params;
    let survive = p.mu / (p.mu + p.xi);
    let mut p_ser = 0.0;
    let mut p_cat = 0.0;
    let mut e_q = 0.0;
    let mut survive_pow = survive;
    for k in 0..=spec.truncation_k {
        let mass = stationary[k + 1];
        let join = spec.strategy.join_probability(k as u32);
        p_ser += mass * join * survive_pow;
        p_cat += mass * join * (1.0 - survive_pow);
        e_q += k as f64 * mass;
        survive_pow *= survive;
    }
    let social_rate = p.lambda * (p_ser * econ.r_s + p_cat * econ.r_f) - econ.c * e_q;
    PerformanceReport { p_ser, p_cat, e_q, social_rate, source: MeasureSource::CtmcOracle }
}
