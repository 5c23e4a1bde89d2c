//! Seeded discrete-event simulation of the physical system: Poisson
//! arrivals, exponential services, catastrophes that flush every customer
//! and take the server down, exponential repairs (during which arrivals are
//! lost). Estimates all performance measures with replication-based
//! standard errors.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{EconParams, ModelParams, Strategy};

/// Generator driving every replication; recorded in reports so runs can be
/// reproduced. Replication `i` is seeded with `seed + i`.
pub const RNG_ALGORITHM: &str = "ChaCha12";

/// Minimum tagged observations required by [`estimate_individual_benefit`].
pub const MIN_TAGGED_SAMPLES: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub econ: EconParams,
    pub strategy: Strategy,
    /// Simulated time units per replication.
    pub horizon: f64,
    /// Initial stretch discarded from every statistic.
    pub warmup: f64,
    pub seed: u64,
    pub replications: u32,
}

impl SimConfig {
    /// Default warmup: a hundred mean repair times, plenty of catastrophe
    /// cycles to forget the empty initial state.
    pub fn default_warmup(params: &ModelParams) -> f64 {
        100.0 / params.eta
    }

    fn validate(&self) -> Result<(), SimError> {
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(SimError::InvalidHorizon(self.horizon));
        }
        if !self.warmup.is_finite() || self.warmup < 0.0 || self.warmup >= self.horizon {
            return Err(SimError::DegenerateWarmup { warmup: self.warmup, horizon: self.horizon });
        }
        if self.replications == 0 {
            return Err(SimError::NoReplications);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SimError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("warmup must lie in [0, horizon), got {warmup} against horizon {horizon}")]
    DegenerateWarmup { warmup: f64, horizon: f64 },
    #[error("at least one replication is required")]
    NoReplications,
    #[error("only {observed} departed joiners saw level {level}, need at least {required}")]
    InsufficientSamples { level: u32, observed: u64, required: u64 },
}

/// Point estimate with the standard error of the replication mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

/// Event tallies over the measured window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimCounts {
    pub arrivals: u64,
    pub joins: u64,
    pub balks: u64,
    /// Arrivals during a repair; they are lost.
    pub blocked: u64,
    pub services: u64,
    /// Customers flushed by catastrophes.
    pub flushed: u64,
    /// Catastrophe events.
    pub catastrophes: u64,
    /// Joiners still in the system when the horizon was reached; they
    /// contribute accrued waiting cost but no reward.
    pub censored: u64,
}

/// Measurements of a single replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub e_q: f64,
    pub downtime_fraction: f64,
    pub social_rate: f64,
    /// Fraction of departed joiners that left through service.
    pub p_ser: f64,
    /// Fraction of departed joiners flushed by a catastrophe.
    pub p_cat: f64,
    /// Mean realized net benefit of joiners that both joined in the window
    /// and departed before the horizon.
    pub mean_net_benefit: f64,
    pub counts: SimCounts,
    /// Post-warmup time spent operative with exactly `k` customers.
    pub level_time: Vec<f64>,
    /// Queue lengths seen by arrivals that found the server operative.
    pub arrival_seen: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub p_ser: Estimate,
    pub p_cat: Estimate,
    pub e_q: Estimate,
    pub social_rate: Estimate,
    pub downtime_fraction: Estimate,
    /// Mean of the per-replication joiner benefits.
    pub mean_net_benefit_per_joiner: f64,
    /// Totals across replications.
    pub counts: SimCounts,
    pub rng_algorithm: &'static str,
    pub replications: Vec<ReplicationStats>,
}

/// Runs every replication (in parallel, aggregation order is fixed by the
/// replication index) and reports replication-level means and standard
/// errors. Identical configurations produce identical reports.
pub fn simulate(config: &SimConfig) -> Result<SimReport, SimError> {
    config.validate()?;
    let outputs: Vec<ReplicationOutput> = (0..config.replications)
        .into_par_iter()
        .map(|index| run_replication(config, index, false))
        .collect();
    Ok(aggregate(outputs))
}

/// Average realized net benefit of joiners that saw exactly `n_seen`
/// customers on arrival, pooled across replications.
pub fn estimate_individual_benefit(config: &SimConfig, n_seen: u32) -> Result<Estimate, SimError> {
    config.validate()?;
    let outputs: Vec<ReplicationOutput> = (0..config.replications)
        .into_par_iter()
        .map(|index| run_replication(config, index, true))
        .collect();
    let mut merged = BenefitTally::default();
    for output in &outputs {
        if let Some(tally) = output.benefit_by_level.get(n_seen as usize) {
            merged.count += tally.count;
            merged.sum += tally.sum;
            merged.sum_sq += tally.sum_sq;
        }
    }
    if merged.count < MIN_TAGGED_SAMPLES {
        return Err(SimError::InsufficientSamples {
            level: n_seen,
            observed: merged.count,
            required: MIN_TAGGED_SAMPLES,
        });
    }
    let n = merged.count as f64;
    let mean = merged.sum / n;
    let var = ((merged.sum_sq - merged.sum * merged.sum / n) / (n - 1.0)).max(0.0);
    Ok(Estimate { mean, se: (var / n).sqrt() })
}

#[derive(Debug, Clone, Copy, Default)]
struct BenefitTally {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

struct ReplicationOutput {
    stats: ReplicationStats,
    benefit_by_level: Vec<BenefitTally>,
}

#[derive(Debug, Clone, Copy)]
struct Joiner {
    joined_at: f64,
    level_seen: u32,
}

fn run_replication(config: &SimConfig, index: u32, tag: bool) -> ReplicationOutput {
    let p = &config.params;
    let econ = &config.econ;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed.wrapping_add(u64::from(index)));
    let window = config.horizon - config.warmup;

    let mut now = 0.0_f64;
    let mut operative = true;
    let mut queue: VecDeque<Joiner> = VecDeque::new();

    let mut counts = SimCounts::default();
    let mut area_q = 0.0; // time integral of the queue length over the window
    let mut downtime = 0.0;
    let mut rewards = 0.0; // rewards credited inside the window
    let mut benefit_sum = 0.0;
    let mut benefit_count = 0u64;
    let mut level_time: Vec<f64> = Vec::new();
    let mut arrival_seen: Vec<u64> = Vec::new();
    let mut benefit_by_level: Vec<BenefitTally> = Vec::new();

    let settle = |joiner: Joiner,
                      departed_at: f64,
                      reward: f64,
                      benefit_sum: &mut f64,
                      benefit_count: &mut u64,
                      benefit_by_level: &mut Vec<BenefitTally>| {
        if joiner.joined_at < config.warmup {
            return;
        }
        let benefit = reward - econ.c * (departed_at - joiner.joined_at);
        *benefit_sum += benefit;
        *benefit_count += 1;
        if tag {
            let level = joiner.level_seen as usize;
            if benefit_by_level.len() <= level {
                benefit_by_level.resize(level + 1, BenefitTally::default());
            }
            let tally = &mut benefit_by_level[level];
            tally.count += 1;
            tally.sum += benefit;
            tally.sum_sq += benefit * benefit;
        }
    };

    loop {
        let q_len = queue.len();
        let mut total_rate = p.lambda;
        if operative {
            total_rate += p.xi;
            if q_len > 0 {
                total_rate += p.mu;
            }
        } else {
            total_rate += p.eta;
        }

        let step: f64 = rng.sample::<f64, _>(Exp1) / total_rate;
        let next = now + step;
        let segment_end = next.min(config.horizon);
        // occupancy over [now, segment_end] clipped to the window
        let lo = now.max(config.warmup);
        let hi = segment_end.min(config.horizon);
        if hi > lo {
            let span = hi - lo;
            area_q += q_len as f64 * span;
            if operative {
                if level_time.len() <= q_len {
                    level_time.resize(q_len + 1, 0.0);
                }
                level_time[q_len] += span;
            } else {
                downtime += span;
            }
        }
        if next >= config.horizon {
            break;
        }
        now = next;
        let in_window = now >= config.warmup;

        let draw: f64 = rng.gen::<f64>() * total_rate;
        if draw < p.lambda {
            // arrival
            if in_window {
                counts.arrivals += 1;
            }
            if !operative {
                if in_window {
                    counts.blocked += 1;
                }
            } else {
                let seen = q_len as u32;
                if in_window {
                    if arrival_seen.len() <= q_len {
                        arrival_seen.resize(q_len + 1, 0);
                    }
                    arrival_seen[q_len] += 1;
                }
                let joins = match &config.strategy {
                    Strategy::Threshold(t) => t.join_probability(seen) == 1.0,
                    Strategy::Mixed(m) => rng.gen::<f64>() < m.probability(),
                };
                if joins {
                    if in_window {
                        counts.joins += 1;
                    }
                    queue.push_back(Joiner { joined_at: now, level_seen: seen });
                } else if in_window {
                    counts.balks += 1;
                }
            }
        } else if operative && draw < p.lambda + p.xi {
            // catastrophe: every customer is flushed with compensation and
            // the server goes down
            if in_window {
                counts.catastrophes += 1;
            }
            while let Some(joiner) = queue.pop_front() {
                if in_window {
                    counts.flushed += 1;
                    rewards += econ.r_f;
                }
                settle(joiner, now, econ.r_f, &mut benefit_sum, &mut benefit_count, &mut benefit_by_level);
            }
            operative = false;
            debug_assert!(queue.is_empty(), "flush must empty the system");
        } else if operative {
            // service completion
            let joiner = queue.pop_front().expect("service fired with an empty queue");
            if in_window {
                counts.services += 1;
                rewards += econ.r_s;
            }
            settle(joiner, now, econ.r_s, &mut benefit_sum, &mut benefit_count, &mut benefit_by_level);
        } else {
            // repair completes
            operative = true;
        }
    }

    counts.censored = queue.len() as u64;
    let departures = counts.services + counts.flushed;
    let (p_ser, p_cat) = if departures > 0 {
        (counts.services as f64 / departures as f64, counts.flushed as f64 / departures as f64)
    } else {
        (0.0, 0.0)
    };
    let stats = ReplicationStats {
        e_q: area_q / window,
        downtime_fraction: downtime / window,
        social_rate: (rewards - econ.c * area_q) / window,
        p_ser,
        p_cat,
        mean_net_benefit: if benefit_count > 0 { benefit_sum / benefit_count as f64 } else { 0.0 },
        counts,
        level_time,
        arrival_seen,
    };
    ReplicationOutput { stats, benefit_by_level }
}

fn aggregate(outputs: Vec<ReplicationOutput>) -> SimReport {
    let reps: Vec<ReplicationStats> = outputs.into_iter().map(|o| o.stats).collect();
    let estimate = |extract: fn(&ReplicationStats) -> f64| -> Estimate {
        let n = reps.len() as f64;
        let mean = reps.iter().map(|r| extract(r)).sum::<f64>() / n;
        let se = if reps.len() > 1 {
            let var =
                reps.iter().map(|r| (extract(r) - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Estimate { mean, se }
    };
    let mut counts = SimCounts::default();
    for r in &reps {
        counts.arrivals += r.counts.arrivals;
        counts.joins += r.counts.joins;
        counts.balks += r.counts.balks;
        counts.blocked += r.counts.blocked;
        counts.services += r.counts.services;
        counts.flushed += r.counts.flushed;
        counts.catastrophes += r.counts.catastrophes;
        counts.censored += r.counts.censored;
    }
    SimReport {
        p_ser: estimate(|r| r.p_ser),
        p_cat: estimate(|r| r.p_cat),
        e_q: estimate(|r| r.e_q),
        social_rate: estimate(|r| r.social_rate),
        downtime_fraction: estimate(|r| r.downtime_fraction),
        mean_net_benefit_per_joiner: reps.iter().map(|r| r.mean_net_benefit).sum::<f64>()
            / reps.len() as f64,
        counts,
        rng_algorithm: RNG_ALGORITHM,
        replications: reps,
    }
}
