//! Analytics for strategic joining in a single-server Markovian queue with
//! catastrophes and repairs.
//!
//! Customers arrive as a Poisson stream at a single exponential server.
//! Catastrophes strike as a second Poisson stream: each one flushes every
//! customer out of the system and puts the server into an exponential
//! repair, during which arrivals are lost. A served customer earns `r_s`, a
//! flushed one is compensated with `r_f`, and everyone pays `c` per time
//! unit spent inside. The crate computes what rational customers do with
//! this gamble and what a planner would prefer:
//!
//! - [`observable`]: customers see the queue length; dominant threshold
//!   strategies, the stationary law under a threshold, welfare rates, and
//!   the numeric search for the socially optimal threshold.
//! - [`unobservable`]: customers see nothing; mixed equilibria and the
//!   closed-form socially optimal joining probability.
//! - [`ctmc`]: an independent Markov-chain solver that re-derives every
//!   measure by direct linear algebra, used to cross-check the closed forms.
//! - [`sim`]: a seeded discrete-event simulation of the physical system.
//! - [`verify`]: the cross-check suite tying all of the above together over
//!   random parameter grids.

pub mod ctmc;
pub mod model;
pub mod observable;
pub mod sim;
pub mod unobservable;
pub mod verify;

pub use model::{
    classify_observable, classify_unobservable, validate, EconParams, MeasureSource,
    MixedStrategy, ModelParams, ObservableRegime, PerformanceReport, Strategy, ThresholdStrategy,
    UnobservableRegime, ValidationError,
};
