//! Performance measures for many-server queues with staged reneging.
//!
//! A single station with `s` exponential servers is offered Poisson(λ)
//! traffic.  Waiting customers abandon at rate θ₁ while they are within the
//! first `n1` queue positions and at rate θ₂ once they are deeper than that;
//! the queue holds at most `n1 + n2` customers (either segment may be
//! infinite).  Four stationary measures describe the system:
//!
//! * `π_s`  — probability that exactly all servers are busy and nobody waits,
//! * `P_Q`  — probability that an arrival has to wait (all servers busy),
//! * `P_A`  — probability that a customer abandons or is blocked,
//! * `L`    — mean queue length.
//!
//! The crate computes them along independent routes that check each other:
//!
//! * [`exact`] — closed-form stationary analysis of the birth–death chain,
//! * [`approx`] — normal (halfin–whitt style) approximations built from
//!   hazard-rate and cdf-difference factors, plus the capacity design rule,
//! * [`oracle`] — brute-force stationary solve of the same chain and a
//!   discrete-event simulator, used to validate the other two.
//!
//! [`model`] holds the parameter types and the chain's transition rates;
//! [`numerics`] the special functions everything else leans on.

pub mod approx;
pub mod exact;
pub mod model;
pub mod numerics;
pub mod oracle;

pub use approx::{ApproxError, NormalParams};
pub use exact::{Measures, Route, SubchainSummary};
pub use model::{Capacity, ModelError, ModelParams, StateRates, ThreeStageParams};
pub use oracle::{OracleError, SimEstimate, StationaryDistribution};
