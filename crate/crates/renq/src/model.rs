//! Model definition for the M/M/s+M queue with staged reneging.
//!
//! Customers arrive Poisson(λ) at a station with `s` exponential(μ) servers.
//! A customer who cannot start service immediately waits in a FIFO queue with
//! at most `n1 + n2` waiting positions.  While a waiting customer occupies one
//! of the first `n1` queue positions it abandons at rate θ₁; once it moves
//! into the last `n2` positions (positions `n1+1 ..= n1+n2` counted from the
//! head) it abandons at rate θ₂.  Because patience is memoryless, the system
//! size `k` (in service + waiting) is a birth–death chain on
//! `0 ..= s + n1 + n2` with rates
//!
//! ```text
//! arrival(k)   = λ                                for k < s + n1 + n2
//! departure(k) = k μ                              for 1 ≤ k ≤ s
//!              = s μ + (k − s) θ₁                 for s < k ≤ s + n1
//!              = s μ + n1 θ₁ + (k − s − n1) θ₂    for s + n1 < k ≤ s + n1 + n2
//! ```
//!
//! Either queue segment may be infinite: `n2 = ∞` gives an unbounded
//! second stage, and `n1 = ∞` (which forces `n2 = 0`) gives a pure
//! single-stage abandonment queue.  Capacities are therefore carried as
//! [`Capacity`] values rather than plain integers.

use std::fmt;
use std::str::FromStr;

/// A queue-segment capacity: a non-negative integer or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Capacity {
    Finite(u32),
    Infinite,
}

impl Capacity {
    /// The capacity as a float, with `Infinite` mapping to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            Capacity::Finite(n) => f64::from(n),
            Capacity::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Capacity::Infinite)
    }

    pub fn is_zero(self) -> bool {
        self == Capacity::Finite(0)
    }

    /// The finite value, if there is one.
    pub fn finite(self) -> Option<u32> {
        match self {
            Capacity::Finite(n) => Some(n),
            Capacity::Infinite => None,
        }
    }
}

impl From<u32> for Capacity {
    fn from(n: u32) -> Self {
        Capacity::Finite(n)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(n) => write!(f, "{n}"),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Capacity {
    type Err = ModelError;

    /// Parses either a non-negative integer or one of `inf`, `infinity`, `∞`.
    fn from_str(text: &str) -> Result<Self, ModelError> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Capacity::Infinite);
        }
        t.parse::<u32>()
            .map(Capacity::Finite)
            .map_err(|_| ModelError::InvalidCapacity {
                text: text.to_string(),
            })
    }
}

/// Validation and domain errors for model construction and state queries.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// A rate parameter (λ, μ, θ₁, θ₂) must be strictly positive and finite.
    NonPositiveRate { name: &'static str, value: f64 },
    /// The server count `s` must be at least 1.
    InvalidServerCount,
    /// A capacity string other than a non-negative integer or `inf`.
    InvalidCapacity { text: String },
    /// `n1 = ∞` makes the second stage unreachable, so `n2` must be 0.
    InfiniteFirstStageWithSecond,
    /// The operation needs a finite state space but a capacity is infinite.
    CapacityNotFinite,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonPositiveRate { name, value } => {
                write!(f, "rate {name} must be positive and finite, got {value}")
            }
            ModelError::InvalidServerCount => write!(f, "server count s must be at least 1"),
            ModelError::InvalidCapacity { text } => {
                write!(f, "capacity must be a non-negative integer or `inf`, got `{text}`")
            }
            ModelError::InfiniteFirstStageWithSecond => {
                write!(f, "n1 = inf leaves the second stage unreachable; n2 must be 0")
            }
            ModelError::CapacityNotFinite => {
                write!(f, "operation requires finite capacities (n1, n2 < inf)")
            }
        }
    }
}

impl std::error::Error for ModelError {}

/// Transition rates out of one state of the birth–death chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRates {
    pub arrival: f64,
    pub departure: f64,
}

/// Parameters of the two-stage reneging queue.
///
/// Construct through [`ModelParams::new`], which enforces:
/// * λ, μ, θ₁, θ₂ strictly positive and finite,
/// * `s ≥ 1`,
/// * `n1 = ∞` only together with `n2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    pub s: u32,
    pub n1: Capacity,
    pub n2: Capacity,
    pub theta1: f64,
    pub theta2: f64,
}

fn check_rate(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonPositiveRate { name, value })
    }
}

impl ModelParams {
    pub fn new(
        lambda: f64,
        mu: f64,
        s: u32,
        n1: Capacity,
        n2: Capacity,
        theta1: f64,
        theta2: f64,
    ) -> Result<Self, ModelError> {
        check_rate("lambda", lambda)?;
        check_rate("mu", mu)?;
        check_rate("theta1", theta1)?;
        check_rate("theta2", theta2)?;
        if s == 0 {
            return Err(ModelError::InvalidServerCount);
        }
        if n1.is_infinite() && !n2.is_zero() {
            return Err(ModelError::InfiniteFirstStageWithSecond);
        }
        Ok(ModelParams {
            lambda,
            mu,
            s,
            n1,
            n2,
            theta1,
            theta2,
        })
    }

    /// Total number of customers the station can hold, `s + n1 + n2`.
    pub fn total_capacity(&self) -> Capacity {
        match (self.n1, self.n2) {
            (Capacity::Finite(a), Capacity::Finite(b)) => {
                Capacity::Finite(self.s + a + b)
            }
            _ => Capacity::Infinite,
        }
    }

    /// Offered load per server pool, R = λ/μ.
    pub fn offered_load(&self) -> f64 {
        self.lambda / self.mu
    }

    /// `p = 1 − sμ/λ`, the coefficient that converts queueing probability
    /// into abandonment probability.  Positive exactly in heavy traffic
    /// (λ > sμ).
    pub fn p_coefficient(&self) -> f64 {
        1.0 - f64::from(self.s) * self.mu / self.lambda
    }

    /// Birth and death rates out of state `k` of the finite chain.
    ///
    /// Requires both capacities finite (the chain must have a last state);
    /// returns [`ModelError::CapacityNotFinite`] otherwise.  States beyond
    /// the last one have zero rates in both directions.
    pub fn rates_at(&self, k: u64) -> Result<StateRates, ModelError> {
        let (n1, n2) = match (self.n1.finite(), self.n2.finite()) {
            (Some(a), Some(b)) => (u64::from(a), u64::from(b)),
            _ => return Err(ModelError::CapacityNotFinite),
        };
        let s = u64::from(self.s);
        let last = s + n1 + n2;
        let arrival = if k < last { self.lambda } else { 0.0 };
        let departure = self.departure_rate(k, s, n1, n2);
        Ok(StateRates { arrival, departure })
    }

    fn departure_rate(&self, k: u64, s: u64, n1: u64, n2: u64) -> f64 {
        if k == 0 || k > s + n1 + n2 {
            0.0
        } else if k <= s {
            k as f64 * self.mu
        } else if k <= s + n1 {
            s as f64 * self.mu + (k - s) as f64 * self.theta1
        } else {
            s as f64 * self.mu + n1 as f64 * self.theta1 + (k - s - n1) as f64 * self.theta2
        }
    }

    /// Death rate out of state `k` for a possibly infinite chain, used by
    /// the simulator where the state grows without truncation.
    pub(crate) fn departure_rate_unbounded(&self, k: u64) -> f64 {
        let s = u64::from(self.s);
        if k == 0 {
            return 0.0;
        }
        if k <= s {
            return k as f64 * self.mu;
        }
        let waiting = k - s;
        match self.n1 {
            Capacity::Infinite => s as f64 * self.mu + waiting as f64 * self.theta1,
            Capacity::Finite(n1) => {
                let n1 = u64::from(n1);
                if waiting <= n1 {
                    s as f64 * self.mu + waiting as f64 * self.theta1
                } else {
                    s as f64 * self.mu
                        + n1 as f64 * self.theta1
                        + (waiting - n1) as f64 * self.theta2
                }
            }
        }
    }
}

/// Parameters of the three-stage extension: a third waiting segment of
/// capacity `n3` with abandonment rate θ₃ behind the first two.
///
/// The same reachability rule applies down the line: an infinite segment
/// forces every later segment to be empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeStageParams {
    pub lambda: f64,
    pub mu: f64,
    pub s: u32,
    pub n1: Capacity,
    pub n2: Capacity,
    pub n3: Capacity,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl ThreeStageParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lambda: f64,
        mu: f64,
        s: u32,
        n1: Capacity,
        n2: Capacity,
        n3: Capacity,
        theta1: f64,
        theta2: f64,
        theta3: f64,
    ) -> Result<Self, ModelError> {
        check_rate("lambda", lambda)?;
        check_rate("mu", mu)?;
        check_rate("theta1", theta1)?;
        check_rate("theta2", theta2)?;
        check_rate("theta3", theta3)?;
        if s == 0 {
            return Err(ModelError::InvalidServerCount);
        }
        if n1.is_infinite() && !(n2.is_zero() && n3.is_zero()) {
            return Err(ModelError::InfiniteFirstStageWithSecond);
        }
        if n2.is_infinite() && !n3.is_zero() {
            return Err(ModelError::InfiniteFirstStageWithSecond);
        }
        Ok(ThreeStageParams {
            lambda,
            mu,
            s,
            n1,
            n2,
            n3,
            theta1,
            theta2,
            theta3,
        })
    }

    /// The two-stage model obtained by dropping the third segment
    /// (only valid when `n3 = 0`).
    pub fn truncate_to_two_stage(&self) -> Option<ModelParams> {
        if self.n3.is_zero() {
            ModelParams::new(
                self.lambda,
                self.mu,
                self.s,
                self.n1,
                self.n2,
                self.theta1,
                self.theta2,
            )
            .ok()
        } else {
            None
        }
    }

    pub fn total_capacity(&self) -> Capacity {
        match (self.n1, self.n2, self.n3) {
            (Capacity::Finite(a), Capacity::Finite(b), Capacity::Finite(c)) => {
                Capacity::Finite(self.s + a + b + c)
            }
            _ => Capacity::Infinite,
        }
    }

    pub fn p_coefficient(&self) -> f64 {
        1.0 - f64::from(self.s) * self.mu / self.lambda
    }

    /// Birth and death rates out of state `k`; requires all capacities
    /// finite, like [`ModelParams::rates_at`].
    pub fn rates_at(&self, k: u64) -> Result<StateRates, ModelError> {
        let (n1, n2, n3) = match (self.n1.finite(), self.n2.finite(), self.n3.finite()) {
            (Some(a), Some(b), Some(c)) => (u64::from(a), u64::from(b), u64::from(c)),
            _ => return Err(ModelError::CapacityNotFinite),
        };
        let s = u64::from(self.s);
        let last = s + n1 + n2 + n3;
        let arrival = if k < last { self.lambda } else { 0.0 };
        let departure = if k == 0 || k > last {
            0.0
        } else if k <= s {
            k as f64 * self.mu
        } else if k <= s + n1 {
            s as f64 * self.mu + (k - s) as f64 * self.theta1
        } else if k <= s + n1 + n2 {
            s as f64 * self.mu + n1 as f64 * self.theta1 + (k - s - n1) as f64 * self.theta2
        } else {
            s as f64 * self.mu
                + n1 as f64 * self.theta1
                + n2 as f64 * self.theta2
                + (k - s - n1 - n2) as f64 * self.theta3
        };
        Ok(StateRates { arrival, departure })
    }
}
