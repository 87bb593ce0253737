//! Exact stationary analysis of the two-stage reneging queue.
//!
//! The birth–death chain splits at the state `s` (all servers busy, empty
//! queue) into three geometric-like pieces, and every measure reduces to
//! three scalar summaries, one per piece:
//!
//! ```text
//! 1/π_s⁰ = Σ_{k=0}^{s}  (R^k/k!) / (R^s/s!)              R  = λ/μ
//! h₁     = Σ_{k=1}^{n1} Π_{j=1}^{k} λ/(sμ + jθ₁)
//! r₁     =              Π_{j=1}^{n1} λ/(sμ + jθ₁)
//! h₂     = Σ_{k=1}^{n2} Π_{j=1}^{k} λ/(ν₂ + jθ₂)         ν₂ = sμ + n1θ₁
//! r₂     =              Π_{j=1}^{n2} λ/(ν₂ + jθ₂)
//! ```
//!
//! With `p = 1 − sμ/λ` the stationary measures are
//!
//! ```text
//! 1/π_s = 1/π_s⁰ + h₁ + r₁h₂
//! P_Q   = π_s (1 + h₁ + r₁h₂)
//! P_A   = π_s (p (h₁ + r₁h₂) + 1)
//! L     = π_s [ (λ/θ₁)(p h₁ + 1 − r₁)
//!             + r₁ (λ/θ₂)((p + n1/(λ/θ₂) − n1/(λ/θ₁)) h₂ + 1 − r₂) ]
//! ```
//!
//! An infinite segment capacity turns the corresponding sum into the
//! closed-form integral of [`crate::numerics::reneging_tail_integral`] and
//! its `r` factor into 0.  The same assembly serves the approximate route,
//! which swaps in normal-approximation summaries of the identical shape.

use crate::model::{Capacity, ModelParams};
use crate::numerics::reneging_tail_integral;
use std::fmt;

/// Which computational route produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Exact,
    Approx,
    OracleLinear,
    OracleSim,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Route::Exact => "exact",
            Route::Approx => "approx",
            Route::OracleLinear => "oracle-linear",
            Route::OracleSim => "oracle-sim",
        };
        write!(f, "{name}")
    }
}

/// The per-piece summaries the measures are assembled from.
///
/// For the exact route the fields hold the sums above.  The approximate
/// route reuses the struct with its normal-approximation counterparts
/// (h̃, h̃₁, h̃₂, r̃₁, r̃₂); the assembly in [`measures_from_summary`] is
/// identical either way.
///
/// Invariants: `inv_pi_s0 ≥ 1`, `h1, h2 ≥ 0`, `r1, r2 ≥ 0` with `r = 0`
/// exactly for an infinite segment and `r = 1` for an empty one.  The `r`
/// factors exceed 1 whenever the segment's arrival rate outruns its
/// service-plus-abandonment rates (heavy traffic), so no upper bound holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubchainSummary {
    pub route: Route,
    /// 1/π_s⁰ (exact) or h̃ (approximate): the server-pool piece.
    pub inv_pi_s0: f64,
    /// First-stage sum h₁ or h̃₁.
    pub h1: f64,
    /// Second-stage sum h₂ or h̃₂.
    pub h2: f64,
    /// First-stage boundary ratio r₁ = π¹_{s+n1}/π¹_s (or r̃₁).
    pub r1: f64,
    /// Second-stage boundary ratio r₂ = π²_{s+n1+n2}/π²_{s+n1} (or r̃₂).
    pub r2: f64,
    /// p = 1 − sμ/λ.
    pub p: f64,
}

/// The four stationary performance measures, plus the blocking atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    /// Probability of exactly `s` customers (all servers busy, none waiting).
    pub pi_s: f64,
    /// Delay probability: an arrival finds every server busy.
    pub p_q: f64,
    /// Abandonment probability, blocking included.
    pub p_a: f64,
    /// Mean queue length.
    pub l: f64,
    /// Probability of a full station, π_s·r₁·r₂ (0 with infinite capacity).
    pub pi_block: f64,
}

/// Errors from the corollary conversions.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactError {
    /// The mean-queue-length shortcut only holds for a uniform patience
    /// rate; with θ₁ ≠ θ₂ the full assembly must be used.
    ThetaMismatch { theta1: f64, theta2: f64 },
}

impl fmt::Display for ExactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactError::ThetaMismatch { theta1, theta2 } => write!(
                f,
                "queue-length shortcut requires theta1 == theta2, got {theta1} and {theta2}"
            ),
        }
    }
}

impl std::error::Error for ExactError {}

/// One reneging-stage pair (h, r) for a segment of capacity `n` with
/// base rate ν and abandonment rate θ:
/// h = Σ_{k=1}^{n} Π_{j=1}^{k} λ/(ν+jθ) and r = the full product.
fn stage_sums(nu: f64, theta: f64, lambda: f64, n: Capacity) -> (f64, f64) {
    match n {
        Capacity::Finite(0) => (0.0, 1.0),
        Capacity::Finite(n) => {
            let mut h = 0.0_f64;
            let mut t = 1.0_f64;
            for j in 1..=u64::from(n) {
                t *= lambda / (nu + j as f64 * theta);
                h += t;
            }
            (h, t)
        }
        Capacity::Infinite => {
            // Σ_{k≥0} Π = (ν/θ)∫₀¹ e^{λt/θ}(1−t)^{ν/θ−1} dt; subtract the
            // k = 0 term.  The boundary ratio r vanishes: the product
            // λ/(ν+jθ) → 0 as j grows.
            let total = reneging_tail_integral(nu, theta, lambda)
                .expect("ModelParams guarantees positive rates");
            (total - 1.0, 0.0)
        }
    }
}

/// Exact per-piece summaries for the model.
pub fn exact_subchain_summary(params: &ModelParams) -> SubchainSummary {
    let r = params.offered_load();
    let s = f64::from(params.s);
    let s_mu = s * params.mu;

    // 1/π_s⁰ = Σ_{k=0}^{s} (R^k/k!)/(R^s/s!); running the index downward
    // from k = s makes each term a cumulative product of (s−i)/R factors.
    let mut inv_pi_s0 = 1.0_f64;
    let mut t = 1.0_f64;
    let mut k = s;
    while k >= 1.0 {
        t *= k / r;
        inv_pi_s0 += t;
        k -= 1.0;
    }

    let (h1, r1) = stage_sums(s_mu, params.theta1, params.lambda, params.n1);
    let (h2, r2) = match params.n1 {
        // n1 = ∞ forces n2 = 0; the second stage is unreachable and its
        // summary is the empty-segment one.
        Capacity::Infinite => (0.0, 1.0),
        Capacity::Finite(n1) => stage_sums(
            s_mu + f64::from(n1) * params.theta1,
            params.theta2,
            params.lambda,
            params.n2,
        ),
    };

    SubchainSummary {
        route: Route::Exact,
        inv_pi_s0,
        h1,
        h2,
        r1,
        r2,
        p: params.p_coefficient(),
    }
}

/// Assembles the four measures from per-piece summaries.  Shared by the
/// exact and approximate routes, which differ only in how the summaries
/// are produced.
pub fn measures_from_summary(params: &ModelParams, sc: &SubchainSummary) -> Measures {
    let q = sc.h1 + sc.r1 * sc.h2;
    let denom = sc.inv_pi_s0 + q;
    let pi_s = 1.0 / denom;
    let p_q = (1.0 + q) / denom;
    let p_a = (sc.p * q + 1.0) / denom;

    let load1 = params.lambda / params.theta1;
    let term1 = load1 * (sc.p * sc.h1 + 1.0 - sc.r1);
    // r₁ = 0 exactly when n1 = ∞, where the second-stage term is absent
    // (and n1/load would be ∞/finite); guard rather than multiply by 0.
    let term2 = if sc.r1 > 0.0 {
        let n1 = params.n1.as_f64();
        let load2 = params.lambda / params.theta2;
        sc.r1 * load2 * ((sc.p + n1 / load2 - n1 / load1) * sc.h2 + 1.0 - sc.r2)
    } else {
        0.0
    };
    let l = (term1 + term2) / denom;

    let pi_block = if sc.r1 > 0.0 {
        pi_s * sc.r1 * sc.r2
    } else {
        0.0
    };

    Measures {
        pi_s,
        p_q,
        p_a,
        l,
        pi_block,
    }
}

/// Exact stationary measures of the model.
pub fn exact_measures(params: &ModelParams) -> Measures {
    let sc = exact_subchain_summary(params);
    measures_from_summary(params, &sc)
}

/// Abandonment probability from the delay probability:
/// P_A = p(P_Q − π_s) + π_s with p = 1 − sμ/λ.
pub fn corollary_pa_from_pq(params: &ModelParams, pi_s: f64, p_q: f64) -> f64 {
    params.p_coefficient() * (p_q - pi_s) + pi_s
}

/// Mean queue length from the delay probability, valid only for a uniform
/// patience rate θ₁ = θ₂ = θ:  L = (λ/θ)(p(P_Q − π_s) + π_s − π_block).
pub fn corollary_l_from_pq(
    params: &ModelParams,
    pi_s: f64,
    p_q: f64,
    pi_block: f64,
) -> Result<f64, ExactError> {
    if params.theta1 != params.theta2 {
        return Err(ExactError::ThetaMismatch {
            theta1: params.theta1,
            theta2: params.theta2,
        });
    }
    let p = params.p_coefficient();
    Ok(params.lambda / params.theta1 * (p * (p_q - pi_s) + pi_s - pi_block))
}
