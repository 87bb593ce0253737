//! Normal approximations of the stationary measures, and the staffing rule
//! built on top of them.
//!
//! Each piece of the chain is approximated through the normal
//! approximation of its Poisson-like weights.  With `R = λ/μ`,
//! `c = (s − R)/√R` and the continuity correction `Δ = 1/(2√R)`, the
//! server-pool piece becomes `h̃ = √R / h(−c−Δ)`.  A reneging stage with
//! base rate ν, patience θ and capacity n is described on the `θ` scale by
//!
//! ```text
//! R_i = λ/θ,   s_i = ν/θ,   s_i⁺ = s_i + n,
//! c_i = (s_i − R_i)/√R_i,   c_i⁺ = (s_i⁺ − R_i)/√R_i,   Δ_i = 1/(2√R_i),
//! r̃_i = exp(−((c_i⁺+Δ_i)² − (c_i+Δ_i)²)/2)
//! h̃_i = √R_i · (Φ(c_i⁺+Δ_i) − Φ(c_i+Δ_i)) / φ(c_i+Δ_i)
//! ```
//!
//! The h̃_i form above is what this module evaluates.  It is algebraically
//! identical to the difference of two Mills ratios,
//! `√R_i (1/h(c_i+Δ_i) − r̃_i/h(c_i⁺+Δ_i))`, but that shape subtracts two
//! nearly equal numbers whenever the stage sits deep in a tail and can lose
//! *all* significant digits (at c ≈ −9 the two terms agree to eighteen
//! digits); the cdf-difference form divides two well-separated quantities
//! instead and stays accurate everywhere.  The cdf difference itself is
//! computed by [`crate::numerics::normal_cdf_diff`], which never cancels.
//!
//! The measures then assemble exactly like the exact route
//! ([`crate::exact::measures_from_summary`]), with `h̃, h̃₁, h̃₂, r̃₁, r̃₂`
//! in place of the exact sums.

use crate::exact::{measures_from_summary, Measures, Route, SubchainSummary};
use crate::model::{Capacity, ModelParams, ThreeStageParams};
use crate::numerics::{
    ln_normal_cdf_diff, normal_cdf_diff, std_normal_hazard, std_normal_pdf, LN_SQRT_2PI,
};
use std::fmt;

/// Errors from the staffing rule.
#[derive(Debug, Clone, PartialEq)]
pub enum ApproxError {
    /// The rule sizes a buffer that drains a backlog; it needs λ > sμ.
    NotHeavyTraffic { lambda: f64, s_mu: f64 },
    /// The quality target z must be strictly positive.
    NonPositiveZ { z: f64 },
    /// No patience rate can meet the target when the first stage holds no
    /// customers (n1 = 0 leaves nothing for θ₁ to act on).
    NoFeasibleTheta,
}

impl fmt::Display for ApproxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxError::NotHeavyTraffic { lambda, s_mu } => {
                write!(f, "capacity rule requires heavy traffic (lambda > s*mu), got lambda = {lambda}, s*mu = {s_mu}")
            }
            ApproxError::NonPositiveZ { z } => {
                write!(f, "quality target z must be positive, got {z}")
            }
            ApproxError::NoFeasibleTheta => {
                write!(f, "no theta1 can meet the target with n1 = 0")
            }
        }
    }
}

impl std::error::Error for ApproxError {}

/// The normal-scale parameters of every piece, all on one struct so the
/// scaling identities between stages can be stated and checked.
///
/// Between consecutive scales: `c1 = √(μ/θ₁)·c`, `Δ1 = √(θ₁/μ)·Δ`,
/// `c2 = √(θ₁/θ₂)·c1⁺`, `Δ2 = √(θ₂/θ₁)·Δ1`.  Infinite capacities push the
/// corresponding `s⁺`/`c⁺` (and, for `n1 = ∞`, the whole second stage)
/// to +∞; nothing is rounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams {
    /// R = λ/μ and its slot count s on the server-pool scale.
    pub r: f64,
    pub c: f64,
    pub delta: f64,
    /// First stage: R₁ = λ/θ₁, s₁ = sμ/θ₁, s₁⁺ = s₁ + n1.
    pub r1: f64,
    pub s1: f64,
    pub s1_plus: f64,
    pub c1: f64,
    pub c1_plus: f64,
    pub delta1: f64,
    /// Second stage: R₂ = λ/θ₂, s₂ = (sμ + n1θ₁)/θ₂, s₂⁺ = s₂ + n2.
    pub r2: f64,
    pub s2: f64,
    pub s2_plus: f64,
    pub c2: f64,
    pub c2_plus: f64,
    pub delta2: f64,
}

/// Normal-scale parameters of the model's three pieces.
pub fn normal_params(params: &ModelParams) -> NormalParams {
    let lambda = params.lambda;
    let s_mu = f64::from(params.s) * params.mu;

    let r = lambda / params.mu;
    let sqrt_r = r.sqrt();
    let c = (f64::from(params.s) - r) / sqrt_r;
    let delta = 0.5 / sqrt_r;

    let r1 = lambda / params.theta1;
    let sqrt_r1 = r1.sqrt();
    let s1 = s_mu / params.theta1;
    let s1_plus = s1 + params.n1.as_f64();
    let c1 = (s1 - r1) / sqrt_r1;
    let c1_plus = (s1_plus - r1) / sqrt_r1;
    let delta1 = 0.5 / sqrt_r1;

    let r2 = lambda / params.theta2;
    let sqrt_r2 = r2.sqrt();
    // ν₂ = sμ + n1θ₁; with n1 = ∞ the second stage sits at +∞ and is
    // never reached (its weight r̃₁ is 0).
    let s2 = (s_mu + params.n1.as_f64() * params.theta1) / params.theta2;
    let s2_plus = s2 + params.n2.as_f64();
    let c2 = (s2 - r2) / sqrt_r2;
    let c2_plus = (s2_plus - r2) / sqrt_r2;
    let delta2 = 0.5 / sqrt_r2;

    NormalParams {
        r,
        c,
        delta,
        r1,
        s1,
        s1_plus,
        c1,
        c1_plus,
        delta1,
        r2,
        s2,
        s2_plus,
        c2,
        c2_plus,
        delta2,
    }
}

/// ln φ(x) with the same hi/lo split as the pdf itself.
fn ln_std_normal_pdf(x: f64) -> f64 {
    let hi = f64::from_bits(x.to_bits() & 0xFFFF_FFFF_F800_0000);
    let lo = x - hi;
    -(0.5 * hi * hi + 0.5 * (2.0 * hi + lo) * lo) - LN_SQRT_2PI
}

/// One stage factor pair (h̃_i, r̃_i) from the stage's normal scale.
///
/// `a = c_i + Δ_i`, `b = c_i⁺ + Δ_i` (`+∞` for an infinite stage).
fn stage_factors(sqrt_r: f64, a: f64, b: f64, n: Capacity) -> (f64, f64) {
    match n {
        Capacity::Finite(0) => (0.0, 1.0),
        Capacity::Infinite => (sqrt_r / std_normal_hazard(a), 0.0),
        Capacity::Finite(_) => {
            // r̃ = exp(−(b²−a²)/2), with the exponent factored to avoid
            // squaring large arguments.
            let r_tilde = (-0.5 * (b - a) * (b + a)).exp();
            let pdf_a = std_normal_pdf(a);
            let diff = normal_cdf_diff(a, b);
            let h_tilde = if pdf_a >= 1e-300 && diff >= 1e-300 {
                sqrt_r * diff / pdf_a
            } else {
                // One of the factors underflowed; their ratio usually has
                // not.  Reassemble it in log space.
                sqrt_r * (ln_normal_cdf_diff(a, b) - ln_std_normal_pdf(a)).exp()
            };
            (h_tilde, r_tilde)
        }
    }
}

/// Approximate per-piece summaries of the model, mirroring
/// [`crate::exact::exact_subchain_summary`].
pub fn approx_subchain_summary(params: &ModelParams) -> SubchainSummary {
    let np = normal_params(params);
    let h = np.r.sqrt() / std_normal_hazard(-np.c - np.delta);
    let (h1, r1) = stage_factors(
        np.r1.sqrt(),
        np.c1 + np.delta1,
        np.c1_plus + np.delta1,
        params.n1,
    );
    let (h2, r2) = match params.n1 {
        Capacity::Infinite => (0.0, 1.0),
        Capacity::Finite(_) => stage_factors(
            np.r2.sqrt(),
            np.c2 + np.delta2,
            np.c2_plus + np.delta2,
            params.n2,
        ),
    };
    SubchainSummary {
        route: Route::Approx,
        inv_pi_s0: h,
        h1,
        h2,
        r1,
        r2,
        p: params.p_coefficient(),
    }
}

/// Approximate stationary measures of the model.
pub fn approx_measures(params: &ModelParams) -> Measures {
    let sc = approx_subchain_summary(params);
    measures_from_summary(params, &sc)
}

/// The approximate summaries of the three-stage extension: the two-stage
/// factors plus (h̃₃, r̃₃) for the third segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeStageSummary {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub p: f64,
}

/// Per-piece factors for the three-stage model.
pub fn approx_three_stage_summary(t: &ThreeStageParams) -> ThreeStageSummary {
    let lambda = t.lambda;
    let s_mu = f64::from(t.s) * t.mu;

    let r = lambda / t.mu;
    let sqrt_r = r.sqrt();
    let c = (f64::from(t.s) - r) / sqrt_r;
    let delta = 0.5 / sqrt_r;
    let h = sqrt_r / std_normal_hazard(-c - delta);

    // Stage i lives on the θ_i scale with base rate ν_i: the total
    // departure rate where the stage begins.
    let stage = |nu: f64, theta: f64, n: Capacity| {
        let ri = lambda / theta;
        let sqrt_ri = ri.sqrt();
        let si = nu / theta;
        let ci = (si - ri) / sqrt_ri;
        let ci_plus = (si + n.as_f64() - ri) / sqrt_ri;
        let di = 0.5 / sqrt_ri;
        stage_factors(sqrt_ri, ci + di, ci_plus + di, n)
    };

    let (h1, r1) = stage(s_mu, t.theta1, t.n1);
    let (h2, r2) = if t.n1.is_infinite() {
        (0.0, 1.0)
    } else {
        stage(s_mu + t.n1.as_f64() * t.theta1, t.theta2, t.n2)
    };
    let (h3, r3) = if t.n1.is_infinite() || t.n2.is_infinite() {
        (0.0, 1.0)
    } else {
        stage(
            s_mu + t.n1.as_f64() * t.theta1 + t.n2.as_f64() * t.theta2,
            t.theta3,
            t.n3,
        )
    };

    ThreeStageSummary {
        h,
        h1,
        h2,
        h3,
        r1,
        r2,
        r3,
        p: t.p_coefficient(),
    }
}

/// Approximate measures of the three-stage model.  With `n3 = 0` this
/// reproduces [`approx_measures`] on the embedded two-stage model exactly
/// (the third-stage terms vanish identically, not just approximately).
pub fn approx_measures_three_stage(t: &ThreeStageParams) -> Measures {
    let sc = approx_three_stage_summary(t);
    let q = sc.h1 + sc.r1 * (sc.h2 + sc.r2 * sc.h3);
    let denom = sc.h + q;
    let pi_s = 1.0 / denom;
    let p_q = (1.0 + q) / denom;
    let p_a = (sc.p * q + 1.0) / denom;

    let load1 = t.lambda / t.theta1;
    let mut num = load1 * (sc.p * sc.h1 + 1.0 - sc.r1);
    if sc.r1 > 0.0 {
        let n1 = t.n1.as_f64();
        let load2 = t.lambda / t.theta2;
        num += sc.r1 * load2 * ((sc.p + n1 / load2 - n1 / load1) * sc.h2 + 1.0 - sc.r2);
        if sc.r2 > 0.0 {
            let n2 = t.n2.as_f64();
            let load3 = t.lambda / t.theta3;
            num += sc.r1
                * sc.r2
                * load3
                * ((sc.p + (n1 + n2) / load3 - n1 / load1 - n2 / load2) * sc.h3 + 1.0 - sc.r3);
        }
    }
    let l = num / denom;

    let pi_block = if sc.r1 > 0.0 && sc.r2 > 0.0 {
        pi_s * sc.r1 * sc.r2 * sc.r3
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

/// Independent single-stage abandonment evaluation (one patience rate θ,
/// unbounded queue): `π_s = 1/(h̃ + h̃_a)`, `P_Q = (1 + h̃_a)π_s`,
/// `P_A = (p h̃_a + 1)π_s`, `L = (λ/θ)(p h̃_a + 1)π_s` with
/// `h̃_a = √(λ/θ)/h(c_a + Δ_a)` on the θ scale.
///
/// This is the reduction target for `θ₁ = θ₂` with `n2 = ∞`; it is written
/// out directly, not routed through the staged code, so the two can check
/// each other.
pub fn single_stage_approx_measures(
    lambda: f64,
    mu: f64,
    s: u32,
    theta: f64,
) -> Result<Measures, crate::model::ModelError> {
    // Validation only; the arithmetic below is standalone.
    let params = ModelParams::new(
        lambda,
        mu,
        s,
        Capacity::Finite(0),
        Capacity::Infinite,
        theta,
        theta,
    )?;

    let r = lambda / mu;
    let sqrt_r = r.sqrt();
    let c = (f64::from(s) - r) / sqrt_r;
    let h = sqrt_r / std_normal_hazard(-c - 0.5 / sqrt_r);

    let ra = lambda / theta;
    let sqrt_ra = ra.sqrt();
    let ca = (f64::from(s) * mu / theta - ra) / sqrt_ra;
    let ha = sqrt_ra / std_normal_hazard(ca + 0.5 / sqrt_ra);

    let p = params.p_coefficient();
    let pi_s = 1.0 / (h + ha);
    Ok(Measures {
        pi_s,
        p_q: (1.0 + ha) * pi_s,
        p_a: (p * ha + 1.0) * pi_s,
        l: ra * (p * ha + 1.0) * pi_s,
        pi_block: 0.0,
    })
}

/// Asymptotic delay probability for the single-stage abandonment queue in
/// the square-root staffing regime `s = R + c√R`:
/// `P_Q → [1 + h(c√(μ/θ)) / (√(μ/θ) h(−c))]⁻¹` as R → ∞.
pub fn garnett_asymptotic_pq(c: f64, mu: f64, theta: f64) -> f64 {
    let scale = (mu / theta).sqrt();
    1.0 / (1.0 + std_normal_hazard(c * scale) / (scale * std_normal_hazard(-c)))
}

/// Smallest first-stage capacity n1 that meets the square-root quality
/// target `c₁⁺ = (sμ + n1θ₁ − λ)/√(λθ₁) ≥ z` in heavy traffic:
/// `n1 = ⌈(z√(λθ₁) + λ − sμ)/θ₁⌉` (the division is padded by 1e−9 before
/// the ceiling so an exactly-integral bound is not pushed one up).
pub fn capacity_rule_n1(
    lambda: f64,
    mu: f64,
    s: u32,
    theta1: f64,
    z: f64,
) -> Result<u32, ApproxError> {
    let s_mu = f64::from(s) * mu;
    if !(z > 0.0) {
        return Err(ApproxError::NonPositiveZ { z });
    }
    if lambda <= s_mu {
        return Err(ApproxError::NotHeavyTraffic { lambda, s_mu });
    }
    let bound = (z * (lambda * theta1).sqrt() + lambda - s_mu) / theta1;
    Ok((bound - 1e-9).ceil().max(0.0) as u32)
}

/// Smallest first-stage patience rate θ₁ that meets the same target for a
/// given n1: the larger root of `n1²x² − (2n1(λ−sμ) + z²λ)x + (λ−sμ)² = 0`
/// (the smaller root solves the mirrored equation `n1θ₁ − (λ−sμ) < 0` and
/// does not satisfy the original inequality).
pub fn capacity_rule_theta1(
    lambda: f64,
    mu: f64,
    s: u32,
    n1: u32,
    z: f64,
) -> Result<f64, ApproxError> {
    let s_mu = f64::from(s) * mu;
    if !(z > 0.0) {
        return Err(ApproxError::NonPositiveZ { z });
    }
    if lambda <= s_mu {
        return Err(ApproxError::NotHeavyTraffic { lambda, s_mu });
    }
    if n1 == 0 {
        return Err(ApproxError::NoFeasibleTheta);
    }
    let n = f64::from(n1);
    let d = lambda - s_mu;
    let b = 2.0 * n * d + z * z * lambda;
    // Discriminant b² − 4n²d² = z²λ(4nd + z²λ) > 0 in heavy traffic.
    let disc = z * z * lambda * (4.0 * n * d + z * z * lambda);
    Ok((b + disc.sqrt()) / (2.0 * n * n))
}
