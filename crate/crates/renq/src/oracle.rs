//! Ground-truth routes that share no arithmetic with the closed forms:
//! a stationary-distribution solver for the finite birth-death chain and a
//! stochastic simulator.
//!
//! The solver builds the distribution from the detailed-balance recursion
//! `π_{k+1} = π_k · λ_k / μ_{k+1}` with periodic rescaling (the raw
//! weights can span thousands of decades), then — for chains of at most
//! [`DENSE_VERIFY_MAX_STATES`] states — re-derives it by a dense LU solve
//! of the generator's null space and demands the two agree.  The two
//! methods share nothing but the rate function, so agreement is a real
//! check, not an echo.
//!
//! The simulator runs the continuous-time chain event by event.  Waiting
//! customers renege at a rate set by their queue position (θ₁ within the
//! first `n1` waiting slots, θ₂ beyond), and because the patience clocks
//! are exponential and therefore memoryless, the aggregate reneging rate
//! in state `k` is exactly the chain's death rate: simulating the
//! one-dimensional state process is statistically identical to tracking
//! every customer's own clock.  Estimates come from independent
//! replications: replication `i` draws from ChaCha8 (rand_chacha's
//! `ChaCha8Rng`) seeded with the user seed and stream `i`, so results are
//! reproducible bit for bit on any platform and independent of how many
//! threads run the replications.  95% confidence half-widths use the
//! Student-t quantile on `replications − 1` degrees of freedom.

use crate::exact::Measures;
use crate::model::{Capacity, ModelParams, StateRates, ThreeStageParams};
use crate::numerics::CompensatedSum;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::fmt;

/// Hard cap on the state count of a solvable chain.
pub const MAX_STATES: u64 = 10_000_000;

/// Largest chain whose recursion solution is re-verified against a dense
/// null-space solve (an O(n³) check).
pub const DENSE_VERIFY_MAX_STATES: u64 = 5_000;

/// Sup-norm agreement demanded between the recursion and the dense solve.
/// LU forward error grows with the generator's conditioning, so this sits
/// well above machine precision while staying far below any tolerance the
/// distributions are consumed at.
const DENSE_VERIFY_TOL: f64 = 1e-8;

/// Errors from the solver and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// The chain has more states than [`MAX_STATES`].
    TooLarge { states: u64 },
    /// The chain is infinite; only finite chains can be solved.
    CapacityNotFinite,
    /// The recursion and the dense null-space solve disagreed beyond
    /// tolerance (∞ when the dense solve itself failed).  Indicates a
    /// defect, not a property of the input.
    MethodDisagreement { max_abs_gap: f64 },
    /// Simulation needs `horizon > warmup ≥ 0`, both finite.
    InvalidHorizon { warmup: f64, horizon: f64 },
    /// Confidence intervals need at least two replications.
    ZeroReplications { replications: u32 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooLarge { states } => {
                write!(f, "chain has {states} states, more than the {MAX_STATES} supported")
            }
            OracleError::CapacityNotFinite => {
                write!(f, "stationary solve requires finite capacities")
            }
            OracleError::MethodDisagreement { max_abs_gap } => {
                write!(
                    f,
                    "recursion and dense solve disagree (sup-norm gap {max_abs_gap:e}); this is a bug"
                )
            }
            OracleError::InvalidHorizon { warmup, horizon } => {
                write!(f, "need horizon > warmup >= 0, got warmup = {warmup}, horizon = {horizon}")
            }
            OracleError::ZeroReplications { replications } => {
                write!(f, "need at least 2 replications for a confidence interval, got {replications}")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Stationary distribution of a finite chain, with the parameters that
/// generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    /// `probs[k]` is the stationary probability of state k, 0..=s+n1+n2.
    pub probs: Vec<f64>,
    /// The model the chain was built from.
    pub params: ModelParams,
    /// Whether the dense null-space cross-check ran (it does whenever the
    /// chain has at most [`DENSE_VERIFY_MAX_STATES`] states).
    pub cross_checked: bool,
}

impl StationaryDistribution {
    /// Largest relative violation of detailed balance
    /// `π_k λ_k = π_{k+1} μ_{k+1}` over all adjacent pairs.
    ///
    /// Pairs where either probability is exactly zero are skipped: every
    /// state of these chains has positive stationary probability, so a
    /// stored zero only ever means the value sits below what an f64 can
    /// represent (< 1e−290 relative to the peak) and the pairwise
    /// comparison carries no information there.
    pub fn max_detailed_balance_violation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..self.probs.len().saturating_sub(1) {
            if self.probs[k] == 0.0 || self.probs[k + 1] == 0.0 {
                continue;
            }
            let up = self.params.rates_at(k as u64).expect("finite by construction");
            let down = self.params.rates_at(k as u64 + 1).expect("finite by construction");
            let flux_up = self.probs[k] * up.arrival;
            let flux_down = self.probs[k + 1] * down.departure;
            let scale = flux_up.max(flux_down);
            if scale > 0.0 {
                worst = worst.max((flux_up - flux_down).abs() / scale);
            }
        }
        worst
    }
}

/// Flush subnormal magnitudes to an exact zero.  Subnormals appear only
/// when a weight has fallen more than ~290 decades below the peak; they
/// carry few or no significant digits, contribute nothing to any measure,
/// and an exact zero is honest about both.
fn flush_subnormal(x: f64) -> f64 {
    if x.is_normal() || x == 0.0 {
        x
    } else {
        0.0
    }
}

/// Detailed-balance recursion over `n_states` birth-death states.  The
/// rate ratio λ_k/μ_{k+1} is non-increasing for every chain this crate
/// builds (death rates grow with k, birth rates do not), so the raw
/// weights rise to a single peak and then fall; the running weight is
/// rescaled whenever it tops 1e280 and weights that underflow to zero on
/// the way down stay zero.
fn birth_death_weights(n_states: usize, rate_at: &dyn Fn(u64) -> StateRates) -> Vec<f64> {
    let mut w = vec![0.0_f64; n_states];
    w[0] = 1.0;
    let mut t = 1.0_f64;
    let mut first_live = 0usize;
    for k in 1..n_states {
        let up = rate_at(k as u64 - 1).arrival;
        let down = rate_at(k as u64).departure;
        t = t * up / down;
        if t > 1e280 {
            for slot in &mut w[first_live..k] {
                *slot = flush_subnormal(*slot / t);
            }
            while first_live < k && w[first_live] == 0.0 {
                first_live += 1;
            }
            t = 1.0;
        }
        w[k] = t;
        if t == 0.0 {
            // The ratio sequence is non-increasing, so every later weight
            // is zero too.
            break;
        }
    }
    w
}

/// Dense route: solve πQ = 0, Σπ = 1 by LU on the transposed generator
/// with the last balance row replaced by the normalization.
fn dense_nullspace(n_states: usize, rate_at: &dyn Fn(u64) -> StateRates) -> Option<Vec<f64>> {
    let n = n_states;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let r = rate_at(k as u64);
        if k + 1 < n {
            a[(k + 1, k)] = r.arrival;
        }
        if k >= 1 {
            a[(k - 1, k)] = r.departure;
        }
        a[(k, k)] = -(r.arrival + r.departure);
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).map(|x| x.iter().copied().collect())
}

/// Normalized stationary distribution for an arbitrary finite birth-death
/// rate function, cross-checked densely when small enough.
fn solve_birth_death(
    n_states: u64,
    rate_at: &dyn Fn(u64) -> StateRates,
) -> Result<(Vec<f64>, bool), OracleError> {
    if n_states > MAX_STATES {
        return Err(OracleError::TooLarge { states: n_states });
    }
    let n = n_states as usize;
    let mut probs = birth_death_weights(n, rate_at);
    let mut z = CompensatedSum::new();
    for &w in &probs {
        z.add(w);
    }
    let z = z.total();
    for p in &mut probs {
        *p = flush_subnormal(*p / z);
    }

    let cross_checked = n_states <= DENSE_VERIFY_MAX_STATES;
    if cross_checked {
        let dense = dense_nullspace(n, rate_at)
            .ok_or(OracleError::MethodDisagreement { max_abs_gap: f64::INFINITY })?;
        let mut gap = 0.0_f64;
        for (p, d) in probs.iter().zip(dense.iter()) {
            gap = gap.max((p - d).abs());
        }
        if !(gap <= DENSE_VERIFY_TOL) {
            return Err(OracleError::MethodDisagreement { max_abs_gap: gap });
        }
    }
    Ok((probs, cross_checked))
}

/// Stationary distribution of the two-stage chain.  Needs both capacities
/// finite and at most [`MAX_STATES`] states; chains up to
/// [`DENSE_VERIFY_MAX_STATES`] states are additionally verified against
/// the dense null-space solve.
pub fn solve_stationary(params: &ModelParams) -> Result<StationaryDistribution, OracleError> {
    let last = match params.total_capacity() {
        Capacity::Finite(c) => u64::from(c),
        Capacity::Infinite => return Err(OracleError::CapacityNotFinite),
    };
    let p = params.clone();
    let rate_at = move |k: u64| p.rates_at(k).expect("finite by construction");
    let (probs, cross_checked) = solve_birth_death(last + 1, &rate_at)?;
    Ok(StationaryDistribution {
        probs,
        params: params.clone(),
        cross_checked,
    })
}

/// Measures read directly off a distribution: `π_s = probs[s]`,
/// `P_Q = Σ_{k≥s} probs[k]`, `L = Σ_{k>s} (k−s)·probs[k]`, and
/// `P_A = (Σ_k reneging-rate(k)·probs[k] + λ·probs[last])/λ` where the
/// reneging rate in state k is the death rate minus the service rate
/// `min(k,s)·μ`.
pub fn measures_from_distribution(dist: &StationaryDistribution) -> Measures {
    let p = &dist.params;
    let rate_at = |k: u64| p.rates_at(k).expect("finite by construction");
    measures_from_probs(p.lambda, p.mu, u64::from(p.s), &dist.probs, &rate_at)
}

fn measures_from_probs(
    lambda: f64,
    mu: f64,
    s: u64,
    probs: &[f64],
    rate_at: &dyn Fn(u64) -> StateRates,
) -> Measures {
    let pi_s = probs[s as usize];
    let mut p_q = CompensatedSum::new();
    let mut l = CompensatedSum::new();
    let mut renege_flow = CompensatedSum::new();
    for (k, &pk) in probs.iter().enumerate() {
        let k = k as u64;
        if k >= s {
            p_q.add(pk);
        }
        if k > s {
            l.add((k - s) as f64 * pk);
        }
        let renege_rate = rate_at(k).departure - k.min(s) as f64 * mu;
        renege_flow.add(renege_rate * pk);
    }
    let pi_block = *probs.last().expect("at least state 0");
    Measures {
        pi_s,
        p_q: p_q.total(),
        p_a: (renege_flow.total() + lambda * pi_block) / lambda,
        l: l.total(),
        pi_block,
    }
}

/// Stationary solve and measures in one step.
pub fn oracle_measures(params: &ModelParams) -> Result<Measures, OracleError> {
    let dist = solve_stationary(params)?;
    Ok(measures_from_distribution(&dist))
}

/// Same ground truth for the three-stage chain: identical machinery over
/// the three-piece death rates.
pub fn oracle_measures_three_stage(t: &ThreeStageParams) -> Result<Measures, OracleError> {
    let last = match t.total_capacity() {
        Capacity::Finite(c) => u64::from(c),
        Capacity::Infinite => return Err(OracleError::CapacityNotFinite),
    };
    let tp = t.clone();
    let rate_at = move |k: u64| tp.rates_at(k).expect("finite by construction");
    let (probs, _) = solve_birth_death(last + 1, &rate_at)?;
    Ok(measures_from_probs(t.lambda, t.mu, u64::from(t.s), &probs, &rate_at))
}

/// 95% confidence half-widths accompanying a [`SimEstimate`], one per
/// measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiHalfWidths {
    pub pi_s: f64,
    pub p_q: f64,
    pub p_a: f64,
    pub l: f64,
    pub pi_block: f64,
}

/// Aggregate event counts and occupancy integrals across replications,
/// kept so external identities (reneging throughput vs. θ-weighted queue
/// occupancy, flow conservation) can be audited.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimTotals {
    /// Arrivals, reneges and blocked arrivals inside measurement windows.
    pub arrivals: u64,
    pub reneged: u64,
    pub blocked: u64,
    /// Summed post-warmup time across replications.
    pub observed_time: f64,
    /// ∫ (waiting customers in the first stage) dt, summed over windows.
    pub stage1_occupancy_time: f64,
    /// Same for the second stage.
    pub stage2_occupancy_time: f64,
    /// ∫ (busy servers) dt over windows.
    pub busy_time: f64,
}

/// Replication-averaged simulation estimates with their confidence
/// half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    /// Means across replications.
    pub measures: Measures,
    /// 95% half-widths (Student-t over replications), floored at a few
    /// ulps so they are always strictly positive.
    pub half_widths: CiHalfWidths,
    /// Total events processed, warmup included.
    pub events: u64,
    /// The seed the streams were derived from.
    pub seed: u64,
    /// Number of independent replications.
    pub replications: u32,
    /// Aggregate counters for auxiliary identity checks.
    pub totals: SimTotals,
}

/// Per-replication raw results.
struct RepStats {
    events: u64,
    arrivals: u64,
    delayed: u64,
    reneged: u64,
    blocked: u64,
    area_queue: f64,
    area_state_s: f64,
    area_block: f64,
    area_stage1: f64,
    area_stage2: f64,
    area_busy: f64,
}

fn run_replication(
    params: &ModelParams,
    warmup: f64,
    horizon: f64,
    seed: u64,
    replication: u64,
) -> RepStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);

    let lambda = params.lambda;
    let mu = params.mu;
    let s = u64::from(params.s);
    let n1 = params.n1.finite().map(u64::from);
    let cap = params.total_capacity().finite().map(u64::from);

    let mut stats = RepStats {
        events: 0,
        arrivals: 0,
        delayed: 0,
        reneged: 0,
        blocked: 0,
        area_queue: 0.0,
        area_state_s: 0.0,
        area_block: 0.0,
        area_stage1: 0.0,
        area_stage2: 0.0,
        area_busy: 0.0,
    };

    let mut t = 0.0_f64;
    let mut k = 0_u64;
    loop {
        let dep = params.departure_rate_unbounded(k);
        let total = lambda + dep;
        let u: f64 = rng.gen();
        let dt = -(1.0 - u).ln() / total;
        let t_next = t + dt;

        let lo = t.max(warmup);
        let hi = t_next.min(horizon);
        if hi > lo {
            let span = hi - lo;
            let waiting = k.saturating_sub(s);
            let (occ1, occ2) = match n1 {
                Some(n1) => {
                    let w1 = waiting.min(n1);
                    (w1, waiting - w1)
                }
                None => (waiting, 0),
            };
            stats.area_queue += waiting as f64 * span;
            stats.area_stage1 += occ1 as f64 * span;
            stats.area_stage2 += occ2 as f64 * span;
            stats.area_busy += k.min(s) as f64 * span;
            if k == s {
                stats.area_state_s += span;
            }
            if Some(k) == cap {
                stats.area_block += span;
            }
        }
        if t_next >= horizon {
            break;
        }
        t = t_next;
        stats.events += 1;
        let counted = t >= warmup;

        let v: f64 = rng.gen::<f64>() * total;
        if v < lambda {
            // Arrival; lost if the station is full.
            let full = Some(k) == cap;
            if counted {
                stats.arrivals += 1;
                if k >= s {
                    stats.delayed += 1;
                }
                if full {
                    stats.blocked += 1;
                }
            }
            if !full {
                k += 1;
            }
        } else {
            // Departure: a service completion with probability
            // min(k,s)μ/dep, otherwise a renege.
            let service = k.min(s) as f64 * mu;
            if v - lambda >= service && counted {
                stats.reneged += 1;
            }
            k -= 1;
        }
    }
    stats
}

/// Two-sided 95% Student-t quantile on `df` degrees of freedom.
fn t_quantile_975(df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("df >= 1 by construction")
        .inverse_cdf(0.975)
}

/// Mean and confidence half-width over replication values.
fn summarize(values: &[f64], t_mult: f64) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let half = t_mult * (var / n).sqrt();
    // Floor keeps half-widths strictly positive even when every
    // replication returned the identical value; the floor is resolution
    // scale, so it never manufactures statistical agreement.
    (mean, half.max(f64::EPSILON * (1.0 + mean.abs())))
}

/// Event-driven estimation of the stationary measures over independent
/// replications.  Works for finite and infinite capacities alike.  The
/// delay probability counts arrivals that find every server busy, the
/// abandonment probability counts reneged plus blocked arrivals, and the
/// queue length is a time average over the post-warmup window.
/// Replications run concurrently; replication `i` owns ChaCha8 stream `i`
/// of `seed`, and results merge by index, so output is independent of
/// thread schedule.
pub fn simulate(
    params: &ModelParams,
    warmup: f64,
    horizon: f64,
    seed: u64,
    replications: u32,
) -> Result<SimEstimate, OracleError> {
    if !(warmup >= 0.0 && horizon > warmup && horizon.is_finite()) {
        return Err(OracleError::InvalidHorizon { warmup, horizon });
    }
    if replications < 2 {
        return Err(OracleError::ZeroReplications { replications });
    }

    let reps: Vec<RepStats> = (0..u64::from(replications))
        .into_par_iter()
        .map(|i| run_replication(params, warmup, horizon, seed, i))
        .collect();

    let window = horizon - warmup;
    let per_rep = |f: &dyn Fn(&RepStats) -> f64| reps.iter().map(f).collect::<Vec<f64>>();
    let frac = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };

    let pq = per_rep(&|r| frac(r.delayed, r.arrivals));
    let pa = per_rep(&|r| frac(r.reneged + r.blocked, r.arrivals));
    let l = per_rep(&|r| r.area_queue / window);
    let pis = per_rep(&|r| r.area_state_s / window);
    let pib = per_rep(&|r| r.area_block / window);

    let t_mult = t_quantile_975(f64::from(replications) - 1.0);
    let (m_pq, h_pq) = summarize(&pq, t_mult);
    let (m_pa, h_pa) = summarize(&pa, t_mult);
    let (m_l, h_l) = summarize(&l, t_mult);
    let (m_pis, h_pis) = summarize(&pis, t_mult);
    let (m_pib, h_pib) = summarize(&pib, t_mult);

    let mut totals = SimTotals::default();
    let mut events = 0_u64;
    for r in &reps {
        events += r.events;
        totals.arrivals += r.arrivals;
        totals.reneged += r.reneged;
        totals.blocked += r.blocked;
        totals.observed_time += window;
        totals.stage1_occupancy_time += r.area_stage1;
        totals.stage2_occupancy_time += r.area_stage2;
        totals.busy_time += r.area_busy;
    }

    Ok(SimEstimate {
        measures: Measures {
            pi_s: m_pis,
            p_q: m_pq,
            p_a: m_pa,
            l: m_l,
            pi_block: m_pib,
        },
        half_widths: CiHalfWidths {
            pi_s: h_pis,
            p_q: h_pq,
            p_a: h_pa,
            l: h_l,
            pi_block: h_pib,
        },
        events,
        seed,
        replications,
        totals,
    })
}
