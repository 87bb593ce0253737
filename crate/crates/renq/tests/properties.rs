//! Randomized invariant checks across the whole parameter space: rate
//! structure, closed-form identities, approximation scalings, capacity
//! rules, and agreement between the closed forms and the chain solver.

use proptest::prelude::*;
use renq::approx::{
    approx_measures, approx_subchain_summary, capacity_rule_n1, capacity_rule_theta1,
    normal_params,
};
use renq::exact::{
    corollary_l_from_pq, corollary_pa_from_pq, exact_measures, exact_subchain_summary,
};
use renq::model::{Capacity, ModelParams};
use renq::numerics::{
    gamma_p, gamma_q, normal_cdf_diff, poisson_cdf, poisson_pmf, std_normal_cdf,
    std_normal_hazard, std_normal_pdf,
};
use renq::oracle::{measures_from_distribution, solve_stationary};

fn finite_params() -> impl Strategy<Value = ModelParams> {
    (
        0.5f64..100.0,
        0.1f64..5.0,
        1u32..60,
        0u32..40,
        0u32..40,
        0.05f64..20.0,
        0.05f64..20.0,
    )
        .prop_map(|(lambda, mu, s, n1, n2, t1, t2)| {
            ModelParams::new(
                lambda,
                mu,
                s,
                Capacity::Finite(n1),
                Capacity::Finite(n2),
                t1,
                t2,
            )
            .unwrap()
        })
}

/// Parameters where either waiting stage may be infinite (an infinite
/// first stage forces an empty second one).
fn any_params() -> impl Strategy<Value = ModelParams> {
    (
        0.5f64..100.0,
        0.1f64..5.0,
        1u32..60,
        prop_oneof![3 => (0u32..40).prop_map(Some), 1 => Just(None)],
        prop_oneof![3 => (0u32..40).prop_map(Some), 1 => Just(None)],
        0.05f64..20.0,
        0.05f64..20.0,
    )
        .prop_map(|(lambda, mu, s, n1, n2, t1, t2)| {
            let n1 = n1.map_or(Capacity::Infinite, Capacity::Finite);
            let n2 = match n1 {
                Capacity::Infinite => Capacity::Finite(0),
                _ => n2.map_or(Capacity::Infinite, Capacity::Finite),
            };
            ModelParams::new(lambda, mu, s, n1, n2, t1, t2).unwrap()
        })
}

fn scaled_close(lhs: f64, rhs: f64, tol: f64) -> bool {
    (lhs - rhs).abs() <= tol * rhs.abs().max(1.0)
}

proptest! {
    /// Death rates are the advertised piecewise-linear bands and never
    /// decrease in k; birth rates are λ strictly below capacity and zero
    /// at it.
    #[test]
    fn rates_have_the_piecewise_band_structure(p in finite_params()) {
        let s = u64::from(p.s);
        let n1 = u64::from(p.n1.finite().unwrap());
        let n2 = u64::from(p.n2.finite().unwrap());
        let last = s + n1 + n2;
        let mut prev = 0.0;
        for k in 0..=last {
            let r = p.rates_at(k).unwrap();
            let expected = if k == 0 {
                0.0
            } else if k <= s {
                k as f64 * p.mu
            } else if k <= s + n1 {
                s as f64 * p.mu + (k - s) as f64 * p.theta1
            } else {
                s as f64 * p.mu + n1 as f64 * p.theta1 + (k - s - n1) as f64 * p.theta2
            };
            prop_assert_eq!(r.departure, expected);
            prop_assert!(r.departure >= prev);
            prop_assert_eq!(r.arrival, if k < last { p.lambda } else { 0.0 });
            prev = r.departure;
        }
    }

    /// Subchain summaries keep their structural invariants: the empty-pool
    /// sum is at least one, partial sums are nonnegative, and boundary
    /// ratios hit their exact special values (one for an empty segment,
    /// zero for an infinite one) while staying nonnegative otherwise —
    /// heavy traffic pushes them far above one, so no upper bound applies.
    #[test]
    fn exact_summaries_keep_their_invariants(p in any_params()) {
        let sc = exact_subchain_summary(&p);
        prop_assert!(sc.inv_pi_s0 >= 1.0);
        prop_assert!(sc.h1 >= 0.0 && sc.h2 >= 0.0);
        prop_assert!(sc.r1 >= 0.0 && sc.r2 >= 0.0);
        match p.n1 {
            Capacity::Finite(0) => prop_assert_eq!(sc.r1, 1.0),
            Capacity::Infinite => prop_assert_eq!(sc.r1, 0.0),
            _ => prop_assert!(sc.r1 > 0.0),
        }
        match (p.n1, p.n2) {
            (Capacity::Infinite, _) => prop_assert_eq!(sc.r2, 1.0),
            (_, Capacity::Finite(0)) => prop_assert_eq!(sc.r2, 1.0),
            (_, Capacity::Infinite) => prop_assert_eq!(sc.r2, 0.0),
            _ => prop_assert!(sc.r2 > 0.0),
        }
    }

    /// The measures are probabilities (up to float slack) and obey the
    /// structural orderings P_Q ≥ π_s, P_A ≤ P_Q, 0 ≤ L ≤ capacity.
    #[test]
    fn exact_measures_stay_in_range(p in any_params()) {
        let m = exact_measures(&p);
        for (name, v) in [("pi_s", m.pi_s), ("p_q", m.p_q), ("p_a", m.p_a), ("pi_block", m.pi_block)] {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "{} = {}", name, v);
        }
        prop_assert!(m.p_q >= m.pi_s * (1.0 - 1e-12));
        prop_assert!(m.p_a <= m.p_q * (1.0 + 1e-12) + 1e-12);
        prop_assert!(m.l >= -1e-12);
        if let Capacity::Finite(cap) = p.total_capacity() {
            let room = f64::from(cap) - f64::from(p.s);
            prop_assert!(m.l <= room * (1.0 + 1e-12) + 1e-12);
        }
    }

    /// The direct P_A assembly and its corollary route through P_Q are the
    /// same number.
    #[test]
    fn abandonment_corollary_is_an_identity(p in any_params()) {
        let m = exact_measures(&p);
        let via_pq = corollary_pa_from_pq(&p, m.pi_s, m.p_q);
        prop_assert!(
            scaled_close(via_pq, m.p_a, 1e-12),
            "direct {} vs corollary {}", m.p_a, via_pq
        );
    }

    /// With a uniform patience rate the queue-length corollary is also an
    /// identity.
    #[test]
    fn queue_length_corollary_is_an_identity_for_uniform_patience(
        (lambda, mu, s, n1, n2, theta) in (
            0.5f64..100.0, 0.1f64..5.0, 1u32..60, 0u32..40, 0u32..40, 0.05f64..20.0,
        )
    ) {
        let p = ModelParams::new(
            lambda, mu, s, Capacity::Finite(n1), Capacity::Finite(n2), theta, theta,
        ).unwrap();
        let m = exact_measures(&p);
        let via_pq = corollary_l_from_pq(&p, m.pi_s, m.p_q, m.pi_block).unwrap();
        prop_assert!(
            scaled_close(via_pq, m.l, 1e-12),
            "direct {} vs corollary {}", m.l, via_pq
        );
    }

    /// With a uniform patience rate the split point between the two
    /// waiting stages is arbitrary: any (n1, n2) with the same total
    /// describes the same chain.
    #[test]
    fn uniform_patience_stage_split_is_immaterial(
        (lambda, mu, s, total, split, theta) in (
            0.5f64..100.0, 0.1f64..5.0, 1u32..60, 0u32..60, 0.0f64..1.0, 0.05f64..20.0,
        )
    ) {
        let n1 = (f64::from(total) * split) as u32;
        let a = exact_measures(&ModelParams::new(
            lambda, mu, s, Capacity::Finite(n1), Capacity::Finite(total - n1), theta, theta,
        ).unwrap());
        let b = exact_measures(&ModelParams::new(
            lambda, mu, s, Capacity::Finite(total), Capacity::Finite(0), theta, theta,
        ).unwrap());
        prop_assert!(scaled_close(a.pi_s, b.pi_s, 1e-12));
        prop_assert!(scaled_close(a.p_q, b.p_q, 1e-12));
        prop_assert!(scaled_close(a.p_a, b.p_a, 1e-12));
        prop_assert!(scaled_close(a.l, b.l, 1e-12));
    }

    /// The four scale parameters of the approximation obey their exact
    /// algebraic relations.
    #[test]
    fn normal_scale_identities_hold(p in finite_params()) {
        let np = normal_params(&p);
        prop_assert!(scaled_close(np.c1, (p.mu / p.theta1).sqrt() * np.c, 1e-12));
        prop_assert!(scaled_close(np.delta1, (p.theta1 / p.mu).sqrt() * np.delta, 1e-12));
        prop_assert!(scaled_close(np.c2, (p.theta1 / p.theta2).sqrt() * np.c1_plus, 1e-12));
        prop_assert!(scaled_close(np.delta2, (p.theta2 / p.theta1).sqrt() * np.delta1, 1e-12));
    }

    /// Approximate summaries and measures keep the same structure as the
    /// exact ones.
    #[test]
    fn approx_route_keeps_the_structure(p in any_params()) {
        let sc = approx_subchain_summary(&p);
        prop_assert!(sc.inv_pi_s0 > 0.0);
        prop_assert!(sc.h1 >= 0.0 && sc.h2 >= 0.0);
        prop_assert!(sc.r1 >= 0.0 && sc.r2 >= 0.0);
        match p.n1 {
            Capacity::Finite(0) => prop_assert_eq!(sc.r1, 1.0),
            Capacity::Infinite => prop_assert_eq!(sc.r1, 0.0),
            _ => {
                // A finite boundary ratio exp(−(b²−a²)/2) is positive
                // whenever its exponent is representable; deeper in the
                // tail the true value sits below f64 range and an exact
                // zero is the correct rounding.
                let np = normal_params(&p);
                let (a, b) = (np.c1 + np.delta1, np.c1_plus + np.delta1);
                if -0.5 * (b - a) * (b + a) > -700.0 {
                    prop_assert!(sc.r1 > 0.0);
                }
            }
        }
        let m = approx_measures(&p);
        prop_assert!(m.pi_s >= 0.0);
        prop_assert!(m.p_q >= m.pi_s * (1.0 - 1e-12));
        prop_assert!(m.l >= -1e-12);
    }

    /// The buffer-size rule returns the smallest integer meeting the
    /// target and is monotone in the quality parameter z.
    #[test]
    fn buffer_rule_is_minimal_and_monotone(
        (s, mu, excess, theta1, z, z_extra) in (
            1u32..60, 0.1f64..5.0, 0.01f64..3.0, 0.05f64..20.0, 0.1f64..4.0, 0.0f64..2.0,
        )
    ) {
        let s_mu = f64::from(s) * mu;
        let lambda = s_mu * (1.0 + excess);
        let c1_plus_at = |n: f64| (s_mu + n * theta1 - lambda) / (lambda * theta1).sqrt();

        let n1 = capacity_rule_n1(lambda, mu, s, theta1, z).unwrap();
        prop_assert!(c1_plus_at(f64::from(n1)) >= z - 1e-9);
        if n1 > 0 {
            prop_assert!(c1_plus_at(f64::from(n1) - 1.0) < z + 1e-9);
        }

        let n1_higher = capacity_rule_n1(lambda, mu, s, theta1, z + z_extra).unwrap();
        prop_assert!(n1_higher >= n1);
    }

    /// The patience-rate rule lands exactly on its target and is monotone
    /// in z.
    #[test]
    fn patience_rule_is_binding_and_monotone(
        (s, mu, excess, n1, z, z_extra) in (
            1u32..60, 0.1f64..5.0, 0.01f64..3.0, 1u32..50, 0.1f64..4.0, 0.01f64..2.0,
        )
    ) {
        let s_mu = f64::from(s) * mu;
        let lambda = s_mu * (1.0 + excess);
        let theta = capacity_rule_theta1(lambda, mu, s, n1, z).unwrap();
        prop_assert!(theta > 0.0);
        let c1_plus = (s_mu + f64::from(n1) * theta - lambda) / (lambda * theta).sqrt();
        prop_assert!(scaled_close(c1_plus, z, 1e-9), "c1+ {} vs z {}", c1_plus, z);
        let theta_higher = capacity_rule_theta1(lambda, mu, s, n1, z + z_extra).unwrap();
        prop_assert!(theta_higher > theta);
    }

    /// Normal-tail building blocks: hazard and cdf are mutually
    /// consistent, and the cdf difference is additive over a split point.
    #[test]
    fn normal_tail_blocks_are_consistent(x in -37.0f64..37.0, w1 in 0.0f64..5.0, w2 in 0.0f64..5.0) {
        let hazard_identity = std_normal_hazard(x) * std_normal_cdf(-x);
        prop_assert!(scaled_close(hazard_identity, std_normal_pdf(x), 1e-12));

        let (a, c, b) = (x, x + w1, x + w1 + w2);
        let whole = normal_cdf_diff(a, b);
        let parts = normal_cdf_diff(a, c) + normal_cdf_diff(c, b);
        prop_assert!(
            (whole - parts).abs() <= 1e-13 * whole.max(1e-300),
            "diff({},{}) = {} vs split {}", a, b, whole, parts
        );
    }

    /// Regularized gamma functions are complementary, and the discrete
    /// tail matches the summed mass function.
    #[test]
    fn poisson_and_gamma_blocks_are_consistent(a in 0.5f64..2000.0, x in 0.5f64..4000.0, r in 0.1f64..500.0, k in 0u64..1500) {
        prop_assert!(scaled_close(gamma_p(a, x) + gamma_q(a, x), 1.0, 1e-13));
        let mut sum = 0.0;
        for j in 0..=k {
            sum += poisson_pmf(j, r);
        }
        prop_assert!(scaled_close(sum, poisson_cdf(k, r), 5e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The chain solver and the closed forms agree to 1e−9 absolute, the
    /// solved distribution is a verified probability vector, and flow is
    /// conserved: λ(1−P_A) = μ·E[busy servers].
    #[test]
    fn solver_and_closed_forms_agree(
        (lambda, mu, s, n1, n2, t1, t2) in (
            1.0f64..100.0, 0.5f64..2.0, 1u32..40, 0u32..30, 0u32..30, 0.1f64..20.0, 0.1f64..20.0,
        )
    ) {
        let p = ModelParams::new(
            lambda, mu, s, Capacity::Finite(n1), Capacity::Finite(n2), t1, t2,
        ).unwrap();
        let dist = solve_stationary(&p).unwrap();
        prop_assert!(dist.cross_checked);
        let total: f64 = dist.probs.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(dist.probs.iter().all(|&x| x >= 0.0));
        prop_assert!(dist.max_detailed_balance_violation() <= 1e-10);

        let from_chain = measures_from_distribution(&dist);
        let closed = exact_measures(&p);
        prop_assert!((from_chain.pi_s - closed.pi_s).abs() <= 1e-9);
        prop_assert!((from_chain.p_q - closed.p_q).abs() <= 1e-9);
        prop_assert!((from_chain.p_a - closed.p_a).abs() <= 1e-9);
        prop_assert!((from_chain.l - closed.l).abs() <= 1e-9);

        let busy: f64 = dist
            .probs
            .iter()
            .enumerate()
            .map(|(k, &pk)| (k as u64).min(u64::from(p.s)) as f64 * pk)
            .sum();
        prop_assert!((p.lambda * (1.0 - from_chain.p_a) - p.mu * busy).abs() <= 1e-9);
    }
}
