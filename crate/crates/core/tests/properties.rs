//! Randomized properties of the bound formulas, actions, phase and
//! configuration parsing.

use hermite_lp::bounds::{branch_log_value, lambda_lp, mu_params, select_branch, thresholds, BoundBranch, BoundQuery, Exponent};
use hermite_lp::construct::circular_spread;
use hermite_lp::experiment::{parse_config, ExperimentConfig, ExperimentKind};
use hermite_lp::hermite::{action_s, hermite_normalized, Branch};
use hermite_lp::phase::{psi_prime, psi_prime_factored};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = Exponent> {
    (0.0f64..=0.5).prop_map(|ip| Exponent::from_inverse(ip).unwrap())
}

proptest! {
    #[test]
    fn small_ball_seam_is_continuous(n in 1usize..5, ll in 2.0f64..12.0, lm in 0.0f64..1.0, p in exponent()) {
        let lambda = ll.exp();
        let mu = (lm * (-4.0 / 3.0) * lambda.ln()).exp();
        let nu = lambda * (1.0 - mu);
        let m = mu_params(lambda, 1.0, nu).unwrap().0;
        let q = BoundQuery { n, lambda, r: 1.0 / (lambda * m.sqrt()), nu, p };
        let mid = if p.inv() >= thresholds(n).stein_tomas { BoundBranch::MidLowP } else { BoundBranch::MidHighP };
        let (m, mt) = mu_params(lambda, q.r, nu).unwrap();
        let a = branch_log_value(&q, BoundBranch::SmallBall, m, mt);
        let b = branch_log_value(&q, mid, m, mt);
        prop_assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn bound_is_positive_and_branch_consistent(n in 1usize..5, ll in 1.0f64..12.0, lr in -1.5f64..1.0, w in 0.0f64..1.0, p in exponent()) {
        let lambda = ll.exp();
        let r = lambda.powf(lr).min(lambda);
        let q = BoundQuery { n, lambda, r, nu: w * lambda, p };
        let b = lambda_lp(&q).unwrap();
        prop_assert!(b.value > 0.0 && b.value.is_finite());
        prop_assert!((b.value.ln() - b.log_value).abs() < 1e-9 * b.log_value.abs().max(1.0));
        prop_assert_eq!(select_branch(&q, b.mu), b.branch);
    }

    #[test]
    fn hermite_parity(k in 0usize..300, x in -30.0f64..30.0) {
        let a = hermite_normalized(k, x);
        let b = hermite_normalized(k, -x);
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - s * b).abs() <= 1e-14 * a.abs().max(1e-300));
    }

    #[test]
    fn action_is_odd_and_increasing(u in 0.5f64..100.0, w in 0.0f64..3.0, dw in 1e-6f64..0.1) {
        let a = action_s(u, w * u, Branch::Minus).unwrap();
        let b = action_s(u, (w + dw) * u, Branch::Minus).unwrap();
        prop_assert!(b >= a);
        prop_assert_eq!(action_s(u, -w * u, Branch::Minus).unwrap(), -a);
    }

    #[test]
    fn factored_derivative_agrees(x in prop::collection::vec(-0.9f64..0.9, 2), y in prop::collection::vec(-0.9f64..0.9, 2), t in 0.05f64..1.5) {
        let d = psi_prime(t, &x, &y).unwrap();
        if let Ok((f, _)) = psi_prime_factored(t, &x, &y) {
            prop_assert!((d - f).abs() <= 1e-9 * d.abs().max(1.0));
        }
    }

    #[test]
    fn spread_is_rotation_invariant(angles in prop::collection::vec(0.0f64..1.0, 1..20), shift in -10.0f64..10.0) {
        let a = circular_spread(&angles);
        let rotated: Vec<f64> = angles.iter().map(|t| t + shift).collect();
        prop_assert!((a - circular_spread(&rotated)).abs() < 1e-9);
    }

    #[test]
    fn configs_round_trip(kind in prop::sample::select(ExperimentKind::ALL.to_vec()), seed in 0u64..1000) {
        let text = format!("experiment = \"{kind}\"\nseed = {seed}\n[{}]\n", kind.table());
        let text = if kind == ExperimentKind::KernelCompare { text.replace("[kernel_compare]", "[kernel_compare.size_bound]") } else { text };
        let cfg = parse_config(&text).unwrap();
        let back: ExperimentConfig = parse_config(&toml::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(back.seed, seed);
        prop_assert_eq!(back.experiment, kind);
    }
}
