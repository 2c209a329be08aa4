use hamfeat::bounds::{appendix_b_rhs, hoeffding_shots, theorem1_rhs, BoundInputs};
use proptest::prelude::*;

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (0usize..20, 0.1..5.0f64, 0.1..20.0f64, 1usize..5000, 0.001..0.5f64, 0.0..0.5f64).prop_map(
        |(order, w_bound, f_inf, n_data, delta, eps_k)| BoundInputs {
            order,
            w_bound,
            f_inf,
            n_data,
            delta,
            eps_k,
            eta: 0.0,
        },
    )
}

proptest! {
    #[test]
    fn rhs_moves_in_the_expected_direction(b in inputs()) {
        let base = theorem1_rhs(&b).unwrap();
        let more_data = theorem1_rhs(&BoundInputs { n_data: b.n_data * 2, ..b }).unwrap();
        let higher_order = theorem1_rhs(&BoundInputs { order: b.order + 1, ..b }).unwrap();
        let wider = theorem1_rhs(&BoundInputs { w_bound: b.w_bound * 1.5, ..b }).unwrap();
        let larger_f = theorem1_rhs(&BoundInputs { f_inf: b.f_inf * 1.5, ..b }).unwrap();
        let surer = theorem1_rhs(&BoundInputs { delta: b.delta / 2.0, ..b }).unwrap();
        prop_assert!(more_data < base);
        prop_assert!(higher_order > base);
        prop_assert!(wider > base);
        prop_assert!(larger_f > base);
        prop_assert!(surer > base);
    }

    #[test]
    fn noise_terms_vanish_at_zero_and_grow_with_eta(b in inputs(), eta in 0.001..0.5f64) {
        prop_assert_eq!(appendix_b_rhs(&b).unwrap(), theorem1_rhs(&b).unwrap());
        let noisy = appendix_b_rhs(&BoundInputs { eta, ..b }).unwrap();
        let noisier = appendix_b_rhs(&BoundInputs { eta: eta * 2.0, ..b }).unwrap();
        prop_assert!(theorem1_rhs(&b).unwrap() < noisy && noisy < noisier);
    }

    #[test]
    fn shot_count_is_the_smallest_integer_meeting_the_tail(eta in 0.01..0.5f64, delta in 0.001..0.5f64, k in 0usize..30) {
        let n = hoeffding_shots(eta, delta, k).unwrap() as f64;
        let union_tail = |n: f64| (2 * k + 1) as f64 * 2.0 * (-n * eta * eta / 2.0).exp();
        prop_assert!(union_tail(n) <= delta * (1.0 + 1e-9));
        prop_assert!(n == 1.0 || union_tail(n - 1.0) > delta * (1.0 - 1e-9));
    }
}
