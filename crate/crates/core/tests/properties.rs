use hwl_core::bellman::sup_s_value;
use hwl_core::dyadic::{
    alpha_coefficients, disbalanced_haar, haar_coefficients, DyadicModel, LeafFunction, Weight,
};
use hwl_core::operators::{
    apply_t0, apply_t_sigma, direct_bilinear, four_sum_decomposition, square_function, SignPattern,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn leaf_values(depth: u32) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1usize << depth)
}

fn weight_values(depth: u32) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-3.0f64..3.0).prop_map(f64::exp), 1usize << depth)
}

fn function(depth: u32, v: Vec<f64>) -> LeafFunction {
    LeafFunction::new(DyadicModel::new(depth).unwrap(), v).unwrap()
}

fn weight(depth: u32, v: Vec<f64>) -> Weight {
    Weight::from_values(DyadicModel::new(depth).unwrap(), v).unwrap()
}

fn with_function() -> impl Strategy<Value = (u32, Vec<f64>)> {
    (1u32..=8).prop_flat_map(|d| (Just(d), leaf_values(d)))
}

fn with_pair() -> impl Strategy<Value = (u32, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, u64)> {
    (1u32..=5).prop_flat_map(|d| {
        (
            Just(d),
            leaf_values(d),
            leaf_values(d),
            weight_values(d),
            weight_values(d),
            any::<u64>(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parseval((d, vals) in with_function()) {
        let f = function(d, vals);
        let c = haar_coefficients(&f);
        let lhs: f64 = c.values().iter().map(|c| c * c).sum::<f64>() + f.integral().powi(2);
        prop_assert!(close(lhs, f.norm_sq(), 1e-10));
    }

    #[test]
    fn disbalanced_haar_properties((d, vals) in (1u32..=8).prop_flat_map(|d| (Just(d), weight_values(d)))) {
        let w = weight(d, vals);
        let model = w.model();
        for i in model.internal() {
            let hw = disbalanced_haar(&w, i).unwrap();
            let f = hw.to_leaf_function(model);
            prop_assert!(f.inner(w.base()).unwrap().abs() <= 1e-10 * w.average(i));
            prop_assert!(close(f.weighted_norm_sq(&w).unwrap(), 1.0, 1e-10));
            let h = hwl_core::dyadic::haar_function(i, model).unwrap();
            let chi = LeafFunction::indicator(model, i);
            for k in 0..model.leaf_count() {
                let rebuilt = hw.x * h.values()[k] - hw.a * chi.values()[k];
                prop_assert!(close(rebuilt, f.values()[k], 1e-10));
            }
        }
    }

    #[test]
    fn four_sums_match_direct_form((d, f, g, v, w, bits) in with_pair()) {
        let (f, g) = (function(d, f), function(d, g));
        let (v, w) = (weight(d, v), weight(d, w));
        let sigma = SignPattern::from_bits(v.model(), bits);
        let parts = four_sum_decomposition(&f, &g, &sigma, &v, &w).unwrap();
        let direct = direct_bilinear(&f, &g, &sigma, &v, &w).unwrap();
        prop_assert!((parts.total - direct).abs() <= 1e-9 * (1.0 + parts.total.abs()));
    }

    #[test]
    fn sign_flip_negates((d, f, _g, _v, _w, bits) in with_pair()) {
        let f = function(d, f);
        let sigma = SignPattern::from_bits(f.model(), bits);
        let a = apply_t_sigma(&f, &sigma).unwrap();
        let b = apply_t_sigma(&f, &sigma.negated()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn t0_is_monotone((d, f, g, v, w, _bits) in with_pair()) {
        let (v, w) = (weight(d, v), weight(d, w));
        let alpha = alpha_coefficients(&v, &w).unwrap();
        let small = function(d, f.iter().map(|x| x.abs()).collect());
        let big = function(d, f.iter().zip(&g).map(|(x, y)| x.abs() + y.abs()).collect());
        let (ts, tb) = (apply_t0(&small, &alpha).unwrap(), apply_t0(&big, &alpha).unwrap());
        for (a, b) in ts.values().iter().zip(tb.values()) {
            prop_assert!(*a >= 0.0);
            prop_assert!(*a <= *b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn square_function_vanishes_only_on_constants((d, f) in with_function(), c in -5.0f64..5.0) {
        let f = function(d, f);
        let s = square_function(&f);
        let zero = s.values().iter().all(|x| *x == 0.0);
        prop_assert_eq!(zero, f.is_constant());
        let k = LeafFunction::constant(f.model(), c);
        prop_assert!(square_function(&k).values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn sup_s_dominates_objective(
        x in 0.0f64..10.0, w in 0.01f64..10.0, y in 0.0f64..10.0, v in 0.01f64..10.0,
        k in 0.0f64..10.0, t in -30.0f64..30.0,
    ) {
        let (_, value) = sup_s_value(x, w, y, v, k);
        let s = t.exp();
        let obj = x * x / (w + s * k) + y * y / (v + k / s);
        prop_assert!(value >= obj - 1e-10 * (1.0 + obj));
    }

    #[test]
    fn sup_s_matches_closed_form(
        x in 0.0f64..10.0, w in 0.01f64..10.0, y in 0.0f64..10.0, v in 0.01f64..10.0,
        k in 0.001f64..10.0,
    ) {
        // the derivative has the sign of (yw − xK) + s(yK − xv)
        let obj = |s: f64| x * x / (w + s * k) + y * y / (v + k / s);
        let mut best = (x * x / w).max(y * y / v);
        let s = (y * w - x * k) / (x * v - y * k);
        if s.is_finite() && s > 0.0 {
            best = best.max(obj(s));
        }
        let (_, value) = sup_s_value(x, w, y, v, k);
        prop_assert!(close(value, best, 1e-10), "{} vs {}", value, best);
    }
}
