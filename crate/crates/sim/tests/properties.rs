use nbqec::{BuildParams, CssCode};
use nbqec_sim::{hashing_bound, load_code, run_point, wilson, CodeSource, Pipeline};
use proptest::prelude::*;
use std::sync::OnceLock;

fn code() -> &'static CssCode {
    static CODE: OnceLock<CssCode> = OnceLock::new();
    CODE.get_or_init(|| load_code(&CodeSource::Build(BuildParams::new(4, 6, 16, 3).unwrap()), true).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trials_partition_and_final_never_exceeds_strict(fm in 0.0f64..0.08, seed in any::<u64>(), post in any::<bool>()) {
        let pipe = Pipeline::new(code(), 30, post, seed);
        let (s, _) = run_point(&pipe, fm, 1.5 * fm, 80, u64::MAX, false);
        prop_assert!(s.is_consistent());
        prop_assert_eq!(s.trials, 80);
        prop_assert!(s.fer_final() <= s.fer_strict());
        for k in 0..3 {
            prop_assert!(s.traps.fixed[k] <= s.traps.seen[k]);
        }
        prop_assert_eq!(s.traps.fixed[1], 0);
        if !post {
            prop_assert_eq!(s.traps.fixed, [0; 3]);
        }
    }

    #[test]
    fn early_stop_counts_exactly(seed in any::<u64>(), k in 1u64..5) {
        let pipe = Pipeline::new(code(), 20, true, seed);
        let (s, _) = run_point(&pipe, 0.06, 0.09, 2000, k, false);
        prop_assert!(s.final_failures() == k || s.trials == 2000);
    }

    #[test]
    fn wilson_interval_contains_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac) as u64;
        let (lo, hi) = wilson(k, n, 1.96);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn hashing_bound_decreases(a in 0.001f64..0.7, d in 0.001f64..0.04) {
        prop_assert!(hashing_bound(a + d).unwrap() < hashing_bound(a).unwrap());
    }
}
