mod common;

use proptest::prelude::*;

use privoffload::dp::{
    dp_ratio_check, interval_queries, k_rr_table, mwem, perturb_context, Histogram, PrivacyBudget,
};
use privoffload::latency::{reduction_rate, total_task_delay, SubtaskSpec};
use privoffload::mobility::{transmission_rate, ChannelParams};
use privoffload::optimizer::exhaustive::random_instance;
use privoffload::optimizer::{
    bm_baseline, branch_and_bound, cm_baseline, feasible, rm_baseline, Quantum,
};
use privoffload::rng::{seeded, stream};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_algorithm_returns_a_feasible_set(seed in any::<u64>()) {
        let mut rng = stream(seed, "prop-instance", &[]);
        let p = random_instance(&mut rng, 4, 3, 4, 5e8);
        let q = Quantum::Fixed(5e8);
        for ds in [
            branch_and_bound(&p, q).unwrap(),
            rm_baseline(&p, &mut seeded(seed)).unwrap(),
            cm_baseline(&p).unwrap(),
            bm_baseline(&p).unwrap(),
        ] {
            prop_assert!(feasible(&ds, &p.servers));
            prop_assert_eq!(ds.decisions.len(), p.candidates.len());
            for d in &ds.decisions {
                prop_assert_eq!(d.server.is_none(), d.allocation == 0.0);
            }
        }
    }

    #[test]
    fn bnb_allocations_are_whole_quanta(seed in any::<u64>()) {
        let mut rng = stream(seed, "prop-instance", &[]);
        let p = random_instance(&mut rng, 3, 3, 4, 5e8);
        let ds = branch_and_bound(&p, Quantum::Fixed(5e8)).unwrap();
        for d in ds.decisions.iter().filter(|d| d.server.is_some()) {
            let k = d.allocation / 5e8;
            prop_assert!(k >= 1.0 && (k - k.round()).abs() < 1e-9);
        }
        prop_assert!(ds.objective <= 1.0);
    }

    #[test]
    fn bnb_not_worse_than_baselines_on_the_same_instance(seed in any::<u64>()) {
        let mut rng = stream(seed, "prop-instance", &[]);
        let p = random_instance(&mut rng, 3, 3, 4, 5e8);
        let bnb = branch_and_bound(&p, Quantum::Fixed(5e8)).unwrap().objective;
        // The quantized space contains every full-remaining allocation only when
        // remaining capacity is a whole number of quanta, which random_instance guarantees.
        prop_assert!(bnb <= bm_baseline(&p).unwrap().objective * (1.0 + 1e-12));
        prop_assert!(bnb <= cm_baseline(&p).unwrap().objective * (1.0 + 1e-12));
    }

    #[test]
    fn krr_table_is_exactly_private(k in 2usize..12, eps in 0.05f64..8.0) {
        let budget = PrivacyBudget::new(eps).unwrap();
        let t = k_rr_table(k, budget).unwrap();
        for row in &t {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert!(common::rel_close(t[0][0], common::krr_keep(k, eps), 1e-12));
        prop_assert!(dp_ratio_check(&t, budget).unwrap());
        let tighter = PrivacyBudget::new(eps * 0.99).unwrap();
        prop_assert!(!dp_ratio_check(&t, tighter).unwrap());
    }

    #[test]
    fn mwem_conserves_mass(counts in proptest::collection::vec(0.0f64..50.0, 16), seed in any::<u64>(), eps in 0.1f64..10.0) {
        prop_assume!(counts.iter().sum::<f64>() > 1.0);
        let h = Histogram::new(0.0, 16.0, counts).unwrap();
        let q = interval_queries(16, 3).unwrap();
        let a = mwem(&h, &q, 5, PrivacyBudget::new(eps).unwrap(), &mut seeded(seed)).unwrap();
        prop_assert!(common::rel_close(a.total_mass(), h.total_mass(), 1e-9));
        prop_assert!(a.counts().iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn perturbation_preserves_the_bin(v in -10.0f64..110.0, bins in 1usize..40, seed in any::<u64>()) {
        let h = Histogram::zeros(0.0, 100.0, bins).unwrap();
        let r = perturb_context(v, &h, &mut seeded(seed)).unwrap();
        prop_assert_eq!(h.bin_of(r), h.bin_of(v));
        prop_assert!((0.0..100.0).contains(&r));
    }

    #[test]
    fn rate_falls_with_distance(d in 1.0f64..1000.0, p in 0.001f64..1.0, theta in 2.0f64..4.0) {
        let params = ChannelParams { path_loss_exp: theta, ..ChannelParams::default() };
        let near = transmission_rate(p, d, 1.0, &params).unwrap();
        let far = transmission_rate(p, 2.0 * d, 1.0, &params).unwrap();
        prop_assert!(far < near);
    }

    #[test]
    fn local_execution_has_unit_rate(w in 1e6f64..1e10, c in 1e6f64..1e10, lambda in 0.0f64..=1.0) {
        let sub = SubtaskSpec { workload: w, input_bits: 1e6, lambda, lo_ratio: 0.5, eo_ratio: 0.5 };
        let d = total_task_delay(&sub, None, c, 0.0, 0.0).unwrap();
        prop_assert_eq!(reduction_rate(d.total_s, &sub, c).unwrap(), 1.0);
    }
}
