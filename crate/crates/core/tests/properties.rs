use proptest::prelude::*;
use recon_core::dual_picture;
use recon_core::erasure;
use recon_core::geometry;
use recon_core::linalg;
use recon_core::lr_horn::op_picture_contains;
use recon_core::majorization::{majorizes, partial_sum_margin, Relation};
use recon_core::rng;
use recon_core::system::duality_residual;
use recon_core::{Parameters, Weights};

fn small_params() -> impl Strategy<Value = Parameters> {
    (2usize..=4, 2usize..=4)
        .prop_flat_map(|(d, m)| (Just(d), prop::collection::vec(1..=d, m)))
        .prop_filter("tr k ≥ d", |(d, k)| k.iter().sum::<usize>() >= *d)
        .prop_map(|(d, k)| Parameters::new(k, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_duals_are_duals(p in small_params(), seed in any::<u64>(), scale in 0.0f64..3.0) {
        let sys = geometry::random_system(&p, seed).unwrap();
        let mut g = rng::stream(seed, 9);
        let (w, a) = dual_picture::random_dual(&sys, &mut g, scale).unwrap();
        prop_assert!(duality_residual(&w, &sys).unwrap() < 1e-9 * (1.0 + scale));
        // A annihilates the range of T_V
        prop_assert!(linalg::frobenius_norm(&(&a * sys.analysis())) < 1e-9 * (1.0 + scale));
    }

    #[test]
    fn canonical_dual_has_least_potential(p in small_params(), seed in any::<u64>(), scale in 0.0f64..2.0) {
        let raw = geometry::random_system(&p, seed).unwrap();
        let sys = raw.scaled(1.0 / raw.spectrum().min().sqrt());
        let floor = dual_picture::dual_potential_floor(&sys).unwrap();
        let sharp = sys.canonical_dual().unwrap();
        prop_assert!((dual_picture::frame_potential(&sharp) - floor).abs() < 1e-9 * floor.max(1.0));
        let mut g = rng::stream(seed, 3);
        let (w, a) = dual_picture::random_dual(&sys, &mut g, scale).unwrap();
        prop_assert!(dual_picture::frame_potential(&w) >= floor - 1e-9 * floor.max(1.0));
        let tr = |s: &recon_core::ReconstructionSystem| linalg::trace_re(&s.frame_operator());
        prop_assert!((tr(&w) - tr(&sharp) - a.norm_squared()).abs() < 1e-9 * (1.0 + tr(&w)));
    }

    #[test]
    fn erasure_bound_chain(p in small_params(), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let w = Weights::ones(p.m());
        let sys = geometry::random_projective(&p, &w, seed).unwrap();
        let j = pick.index(p.m());
        let r = erasure::erase(&sys, &[j]).unwrap();
        prop_assert!(r.identity_residual < 1e-10);
        if r.survives {
            let new = r.bound_new.unwrap();
            prop_assert!(r.bound_asgari.unwrap() <= new + 1e-9);
            prop_assert!(new <= r.exact_a.unwrap() + 1e-9);
            if let Some(ck) = r.bound_ck {
                prop_assert!(ck <= new + 1e-9);
            }
        }
    }

    #[test]
    fn sampled_spectra_satisfy_horn(p in small_params(), seed in any::<u64>()) {
        let w = Weights::ones(p.m());
        let sys = geometry::random_projective(&p, &w, seed).unwrap();
        prop_assert!(op_picture_contains(&p, &w, &sys.spectrum()).unwrap().member);
    }

    #[test]
    fn projective_draws_keep_their_weights(p in small_params(), seed in any::<u64>()) {
        let w = Weights::new((0..p.m()).map(|i| 0.5 + i as f64 * 0.25).collect()).unwrap();
        let sys = geometry::random_projective(&p, &w, seed).unwrap();
        let got = sys.projective_check(1e-10).unwrap();
        prop_assert!(linalg::max_abs_diff(got.values(), w.values()) < 1e-10);
        prop_assert!((sys.spectrum().trace() - w.tau(&p)).abs() < 1e-9);
    }

    #[test]
    fn majorization_is_reflexive_and_uniform_is_least(x in prop::collection::vec(0.0f64..10.0, 1..8)) {
        prop_assert_eq!(majorizes(&x, &x).unwrap().relation, Relation::Majorized);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let flat = vec![mean; x.len()];
        prop_assert!(partial_sum_margin(&flat, &x).unwrap() >= -1e-9);
        prop_assert_eq!(majorizes(&flat, &x).unwrap().relation, Relation::Majorized);
    }
}

#[test]
fn weights_outside_tau_are_rejected() {
    let p = Parameters::new(vec![1, 1], 2).unwrap();
    assert!(geometry::random_projective(&p, &Weights::ones(3), 0).is_err());
}
