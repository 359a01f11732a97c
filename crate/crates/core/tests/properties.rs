use hom_superres::densities::{pc_density, pd_density, total_coincidence_prob};
use hom_superres::estimator::{log_likelihood, KnownConstants, Observations};
use hom_superres::fisher::{fi_direct_imaging, fi_twophoton_binary, fi_twophoton_spatial};
use hom_superres::{EventKind, EventRecord, QuadratureSpec, SourceModel, SourceScene, Strategy as Measurement};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = SourceModel> {
    prop_oneof![Just(SourceModel::ThermalPair), Just(SourceModel::DistinctEmitters)]
}

fn scene() -> impl Strategy<Value = SourceScene> {
    (-3.0f64..3.0, 0.0f64..4.0, 0.0f64..=1.0).prop_map(|(x0, e, v)| SourceScene::new(x0, e, v).unwrap())
}

proptest! {
    #[test]
    fn densities_are_nonnegative_and_symmetric(s in scene(), m in model(), x1 in -8.0f64..8.0, x2 in -8.0f64..8.0) {
        let (pc, pd) = (pc_density(x1, x2, &s, m), pd_density(x1, x2, &s, m));
        prop_assert!(pc >= 0.0 && pd >= 0.0);
        prop_assert_eq!(pc, pc_density(x2, x1, &s, m));
        prop_assert!((pd - pd_density(x2, x1, &s, m)).abs() <= 1e-15 * pd);
    }

    #[test]
    fn visibility_only_moves_weight_between_outcomes(s in scene(), m in model(), x1 in -6.0f64..6.0, x2 in -6.0f64..6.0, v in 0.0f64..=1.0) {
        let t = s.with_visibility(v).unwrap();
        let a = pc_density(x1, x2, &s, m) + pd_density(x1, x2, &s, m);
        let b = pc_density(x1, x2, &t, m) + pd_density(x1, x2, &t, m);
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        if v >= s.visibility() {
            prop_assert!(pc_density(x1, x2, &t, m) <= pc_density(x1, x2, &s, m) * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn coincidence_probability_is_at_most_half(s in scene(), m in model()) {
        let p = total_coincidence_prob(&s, m);
        prop_assert!((0.0..=0.5).contains(&p));
    }

    #[test]
    fn densities_follow_the_scene(s in scene(), m in model(), x1 in -5.0f64..5.0, x2 in -5.0f64..5.0, d in -2.0f64..2.0) {
        let moved = s.with_x0(s.x0() + d).unwrap();
        let a = pc_density(x1, x2, &s, m);
        let b = pc_density(x1 + d, x2 + d, &moved, m);
        prop_assert!((a - b).abs() <= 1e-9 * a + 1e-15);
        let (r1, r2) = (2.0 * s.x0() - x1, 2.0 * s.x0() - x2);
        let c = pd_density(r1, r2, &s, m);
        prop_assert!((c - pd_density(x1, x2, &s, m)).abs() <= 1e-9 * c + 1e-15);
    }

    #[test]
    fn likelihood_is_even_in_separation(s in scene(), m in model(), pts in prop::collection::vec((any::<bool>(), -4.0f64..4.0, -4.0f64..4.0), 1..30), e in 0.0f64..3.0) {
        let events = pts.iter().map(|&(c, x1, x2)| EventRecord {
            kind: if c { EventKind::CrossCoincidence } else { EventKind::Double }, x1, x2,
        }).collect();
        let obs = Observations::Pairs(events);
        let k = KnownConstants::of(&s);
        for strategy in [Measurement::TwoPhotonSpatial, Measurement::TwoPhotonBinary] {
            let a = log_likelihood(s.x0(), e, &obs, k, m, strategy).unwrap();
            let b = log_likelihood(s.x0(), -e, &obs, k, m, strategy).unwrap();
            prop_assert!(a == b || (a - b).abs() <= 1e-9 * a.abs());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fisher_matrices_are_psd_and_bounded(s in scene(), m in model()) {
        let q = QuadratureSpec::default();
        let di = fi_direct_imaging(&s, &q).unwrap();
        let binary = fi_twophoton_binary(&s, m);
        prop_assert!(di.is_positive_semidefinite(1e-12));
        prop_assert!(binary.is_positive_semidefinite(1e-12));
        prop_assert_eq!(binary.x0_x0(), 0.0);
        prop_assert!(di.eps_eps() <= 0.25 + 1e-9 && di.x0_x0() <= 1.0 + 1e-9);
        if let Ok(sp) = fi_twophoton_spatial(&s, m, &q) {
            prop_assert!(sp.is_positive_semidefinite(1e-12));
            prop_assert!(sp.eps_eps() >= binary.eps_eps() * (1.0 - 1e-6));
            prop_assert!(sp.eps_eps() <= 0.25 * (1.0 + 1e-6));
        }
    }
}
