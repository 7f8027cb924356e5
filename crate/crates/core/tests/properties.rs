//! Property tests for invariants that hold for every input.

use proptest::prelude::*;

use cc_core::adversarial::{combine, Verdict};
use cc_core::analysis::{cross_term_max, expected_join_matrix, join_matrix, min_eigenvalue, quadratic_form};
use cc_core::domain::{emd_exact, tv_distance, DiscreteDistribution, Domain, MetricSpace};
use cc_core::oracle::{check_universe, draw_random_clustering, generate_adversarial_clustering, induced_distribution, GenParams, GraphKind, UniverseTag};

fn weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, k).prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
}

fn dist(w: Vec<f64>) -> DiscreteDistribution {
    DiscreteDistribution::from_unnormalized(w).unwrap()
}

fn kind() -> impl Strategy<Value = GraphKind> {
    prop_oneof![Just(GraphKind::Path), Just(GraphKind::Cycle)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_weights_sum_to_one(w in weights(12)) {
        let d = dist(w);
        prop_assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(d.weights().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn tv_is_a_bounded_metric(a in weights(9), b in weights(9), c in weights(9)) {
        let (a, b, c) = (dist(a), dist(b), dist(c));
        let ab = tv_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - tv_distance(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!(ab <= tv_distance(&a, &c).unwrap() + tv_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!(tv_distance(&a, &a).unwrap() == 0.0);
    }

    // a coupling moves at most the TV mass, each unit across at most the diameter
    #[test]
    fn emd_between_zero_and_tv_times_diameter(a in weights(16), b in weights(16), p in prop_oneof![Just(1.0), Just(2.0)]) {
        let m = MetricSpace::lp(Domain::grid(4, 2).unwrap(), p).unwrap();
        let (a, b) = (dist(a), dist(b));
        let (emd, coupling) = emd_exact(&a, &b, &m).unwrap();
        let tv = tv_distance(&a, &b).unwrap();
        prop_assert!(emd >= -1e-9);
        prop_assert!(emd <= tv * m.diameter() + 1e-9);
        let mut rows = vec![0.0; 16];
        let mut cols = vec![0.0; 16];
        for &(i, j, w) in &coupling.entries {
            rows[i] += w;
            cols[j] += w;
        }
        for i in 0..16 {
            prop_assert!((rows[i] - a.weights()[i]).abs() < 1e-8);
            prop_assert!((cols[i] - b.weights()[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn induced_distribution_preserves_mass_and_shrinks_tv(a in weights(36), b in weights(36), cells in 1usize..10, seed in 0u64..1000) {
        let g = generate_adversarial_clustering(&UniverseTag::Boxes, &GenParams { n: 6, d: 2, cells, bits: 0 }, seed).unwrap();
        prop_assert!(check_universe(&UniverseTag::Boxes, &g).unwrap());
        let (a, b) = (dist(a), dist(b));
        let (ia, ib) = (induced_distribution(&a, &g).unwrap(), induced_distribution(&b, &g).unwrap());
        prop_assert!((ia.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(tv_distance(&ia, &ib).unwrap() <= tv_distance(&a, &b).unwrap() + 1e-12);
    }

    #[test]
    fn realized_join_matrix_is_an_equivalence(k in kind(), n in 2u32..40, rho in 0.05f64..0.95, seed in any::<u64>()) {
        let d = draw_random_clustering(k, n, rho, seed).unwrap();
        let j = join_matrix(&d);
        let n = n as usize;
        for a in 0..n {
            prop_assert!(j.get(a, a));
            for b in 0..n {
                prop_assert_eq!(j.get(a, b), j.get(b, a));
            }
        }
        // cells are contiguous runs: a joined pair is joined to everything on one arc between them
        for a in 0..n {
            for b in (a + 1)..n {
                if j.get(a, b) {
                    let inner = (a..=b).all(|x| j.get(a, x));
                    let outer = k == GraphKind::Cycle && (b..n).chain(0..=a).all(|x| j.get(a, x));
                    prop_assert!(inner || outer);
                }
            }
        }
    }

    #[test]
    fn expected_join_is_symmetric_and_positive_definite(k in kind(), n in 2usize..60, rho in 0.05f64..0.95) {
        let phi = expected_join_matrix(k, n, rho).unwrap();
        for i in 0..n {
            prop_assert!((phi.entry(i, i) - 1.0).abs() < 1e-15);
            for j in 0..n {
                prop_assert_eq!(phi.entry(i, j), phi.entry(j, i));
                prop_assert!(phi.entry(i, j) > 0.0 && phi.entry(i, j) <= 1.0);
            }
        }
        prop_assert!(min_eigenvalue(&phi).unwrap() > 0.0);
    }

    // bilinearity gives the decomposition around ν for any perturbation z
    #[test]
    fn quadratic_form_decomposes(k in kind(), w in weights(20), rho in 0.05f64..0.95) {
        let phi = expected_join_matrix(k, 20, rho).unwrap();
        let mu = dist(w);
        let nu = vec![0.05; 20];
        let z: Vec<f64> = mu.weights().iter().zip(&nu).map(|(a, b)| a - b).collect();
        let lhs = quadratic_form(&phi, mu.weights(), mu.weights());
        let rhs = quadratic_form(&phi, &nu, &nu) + 2.0 * quadratic_form(&phi, &nu, &z) + quadratic_form(&phi, &z, &z);
        prop_assert!((lhs - rhs).abs() < 1e-12);
        prop_assert!(quadratic_form(&phi, &z, &z) >= -1e-15);
    }

    #[test]
    fn cross_term_is_linear_in_delta(n in 4usize..80, rho in 0.05f64..0.95, delta in 1e-4f64..0.05) {
        let phi = expected_join_matrix(GraphKind::Path, n, rho).unwrap();
        let v = cross_term_max(&phi, delta);
        prop_assert!(v >= 0.0);
        prop_assert!((cross_term_max(&phi, 2.0 * delta) - 2.0 * v).abs() < 1e-12);
    }

    #[test]
    fn combine_is_order_free_and_respects_majorities(vs in prop::collection::vec(prop_oneof![Just(Verdict::Accept), Just(Verdict::Reject), Just(Verdict::ClusterReject)], 1..15)) {
        let v = combine(&vs);
        let mut rev = vs.clone();
        rev.reverse();
        prop_assert_eq!(v, combine(&rev));
        let count = |x: Verdict| vs.iter().filter(|&&y| y == x).count();
        prop_assert_eq!(v == Verdict::ClusterReject, 2 * count(Verdict::ClusterReject) > vs.len());
        if vs.iter().all(|&x| x == vs[0]) {
            prop_assert_eq!(v, vs[0]);
        }
    }
}
