use nalgebra::SymmetricEigen;
use potts_core::estimator::{score, score_beta_derivative};
use potts_core::free_energy::*;
use potts_core::limit_laws::*;
use potts_core::metrics::*;
use potts_core::model::*;
use potts_core::ModelParams;
use proptest::prelude::*;

fn simplex(raw: Vec<f64>) -> Vec<f64> {
    let t: f64 = raw.iter().sum();
    raw.iter().map(|v| v / t).collect()
}

fn small_model() -> impl Strategy<Value = (ModelParams, u32)> {
    (
        2u32..=4,
        2u32..=3,
        0.01f64..3.0,
        prop_oneof![Just(0.0), 0.0f64..1.0],
    )
        .prop_flat_map(|(p, q, b, h)| {
            let max_n = if q == 2 { 10 } else { 7 };
            (Just(ModelParams::new(p, q, b, h).unwrap()), 1u32..=max_n)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_law_matches_brute_force((params, n) in small_model()) {
        let exact = exact_magnetization_law(&params, n).unwrap();
        let brute = brute_force_law(&params, n).unwrap();
        prop_assert!(total_variation(&exact, &brute) < 1e-12);
    }

    #[test]
    fn exact_law_is_normalized(p in 2u32..=5, q in 2u32..=4, beta in 0.01f64..4.0, h in 0.0f64..2.0, n in 1u32..=120) {
        let law = exact_magnetization_law(&ModelParams::new(p, q, beta, h).unwrap(), n).unwrap();
        prop_assert!((law.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(law.log_z().unwrap().is_finite());
    }

    #[test]
    fn centered_covariance_is_psd_on_zero_sum(q in 2u32..=4, beta in 0.01f64..2.0, h in 0.0f64..1.0, n in 2u32..=40,
                                              c in proptest::collection::vec(0.05f64..1.0, 4)) {
        let law = exact_magnetization_law(&ModelParams::new(2, q, beta, h).unwrap(), n).unwrap();
        let center = simplex(c[..q as usize].to_vec());
        let cov = centered_stats(&law, &center).cov_w;
        let scale = cov.diagonal().iter().fold(1e-300f64, |a, v| a.max(v.abs()));
        prop_assert!((&cov - cov.transpose()).amax() <= 1e-14 * scale);
        for r in 0..q as usize {
            prop_assert!(cov.row(r).sum().abs() < 1e-10 * scale.max(1.0));
        }
        let eig = SymmetricEigen::new(cov.clone());
        prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10));
    }

    #[test]
    fn conditional_law_relabels(counts in proptest::collection::vec(0u32..20, 2..=5), beta in 0.01f64..3.0,
                                p in 2u32..=4, shift in 1usize..5) {
        let q = counts.len();
        let n = counts.iter().sum::<u32>() as usize + 1;
        let params = ModelParams::new(p, q as u32, beta, 0.0).unwrap();
        let probs = conditional_color_distribution(&counts, &params, n);
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let mut rotated = counts.clone();
        rotated.rotate_left(shift % q);
        let mut expected = probs.clone();
        expected.rotate_left(shift % q);
        let got = conditional_color_distribution(&rotated, &params, n);
        for (a, b) in got.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn maximizers_satisfy_duality(p in 2u32..=4, q in 2u32..=4, beta in 0.05f64..3.0, h in 0.0f64..1.0) {
        let params = ModelParams::new(p, q, beta, h).unwrap();
        for m in find_maximizers(&params, DEFAULT_TIE_TOL).expanded {
            prop_assert!((h_func(&m, &params) + g_func(&m, &params)).abs() < 1e-10);
            prop_assert!(fixed_point_residual(&m, &params) < 1e-10);
            let g = grad_g(&m, &params).unwrap();
            prop_assert!(g.iter().all(|v| v.abs() < 1e-8), "{:?}", g);
        }
    }

    #[test]
    fn gen_normal_cdf_is_a_cdf(shape in prop_oneof![Just(4u32), Just(6u32)], moment in 0.01f64..10.0,
                               a in -6.0f64..6.0, b in -6.0f64..6.0) {
        let law = GenNormalLaw::new(shape, moment).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (fl, fh) = (gen_normal_cdf(lo, &law), gen_normal_cdf(hi, &law));
        prop_assert!(fl <= fh);
        prop_assert!((0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fh));
        prop_assert!((gen_normal_cdf(-a, &law) + gen_normal_cdf(a, &law) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixture_weights_permute(s in proptest::collection::vec(0.05f64..0.9, 2..=5), beta in 0.5f64..3.0, rot in 1usize..5) {
        let params = ModelParams::new(2, 3, beta, 0.0).unwrap();
        let profiles: Vec<_> = s.iter().map(|&v| StationaryProfile::at(v, &params)).collect();
        prop_assume!(profiles.iter().all(|p| p.f2.abs() > 1e-6));
        let w = mixture_weights(&profiles, &params, DEFAULT_TOL_ZERO).unwrap();
        let mut rotated = profiles.clone();
        rotated.rotate_left(rot % profiles.len());
        let mut expected = w.clone();
        expected.rotate_left(rot % profiles.len());
        let got = mixture_weights(&rotated, &params, DEFAULT_TOL_ZERO).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn tv_decomposition_round_trips(x in proptest::collection::vec(0.01f64..1.0, 2..=5),
                                    m in proptest::collection::vec(0.01f64..1.0, 5), n in 1u32..100_000) {
        let q = x.len();
        let x = simplex(x);
        let m = simplex(m[..q].to_vec());
        let dec = decompose_tv(&x, &m, n);
        prop_assert_eq!(dec.v[0], 0.0);
        for (a, b) in dec.recompose(&m, n).iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn score_is_permutation_invariant_and_decreasing(x in proptest::collection::vec(0.01f64..1.0, 2..=5),
                                                    p in 2u32..=4, beta in 0.01f64..10.0, rot in 1usize..5) {
        let x = simplex(x);
        let mut y = x.clone();
        y.rotate_left(rot % x.len());
        prop_assert!((score(&x, p, beta) - score(&y, p, beta)).abs() < 1e-14);
        prop_assert!(score_beta_derivative(&x, p, beta) <= 0.0);
    }

    #[test]
    fn discrete_kolmogorov_symmetry_and_triangle(w in proptest::collection::vec((0usize..12, 0.01f64..1.0), 1..10),
                                                 v in proptest::collection::vec((0usize..12, 0.01f64..1.0), 1..10),
                                                 u in proptest::collection::vec((0usize..12, 0.01f64..1.0), 1..10)) {
        let build = |raw: &[(usize, f64)]| {
            let total: f64 = raw.iter().map(|a| a.1).sum();
            sort_atoms(raw.iter().map(|&(k, p)| (k as f64 * 0.25 - 1.0, p / total)).collect())
        };
        let (a, b, c) = (build(&w), build(&v), build(&u));
        let ab = kolmogorov_distance_discrete(&a, &b);
        prop_assert_eq!(ab, kolmogorov_distance_discrete(&b, &a));
        prop_assert!(ab <= kolmogorov_distance_discrete(&a, &c) + kolmogorov_distance_discrete(&c, &b) + 1e-15);
    }

    #[test]
    fn halfspace_ignores_all_ones(q in 2u32..=4, beta in 0.01f64..1.5, h in 0.0f64..0.5, n in 5u32..=30) {
        let law = exact_magnetization_law(&ModelParams::new(2, q, beta, h).unwrap(), n).unwrap();
        let m = vec![1.0 / q as f64; q as usize];
        let limit = GaussianLimit::new(centered_stats(&law, &m).cov_w).unwrap();
        let dirs = default_directions(q as usize);
        let mut more = dirs.clone();
        more.push(vec![1.0; q as usize]);
        prop_assert_eq!(halfspace_discrepancy(&law, &m, &limit, &dirs), halfspace_discrepancy(&law, &m, &limit, &more));
    }

    #[test]
    fn rate_fit_recovers_planted_slopes(slope in -1.5f64..-0.05, c in 0.01f64..100.0, start in 2u32..200, k in 4usize..8) {
        let ns: Vec<u32> = (0..k).map(|i| start << i).collect();
        let d: Vec<f64> = ns.iter().map(|&n| c * (n as f64).powf(slope)).collect();
        prop_assert!((rate_fit(&ns, &d).unwrap().slope - slope).abs() < 1e-12);
        let dl: Vec<f64> = ns.iter().map(|&n| c * (n as f64).ln() * (n as f64).powf(slope)).collect();
        prop_assert!((rate_fit(&ns, &dl).unwrap().slope_with_log_correction - slope).abs() < 1e-12);
    }
}
