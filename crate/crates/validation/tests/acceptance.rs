//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::time::Instant;

use potts_core::estimator::{mpl_limit_law, simulate_mpl_from_law};
use potts_core::free_energy::*;
use potts_core::limit_laws::{gen_normal_sample, GenNormalLaw};
use potts_core::metrics::*;
use potts_core::model::exchangeable::{
    all_configurations, configuration_log_prob, kernel_regression, regression_closed_form,
    transition_matrix,
};
use potts_core::model::*;
use potts_core::numerics::chi_square_sf;
use potts_core::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASE_PAIRS: [(u32, u32); 4] = [(2, 2), (3, 2), (2, 3), (4, 2)];

fn params(p: u32, q: u32, beta: f64, h: f64) -> ModelParams {
    ModelParams::new(p, q, beta, h).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn special(p: u32, q: u32) -> (ModelParams, Vec<f64>) {
    let sp = locate_special_points(p, q).unwrap()[0];
    (sp.params(p, q), x_profile(sp.s, q as usize))
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &(p, q) in &BASE_PAIRS {
        for &beta in &[0.3, 1.0, 2.5] {
            for &h in &[0.0, 0.2] {
                let pr = params(p, q, beta, h);
                for n in 1..=8u32 {
                    if (q as u64).pow(n) > 6561 {
                        continue;
                    }
                    let tv = total_variation(
                        &exact_magnetization_law(&pr, n).unwrap(),
                        &brute_force_law(&pr, n).unwrap(),
                    );
                    worst = worst.max(tv);
                    cases += 1;
                }
            }
        }
    }
    outcome(
        worst < 1e-12,
        format!("max TV {worst:.3e} over {cases} cases (< 1e-12)"),
    )
}

fn duality_fixed_point() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut duality, mut fixed, mut count) = (0.0f64, 0.0f64, 0);
    for &(p, q) in &BASE_PAIRS {
        for i in 0..100 {
            let h = if i % 4 == 0 {
                0.0
            } else {
                rng.random_range(0.0..1.5)
            };
            let pr = params(p, q, rng.random_range(0.05..3.0), h);
            for m in find_maximizers(&pr, DEFAULT_TIE_TOL).expanded {
                duality = duality.max((h_func(&m, &pr) + g_func(&m, &pr)).abs());
                fixed = fixed.max(fixed_point_residual(&m, &pr));
                count += 1;
            }
        }
    }
    outcome(
        duality < 1e-10 && fixed < 1e-10,
        format!("{count} maximizers: max |H+G| {duality:.3e}, max fixed-point residual {fixed:.3e} (< 1e-10)"),
    )
}

fn lambda_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut det_err = 0.0f64;
    let mut drawn = 0;
    while drawn < 50 {
        let (p, q) = BASE_PAIRS[drawn % BASE_PAIRS.len()];
        let pr = params(p, q, rng.random_range(0.1..3.0), rng.random_range(0.0..1.0));
        let set = find_maximizers(&pr, DEFAULT_TIE_TOL);
        let lam = lambda_matrix(&set.expanded[0], &pr).unwrap();
        let dense = lam.dense_det();
        det_err = det_err.max((lam.closed_form_det() - dense).abs() / dense.abs());
        drawn += 1;
    }
    let (mut lu, mut eig) = (0.0f64, 0.0f64);
    for &(p, q) in &[(2, 2), (2, 3), (4, 2)] {
        let (pr, m) = special(p, q);
        let u = null_direction(q as usize);
        let lam = lambda_matrix(&m, &pr).unwrap();
        lu = lu.max(lam.apply(&u).iter().fold(0.0f64, |a, v| a.max(v.abs())));
        eig = eig.max(
            reduced_quadratic_form(&m, &pr)
                .unwrap()
                .smallest_magnitude()
                .0
                .abs(),
        );
    }
    outcome(
        det_err < 1e-10 && lu < 1e-8 && eig < 1e-7,
        format!("det rel err {det_err:.3e} (< 1e-10), max ‖Λu‖∞ {lu:.3e} (< 1e-8), max |λ_min| {eig:.3e} (< 1e-7)"),
    )
}

fn stirling_check() -> Outcome {
    let ns = [50u32, 100, 200, 400, 800];
    let mut ratios = Vec::new();
    for &(p, beta, h) in &[(2u32, 0.5, 0.0), (3, 1.2, 0.3)] {
        let pr = params(p, 2, beta, h);
        for &v in &[0.2, 0.3, 0.5, 0.7] {
            let gaps: Vec<f64> = ns
                .iter()
                .map(|&n| {
                    let (e, a) = stirling_density_check(&[v, 1.0 - v], &pr, n).unwrap();
                    (e - a).abs()
                })
                .collect();
            ratios.extend(gaps.windows(2).map(|w| w[0] / w[1]));
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        lo >= 1.4 && hi <= 2.6,
        format!("doubling ratios in [{lo:.4}, {hi:.4}] (window [1.4, 2.6])"),
    )
}

fn regular_rate() -> Outcome {
    let ns: Vec<u32> = (1..=32).map(|k| 100 * k).collect();
    let opts = ExperimentOptions {
        expected: Some(Regime::Regular),
        ..Default::default()
    };
    let report = berry_esseen_experiment(&params(2, 2, 0.5, 0.0), &ns, &opts).unwrap();
    let slope = report.fitted_slope_with_log_correction().unwrap();
    let nsf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let rho = spearman_correlation(&nsf, report.distances()).unwrap();
    outcome(
        (-0.65..=-0.35).contains(&slope) && rho < 0.0,
        format!("log-corrected slope {slope:.4} (window [-0.65, -0.35]), raw slope {:.4}, Spearman {rho:.3} (< 0)", report.fitted_slope().unwrap()),
    )
}

fn special_i_rate() -> Outcome {
    let (pr, _) = special(2, 3);
    let ns = [200u32, 400, 800, 1600];
    let opts = ExperimentOptions {
        expected: Some(Regime::SpecialI),
        ..Default::default()
    };
    let report = berry_esseen_experiment(&pr, &ns, &opts).unwrap();
    let slope = report.fitted_slope().unwrap();
    outcome(
        (-0.40..=-0.12).contains(&slope),
        format!("(p,q)=(2,3) β={:.6} h={:.6}: Kolmogorov slope of T_N {slope:.4} (window [-0.40, -0.12]), d={:?}", pr.beta, pr.h, report.distances()),
    )
}

fn special_ii_rate() -> Outcome {
    let (pr, _) = special(4, 2);
    let ns = [200u32, 400, 800, 1600, 3200];
    let opts = ExperimentOptions {
        expected: Some(Regime::SpecialII),
        ..Default::default()
    };
    let report = berry_esseen_experiment(&pr, &ns, &opts).unwrap();
    let slope = report.fitted_slope().unwrap();
    let m = report.scale_moments.clone().unwrap();
    let (a, b) = (m[m.len() - 2], m[m.len() - 1]);
    let stable = (b - a).abs() / a < 0.10;
    outcome(
        (-0.30..=-0.07).contains(&slope) && stable,
        format!("Kolmogorov slope of F_N {slope:.4} (window [-0.30, -0.07]); E F^6 {a:.5} -> {b:.5} (within 10%: {stable})"),
    )
}

fn mean_bound() -> Outcome {
    let ns = [100u32, 200, 400, 800, 1600];
    let mut parts = Vec::new();
    let mut pass = true;
    for pr in [params(2, 2, 0.5, 0.2), params(3, 3, 0.4, 0.3)] {
        let r = mean_w_scaling_check(&pr, &ns).unwrap();
        let ratio = r.max() / r.min();
        pass &= ratio < 10.0 && r.max().is_finite();
        parts.push(format!(
            "(p,q,β,h)=({},{},{},{}) max/min {ratio:.3}",
            pr.p, pr.q, pr.beta, pr.h
        ));
    }
    outcome(pass, format!("{} (< 10)", parts.join("; ")))
}

fn critical_weights() -> Outcome {
    let pr = params(2, 2, 1.5, 0.0);
    let (mut asym, mut gap) = (0.0f64, 0.0f64);
    for &n in &[200u32, 400, 800] {
        let cw = critical_weights_check(&pr, n, None).unwrap();
        asym = asym.max((cw.balls[0].ball_mass - cw.balls[1].ball_mass).abs());
        gap = gap.max(cw.balls.iter().fold(0.0f64, |a, b| a.max(b.scaled_gap)));
    }
    let ns = [100u32, 200, 400, 800, 1600];
    let opts = ExperimentOptions {
        expected: Some(Regime::Critical),
        ..Default::default()
    };
    let report = berry_esseen_experiment(&pr, &ns, &opts).unwrap();
    let nsf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let rho = spearman_correlation(&nsf, report.distances()).unwrap();
    outcome(
        asym < 1e-12 && gap < 1.0 && rho < 0.0,
        format!("mass asymmetry {asym:.3e} (< 1e-12), max √N|mass − 1/2| {gap:.3e} (< 1), discrepancy Spearman {rho:.3} (< 0)"),
    )
}

fn mpl_distance(pr: &ModelParams, n: u32, replicates: usize, seed: u64) -> f64 {
    let law = exact_magnetization_law(pr, n).unwrap();
    let limit = mpl_limit_law(&law, None).unwrap();
    let sample = simulate_mpl_from_law(&law, replicates, seed).unwrap();
    let w = 1.0 / sample.sqrt_n_errors.len() as f64;
    let atoms = sort_atoms(sample.sqrt_n_errors.iter().map(|&e| (e, w)).collect());
    kolmogorov_distance_1d(&atoms, |x| limit.cdf(x))
}

fn mpl() -> Outcome {
    let bc = beta_c(2, 2, 1e-12).unwrap();
    let pr = params(2, 2, 1.5 * bc, 0.0);
    let d400 = mpl_distance(&pr, 400, 10_000, 10);
    let d100 = mpl_distance(&pr, 100, 10_000, 10);
    let d1600 = mpl_distance(&pr, 1600, 10_000, 10);
    outcome(
        d400 < 0.05 && d1600 < d100,
        format!("KS at N=400 {d400:.4} (< 0.05); N=100 {d100:.4} > N=1600 {d1600:.4}"),
    )
}

fn exchangeable_pair() -> Outcome {
    let (mut reg, mut bal) = (0.0f64, 0.0f64);
    for pr in [params(2, 2, 0.9, 0.2), params(2, 2, 1.4, 0.0)] {
        let n = 4;
        let (states, kernel) = transition_matrix(&pr, n).unwrap();
        let log_z = exact_magnetization_law(&pr, n as u32)
            .unwrap()
            .log_z()
            .unwrap();
        let pi: Vec<f64> = states
            .iter()
            .map(|s| configuration_log_prob(s, &pr, log_z).exp())
            .collect();
        for i in 0..states.len() {
            for j in 0..states.len() {
                bal = bal.max((pi[i] * kernel[(i, j)] - pi[j] * kernel[(j, i)]).abs());
            }
        }
        let center = find_maximizers(&pr, DEFAULT_TIE_TOL).expanded[0].clone();
        for cfg in all_configurations(n, 2).unwrap() {
            let a = kernel_regression(&cfg, &pr, &center);
            let b = regression_closed_form(&cfg, &pr, &center);
            reg = reg.max(
                a.iter()
                    .zip(&b)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())),
            );
        }
    }
    outcome(
        reg < 1e-12 && bal < 1e-12,
        format!("regression gap {reg:.3e}, detailed-balance gap {bal:.3e} (< 1e-12)"),
    )
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        tol,
        50,
    )
}

fn limit_internals() -> Outcome {
    let mut quad = 0.0f64;
    let mut min_p = 1.0f64;
    for &(k, m) in &[(4u32, 0.6), (6, 0.08)] {
        let law = GenNormalLaw::new(k, m).unwrap();
        let kernel = |x: f64| (-x.abs().powi(k as i32) / (k as f64 * m)).exp();
        let scale = m.powf(1.0 / k as f64);
        let half = simpson(
            &kernel,
            0.0,
            (k as f64 * m * 60.0).powf(1.0 / k as f64),
            1e-15,
        );
        for i in 0..100 {
            let x = scale * (-4.0 + 8.0 * i as f64 / 99.0);
            let part = simpson(&kernel, 0.0, x.abs(), 1e-15) / (2.0 * half);
            let oracle = if x >= 0.0 { 0.5 + part } else { 0.5 - part };
            quad = quad.max((law.cdf(x) - oracle).abs());
        }
        let draws = 1_000_000;
        let edges: Vec<f64> = (0..=50)
            .map(|i| scale * (-4.0 + 8.0 * i as f64 / 50.0))
            .collect();
        let mut observed = vec![0.0; 52];
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        for _ in 0..draws {
            let x = gen_normal_sample(&law, &mut rng);
            observed[edges.partition_point(|&e| e <= x)] += 1.0;
        }
        let mut cdf = vec![0.0];
        cdf.extend(edges.iter().map(|&e| law.cdf(e)));
        cdf.push(1.0);
        let (mut chi2, mut cells) = (0.0, 0);
        for (o, w) in observed.iter().zip(cdf.windows(2)) {
            let e = (w[1] - w[0]) * draws as f64;
            if e > 5.0 {
                chi2 += (o - e) * (o - e) / e;
                cells += 1;
            }
        }
        min_p = min_p.min(chi_square_sf((cells - 1) as f64, chi2));
    }
    outcome(
        quad < 1e-10 && min_p > 1e-3,
        format!("max |cdf − quadrature| {quad:.3e} (< 1e-10), min χ² p-value {min_p:.4} (> 0.001)"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("oracle equivalence", oracle_equivalence),
        ("duality and fixed point", duality_fixed_point),
        ("Λ properties", lambda_properties),
        ("Stirling check", stirling_check),
        ("regular rate", regular_rate),
        ("special-I rate", special_i_rate),
        ("special-II rate", special_ii_rate),
        ("mean bound", mean_bound),
        ("critical weights", critical_weights),
        ("MPL", mpl),
        ("exchangeable pair", exchangeable_pair),
        ("limit-law internals", limit_internals),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{secs:.1} s]",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
