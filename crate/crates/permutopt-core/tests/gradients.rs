//! Analytic gradients against independent oracles: central finite
//! differences, brute-force grid search, and closed-form distribution
//! moments.

use permutopt_core::numkit::{l2_norm, SeededRng};
use permutopt_core::problems::{
    gen_synthetic_matrix, DnmfProblem, DomainBox, LogisticProblem, MultiWellProblem,
    NoisyGradientWrapper, Objective, QuadraticProblem,
};

/// Independent oracle: central finite differences of the loss.
fn central_diff(problem: &dyn Objective, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (problem.loss(&plus) - problem.loss(&minus)) / (2.0 * h)
        })
        .collect()
}

fn relative_error(analytic: &[f64], oracle: &[f64]) -> f64 {
    let diff: Vec<f64> = analytic.iter().zip(oracle).map(|(a, b)| a - b).collect();
    l2_norm(&diff) / l2_norm(analytic).max(1e-30)
}

/// Parameter point with every coordinate bounded away from the ReLU and
/// absolute-value kinks, so the loss is smooth in an `h`-neighbourhood.
fn smooth_dnmf_point(problem: &DnmfProblem, rng: &mut SeededRng) -> Vec<f64> {
    (0..problem.dim()).map(|_| rng.range_f64(0.1, 0.9)).collect()
}

#[test]
fn dnmf_gradient_matches_finite_differences() {
    let s = gen_synthetic_matrix(8, 6, 2, 17, 0.02).unwrap();
    let problem = DnmfProblem::new(s, 2, 2, 0.01).unwrap();
    let mut rng = SeededRng::new(100);
    for _ in 0..20 {
        let x = smooth_dnmf_point(&problem, &mut rng);
        let analytic = problem.gradient(&x, 1);
        let oracle = central_diff(&problem, &x, 1e-6);
        let err = relative_error(&analytic, &oracle);
        assert!(err <= 1e-5, "relative error {err}");
    }
}

#[test]
fn dnmf_component_gradients_match_finite_differences_of_component_loss() {
    // The column components are defined through their gradients; check the
    // mean against the full finite-difference oracle.
    let s = gen_synthetic_matrix(6, 5, 2, 23, 0.0).unwrap();
    let problem = DnmfProblem::new(s, 2, 2, 0.01).unwrap();
    let mut rng = SeededRng::new(7);
    let x = smooth_dnmf_point(&problem, &mut rng);
    let n = problem.component_count() as f64;
    let mut mean = vec![0.0; problem.dim()];
    for j in 0..problem.component_count() {
        for (m, g) in mean.iter_mut().zip(problem.component_gradient(&x, j, 1)) {
            *m += g / n;
        }
    }
    let oracle = central_diff(&problem, &x, 1e-6);
    assert!(relative_error(&mean, &oracle) <= 1e-5);
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let problem = LogisticProblem::synthetic(60, 8, 19, 0.01).unwrap();
    let mut rng = SeededRng::new(4);
    for _ in 0..20 {
        let w: Vec<f64> = (0..8).map(|_| rng.range_f64(-1.0, 1.0)).collect();
        let analytic = problem.gradient(&w, 1);
        let oracle = central_diff(&problem, &w, 1e-6);
        let err = relative_error(&analytic, &oracle);
        assert!(err <= 1e-6, "relative error {err}");
    }
}

#[test]
fn quadratic_gradient_matches_finite_differences() {
    let problem = QuadraticProblem::seeded(5, 2).unwrap();
    let mut rng = SeededRng::new(9);
    let x: Vec<f64> = (0..5).map(|_| rng.range_f64(-1.0, 1.0)).collect();
    let analytic = problem.gradient(&x, 1);
    let oracle = central_diff(&problem, &x, 1e-6);
    assert!(relative_error(&analytic, &oracle) <= 1e-9);
}

fn escape_wells() -> MultiWellProblem {
    MultiWellProblem::new(
        vec![0.0, 4.0],
        vec![4.0, 0.0],
        vec![1.0, 1.0],
        DomainBox::cube(2, -1.0, 5.0).unwrap(),
        None,
    )
    .unwrap()
}

#[test]
fn multiwell_optimum_matches_grid_search() {
    // Brute-force oracle over the whole 2-d box at 1e-3 resolution, with the
    // objective written out independently of the implementation.
    let problem = escape_wells();
    let oracle_term = |u: f64, a: f64, b: f64, c: f64| (u - a).abs().min((u - b).abs() + c);
    let steps = 6000usize;
    let width = 6.0 / steps as f64;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=steps {
        let u = -1.0 + i as f64 * width;
        let fu = oracle_term(u, 0.0, 4.0, 1.0);
        for j in 0..=steps {
            let v = -1.0 + j as f64 * width;
            let f = fu + oracle_term(v, 4.0, 0.0, 1.0);
            if f < best.0 {
                best = (f, u, v);
            }
        }
    }
    let stored = problem.global_optimum();
    assert!((best.1 - stored[0]).abs() <= width, "u* {} vs {}", best.1, stored[0]);
    assert!((best.2 - stored[1]).abs() <= width, "v* {} vs {}", best.2, stored[1]);
    assert!((best.0 - problem.global_value()).abs() <= 2.0 * width);
}

#[test]
fn multiwell_is_sqrt_d_lipschitz() {
    let problem = escape_wells();
    let bound = libm::sqrt(2.0);
    let mut rng = SeededRng::new(55);
    let domain = problem.domain();
    for _ in 0..10_000 {
        let x = domain.sample(&mut rng);
        let y = domain.sample(&mut rng);
        let dist: f64 = l2_norm(&[x[0] - y[0], x[1] - y[1]]);
        let df = (problem.loss(&x) - problem.loss(&y)).abs();
        assert!(df <= bound * dist * (1.0 + 1e-12), "{df} vs {dist}");
    }
}

#[test]
fn injected_noise_concentrates_at_chi_mean() {
    // E||noise|| for scale * N(0, I_D) is scale * sqrt(2) * G((D+1)/2) / G(D/2).
    let d = 64usize;
    let scale = 0.1;
    let inner = Box::new(QuadraticProblem::seeded(d, 1).unwrap());
    let wrapper = NoisyGradientWrapper::new(inner, 10, scale, 1234).unwrap();
    let x = vec![0.25; d];
    let clean = wrapper.noisy_grad(7, &x);
    let mut total = 0.0;
    let draws = 10_000usize;
    for t in 0..draws {
        let noisy = wrapper.noisy_grad((t + 1) * 10, &x);
        let noise: Vec<f64> = noisy.iter().zip(&clean).map(|(a, b)| a - b).collect();
        total += l2_norm(&noise);
    }
    let mean = total / draws as f64;
    let expected = scale
        * libm::sqrt(2.0)
        * libm::exp(libm::lgamma((d as f64 + 1.0) / 2.0) - libm::lgamma(d as f64 / 2.0));
    assert!(
        (mean - expected).abs() / expected < 0.01,
        "mean {mean} vs chi mean {expected}"
    );
    // And the loose scaling law the chi mean approximates.
    assert!((mean - scale * libm::sqrt(d as f64)).abs() / (scale * libm::sqrt(d as f64)) < 0.02);
}
