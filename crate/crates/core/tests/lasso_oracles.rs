use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use subweibull_core::covariance::gram;
use subweibull_core::lasso::{
    cone_membership, deterministic_error_bound, kkt_residual, objective, solve, LambdaPolicy, LassoProblem,
};
use subweibull_core::linalg::{min_eigenvalue, spectral_norm_sym};
use subweibull_core::samplers::{draw_matrix, make_regression, RngStream, ScalarLaw, VectorLaw};

/// Accelerated projected gradient on the split problem `β = u − v`, `u, v ≥ 0`.
fn fista(problem: &LassoProblem, lambda: f64, iters: usize) -> DVector<f64> {
    let p = problem.p();
    let g = gram(&problem.x);
    let step = 1.0 / (2.0 * spectral_norm_sym(&g).unwrap());
    let (mut u, mut v) = (DVector::<f64>::zeros(p), DVector::<f64>::zeros(p));
    let (mut yu, mut yv) = (u.clone(), v.clone());
    let mut t = 1.0f64;
    for _ in 0..iters {
        let r = &problem.y - &problem.x.values * (&yu - &yv);
        let grad = -problem.correlations(&r);
        let nu = (&yu - (&grad + DVector::from_element(p, lambda)) * step).map(|a| a.max(0.0));
        let nv = (&yv - (-&grad + DVector::from_element(p, lambda)) * step).map(|a| a.max(0.0));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        yu = &nu + (&nu - &u) * mom;
        yv = &nv + (&nv - &v) * mom;
        u = nu;
        v = nv;
        t = t_next;
    }
    u - v
}

fn random_problem(n: usize, p: usize, seed: u64) -> (LassoProblem, DVector<f64>, DVector<f64>) {
    let design = VectorLaw::IidCoordinates { law: ScalarLaw::SymmetricWeibull { alpha: 1.0 }, p };
    let mut beta0 = DVector::zeros(p);
    for j in 0..p.min(3) {
        beta0[j] = 1.0 - 0.5 * j as f64;
    }
    let reg = make_regression(&design, &beta0, &ScalarLaw::Gaussian { sigma: 1.0 }, n, None, &RngStream::new(seed, 0))
        .unwrap();
    let problem = LassoProblem::new(reg.x, reg.y).unwrap();
    (problem, beta0, reg.eps)
}

#[test]
fn coordinate_descent_matches_fista() {
    for seed in 0..5 {
        let (problem, _, _) = random_problem(40, 8, seed);
        for &lambda in &[0.05, 0.2, 0.6] {
            let fit = solve(&problem, lambda, 1e-12, 100_000).unwrap();
            assert!(fit.converged);
            let oracle = fista(&problem, lambda, 20_000);
            let gap = (&fit.beta - &oracle).amax();
            assert!(gap < 1e-6, "seed {seed} lambda {lambda}: {gap}");
            assert!(objective(&problem, &fit.beta, lambda) <= objective(&problem, &oracle, lambda) + 1e-12);
        }
    }
}

#[test]
fn large_lambda_gives_zero() {
    let (problem, _, _) = random_problem(40, 8, 9);
    let lmax = problem.correlations(&problem.y).amax();
    let fit = solve(&problem, lmax * 1.0001, 1e-10, 1000).unwrap();
    assert_eq!(fit.beta, DVector::zeros(8));
    assert_eq!(fit.iterations, 0);
}

#[test]
fn orthogonal_design_is_soft_thresholding() {
    // XᵀX/n = I, so β̂ = S_λ(Xᵀy/n).
    let n = 4;
    let x = DMatrix::from_row_slice(n, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
    let y = DVector::from_vec(vec![3.0, 1.0, -1.0, 0.5]);
    let problem = LassoProblem::new(subweibull_core::samplers::DataMatrix::new(x).unwrap(), y).unwrap();
    let z = problem.correlations(&problem.y);
    let fit = solve(&problem, 0.3, 1e-12, 100).unwrap();
    for j in 0..2 {
        let expect = z[j].signum() * (z[j].abs() - 0.3).max(0.0);
        assert!((fit.beta[j] - expect).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn oracle_lambda_keeps_error_in_cone(seed in 0u64..10_000, n in 30usize..80) {
        let p = 12;
        let (problem, beta0, eps) = random_problem(n, p, seed);
        let lambda = LambdaPolicy::EmpiricalOracle(eps).resolve(&problem).unwrap();
        let fit = solve(&problem, lambda, 1e-11, 100_000).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(kkt_residual(&problem, &fit.beta, lambda) <= 1e-9);
        let nu = &fit.beta - &beta0;
        let s: Vec<usize> = (0..3).collect();
        prop_assert!(cone_membership(&nu, &s, &beta0));
        let gamma = min_eigenvalue(&gram(&problem.x)).unwrap();
        if gamma > 0.0 {
            prop_assert!(nu.norm() <= deterministic_error_bound(3, lambda, gamma).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn objective_trace_never_increases(seed in 0u64..10_000, lambda in 0.01f64..1.0) {
        let (problem, _, _) = random_problem(25, 40, seed);
        let fit = solve(&problem, lambda, 1e-9, 10_000).unwrap();
        prop_assert!(fit.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)));
    }
}

#[test]
fn draws_feed_the_solver_deterministically() {
    let law = VectorLaw::IidCoordinates { law: ScalarLaw::Gaussian { sigma: 1.0 }, p: 5 };
    let x = draw_matrix(&law, 30, &RngStream::new(3, 3)).unwrap();
    let y = DVector::from_fn(30, |i, _| x.values[(i, 0)]);
    let problem = LassoProblem::new(x, y).unwrap();
    let a = solve(&problem, 0.1, 1e-10, 1000).unwrap();
    let b = solve(&problem, 0.1, 1e-10, 1000).unwrap();
    assert_eq!(a, b);
}
