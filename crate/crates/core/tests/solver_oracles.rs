mod common;

use common::*;
use jointcsit_core::svp::{newton_direction, solve_with_observer};
use jointcsit_core::{cost, gradient, linalg, newton_solution, optimal_step, svp, CMatrix, Complex64, SvpConfig, SvpMode};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn cost_matches_explicit_kronecker() {
    let mut r = rng(1);
    let (h, phi, y) = (random_matrix(&mut r, 3, 4), random_matrix(&mut r, 4, 5), random_matrix(&mut r, 3, 5));
    let expected = vec_cost(&psi(&phi, 3), &vec_of(&h), &vec_of(&y));
    let got = cost(&h, &phi, &y).unwrap();
    assert!((got - expected).abs() <= 1e-12 * expected);
}

#[test]
fn gradient_matches_explicit_kronecker() {
    let mut r = rng(2);
    let (h, phi, y) = (random_matrix(&mut r, 3, 4), random_matrix(&mut r, 4, 5), random_matrix(&mut r, 3, 5));
    let expected = unvec_of(&vec_gradient(&psi(&phi, 3), &vec_of(&h), &vec_of(&y)), 3, 4);
    assert!(rel(&gradient(&h, &phi, &y).unwrap(), &expected) < 1e-12);
}

#[test]
fn gradient_matches_finite_differences_on_real_data() {
    let mut r = rng(3);
    let (h, phi, y) = (random_real_matrix(&mut r, 3, 4), random_real_matrix(&mut r, 4, 5), random_real_matrix(&mut r, 3, 5));
    let fd = finite_difference_gradient(&h, 1e-6, |x| cost(x, &phi, &y).unwrap());
    let g = gradient(&h, &phi, &y).unwrap();
    assert!(rel(&g, &fd) < 1e-5, "{}", rel(&g, &fd));
}

#[test]
fn real_instances_reduce_to_transpose_formulas() {
    // with real data Psi^H = Psi^T, so the gradient is 2 (H Phi - Y) Phi^T and real
    let mut r = rng(4);
    let (h, phi, y) = (random_real_matrix(&mut r, 2, 3), random_real_matrix(&mut r, 3, 4), random_real_matrix(&mut r, 2, 4));
    let g = gradient(&h, &phi, &y).unwrap();
    let transpose_form = (&h * &phi - &y) * phi.transpose() * Complex64::from(2.0);
    assert!(rel(&g, &transpose_form) < 1e-14);
    assert!(g.iter().all(|z| z.im == 0.0));
    let p = psi(&phi, 2);
    let d = random_real_matrix(&mut r, 2, 3);
    let (hv, dv, yv) = (vec_of(&h), vec_of(&d), vec_of(&y));
    let gt = (p.transpose() * (&p * &hv - &yv)) * Complex64::from(2.0);
    let pd = &p * &dv;
    let transpose_step = -(gt.transpose() * &dv)[(0, 0)].re / (2.0 * pd.dotc(&pd).re);
    let step = optimal_step(&h, &d, &phi, &y).unwrap();
    assert!((step - transpose_step).abs() < 1e-12 * transpose_step.abs());
}

#[test]
fn optimal_step_matches_numerical_line_search() {
    let mut r = rng(5);
    for _ in 0..10 {
        let (k, m, t) = (r.random_range(1..5), r.random_range(1..6), r.random_range(1..8));
        let (h, phi, y) = (random_matrix(&mut r, k, m), random_matrix(&mut r, m, t), random_matrix(&mut r, k, t));
        for d in [gradient(&h, &phi, &y).unwrap(), random_matrix(&mut r, k, m)] {
            let step = optimal_step(&h, &d, &phi, &y).unwrap();
            let oracle = QuadraticLine::new(&h, &d, &phi, &y).minimize();
            assert!((step - oracle).abs() <= 1e-8 * oracle.abs().max(1e-12), "{step} vs {oracle}");
        }
    }
}

#[test]
fn newton_solution_matches_normal_equations() {
    let mut r = rng(6);
    let (phi, y) = (random_matrix(&mut r, 2, 3), random_matrix(&mut r, 2, 3));
    let expected = right_least_squares(&y, &phi);
    assert!(rel(&newton_solution(&y, &phi).unwrap(), &expected) < 1e-12);
}

#[test]
fn newton_direction_has_unit_step() {
    let mut r = rng(7);
    for _ in 0..20 {
        let (k, m) = (r.random_range(1..7), r.random_range(1..9));
        let t = m + r.random_range(0..5);
        let (h, phi, y) = (random_matrix(&mut r, k, m), random_matrix(&mut r, m, t), random_matrix(&mut r, k, t));
        let d = newton_direction(&h, &phi, &y).unwrap();
        let step = optimal_step(&h, &d, &phi, &y).unwrap();
        assert!((step + 1.0).abs() < 1e-9, "{step}");
    }
}

#[test]
fn svp_is_eckart_young_optimal_on_diagonal() {
    let d = [3.0, 2.0, 1.0];
    let h = CMatrix::from_fn(3, 3, |i, j| if i == j { Complex64::from(d[i]) } else { Complex64::from(0.0) });
    let projected = svp(&h, 2).unwrap();
    // exhaustive rank-2 candidates from the exact SVD: keep any two of the three triplets
    let mut best = f64::INFINITY;
    for drop in 0..3 {
        let cand = CMatrix::from_fn(3, 3, |i, j| if i == j && i != drop { Complex64::from(d[i]) } else { Complex64::from(0.0) });
        best = best.min(fro(&(&h - cand)));
    }
    assert!((fro(&(&h - &projected)) - best).abs() < 1e-14);
    assert!((best - 1.0).abs() < 1e-15);
}

#[test]
fn hybrid_first_iterate_ignores_initialization() {
    let mut r = rng(8);
    let (phi, y) = (random_matrix(&mut r, 6, 9), random_matrix(&mut r, 4, 9));
    let cfg = SvpConfig::new(2, 1, SvpMode::Hybrid);
    let from_zero = jointcsit_core::solve(&y, &phi, &cfg, None).unwrap().0;
    let init = random_matrix(&mut r, 4, 6) * Complex64::new(30.0, -4.0);
    let from_init = jointcsit_core::solve(&y, &phi, &cfg, Some(&init)).unwrap().0;
    assert!(rel(&from_init, &from_zero) < 1e-10);
}

#[test]
fn noiseless_low_rank_hybrid_is_exact_after_one_iteration() {
    let mut r = rng(9);
    let (k, m, p) = (8, 12, 3);
    let h = random_matrix(&mut r, k, p) * random_matrix(&mut r, p, m);
    let phi = random_matrix(&mut r, m, m);
    let y = &h * &phi;
    let mut first = None;
    solve_with_observer(&y, &phi, &SvpConfig::new(p, 5, SvpMode::Hybrid), None, |v| {
        if v.iteration == 1 {
            first = Some(v.projected.clone());
        }
    })
    .unwrap();
    assert!(rel(&first.unwrap(), &h) < 1e-8);
}

#[test]
fn line_search_never_increases_cost() {
    let mut r = rng(10);
    let (phi, y) = (random_matrix(&mut r, 10, 14), random_matrix(&mut r, 6, 14));
    for mode in [SvpMode::Gradient, SvpMode::Hybrid] {
        let mut prev = cost(&CMatrix::zeros(6, 10), &phi, &y).unwrap();
        solve_with_observer(&y, &phi, &SvpConfig::new(3, 60, mode), None, |v| {
            let pre = cost(v.iterate, &phi, &y).unwrap();
            assert!(pre <= prev + 1e-12 * prev.max(1.0), "{mode} iteration {}: {pre} > {prev}", v.iteration);
            prev = v.cost;
        })
        .unwrap();
    }
}

fn rank_q_matrix(seed: u64, k: usize, m: usize, q: usize) -> CMatrix {
    let mut r = rng(seed);
    random_matrix(&mut r, k, q) * random_matrix(&mut r, q, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_beats_random_rank_q_candidates(seed in any::<u64>(), k in 2usize..7, m in 2usize..7, q in 1usize..3) {
        let q = q.min(k.min(m));
        let h = random_matrix(&mut rng(seed), k, m);
        let err = fro(&(&h - svp(&h, q).unwrap()));
        for s in 0..8 {
            let b = rank_q_matrix(seed.wrapping_add(s + 1), k, m, q);
            prop_assert!(err <= fro(&(&h - b)) + 1e-12);
        }
    }

    #[test]
    fn solver_output_respects_rank(seed in any::<u64>(), q in 1usize..4, mode_idx in 0usize..3) {
        let mode = [SvpMode::Gradient, SvpMode::Newton, SvpMode::Hybrid][mode_idx];
        let mut r = rng(seed);
        let (phi, y) = (random_matrix(&mut r, 5, 7), random_matrix(&mut r, 4, 7));
        let (h, state) = jointcsit_core::solve(&y, &phi, &SvpConfig::new(q, 8, mode), None).unwrap();
        prop_assert!(linalg::numerical_rank(&h).unwrap() <= q);
        prop_assert!(state.cost_trace.iter().all(|c| c.is_finite() && *c >= 0.0));
    }

    #[test]
    fn kronecker_identities_hold(seed in any::<u64>(), k in 1usize..5, m in 1usize..5, t in 1usize..6) {
        let mut r = rng(seed);
        let (h, phi, y, d) = (random_matrix(&mut r, k, m), random_matrix(&mut r, m, t), random_matrix(&mut r, k, t), random_matrix(&mut r, k, m));
        let p = psi(&phi, k);
        let (hv, yv) = (vec_of(&h), vec_of(&y));
        let c = vec_cost(&p, &hv, &yv);
        prop_assert!((cost(&h, &phi, &y).unwrap() - c).abs() <= 1e-10 * c.max(1e-300));
        let g = unvec_of(&vec_gradient(&p, &hv, &yv), k, m);
        prop_assert!(rel(&gradient(&h, &phi, &y).unwrap(), &g) <= 1e-10);
        let s = vec_step(&p, &hv, &vec_of(&d), &yv);
        prop_assert!((optimal_step(&h, &d, &phi, &y).unwrap() - s).abs() <= 1e-10 * s.abs());
    }
}
