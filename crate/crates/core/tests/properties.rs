use proptest::prelude::*;
use qcrb::helstrom::{self, ObservableVector};
use qcrb::holevo;
use qcrb::linalg::{self, CMatrix, RMatrix, C64};
use qcrb::model::{self, CostMatrix};
use qcrb::sdp::{self, SolverOptions};

fn hermitian(d: usize, entries: &[f64]) -> CMatrix {
    let m = CMatrix::from_fn(d, d, |i, j| C64::new(entries[2 * (i * d + j)], entries[2 * (i * d + j) + 1]));
    linalg::hermitize(&m)
}

fn model_case() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=3, 1usize..=3, any::<u64>()).prop_filter("n <= d^2-1", |(d, n, _)| *n < d * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psd_projection_is_idempotent_and_nonexpansive(
        d in 2usize..6,
        a in prop::collection::vec(-3.0f64..3.0, 72),
        b in prop::collection::vec(-3.0f64..3.0, 72),
    ) {
        let h1 = hermitian(d, &a);
        let h2 = hermitian(d, &b);
        let p1 = sdp::psd_project(&h1).unwrap();
        let p2 = sdp::psd_project(&h2).unwrap();
        prop_assert!(linalg::min_eigenvalue(&p1) >= -1e-12);
        let again = sdp::psd_project(&p1).unwrap();
        prop_assert!(linalg::frobenius(&(&again - &p1)) <= 1e-10 * linalg::frobenius(&p1).max(1.0));
        let lhs = linalg::frobenius(&(&p1 - &p2));
        let rhs = linalg::frobenius(&(&h1 - &h2));
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn z_matches_coordinate_form((d, n, seed) in model_case(), coeffs in prop::collection::vec(-2.0f64..2.0, 27)) {
        let m = model::random_model(d, n, seed, 1e-3).unwrap();
        let basis = holevo::hermitian_basis(d).unwrap();
        let k = basis.len();
        let x = RMatrix::from_fn(n, k, |mu, i| coeffs[mu * k + i]);
        let obs = basis.observables(&x);
        let z = helstrom::z_matrix(&m, &obs).unwrap();
        let s = holevo::gram_matrix(&m.rho, &basis).unwrap();
        let xc = linalg::from_real(&x);
        let via_s = &xc * s * xc.transpose();
        prop_assert!(linalg::frobenius(&(z - via_s)) < 1e-12 * (1.0 + x.norm_squared()));
    }

    #[test]
    fn helstrom_scales_linearly_with_cost((d, n, seed) in model_case(), c in 0.1f64..10.0) {
        let m = model::random_model(d, n, seed, 1e-3).unwrap();
        let g = model::random_cost(n, n, seed).unwrap();
        let base = helstrom::helstrom_bound(&m, &g).unwrap().c_s;
        let scaled = helstrom::helstrom_bound(&m, &g.scaled(c).unwrap()).unwrap().c_s;
        prop_assert!((scaled - c * base).abs() <= 1e-10 * c * base);
    }

    #[test]
    fn helstrom_minimizer_is_feasible((d, n, seed) in model_case()) {
        let m = model::random_model(d, n, seed, 1e-3).unwrap();
        let h = helstrom::helstrom_bound(&m, &CostMatrix::identity(n)).unwrap();
        prop_assert!(helstrom::feasibility_residual(&m, &h.x_s).unwrap() < 1e-9);
        for l in &h.qfi.slds {
            prop_assert!(linalg::hermitian_deviation(l) < 1e-12);
        }
    }

    #[test]
    fn model_json_round_trip_is_exact((d, n, seed) in model_case(), rank_seed in any::<u64>()) {
        let m = model::random_model(d, n, seed, 1e-3).unwrap();
        let g = model::random_cost(n, 1 + (rank_seed as usize) % n, rank_seed).unwrap();
        let (back, cost) = model::model_from_json(&model::model_to_json(&m, Some(&g))).unwrap();
        prop_assert_eq!(back.rho, m.rho);
        prop_assert_eq!(back.drho, m.drho);
        prop_assert_eq!(cost.g, g.g);
    }

    #[test]
    fn random_models_are_deterministic((d, n, seed) in model_case()) {
        let a = model::random_model(d, n, seed, 1e-3).unwrap();
        let b = model::random_model(d, n, seed, 1e-3).unwrap();
        prop_assert_eq!(&a.rho, &b.rho);
        prop_assert_eq!(&a.drho, &b.drho);
        prop_assert!(model::validate_model(&a).is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn holevo_chain_and_schur_block((d, n, seed) in model_case(), rank_seed in any::<u64>()) {
        let m = model::random_model(d, n, seed, 1e-3).unwrap();
        let g = model::random_cost(n, 1 + (rank_seed as usize) % n, rank_seed).unwrap();
        let opts = SolverOptions::default();
        let hel = helstrom::helstrom_bound(&m, &g).unwrap();
        let hol = holevo::holevo_bound(&m, &g, &opts).unwrap();
        prop_assume!(hol.status.is_converged());
        let tol = 1e-6 * hol.c_h.max(1.0);
        prop_assert!(hel.c_s * (1.0 - 1e-6) <= hol.c_h);
        prop_assert!(hol.c_h <= holevo::holevo_objective(&m, &g, &hel.x_s).unwrap() + tol);
        prop_assert!(hol.c_h <= 3.0 * hel.c_s * (1.0 + 1e-6));

        // the LMI block at the returned variables is PSD up to solver accuracy
        let basis = holevo::hermitian_basis(d).unwrap();
        let s = holevo::gram_matrix(&m.rho, &basis).unwrap();
        let r = holevo::gram_factor(&s, holevo::GRAM_RANK_TOL);
        let (prob, _) = holevo::assemble_holevo_lmi(&m, &g, &basis, &r).unwrap();
        let block = prob.affine_map(&hol.solver.v);
        let scale = linalg::frobenius(&block).max(1.0);
        prop_assert!(linalg::min_eigenvalue(&block) >= -1e-6 * scale);
    }

    #[test]
    fn holevo_scales_linearly_with_cost((d, n, seed) in model_case(), c in 0.2f64..5.0) {
        let m = model::random_model(d, n, seed, 1e-3).unwrap();
        let g = model::random_cost(n, n, seed).unwrap();
        let opts = SolverOptions::default();
        let a = holevo::holevo_bound(&m, &g, &opts).unwrap();
        let b = holevo::holevo_bound(&m, &g.scaled(c).unwrap(), &opts).unwrap();
        prop_assume!(a.status.is_converged() && b.status.is_converged());
        prop_assert!((b.c_h - c * a.c_h).abs() <= 1e-5 * c * a.c_h.max(1.0));
    }

    #[test]
    fn any_feasible_point_bounds_holevo((d, n, seed) in model_case(), mag in 0.01f64..2.0) {
        let m = model::random_model(d, n, seed, 1e-3).unwrap();
        let g = model::random_cost(n, n, seed ^ 1).unwrap();
        let hel = helstrom::helstrom_bound(&m, &g).unwrap();
        let p = qcrb::analysis::random_feasible_perturbation(&m, &hel.x_s, mag, seed).unwrap();
        prop_assert!(helstrom::feasibility_residual(&m, &p.x).unwrap() < 1e-8);
        let hol = holevo::holevo_bound(&m, &g, &SolverOptions::default()).unwrap();
        prop_assume!(hol.status.is_converged());
        let at_p = holevo::holevo_objective(&m, &g, &p.x).unwrap();
        prop_assert!(hol.c_h <= at_p + 1e-6 * hol.c_h.max(1.0));
    }
}

#[test]
fn observable_vector_without_coefficients_matches_basis_form() {
    let m = model::builtin_model("qubit_xy", &[0.4]).unwrap();
    let h = helstrom::helstrom_bound(&m, &CostMatrix::identity(2)).unwrap();
    let basis = holevo::hermitian_basis(2).unwrap();
    let coords = RMatrix::from_fn(2, 4, |mu, i| basis.coordinates(&h.x_s.ops[mu])[i]);
    let rebuilt = basis.observables(&coords);
    let direct = ObservableVector::new(h.x_s.ops.clone());
    let z1 = helstrom::z_matrix(&m, &rebuilt).unwrap();
    let z2 = helstrom::z_matrix(&m, &direct).unwrap();
    assert!(linalg::frobenius(&(z1 - z2)) < 1e-13);
}
