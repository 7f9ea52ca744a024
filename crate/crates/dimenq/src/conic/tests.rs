use super::*;
use crate::linalg::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_entries(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap()
}

fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_entries(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    HermitianOperator::new(&g + &g.dagger()).unwrap()
}

/// min t s.t. t I - H >= 0 computes the largest eigenvalue.
fn lambda_max_problem(h: &HermitianOperator) -> SdpProblem {
    let d = h.dim();
    let mut p = SdpProblem::new(Sense::Minimize);
    let t = p.add_scalar("t");
    p.objective_scalar(t, 1.0);
    p.add_constraint(
        "t_eye_minus_h",
        MatrixExpr::constant(h.matrix().scale_re(-1.0)).scalar(t, ComplexMatrix::identity(d), 1.0),
        ConstraintKind::PositiveSemidefinite,
    )
    .unwrap();
    p
}

#[test]
fn lambda_max_of_pauli_z() {
    let h = HermitianOperator::new(pauli_z()).unwrap();
    let p = lambda_max_problem(&h);
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SdpStatus::Optimal);
    assert!((sol.primal_value - 1.0).abs() < 1e-6, "value {}", sol.primal_value);
    let report = check_certificate(&p, &sol, &opts()).unwrap();
    assert!(report.verdict, "certificate failed: {report:?}");
}

#[test]
fn diagonal_dominance_problem() {
    // max Tr(sigma) s.t. sigma >= 0, sigma <= diag(0.3, 0.7) -> 1.0.
    let mut p = SdpProblem::new(Sense::Maximize);
    let sigma = p.add_block("sigma", 2);
    p.objective_trace(sigma, &HermitianOperator::identity(2), 1.0);
    p.add_constraint("psd", MatrixExpr::zero(2).var(sigma, 1.0), ConstraintKind::PositiveSemidefinite)
        .unwrap();
    let cap = ComplexMatrix::from_entries(2, 2, vec![c(0.3, 0.), c(0., 0.), c(0., 0.), c(0.7, 0.)]).unwrap();
    p.add_constraint(
        "cap",
        MatrixExpr::constant(cap).var(sigma, -1.0),
        ConstraintKind::PositiveSemidefinite,
    )
    .unwrap();
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SdpStatus::Optimal);
    assert!((sol.primal_value - 1.0).abs() < 1e-6, "value {}", sol.primal_value);
}

#[test]
fn lambda_max_matches_eigensolver_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..8 {
        let h = random_hermitian(&mut rng, 6);
        let expect = *h.eigh().unwrap().values.last().unwrap();
        let sol = solve(&lambda_max_problem(&h), &opts()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(
            (sol.primal_value - expect).abs() < 1e-6,
            "solver {} vs eigh {}",
            sol.primal_value,
            expect
        );
    }
}

#[test]
fn trace_normalized_ground_state_with_equality() {
    // min Tr(H X) s.t. X >= 0, Tr X = 1  ->  lambda_min(H).
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..4 {
        let h = random_hermitian(&mut rng, 4);
        let expect = h.eigh().unwrap().values[0];
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block("x", 4);
        p.objective_trace(x, &h, 1.0);
        p.add_constraint("psd", MatrixExpr::zero(4).var(x, 1.0), ConstraintKind::PositiveSemidefinite)
            .unwrap();
        // Tr X - 1 = 0 as a 1x1 equality.
        p.add_constraint(
            "unit_trace",
            MatrixExpr::constant(ComplexMatrix::identity(1).scale_re(-1.0))
                .term(x, LinMap::TraceB { da: 1, db: 4 }, 1.0),
            ConstraintKind::Zero,
        )
        .unwrap();
        let sol = solve(&p, &opts()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(
            (sol.primal_value - expect).abs() < 1e-6,
            "solver {} vs eigh {}",
            sol.primal_value,
            expect
        );
        let report = check_certificate(&p, &sol, &opts()).unwrap();
        assert!(report.verdict);
    }
}

#[test]
fn realify_real_matrix_is_block_pair() {
    let h = HermitianOperator::new(ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 3.0]).unwrap()).unwrap();
    let r = realify(&h);
    assert_eq!(r.dim(), 4);
    // Off-diagonal blocks vanish for real input.
    assert!(r.entry(0, 2).norm() < 1e-15 && r.entry(3, 1).norm() < 1e-15);
    assert!((r.entry(0, 0).re - 2.0).abs() < 1e-15 && (r.entry(2, 2).re - 2.0).abs() < 1e-15);
}

#[test]
fn realify_pauli_y_spectrum() {
    let y = HermitianOperator::new(pauli_y()).unwrap();
    let r = realify(&y);
    let vals = r.eigh().unwrap().values;
    let expect = [-1.0, -1.0, 1.0, 1.0];
    for (v, e) in vals.iter().zip(&expect) {
        assert!((v - e).abs() < 1e-12, "{vals:?}");
    }
}

#[test]
fn realify_trace_pairing_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..10 {
        let a = random_hermitian(&mut rng, 3);
        let b = random_hermitian(&mut rng, 3);
        let lhs = realify(&a).pairing(&realify(&b));
        let rhs = 2.0 * a.pairing(&b);
        assert!((lhs - rhs).abs() < 1e-10);
    }
}

#[test]
fn realify_preserves_definiteness_both_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..20 {
        let g = random_hermitian(&mut rng, 3);
        let psd = HermitianOperator::new(&(g.matrix() * &g.matrix().dagger()) + &ComplexMatrix::zeros(3, 3))
            .unwrap();
        assert!(realify(&psd).min_eigenvalue().unwrap() > -1e-10);
        let indefinite = random_hermitian(&mut rng, 3);
        let min_c = indefinite.min_eigenvalue().unwrap();
        let min_r = realify(&indefinite).min_eigenvalue().unwrap();
        assert!((min_c - min_r).abs() < 1e-9, "eigenvalues must match: {min_c} vs {min_r}");
    }
}

#[test]
fn certificate_detects_perturbed_variable() {
    let h = HermitianOperator::new(pauli_z()).unwrap();
    let p = lambda_max_problem(&h);
    let mut sol = solve(&p, &opts()).unwrap();
    // Pushing t below the optimum violates the tight constraint.
    if let Some(VarValue::Scalar(t)) = sol.variables.get_mut("t") {
        *t -= 1e-3;
    }
    let report = check_certificate(&p, &sol, &opts()).unwrap();
    assert!(!report.verdict);
    // The gap report is |primal - dual| by definition.
    assert!((report.gap - (sol.primal_value - sol.dual_value).abs()).abs() < 1e-15);
}

#[test]
fn weak_duality_at_returned_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    for _ in 0..5 {
        let h = random_hermitian(&mut rng, 5);
        let sol = solve(&lambda_max_problem(&h), &opts()).unwrap();
        // Minimization: dual never exceeds primal beyond the gap tolerance.
        assert!(sol.dual_value <= sol.primal_value + 2.0 * opts().gap_tol * sol.primal_value.abs().max(1.0));
    }
}

#[test]
fn deterministic_given_identical_inputs() {
    let h = HermitianOperator::new(pauli_z()).unwrap();
    let a = solve(&lambda_max_problem(&h), &opts()).unwrap();
    let b = solve(&lambda_max_problem(&h), &opts()).unwrap();
    assert_eq!(a.primal_value.to_bits(), b.primal_value.to_bits());
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn variable_declaration_order_does_not_move_the_optimum() {
    let h = {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        random_hermitian(&mut rng, 3)
    };
    let build = |swap: bool| {
        let d = 3;
        let mut p = SdpProblem::new(Sense::Minimize);
        let (t, x) = if swap {
            let x = p.add_block("x", d);
            let t = p.add_scalar("t");
            (t, x)
        } else {
            let t = p.add_scalar("t");
            let x = p.add_block("x", d);
            (t, x)
        };
        p.objective_scalar(t, 1.0);
        // t I - H - x >= 0, x >= 0: optimum is still lambda_max(H).
        p.add_constraint(
            "main",
            MatrixExpr::constant(h.matrix().scale_re(-1.0))
                .scalar(t, ComplexMatrix::identity(d), 1.0)
                .var(x, -1.0),
            ConstraintKind::PositiveSemidefinite,
        )
        .unwrap();
        p.add_constraint("x_psd", MatrixExpr::zero(d).var(x, 1.0), ConstraintKind::PositiveSemidefinite)
            .unwrap();
        solve(&p, &opts()).unwrap().primal_value
    };
    let a = build(false);
    let b = build(true);
    assert!((a - b).abs() <= opts().gap_tol * a.abs().max(1.0) * 2.0, "{a} vs {b}");
}

#[test]
fn infeasible_lmi_yields_verified_certificate() {
    // X >= 0 and -I - X >= 0 cannot hold together.
    let mut p = SdpProblem::new(Sense::Minimize);
    let x = p.add_block("x", 2);
    p.add_constraint("x_psd", MatrixExpr::zero(2).var(x, 1.0), ConstraintKind::PositiveSemidefinite)
        .unwrap();
    p.add_constraint(
        "minus",
        MatrixExpr::constant(ComplexMatrix::identity(2).scale_re(-1.0)).var(x, -1.0),
        ConstraintKind::PositiveSemidefinite,
    )
    .unwrap();
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SdpStatus::Infeasible);
    let cert = sol.certificate.as_ref().expect("infeasibility certificate present");
    let (stationarity, slope) = verify_infeasibility(&p, cert).unwrap();
    assert!(stationarity < 1e-6, "adjoint residual {stationarity}");
    assert!(slope < -1e-8, "objective slope {slope}");
    // Multipliers are PSD.
    if let RayCertificate::PrimalInfeasible { lmi_multipliers, .. } = cert {
        for y in lmi_multipliers.values() {
            assert!(y.min_eigenvalue().unwrap() > -1e-8);
        }
    }
}

#[test]
fn infeasible_equality_yields_certificate() {
    // s >= 0 with s + 1 = 0.
    let mut p = SdpProblem::new(Sense::Minimize);
    let s = p.add_scalar("s");
    p.objective_scalar(s, 1.0);
    p.add_constraint(
        "s_nonneg",
        MatrixExpr::zero(1).scalar(s, ComplexMatrix::identity(1), 1.0),
        ConstraintKind::PositiveSemidefinite,
    )
    .unwrap();
    p.add_constraint(
        "impossible",
        MatrixExpr::constant(ComplexMatrix::identity(1)).scalar(s, ComplexMatrix::identity(1), 1.0),
        ConstraintKind::Zero,
    )
    .unwrap();
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SdpStatus::Infeasible);
    let (stationarity, slope) = verify_infeasibility(&p, sol.certificate.as_ref().unwrap()).unwrap();
    assert!(stationarity < 1e-6);
    assert!(slope < -1e-8);
}

#[test]
fn unbounded_objective_detected() {
    // max s with s >= 0 only.
    let mut p = SdpProblem::new(Sense::Maximize);
    let s = p.add_scalar("s");
    p.objective_scalar(s, 1.0);
    p.add_constraint(
        "s_nonneg",
        MatrixExpr::zero(1).scalar(s, ComplexMatrix::identity(1), 1.0),
        ConstraintKind::PositiveSemidefinite,
    )
    .unwrap();
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, SdpStatus::Unbounded);
    assert!(matches!(sol.certificate, Some(RayCertificate::DualInfeasible { .. })));
}

#[test]
fn unattained_optimum_reports_honestly() {
    // min x1 s.t. [[x1, 1], [1, x2]] >= 0 has infimum 0, never attained.
    let mut p = SdpProblem::new(Sense::Minimize);
    let x1 = p.add_scalar("x1");
    let x2 = p.add_scalar("x2");
    p.objective_scalar(x1, 1.0);
    let mut e11 = ComplexMatrix::zeros(2, 2);
    e11[(0, 0)] = c(1., 0.);
    let mut e22 = ComplexMatrix::zeros(2, 2);
    e22[(1, 1)] = c(1., 0.);
    let mut ones = ComplexMatrix::zeros(2, 2);
    ones[(0, 1)] = c(1., 0.);
    ones[(1, 0)] = c(1., 0.);
    p.add_constraint(
        "hankel",
        MatrixExpr::constant(ones).scalar(x1, e11, 1.0).scalar(x2, e22, 1.0),
        ConstraintKind::PositiveSemidefinite,
    )
    .unwrap();
    match solve(&p, &opts()) {
        // An epsilon-optimal verdict is acceptable: the value must then be a
        // certified approach to the infimum 0.
        Ok(sol) if sol.status == SdpStatus::Optimal => {
            assert!(sol.primal_value.abs() < 1e-6, "claimed optimum {}", sol.primal_value);
            let report = check_certificate(&p, &sol, &opts()).unwrap();
            assert!(report.verdict, "claimed optimal without a passing certificate");
        }
        Ok(sol) => assert!(sol.primal_value.is_finite(), "best iterate must be finite: {sol:?}"),
        Err(Error::IllPosed(_)) => {}
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn max_iterations_returns_best_iterate() {
    let h = {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        random_hermitian(&mut rng, 4)
    };
    let tight = SolveOptions { max_iter: 3, ..SolveOptions::default() };
    let sol = solve(&lambda_max_problem(&h), &tight).unwrap();
    assert_eq!(sol.status, SdpStatus::MaxIterations);
    assert!(sol.primal_value.is_finite());
}

#[test]
fn guard_rail_rejects_oversized_programs() {
    let mut p = SdpProblem::new(Sense::Minimize);
    // 30 blocks of complex dim 20 -> realified 40 each -> 1200 > 1024.
    for i in 0..30 {
        let x = p.add_block(format!("x{i}"), 20);
        p.add_constraint(
            format!("c{i}"),
            MatrixExpr::zero(20).var(x, 1.0),
            ConstraintKind::PositiveSemidefinite,
        )
        .unwrap();
    }
    assert!(matches!(solve(&p, &opts()), Err(Error::InvariantViolation(_))));
}

#[test]
fn non_hermitian_constant_rejected() {
    let mut p = SdpProblem::new(Sense::Minimize);
    let x = p.add_block("x", 2);
    let mut bad = ComplexMatrix::zeros(2, 2);
    bad[(0, 1)] = c(1.0, 0.0);
    assert!(p
        .add_constraint("bad", MatrixExpr::constant(bad).var(x, 1.0), ConstraintKind::PositiveSemidefinite)
        .is_err());
}

#[test]
fn dump_text_lists_every_constraint() {
    let h = HermitianOperator::new(pauli_z()).unwrap();
    let p = lambda_max_problem(&h);
    let dump = p.dump_text();
    assert!(dump.contains("t_eye_minus_h"));
    assert!(dump.contains(">= 0"));
}
