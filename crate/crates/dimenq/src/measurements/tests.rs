use super::*;
use crate::conic::SolveOptions;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn sharp_xz() -> PovmSet {
    mub_pair(2, 1.0).unwrap()
}

#[test]
fn mub_pair_sharp_is_pauli_projectors() {
    let m = sharp_xz();
    // x = 1 carries the computational basis.
    assert!((m.effect(1, 0).entry(0, 0).re - 1.0).abs() < 1e-14);
    assert!(m.effect(1, 0).entry(1, 1). re.abs() < 1e-14);
    // x = 0 carries the Fourier (X) basis: |+><+| has all entries 1/2.
    for i in 0..2 {
        for j in 0..2 {
            assert!((m.effect(0, 0).entry(i, j).re - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn mub_pair_pure_noise() {
    let m = mub_pair(2, 0.0).unwrap();
    for x in 0..2 {
        for a in 0..2 {
            assert!(m.effect(x, a).distance_max(&HermitianOperator::identity(2).scale(0.5)) < 1e-14);
        }
    }
}

#[test]
fn mub_pair_unbiasedness_d5() {
    // |<e0_a | e1_b>|^2 = 1/5 for all a, b.
    let f = fourier(5);
    for a in 0..5 {
        for b in 0..5 {
            let col = f.column(a);
            let amp = col[b].norm_sqr();
            assert!((amp - 0.2).abs() < 1e-12);
        }
    }
    assert!(mub_pair(4, 0.5).is_err(), "non-prime d must be rejected");
}

#[test]
fn strategy_enumeration_counts() {
    assert_eq!(enumerate_strategies(2, 2).unwrap().len(), 4);
    assert_eq!(enumerate_strategies(3, 2).unwrap().len(), 8);
    assert_eq!(enumerate_strategies(2, 5).unwrap().len(), 25);
    assert!(enumerate_strategies(10, 10).is_err());
    // Lexicographic and duplicate-free.
    let s = enumerate_strategies(2, 2).unwrap();
    let expect: Vec<Vec<usize>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
    assert_eq!(s.iter().map(|x| x.assignment.clone()).collect::<Vec<_>>(), expect);
}

#[test]
fn single_povm_is_jointly_measurable() {
    let m = trivial_povm(3);
    let r = joint_measurability(&m, &opts()).unwrap();
    assert!(r.jointly_measurable);
}

#[test]
fn sharp_pair_robustness_is_inverse_sqrt2() {
    let r = joint_measurability(&sharp_xz(), &opts()).unwrap();
    assert!(!r.jointly_measurable);
    let expect = std::f64::consts::FRAC_1_SQRT_2;
    assert!(
        (r.robustness - expect).abs() < 1e-4,
        "robustness {} vs 1/sqrt2 {}",
        r.robustness,
        expect
    );
}

#[test]
fn noisy_pair_below_threshold_is_jm() {
    let m = mub_pair(2, 0.6).unwrap();
    let r = joint_measurability(&m, &opts()).unwrap();
    assert!(r.jointly_measurable, "p = 0.6 < 1/sqrt2 must be jointly measurable");
    let m = mub_pair(2, 0.8).unwrap();
    let r = joint_measurability(&m, &opts()).unwrap();
    assert!(!r.jointly_measurable);
    assert!((r.robustness - std::f64::consts::FRAC_1_SQRT_2 / 0.8).abs() < 1e-4);
}

fn three_paulis() -> PovmSet {
    let c = |re: f64, im: f64| num_complex::Complex64::new(re, im);
    let plus_y = vec![c(std::f64::consts::FRAC_1_SQRT_2, 0.0), c(0.0, std::f64::consts::FRAC_1_SQRT_2)];
    let x = mub_pair(2, 1.0).unwrap();
    let py = HermitianOperator::projector(&plus_y);
    let my = HermitianOperator::identity(2).sub(&py);
    let effects = vec![
        vec![x.effect(0, 0).clone(), x.effect(0, 1).clone()],
        vec![x.effect(1, 0).clone(), x.effect(1, 1).clone()],
        vec![py, my],
    ];
    PovmSet::new(2, effects).unwrap()
}

#[test]
fn three_sharp_paulis_not_jm() {
    let r = joint_measurability(&three_paulis(), &opts()).unwrap();
    assert!(!r.jointly_measurable);
    // Known threshold for three orthogonal sharp qubit measurements: 1/sqrt3.
    assert!((r.robustness - 1.0 / 3f64.sqrt()).abs() < 1e-4);
}

#[test]
fn dimension_measure_qubit_cases() {
    // Jointly measurable set -> 0.
    let jm = mub_pair(2, 0.5).unwrap();
    let r = dimension_measure_qubit(&jm, &opts()).unwrap();
    assert!(r.value.abs() < 1e-6, "JM set measure {}", r.value);
    // Sharp X/Z pair -> 1.
    let r = dimension_measure_qubit(&sharp_xz(), &opts()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6, "sharp pair measure {}", r.value);
    // Non-qubit input is rejected.
    assert!(dimension_measure_qubit(&mub_pair(3, 0.5).unwrap(), &opts()).is_err());
}

#[test]
fn upper_bound_coincides_at_d2() {
    let m = mub_pair(2, 0.85).unwrap();
    let exact = dimension_measure_qubit(&m, &opts()).unwrap();
    let bound = dimension_measure_upper_bound(&m, &opts()).unwrap();
    assert!((exact.value - bound.value).abs() < 1e-9);
}

#[test]
fn incompatibility_weight_cases() {
    let jm = mub_pair(2, 0.5).unwrap();
    let w = incompatibility_weight(&jm, &opts()).unwrap();
    assert!(w.value.abs() < 1e-6, "JM weight {}", w.value);
    let w = incompatibility_weight(&sharp_xz(), &opts()).unwrap();
    assert!((w.value - 1.0).abs() < 1e-6, "sharp pair weight {}", w.value);
}

#[test]
fn weight_upper_bounds_measure() {
    for &p in &[0.75, 0.85, 0.95] {
        let m = mub_pair(2, p).unwrap();
        let dm = dimension_measure_qubit(&m, &opts()).unwrap().value;
        let w = incompatibility_weight(&m, &opts()).unwrap().value;
        assert!(dm <= w + 2e-7, "p = {p}: measure {dm} > weight {w}");
    }
}

#[test]
fn twirl_fixes_noisy_mub_pair() {
    for d in [2usize, 3] {
        let g = mub_symmetry_group(d).unwrap();
        assert_eq!(g.elements.len(), 2 * (d - 1) * d * d);
        let m = mub_pair(d, 0.7).unwrap();
        // Every element individually fixes the family.
        for el in &g.elements {
            for x in 0..2 {
                for a in 0..d {
                    let src = m.effect(el.input_perm[x], el.output_perms[x][a]);
                    let moved = src.conjugate_by(&el.unitary);
                    assert!(
                        moved.distance_max(m.effect(x, a)) < 1e-10,
                        "d={d} element does not fix M^p at (x={x}, a={a})"
                    );
                }
            }
        }
        let t = twirl_povm(&m, &g).unwrap();
        for x in 0..2 {
            for a in 0..d {
                assert!(t.effect(x, a).distance_max(m.effect(x, a)) < 1e-10);
            }
        }
    }
}

#[test]
fn twirl_projects_random_family_to_mub_form() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    let d = 3;
    let g = mub_symmetry_group(d).unwrap();
    // Random PSD effects with matched marginals across the two inputs.
    let mut effects = vec![vec![], vec![]];
    let mut sum0 = ComplexMatrix::zeros(d, d);
    for _ in 0..d {
        let m = ComplexMatrix::from_fn(d, d, |_, _| {
            num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let e = HermitianOperator::new(&m * &m.dagger()).unwrap();
        sum0 = &sum0 + e.matrix();
        effects[0].push(e);
    }
    // Second input: first d-1 random, last one fixes the marginal.
    let mut sum1 = ComplexMatrix::zeros(d, d);
    for _ in 0..d - 1 {
        let m = ComplexMatrix::from_fn(d, d, |_, _| {
            num_complex::Complex64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2))
        });
        let e = HermitianOperator::new(&m * &m.dagger()).unwrap();
        sum1 = &sum1 + e.matrix();
        effects[1].push(e);
    }
    let last = HermitianOperator::new(&sum0 - &sum1).unwrap();
    assert!(last.min_eigenvalue().unwrap() > 0.0, "construction must stay PSD");
    effects[1].push(last);
    let pm = PseudoMeasurement::new(d, effects).unwrap();
    let t = twirl_pseudo(&pm, &g).unwrap();
    // Effects have the form p' |e^x_a><e^x_a| + c I with one proportionality.
    let trace = t.marginal().trace();
    let scale = d as f64 / trace;
    let rescaled: Vec<Vec<HermitianOperator>> = (0..2)
        .map(|x| (0..d).map(|a| t.effect(x, a).scale(scale)).collect())
        .collect();
    let povm = PovmSet::new(d, rescaled).unwrap();
    let p = extract_visibility(&povm).expect("twirled family is of noisy MUB form within 1e-6");
    assert!((-1e-9..=1.0 + 1e-9).contains(&p));
    // Twirl is idempotent on its own output.
    let tt = twirl_pseudo(&t, &g).unwrap();
    for x in 0..2 {
        for a in 0..d {
            assert!(tt.effect(x, a).distance_max(t.effect(x, a)) < 1e-10);
        }
    }
}

#[test]
fn weyl_twirl_sends_states_to_maximally_mixed() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
    for d in [2usize, 3, 5] {
        let m = ComplexMatrix::from_fn(d, d, |_, _| {
            num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let g = HermitianOperator::new(&m * &m.dagger()).unwrap();
        let rho = g.scale(1.0 / g.trace());
        let t = weyl_twirl_state(&rho).unwrap();
        let target = HermitianOperator::identity(d).scale(1.0 / d as f64);
        assert!(t.distance_max(&target) < 1e-12);
    }
}

#[test]
fn extract_visibility_inverts_constructor() {
    for &(d, p) in &[(5usize, 0.6), (2, 1.0), (3, 0.25)] {
        let m = mub_pair(d, p).unwrap();
        let got = extract_visibility(&m).unwrap();
        assert!((got - p).abs() < 1e-9, "d={d} p={p} got {got}");
    }
    // Non-MUB input is rejected.
    let bad = three_paulis();
    assert!(extract_visibility(&bad).is_err());
}

#[test]
fn heuristic_full_rank_gives_sharp_pair() {
    for d in [2usize, 3] {
        let all: Vec<usize> = (0..d).collect();
        let r = heuristic_mub_construction(d, d, &all, &all).unwrap();
        assert!((r.p_k - 1.0).abs() < 1e-9, "d={d}: p_d = {}", r.p_k);
    }
}

#[test]
fn heuristic_k1_qubit_hits_jm_threshold() {
    let r = heuristic_mub_construction(2, 1, &[0], &[0]).unwrap();
    assert!(
        (r.p_k - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6,
        "p_1 = {} vs 1/sqrt2",
        r.p_k
    );
}

#[test]
fn construction_curve_endpoints() {
    let p1 = best_heuristic_construction(2, 1).unwrap().2.p_k;
    assert!(dimension_measure_curve_from_constructions(2, p1).unwrap().abs() < 1e-12);
    assert!((dimension_measure_curve_from_constructions(2, 1.0).unwrap() - 1.0).abs() < 1e-9);
    let v = dimension_measure_curve_from_constructions(5, 1.0).unwrap();
    assert!((v - 5f64.log2()).abs() < 1e-9);
}

#[test]
fn heuristic_tie_break_is_deterministic() {
    // Symmetric subsets can degenerate the seed spectrum at the cutoff; the
    // construction must stay deterministic and valid either way.
    let a = heuristic_mub_construction(3, 2, &[0, 1], &[0, 1]).unwrap();
    let b = heuristic_mub_construction(3, 2, &[0, 1], &[0, 1]).unwrap();
    assert_eq!(a.p_k.to_bits(), b.p_k.to_bits());
    assert!((0.0..=1.0 + 1e-9).contains(&a.p_k));
    // Full-rank seed at k = d: every eigenvalue kept, tie flag irrelevant.
    let all: Vec<usize> = (0..3).collect();
    let c = heuristic_mub_construction(3, 3, &all, &all).unwrap();
    assert!(!c.tie_broken);
}

#[test]
fn incompatibility_weight_beyond_qubits() {
    // The weight SDP is well posed in any dimension: sharp MUB pair at d = 3
    // has weight 1, a deep-inside-JM pair has weight 0.
    let w = incompatibility_weight(&mub_pair(3, 1.0).unwrap(), &opts()).unwrap();
    assert!((w.value - 1.0).abs() < 1e-6, "sharp d=3 weight {}", w.value);
    let w = incompatibility_weight(&mub_pair(3, 0.3).unwrap(), &opts()).unwrap();
    assert!(w.value < 1e-6, "noisy d=3 weight {}", w.value);
}

#[test]
fn symmetry_group_rejects_invalid_elements() {
    use crate::linalg::ComplexMatrix;
    // Non-unitary matrix.
    let bad = GroupElement {
        unitary: ComplexMatrix::identity(2).scale_re(2.0),
        input_perm: vec![0, 1],
        output_perms: vec![vec![0, 1], vec![0, 1]],
    };
    assert!(SymmetryGroup::new(2, 2, 2, vec![bad]).is_err());
    // Non-permutation relabelling.
    let bad = GroupElement {
        unitary: ComplexMatrix::identity(2),
        input_perm: vec![0, 0],
        output_perms: vec![vec![0, 1], vec![0, 1]],
    };
    assert!(SymmetryGroup::new(2, 2, 2, vec![bad]).is_err());
}

#[test]
fn tensor_povm_bookkeeping() {
    let m = sharp_xz();
    let t = tensor_povm(&m, &m).unwrap();
    assert_eq!(t.dim(), 4);
    assert_eq!(t.n_inputs(), 4);
    assert_eq!(t.n_outcomes(), 4);
    // Tensoring with the trivial POVM embeds the original.
    let e = tensor_povm(&m, &trivial_povm(3)).unwrap();
    assert_eq!(e.dim(), 6);
    assert_eq!(e.n_inputs(), 2);
    assert_eq!(e.n_outcomes(), 2);
    let expect = m.effect(0, 0).matrix().tensor(&ComplexMatrix::identity(3));
    assert!(e.effect(0, 0).distance_max(&HermitianOperator::new(expect).unwrap()) < 1e-14);
}

#[test]
fn product_of_sharp_pairs_upper_bound_is_subadditive() {
    // Facial reduction forces all strategy operators to zero, so the bound
    // equals log2(4) = 2 = 1 + 1.
    let m = sharp_xz();
    let t = tensor_povm(&m, &m).unwrap();
    let bound = dimension_measure_upper_bound(&t, &opts()).unwrap();
    let single = dimension_measure_qubit(&m, &opts()).unwrap();
    assert!(
        bound.value <= 2.0 * single.value + 2e-7,
        "product bound {} vs sum {}",
        bound.value,
        2.0 * single.value
    );
    assert!((bound.value - 2.0).abs() < 1e-6);
}

#[test]
fn dropping_an_input_never_increases_the_measure() {
    let m = three_paulis();
    let full = dimension_measure_qubit(&m, &opts()).unwrap().value;
    for x in 0..3 {
        let smaller = dimension_measure_qubit(&m.without_input(x).unwrap(), &opts()).unwrap().value;
        assert!(smaller <= full + 2e-7, "dropping input {x}: {smaller} > {full}");
    }
}
