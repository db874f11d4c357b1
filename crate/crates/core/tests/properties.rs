//! Property tests. Random inputs come from a proptest-chosen seed fed to the
//! library's ChaCha stream, so failures shrink to a seed and a size.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use quasinormal::hilbert::{Label, SparseVec, TolerancePolicy, VertexKey};
use quasinormal::operator::{
    direct_sum, matrix_scale, shift_isometry, BandedToeplitz, CMat, DirectSumOp, FiniteMatrixOp,
    LocalOperator, OpRef, ScaleRule,
};
use quasinormal::predicates::{
    identity_residual, moment_solvability_test, power_identity_test, quasinormal_test,
    quasinormal_words, Word,
};
use quasinormal::probe::{
    complex_gaussian, random_hermitian, random_matrix, random_normal, random_probe_pairs,
    random_sparse, rng_from_seed, ProbeConfig,
};
use quasinormal::spectral::{herm_eig, modulus, polar};
use quasinormal::tree::{prop_ws_test, random_tree_shift};
use quasinormal::verdict::Report;
use rand::Rng;

fn nat_window(n: u64) -> Vec<Label> {
    (0..n).map(Label::Nat).collect()
}

fn sparse(seed: u64, window: &[Label], k: usize) -> SparseVec {
    random_sparse(&mut rng_from_seed(seed), window, k)
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-12 * scale.max(1.0)
}

/// `|⟨Cu, v⟩ − ⟨u, C*v⟩|` over seeded probe pairs, relative to `‖Cu‖‖v‖ + ‖u‖‖C*v‖`.
fn duality_defect(op: &dyn LocalOperator, window: Vec<Label>, seed: u64) -> f64 {
    let cfg = ProbeConfig {
        seed,
        num_probes: 20,
        support_size: 5,
        label_window: window,
    };
    random_probe_pairs(&cfg)
        .iter()
        .map(|(u, v)| {
            let cu = op.apply(u);
            let csv = op.adjoint_apply(v);
            let scale = cu.norm() * v.norm() + u.norm() * csv.norm();
            (cu.inner(v) - u.inner(&csv)).norm() / scale.max(1e-300)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_conjugate_symmetric_and_linear(seed in any::<u64>(), k in 1usize..8) {
        let w = nat_window(10);
        let (f, g, h) = (sparse(seed, &w, k), sparse(seed ^ 1, &w, k), sparse(seed ^ 2, &w, k));
        let c = complex_gaussian(&mut rng_from_seed(seed ^ 3));
        let scale = f.norm() * (g.norm() + h.norm()) * (1.0 + c.norm());
        prop_assert!(close(f.inner(&g), g.inner(&f).conj(), scale));
        // Linear in the first slot, conjugate linear in the second.
        prop_assert!(close(g.axpy(c, &h).inner(&f), g.inner(&f) + c * h.inner(&f), scale));
        prop_assert!(close(f.inner(&g.axpy(c, &h)), f.inner(&g) + c.conj() * f.inner(&h), scale));
        prop_assert!(f.inner(&f).im.abs() <= 1e-12 * f.norm_sqr());
    }

    #[test]
    fn norm_inequalities(seed in any::<u64>(), k in 1usize..8) {
        let w = nat_window(12);
        let (f, g) = (sparse(seed, &w, k), sparse(seed ^ 7, &w, k));
        prop_assert!((&f + &g).norm() <= f.norm() + g.norm() + 1e-12);
        prop_assert!(f.inner(&g).norm() <= f.norm() * g.norm() * (1.0 + 1e-12));
        prop_assert!((&f - &f).is_empty());
        prop_assert_eq!(f.restrict(|_| true), f.clone());
    }

    #[test]
    fn labels_round_trip(n in any::<u64>(), ray in 1u8..=2, depth in 1u32..1000, k in 1u32..1000, j in 0u64..100) {
        let labels = [
            Label::Nat(n),
            Label::Vertex(VertexKey::Center),
            Label::Vertex(VertexKey::Trunk(k)),
            Label::Vertex(VertexKey::Branch { ray, depth }),
            Label::Vertex(VertexKey::Node(k)),
            Label::block(j, Label::Nat(n)),
            Label::block(j, Label::Vertex(VertexKey::Branch { ray, depth })),
        ];
        for l in labels {
            prop_assert_eq!(l.to_string().parse::<Label>().unwrap(), l);
        }
    }

    #[test]
    fn adjoint_duality_on_every_operator_kind(seed in any::<u64>(), dim in 1usize..7, size in 2u32..30) {
        let mut rng = rng_from_seed(seed);
        let m = FiniteMatrixOp::new(random_matrix(&mut rng, dim)).unwrap();
        prop_assert!(duality_defect(&m, m.labels(), seed) < 1e-12);

        let shift = shift_isometry();
        prop_assert!(duality_defect(shift.as_ref(), nat_window(20), seed) < 1e-12);

        let coeffs: Vec<(i64, Complex64)> = (-2..=2).map(|j| (j, complex_gaussian(&mut rng))).collect();
        let t = BandedToeplitz::new(coeffs);
        prop_assert!(duality_defect(&t, nat_window(20), seed) < 1e-12);

        let tree = random_tree_shift(&mut rng, size, 0.2);
        let window: Vec<Label> = tree.tree().materialized_vertices().into_iter().map(Label::Vertex).collect();
        prop_assert!(duality_defect(&tree, window, seed) < 1e-12);

        let sum = direct_sum(shift_isometry(), ScaleRule::Poly { degree: 1 }).unwrap();
        let window: Vec<Label> = (0..4).flat_map(|j| (0..5).map(move |i| Label::block(j, Label::Nat(i)))).collect();
        prop_assert!(duality_defect(&sum, window, seed) < 1e-12);
    }

    #[test]
    fn hermitian_eigendecomposition_reconstructs(seed in any::<u64>(), dim in 1usize..12) {
        let h = random_hermitian(&mut rng_from_seed(seed), dim);
        let eig = herm_eig(&h, 1e-12).unwrap();
        let scale = h.norm().max(1.0);
        prop_assert!((eig.reconstruct() - &h).norm() <= 1e-10 * scale);
        let v = &eig.eigenvectors;
        prop_assert!((v.adjoint() * v - CMat::identity(dim, dim)).norm() <= 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).all(|p| p[0] <= p[1]));
        // Trace is the sum of the eigenvalues.
        let trace: f64 = h.diagonal().iter().map(|z| z.re).sum();
        prop_assert!((trace - eig.eigenvalues.iter().sum::<f64>()).abs() <= 1e-10 * scale);
    }

    #[test]
    fn modulus_and_polar(seed in any::<u64>(), dim in 1usize..7, rank_drop in 0usize..2) {
        let mut rng = rng_from_seed(seed);
        let mut c = random_matrix(&mut rng, dim);
        if rank_drop == 1 {
            c.column_mut(0).fill(Complex64::new(0.0, 0.0));
        }
        let scale = matrix_scale(&c).max(1.0);
        let m = modulus(&c);
        prop_assert!((&m * &m - c.adjoint() * &c).norm() <= 1e-9 * scale * scale);
        let p = polar(&c);
        prop_assert!((&p.u * &p.modulus - &c).norm() <= 1e-9 * scale);
        // U*U is the projection onto the range of |C|.
        let q = p.u.adjoint() * &p.u;
        prop_assert!((&q * &q - &q).norm() <= 1e-8);
    }

    #[test]
    fn witnesses_replay(seed in any::<u64>(), dim in 2usize..7) {
        let c = random_matrix(&mut rng_from_seed(seed), dim);
        let op = FiniteMatrixOp::new(c).unwrap();
        let probes = ProbeConfig::with_window(seed, op.labels());
        let tol = TolerancePolicy::default();
        let v = quasinormal_test(&op, &probes, &tol);
        prop_assert!(v.is_fails());
        let (l, r) = quasinormal_words();
        let w = v.witness.as_ref().unwrap();
        prop_assert!((w.vector.norm() - 1.0).abs() < 1e-12);
        prop_assert!((identity_residual(&op, &l, &r, &w.vector) - v.discrepancy).abs() <= 1e-12 * v.discrepancy.max(1.0));
        let v3 = power_identity_test(&op, 3, &probes, &tol);
        let w3 = v3.witness.as_ref().unwrap();
        let res = identity_residual(&op, &Word::gram_power(3), &Word::adjoint_power_times_power(3), &w3.vector);
        prop_assert!((res - v3.discrepancy).abs() <= 1e-12 * v3.discrepancy.max(1.0));
    }

    #[test]
    fn normal_matrices_satisfy_every_identity(seed in any::<u64>(), dim in 1usize..7) {
        let (c, _, _) = random_normal(&mut rng_from_seed(seed), dim);
        let op = FiniteMatrixOp::new(c.clone()).unwrap();
        let probes = ProbeConfig::with_window(seed, op.labels());
        let tol = TolerancePolicy::new(1e-12, 1e-9).unwrap();
        prop_assert!(quasinormal_test(&op, &probes, &tol).is_holds());
        for n in 0..=6 {
            prop_assert!(power_identity_test(&op, n, &probes, &tol).is_holds(), "n = {}", n);
        }
        let m1 = c.adjoint() * &c;
        let v = moment_solvability_test(&m1, &m1.pow(2), &m1.pow(3), &tol).unwrap();
        prop_assert!(v.is_holds());
    }

    #[test]
    fn tree_criterion_matches_the_operator_identity(seed in any::<u64>(), size in 2u32..25, zeros in 0.0f64..1.0, n in 2u32..5) {
        let s = random_tree_shift(&mut rng_from_seed(seed), size, zeros);
        let vertices = s.tree().materialized_vertices();
        let window: Vec<Label> = vertices.iter().map(|v| Label::Vertex(*v)).collect();
        let probes = ProbeConfig::with_window(seed, window);
        let tol = TolerancePolicy::new(1e-12, 1e-9).unwrap();
        let vertexwise = prop_ws_test(&s, n, &vertices, &tol);
        let operator = power_identity_test(&s, n, &probes, &tol);
        prop_assert_eq!(vertexwise.status, operator.status);
    }

    #[test]
    fn orthogonal_sums_are_quasinormal_blockwise(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let mut blocks: Vec<CMat> = (0..3).map(|i| random_normal(&mut rng, 1 + i).0).collect();
        let bad = rng.random_bool(0.5);
        if bad {
            blocks.push(random_matrix(&mut rng, 3));
        }
        let ops: Vec<OpRef> = blocks.iter().map(|b| Arc::new(FiniteMatrixOp::new(b.clone()).unwrap()) as OpRef).collect();
        let sum = DirectSumOp::from_blocks(ops);
        let window = sum.natural_window().unwrap();
        let probes = ProbeConfig::with_window(seed, window);
        let v = quasinormal_test(&sum, &probes, &TolerancePolicy::new(1e-12, 1e-9).unwrap());
        prop_assert_eq!(v.is_fails(), bad);
    }

    #[test]
    fn reports_serialize_deterministically(seed in any::<u64>(), dim in 2usize..5) {
        let c = random_matrix(&mut rng_from_seed(seed), dim);
        let op = FiniteMatrixOp::new(c).unwrap();
        let probes = ProbeConfig::with_window(seed, op.labels());
        let build = || {
            let mut r = Report::new(op.descriptor());
            r.push("quasinormal", "a", quasinormal_test(&op, &probes, &TolerancePolicy::default()));
            r.to_json_string()
        };
        let text = build();
        prop_assert_eq!(&text, &build());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<&String> = v["entries"][0].as_object().unwrap().keys().collect();
        prop_assert_eq!(&keys[..4], &["predicate", "anchor", "status", "discrepancy"]);
    }
}

#[test]
fn isometric_shift_is_quasinormal_but_not_normal() {
    let s = shift_isometry();
    let probes = ProbeConfig::with_window(0, nat_window(16));
    let tol = TolerancePolicy::default();
    assert!(quasinormal_test(s.as_ref(), &probes, &tol).is_holds());
    for n in 0..6 {
        assert!(power_identity_test(s.as_ref(), n, &probes, &tol).is_holds());
    }
    let v = quasinormal::predicates::normality_test(s.as_ref(), &probes, &tol);
    assert!(v.is_fails());
    // (S*S − SS*) e_0 = e_0.
    assert!((v.discrepancy - 1.0).abs() < 1e-12);
}

#[test]
fn sampling_is_reproducible_and_matrix_scale_is_consistent() {
    let a = random_matrix(&mut rng_from_seed(5), 4);
    let b = random_matrix(&mut rng_from_seed(5), 4);
    assert_eq!(a, b);
    let cfg = ProbeConfig::with_window(9, nat_window(8));
    assert_eq!(cfg.probes(), cfg.probe_iter().collect::<Vec<_>>());
    assert!(matrix_scale(&a) <= a.norm() + 1e-12);
}
