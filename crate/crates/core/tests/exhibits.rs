use num_complex::Complex64;
use quasinormal::exhibits::{
    build_named, build_prz2, gamma_n, harmonic_threshold_index, Exhibit, ExhibitOptions,
    Prz2Params, CATALOG,
};
use quasinormal::verdict::Status;
use quasinormal::{Error, VertexKey};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn prz2_defaults_meet_the_weight_constraints() {
    // Constraints on the weights, checked here without the library's validator:
    // |α₁|² + |α₂|² = 1, |α₁β₁|² + |α₂β₂|² = 1, (1 − |β₁|)(1 − |β₂|) ≠ 0.
    let p = Prz2Params::default();
    let [a1, a2] = p.alpha.map(|z| z.norm());
    let [b1, b2] = p.beta.map(|z| z.norm());
    assert!((a1 * a1 + a2 * a2 - 1.0).abs() < 1e-15);
    assert!(((a1 * b1).powi(2) + (a2 * b2).powi(2) - 1.0).abs() < 1e-15);
    assert!((1.0 - b1) * (1.0 - b2) != 0.0);
}

#[test]
fn prz2_rejects_invalid_weights() {
    let bad_alpha = Prz2Params {
        alpha: [c(0.5), c(0.5)],
        ..Prz2Params::default()
    };
    assert!(matches!(build_prz2(&bad_alpha), Err(Error::Constraint(_))));
    let unit_beta = Prz2Params {
        beta: [c(1.0), c(1.0)],
        ..Prz2Params::default()
    };
    assert!(matches!(build_prz2(&unit_beta), Err(Error::Constraint(_))));
    let zero = Prz2Params {
        alpha: [c(1.0), c(0.0)],
        beta: [c(0.5), c(1.0)],
        ..Prz2Params::default()
    };
    assert!(build_prz2(&zero).is_err());
}

#[test]
fn prz2_holds_for_every_kappa() {
    for name in [
        "prz2:kappa=0",
        "prz2:kappa=1",
        "prz2:kappa=5",
        "prz2:kappa=inf",
    ] {
        let r = build_named(name, None)
            .unwrap()
            .run(&ExhibitOptions::default());
        assert!(r.all_expectations_met(), "{name}: {:#?}", r.summary_lines());
    }
}

#[test]
fn prz3_weights_follow_gamma() {
    for n in 2..=6u32 {
        let scan = gamma_n(n).unwrap();
        let spec = build_named(&format!("prz3:n={n}"), None).unwrap();
        let Exhibit::Tree(t) = &spec.exhibit else {
            panic!()
        };
        let w = |ray, depth| t.op.weight(&VertexKey::Branch { ray, depth });
        let e = 1.0 / (2.0 * (n as f64 - 1.0));
        assert!((w(1, 1).norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((w(2, 1).norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((w(1, 2).norm() - scan.gamma.powf(e)).abs() < 1e-15);
        assert!((w(2, 5).norm() - (2.0 - scan.gamma).powf(e)).abs() < 1e-15);
        assert!(scan.scaled_f > 0.0 && scan.scaled_f <= 1.0);
        // T_{2,0}: the branching vertex is the root.
        assert!(t.op.tree().parent(&VertexKey::Center).is_none());
    }
}

#[test]
fn harmonic_threshold() {
    let (j, sum) = harmonic_threshold_index(10.0);
    let direct: f64 = (0..=j).map(|k| 1.0 / (k + 1) as f64).sum();
    let before: f64 = (0..j).map(|k| 1.0 / (k + 1) as f64).sum();
    assert_eq!(sum, direct);
    assert!(direct > 10.0 && before <= 10.0);
    assert_eq!(j, 12366);
}

#[test]
fn every_catalog_entry_runs_clean() {
    for name in CATALOG {
        let spec = build_named(name, None).unwrap();
        let r = spec.run(&ExhibitOptions::default());
        assert!(r.all_expectations_met(), "{name}: {:#?}", r.summary_lines());
        assert!(r.has_expectations());
        // Every declared expectation shows up exactly once.
        for e in &spec.expected {
            assert_eq!(
                r.entries
                    .iter()
                    .filter(|x| x.predicate == e.predicate)
                    .count(),
                1,
                "{name}: {}",
                e.predicate
            );
        }
    }
}

#[test]
fn expectations_are_not_vacuous() {
    let spec = build_named("prz2", None).unwrap();
    let statuses: Vec<Status> = spec.expected.iter().map(|e| e.status).collect();
    assert!(statuses.contains(&Status::Holds));
    assert!(statuses.contains(&Status::Fails));
}

#[test]
fn bad_exhibit_parameters() {
    assert!(matches!(
        build_named("nope", None),
        Err(Error::UnknownExhibit(_))
    ));
    assert!(build_named("prz3:n=1", None).is_err());
    assert!(build_named("prz4:r=poly0", None).is_err());
    assert!(build_named("prz4:n=1", None).is_err());
    assert!(build_named("prz1:N=3", None).is_err());
    assert!(build_named("prz2:kappa=x", None).is_err());
}
