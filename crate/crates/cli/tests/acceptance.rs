//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Each criterion checks library verdicts against an
//! independent oracle (dense matrix algebra, closed forms, or direct sums)
//! and must finish within its time budget.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use quasinormal::corpus::{corpus_tolerance, CorpusConfig, Instance, LEMS5_MAX};
use quasinormal::exhibits::{
    achtenz_demo, build_named, build_prz1, build_prz3, default_symbol, f_of, random_block_family,
    Exhibit, ExhibitOptions,
};
use quasinormal::operator::{matrix_of, matrix_scale};
use quasinormal::predicates::{
    hyponormal_falsify, hyponormal_form, normality_test, paranormal_decisive, paranormal_excess,
    paranormal_falsify, paranormal_sampling, power_identity_test, quasinormal_test, ths1_agreement,
    DEFAULT_CLUSTER_TOL,
};
use quasinormal::probe::{random_matrix, random_normal, rng_from_seed, ProbeConfig};
use quasinormal::tree::{prop_ws_test, random_tree_shift};
use quasinormal::verdict::Status;
use quasinormal::{CMat, FiniteMatrixOp, Label, TolerancePolicy, VertexKey};

const BUDGET: Duration = Duration::from_secs(10);
const CORPUS_SEED: u64 = 42;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn corpus() -> Vec<Instance> {
    // 500 Gaussian matrices plus 100 constructed normal ones, dims 2..=6.
    let cfg = CorpusConfig::new(CORPUS_SEED, 500, 2..=6);
    assert_eq!(cfg.normal_count, 100);
    cfg.instances()
}

fn op(c: &CMat) -> FiniteMatrixOp {
    FiniteMatrixOp::new(c.clone()).unwrap()
}

fn exact_probes(c: &CMat) -> ProbeConfig {
    ProbeConfig {
        seed: 0,
        num_probes: 0,
        support_size: 1,
        label_window: (0..c.nrows() as u64).map(Label::Nat).collect(),
    }
}

/// Dense oracle for a word identity: Frobenius residual within
/// `abs + rel · scale^degree`.
fn dense_equal(lhs: &CMat, rhs: &CMat, tol: &TolerancePolicy, scale: f64, degree: i32) -> bool {
    (lhs - rhs).norm() <= tol.threshold(scale.powi(degree))
}

fn dense_quasinormal(c: &CMat, tol: &TolerancePolicy) -> bool {
    let a = c.adjoint();
    dense_equal(&(c * &a * c), &(&a * c * c), tol, matrix_scale(c), 3)
}

fn dense_power_identity(c: &CMat, n: u32, tol: &TolerancePolicy) -> bool {
    let a = c.adjoint();
    dense_equal(
        &(&a * c).pow(n),
        &(a.pow(n) * c.pow(n)),
        tol,
        matrix_scale(c),
        2 * n as i32,
    )
}

fn dense_normal(c: &CMat, tol: &TolerancePolicy) -> bool {
    let a = c.adjoint();
    dense_equal(&(&a * c), &(c * &a), tol, matrix_scale(c), 2)
}

fn criterion_1() -> Outcome {
    let tol = corpus_tolerance();
    let mut disagreements = 0;
    let mut oracle_mismatch = 0;
    let mut quasinormal = 0;
    let instances = corpus();
    for inst in &instances {
        let r = ths1_agreement(&inst.matrix, &tol, DEFAULT_CLUSTER_TOL);
        let statuses: Vec<Status> = [
            "ths1.condition_i",
            "ths1.condition_iii",
            "ths1.condition_iv",
        ]
        .iter()
        .map(|p| r.entry(p).unwrap().verdict.status)
        .collect();
        if statuses.iter().any(|s| *s != statuses[0])
            || !r.entry("ths1.agreement").unwrap().verdict.is_holds()
        {
            disagreements += 1;
        }
        let dense = dense_quasinormal(&inst.matrix, &tol);
        if dense != (statuses[0] == Status::Holds) {
            oracle_mismatch += 1;
        }
        quasinormal += dense as usize;
    }
    outcome(
        disagreements == 0 && oracle_mismatch == 0,
        format!(
            "{} instances, {quasinormal} quasinormal; (i)/(iii)/(iv) disagreements {disagreements}, \
             dense-oracle mismatches {oracle_mismatch}",
            instances.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let tol = corpus_tolerance();
    let mut violations = 0;
    let mut oracle_mismatch = 0;
    let mut quasinormal = 0;
    let instances = corpus();
    for inst in &instances {
        let c = &inst.matrix;
        let (o, p) = (op(c), exact_probes(c));
        let qn = quasinormal_test(&o, &p, &tol).is_holds();
        let pid: Vec<bool> = (0..=LEMS5_MAX)
            .map(|n| power_identity_test(&o, n, &p, &tol).is_holds())
            .collect();
        if qn != (pid[2] && pid[3]) {
            violations += 1;
        }
        if qn {
            quasinormal += 1;
            if !pid.iter().all(|h| *h) {
                violations += 1;
            }
        }
        let dense_ok = dense_quasinormal(c, &tol) == qn
            && (2..=LEMS5_MAX).all(|n| dense_power_identity(c, n, &tol) == pid[n as usize]);
        if !dense_ok {
            oracle_mismatch += 1;
        }
    }
    outcome(
        violations == 0 && oracle_mismatch == 0 && quasinormal >= 100,
        format!(
            "{} instances, {quasinormal} quasinormal; biconditional/power violations {violations}, \
             dense-oracle mismatches {oracle_mismatch}",
            instances.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let tol = TolerancePolicy::new(1e-12, 1e-8).unwrap();
    let mut rng = rng_from_seed(3);
    let mut disagreements = 0;
    let (mut holds, mut fails) = (0, 0);
    for i in 0..100u32 {
        let size = 2 + i % 39;
        // From dense weights to mostly zero ones, so both verdicts occur.
        let zero_prob = [0.0, 0.2, 0.5, 0.8, 0.95][(i % 5) as usize];
        let s = random_tree_shift(&mut rng, size, zero_prob);
        let vertices: Vec<VertexKey> = s.tree().materialized_vertices();
        let labels: Vec<Label> = vertices.iter().map(|v| Label::Vertex(*v)).collect();
        let m = matrix_of(&s, &labels).unwrap().into_matrix();
        let a = m.adjoint();
        let scale = m.norm();
        for n in 2..=4u32 {
            let residual = ((&a * &m).pow(n) - a.pow(n) * m.pow(n)).norm();
            let oracle = residual <= 1e-8 * scale.powi(2 * n as i32);
            let v = prop_ws_test(&s, n, &vertices, &tol);
            if v.is_holds() {
                holds += 1;
            } else {
                fails += 1;
            }
            if v.is_holds() != oracle {
                disagreements += 1;
            }
        }
    }
    outcome(
        disagreements == 0 && holds > 0 && fails > 0,
        format!(
            "300 (tree, n) pairs, {holds} Holds / {fails} Fails, disagreements {disagreements}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let spec = build_named("prz2", None).unwrap();
    let Exhibit::Tree(t) = &spec.exhibit else {
        unreachable!()
    };
    let s = &t.op;
    let tol = TolerancePolicy::default();
    let window = s.orbit_window(4);
    let probes = |n: usize| ProbeConfig {
        seed: 0,
        num_probes: n,
        support_size: 6,
        label_window: window.clone(),
    };
    let mut ok = true;
    let mut notes = Vec::new();

    let pid2 = power_identity_test(s, 2, &probes(200), &tol);
    ok &= pid2.is_holds() && pid2.discrepancy < 1e-10;
    notes.push(format!("identity(2) residual {:.1e}", pid2.discrepancy));

    let qn = quasinormal_test(s, &probes(200), &tol);
    let at_zero = qn.witness.as_ref().is_some_and(|w| {
        w.vector
            .support()
            .eq([Label::Vertex(VertexKey::Center)].iter())
    });
    ok &= qn.is_fails() && at_zero && qn.discrepancy > 0.1;
    // Child condition at 0: d(0) = 1, d(i,1) = |β_i|², weights |α_i|² = 1/2.
    let oracle = (0.5 * (1.0f64 - 0.5).powi(2) + 0.5 * (1.0f64 - 1.5).powi(2)).sqrt();
    ok &= (qn.discrepancy - oracle).abs() < 1e-12;
    notes.push(format!(
        "quasinormal Fails at 0, discrepancy {:.4}",
        qn.discrepancy
    ));

    let hy = hyponormal_falsify(s, &probes(200), &tol);
    let replay = hy.witness.as_ref().map(|w| hyponormal_form(s, &w.vector));
    ok &= hy.is_fails() && replay.is_some_and(|q| q < -1e-3 && (q + hy.discrepancy).abs() < 1e-12);
    notes.push(format!(
        "hyponormal replayed form {:.4}",
        replay.unwrap_or(f64::NAN)
    ));

    let pa = paranormal_falsify(s, &probes(10_000), &tol);
    ok &= !pa.is_fails() && pa.context.probes_used >= 10_000;
    notes.push(format!(
        "paranormal {} after {} probes",
        pa.status, pa.context.probes_used
    ));

    let report = spec.run(&ExhibitOptions::default());
    ok &= report.all_expectations_met();
    outcome(ok, notes.join("; "))
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut min_margin = f64::INFINITY;
    let mut notes = Vec::new();
    for n in 2..=6u32 {
        let spec = build_prz3(n, 8).unwrap();
        let Exhibit::Tree(t) = &spec.exhibit else {
            unreachable!()
        };
        let report = spec.run(&ExhibitOptions::default());
        ok &= report.all_expectations_met();
        // Weights straight from the operator: α_i on (i,1), β_i on (i,2).
        let w = |ray: u8, depth: u32| t.op.weight(&VertexKey::Branch { ray, depth }).norm_sqr();
        let (a1, a2, b1, b2) = (w(1, 1), w(2, 1), w(1, 2), w(2, 2));
        let mut holds_at = Vec::new();
        for k in 0..=n + 3 {
            let v = &report
                .entry(&format!("power_identity[k={k}]"))
                .unwrap()
                .verdict;
            let oracle = k <= 1 || {
                let s = a1 * b1.powi(k as i32 - 1) + a2 * b2.powi(k as i32 - 1);
                (s - 1.0).abs() < 1e-12
            };
            ok &= v.is_holds() == oracle;
            ok &= v.is_holds() == (k <= 1 || k == n);
            if v.is_holds() {
                holds_at.push(k);
            }
            if k >= 2 && k != n {
                let m = t.prz3_margin(k).unwrap();
                min_margin = min_margin.min(m);
                ok &= m > 1e-4;
            }
        }
        ok &= report.entry("quasinormal").unwrap().verdict.is_fails();
        // The parameter γ_n must satisfy 0 < (n−1) f(γ_n) ≤ 1 and β_1 = γ^{1/(2(n−1))}.
        let gamma = b1.powi(n as i32 - 1);
        let scaled = (n - 1) as f64 * f_of(gamma).unwrap();
        ok &= scaled > 0.0
            && scaled <= 1.0
            && ((b2.powi(n as i32 - 1)) - (2.0 - gamma)).abs() < 1e-12;
        notes.push(format!("n={n}: holds at {holds_at:?}"));
    }
    outcome(
        ok,
        format!(
            "{}; smallest Fails margin {min_margin:.3e}",
            notes.join(", ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let tol = corpus_tolerance();
    let mut violations = 0;
    let instances = corpus();
    for inst in &instances {
        let (o, p) = (op(&inst.matrix), exact_probes(&inst.matrix));
        let pid = power_identity_test(&o, 2, &p, &tol).is_holds();
        let normal = normality_test(&o, &p, &tol).is_holds();
        if pid != normal || normal != dense_normal(&inst.matrix, &tol) {
            violations += 1;
        }
    }

    let tol = TolerancePolicy::default();
    let mut rng = rng_from_seed(6);
    let mut contradictions = 0;
    let mut replay_errors = 0;
    let (mut decisive_fails, mut sampled_fails) = (0, 0);
    for i in 0..50 {
        let dim = 2 + i % 5;
        let c = if i % 2 == 0 {
            random_matrix(&mut rng, dim)
        } else {
            random_normal(&mut rng, dim).0
        };
        let o = op(&c);
        let decisive = paranormal_decisive(&c, &tol);
        let probes = ProbeConfig {
            seed: i as u64,
            num_probes: 100_000,
            support_size: dim,
            label_window: o.labels(),
        };
        let sampled = paranormal_sampling(&o, &probes, &tol);
        decisive_fails += decisive.is_fails() as usize;
        if sampled.is_fails() {
            sampled_fails += 1;
            if decisive.is_holds() {
                contradictions += 1;
            }
            let w = &sampled.witness.as_ref().unwrap().vector;
            if (paranormal_excess(&o, w) - sampled.discrepancy).abs() > 1e-12 {
                replay_errors += 1;
            }
        }
    }
    outcome(
        violations == 0 && contradictions == 0 && replay_errors == 0,
        format!(
            "{} instances, paran2 violations {violations}; 50 paranormality runs, decisive Fails \
             {decisive_fails}, sampling Fails {sampled_fails}, contradictions {contradictions}",
            instances.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let spec = build_prz1(&[16, 32, 64], &default_symbol()).unwrap();
    let Exhibit::Prz1(p) = &spec.exhibit else {
        unreachable!()
    };
    let banded = p.banded_identity_residual(64);
    // Dense oracle: S_N* T_N S_N against the (N−1)-section of T_φ.
    let t = |n: usize| {
        CMat::from_fn(n, n, |j, k| match j as i64 - k as i64 {
            0 => Complex64::new(2.0, 0.0),
            1 | -1 => Complex64::new(1.0, 0.0),
            _ => Complex64::new(0.0, 0.0),
        })
    };
    let s = CMat::from_fn(64, 64, |j, k| {
        Complex64::new((j == k + 1) as u8 as f64, 0.0)
    });
    let sts = s.adjoint() * t(64) * &s;
    let dense = (sts.view((0, 0), (63, 63)) - t(63))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let (r16, r64) = (p.row(16), p.row(64));
    let ratio = r64.discrepancy / r16.discrepancy;
    let ok = banded <= 1e-14
        && dense <= 1e-14
        && ratio < 1e-2
        && r64.commutator > 0.1
        && spec.run(&ExhibitOptions::default()).all_expectations_met();
    outcome(
        ok,
        format!(
            "banded residual {banded:.1e} (dense {dense:.1e}); discrepancy N=16 {:.3e}, N=64 {:.3e}, \
             ratio {ratio:.2e}; commutator at N=64 {:.3}",
            r16.discrepancy, r64.discrepancy, r64.commutator
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [2, 3] {
        let spec = build_named(&format!("prz4:r=poly1,n={n}"), None).unwrap();
        let Exhibit::Prz4(p) = &spec.exhibit else {
            unreachable!()
        };
        ok &= (0..100).all(|j| p.r(j) == (j + 1) as f64);
        let report = spec.run(&ExhibitOptions::default());
        ok &= report.all_expectations_met();
        let side = &report.entry("adjoint_power_side").unwrap().verdict;
        ok &= side.is_holds() && side.discrepancy == 0.0;
        for e in [
            "divergence.numeric",
            "divergence.closed_form",
            "tail_bound",
            "strict_inclusion",
        ] {
            ok &= report.entry(e).unwrap().verdict.is_holds();
        }
        let tail = report.entry("tail_bound").unwrap().verdict.discrepancy;
        ok &= tail < std::f64::consts::PI.powi(2) / 6.0;
        ok &= report
            .entry("divergence.closed_form")
            .unwrap()
            .verdict
            .discrepancy
            == 1e3;
        notes.push(format!(
            "n={n}: (C^n)* side {:.1}, tail {tail:.6}",
            side.discrepancy
        ));
    }
    // Direct summation, independent of the library.
    let sum: f64 = (0..=12367u64).map(|j| 1.0 / (j + 1) as f64).sum();
    ok &= sum > 10.0;
    notes.push(format!("Σ_(j≤12367) 1/(j+1) = {sum:.6}"));
    outcome(ok, notes.join("; "))
}

fn block_diag(blocks: &[CMat]) -> CMat {
    let n = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = CMat::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        m.view_mut((at, at), b.shape()).copy_from(b);
        at += b.nrows();
    }
    m
}

fn criterion_9() -> Outcome {
    let tol = TolerancePolicy::default();
    let mut rng = rng_from_seed(9);
    let mut violations = 0;
    let mut quasinormal_sums = 0;
    for _ in 0..50 {
        let blocks = random_block_family(&mut rng, false);
        let whole = block_diag(&blocks);
        let every_block = blocks.iter().all(|b| dense_quasinormal(b, &tol));
        let sum_dense = dense_quasinormal(&whole, &tol);
        let report = achtenz_demo(blocks)
            .unwrap()
            .run(&ExhibitOptions::default());
        let sum_verdict = report.entry("quasinormal.sum").unwrap().verdict.is_holds();
        quasinormal_sums += sum_verdict as usize;
        if !report.all_expectations_met() || sum_verdict != every_block || sum_dense != every_block
        {
            violations += 1;
        }
    }
    outcome(
        violations == 0 && quasinormal_sums > 0 && quasinormal_sums < 50,
        format!("50 direct sums, {quasinormal_sums} quasinormal; violations {violations}"),
    )
}

fn criterion_10() -> Outcome {
    let commands: &[&[&str]] = &[
        &[
            "check",
            "--exhibit",
            "prz3:n=3",
            "--suite",
            "embry",
            "--nmax",
            "6",
        ],
        &[
            "check",
            "--matrix",
            "[[0,1],[0,0]]",
            "--predicate",
            "quasinormal",
            "--predicate",
            "hyponormal",
        ],
        &[
            "check",
            "--exhibit",
            "prz2",
            "--predicate",
            "paranormal",
            "--seed",
            "7",
        ],
        &["exhibit", "prz1", "--N", "16,32,64"],
        &["exhibit", "prz2"],
        &["exhibit", "prz3:n=4"],
        &["exhibit", "prz4:r=poly1,n=2"],
        &["exhibit", "achtenZ:seed=3"],
        &["corpus", "--seed", "42", "--count", "100", "--dims", "2..6"],
    ];
    let mut differing = Vec::new();
    for args in commands {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_quasinormal"))
                .args(*args)
                .arg("--no-timestamp")
                .output()
                .expect("binary runs")
        };
        let (a, b) = (run(), run());
        if a.stdout != b.stdout || a.stdout.is_empty() || a.status.code() != Some(0) {
            differing.push(args.join(" "));
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands rerun, differing or failing: {differing:?}",
            commands.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("characterization agreement", criterion_1),
        ("power identity biconditional", criterion_2),
        ("tree shift oracle equivalence", criterion_3),
        ("prz2 exhibit", criterion_4),
        ("prz3 separation", criterion_5),
        ("paran2 and paranormality", criterion_6),
        ("prz1 convergence", criterion_7),
        ("prz4 certificates", criterion_8),
        ("orthogonal sums", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let ok = out.ok && elapsed < BUDGET;
        failed += !ok as usize;
        println!(
            "{} criterion {:>2} {name}: {} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
