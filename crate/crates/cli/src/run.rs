//! Turns a [`RunConfig`] into a [`Report`].

use std::sync::Arc;

use num_complex::Complex64;
use quasinormal::corpus::{corpus_tolerance, run_corpus, CorpusConfig};
use quasinormal::exhibits::{build_named, Exhibit, ExhibitOptions, ExhibitSpec};
use quasinormal::operator::{shift_isometry, BandedToeplitz};
use quasinormal::predicates::{
    anchors, embry_suite, hyponormal_falsify, moment_solvability_test, normality_test,
    paran2_check, paranormal_falsify, paranormal_window_test, power_identity_test,
    quasinormal_power_corollary_check, quasinormal_test, ths1_agreement, DEFAULT_CLUSTER_TOL,
};
use quasinormal::probe::ProbeConfig;
use quasinormal::tree::{prop_ws_test, quasinormal_tree_test, TreeShiftOp};
use quasinormal::verdict::Report;
use quasinormal::{CMat, Error, FiniteMatrixOp, Label, OpRef, Result, TolerancePolicy, VertexKey};

use crate::config::{matrix_from_rows, OperatorSpec, RunConfig};

/// Default window on `ℓ²(ℤ₊)` for the shift and Toeplitz operators.
const NAT_WINDOW: u64 = 32;

struct Subject {
    op: OpRef,
    window: Vec<Label>,
    matrix: Option<CMat>,
    tree: Option<TreeShiftOp>,
    exhibit: Option<ExhibitSpec>,
}

fn tolerance(cfg: &RunConfig) -> Result<TolerancePolicy> {
    TolerancePolicy::new(cfg.tolerance.abs_tol, cfg.tolerance.rel_tol)
}

/// Highest operator power any requested check involves.
fn order(cfg: &RunConfig) -> u32 {
    let mut order = 3;
    if cfg.suite.as_deref() == Some("embry") {
        order = order.max(cfg.nmax);
    }
    for p in &cfg.predicates {
        let args: Vec<u32> = p
            .split(':')
            .skip(1)
            .filter_map(|a| a.parse().ok())
            .collect();
        order = order.max(
            args.iter()
                .product::<u32>()
                .max(args.iter().copied().max().unwrap_or(0)),
        );
    }
    order
}

fn build_subject(cfg: &RunConfig) -> Result<Subject> {
    let order = order(cfg);
    let mut s = match &cfg.operator {
        OperatorSpec::Matrix(rows) => {
            let m = matrix_from_rows(rows)?;
            let op = FiniteMatrixOp::new(m.clone())?;
            Subject {
                window: op.labels(),
                op: Arc::new(op),
                matrix: Some(m),
                tree: None,
                exhibit: None,
            }
        }
        OperatorSpec::Exhibit(name) => {
            let spec = build_named(name, cfg.dims.as_deref())?;
            let (op, window) = spec.operator(order);
            let matrix = op.as_matrix().map(|m| m.matrix().clone());
            let tree = match &spec.exhibit {
                Exhibit::Tree(t) => Some(t.op.clone()),
                _ => None,
            };
            Subject {
                op,
                window,
                matrix,
                tree,
                exhibit: Some(spec),
            }
        }
        OperatorSpec::Tree(t) => {
            let op = t.build()?;
            Subject {
                window: op.orbit_window(order),
                op: Arc::new(op.clone()),
                matrix: None,
                tree: Some(op),
                exhibit: None,
            }
        }
        OperatorSpec::Shift => Subject {
            op: shift_isometry(),
            window: (0..NAT_WINDOW).map(Label::Nat).collect(),
            matrix: None,
            tree: None,
            exhibit: None,
        },
        OperatorSpec::Toeplitz(coeffs) => Subject {
            op: Arc::new(BandedToeplitz::new(
                coeffs
                    .iter()
                    .map(|&(m, re, im)| (m, Complex64::new(re, im))),
            )),
            window: (0..NAT_WINDOW).map(Label::Nat).collect(),
            matrix: None,
            tree: None,
            exhibit: None,
        },
    };
    if !cfg.probes.window.is_empty() {
        s.window = cfg
            .probes
            .window
            .iter()
            .map(|l| l.parse())
            .collect::<Result<_>>()?;
    }
    Ok(s)
}

fn need_matrix<'a>(s: &'a Subject, what: &str) -> Result<&'a CMat> {
    s.matrix
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter(format!("{what} needs a finite matrix operator")))
}

fn need_tree<'a>(s: &'a Subject, what: &str) -> Result<&'a TreeShiftOp> {
    s.tree
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter(format!("{what} needs a tree operator")))
}

fn int_args(pred: &str, args: &[&str], count: usize) -> Result<Vec<u32>> {
    if args.len() != count {
        return Err(Error::Parse(format!(
            "predicate `{pred}` takes {count} integer argument(s)"
        )));
    }
    args.iter()
        .map(|a| {
            a.parse().map_err(|_| {
                Error::Parse(format!("`{a}` is not a nonnegative integer in `{pred}`"))
            })
        })
        .collect()
}

fn run_predicate(
    s: &Subject,
    pred: &str,
    probes: &ProbeConfig,
    tol: &TolerancePolicy,
    report: &mut Report,
) -> Result<()> {
    let mut parts = pred.split(':');
    let name = parts.next().unwrap_or_default();
    let args: Vec<&str> = parts.collect();
    let op = s.op.as_ref();
    let vertices = || -> Vec<VertexKey> { s.window.iter().filter_map(Label::as_vertex).collect() };
    match name {
        "quasinormal" | "normality" | "hyponormal" | "paranormal" | "paranormal_window"
        | "ths1" | "paran2" | "moment" | "quasinormal_tree" => {
            int_args(pred, &args, 0)?;
        }
        _ => {}
    }
    match name {
        "quasinormal" => report.push(
            "quasinormal",
            anchors::QUASINORMAL,
            quasinormal_test(op, probes, tol),
        ),
        "normality" => report.push(
            "normality",
            anchors::NORMAL,
            normality_test(op, probes, tol),
        ),
        "hyponormal" => report.push(
            "hyponormal",
            anchors::HYPONORMAL,
            hyponormal_falsify(op, probes, tol),
        ),
        "paranormal" => report.push(
            "paranormal.sampling",
            anchors::PARANORMAL,
            paranormal_falsify(op, probes, tol),
        ),
        "paranormal_window" => report.push(
            "paranormal.window",
            anchors::PARANORMAL,
            paranormal_window_test(op, &s.window, tol),
        ),
        "power_identity" => {
            let n = int_args(pred, &args, 1)?[0];
            report.push(
                format!("power_identity[k={n}]"),
                anchors::POWER,
                power_identity_test(op, n, probes, tol),
            );
        }
        "prop_ws" => {
            let n = int_args(pred, &args, 1)?[0];
            let t = need_tree(s, pred)?;
            report.push(
                format!("prop_ws[n={n}]"),
                anchors::PROP_WS,
                prop_ws_test(t, n, &vertices(), tol),
            );
        }
        "quasinormal_tree" => {
            let t = need_tree(s, pred)?;
            report.push(
                "quasinormal.child_condition",
                anchors::QUASINORMAL,
                quasinormal_tree_test(t, &vertices(), tol),
            );
        }
        "ths1" => report.extend(ths1_agreement(
            need_matrix(s, pred)?,
            tol,
            DEFAULT_CLUSTER_TOL,
        )),
        "paran2" => report.push(
            "paran2",
            anchors::PARAN2,
            paran2_check(need_matrix(s, pred)?, tol),
        ),
        "moment" => {
            let c = need_matrix(s, pred)?;
            let m1 = c.adjoint() * c;
            let m2 = c.adjoint().pow(2) * c.pow(2);
            let m3 = c.adjoint().pow(3) * c.pow(3);
            report.push(
                "moment",
                anchors::MOMENT,
                moment_solvability_test(&m1, &m2, &m3, tol)?,
            );
        }
        "power_corollary" => {
            let a = int_args(pred, &args, 2)?;
            let c = need_matrix(s, pred)?;
            report.push(
                format!("power_corollary[n={},k={}]", a[0], a[1]),
                anchors::POWER_COROLLARY,
                quasinormal_power_corollary_check(c, a[0], a[1], tol),
            );
        }
        _ => return Err(Error::Parse(format!("unknown predicate `{pred}`"))),
    }
    Ok(())
}

/// Evaluates the configuration. The returned report carries the embedded
/// configuration and its hash but no timestamp.
pub fn run_config(cfg: &RunConfig) -> Result<Report> {
    let tol = tolerance(cfg)?;
    let s = build_subject(cfg)?;
    let opts = ExhibitOptions {
        seed: cfg.probes.seed,
        num_probes: cfg.probes.num_probes,
        tol,
    };
    let probes = ProbeConfig {
        seed: cfg.probes.seed,
        num_probes: cfg.probes.num_probes,
        support_size: cfg.probes.support_size,
        label_window: s.window.clone(),
    };

    let suite = match (&cfg.suite, &s.exhibit) {
        (Some(x), _) => Some(x.as_str()),
        (None, Some(_)) if cfg.predicates.is_empty() => Some("exhibit"),
        (None, _) if cfg.predicates.is_empty() => {
            return Err(Error::InvalidParameter(
                "nothing to check: give a predicate or a suite".into(),
            ))
        }
        (None, _) => None,
    };

    let mut report = Report::new(match &s.exhibit {
        Some(e) => e.operator_descriptor(),
        None => s.op.descriptor(),
    });
    match suite {
        None => {}
        Some("exhibit") => {
            let spec = s.exhibit.as_ref().ok_or_else(|| {
                Error::InvalidParameter("the exhibit suite needs an exhibit operator".into())
            })?;
            report = spec.run(&opts);
        }
        Some("embry") => report.extend(embry_suite(s.op.as_ref(), cfg.nmax, &probes, &tol)?),
        Some("ths1") => report.extend(ths1_agreement(
            need_matrix(&s, "ths1")?,
            &tol,
            DEFAULT_CLUSTER_TOL,
        )),
        Some(other) => return Err(Error::Parse(format!("unknown suite `{other}`"))),
    }
    for p in &cfg.predicates {
        run_predicate(&s, p, &probes, &tol, &mut report)?;
    }

    // A check against an exhibit inherits the exhibit's expectations.
    if let Some(spec) = &s.exhibit {
        for e in &mut report.entries {
            if e.expected.is_none() {
                if let Some(x) = spec.expected.iter().find(|x| x.predicate == e.predicate) {
                    e.expected = Some(x.status);
                }
            }
        }
    }

    report.metadata.config = Some(cfg.canonical());
    report.metadata.config_hash = Some(cfg.hash());
    Ok(report)
}

/// Corpus run; the config value embedded in the report is returned alongside.
pub fn corpus_report(cfg: &CorpusConfig) -> Report {
    let tol = corpus_tolerance();
    let mut report = run_corpus(cfg, &tol);
    let value = serde_json::json!({
        "corpus": cfg,
        "tolerance": tol,
    });
    report.metadata.config_hash = Some(crate::config::config_hash(&value));
    report.metadata.config = Some(value);
    report
}

/// 0 when every expectation is met and, absent expectations, nothing is
/// inconclusive; 1 otherwise.
pub fn exit_code(report: &Report) -> i32 {
    if report.all_expectations_met() && (report.has_expectations() || !report.any_inconclusive()) {
        0
    } else {
        1
    }
}
