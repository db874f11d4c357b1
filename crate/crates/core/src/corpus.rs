//! Seeded random-matrix corpus and the structural invariants checked on it.
//!
//! All instances come from a single ChaCha stream seeded from the config:
//! Gaussian matrices first, then constructed normal ones.

use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hilbert::{SparseVec, TolerancePolicy};
use crate::operator::{CMat, FiniteMatrixOp};
use crate::predicates::{
    anchors, embry_suite, moment_solvability_test, paran2_check, power_identity_test,
    quasinormal_test, ths1_agreement,
};
use crate::probe::{random_matrix, random_normal, rng_from_seed, ProbeConfig};
use crate::spectral::DEFAULT_CLUSTER_TOL;
use crate::verdict::{Report, Status, Verdict, VerdictContext, Witness};

/// Highest power identity order checked on quasinormal instances.
pub const LEMS5_MAX: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceKind {
    Generic,
    Normal,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub index: usize,
    pub kind: InstanceKind,
    pub matrix: CMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    /// Gaussian matrices.
    pub count: usize,
    /// Constructed normal matrices, drawn after the Gaussian ones.
    pub normal_count: usize,
    pub min_dim: usize,
    pub max_dim: usize,
}

impl CorpusConfig {
    /// `count` Gaussian matrices plus `count / 5` normal ones.
    pub fn new(seed: u64, count: usize, dims: RangeInclusive<usize>) -> Self {
        Self {
            seed,
            count,
            normal_count: count / 5,
            min_dim: *dims.start(),
            max_dim: *dims.end(),
        }
    }

    pub fn instances(&self) -> Vec<Instance> {
        let mut rng = rng_from_seed(self.seed);
        let dims = self.min_dim.max(1)..=self.max_dim.max(self.min_dim.max(1));
        let mut out = Vec::with_capacity(self.count + self.normal_count);
        for index in 0..self.count {
            let n = rng.random_range(dims.clone());
            out.push(Instance {
                index,
                kind: InstanceKind::Generic,
                matrix: random_matrix(&mut rng, n),
            });
        }
        for i in 0..self.normal_count {
            let n = rng.random_range(dims.clone());
            out.push(Instance {
                index: self.count + i,
                kind: InstanceKind::Normal,
                matrix: random_normal(&mut rng, n).0,
            });
        }
        out
    }
}

/// Corpus tolerance: `1e-12` absolute, `1e-8` relative.
pub fn corpus_tolerance() -> TolerancePolicy {
    TolerancePolicy::new(1e-12, 1e-8).expect("valid tolerance")
}

fn agreement(ok: bool, detail: String, tol: &TolerancePolicy) -> Verdict {
    let ctx = VerdictContext {
        tolerance: *tol,
        ..Default::default()
    };
    if ok {
        Verdict::holds(0.0, ctx).with_note(detail)
    } else {
        Verdict::fails(
            Witness::vector(SparseVec::new()).with_detail(detail),
            1.0,
            ctx,
        )
    }
}

/// Structural invariants of one matrix, each expected to hold:
/// agreement of the quasinormality characterizations, the Embry
/// biconditional, all power identities up to [`LEMS5_MAX`] on quasinormal
/// instances, the finite-dimensional normality criterion, and consistency of
/// the moment test with the order 2 and 3 identities.
pub fn instance_invariants(
    c: &CMat,
    tol: &TolerancePolicy,
) -> Vec<(&'static str, &'static str, Verdict)> {
    let op = FiniteMatrixOp::new(c.clone()).expect("square matrix");
    let probes = ProbeConfig {
        seed: 0,
        num_probes: 0,
        support_size: 1,
        label_window: op.labels(),
    };
    let mut out = Vec::new();

    let ths1 = ths1_agreement(c, tol, DEFAULT_CLUSTER_TOL);
    let agree = ths1
        .entry("ths1.agreement")
        .expect("agreement entry")
        .verdict
        .clone();
    out.push(("ths1", anchors::THS1, agree));

    let embry = embry_suite(&op, 3, &probes, tol).expect("n_max >= 3");
    out.push((
        "embry",
        anchors::EMBRY,
        embry
            .entry("embry.biconditional")
            .expect("biconditional entry")
            .verdict
            .clone(),
    ));

    let qn = quasinormal_test(&op, &probes, tol);
    if qn.is_holds() {
        let failing: Vec<u32> = (0..=LEMS5_MAX)
            .filter(|&n| !power_identity_test(&op, n, &probes, tol).is_holds())
            .collect();
        out.push((
            "lemS5",
            anchors::POWER,
            agreement(
                failing.is_empty(),
                format!("identities failing at {failing:?}"),
                tol,
            ),
        ));
    }

    out.push(("paran2", anchors::PARAN2, paran2_check(c, tol)));

    let m1 = c.adjoint() * c;
    let m2 = c.adjoint().pow(2) * c.pow(2);
    let m3 = c.adjoint().pow(3) * c.pow(3);
    let moment = moment_solvability_test(&m1, &m2, &m3, tol);
    let pid = power_identity_test(&op, 2, &probes, tol).is_holds()
        && power_identity_test(&op, 3, &probes, tol).is_holds();
    let consistent = match &moment {
        Ok(v) => v.is_holds() == pid,
        Err(_) => false,
    };
    let detail = match moment {
        Ok(v) => format!("moment test {}, identities at 2 and 3 {pid}", v.status),
        Err(e) => format!("moment test error: {e}"),
    };
    out.push((
        "moment",
        anchors::MOMENT,
        agreement(consistent, detail, tol),
    ));
    out
}

/// Runs [`instance_invariants`] over the corpus. Entries are named
/// `instance[i].invariant`, in instance order.
pub fn run_corpus(cfg: &CorpusConfig, tol: &TolerancePolicy) -> Report {
    let mut report = Report::new(format!(
        "corpus(seed={}, count={}, normal={}, dims={}..={})",
        cfg.seed, cfg.count, cfg.normal_count, cfg.min_dim, cfg.max_dim
    ));
    let mut quasinormal = 0usize;
    for inst in cfg.instances() {
        for (name, anchor, v) in instance_invariants(&inst.matrix, tol) {
            if name == "lemS5" {
                quasinormal += 1;
            }
            report.push_expected(
                format!("instance[{}].{name}", inst.index),
                anchor,
                v,
                Status::Holds,
            );
        }
    }
    report.extras.insert(
        "instances".into(),
        serde_json::json!(cfg.count + cfg.normal_count),
    );
    report.extras.insert(
        "quasinormal_instances".into(),
        serde_json::json!(quasinormal),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic() {
        let a = CorpusConfig::new(7, 10, 2..=6);
        let b = CorpusConfig {
            normal_count: 0,
            ..a.clone()
        };
        let (ia, ib) = (a.instances(), b.instances());
        assert_eq!(ia.len(), 12);
        for (x, y) in ia.iter().zip(&ib) {
            assert_eq!(x.matrix, y.matrix);
        }
        assert!(ia.iter().all(|i| (2..=6).contains(&i.matrix.nrows())));
        assert_eq!(ia[11].kind, InstanceKind::Normal);
    }

    #[test]
    fn small_corpus_meets_all_invariants() {
        let r = run_corpus(&CorpusConfig::new(42, 25, 2..=6), &corpus_tolerance());
        assert!(r.all_expectations_met(), "{:#?}", r.summary_lines());
        assert_eq!(r.extras["quasinormal_instances"], serde_json::json!(5));
    }

    #[test]
    fn empty_corpus() {
        let r = run_corpus(&CorpusConfig::new(1, 0, 2..=6), &corpus_tolerance());
        assert!(r.entries.is_empty());
    }
}
