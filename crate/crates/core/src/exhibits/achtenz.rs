//! Finite orthogonal sums of matrices: adjoint powers, `C*C` and `|C|` act
//! blockwise, and the sum is quasinormal exactly when every block is.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Map, Value};

use super::{certificate, Exhibit, ExhibitOptions, ExhibitSpec, Expected, Outcomes};
use crate::error::{Error, Result};
use crate::hilbert::{Label, SparseVec};
use crate::operator::{
    adjoint, matrix_of, power, window_norm, CMat, DirectSumOp, FiniteMatrixOp, LocalOperator, OpRef,
};
use crate::predicates::{anchors, quasinormal_test, quasinormal_words};
use crate::probe::{random_matrix, random_normal, ProbeConfig};
use crate::spectral::modulus;
use crate::verdict::{Status, Verdict, VerdictContext, Witness};

/// Agreement required between `|⊕C_ω|` and `⊕|C_ω|`.
pub const MODULUS_TOL: f64 = 1e-9;
const MAX_POWER: u32 = 3;

pub struct AchtenZ {
    pub blocks: Vec<CMat>,
    pub sum: DirectSumOp,
}

pub fn achtenz_demo(blocks: Vec<CMat>) -> Result<ExhibitSpec> {
    if blocks.len() < 2 {
        return Err(Error::InvalidParameter(
            "achtenZ needs at least two blocks".into(),
        ));
    }
    let ops: Vec<OpRef> = blocks
        .iter()
        .map(|b| FiniteMatrixOp::new(b.clone()).map(|m| Arc::new(m) as OpRef))
        .collect::<Result<_>>()?;
    let sum = DirectSumOp::from_blocks(ops);
    let mut parameters = Map::new();
    parameters.insert(
        "block_dims".into(),
        json!(blocks.iter().map(|b| b.nrows()).collect::<Vec<_>>()),
    );
    let mut expected: Vec<Expected> = (1..=MAX_POWER)
        .map(|n| {
            Expected::new(
                format!("adjoint_power_blockwise[n={n}]"),
                Status::Holds,
                anchors::ACHTENZ,
            )
        })
        .collect();
    expected.extend([
        Expected::new("gram_blockwise", Status::Holds, anchors::ACHTENZ),
        Expected::new("modulus_blockwise", Status::Holds, anchors::ACHTENZ),
        Expected::new("quasinormal.agreement", Status::Holds, anchors::ACHTENZ),
    ]);
    Ok(ExhibitSpec {
        name: "achtenZ".into(),
        parameters,
        expected,
        exhibit: Exhibit::AchtenZ(AchtenZ { blocks, sum }),
    })
}

/// Two to four blocks of dimension 1 to 4. With `normal_only` every block is
/// normal; otherwise each block is normal or a Gaussian matrix with equal
/// probability.
pub fn random_block_family<R: Rng + ?Sized>(rng: &mut R, normal_only: bool) -> Vec<CMat> {
    let count = rng.random_range(2..=4);
    (0..count)
        .map(|_| {
            let dim = rng.random_range(1..=4);
            if normal_only || rng.random_bool(0.5) {
                random_normal(rng, dim).0
            } else {
                random_matrix(rng, dim)
            }
        })
        .collect()
}

fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = CMat::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        let d = b.nrows();
        m.view_mut((at, at), (d, d)).copy_from(b);
        at += d;
    }
    m
}

impl AchtenZ {
    pub fn descriptor(&self) -> String {
        self.sum.descriptor()
    }

    pub fn operator(&self) -> DirectSumOp {
        DirectSumOp::from_blocks(
            self.blocks
                .iter()
                .map(|b| Arc::new(FiniteMatrixOp::new(b.clone()).expect("square")) as OpRef)
                .collect(),
        )
    }

    pub fn window(&self) -> Vec<Label> {
        self.sum.natural_window().expect("finite blocks")
    }

    /// Quasinormality of each block on its own.
    pub fn block_verdicts(&self, opts: &ExhibitOptions) -> Vec<Verdict> {
        self.blocks
            .iter()
            .map(|b| {
                let op = FiniteMatrixOp::new(b.clone()).expect("square");
                let probes = ProbeConfig::with_window(opts.seed, op.labels());
                quasinormal_test(&op, &probes, &opts.tol)
            })
            .collect()
    }

    fn dense_block(&self, j: usize, f: &SparseVec) -> DVector<Complex64> {
        let d = self.blocks[j].nrows();
        DVector::from_fn(d, |i, _| {
            f.get(&Label::block(j as u64, Label::Nat(i as u64)))
        })
    }

    /// `max ‖(Cⁿ)* f − ⊕ (C_ωⁿ)* f_ω‖ / ‖f‖` over the window basis and probes.
    pub fn adjoint_power_residual(&self, n: u32, probes: &[SparseVec]) -> f64 {
        let sum: OpRef = Arc::new(self.operator());
        let lhs_op = adjoint(&power(&sum, n));
        let block_adj: Vec<CMat> = self.blocks.iter().map(|b| b.pow(n).adjoint()).collect();
        let basis = self.window().into_iter().map(SparseVec::basis);
        let mut worst: f64 = 0.0;
        for f in basis.chain(probes.iter().cloned()) {
            let norm = f.norm();
            if norm == 0.0 {
                continue;
            }
            let lhs = lhs_op.apply(&f);
            let mut rhs = SparseVec::new();
            for (j, a) in block_adj.iter().enumerate() {
                let y = a * self.dense_block(j, &f);
                for (i, z) in y.iter().enumerate() {
                    rhs.add_at(Label::block(j as u64, Label::Nat(i as u64)), *z);
                }
            }
            worst = worst.max((&lhs - &rhs).norm() / norm);
        }
        worst
    }

    pub fn evaluate(&self, opts: &ExhibitOptions) -> Outcomes {
        let mut out = Outcomes::default();
        let tol = &opts.tol;
        let window = self.window();
        let probe_cfg = ProbeConfig {
            seed: opts.seed,
            num_probes: opts.num_probes,
            support_size: 6,
            label_window: window.clone(),
        };
        let probes = probe_cfg.probes();
        let w = window_norm(&self.sum, &window);

        for n in 1..=MAX_POWER {
            let r = self.adjoint_power_residual(n, &probes);
            let thr = tol.threshold(w.powi(n as i32));
            out.push(
                format!("adjoint_power_blockwise[n={n}]"),
                anchors::ACHTENZ,
                certificate(r <= thr, r, "(C^n)* against blockwise (C_ω^n)*", thr),
            );
        }

        let dense = matrix_of(&self.sum, &window)
            .expect("distinct labels")
            .into_matrix();
        let gram = dense.adjoint() * &dense;
        let gram_blocks = block_diag(
            &self
                .blocks
                .iter()
                .map(|b| b.adjoint() * b)
                .collect::<Vec<_>>(),
        );
        let r = (&gram - &gram_blocks).norm();
        let thr = tol.threshold(w * w);
        out.push(
            "gram_blockwise",
            anchors::ACHTENZ,
            certificate(r <= thr, r, "C*C against ⊕ C_ω*C_ω", thr),
        );

        let whole = modulus(&dense);
        let parts = block_diag(&self.blocks.iter().map(modulus).collect::<Vec<_>>());
        let r = (&whole - &parts).norm();
        out.push(
            "modulus_blockwise",
            anchors::ACHTENZ,
            certificate(r <= MODULUS_TOL, r, "|⊕C_ω| against ⊕|C_ω|", MODULUS_TOL),
        );

        let per_block = self.block_verdicts(opts);
        let all_blocks = per_block.iter().all(Verdict::is_holds);
        let sum_verdict = quasinormal_test(&self.sum, &probe_cfg, tol);
        // The residual (CC*C − C*CC)f of a witness must vanish on every
        // quasinormal block: the failure lives in the failing blocks.
        let localized = match (&sum_verdict.witness, sum_verdict.is_fails()) {
            (Some(wit), true) => {
                let (l, r) = quasinormal_words();
                let residual = &l.apply(&self.sum, &wit.vector) - &r.apply(&self.sum, &wit.vector);
                let on_good = residual.restrict(|label| match label {
                    Label::Block(j, _) => per_block[*j as usize].is_holds(),
                    _ => true,
                });
                on_good.norm() <= sum_verdict.context.threshold
            }
            _ => true,
        };
        let agree = sum_verdict.is_holds() == all_blocks && localized;
        let detail = format!(
            "sum {}, blocks [{}], residual localized: {localized}",
            sum_verdict.status,
            per_block
                .iter()
                .map(|v| v.status.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        let ctx = VerdictContext {
            tolerance: *tol,
            ..Default::default()
        };
        let agreement = if agree {
            Verdict::holds(0.0, ctx).with_note(detail)
        } else {
            Verdict::fails(
                Witness::vector(SparseVec::new()).with_detail(detail),
                1.0,
                ctx,
            )
        };
        out.push("quasinormal.sum", anchors::ACHTENZ, sum_verdict);
        for (j, v) in per_block.into_iter().enumerate() {
            out.push(format!("quasinormal.block[{j}]"), anchors::QUASINORMAL, v);
        }
        out.push("quasinormal.agreement", anchors::ACHTENZ, agreement);
        out.extras
            .insert("blocks".into(), Value::from(self.blocks.len()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::rng_from_seed;

    fn jordan() -> CMat {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        m
    }

    #[test]
    fn needs_two_blocks() {
        assert!(achtenz_demo(vec![jordan()]).is_err());
    }

    #[test]
    fn normal_blocks_give_quasinormal_sum() {
        let mut rng = rng_from_seed(11);
        let blocks = random_block_family(&mut rng, true);
        let r = achtenz_demo(blocks)
            .unwrap()
            .run(&ExhibitOptions::default());
        assert!(r.all_expectations_met(), "{:#?}", r.summary_lines());
        assert!(r.entry("quasinormal.sum").unwrap().verdict.is_holds());
    }

    #[test]
    fn jordan_block_localizes_the_witness() {
        let mut rng = rng_from_seed(12);
        let (n, _, _) = random_normal(&mut rng, 3);
        let r = achtenz_demo(vec![n, jordan()])
            .unwrap()
            .run(&ExhibitOptions::default());
        assert!(r.all_expectations_met(), "{:#?}", r.summary_lines());
        let v = &r.entry("quasinormal.sum").unwrap().verdict;
        assert!(v.is_fails());
        assert!(v
            .witness
            .as_ref()
            .unwrap()
            .vector
            .support()
            .all(|l| matches!(l, Label::Block(1, _))));
    }

    #[test]
    fn block_diag_layout() {
        let a = CMat::from_element(1, 1, Complex64::new(2.0, 0.0));
        let m = block_diag(&[a, jordan()]);
        assert_eq!(m.nrows(), 3);
        assert_eq!(m[(0, 0)], Complex64::new(2.0, 0.0));
        assert_eq!(m[(1, 2)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 0.0));
    }
}
