//! The orthogonal sum `C = ⊕ r_j S` with `sup r_j = ∞`: quasinormal, yet
//! `C*ⁿ ⊊ (Cⁿ)*` for `n ≥ 2`.
//!
//! The vector `g = Σ t_j e_{n−1}^{(j)}`, `t_j = 1/(r_j √(j+1))`, lies in the
//! domain of `(Cⁿ)*` because `S*ⁿ e_{n−1} = 0` in every block, but not in the
//! domain of `C*ⁿ`: the `k = 1` domain series is `Σ 1/(j+1)`. Both facts are
//! certified here, the divergent one by direct summation for a small bound
//! and by the closed form `Σ_{j≤J} 1/(j+1) ≥ ln(J+2)` for a large one.

use num_complex::Complex64;
use serde_json::{json, Map};

use super::{certificate, Exhibit, ExhibitOptions, ExhibitSpec, Expected, Outcomes};
use crate::error::{Error, Result};
use crate::hilbert::{Label, SparseVec};
use crate::operator::{shift_isometry, DirectSumOp, LocalOperator, ScaleRule};
use crate::predicates::{anchors, quasinormal_test};
use crate::probe::ProbeConfig;
use crate::verdict::Status;

/// Blocks in which the domain series are evaluated through the operator.
const BLOCKS_CHECKED: u64 = 64;
/// Bound reached by direct summation of the harmonic series.
const NUMERIC_BOUND: f64 = 10.0;
/// Bound certified in closed form.
const SYMBOLIC_BOUND: f64 = 1e3;
/// Terms summed for the numeric side of the tail bound.
const TAIL_TERMS: u64 = 100_000;

pub struct Prz4 {
    pub op: DirectSumOp,
    pub rule: ScaleRule,
    pub n: u32,
}

/// Smallest `J` with `Σ_{j≤J} 1/(j+1) > bound`, and that partial sum.
pub fn harmonic_threshold_index(bound: f64) -> (u64, f64) {
    let mut sum = 0.0;
    let mut j = 0u64;
    loop {
        sum += 1.0 / (j + 1) as f64;
        if sum > bound {
            return (j, sum);
        }
        j += 1;
    }
}

fn harmonic_partial_sum(last: u64) -> f64 {
    (0..=last).map(|j| 1.0 / (j + 1) as f64).sum()
}

/// Whether `r_j² ≥ j + 1` for every `j`, from the closed form of the rule.
fn dominates_sqrt(rule: &ScaleRule) -> bool {
    match *rule {
        ScaleRule::Poly { degree } => degree >= 1,
        // b^{2j} ≥ 1 + j(b² − 1) ≥ j + 1 iff b² ≥ 2 (j = 1 is the binding case)
        ScaleRule::Exp { base } => base * base >= 2.0,
        ScaleRule::Linear { slope, offset } => {
            if offset < 1.0 || slope <= 0.0 {
                return false;
            }
            // s²j² + (2so − 1)j + (o² − 1) is nonnegative when 2so ≥ 1;
            // otherwise check the integers up to the vertex of the parabola.
            if 2.0 * slope * offset >= 1.0 {
                return true;
            }
            let vertex = (1.0 - 2.0 * slope * offset) / (2.0 * slope * slope);
            (0..=vertex.ceil() as u64 + 1)
                .all(|j| (slope * j as f64 + offset).powi(2) >= (j + 1) as f64)
        }
        _ => false,
    }
}

pub fn build_prz4(rule: ScaleRule, n: u32) -> Result<ExhibitSpec> {
    rule.validate()?;
    if !rule.is_monotone_unbounded() {
        return Err(Error::InvalidParameter(format!(
            "growth rule {} is not certified monotone and unbounded",
            rule.describe()
        )));
    }
    if rule.scale(0).is_none_or(|r| r < 1.0) {
        return Err(Error::InvalidParameter("growth rule needs r_j >= 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "prz4 needs n >= 2, got {n}"
        )));
    }
    let op = DirectSumOp::scaled(shift_isometry(), rule.clone())?;
    let mut parameters = Map::new();
    parameters.insert("r".into(), json!(rule.describe()));
    parameters.insert("n".into(), json!(n));
    let expected = vec![
        Expected::new("quasinormal", Status::Holds, anchors::ACHTENZ),
        Expected::new("adjoint_power_side", Status::Holds, "prz4: g ∈ D((C^n)*)"),
        Expected::new("k1_series_terms", Status::Holds, "prz4: g ∉ D(C*^n)"),
        Expected::new("divergence.numeric", Status::Holds, "prz4: g ∉ D(C*^n)"),
        Expected::new("divergence.closed_form", Status::Holds, "prz4: g ∉ D(C*^n)"),
        Expected::new("tail_bound", Status::Holds, "prz4: Σ t_j² < ∞"),
        Expected::new("strict_inclusion", Status::Holds, "prz4: C*^n ⊊ (C^n)*"),
    ];
    Ok(ExhibitSpec {
        name: format!("prz4:r={},n={n}", rule.describe()),
        parameters,
        expected,
        exhibit: Exhibit::Prz4(Prz4 { op, rule, n }),
    })
}

impl Prz4 {
    pub fn r(&self, j: u64) -> f64 {
        self.rule.scale(j).expect("infinitely many blocks")
    }

    pub fn t(&self, j: u64) -> f64 {
        1.0 / (self.r(j) * ((j + 1) as f64).sqrt())
    }

    /// `Σ_{j<J} t_j e_{n−1}^{(j)}`.
    pub fn witness(&self, blocks: u64) -> SparseVec {
        (0..blocks)
            .map(|j| {
                (
                    Label::block(j, Label::Nat(self.n as u64 - 1)),
                    Complex64::new(self.t(j), 0.0),
                )
            })
            .collect()
    }

    /// Terms `‖C*ᵏ (t_j e_{n−1}^{(j)})‖² = r_j^{2k} ‖S*ᵏ t_j e_{n−1}‖²` for
    /// `j < blocks`, computed through the operator.
    pub fn domain_terms(&self, k: u32, blocks: u64) -> Vec<f64> {
        (0..blocks)
            .map(|j| {
                let mut v = SparseVec::from_entries([(
                    Label::block(j, Label::Nat(self.n as u64 - 1)),
                    Complex64::new(self.t(j), 0.0),
                )]);
                for _ in 0..k {
                    v = self.op.adjoint_apply(&v);
                }
                v.norm_sqr()
            })
            .collect()
    }

    pub fn operator(&self) -> DirectSumOp {
        DirectSumOp::scaled(shift_isometry(), self.rule.clone()).expect("rule validated")
    }

    /// First eight blocks, basis vectors `e_0 … e_{m+2}` in each, with
    /// `m = max(order, n)`.
    pub fn window(&self, order: u32) -> Vec<Label> {
        let depth = order.max(self.n) as u64 + 3;
        (0..8u64)
            .flat_map(|j| (0..depth).map(move |i| Label::block(j, Label::Nat(i))))
            .collect()
    }

    pub fn evaluate(&self, opts: &ExhibitOptions) -> Outcomes {
        let mut out = Outcomes::default();
        let n = self.n;

        let probes = ProbeConfig {
            seed: opts.seed,
            num_probes: opts.num_probes,
            support_size: 6,
            label_window: self.window(n),
        };
        out.push(
            "quasinormal",
            anchors::ACHTENZ,
            quasinormal_test(&self.op, &probes, &opts.tol),
        );

        let mut g = self.witness(BLOCKS_CHECKED);
        for _ in 0..n {
            g = self.op.adjoint_apply(&g);
        }
        let side: f64 = self
            .domain_terms(n, BLOCKS_CHECKED)
            .iter()
            .fold(0.0, |a, x| a + x);
        out.push(
            "adjoint_power_side",
            "prz4: g ∈ D((C^n)*)",
            certificate(
                g.is_empty() && side == 0.0,
                side,
                format!("Σ_(j<{BLOCKS_CHECKED}) r_j^2n ‖S*^n t_j e_(n-1)‖² is exactly 0"),
                0.0,
            ),
        );

        let terms = self.domain_terms(1, BLOCKS_CHECKED);
        let worst = terms
            .iter()
            .enumerate()
            .map(|(j, x)| (x * (j + 1) as f64 - 1.0).abs())
            .fold(0.0, f64::max);
        out.push(
            "k1_series_terms",
            "prz4: g ∉ D(C*^n)",
            certificate(
                worst <= 1e-12,
                worst,
                "r_j² ‖S* t_j e_(n-1)‖² = 1/(j+1), largest relative error",
                1e-12,
            ),
        );

        let (j_star, sum) = harmonic_threshold_index(NUMERIC_BOUND);
        let at_next = harmonic_partial_sum(j_star + 1);
        out.push(
            "divergence.numeric",
            "prz4: g ∉ D(C*^n)",
            certificate(
                sum > NUMERIC_BOUND && at_next > NUMERIC_BOUND,
                sum,
                format!("Σ_(j≤{j_star}) 1/(j+1) = {sum} > {NUMERIC_BOUND}"),
                NUMERIC_BOUND,
            ),
        );

        // J = ⌈e^M⌉ gives Σ_{j≤J} 1/(j+1) ≥ ∫_1^{J+2} dx/x = ln(J+2) > M.
        let log10_j = SYMBOLIC_BOUND / std::f64::consts::LN_10;
        out.push(
            "divergence.closed_form",
            "prz4: g ∉ D(C*^n)",
            certificate(
                true,
                SYMBOLIC_BOUND,
                format!("J = ceil(e^{SYMBOLIC_BOUND}) ≈ 10^{log10_j:.2}: Σ_(j≤J) 1/(j+1) ≥ ln(J+2) > {SYMBOLIC_BOUND}"),
                SYMBOLIC_BOUND,
            ),
        );

        let basel = std::f64::consts::PI.powi(2) / 6.0;
        let tail: f64 = (0..TAIL_TERMS).map(|j| self.t(j).powi(2)).sum();
        let dominated = dominates_sqrt(&self.rule);
        out.push(
            "tail_bound",
            "prz4: Σ t_j² < ∞",
            certificate(
                dominated && tail < basel,
                tail,
                format!(
                    "t_j² ≤ 1/(j+1)² since r_j² ≥ j+1; Σ_(j<{TAIL_TERMS}) t_j² = {tail} < π²/6"
                ),
                basel,
            ),
        );

        let all_ok = out.entries.iter().all(|(_, _, v)| v.is_holds());
        out.push(
            "strict_inclusion",
            "prz4: C*^n ⊊ (C^n)*",
            certificate(all_ok, 0.0, "g ∈ D((C^n)*) \\ D(C*^n)", 0.0),
        );
        out.extras.insert(
            "divergence".into(),
            json!({
                "numeric_bound": NUMERIC_BOUND,
                "first_index_above": j_star,
                "partial_sum": sum,
                "partial_sum_next": at_next,
                "symbolic_bound": SYMBOLIC_BOUND,
                "symbolic_index": format!("ceil(e^{SYMBOLIC_BOUND})"),
                "symbolic_index_log10": log10_j,
            }),
        );
        out.extras.insert("tail_sum".into(), json!(tail));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prz4(rule: ScaleRule, n: u32) -> Prz4 {
        match build_prz4(rule, n).unwrap().exhibit {
            Exhibit::Prz4(p) => p,
            _ => unreachable!(),
        }
    }

    #[test]
    fn harmonic_index_for_ten() {
        let (j, s) = harmonic_threshold_index(10.0);
        assert_eq!(j, 12366);
        assert!(s > 10.0);
        assert!(harmonic_partial_sum(j - 1) <= 10.0);
        assert!(harmonic_partial_sum(12367) > 10.0);
    }

    #[test]
    fn rules_are_screened() {
        assert!(build_prz4(ScaleRule::Constant(2.0), 2).is_err());
        assert!(build_prz4(
            ScaleRule::Linear {
                slope: 1.0,
                offset: 0.5
            },
            2
        )
        .is_err());
        assert!(build_prz4(ScaleRule::Poly { degree: 1 }, 1).is_err());
        // (0.1j + 1)² < j + 1 for 1 <= j < 80
        assert!(!dominates_sqrt(&ScaleRule::Linear {
            slope: 0.1,
            offset: 1.0
        }));
        assert!(dominates_sqrt(&ScaleRule::Linear {
            slope: 0.5,
            offset: 1.0
        }));
        assert!(dominates_sqrt(&ScaleRule::Linear {
            slope: 0.3,
            offset: 1.5
        }));
        assert!(!dominates_sqrt(&ScaleRule::Exp { base: 1.2 }));
        assert!(dominates_sqrt(&ScaleRule::Exp { base: 2.0 }));
    }

    #[test]
    fn adjoint_power_side_vanishes() {
        for n in [2, 3] {
            let p = prz4(ScaleRule::Poly { degree: 1 }, n);
            assert!(p.domain_terms(n, 16).iter().all(|&x| x == 0.0));
            // k < n: r_j^{2k} t_j² = r_j^{2k−2}/(j+1)
            let t2 = p.domain_terms(n - 1, 4);
            for (j, x) in t2.iter().enumerate() {
                let want = ((j + 1) as f64).powi(2 * (n as i32 - 1) - 2) / (j + 1) as f64;
                assert!((x - want).abs() <= 1e-12 * want, "{j}: {x} vs {want}");
            }
        }
    }

    #[test]
    fn growth_rules_meet_expectations() {
        for (rule, n) in [
            (ScaleRule::Poly { degree: 1 }, 2),
            (ScaleRule::Poly { degree: 1 }, 3),
            (ScaleRule::Poly { degree: 2 }, 2),
            (ScaleRule::Exp { base: 2.0 }, 3),
        ] {
            let r = build_prz4(rule, n).unwrap().run(&ExhibitOptions::default());
            assert!(r.all_expectations_met(), "{:#?}", r.summary_lines());
        }
    }
}
