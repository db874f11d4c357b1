//! Weighted shifts on the two-ray trees `T_{2,κ}` that separate the power
//! identities from quasinormality.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::{Exhibit, ExhibitOptions, ExhibitSpec, Expected, Outcomes};
use crate::error::{Error, Result};
use crate::hilbert::{Label, VertexKey};
use crate::predicates::{
    anchors, hyponormal_falsify, paranormal_sampling, paranormal_window_test, power_identity_test,
    quasinormal_test,
};
use crate::probe::ProbeConfig;
use crate::tree::{prop_ws_test, quasinormal_tree_test, DirectedTree, TreeShiftOp, WeightSystem};
use crate::verdict::{Status, Verdict, VerdictContext, Witness};

const UNIT_TOL: f64 = 1e-12;

/// `f(x) = log(log(2−x) / (−log x)) / log(x / (2−x))` on `(0, 1)`.
pub fn f_of(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("f is defined on (0, 1), got {x}")));
    }
    Ok(((2.0 - x).ln() / -x.ln()).ln() / (x / (2.0 - x)).ln())
}

/// `g(x) = γ^{x/(n−1)} + (2−γ)^{x/(n−1)}`.
pub fn g_of(x: f64, gamma: f64, n: u32) -> f64 {
    let e = x / (n as f64 - 1.0);
    gamma.powf(e) + (2.0 - gamma).powf(e)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaScan {
    pub n: u32,
    pub m: u32,
    pub gamma: f64,
    /// `(n−1) f(γ)`, which lies in `(0, 1]`.
    pub scaled_f: f64,
}

/// Largest `x = 2^{-m}`, `m = 1, 2, …, 64`, with `0 < (n−1) f(x) ≤ 1`.
pub fn gamma_n(n: u32) -> Result<GammaScan> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "gamma_n needs n >= 2, got {n}"
        )));
    }
    for m in 1..=64 {
        let x = 0.5f64.powi(m as i32);
        let v = (n as f64 - 1.0) * f_of(x)?;
        if v > 0.0 && v <= 1.0 {
            return Ok(GammaScan {
                n,
                m,
                gamma: x,
                scaled_f: v,
            });
        }
    }
    Err(Error::Numerical(format!(
        "gamma scan exhausted at m = 64 for n = {n}"
    )))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prz2Params {
    pub alpha: [Complex64; 2],
    pub beta: [Complex64; 2],
    /// `None` for `κ = ∞`.
    pub kappa: Option<u32>,
    pub depth_cap: u32,
}

impl Default for Prz2Params {
    /// `α₁ = α₂ = β₁ = 1/√2`, `β₂ = √(3/2)`, `κ = 2`.
    fn default() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            alpha: [h, h],
            beta: [h, Complex64::new(1.5f64.sqrt(), 0.0)],
            kappa: Some(2),
            depth_cap: 8,
        }
    }
}

impl Prz2Params {
    pub fn validate(&self) -> Result<()> {
        let names = ["α₁", "α₂", "β₁", "β₂"];
        let values = [self.alpha[0], self.alpha[1], self.beta[0], self.beta[1]];
        for (name, v) in names.iter().zip(values) {
            if v.norm() == 0.0 {
                return Err(Error::Constraint(format!("{name} must be nonzero")));
            }
        }
        let a = self.alpha[0].norm_sqr() + self.alpha[1].norm_sqr();
        if (a - 1.0).abs() > UNIT_TOL {
            return Err(Error::Constraint(format!("|α₁|² + |α₂|² = {a}, must be 1")));
        }
        let b =
            (self.alpha[0] * self.beta[0]).norm_sqr() + (self.alpha[1] * self.beta[1]).norm_sqr();
        if (b - 1.0).abs() > UNIT_TOL {
            return Err(Error::Constraint(format!(
                "|α₁β₁|² + |α₂β₂|² = {b}, must be 1"
            )));
        }
        let p = (1.0 - self.beta[0].norm()) * (1.0 - self.beta[1].norm());
        if p.abs() <= UNIT_TOL {
            return Err(Error::Constraint(
                "(1 − |β₁|)(1 − |β₂|) must be nonzero".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum TreeKind {
    Prz2,
    Prz3(GammaScan),
}

pub struct TreeExhibit {
    pub op: TreeShiftOp,
    pub kind: TreeKind,
}

fn two_ray_op(
    kappa: Option<u32>,
    depth_cap: u32,
    alpha: [Complex64; 2],
    beta: [Complex64; 2],
) -> Result<TreeShiftOp> {
    let trunk_cap = if kappa.is_none() {
        Some(depth_cap)
    } else {
        None
    };
    let tree = DirectedTree::t2kappa(kappa, depth_cap, trunk_cap)?;
    TreeShiftOp::new(
        tree,
        WeightSystem::TwoRay {
            trunk: Complex64::new(1.0, 0.0),
            alpha,
            beta,
        },
    )
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Highest power identity order evaluated for `prz2`.
const PRZ2_KMAX: u32 = 5;

pub fn build_prz2(params: &Prz2Params) -> Result<ExhibitSpec> {
    params.validate()?;
    let op = two_ray_op(
        params.kappa,
        params.depth_cap.max(1),
        params.alpha,
        params.beta,
    )?;
    let mut parameters = Map::new();
    parameters.insert(
        "alpha".into(),
        json!([cplx(params.alpha[0]), cplx(params.alpha[1])]),
    );
    parameters.insert(
        "beta".into(),
        json!([cplx(params.beta[0]), cplx(params.beta[1])]),
    );
    parameters.insert(
        "kappa".into(),
        params.kappa.map_or(json!("inf"), |k| json!(k)),
    );
    parameters.insert("depth_cap".into(), json!(params.depth_cap));

    let mut expected = Vec::new();
    for k in 0..=PRZ2_KMAX {
        let status = if k <= 2 { Status::Holds } else { Status::Fails };
        expected.push(Expected::new(
            format!("power_identity[k={k}]"),
            status,
            anchors::POWER,
        ));
    }
    expected.extend([
        Expected::new("prop_ws[n=2]", Status::Holds, anchors::PROP_WS),
        Expected::new("prop_ws[n=3]", Status::Fails, anchors::PROP_WS),
        Expected::new("quasinormal", Status::Fails, anchors::QUASINORMAL),
        Expected::new(
            "quasinormal.child_condition",
            Status::Fails,
            anchors::QUASINORMAL,
        ),
        Expected::new("separation", Status::Holds, anchors::EMBRY),
        Expected::new("hyponormal", Status::Fails, anchors::HYPONORMAL),
        Expected::new(
            "paranormal.sampling",
            Status::Inconclusive,
            anchors::PARANORMAL,
        ),
        Expected::new(
            "paranormal.window",
            Status::Inconclusive,
            anchors::PARANORMAL,
        ),
    ]);
    Ok(ExhibitSpec {
        name: "prz2".into(),
        parameters,
        expected,
        exhibit: Exhibit::Tree(TreeExhibit {
            op,
            kind: TreeKind::Prz2,
        }),
    })
}

/// `T_{2,0}` with `α₁ = α₂ = 2^{-1/2}`, `β₁ = γₙ^{1/(2(n−1))}`,
/// `β₂ = (2−γₙ)^{1/(2(n−1))}`: the identity of order `k` holds exactly for
/// `k ∈ {0, 1, n}`.
pub fn build_prz3(n: u32, depth_cap: u32) -> Result<ExhibitSpec> {
    let scan = gamma_n(n)?;
    let e = 1.0 / (2.0 * (n as f64 - 1.0));
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let beta = [
        Complex64::new(scan.gamma.powf(e), 0.0),
        Complex64::new((2.0 - scan.gamma).powf(e), 0.0),
    ];
    let op = two_ray_op(Some(0), depth_cap.max(1), [h, h], beta)?;
    let mut parameters = Map::new();
    parameters.insert("n".into(), json!(n));
    parameters.insert("depth_cap".into(), json!(depth_cap));

    let mut expected = Vec::new();
    for k in 0..=n + 3 {
        let status = if k <= 1 || k == n {
            Status::Holds
        } else {
            Status::Fails
        };
        expected.push(Expected::new(
            format!("power_identity[k={k}]"),
            status,
            anchors::POWER,
        ));
        expected.push(Expected::new(
            format!("prop_ws[n={k}]"),
            status,
            anchors::PROP_WS,
        ));
    }
    expected.push(Expected::new(
        "quasinormal",
        Status::Fails,
        anchors::QUASINORMAL,
    ));
    expected.push(Expected::new(
        "quasinormal.child_condition",
        Status::Fails,
        anchors::QUASINORMAL,
    ));
    Ok(ExhibitSpec {
        name: format!("prz3:n={n}"),
        parameters,
        expected,
        exhibit: Exhibit::Tree(TreeExhibit {
            op,
            kind: TreeKind::Prz3(scan),
        }),
    })
}

impl TreeExhibit {
    fn probes(&self, k: u32, opts: &ExhibitOptions) -> ProbeConfig {
        ProbeConfig {
            seed: opts.seed,
            num_probes: opts.num_probes,
            support_size: 6,
            label_window: self.op.orbit_window(k.max(3)),
        }
    }

    fn vertex_window(&self, k: u32) -> Vec<VertexKey> {
        self.op.tree().orbit_window(k.max(3))
    }

    /// `|½ g(k−1) − 1|`, the exact residual of the order-`k` identity at the
    /// vertex `0` of the `prz3` tree.
    pub fn prz3_margin(&self, k: u32) -> Option<f64> {
        match self.kind {
            TreeKind::Prz3(scan) if k >= 2 => {
                Some((0.5 * g_of(k as f64 - 1.0, scan.gamma, scan.n) - 1.0).abs())
            }
            _ => None,
        }
    }

    pub fn evaluate(&self, opts: &ExhibitOptions) -> Outcomes {
        let mut out = Outcomes::default();
        let tol = &opts.tol;
        let k_max = match self.kind {
            TreeKind::Prz2 => PRZ2_KMAX,
            TreeKind::Prz3(scan) => scan.n + 3,
        };
        let mut identity_holds = Vec::new();
        for k in 0..=k_max {
            let mut v = power_identity_test(&self.op, k, &self.probes(k, opts), tol);
            if let Some(margin) = self.prz3_margin(k) {
                v = v.with_measurement("margin", margin);
            }
            if v.is_holds() {
                identity_holds.push(k);
            }
            out.push(format!("power_identity[k={k}]"), anchors::POWER, v);
        }
        let ws_orders: Vec<u32> = match self.kind {
            TreeKind::Prz2 => vec![2, 3],
            TreeKind::Prz3(_) => (0..=k_max).collect(),
        };
        for k in ws_orders {
            let v = prop_ws_test(&self.op, k, &self.vertex_window(k), tol);
            out.push(format!("prop_ws[n={k}]"), anchors::PROP_WS, v);
        }
        let qn = quasinormal_test(&self.op, &self.probes(3, opts), tol);
        let qn_holds = qn.is_holds();
        out.push("quasinormal", anchors::QUASINORMAL, qn);
        out.push(
            "quasinormal.child_condition",
            anchors::QUASINORMAL,
            quasinormal_tree_test(&self.op, &self.vertex_window(3), tol),
        );
        out.extras
            .insert("identity_holds_at".into(), json!(identity_holds));
        match self.kind {
            TreeKind::Prz2 => {
                let separated =
                    !qn_holds && identity_holds.contains(&2) && !identity_holds.contains(&3);
                let ctx = VerdictContext {
                    tolerance: *tol,
                    ..Default::default()
                };
                let sep = if separated {
                    Verdict::holds(0.0, ctx)
                        .with_note("order 2 identity holds, quasinormality fails")
                } else {
                    Verdict::fails(
                        Witness::vector(Default::default())
                            .with_detail("no separation between orders 2 and 3"),
                        1.0,
                        ctx,
                    )
                };
                out.push("separation", anchors::EMBRY, sep);
                out.push(
                    "hyponormal",
                    anchors::HYPONORMAL,
                    hyponormal_falsify(&self.op, &self.probes(2, opts), tol),
                );
                out.push(
                    "paranormal.sampling",
                    anchors::PARANORMAL,
                    paranormal_sampling(&self.op, &self.probes(2, opts), tol),
                );
                let window: Vec<Label> = self.op.orbit_window(4);
                out.push(
                    "paranormal.window",
                    anchors::PARANORMAL,
                    paranormal_window_test(&self.op, &window, tol),
                );
            }
            TreeKind::Prz3(scan) => {
                out.extras.insert(
                    "gamma".into(),
                    json!({"n": scan.n, "m": scan.m, "gamma": scan.gamma, "scaled_f": scan.scaled_f}),
                );
                let margins: Vec<Value> = (2..=k_max)
                    .map(|k| json!({"k": k, "margin": self.prz3_margin(k)}))
                    .collect();
                out.extras.insert("margins".into(), Value::Array(margins));
            }
        }
        out
    }
}
