//! Reconstructions of the worked examples, each bundled with the verdicts it
//! is expected to produce.
//!
//! An [`ExhibitSpec`] holds validated parameters, the built operator(s) and a
//! list of expected outcomes. [`ExhibitSpec::run`] evaluates every predicate
//! of the exhibit and records the expectation next to each verdict, so a
//! mismatch shows up as an unmet expectation in the [`Report`].

mod achtenz;
mod prz1;
mod prz4;
mod trees;

pub use achtenz::{achtenz_demo, random_block_family, AchtenZ};
pub use prz1::{build_prz1, default_symbol, Prz1, Prz1Row, CONVERGENCE_TOL};
pub use prz4::{build_prz4, harmonic_threshold_index, Prz4};
pub use trees::{
    build_prz2, build_prz3, f_of, g_of, gamma_n, GammaScan, Prz2Params, TreeExhibit, TreeKind,
};

use std::fmt;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::hilbert::{Label, TolerancePolicy};
use crate::operator::{FiniteMatrixOp, OpRef, ScaleRule};
use crate::verdict::{Report, Status, Verdict, VerdictContext, Witness};

#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    pub predicate: String,
    pub status: Status,
    pub anchor: String,
}

impl Expected {
    pub fn new(predicate: impl Into<String>, status: Status, anchor: impl Into<String>) -> Self {
        Self {
            predicate: predicate.into(),
            status,
            anchor: anchor.into(),
        }
    }
}

/// Knobs shared by all exhibit runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExhibitOptions {
    pub seed: u64,
    pub num_probes: usize,
    pub tol: TolerancePolicy,
}

impl Default for ExhibitOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            num_probes: 200,
            tol: TolerancePolicy::default(),
        }
    }
}

pub enum Exhibit {
    Prz1(Prz1),
    Tree(TreeExhibit),
    Prz4(Prz4),
    AchtenZ(AchtenZ),
}

pub struct ExhibitSpec {
    pub name: String,
    pub parameters: Map<String, Value>,
    pub expected: Vec<Expected>,
    pub exhibit: Exhibit,
}

/// Verdicts an exhibit produced, in evaluation order, plus tables and scalars
/// for the report extras.
#[derive(Default)]
pub struct Outcomes {
    pub entries: Vec<(String, String, Verdict)>,
    pub extras: Map<String, Value>,
}

impl Outcomes {
    pub fn push(
        &mut self,
        predicate: impl Into<String>,
        anchor: impl Into<String>,
        verdict: Verdict,
    ) {
        self.entries
            .push((predicate.into(), anchor.into(), verdict));
    }
}

impl ExhibitSpec {
    pub fn operator_descriptor(&self) -> String {
        match &self.exhibit {
            Exhibit::Prz1(p) => p.descriptor(),
            Exhibit::Tree(t) => crate::operator::LocalOperator::descriptor(&t.op),
            Exhibit::Prz4(p) => crate::operator::LocalOperator::descriptor(&p.op),
            Exhibit::AchtenZ(a) => a.descriptor(),
        }
    }

    /// The exhibit's operator, with a label window suited to identities of
    /// order up to `order`. `prz1` yields its largest finite section.
    pub fn operator(&self, order: u32) -> (OpRef, Vec<Label>) {
        match &self.exhibit {
            Exhibit::Prz1(p) => {
                let n = *p.dims.last().expect("nonempty");
                let m = FiniteMatrixOp::new(p.section(n)).expect("square");
                let window = m.labels();
                (Arc::new(m), window)
            }
            Exhibit::Tree(t) => (Arc::new(t.op.clone()), t.op.orbit_window(order.max(3))),
            Exhibit::Prz4(p) => (Arc::new(p.operator()), p.window(order)),
            Exhibit::AchtenZ(a) => (Arc::new(a.operator()), a.window()),
        }
    }

    pub fn evaluate(&self, opts: &ExhibitOptions) -> Outcomes {
        match &self.exhibit {
            Exhibit::Prz1(p) => p.evaluate(opts),
            Exhibit::Tree(t) => t.evaluate(opts),
            Exhibit::Prz4(p) => p.evaluate(opts),
            Exhibit::AchtenZ(a) => a.evaluate(opts),
        }
    }

    /// Evaluates the exhibit and attaches expectations. An expected
    /// predicate that was never evaluated is recorded as an unmet
    /// expectation.
    pub fn run(&self, opts: &ExhibitOptions) -> Report {
        let outcomes = self.evaluate(opts);
        let mut report = Report::new(self.operator_descriptor());
        for (predicate, anchor, verdict) in outcomes.entries {
            match self.expected.iter().find(|e| e.predicate == predicate) {
                Some(e) => report.push_expected(predicate, anchor, verdict, e.status),
                None => report.push(predicate, anchor, verdict),
            }
        }
        for e in &self.expected {
            if report.entry(&e.predicate).is_none() {
                let v = Verdict::inconclusive(
                    "expected predicate was not evaluated",
                    0.0,
                    VerdictContext::default(),
                );
                report.push_expected(e.predicate.clone(), e.anchor.clone(), v, e.status);
            }
        }
        report
            .extras
            .insert("exhibit".into(), Value::String(self.name.clone()));
        report
            .extras
            .insert("parameters".into(), Value::Object(self.parameters.clone()));
        for (k, v) in outcomes.extras {
            report.extras.insert(k, v);
        }
        report
    }
}

/// Parsed catalog name such as `prz3:n=4` or `prz4:r=poly1,n=3`.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogName {
    pub base: String,
    pub params: Vec<(String, String)>,
}

impl CatalogName {
    pub fn parse(s: &str) -> Result<Self> {
        let (base, rest) = match s.split_once(':') {
            Some((b, r)) => (b, Some(r)),
            None => (s, None),
        };
        let mut params = Vec::new();
        if let Some(rest) = rest {
            for part in rest.split(',').filter(|p| !p.is_empty()) {
                let (k, v) = part.split_once('=').ok_or_else(|| {
                    Error::Parse(format!("exhibit parameter `{part}` is not key=value"))
                })?;
                params.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        Ok(Self {
            base: base.trim().to_string(),
            params,
        })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self
            .params
            .iter()
            .find(|(k, _)| !allowed.contains(&k.as_str()))
        {
            Some((k, _)) => Err(Error::Parse(format!(
                "unknown parameter `{k}` for exhibit {}",
                self.base
            ))),
            None => Ok(()),
        }
    }

    fn get_u32(&self, key: &str, default: u32) -> Result<u32> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Error::Parse(format!(
                    "parameter {key} must be a nonnegative integer, got `{v}`"
                ))
            }),
        }
    }
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

/// Growth rule names accepted by `prz4:r=…`.
pub fn parse_growth(name: &str) -> Result<ScaleRule> {
    if let Some(d) = name.strip_prefix("poly") {
        let degree = d
            .parse()
            .map_err(|_| Error::Parse(format!("bad polynomial growth `{name}`")))?;
        return Ok(ScaleRule::Poly { degree });
    }
    if let Some(b) = name.strip_prefix("exp") {
        let base = b
            .parse()
            .map_err(|_| Error::Parse(format!("bad exponential growth `{name}`")))?;
        return Ok(ScaleRule::Exp { base });
    }
    Err(Error::Parse(format!("unknown growth rule `{name}`")))
}

pub const CATALOG: &[&str] = &["prz1", "prz2", "prz3", "prz4", "achtenZ"];

/// Builds an exhibit from its catalog name. `prz1_dims` overrides the default
/// compression sizes of `prz1`.
pub fn build_named(name: &str, prz1_dims: Option<&[usize]>) -> Result<ExhibitSpec> {
    let cat = CatalogName::parse(name)?;
    match cat.base.as_str() {
        "prz1" => {
            cat.check_keys(&[])?;
            let dims = prz1_dims
                .map(<[usize]>::to_vec)
                .unwrap_or_else(|| vec![16, 32, 64]);
            build_prz1(&dims, &default_symbol())
        }
        "prz2" => {
            cat.check_keys(&["kappa", "depth"])?;
            let params = Prz2Params {
                kappa: match cat.get("kappa") {
                    Some("inf") => None,
                    _ => Some(cat.get_u32("kappa", 2)?),
                },
                depth_cap: cat.get_u32("depth", 8)?,
                ..Prz2Params::default()
            };
            build_prz2(&params)
        }
        "prz3" => {
            cat.check_keys(&["n", "depth"])?;
            build_prz3(cat.get_u32("n", 2)?, cat.get_u32("depth", 8)?)
        }
        "prz4" => {
            cat.check_keys(&["r", "n"])?;
            let rule = parse_growth(cat.get("r").unwrap_or("poly1"))?;
            build_prz4(rule, cat.get_u32("n", 2)?)
        }
        "achtenZ" => {
            cat.check_keys(&["seed"])?;
            let mut rng = crate::probe::rng_from_seed(cat.get_u32("seed", 0)? as u64);
            achtenz_demo(random_block_family(&mut rng, true))
        }
        _ => Err(Error::UnknownExhibit(name.to_string())),
    }
}

/// Verdict for a scalar certificate: Holds when `ok`.
pub(crate) fn certificate(
    ok: bool,
    value: f64,
    detail: impl Into<String>,
    threshold: f64,
) -> Verdict {
    let ctx = VerdictContext {
        threshold,
        ..Default::default()
    };
    if ok {
        Verdict::holds(value, ctx).with_note(detail)
    } else {
        Verdict::fails(
            Witness::vector(Default::default()).with_detail(detail),
            value,
            ctx,
        )
    }
}
