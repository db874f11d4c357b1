//! Toeplitz example: `C = S T_φ^{1/2}` with a nonnegative trigonometric
//! polynomial symbol, so that `C*C = T_φ` and `S*T_φS = T_φ`.
//!
//! The exact part is the banded identity, checked on the semi-infinite
//! operator. `(C*C)² = C*²C²` only holds in the limit of the finite
//! sections, which is shown as a convergence table: the residual of the
//! `N × N` section is measured on the interior block `[0, N/2)`, away from
//! the truncation edge where the section of `T_φ^{1/2}` is wrong.

use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::{certificate, Exhibit, ExhibitOptions, ExhibitSpec, Expected, Outcomes};
use crate::error::{Error, Result};
use crate::hilbert::Label;
use crate::operator::{adjoint, compose, matrix_of, shift_isometry, BandedToeplitz, CMat, OpRef};
use crate::predicates::anchors;
use crate::spectral::{herm_eig, worst_column};
use crate::verdict::{Status, Verdict, VerdictContext, Witness};

/// Interior power-identity residual accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Sample count for the nonnegativity check of the symbol.
const SYMBOL_GRID: usize = 4096;
const MIN_COMMUTATOR: f64 = 0.1;

/// `φ(e^{it}) = 2 + e^{it} + e^{-it} = 2 + 2 cos t`.
pub fn default_symbol() -> Vec<(i64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    vec![(-1, one), (0, Complex64::new(2.0, 0.0)), (1, one)]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prz1Row {
    pub n: usize,
    /// Interior residual of `(C*C)² − C*²C²` (largest column norm).
    pub discrepancy: f64,
    /// Same residual on the wider window `[0, N − 2b)`.
    pub wide_discrepancy: f64,
    /// Interior `‖S T − T S‖`.
    pub commutator: f64,
    /// Interior residual of `CC*C − C*CC`.
    pub quasinormal_residual: f64,
}

pub struct Prz1 {
    pub symbol: BandedToeplitz,
    pub dims: Vec<usize>,
}

fn toeplitz_section(t: &BandedToeplitz, n: usize) -> CMat {
    CMat::from_fn(n, n, |j, k| t.coeff(j as i64 - k as i64))
}

fn shift_section(n: usize) -> CMat {
    CMat::from_fn(n, n, |j, k| {
        if j == k + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn interior(m: &CMat, w: usize) -> CMat {
    m.view((0, 0), (w, w)).into_owned()
}

/// Validates the symbol: Hermitian coefficients (`c_{-k} = conj c_k`, so `φ`
/// is real), `φ ≥ 0` on a uniform grid, `c_1 ≠ 0`.
fn validate_symbol(coeffs: &[(i64, Complex64)]) -> Result<BandedToeplitz> {
    let t = BandedToeplitz::new(coeffs.iter().copied());
    let b = t.bandwidth() as i64;
    for k in -b..=b {
        if (t.coeff(-k) - t.coeff(k).conj()).norm() > 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "symbol is not real: c_{} ≠ conj(c_{k})",
                -k
            )));
        }
    }
    if t.coeff(1).norm() == 0.0 {
        return Err(Error::InvalidParameter("symbol needs c_1 ≠ 0".into()));
    }
    let scale: f64 = (-b..=b).map(|k| t.coeff(k).norm()).sum();
    for i in 0..SYMBOL_GRID {
        let x = std::f64::consts::TAU * i as f64 / SYMBOL_GRID as f64;
        let phi: f64 = (-b..=b)
            .map(|k| (t.coeff(k) * Complex64::from_polar(1.0, k as f64 * x)).re)
            .sum();
        if phi < -1e-12 * scale {
            return Err(Error::InvalidParameter(format!(
                "symbol is negative at t = {x}: {phi}"
            )));
        }
    }
    Ok(t)
}

pub fn build_prz1(dims: &[usize], coeffs: &[(i64, Complex64)]) -> Result<ExhibitSpec> {
    let symbol = validate_symbol(coeffs)?;
    let b = symbol.bandwidth() as usize;
    if dims.is_empty() {
        return Err(Error::InvalidParameter(
            "prz1 needs at least one dimension".into(),
        ));
    }
    if let Some(n) = dims.iter().find(|&&n| n < 4 * b.max(1)) {
        return Err(Error::InvalidParameter(format!(
            "dimension {n} is too small for bandwidth {b}"
        )));
    }
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();
    let mut parameters = Map::new();
    parameters.insert("N".into(), json!(dims));
    parameters.insert(
        "symbol".into(),
        Value::Array(
            (-(b as i64)..=b as i64)
                .map(|k| json!([k, symbol.coeff(k).re, symbol.coeff(k).im]))
                .collect(),
        ),
    );
    let last = *dims.last().expect("nonempty");
    let expected = vec![
        Expected::new("banded_identity", Status::Holds, "prz1: S*T_φS = T_φ"),
        Expected::new("convergence", Status::Holds, anchors::POWER),
        Expected::new(
            format!("interior_power_identity[N={last}]"),
            Status::Holds,
            anchors::POWER,
        ),
        Expected::new(
            format!("interior_commutator[N={last}]"),
            Status::Holds,
            "prz1: ST_φ ≠ T_φS",
        ),
        Expected::new(
            format!("interior_quasinormal[N={last}]"),
            Status::Fails,
            anchors::QUASINORMAL,
        ),
    ];
    Ok(ExhibitSpec {
        name: "prz1".into(),
        parameters,
        expected,
        exhibit: Exhibit::Prz1(Prz1 { symbol, dims }),
    })
}

impl Prz1 {
    pub fn descriptor(&self) -> String {
        format!(
            "S T_phi^(1/2), {}",
            crate::operator::LocalOperator::descriptor(&self.symbol)
        )
    }

    /// `max |(S*T_φS)_{jk} − c_{j−k}|` over `j, k < n − 1`, computed on the
    /// semi-infinite operators.
    pub fn banded_identity_residual(&self, n: usize) -> f64 {
        let s = shift_isometry();
        let t: OpRef = Arc::new(self.symbol.clone());
        let sts = compose(&adjoint(&s), &compose(&t, &s));
        let labels: Vec<Label> = (0..n as u64 - 1).map(Label::Nat).collect();
        let m = matrix_of(sts.as_ref(), &labels).expect("distinct labels");
        let expect = toeplitz_section(&self.symbol, n - 1);
        (m.matrix() - expect)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `C_N = S_N T_N^{1/2}` from the `N × N` sections.
    pub fn section(&self, n: usize) -> CMat {
        let t = toeplitz_section(&self.symbol, n);
        let root = herm_eig(&t, 1e-12)
            .expect("Toeplitz section is Hermitian")
            .map(|x| x.max(0.0).sqrt());
        shift_section(n) * root
    }

    pub fn row(&self, n: usize) -> Prz1Row {
        let t = toeplitz_section(&self.symbol, n);
        let s = shift_section(n);
        let c = self.section(n);
        let cs = c.adjoint();
        let gram = &cs * &c;
        let d2 = &gram * &gram - &cs * &cs * &c * &c;
        let b = self.symbol.bandwidth() as usize;
        let half = n / 2;
        let wide = n.saturating_sub(2 * b).max(1);
        let qn = &c * &cs * &c - &cs * &c * &c;
        let comm = &s * &t - &t * &s;
        Prz1Row {
            n,
            discrepancy: worst_column(&interior(&d2, half)).0,
            wide_discrepancy: worst_column(&interior(&d2, wide)).0,
            commutator: worst_column(&interior(&comm, wide)).0,
            quasinormal_residual: worst_column(&interior(&qn, half)).0,
        }
    }

    pub fn table(&self) -> Vec<Prz1Row> {
        self.dims.iter().map(|&n| self.row(n)).collect()
    }

    pub fn evaluate(&self, opts: &ExhibitOptions) -> Outcomes {
        let mut out = Outcomes::default();
        let tol = &opts.tol;
        let first = self.dims[0];
        let last = *self.dims.last().expect("nonempty");

        let banded = self.banded_identity_residual(last);
        let scale: f64 = self.symbol.coeffs().map(|(_, c)| c.norm()).sum();
        let thr = tol.threshold(scale);
        out.push(
            "banded_identity",
            "prz1: S*T_φS = T_φ",
            certificate(
                banded <= thr,
                banded,
                format!("max entry residual on j, k < {}", last - 1),
                thr,
            ),
        );

        let table = self.table();
        let decreasing = table
            .windows(2)
            .all(|w| w[1].discrepancy < w[0].discrepancy);
        let (d_first, d_last) = (table[0].discrepancy, table[table.len() - 1].discrepancy);
        let ratio = d_last / d_first;
        // A hundredfold drop is required once the sizes span a factor of 4.
        let fast = last < 4 * first || ratio < 1e-2;
        out.push(
            "convergence",
            anchors::POWER,
            certificate(
                decreasing && fast,
                ratio,
                format!("interior residual ratio N={last} / N={first}"),
                1e-2,
            ),
        );
        let row = &table[table.len() - 1];
        let ctx = |threshold: f64| VerdictContext {
            window: (0..(last / 2) as u64).map(Label::Nat).collect(),
            tolerance: *tol,
            threshold,
            ..Default::default()
        };
        out.push(
            format!("interior_power_identity[N={last}]"),
            anchors::POWER,
            Verdict::decide(row.discrepancy, None, ctx(CONVERGENCE_TOL)),
        );
        out.push(
            format!("interior_commutator[N={last}]"),
            "prz1: ST_φ ≠ T_φS",
            certificate(
                row.commutator > MIN_COMMUTATOR,
                row.commutator,
                format!("‖ST − TS‖ on the interior window, required > {MIN_COMMUTATOR}"),
                MIN_COMMUTATOR,
            ),
        );
        let qn = if row.quasinormal_residual > CONVERGENCE_TOL {
            Verdict::fails(
                Witness::vector(Default::default()).with_detail("interior residual of CC*C − C*CC"),
                row.quasinormal_residual,
                ctx(CONVERGENCE_TOL),
            )
        } else {
            Verdict::holds(row.quasinormal_residual, ctx(CONVERGENCE_TOL))
        };
        out.push(
            format!("interior_quasinormal[N={last}]"),
            anchors::QUASINORMAL,
            qn,
        );

        let rows: Vec<Value> = table
            .iter()
            .map(|r| {
                json!({
                    "N": r.n,
                    "discrepancy": r.discrepancy,
                    "wide_discrepancy": r.wide_discrepancy,
                    "commutator": r.commutator,
                    "quasinormal_residual": r.quasinormal_residual,
                })
            })
            .collect();
        out.extras
            .insert("discrepancy_table".into(), Value::Array(rows));
        out
    }
}
