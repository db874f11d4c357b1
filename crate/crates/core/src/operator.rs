//! Operators given by exact actions on finitely supported vectors.
//!
//! A [`LocalOperator`] maps finite support to finite support in both its
//! forward and adjoint action, so every identity between products of
//! operators and their adjoints can be evaluated exactly (up to rounding) on
//! the dense core of finitely supported vectors. Nothing here ever truncates
//! an index set: infinite-index operators such as the unilateral shift or an
//! infinite orthogonal sum are first-class.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Label, SparseVec};

pub type CMat = DMatrix<Complex64>;

/// Shared handle to an operator.
pub type OpRef = Arc<dyn LocalOperator>;

pub trait LocalOperator: Send + Sync {
    fn apply(&self, v: &SparseVec) -> SparseVec;

    /// Action of the adjoint on the finitely supported core.
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec;

    /// Build expression, e.g. `compose(S, S)`.
    fn descriptor(&self) -> String;

    /// The dense matrix, when the operator is one.
    fn as_matrix(&self) -> Option<&FiniteMatrixOp> {
        None
    }

    /// The full basis when the underlying space is finite dimensional.
    fn natural_window(&self) -> Option<Vec<Label>> {
        None
    }
}

impl fmt::Debug for dyn LocalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalOperator({})", self.descriptor())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl LocalOperator for Identity {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        v.clone()
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        v.clone()
    }
    fn descriptor(&self) -> String {
        "I".into()
    }
}

pub fn identity() -> OpRef {
    Arc::new(Identity)
}

/// Unilateral shift on `ℓ²(ℤ₊)`: `S e_n = e_{n+1}`, `S* e_0 = 0`,
/// `S* e_n = e_{n-1}`. Labels other than `Nat` are outside its space and are
/// annihilated.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnilateralShift;

impl LocalOperator for UnilateralShift {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        v.iter()
            .filter_map(|(l, c)| l.as_nat().map(|k| (Label::Nat(k + 1), *c)))
            .collect()
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        v.iter()
            .filter_map(|(l, c)| match l.as_nat() {
                Some(k) if k > 0 => Some((Label::Nat(k - 1), *c)),
                _ => None,
            })
            .collect()
    }
    fn descriptor(&self) -> String {
        "S".into()
    }
}

pub fn shift_isometry() -> OpRef {
    Arc::new(UnilateralShift)
}

/// Semi-infinite banded Toeplitz matrix on `ℓ²(ℤ₊)` with entries
/// `T[j][k] = c[j - k]` for a finitely supported symbol `c`.
#[derive(Debug, Clone)]
pub struct BandedToeplitz {
    coeffs: BTreeMap<i64, Complex64>,
}

impl BandedToeplitz {
    pub fn new<I: IntoIterator<Item = (i64, Complex64)>>(coeffs: I) -> Self {
        Self {
            coeffs: coeffs
                .into_iter()
                .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
                .collect(),
        }
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        self.coeffs.get(&m).copied().unwrap_or_default()
    }

    /// Nonzero coefficients `(m, c[m])` in increasing `m`.
    pub fn coeffs(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(m, c)| (*m, *c))
    }

    /// Largest `|m|` with `c[m] ≠ 0`.
    pub fn bandwidth(&self) -> u64 {
        self.coeffs
            .keys()
            .map(|m| m.unsigned_abs())
            .max()
            .unwrap_or(0)
    }
}

impl LocalOperator for BandedToeplitz {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (l, x) in v.iter() {
            let Some(k) = l.as_nat() else { continue };
            for (m, c) in &self.coeffs {
                let j = k as i64 + m;
                if j >= 0 {
                    out.add_at(Label::Nat(j as u64), *c * x);
                }
            }
        }
        out
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (l, x) in v.iter() {
            let Some(j) = l.as_nat() else { continue };
            for (m, c) in &self.coeffs {
                let k = j as i64 - m;
                if k >= 0 {
                    out.add_at(Label::Nat(k as u64), c.conj() * x);
                }
            }
        }
        out
    }
    fn descriptor(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(m, c)| format!("{m}:{}{:+}i", c.re, c.im))
            .collect();
        format!("toeplitz[{}]", terms.join(","))
    }
}

/// Dense `n × n` matrix acting on the labels `Nat(0)..Nat(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMatrixOp {
    matrix: CMat,
}

impl FiniteMatrixOp {
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix })
    }

    /// Row-major construction.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows must all have length n".into()));
        }
        Self::new(CMat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn labels(&self) -> Vec<Label> {
        (0..self.dim() as u64).map(Label::Nat).collect()
    }

    /// Coefficients on `Nat(0..dim)`; other labels are dropped.
    pub fn to_dense(&self, v: &SparseVec) -> DVector<Complex64> {
        let n = self.dim();
        let mut x = DVector::zeros(n);
        for (l, c) in v.iter() {
            if let Some(k) = l.as_nat() {
                if (k as usize) < n {
                    x[k as usize] = *c;
                }
            }
        }
        x
    }

    fn to_sparse(x: &DVector<Complex64>) -> SparseVec {
        x.iter()
            .enumerate()
            .map(|(k, c)| (Label::Nat(k as u64), *c))
            .collect()
    }
}

impl LocalOperator for FiniteMatrixOp {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        Self::to_sparse(&(&self.matrix * self.to_dense(v)))
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        Self::to_sparse(&(self.matrix.adjoint() * self.to_dense(v)))
    }
    fn descriptor(&self) -> String {
        let rows: Vec<String> = self
            .matrix
            .row_iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|c| format!("[{},{}]", c.re, c.im)).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        format!("matrix[{}]", rows.join(","))
    }
    fn as_matrix(&self) -> Option<&FiniteMatrixOp> {
        Some(self)
    }
    fn natural_window(&self) -> Option<Vec<Label>> {
        Some(self.labels())
    }
}

struct Compose {
    outer: OpRef,
    inner: OpRef,
}

impl LocalOperator for Compose {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        self.outer.apply(&self.inner.apply(v))
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        self.inner.adjoint_apply(&self.outer.adjoint_apply(v))
    }
    fn descriptor(&self) -> String {
        format!(
            "compose({}, {})",
            self.outer.descriptor(),
            self.inner.descriptor()
        )
    }
    fn natural_window(&self) -> Option<Vec<Label>> {
        self.outer
            .natural_window()
            .or_else(|| self.inner.natural_window())
    }
}

/// `a ∘ b`.
pub fn compose(a: &OpRef, b: &OpRef) -> OpRef {
    Arc::new(Compose {
        outer: a.clone(),
        inner: b.clone(),
    })
}

struct Power {
    base: OpRef,
    exponent: u32,
}

impl LocalOperator for Power {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        (0..self.exponent).fold(v.clone(), |acc, _| self.base.apply(&acc))
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        (0..self.exponent).fold(v.clone(), |acc, _| self.base.adjoint_apply(&acc))
    }
    fn descriptor(&self) -> String {
        format!("power({}, {})", self.base.descriptor(), self.exponent)
    }
    fn natural_window(&self) -> Option<Vec<Label>> {
        self.base.natural_window()
    }
}

/// `aⁿ`; `n = 0` is the identity.
pub fn power(a: &OpRef, n: u32) -> OpRef {
    Arc::new(Power {
        base: a.clone(),
        exponent: n,
    })
}

struct Scaled {
    base: OpRef,
    factor: Complex64,
}

impl LocalOperator for Scaled {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        self.base.apply(v).scale(self.factor)
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        self.base.adjoint_apply(v).scale(self.factor.conj())
    }
    fn descriptor(&self) -> String {
        format!(
            "scale({}, {}{:+}i)",
            self.base.descriptor(),
            self.factor.re,
            self.factor.im
        )
    }
    fn natural_window(&self) -> Option<Vec<Label>> {
        self.base.natural_window()
    }
}

pub fn scale(a: &OpRef, c: Complex64) -> OpRef {
    Arc::new(Scaled {
        base: a.clone(),
        factor: c,
    })
}

struct Sum {
    left: OpRef,
    right: OpRef,
}

impl LocalOperator for Sum {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        &self.left.apply(v) + &self.right.apply(v)
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        &self.left.adjoint_apply(v) + &self.right.adjoint_apply(v)
    }
    fn descriptor(&self) -> String {
        format!(
            "add({}, {})",
            self.left.descriptor(),
            self.right.descriptor()
        )
    }
    fn natural_window(&self) -> Option<Vec<Label>> {
        self.left
            .natural_window()
            .or_else(|| self.right.natural_window())
    }
}

pub fn add(a: &OpRef, b: &OpRef) -> OpRef {
    Arc::new(Sum {
        left: a.clone(),
        right: b.clone(),
    })
}

struct Adjoint {
    base: OpRef,
}

impl LocalOperator for Adjoint {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        self.base.adjoint_apply(v)
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        self.base.apply(v)
    }
    fn descriptor(&self) -> String {
        format!("adjoint({})", self.base.descriptor())
    }
    fn natural_window(&self) -> Option<Vec<Label>> {
        self.base.natural_window()
    }
}

pub fn adjoint(a: &OpRef) -> OpRef {
    Arc::new(Adjoint { base: a.clone() })
}

/// Scale factors `r_j` of an orthogonal sum `⊕ r_j A`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleRule {
    /// Finitely many blocks, `r_j` listed.
    Explicit(Vec<f64>),
    Constant(f64),
    /// `r_j = slope · j + offset`.
    Linear {
        slope: f64,
        offset: f64,
    },
    /// `r_j = (j + 1)^degree`.
    Poly {
        degree: u32,
    },
    /// `r_j = base^j`.
    Exp {
        base: f64,
    },
}

impl ScaleRule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            ScaleRule::Explicit(rs) => {
                if let Some((j, r)) = rs.iter().enumerate().find(|(_, r)| !(**r >= 0.0)) {
                    return bad(format!("negative scale r_{j} = {r}"));
                }
            }
            ScaleRule::Constant(c) if !(*c >= 0.0) => return bad(format!("negative scale {c}")),
            ScaleRule::Linear { slope, offset } if !(*slope >= 0.0 && *offset >= 0.0) => {
                return bad(format!(
                    "linear rule {slope}·j + {offset} takes negative values"
                ))
            }
            ScaleRule::Exp { base } if !(*base > 0.0) => {
                return bad(format!(
                    "exponential rule needs a positive base, got {base}"
                ))
            }
            _ => {}
        }
        Ok(())
    }

    /// `r_j`, or `None` when block `j` does not exist.
    pub fn scale(&self, j: u64) -> Option<f64> {
        match self {
            ScaleRule::Explicit(rs) => rs.get(j as usize).copied(),
            ScaleRule::Constant(c) => Some(*c),
            ScaleRule::Linear { slope, offset } => Some(slope * j as f64 + offset),
            ScaleRule::Poly { degree } => Some(((j + 1) as f64).powi(*degree as i32)),
            ScaleRule::Exp { base } => Some(base.powf(j as f64)),
        }
    }

    /// Number of blocks, `None` for infinitely many.
    pub fn block_count(&self) -> Option<usize> {
        match self {
            ScaleRule::Explicit(rs) => Some(rs.len()),
            _ => None,
        }
    }

    /// True when the rule is nondecreasing with `sup r_j = ∞`, certified from
    /// the closed form.
    pub fn is_monotone_unbounded(&self) -> bool {
        match self {
            ScaleRule::Linear { slope, .. } => *slope > 0.0,
            ScaleRule::Poly { degree } => *degree >= 1,
            ScaleRule::Exp { base } => *base > 1.0,
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ScaleRule::Explicit(rs) => format!("{rs:?}"),
            ScaleRule::Constant(c) => format!("r_j={c}"),
            ScaleRule::Linear { slope, offset } => format!("r_j={slope}*j+{offset}"),
            ScaleRule::Poly { degree } => format!("r_j=(j+1)^{degree}"),
            ScaleRule::Exp { base } => format!("r_j={base}^j"),
        }
    }
}

enum Blocks {
    Scaled { op: OpRef, rule: ScaleRule },
    Listed(Vec<OpRef>),
}

/// Orthogonal sum acting on `Block(j, ·)` labels; blocks never mix. Labels
/// that are not block labels, or name a block that does not exist, are
/// annihilated.
pub struct DirectSumOp {
    blocks: Blocks,
}

impl DirectSumOp {
    /// `⊕ r_j A` with `r_j` evaluated on demand.
    pub fn scaled(block_op: OpRef, rule: ScaleRule) -> Result<Self> {
        rule.validate()?;
        Ok(Self {
            blocks: Blocks::Scaled { op: block_op, rule },
        })
    }

    /// Finite sum of possibly different operators.
    pub fn from_blocks(blocks: Vec<OpRef>) -> Self {
        Self {
            blocks: Blocks::Listed(blocks),
        }
    }

    pub fn block_count(&self) -> Option<usize> {
        match &self.blocks {
            Blocks::Scaled { rule, .. } => rule.block_count(),
            Blocks::Listed(b) => Some(b.len()),
        }
    }

    /// Operator acting in block `j` (including its scale), if the block exists.
    pub fn block(&self, j: u64) -> Option<OpRef> {
        match &self.blocks {
            Blocks::Scaled { op, rule } => rule.scale(j).map(|r| scale(op, Complex64::new(r, 0.0))),
            Blocks::Listed(b) => b.get(j as usize).cloned(),
        }
    }

    fn blockwise<F>(&self, v: &SparseVec, act: F) -> SparseVec
    where
        F: Fn(&dyn LocalOperator, f64, &SparseVec) -> SparseVec,
    {
        let mut grouped: BTreeMap<u64, SparseVec> = BTreeMap::new();
        for (l, c) in v.iter() {
            if let Label::Block(j, inner) = l {
                grouped.entry(*j).or_default().add_at((**inner).clone(), *c);
            }
        }
        let mut out = SparseVec::new();
        for (j, part) in grouped {
            let image = match &self.blocks {
                Blocks::Scaled { op, rule } => match rule.scale(j) {
                    Some(r) => act(op.as_ref(), r, &part),
                    None => continue,
                },
                Blocks::Listed(b) => match b.get(j as usize) {
                    Some(op) => act(op.as_ref(), 1.0, &part),
                    None => continue,
                },
            };
            for (l, c) in image.iter() {
                out.add_at(Label::block(j, l.clone()), *c);
            }
        }
        out
    }
}

impl LocalOperator for DirectSumOp {
    fn apply(&self, v: &SparseVec) -> SparseVec {
        self.blockwise(v, |op, r, x| op.apply(x).scale(Complex64::new(r, 0.0)))
    }
    fn adjoint_apply(&self, v: &SparseVec) -> SparseVec {
        self.blockwise(v, |op, r, x| {
            op.adjoint_apply(x).scale(Complex64::new(r, 0.0))
        })
    }
    fn descriptor(&self) -> String {
        match &self.blocks {
            Blocks::Scaled { op, rule } => {
                format!("direct_sum({}, {})", op.descriptor(), rule.describe())
            }
            Blocks::Listed(b) => {
                let parts: Vec<String> = b.iter().map(|o| o.descriptor()).collect();
                format!("direct_sum[{}]", parts.join("; "))
            }
        }
    }
    fn natural_window(&self) -> Option<Vec<Label>> {
        let Blocks::Listed(blocks) = &self.blocks else {
            return None;
        };
        let mut out = Vec::new();
        for (j, op) in blocks.iter().enumerate() {
            for l in op.natural_window()? {
                out.push(Label::block(j as u64, l));
            }
        }
        Some(out)
    }
}

pub fn direct_sum(block_op: OpRef, rule: ScaleRule) -> Result<DirectSumOp> {
    DirectSumOp::scaled(block_op, rule)
}

/// Compression of `op` to the span of `labels`: entry `(i, j)` is
/// `⟨op e_{labels[j]}, e_{labels[i]}⟩`.
pub fn matrix_of(op: &dyn LocalOperator, labels: &[Label]) -> Result<FiniteMatrixOp> {
    let mut index = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l, i).is_some() {
            return Err(Error::InvalidParameter(format!("repeated label {l}")));
        }
    }
    let n = labels.len();
    let mut m = CMat::zeros(n, n);
    for (j, l) in labels.iter().enumerate() {
        let image = op.apply(&SparseVec::basis(l.clone()));
        for (target, c) in image.iter() {
            if let Some(&i) = index.get(target) {
                m[(i, j)] = *c;
            }
        }
    }
    FiniteMatrixOp::new(m)
}

/// Largest `max(‖A e_l‖, ‖A* e_l‖)` over the window: the column-norm scale
/// used for operator identity tolerances.
pub fn window_norm(op: &dyn LocalOperator, window: &[Label]) -> f64 {
    window
        .iter()
        .map(|l| {
            let e = SparseVec::basis(l.clone());
            op.apply(&e).norm().max(op.adjoint_apply(&e).norm())
        })
        .fold(0.0, f64::max)
}

/// Column-norm scale of a dense matrix, `max(max column norm, max row norm)`.
pub fn matrix_scale(m: &CMat) -> f64 {
    let col = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let row = m.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    col.max(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::{random_probe_pairs, ProbeConfig};

    fn n(k: u64) -> Label {
        Label::Nat(k)
    }

    fn e(k: u64) -> SparseVec {
        SparseVec::basis(n(k))
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn duality_residual(op: &dyn LocalOperator, window: Vec<Label>, seed: u64) -> f64 {
        let cfg = ProbeConfig {
            seed,
            num_probes: 100,
            support_size: 4,
            label_window: window,
        };
        random_probe_pairs(&cfg)
            .iter()
            .map(|(u, v)| {
                let lhs = op.apply(u).inner(v);
                let rhs = u.inner(&op.adjoint_apply(v));
                (lhs - rhs).norm() / (1.0 + u.norm() * op.apply(v).norm().max(v.norm()))
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn shift_actions() {
        let s = shift_isometry();
        assert_eq!(s.apply(&e(3)), e(4));
        assert!(s.adjoint_apply(&e(0)).is_empty());
        assert_eq!(s.adjoint_apply(&e(5)), e(4));
        assert_eq!(adjoint(&s).apply(&e(2)), e(1));
    }

    #[test]
    fn combinators() {
        let s = shift_isometry();
        assert_eq!(compose(&s, &s).apply(&e(0)), e(2));
        assert_eq!(compose(&s, &identity()).apply(&e(7)), s.apply(&e(7)));
        assert_eq!(power(&s, 0).apply(&e(5)), e(5));
        assert_eq!(power(&s, 3).apply(&e(0)), e(3));
        assert!(scale(&s, c(0.0, 0.0)).apply(&e(1)).is_empty());
        assert!(add(&s, &scale(&s, c(-1.0, 0.0))).apply(&e(0)).is_empty());
        let twice = adjoint(&adjoint(&s));
        assert_eq!(twice.apply(&e(4)), s.apply(&e(4)));
        assert_eq!(twice.adjoint_apply(&e(4)), s.adjoint_apply(&e(4)));
    }

    #[test]
    fn composed_shift_is_dual_to_its_adjoint() {
        let s = shift_isometry();
        let ss = compose(&s, &s);
        let window: Vec<Label> = (0..12).map(n).collect();
        assert!(duality_residual(ss.as_ref(), window, 7) < 1e-12);
    }

    #[test]
    fn direct_sum_blockwise_action() {
        let d = direct_sum(shift_isometry(), ScaleRule::Constant(1.0)).unwrap();
        let x = SparseVec::basis(Label::block(2, n(0)));
        assert_eq!(d.apply(&x), SparseVec::basis(Label::block(2, n(1))));

        let d = direct_sum(
            shift_isometry(),
            ScaleRule::Linear {
                slope: 1.0,
                offset: 0.0,
            },
        )
        .unwrap();
        let x = SparseVec::basis(Label::block(3, n(0)));
        assert_eq!(
            d.apply(&x),
            SparseVec::basis(Label::block(3, n(1))).scale(c(3.0, 0.0))
        );

        let window: Vec<Label> = (0..5)
            .flat_map(|j| (0..4).map(move |k| Label::block(j, n(k))))
            .collect();
        assert!(duality_residual(&d, window, 11) < 1e-12);
    }

    #[test]
    fn negative_scales_rejected() {
        assert!(direct_sum(shift_isometry(), ScaleRule::Explicit(vec![1.0, -0.5])).is_err());
        assert!(direct_sum(shift_isometry(), ScaleRule::Constant(-1.0)).is_err());
    }

    #[test]
    fn compression_of_shift() {
        let m = matrix_of(shift_isometry().as_ref(), &[n(0), n(1), n(2)]).unwrap();
        let mut expected = CMat::zeros(3, 3);
        expected[(1, 0)] = c(1.0, 0.0);
        expected[(2, 1)] = c(1.0, 0.0);
        assert_eq!(m.matrix(), &expected);

        let labels = [n(4), n(9), n(1), n(2)];
        let id = matrix_of(&Identity, &labels).unwrap();
        assert_eq!(id.matrix(), &CMat::identity(4, 4));
        assert!(matrix_of(&Identity, &[n(1), n(1)]).is_err());
    }

    #[test]
    fn toeplitz_matches_its_entries() {
        let t = BandedToeplitz::new([(0, c(2.0, 0.0)), (1, c(1.0, 0.5)), (-1, c(1.0, -0.5))]);
        let m = matrix_of(&t, &(0..5).map(n).collect::<Vec<_>>()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(m.matrix()[(i, j)], t.coeff(i as i64 - j as i64));
            }
        }
        assert!(duality_residual(&t, (0..10).map(n).collect(), 3) < 1e-12);
        assert_eq!(t.bandwidth(), 1);
    }

    #[test]
    fn finite_matrix_adjoint_is_conjugate_transpose() {
        let m = FiniteMatrixOp::from_rows(&[
            vec![c(1.0, 2.0), c(0.0, -1.0)],
            vec![c(3.0, 0.0), c(0.5, 0.5)],
        ])
        .unwrap();
        assert_eq!(
            m.adjoint_apply(&e(0)),
            SparseVec::from_entries([(n(0), c(1.0, -2.0)), (n(1), c(0.0, 1.0))])
        );
        assert!(duality_residual(&m, m.labels(), 5) < 1e-12);
        assert!(FiniteMatrixOp::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
    }
}
