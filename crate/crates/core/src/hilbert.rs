//! Finitely supported vectors over a countable label set.
//!
//! Every vector in this crate is a [`SparseVec`]: a finite map from [`Label`]
//! to a nonzero complex coefficient. The label universe covers the three index
//! sets that appear in practice: the nonnegative integers (basis of `ℓ²(ℤ₊)`),
//! vertices of a directed tree (basis of `ℓ²(V)`) and one level of block
//! indices for orthogonal sums.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Vertex key of a directed tree.
///
/// `Trunk(k)` is the trunk vertex `-k` (`k >= 1`), `Center` is the vertex `0`,
/// `Branch { ray, depth }` is `(ray, depth)` with `ray ∈ {1, 2}` and `depth >= 1`,
/// and `Node(id)` is a vertex of an explicitly listed tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexKey {
    Trunk(u32),
    Center,
    Branch { ray: u8, depth: u32 },
    Node(u32),
}

impl VertexKey {
    // Canonical order: trunk from the far end towards 0, then 0, then the
    // branch vertices breadth first, then explicit nodes by id.
    fn order_key(&self) -> (u8, i64, i64) {
        match *self {
            VertexKey::Trunk(k) => (0, -(k as i64), 0),
            VertexKey::Center => (1, 0, 0),
            VertexKey::Branch { ray, depth } => (2, depth as i64, ray as i64),
            VertexKey::Node(id) => (3, id as i64, 0),
        }
    }
}

impl Ord for VertexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for VertexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VertexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKey::Trunk(k) => write!(f, "-{k}"),
            VertexKey::Center => write!(f, "0"),
            VertexKey::Branch { ray, depth } => write!(f, "({ray},{depth})"),
            VertexKey::Node(id) => write!(f, "#{id}"),
        }
    }
}

impl FromStr for VertexKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse(format!("invalid vertex key `{s}`"));
        if s == "0" {
            return Ok(VertexKey::Center);
        }
        if let Some(rest) = s.strip_prefix('-') {
            let k: u32 = rest.parse().map_err(|_| bad())?;
            return if k == 0 {
                Ok(VertexKey::Center)
            } else {
                Ok(VertexKey::Trunk(k))
            };
        }
        if let Some(rest) = s.strip_prefix('#') {
            return rest.parse().map(VertexKey::Node).map_err(|_| bad());
        }
        if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let (ray, depth) = inner.split_once(',').ok_or_else(bad)?;
            let ray: u8 = ray.trim().parse().map_err(|_| bad())?;
            let depth: u32 = depth.trim().parse().map_err(|_| bad())?;
            if !(1..=2).contains(&ray) || depth == 0 {
                return Err(bad());
            }
            return Ok(VertexKey::Branch { ray, depth });
        }
        Err(bad())
    }
}

/// Index of a basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Nat(u64),
    Vertex(VertexKey),
    Block(u64, Box<Label>),
}

impl Label {
    /// Block label `(j, inner)`. Blocks nest at most one level.
    ///
    /// # Panics
    /// If `inner` is itself a block label.
    pub fn block(j: u64, inner: Label) -> Label {
        assert!(
            !matches!(inner, Label::Block(..)),
            "block labels may not nest"
        );
        Label::Block(j, Box::new(inner))
    }

    pub fn vertex(key: VertexKey) -> Label {
        Label::Vertex(key)
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Label::Nat(k) => Some(*k),
            _ => None,
        }
    }

    pub fn as_vertex(&self) -> Option<VertexKey> {
        match self {
            Label::Vertex(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Nat(k) => write!(f, "n:{k}"),
            Label::Vertex(v) => write!(f, "v:{v}"),
            Label::Block(j, inner) => write!(f, "b:{j}/{inner}"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(rest) = s.strip_prefix("n:") {
            return rest
                .parse()
                .map(Label::Nat)
                .map_err(|_| Error::Parse(format!("invalid label `{s}`")));
        }
        if let Some(rest) = s.strip_prefix("v:") {
            return rest.parse().map(Label::Vertex);
        }
        if let Some(rest) = s.strip_prefix("b:") {
            let (j, inner) = rest
                .split_once('/')
                .ok_or_else(|| Error::Parse(format!("invalid label `{s}`")))?;
            let j: u64 = j
                .parse()
                .map_err(|_| Error::Parse(format!("invalid block index in `{s}`")))?;
            let inner: Label = inner.parse()?;
            if matches!(inner, Label::Block(..)) {
                return Err(Error::Parse(format!("nested block label `{s}`")));
            }
            return Ok(Label::block(j, inner));
        }
        Err(Error::Parse(format!("invalid label `{s}`")))
    }
}

/// Finitely supported complex vector. Stored coefficients are never zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVec {
    entries: BTreeMap<Label, Complex64>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// The unit vector `e_label`.
    pub fn basis(label: Label) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(label, Complex64::new(1.0, 0.0));
        Self { entries }
    }

    /// Builds a vector from `(label, value)` pairs, summing repeated labels.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (Label, Complex64)>,
    {
        let mut v = Self::new();
        for (label, value) in entries {
            v.add_at(label, value);
        }
        v
    }

    /// `v(label) += value`, dropping the entry if it becomes zero.
    pub fn add_at(&mut self, label: Label, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.entries.entry(label) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = *e.get() + value;
                if sum == Complex64::new(0.0, 0.0) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn get(&self, label: &Label) -> Complex64 {
        self.entries.get(label).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Complex64)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Label> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> SparseVec {
        SparseVec::from_entries(self.iter().map(|(l, v)| (l.clone(), *v * c)))
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        for (l, v) in other.iter() {
            out.add_at(l.clone(), c * *v);
        }
        out
    }

    /// `⟨self, other⟩`, linear in `self` and conjugate-linear in `other`.
    pub fn inner(&self, other: &SparseVec) -> Complex64 {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, a) in small.iter() {
            if let Some(b) = large.entries.get(l) {
                acc += if flip { *b * a.conj() } else { *a * b.conj() };
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().fold(0.0, |acc, v| acc + v.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `‖self − other‖ ≤ abs_tol + rel_tol · max(‖self‖, ‖other‖)`.
    pub fn approx_eq(&self, other: &SparseVec, tol: &TolerancePolicy) -> bool {
        let dist = (self - other).norm();
        dist <= tol.threshold(self.norm().max(other.norm()))
    }

    /// Keeps only the entries whose label satisfies `keep`.
    pub fn restrict<F: Fn(&Label) -> bool>(&self, keep: F) -> SparseVec {
        SparseVec {
            entries: self
                .entries
                .iter()
                .filter(|(l, _)| keep(l))
                .map(|(l, v)| (l.clone(), *v))
                .collect(),
        }
    }
}

impl FromIterator<(Label, Complex64)> for SparseVec {
    fn from_iter<T: IntoIterator<Item = (Label, Complex64)>>(iter: T) -> Self {
        SparseVec::from_entries(iter)
    }
}

impl Add for &SparseVec {
    type Output = SparseVec;

    fn add(self, rhs: &SparseVec) -> SparseVec {
        self.axpy(Complex64::new(1.0, 0.0), rhs)
    }
}

impl Sub for &SparseVec {
    type Output = SparseVec;

    fn sub(self, rhs: &SparseVec) -> SparseVec {
        self.axpy(Complex64::new(-1.0, 0.0), rhs)
    }
}

impl Neg for &SparseVec {
    type Output = SparseVec;

    fn neg(self) -> SparseVec {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Absolute plus relative tolerance. The relative part is scaled by whatever
/// reference magnitude the caller supplies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
        }
    }
}

impl TolerancePolicy {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self, Error> {
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be nonnegative, got abs {abs_tol}, rel {rel_tol}"
            )));
        }
        Ok(Self { abs_tol, rel_tol })
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale
    }

    pub fn accepts(&self, discrepancy: f64, scale: f64) -> bool {
        discrepancy <= self.threshold(scale)
    }
}
