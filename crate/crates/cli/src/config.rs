//! Run configuration: what to build, which predicates to run, probe budget,
//! tolerances. Parsed from JSON with unknown keys rejected, then overridden
//! by command-line flags.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use quasinormal::tree::{DirectedTree, TreeShiftOp, WeightSystem};
use quasinormal::{CMat, Error, Result, VertexKey};

/// Matrix entry: a real number or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

pub fn matrix_from_rows(rows: &[Vec<Entry>]) -> Result<CMat> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Dimension("matrix has no rows".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Dimension(format!(
            "row {i} has {} entries, expected {n} (matrices must be square)",
            r.len()
        )));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j].value()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeSpec {
    /// `T_{2,κ}`; `kappa` omitted means `κ = ∞`.
    TwoRay {
        #[serde(default)]
        kappa: Option<u32>,
        alpha: [[f64; 2]; 2],
        beta: [[f64; 2]; 2],
        #[serde(default = "one")]
        trunk: [f64; 2],
        #[serde(default = "default_depth")]
        depth_cap: u32,
    },
    /// Finite tree on integer vertices; `weights` maps each non-root vertex
    /// to `[re, im]`.
    Explicit {
        vertices: Vec<u32>,
        edges: Vec<(u32, u32)>,
        weights: BTreeMap<String, [f64; 2]>,
    },
}

fn one() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_depth() -> u32 {
    8
}

fn c(z: [f64; 2]) -> Complex64 {
    Complex64::new(z[0], z[1])
}

impl TreeSpec {
    pub fn build(&self) -> Result<TreeShiftOp> {
        match self {
            TreeSpec::TwoRay {
                kappa,
                alpha,
                beta,
                trunk,
                depth_cap,
            } => {
                let trunk_cap = kappa.is_none().then_some(*depth_cap);
                let tree = DirectedTree::t2kappa(*kappa, *depth_cap, trunk_cap)?;
                TreeShiftOp::new(
                    tree,
                    WeightSystem::TwoRay {
                        trunk: c(*trunk),
                        alpha: [c(alpha[0]), c(alpha[1])],
                        beta: [c(beta[0]), c(beta[1])],
                    },
                )
            }
            TreeSpec::Explicit {
                vertices,
                edges,
                weights,
            } => {
                let tree = DirectedTree::from_edges(vertices, edges)?;
                let w = weights
                    .iter()
                    .map(|(v, z)| {
                        let id = v.trim().parse::<u32>().map_err(|_| {
                            Error::Parse(format!("tree weight key {v:?} is not a vertex id"))
                        })?;
                        Ok((VertexKey::Node(id), c(*z)))
                    })
                    .collect::<Result<_>>()?;
                TreeShiftOp::new(tree, WeightSystem::Explicit(w))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// Row-major square matrix.
    Matrix(Vec<Vec<Entry>>),
    /// Catalog name such as `prz3:n=4`.
    Exhibit(String),
    Tree(TreeSpec),
    /// The unilateral shift on `ℓ²(ℤ₊)`.
    Shift,
    /// Banded Toeplitz matrix from `[m, re, im]` triples.
    Toeplitz(Vec<(i64, f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_probes")]
    pub num_probes: usize,
    #[serde(default = "default_support")]
    pub support_size: usize,
    /// Labels such as `n:3` or `v:(1,2)`; empty selects a default window.
    #[serde(default)]
    pub window: Vec<String>,
}

fn default_probes() -> usize {
    200
}

fn default_support() -> usize {
    6
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            num_probes: default_probes(),
            support_size: default_support(),
            window: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: OperatorSpec,
    /// Predicate names, optionally with `:`-separated integer arguments
    /// (`power_identity:3`, `power_corollary:2:3`).
    #[serde(default)]
    pub predicates: Vec<String>,
    /// `embry`, `ths1` or `exhibit`.
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default = "default_nmax")]
    pub nmax: u32,
    /// Sizes for the `prz1` exhibit.
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    #[serde(default)]
    pub probes: ProbeSpec,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_nmax() -> u32 {
    6
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// Canonical JSON used for hashing and for embedding in reports. The
    /// output path is left out so that it does not change the hash.
    pub fn canonical(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("output");
        }
        v
    }

    pub fn hash(&self) -> String {
        config_hash(&self.canonical())
    }
}

/// Hex SHA-256 of the compact JSON text.
pub fn config_hash(v: &serde_json::Value) -> String {
    let text = serde_json::to_string(v).expect("json serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Parses `2..6` or `2..=6` (both inclusive) or a single dimension.
pub fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("dimension range `{s}` is not of the form a..b"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "empty or zero dimension range `{s}`"
        )));
    }
    Ok((lo, hi))
}

/// Comma-separated list of sizes.
pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("`{p}` is not a dimension")))
        })
        .collect()
}
