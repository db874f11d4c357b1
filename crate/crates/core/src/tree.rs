//! Directed trees and weighted shifts on them.
//!
//! `S_λ e_u = Σ_{v ∈ Chi(u)} λ_v e_v` and `S_λ* e_u = conj(λ_u) e_{par(u)}`
//! (zero at the root). `S_λ*S_λ` is diagonal with entries
//! `d(u) = Σ_{v ∈ Chi(u)} |λ_v|²`, which turns the operator identities used
//! elsewhere into scalar conditions on vertices.
//!
//! The two-ray family `T_{2,κ}` is described in closed form, so its vertex
//! set never needs to be materialized: any vertex, however deep, is reached
//! through `children`/`parent` directly. Depth caps only choose default
//! windows.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Label, SparseVec, TolerancePolicy, VertexKey};
use crate::operator::{window_norm, LocalOperator};
use crate::probe::{random_probe_pairs, ProbeConfig};
use crate::verdict::{Verdict, VerdictContext, Witness};

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Explicit {
        root: VertexKey,
        parent: BTreeMap<VertexKey, VertexKey>,
        children: BTreeMap<VertexKey, Vec<VertexKey>>,
    },
    /// `T_{2,κ}`; `kappa = None` is the rootless tree with an infinite trunk.
    TwoRay {
        kappa: Option<u32>,
        branch_depth_cap: u32,
        trunk_depth_cap: u32,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectedTree {
    shape: Shape,
}

impl DirectedTree {
    /// Finite tree on vertices `Node(id)` from `(parent, child)` edges.
    pub fn from_edges(vertices: &[u32], edges: &[(u32, u32)]) -> Result<Self> {
        let all: BTreeSet<VertexKey> = vertices.iter().map(|&v| VertexKey::Node(v)).collect();
        if all.len() != vertices.len() {
            return Err(Error::InvalidTree("repeated vertex".into()));
        }
        if all.is_empty() {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        let mut parent = BTreeMap::new();
        let mut children: BTreeMap<VertexKey, Vec<VertexKey>> =
            all.iter().map(|v| (*v, Vec::new())).collect();
        for &(p, c) in edges {
            let (p, c) = (VertexKey::Node(p), VertexKey::Node(c));
            if !all.contains(&p) || !all.contains(&c) {
                return Err(Error::InvalidTree(format!(
                    "edge ({p}, {c}) leaves the vertex set"
                )));
            }
            if parent.insert(c, p).is_some() {
                return Err(Error::InvalidTree(format!("vertex {c} has two parents")));
            }
            children.get_mut(&p).expect("known vertex").push(c);
        }
        for ch in children.values_mut() {
            ch.sort();
        }
        let roots: Vec<VertexKey> = all
            .iter()
            .filter(|v| !parent.contains_key(v))
            .copied()
            .collect();
        let [root] = roots[..] else {
            return Err(Error::InvalidTree(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        };
        // Reachability from the root rules out cycles (a cycle has no path
        // from the root since every cycle vertex already has its parent).
        let mut seen = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(children[&v].iter().copied());
            }
        }
        if seen.len() != all.len() {
            return Err(Error::InvalidTree(
                "graph is not connected or contains a cycle".into(),
            ));
        }
        Ok(Self {
            shape: Shape::Explicit {
                root,
                parent,
                children,
            },
        })
    }

    /// `T_{2,κ}`: trunk `-κ, …, -1 → 0`, vertex `0` with children `(1,1)`,
    /// `(2,1)`, each of which starts a ray. `kappa = None` means `κ = ∞`, in
    /// which case `trunk_depth_cap` is required.
    pub fn t2kappa(
        kappa: Option<u32>,
        branch_depth_cap: u32,
        trunk_depth_cap: Option<u32>,
    ) -> Result<Self> {
        if branch_depth_cap == 0 {
            return Err(Error::InvalidParameter(
                "branch depth cap must be positive".into(),
            ));
        }
        let trunk_depth_cap = match (kappa, trunk_depth_cap) {
            (_, Some(0)) => {
                return Err(Error::InvalidParameter(
                    "trunk depth cap must be positive".into(),
                ))
            }
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "an infinite trunk needs a trunk depth cap".into(),
                ))
            }
            (Some(k), cap) => cap.map_or(k, |c| c.min(k)),
            (None, Some(c)) => c,
        };
        Ok(Self {
            shape: Shape::TwoRay {
                kappa,
                branch_depth_cap,
                trunk_depth_cap,
            },
        })
    }

    pub fn root(&self) -> Option<VertexKey> {
        match &self.shape {
            Shape::Explicit { root, .. } => Some(*root),
            Shape::TwoRay { kappa: Some(0), .. } => Some(VertexKey::Center),
            Shape::TwoRay { kappa: Some(k), .. } => Some(VertexKey::Trunk(*k)),
            Shape::TwoRay { kappa: None, .. } => None,
        }
    }

    pub fn contains(&self, v: &VertexKey) -> bool {
        match &self.shape {
            Shape::Explicit { children, .. } => children.contains_key(v),
            Shape::TwoRay { kappa, .. } => match *v {
                VertexKey::Trunk(k) => k >= 1 && kappa.is_none_or(|kap| k <= kap),
                VertexKey::Center => true,
                VertexKey::Branch { ray, depth } => (1..=2).contains(&ray) && depth >= 1,
                VertexKey::Node(_) => false,
            },
        }
    }

    pub fn parent(&self, v: &VertexKey) -> Option<VertexKey> {
        if !self.contains(v) {
            return None;
        }
        match &self.shape {
            Shape::Explicit { parent, .. } => parent.get(v).copied(),
            Shape::TwoRay { kappa, .. } => match *v {
                VertexKey::Trunk(k) if Some(k) == *kappa => None,
                VertexKey::Trunk(k) => Some(VertexKey::Trunk(k + 1)),
                VertexKey::Center if *kappa == Some(0) => None,
                VertexKey::Center => Some(VertexKey::Trunk(1)),
                VertexKey::Branch { depth: 1, .. } => Some(VertexKey::Center),
                VertexKey::Branch { ray, depth } => Some(VertexKey::Branch {
                    ray,
                    depth: depth - 1,
                }),
                VertexKey::Node(_) => None,
            },
        }
    }

    pub fn children(&self, v: &VertexKey) -> Vec<VertexKey> {
        if !self.contains(v) {
            return Vec::new();
        }
        match &self.shape {
            Shape::Explicit { children, .. } => children[v].clone(),
            Shape::TwoRay { .. } => match *v {
                VertexKey::Trunk(1) => vec![VertexKey::Center],
                VertexKey::Trunk(k) => vec![VertexKey::Trunk(k - 1)],
                VertexKey::Center => vec![
                    VertexKey::Branch { ray: 1, depth: 1 },
                    VertexKey::Branch { ray: 2, depth: 1 },
                ],
                VertexKey::Branch { ray, depth } => vec![VertexKey::Branch {
                    ray,
                    depth: depth + 1,
                }],
                VertexKey::Node(_) => Vec::new(),
            },
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.shape, Shape::Explicit { .. })
    }

    /// All vertices of a finite tree, or the vertices within the depth caps
    /// of a two-ray tree, in canonical order.
    pub fn materialized_vertices(&self) -> Vec<VertexKey> {
        match &self.shape {
            Shape::Explicit { children, .. } => children.keys().copied().collect(),
            Shape::TwoRay {
                branch_depth_cap,
                trunk_depth_cap,
                ..
            } => self.two_ray_window(*trunk_depth_cap, *branch_depth_cap),
        }
    }

    fn two_ray_window(&self, trunk: u32, branch: u32) -> Vec<VertexKey> {
        let mut out: Vec<VertexKey> = (1..=trunk)
            .map(VertexKey::Trunk)
            .filter(|v| self.contains(v))
            .collect();
        out.push(VertexKey::Center);
        for depth in 1..=branch {
            for ray in 1..=2 {
                out.push(VertexKey::Branch { ray, depth });
            }
        }
        out.sort();
        out
    }

    /// Window that represents every vertex orbit relevant to identities of
    /// order `n`. On a finite tree this is the whole vertex set. On `T_{2,κ}`
    /// it is the trunk to depth `n + 2` (or `κ`), the vertex `0` and both rays
    /// to depth `n + 2`: beyond that the local structure of the tree and of
    /// the eventually constant weights repeats, so every `d(u)` and
    /// `‖Sⁿe_u‖` outside the window equals one inside it.
    pub fn orbit_window(&self, n: u32) -> Vec<VertexKey> {
        match &self.shape {
            Shape::Explicit { .. } => self.materialized_vertices(),
            Shape::TwoRay { .. } => self.two_ray_window(n + 2, n + 2),
        }
    }

    pub fn describe(&self) -> String {
        match &self.shape {
            Shape::Explicit { children, .. } => format!("tree[{} vertices]", children.len()),
            Shape::TwoRay { kappa: Some(k), .. } => format!("T_2,{k}"),
            Shape::TwoRay { kappa: None, .. } => "T_2,inf".into(),
        }
    }
}

/// Weights `λ_v`, `v ∈ V°`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSystem {
    Explicit(BTreeMap<VertexKey, Complex64>),
    /// Weights on `T_{2,κ}`: `alpha[i-1]` on `(i,1)`, `beta[i-1]` on `(i,j)`
    /// for `j >= 2`, `trunk` on the trunk vertices and on `0`.
    TwoRay {
        trunk: Complex64,
        alpha: [Complex64; 2],
        beta: [Complex64; 2],
    },
}

impl WeightSystem {
    fn weight(&self, v: &VertexKey) -> Option<Complex64> {
        match self {
            WeightSystem::Explicit(map) => map.get(v).copied(),
            WeightSystem::TwoRay { trunk, alpha, beta } => match *v {
                VertexKey::Trunk(_) | VertexKey::Center => Some(*trunk),
                VertexKey::Branch { ray, depth: 1 } => Some(alpha[ray as usize - 1]),
                VertexKey::Branch { ray, .. } => Some(beta[ray as usize - 1]),
                VertexKey::Node(_) => None,
            },
        }
    }
}

/// Weighted shift `S_λ` on a directed tree.
#[derive(Clone, Debug)]
pub struct TreeShiftOp {
    tree: DirectedTree,
    weights: WeightSystem,
}

impl TreeShiftOp {
    /// Validates that `weights` is defined on exactly `V°`, then checks
    /// adjoint duality on a seeded probe batch.
    pub fn new(tree: DirectedTree, weights: WeightSystem) -> Result<Self> {
        match (&tree.shape, &weights) {
            (Shape::Explicit { root, children, .. }, WeightSystem::Explicit(map)) => {
                for v in children.keys() {
                    if v != root && !map.contains_key(v) {
                        return Err(Error::MissingWeight(v.to_string()));
                    }
                }
                if let Some(extra) = map.keys().find(|v| *v == root || !children.contains_key(v)) {
                    return Err(Error::InvalidParameter(format!(
                        "weight given at {extra}, which is not in V°"
                    )));
                }
            }
            (Shape::TwoRay { .. }, WeightSystem::TwoRay { .. }) => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "weight system does not match the tree family".into(),
                ))
            }
        }
        let op = Self { tree, weights };
        let window: Vec<Label> = op
            .tree
            .materialized_vertices()
            .into_iter()
            .map(Label::Vertex)
            .collect();
        let cfg = ProbeConfig {
            seed: 0x7a11_5eed,
            num_probes: 16,
            support_size: 4,
            label_window: window,
        };
        for (u, v) in random_probe_pairs(&cfg) {
            let lhs = op.apply(&u).inner(&v);
            let rhs = u.inner(&op.adjoint_apply(&v));
            let scale = 1.0 + u.norm() * v.norm() * op.bound_on(&cfg.label_window);
            if (lhs - rhs).norm() > 1e-10 * scale {
                return Err(Error::Numerical("adjoint duality check failed".into()));
            }
        }
        Ok(op)
    }

    pub fn tree(&self) -> &DirectedTree {
        &self.tree
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    /// `λ_v`, zero at the root and outside the tree.
    pub fn weight(&self, v: &VertexKey) -> Complex64 {
        if !self.tree.contains(v) || self.tree.root() == Some(*v) {
            return Complex64::new(0.0, 0.0);
        }
        self.weights.weight(v).unwrap_or_default()
    }

    /// `d(u) = Σ_{v ∈ Chi(u)} |λ_v|² = ‖S e_u‖²`.
    pub fn branch_weight_sum(&self, u: &VertexKey) -> f64 {
        self.tree
            .children(u)
            .iter()
            .fold(0.0, |acc, v| acc + self.weight(v).norm_sqr())
    }

    /// `‖Sⁿ e_u‖` from the weight products along all descending paths of
    /// length `n`.
    pub fn norm_power_on_basis(&self, u: &VertexKey, n: u32) -> f64 {
        if !self.tree.contains(u) {
            return 0.0;
        }
        let mut total = 0.0;
        let mut stack = vec![(*u, 0u32, 1.0f64)];
        while let Some((v, depth, prod)) = stack.pop() {
            if depth == n {
                total += prod;
                continue;
            }
            for w in self.tree.children(&v) {
                let p = prod * self.weight(&w).norm_sqr();
                if p != 0.0 {
                    stack.push((w, depth + 1, p));
                }
            }
        }
        total.sqrt()
    }

    /// `sup_u d(u)` over the window, which for a tree shift is `‖S‖²`
    /// restricted to the window's vertices. For the two-ray family the
    /// supremum over the whole tree is returned (the weights are eventually
    /// constant, so it is attained on the orbit representatives).
    pub fn squared_norm_bound(&self, window: &[VertexKey]) -> f64 {
        let mut reps: Vec<VertexKey> = window.to_vec();
        if let Shape::TwoRay { .. } = self.tree.shape {
            reps.extend(self.tree.orbit_window(1));
        }
        reps.iter()
            .map(|u| self.branch_weight_sum(u))
            .fold(0.0, f64::max)
    }

    fn bound_on(&self, window: &[Label]) -> f64 {
        let keys: Vec<VertexKey> = window.iter().filter_map(Label::as_vertex).collect();
        self.squared_norm_bound(&keys).sqrt()
    }

    pub fn orbit_window(&self, n: u32) -> Vec<Label> {
        self.tree
            .orbit_window(n)
            .into_iter()
            .map(Label::Vertex)
            .collect()
    }
}

impl LocalOperator for TreeShiftOp {
    fn apply(&self, f: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (l, c) in f.iter() {
            let Some(u) = l.as_vertex() else { continue };
            for v in self.tree.children(&u) {
                out.add_at(Label::Vertex(v), self.weight(&v) * c);
            }
        }
        out
    }

    fn adjoint_apply(&self, f: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (l, c) in f.iter() {
            let Some(u) = l.as_vertex() else { continue };
            if let Some(p) = self.tree.parent(&u) {
                out.add_at(Label::Vertex(p), self.weight(&u).conj() * c);
            }
        }
        out
    }

    fn descriptor(&self) -> String {
        let w = match &self.weights {
            WeightSystem::Explicit(map) => {
                let parts: Vec<String> = map
                    .iter()
                    .map(|(v, c)| format!("{v}:{}{:+}i", c.re, c.im))
                    .collect();
                parts.join(",")
            }
            WeightSystem::TwoRay { trunk, alpha, beta } => format!(
                "trunk={},alpha=({},{}),beta=({},{})",
                trunk, alpha[0], alpha[1], beta[0], beta[1]
            ),
        };
        format!("tree_shift({}; {w})", self.tree.describe())
    }

    fn natural_window(&self) -> Option<Vec<Label>> {
        self.tree.is_finite().then(|| {
            self.tree
                .materialized_vertices()
                .into_iter()
                .map(Label::Vertex)
                .collect()
        })
    }
}

pub fn tree_shift(tree: DirectedTree, weights: WeightSystem) -> Result<TreeShiftOp> {
    TreeShiftOp::new(tree, weights)
}

fn vertex_context(window: &[VertexKey], tol: &TolerancePolicy, threshold: f64) -> VerdictContext {
    VerdictContext {
        seed: None,
        window: window.iter().map(|v| Label::Vertex(*v)).collect(),
        tolerance: *tol,
        threshold,
        probes_used: window.len(),
    }
}

/// `‖S e_u‖ⁿ = ‖Sⁿ e_u‖` for every `u` in the window, which for a bounded
/// tree shift is equivalent to `(S*S)ⁿ = S*ⁿSⁿ`.
pub fn prop_ws_test(
    s: &TreeShiftOp,
    n: u32,
    window: &[VertexKey],
    tol: &TolerancePolicy,
) -> Verdict {
    if window.is_empty() {
        return Verdict::inconclusive("empty vertex window", 0.0, vertex_context(window, tol, 0.0));
    }
    // (discrepancy, ratio to its threshold, vertex, lhs, rhs)
    let mut worst: Option<(f64, f64, VertexKey, f64, f64)> = None;
    for u in window {
        let lhs = s.branch_weight_sum(u).powf(n as f64 / 2.0);
        let rhs = s.norm_power_on_basis(u, n);
        let disc = (lhs - rhs).abs();
        let thr = tol.threshold(lhs.max(rhs));
        let ratio = if thr > 0.0 {
            disc / thr
        } else if disc > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if worst.is_none_or(|w| ratio > w.1) {
            worst = Some((disc, ratio, *u, lhs, rhs));
        }
    }
    let (disc, _, u, lhs, rhs) = worst.expect("window is nonempty");
    let ctx = vertex_context(window, tol, tol.threshold(lhs.max(rhs)));
    let witness = Witness::basis(Label::Vertex(u)).with_detail(format!(
        "vertex {u}: ‖S e_u‖^{n} = {lhs:.17e}, ‖S^{n} e_u‖ = {rhs:.17e}"
    ));
    Verdict::decide(disc, Some(witness), ctx)
}

/// Quasinormality on the window through the child condition: `CC*C e_u =
/// C*CC e_u` iff `d(v) = d(u)` for every child `v` of `u` with `λ_v ≠ 0`.
/// The per-vertex discrepancy is `‖(CC*C − C*CC) e_u‖ =
/// (Σ_v |λ_v|² |d(u) − d(v)|²)^{1/2}`.
pub fn quasinormal_tree_test(
    s: &TreeShiftOp,
    window: &[VertexKey],
    tol: &TolerancePolicy,
) -> Verdict {
    let labels: Vec<Label> = window.iter().map(|v| Label::Vertex(*v)).collect();
    let scale = window_norm(s, &labels).powi(3);
    let threshold = tol.threshold(scale);
    let mut worst: Option<(f64, VertexKey, VertexKey, f64, f64)> = None;
    for u in window {
        let du = s.branch_weight_sum(u);
        let mut sum = 0.0;
        let mut edge: Option<(f64, VertexKey, f64)> = None;
        for v in s.tree().children(u) {
            let lam = s.weight(&v).norm_sqr();
            if lam == 0.0 {
                continue;
            }
            let dv = s.branch_weight_sum(&v);
            let gap = lam * (du - dv).powi(2);
            sum += gap;
            if edge.is_none_or(|e| gap > e.0) {
                edge = Some((gap, v, dv));
            }
        }
        let disc = sum.sqrt();
        if let Some((_, v, dv)) = edge {
            if worst.is_none_or(|w| disc > w.0) {
                worst = Some((disc, *u, v, du, dv));
            }
        }
    }
    let ctx = vertex_context(window, tol, threshold);
    match worst {
        None => Verdict::holds(0.0, ctx),
        Some((disc, u, v, du, dv)) => {
            let witness = Witness::basis(Label::Vertex(u)).with_detail(format!(
                "edge ({u}, {v}): d(u) = {du:.17e}, d(v) = {dv:.17e}"
            ));
            Verdict::decide(disc, Some(witness), ctx)
        }
    }
}

/// Random finite tree on `Node(0..n)`: vertex `i > 0` hangs below a uniformly
/// chosen earlier vertex. Each weight is zero with probability `zero_prob`,
/// otherwise has modulus uniform in `[0.2, 2]` and a uniform phase.
pub fn random_tree_shift<R: rand::Rng + ?Sized>(
    rng: &mut R,
    n: u32,
    zero_prob: f64,
) -> TreeShiftOp {
    let n = n.max(1);
    let vertices: Vec<u32> = (0..n).collect();
    let edges: Vec<(u32, u32)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    let tree = DirectedTree::from_edges(&vertices, &edges).expect("valid random tree");
    let weights = (1..n)
        .map(|i| {
            let w = if rng.random::<f64>() < zero_prob {
                Complex64::new(0.0, 0.0)
            } else {
                let r = rng.random_range(0.2..2.0);
                Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
            };
            (VertexKey::Node(i), w)
        })
        .collect();
    TreeShiftOp::new(tree, WeightSystem::Explicit(weights)).expect("weights cover V°")
}
