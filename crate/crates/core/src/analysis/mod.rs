//! Rays, bushes and the edges joining them.
//!
//! In a forest whose trees are rooted next to the (deleted) wired vertex, the
//! tree path from `v` to its root stands in for the one-ended ray of `v`.
//! `Bush_n` is the set of vertices whose path toward the root first meets
//! the ray at `Ray(n)`.

mod growth;

pub use growth::{
    component_graph, fit_envelope, inter_component_joins, origin_profile, recurrence_diagnostic,
    resistance_growth_profile, ComponentGraph, EnvelopeFit, EnvelopePoint, GrowthRow,
    RecurrenceOptions, RecurrenceRow,
};

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::walk::Path;
use crate::wilson::{SpanningForest, TwoSidedWsfSample};

/// Fraction of the ray dropped at the root end by default.
pub const DEFAULT_RAY_DROP: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct RayDecomposition {
    /// `ray.vertices[n] = Ray(n)`; the last vertex is the tree root.
    pub ray: Path,
    /// Largest ray index whose bush is reported.
    pub truncation: usize,
    bush: FxHashMap<usize, usize>,
}

impl RayDecomposition {
    pub fn ray_len(&self) -> usize {
        self.ray.vertices.len()
    }

    pub fn ray_vertex(&self, n: usize) -> usize {
        self.ray.vertices[n]
    }

    /// Bush index of `u`, or `None` outside the tree.
    pub fn bush_index(&self, u: usize) -> Option<usize> {
        self.bush.get(&u).copied()
    }

    /// Vertices of the tree, unordered.
    pub fn tree_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bush.keys().copied()
    }

    pub fn tree_size(&self) -> usize {
        self.bush.len()
    }

    /// Every bush along the full ray, each sorted.
    pub fn bushes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.ray_len()];
        for (&u, &b) in &self.bush {
            out[b].push(u);
        }
        for b in &mut out {
            b.sort_unstable();
        }
        out
    }
}

/// Labels every vertex of the tree containing `trunk` by the position of
/// the first trunk vertex on its path to the root. The trunk must end at
/// the root.
fn label_by_trunk(forest: &SpanningForest, trunk: &[usize]) -> FxHashMap<usize, usize> {
    let mut label = FxHashMap::default();
    for (i, &t) in trunk.iter().enumerate() {
        label.insert(t, i);
    }
    let comp = forest.components();
    let c = comp.label(trunk[0]).expect("trunk lies in the forest");
    let mut stack = Vec::new();
    for u in comp.members(c) {
        let mut x = u;
        while !label.contains_key(&x) {
            stack.push(x);
            x = forest.parent(x).expect("path reaches the trunk");
        }
        let b = label[&x];
        for y in stack.drain(..) {
            label.insert(y, b);
        }
    }
    label
}

pub fn ray_decompose(forest: &SpanningForest, v: usize) -> Result<RayDecomposition> {
    ray_decompose_with(forest, v, DEFAULT_RAY_DROP)
}

/// Ray of `v` with the last `drop` fraction of indices left unreported
/// (at least index 0 is always kept).
pub fn ray_decompose_with(
    forest: &SpanningForest,
    v: usize,
    drop: f64,
) -> Result<RayDecomposition> {
    if v >= forest.vertex_count() || Some(v) == forest.absent() {
        return Err(Error::contract(format!("vertex {v} is not in the forest")));
    }
    if !(0.0..1.0).contains(&drop) {
        return Err(Error::contract(format!(
            "ray drop fraction {drop} outside [0, 1)"
        )));
    }
    let vertices = forest.path_to_root(v);
    let len = vertices.len();
    let keep = (len - (drop * len as f64).ceil() as usize).max(1);
    let bush = label_by_trunk(forest, &vertices);
    Ok(RayDecomposition {
        ray: Path {
            vertices,
            origin_offset: 0,
        },
        truncation: keep - 1,
        bush,
    })
}

/// An edge of the host graph joining `Bush_low` and `Bush_high`, `low < high`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct JoinEdge {
    pub low: usize,
    pub high: usize,
    pub edge: usize,
}

impl JoinEdge {
    /// `j(e)`: the number of cut sets containing the edge.
    pub fn span(&self) -> usize {
        self.high - self.low
    }
}

/// All host edges joining two distinct bushes (ray edges included), sorted.
pub fn bush_joins<T: Topology + ?Sized>(g: &T, d: &RayDecomposition) -> Vec<JoinEdge> {
    let mut out = Vec::new();
    for (&u, &a) in &d.bush {
        for slot in 0..g.degree(u) {
            let (w, e) = g.incident(u, slot);
            if let Some(&b) = d.bush.get(&w) {
                if a < b {
                    out.push(JoinEdge {
                        low: a,
                        high: b,
                        edge: e,
                    });
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// `N_{j,l}` at a fixed `n`: edges joining `Bush_{n-j}` and `Bush_{n+l}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinCounts {
    pub n: usize,
    pub counts: BTreeMap<(usize, usize), u64>,
}

impl JoinCounts {
    pub fn get(&self, j: usize, l: usize) -> u64 {
        self.counts.get(&(j, l)).copied().unwrap_or(0)
    }

    /// `Σ_{j ≤ n} Σ_{l ≥ m} N_{j,l}`.
    pub fn tail_sum(&self, m: usize) -> u64 {
        self.counts
            .iter()
            .filter(|(&(_, l), _)| l >= m)
            .map(|(_, &c)| c)
            .sum()
    }
}

pub fn join_counts<T: Topology + ?Sized>(
    g: &T,
    d: &RayDecomposition,
    n: usize,
) -> Result<JoinCounts> {
    if n >= d.ray_len() {
        return Err(Error::contract(format!(
            "index {n} beyond the ray (length {})",
            d.ray_len()
        )));
    }
    Ok(join_counts_from(&bush_joins(g, d), n))
}

pub fn join_counts_from(joins: &[JoinEdge], n: usize) -> JoinCounts {
    let mut counts = BTreeMap::new();
    for j in joins {
        if j.low <= n && j.high > n {
            *counts.entry((n - j.low, j.high - n)).or_insert(0) += 1;
        }
    }
    JoinCounts { n, counts }
}

/// `Σ_{j ≤ n} Σ_{l ≥ m} N_{j,l}` straight from the join list.
pub fn tail_sum(joins: &[JoinEdge], n: usize, m: usize) -> u64 {
    joins
        .iter()
        .filter(|j| j.low <= n && j.high >= n + m)
        .count() as u64
}

/// Cut sets `C_k` (edges joining `∪_{i≤k} Bush_i` and `∪_{i>k} Bush_i`)
/// and `J_k = Σ_{e ∈ C_k} j(e)` for `k` below the truncation index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutSets {
    pub joins: Vec<JoinEdge>,
    /// `#C_k`.
    pub sizes: Vec<u64>,
    /// `J_k`.
    pub weights: Vec<u64>,
}

impl CutSets {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Edge ids of `C_k`, sorted.
    pub fn cut_set(&self, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .joins
            .iter()
            .filter(|j| j.low <= k && k < j.high)
            .map(|j| j.edge)
            .collect();
        out.sort_unstable();
        out
    }

    /// `Σ_{k<n} J_k^{-1}` for `n = 0..=len`.
    pub fn lower_bounds(&self) -> Vec<f64> {
        partial_inverse_sums(&self.weights)
    }

    /// `Σ_{k<n} (#C_k)^{-1}` for `n = 0..=len`.
    pub fn inverse_size_sums(&self) -> Vec<f64> {
        partial_inverse_sums(&self.sizes)
    }
}

fn partial_inverse_sums(xs: &[u64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for &x in xs {
        acc += 1.0 / x as f64;
        out.push(acc);
    }
    out
}

pub fn cut_sets_and_j<T: Topology + ?Sized>(g: &T, d: &RayDecomposition) -> CutSets {
    cut_sets_from(bush_joins(g, d), d.truncation)
}

/// Cut sets `C_0..C_{count-1}` from a join list.
pub fn cut_sets_from(joins: Vec<JoinEdge>, count: usize) -> CutSets {
    let mut size_diff = vec![0i64; count + 1];
    let mut weight_diff = vec![0i64; count + 1];
    for j in &joins {
        let lo = j.low.min(count);
        let hi = j.high.min(count);
        size_diff[lo] += 1;
        size_diff[hi] -= 1;
        weight_diff[lo] += j.span() as i64;
        weight_diff[hi] -= j.span() as i64;
    }
    let prefix = |diff: &[i64]| -> Vec<u64> {
        let mut acc = 0i64;
        diff[..count]
            .iter()
            .map(|&x| {
                acc += x;
                acc as u64
            })
            .collect()
    };
    CutSets {
        sizes: prefix(&size_diff),
        weights: prefix(&weight_diff),
        joins,
    }
}

/// Comparison of one-sided cut sets of the origin's tree with those of the
/// two-sided tree of a coupled sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoSidedCutCheck {
    pub checked: usize,
    /// Indices `k` where `C_k ⊄ C̃_k` or `J_k > J̃_k`.
    pub violations: Vec<usize>,
}

/// For a coupled two-sided sample, rebuilds the origin's one-sided tree (the
/// forest without the added origin edge) and checks `C_k ⊆ C̃_k` and
/// `J_k ≤ J̃_k` for every `k ≥ 0` below the one-sided ray end.
pub fn two_sided_cut_check<T: Topology + ?Sized>(
    g: &T,
    s: &TwoSidedWsfSample,
) -> Result<TwoSidedCutCheck> {
    let (o, v, _) = s
        .origin_edge
        .ok_or_else(|| Error::contract("sample does not come from the coupled construction"))?;
    let trunk = &s.trunk.vertices;
    let offset = s.trunk.origin_offset;
    if trunk.get(offset) != Some(&o) || offset == 0 || trunk[offset - 1] != v {
        return Err(Error::contract(
            "trunk does not pass through the origin edge",
        ));
    }
    // two-sided bushes, shifted so that the origin has index `offset`
    let two = label_by_trunk(&s.forest, trunk);
    let mut two_joins = Vec::new();
    for (&u, &a) in &two {
        for slot in 0..g.degree(u) {
            let (w, e) = g.incident(u, slot);
            if let Some(&b) = two.get(&w) {
                if a < b {
                    two_joins.push(JoinEdge {
                        low: a,
                        high: b,
                        edge: e,
                    });
                }
            }
        }
    }
    // one-sided: the tree of `o` after deleting the edge (o, v), whose
    // vertices are exactly those that first meet the trunk at or after `o`
    let one: FxHashMap<usize, usize> = two
        .iter()
        .filter(|(_, &b)| b >= offset)
        .map(|(&u, &b)| (u, b - offset))
        .collect();
    let mut one_joins = Vec::new();
    for (&u, &a) in &one {
        for slot in 0..g.degree(u) {
            let (w, e) = g.incident(u, slot);
            if let Some(&b) = one.get(&w) {
                if a < b {
                    one_joins.push(JoinEdge {
                        low: a,
                        high: b,
                        edge: e,
                    });
                }
            }
        }
    }
    let count = trunk.len() - offset - 1;
    let c_one = cut_sets_from(one_joins, count);
    let mut violations = Vec::new();
    for k in 0..count {
        let kk = k + offset;
        let mut tilde: Vec<usize> = two_joins
            .iter()
            .filter(|j| j.low <= kk && kk < j.high)
            .map(|j| j.edge)
            .collect();
        tilde.sort_unstable();
        let tilde_j: u64 = two_joins
            .iter()
            .filter(|j| j.low <= kk && kk < j.high)
            .map(|j| j.span() as u64)
            .sum();
        let subset = c_one
            .cut_set(k)
            .iter()
            .all(|e| tilde.binary_search(e).is_ok());
        if !subset || c_one.weights[k] > tilde_j {
            violations.push(k);
        }
    }
    Ok(TwoSidedCutCheck {
        checked: count,
        violations,
    })
}
