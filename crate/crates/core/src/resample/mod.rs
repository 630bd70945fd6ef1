//! Resampling a wired forest inside a ball.
//!
//! Given the restriction `F` of a wired spanning forest to a vertex set
//! `B`, let `K` be the subgraph of `G[B]` keeping the edges whose endpoints
//! lie in one component of `F`. Conditioned on `K`, `F` is uniform among
//! the spanning forests of `K` that connect each of its components. On a
//! finite graph the free spanning forest of `K` is exactly this
//! component-wise uniform spanning tree, which is what
//! [`usf_on_components`] samples.

use rand::Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::graph::{
    induced_mask, Budget, ComponentMap, Graph, InducedComponentGraph, LatticeBox, LatticeBoxSpec,
    Topology, UnionFind,
};
use crate::rng::{par_replicas_with, RngStream};
use crate::stats::{
    chi_square_two_sample_with, tv_bootstrap, ChiSquareTest, TvBootstrap, DEFAULT_ALPHA,
    MIN_EXPECTED,
};
use crate::wilson::{
    enumerate_spanning_trees, spanning_tree_count, wilson_forest, EnumerationLimits,
    SpanningForest, WilsonSampler,
};

/// Independent uniform spanning tree on every component of `k`.
pub fn usf_on_components<T: Topology + ?Sized, R: Rng + ?Sized>(
    k: &InducedComponentGraph<'_, T>,
    rng: &mut R,
) -> Result<SpanningForest> {
    let g = k.base;
    let n = g.vertex_count();
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    for e in 0..g.edge_id_bound() {
        if k.contains_edge(e) {
            if let Some(uv) = g.endpoints(e) {
                ids.push(e);
                edges.push(uv);
            }
        }
    }
    let unlabeled: Vec<usize> = (0..n)
        .filter(|&v| k.components.label(v).is_none())
        .collect();
    if unlabeled.len() > 1 {
        return Err(Error::contract(
            "at most one vertex may lie outside every component",
        ));
    }
    let local = Graph::from_edges(n, &edges, None)?;
    let mut roots: Vec<usize> = k.components.groups().iter().map(|c| c[0]).collect();
    roots.extend(&unlabeled);
    let order: Vec<usize> = (0..n).collect();
    let f = wilson_forest(&local, &roots, &order, rng)?;
    let parents: Vec<Option<(usize, usize)>> = (0..n)
        .map(|v| Some((f.parent(v)?, ids[f.parent_edge(v)?])))
        .collect();
    SpanningForest::from_parents(g, &parents, unlabeled.first().copied())
}

/// One `K`-group of the exact test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionalGroup {
    /// Edge ids of `K`, sorted.
    pub k_edges: Vec<usize>,
    /// For every ball vertex (in sorted order) the smallest ball vertex of
    /// its component.
    pub partition: Vec<usize>,
    /// Number of spanning trees of `G` in the group.
    pub trees: u64,
    /// Component-connected spanning forests of `K`: the product of the
    /// component tree counts.
    pub support: u64,
    /// Observed restrictions with the number of trees extending each.
    pub forests: Vec<(Vec<usize>, u64)>,
}

impl ConditionalGroup {
    pub fn counts_equal(&self) -> bool {
        self.forests.windows(2).all(|w| w[0].1 == w[1].1)
    }

    pub fn fully_supported(&self) -> bool {
        self.forests.len() as u64 == self.support
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactConditionalReport {
    pub ball: Vec<usize>,
    pub trees: u64,
    pub groups: Vec<ConditionalGroup>,
}

impl ExactConditionalReport {
    /// Every group has exactly equal counts over its whole support.
    pub fn passes(&self) -> bool {
        self.groups
            .iter()
            .all(|g| g.counts_equal() && g.fully_supported())
    }
}

/// Edge cap of the exact test (a wired 3×3 box has 24 edges).
pub const EXACT_TEST_MAX_EDGES: usize = 24;

pub fn exact_conditional_test(g: &Graph, ball: &[usize]) -> Result<ExactConditionalReport> {
    exact_conditional_test_with(
        g,
        ball,
        &EnumerationLimits {
            max_edges: EXACT_TEST_MAX_EDGES,
            ..Default::default()
        },
    )
}

/// Enumerates every spanning tree of `g`, restricts it to `ball`, groups
/// the restrictions by their `K` and counts how many trees extend each
/// restriction.
pub fn exact_conditional_test_with(
    g: &Graph,
    ball: &[usize],
    limits: &EnumerationLimits,
) -> Result<ExactConditionalReport> {
    let n = g.vertex_count();
    let mut ball: Vec<usize> = ball.to_vec();
    ball.sort_unstable();
    ball.dedup();
    if ball.is_empty() || ball.iter().any(|&v| v >= n) {
        return Err(Error::domain(
            "ball must be a nonempty set of vertices of the graph",
        ));
    }
    let mut in_ball = vec![false; n];
    for &v in &ball {
        in_ball[v] = true;
    }
    let ball_edges: Vec<usize> = (0..g.edge_count())
        .filter(|&e| {
            let (u, v) = g.edge(e);
            in_ball[u] && in_ball[v]
        })
        .collect();
    let trees = enumerate_spanning_trees(g, limits)?;
    let mut table: FxHashMap<(Vec<usize>, Vec<usize>), FxHashMap<Vec<usize>, u64>> =
        FxHashMap::default();
    for tree in &trees {
        let restricted: Vec<usize> = tree
            .iter()
            .copied()
            .filter(|&e| {
                let (u, v) = g.edge(e);
                in_ball[u] && in_ball[v]
            })
            .collect();
        let mut uf = UnionFind::new(n);
        for &e in &restricted {
            let (u, v) = g.edge(e);
            uf.union(u, v);
        }
        let mut smallest: FxHashMap<usize, usize> = FxHashMap::default();
        for &v in &ball {
            smallest.entry(uf.find(v)).or_insert(v);
        }
        let partition: Vec<usize> = ball.iter().map(|&v| smallest[&uf.find(v)]).collect();
        let k_edges: Vec<usize> = ball_edges
            .iter()
            .copied()
            .filter(|&e| {
                let (u, v) = g.edge(e);
                uf.same(u, v)
            })
            .collect();
        *table
            .entry((k_edges, partition))
            .or_default()
            .entry(restricted)
            .or_insert(0) += 1;
    }
    let mut groups = Vec::with_capacity(table.len());
    for ((k_edges, partition), forests) in table {
        let mut parts: FxHashMap<usize, Vec<usize>> = FxHashMap::default();
        for (i, &rep) in partition.iter().enumerate() {
            parts.entry(rep).or_default().push(ball[i]);
        }
        let mut support = 1u64;
        for part in parts.values() {
            let (sub, _) = g.induced_subgraph(part);
            let count = spanning_tree_count(&sub)?;
            support = u64::try_from(count)
                .map_err(|_| Error::resource("forest support", u128::MAX, u64::MAX as u128))?
                .checked_mul(support)
                .ok_or_else(|| Error::resource("forest support", u128::MAX, u64::MAX as u128))?;
        }
        let mut forests: Vec<(Vec<usize>, u64)> = forests.into_iter().collect();
        forests.sort_unstable();
        groups.push(ConditionalGroup {
            trees: forests.iter().map(|f| f.1).sum(),
            k_edges,
            partition,
            support,
            forests,
        });
    }
    groups.sort_unstable_by(|a, b| (&a.k_edges, &a.partition).cmp(&(&b.k_edges, &b.partition)));
    Ok(ExactConditionalReport {
        ball,
        trees: trees.len() as u64,
        groups,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticalOptions {
    pub bootstrap_resamples: usize,
    pub level: f64,
    pub min_expected: f64,
    /// Below this share of the samples in unpooled chi-square cells the
    /// comparison falls back to edge marginals.
    pub dense_mass: f64,
    pub alpha: f64,
    pub budget: Budget,
}

impl Default for StatisticalOptions {
    fn default() -> Self {
        Self {
            bootstrap_resamples: 1000,
            level: 0.999,
            min_expected: MIN_EXPECTED,
            dense_mass: 0.5,
            alpha: DEFAULT_ALPHA,
            budget: Budget::default(),
        }
    }
}

/// Frequency of one restricted edge set in both pipelines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResampleCell {
    pub edges: Vec<usize>,
    pub direct: u64,
    pub resampled: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeMarginal {
    pub edge: usize,
    pub direct: f64,
    pub resampled: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatisticalReport {
    pub dim: usize,
    pub radius: usize,
    pub ball_radius: usize,
    pub replicas: u64,
    pub ball_vertices: usize,
    pub ball_edges: usize,
    pub cells: Vec<ResampleCell>,
    pub chi_square: ChiSquareTest,
    pub tv: TvBootstrap,
    /// Share of samples in cells the chi-square test keeps unpooled.
    pub dense_mass: f64,
    /// The full-law comparison was too sparse; the verdict rests on edge
    /// marginals.
    pub coarsened: bool,
    pub marginals: Vec<EdgeMarginal>,
    pub marginal_threshold: f64,
    /// Resampled forests whose component partition differs from that of
    /// the forest they were resampled from (must be zero).
    pub partition_mismatches: u64,
}

impl StatisticalReport {
    pub fn marginals_agree(&self) -> bool {
        self.marginals
            .iter()
            .all(|m| m.z.abs() <= self.marginal_threshold)
    }

    /// TV within the bootstrap quantile (edge marginals when coarsened)
    /// and no partition mismatch.
    pub fn passes(&self) -> bool {
        self.partition_mismatches == 0
            && if self.coarsened {
                self.marginals_agree()
            } else {
                self.tv.within_null()
            }
    }
}

struct Ball {
    vertices: Vec<usize>,
    local: FxHashMap<usize, usize>,
    /// `G[B]` on local ids.
    graph: Graph,
    /// Host id of each local edge.
    edge_ids: Vec<usize>,
    edge_local: FxHashMap<usize, usize>,
}

impl Ball {
    fn new(lb: &LatticeBox, radius: usize) -> Result<Self> {
        let vertices = ball_vertices(lb, radius);
        let local: FxHashMap<usize, usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        let mut edge_ids = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for slot in 0..lb.degree(u) {
                let (w, e) = lb.incident(u, slot);
                if let Some(&k) = local.get(&w) {
                    if i < k {
                        edges.push((i, k));
                        edge_ids.push(e);
                    }
                }
            }
        }
        let graph = Graph::from_edges(vertices.len(), &edges, None)?;
        let edge_local = edge_ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Ok(Self {
            vertices,
            local,
            graph,
            edge_ids,
            edge_local,
        })
    }

    fn words(&self) -> usize {
        self.edge_ids.len().div_ceil(64).max(1)
    }

    fn encode(&self, local_edges: impl Iterator<Item = usize>) -> Box<[u64]> {
        let mut key = vec![0u64; self.words()];
        for e in local_edges {
            key[e / 64] |= 1 << (e % 64);
        }
        key.into_boxed_slice()
    }

    /// Local edge ids of `WSF ∩ B` from a sampler in which every ball vertex
    /// is attached: inside the ball, forest edges are exactly parent edges
    /// between ball vertices.
    fn restriction(&self, sampler: &WilsonSampler) -> Vec<usize> {
        self.vertices
            .iter()
            .filter_map(|&v| {
                let (p, e) = sampler.parent(v)?;
                self.local.contains_key(&p).then(|| self.edge_local[&e])
            })
            .collect()
    }

    fn partition(&self, local_edges: &[usize]) -> ComponentMap {
        let mut uf = UnionFind::new(self.vertices.len());
        for &e in local_edges {
            let (u, v) = self.graph.edge(e);
            uf.union(u, v);
        }
        ComponentMap::from_union_find(&mut uf, None)
    }
}

/// Box vertices within graph distance `radius` of the origin (not passing
/// through the wired vertex), sorted.
pub fn ball_vertices(lb: &LatticeBox, radius: usize) -> Vec<usize> {
    let mut dist: FxHashMap<usize, usize> = FxHashMap::default();
    dist.insert(lb.origin(), 0);
    let mut frontier = vec![lb.origin()];
    let wired = lb.wired();
    for step in 1..=radius {
        let mut next = Vec::new();
        for &u in &frontier {
            for slot in 0..lb.degree(u) {
                let (w, _) = lb.incident(u, slot);
                if Some(w) != wired && !dist.contains_key(&w) {
                    dist.insert(w, step);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<usize> = dist.into_keys().collect();
    out.sort_unstable();
    out
}

/// Compares the law of `WSF ∩ B` (pipeline A) with the law obtained by
/// resampling a uniform spanning forest of `K` (pipeline B), each from its
/// own substream. `B` is the graph ball of radius `ball_radius` around the
/// origin. Only the ball vertices are attached, which already determines
/// `WSF ∩ B`.
pub fn statistical_resample_test(
    spec: LatticeBoxSpec,
    ball_radius: usize,
    replicas: u64,
    stream: &RngStream,
    opts: &StatisticalOptions,
) -> Result<StatisticalReport> {
    if !matches!(spec.boundary, crate::graph::Boundary::Wired) {
        return Err(Error::domain("the resampling test needs a wired box"));
    }
    if ball_radius >= spec.radius {
        return Err(Error::domain(format!(
            "ball radius {ball_radius} must be smaller than the box radius {}",
            spec.radius
        )));
    }
    if replicas == 0 {
        return Err(Error::domain("replicas must be positive"));
    }
    let lb = LatticeBox::new(spec, &opts.budget)?;
    let ball = Ball::new(&lb, ball_radius)?;
    let w = lb.wired().expect("wired box");
    let n = lb.vertex_count();
    let attach_ball = |sampler: &mut WilsonSampler, rng: &mut rand_chacha::ChaCha8Rng| {
        sampler.reset(&[w]);
        for &v in &ball.vertices {
            sampler.attach(&lb, v, rng);
        }
    };
    let direct = par_replicas_with(
        replicas,
        &stream.substream(0),
        || WilsonSampler::new(n),
        |sampler, _, rng| {
            attach_ball(sampler, rng);
            ball.encode(ball.restriction(sampler).into_iter())
        },
    );
    let resampled: Vec<Result<(Box<[u64]>, bool)>> = par_replicas_with(
        replicas,
        &stream.substream(1),
        || WilsonSampler::new(n),
        |sampler, _, rng| {
            attach_ball(sampler, rng);
            let edges = ball.restriction(sampler);
            let components = ball.partition(&edges);
            let k = InducedComponentGraph {
                base: &ball.graph,
                edge_mask: induced_mask(&ball.graph, &components),
                components,
            };
            let f = usf_on_components(&k, rng)?;
            let same = f.components() == &k.components;
            let key = ball.encode((0..ball.vertices.len()).filter_map(|v| f.parent_edge(v)));
            Ok((key, same))
        },
    );
    let mut table: FxHashMap<Box<[u64]>, (u64, u64)> = FxHashMap::default();
    for key in direct {
        table.entry(key).or_default().0 += 1;
    }
    let mut partition_mismatches = 0;
    for r in resampled {
        let (key, same) = r?;
        partition_mismatches += u64::from(!same);
        table.entry(key).or_default().1 += 1;
    }
    let mut rows: Vec<(Box<[u64]>, (u64, u64))> = table.into_iter().collect();
    rows.sort_unstable();
    let a: Vec<u64> = rows.iter().map(|r| r.1 .0).collect();
    let b: Vec<u64> = rows.iter().map(|r| r.1 .1).collect();
    let chi_square = chi_square_two_sample_with(&a, &b, opts.min_expected);
    let dense: u64 = a
        .iter()
        .zip(&b)
        .filter(|&(&x, &y)| (x + y) as f64 * 0.5 >= opts.min_expected)
        .map(|(&x, &y)| x + y)
        .sum();
    let dense_mass = dense as f64 / (2 * replicas) as f64;
    let mut boot_rng = stream.substream(2).rng();
    let tv = tv_bootstrap(&a, &b, opts.bootstrap_resamples, opts.level, &mut boot_rng);

    let m = ball.edge_ids.len();
    let mut freq = vec![(0u64, 0u64); m];
    for (key, (x, y)) in &rows {
        for (e, f) in freq.iter_mut().enumerate() {
            if key[e / 64] >> (e % 64) & 1 == 1 {
                f.0 += x;
                f.1 += y;
            }
        }
    }
    let nf = replicas as f64;
    let marginals = freq
        .iter()
        .enumerate()
        .map(|(e, &(x, y))| {
            let (pa, pb) = (x as f64 / nf, y as f64 / nf);
            let pooled = (x + y) as f64 / (2.0 * nf);
            let se = (pooled * (1.0 - pooled) * 2.0 / nf).sqrt();
            let z = if se > 0.0 { (pa - pb) / se } else { 0.0 };
            EdgeMarginal {
                edge: ball.edge_ids[e],
                direct: pa,
                resampled: pb,
                z,
            }
        })
        .collect();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let marginal_threshold = normal.inverse_cdf(1.0 - opts.alpha / (2.0 * m.max(1) as f64));
    let cells = rows
        .iter()
        .map(|(key, (x, y))| ResampleCell {
            edges: (0..m)
                .filter(|&e| key[e / 64] >> (e % 64) & 1 == 1)
                .map(|e| ball.edge_ids[e])
                .collect(),
            direct: *x,
            resampled: *y,
        })
        .collect();
    Ok(StatisticalReport {
        dim: spec.dim,
        radius: spec.radius,
        ball_radius,
        replicas,
        ball_vertices: ball.vertices.len(),
        ball_edges: m,
        cells,
        chi_square,
        tv,
        dense_mass,
        coarsened: dense_mass < opts.dense_mass,
        marginals,
        marginal_threshold,
        partition_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_lattice_box, induced_component_graph, named};
    use std::collections::BTreeMap;

    #[test]
    fn tree_is_its_own_resample() {
        let g = named::path(5);
        let f = SpanningForest::from_edge_set(&g, &[0, 1, 2, 3], None).unwrap();
        let k = induced_component_graph(&g, &f).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let out = usf_on_components(&k, &mut rng).unwrap();
        assert_eq!(out.edge_ids(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_triangles_give_nine_forests() {
        let g =
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], None).unwrap();
        let f = SpanningForest::from_edge_set(&g, &[0, 1, 3, 4], None).unwrap();
        let k = induced_component_graph(&g, &f).unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for _ in 0..9000 {
            let out = usf_on_components(&k, &mut rng).unwrap();
            assert_eq!(out.components(), &k.components);
            assert!(out.edge_ids().iter().all(|&e| k.contains_edge(e)));
            *counts.entry(out.edge_ids()).or_default() += 1;
        }
        assert_eq!(counts.len(), 9);
        let obs: Vec<u64> = counts.values().copied().collect();
        assert!(crate::stats::chi_square_gof(&obs, &[1.0 / 9.0; 9]).passes(DEFAULT_ALPHA));
    }

    #[test]
    fn exact_on_the_wired_segment() {
        let g = build_lattice_box(LatticeBoxSpec::wired(1, 1), &Budget::default()).unwrap();
        let report = exact_conditional_test(&g, &[0, 1, 2]).unwrap();
        assert_eq!(report.trees, 4);
        assert!(report.passes());
        let total: u64 = report.groups.iter().map(|g| g.trees).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn exact_on_a_square_with_pendant() {
        // 4-cycle 0..3 plus vertex 4 hanging from 0 and 2
        let g =
            Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (2, 4)], None).unwrap();
        let report = exact_conditional_test(&g, &[0, 1, 2, 3]).unwrap();
        assert!(report.passes());
        assert!(report.groups.iter().any(|g| g.support > 1));
    }

    #[test]
    fn statistical_on_the_line() {
        let stream = RngStream::new(3, 0);
        let report = statistical_resample_test(
            LatticeBoxSpec::wired(1, 8),
            2,
            20_000,
            &stream,
            &StatisticalOptions::default(),
        )
        .unwrap();
        assert_eq!(report.ball_vertices, 5);
        assert_eq!(report.partition_mismatches, 0);
        assert!(report.passes(), "{:?}", report.tv);
    }

    #[test]
    fn statistical_small_box() {
        let stream = RngStream::new(4, 0);
        let report = statistical_resample_test(
            LatticeBoxSpec::wired(3, 4),
            1,
            20_000,
            &stream,
            &StatisticalOptions::default(),
        )
        .unwrap();
        assert_eq!(report.ball_vertices, 7);
        assert_eq!(report.ball_edges, 6);
        assert!(!report.coarsened);
        assert!(report.passes());
        assert!(report.marginals_agree());
    }

    #[test]
    fn statistical_rejects_large_balls() {
        let stream = RngStream::new(4, 0);
        assert!(statistical_resample_test(
            LatticeBoxSpec::wired(3, 2),
            2,
            10,
            &stream,
            &StatisticalOptions::default()
        )
        .is_err());
    }
}
