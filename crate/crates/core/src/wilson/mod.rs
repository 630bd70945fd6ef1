//! Uniform spanning trees and wired spanning forests via Wilson's algorithm.
//!
//! The sampler keeps one successor slot per vertex (the last exit of the
//! current walk). A branch is grown by walking from a start vertex,
//! overwriting successors, until the current tree is hit; retracing the
//! successor pointers from the start then yields exactly the loop erasure of
//! the walk, so loops are popped without ever storing the path.

mod enumerate;
mod forest;
mod two_sided;

pub use enumerate::{enumerate_spanning_trees, spanning_tree_count, EnumerationLimits};
pub use forest::{parse_forest, write_forest, SpanningForest};
pub use two_sided::{
    coupled_two_sided_wsf, two_sided_wsf, TrunkSource, TwoSidedConfig, TwoSidedWsfSample,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Budget, ComponentMap, Graph, LatticeBox, LatticeBoxSpec, Topology};

const NONE: u32 = u32::MAX;

/// Reusable buffers for Wilson's algorithm on one topology.
///
/// Only vertices touched since the last reset are cleared, so sampling a
/// few branches in a huge box costs time proportional to the branches.
#[derive(Debug, Clone)]
pub struct WilsonSampler {
    in_tree: Vec<bool>,
    next_slot: Vec<u32>,
    parent: Vec<u32>,
    parent_edge: Vec<u32>,
    touched: Vec<u32>,
}

impl WilsonSampler {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            in_tree: vec![false; vertex_count],
            next_slot: vec![NONE; vertex_count],
            parent: vec![NONE; vertex_count],
            parent_edge: vec![NONE; vertex_count],
            touched: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.in_tree.len()
    }

    /// Clears all state and declares `roots` part of the tree.
    pub fn reset(&mut self, roots: &[usize]) {
        for &v in &self.touched {
            let v = v as usize;
            self.in_tree[v] = false;
            self.parent[v] = NONE;
            self.parent_edge[v] = NONE;
        }
        self.touched.clear();
        for &r in roots {
            if !self.in_tree[r] {
                self.in_tree[r] = true;
                self.touched.push(r as u32);
            }
        }
    }

    /// Vertices in the tree, in the order they joined (roots first).
    pub fn tree_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.touched.iter().map(|&v| v as usize)
    }

    #[inline]
    pub fn in_tree(&self, v: usize) -> bool {
        self.in_tree[v]
    }

    /// Parent vertex and edge of `v`, if `v` joined the tree through a branch.
    #[inline]
    pub fn parent(&self, v: usize) -> Option<(usize, usize)> {
        let p = self.parent[v];
        (p != NONE).then(|| (p as usize, self.parent_edge[v] as usize))
    }

    /// Runs a loop-erased walk from `start` until it hits the current tree and
    /// adds the branch. The graph must connect `start` to the tree.
    pub fn attach<T: Topology + ?Sized, R: Rng + ?Sized>(
        &mut self,
        g: &T,
        start: usize,
        rng: &mut R,
    ) {
        let mut x = start;
        while !self.in_tree[x] {
            let deg = g.degree(x) as u32;
            let slot = rng.random_range(0..deg);
            self.next_slot[x] = slot;
            x = g.step(x, slot as usize);
        }
        let mut x = start;
        while !self.in_tree[x] {
            self.in_tree[x] = true;
            self.touched.push(x as u32);
            let (y, e) = g.incident(x, self.next_slot[x] as usize);
            self.parent[x] = y as u32;
            self.parent_edge[x] = e as u32;
            x = y;
        }
    }

    /// Adds a simple path as a branch rooted at `path[0]`, which must
    /// already be in the tree. Consecutive vertices must be adjacent.
    pub fn graft_path<T: Topology + ?Sized>(&mut self, g: &T, path: &[usize]) -> Result<()> {
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let slot = (0..g.degree(b))
                .find(|&s| g.step(b, s) == a)
                .ok_or_else(|| Error::contract(format!("path step {a} -> {b} is not an edge")))?;
            if self.in_tree[b] {
                return Err(Error::contract(format!("path revisits tree vertex {b}")));
            }
            self.in_tree[b] = true;
            self.touched.push(b as u32);
            self.parent[b] = a as u32;
            self.parent_edge[b] = g.incident(b, slot).1 as u32;
        }
        Ok(())
    }

    /// Freezes the current state. Vertices that are parented to `absent`
    /// become roots; `absent` itself belongs to no component.
    pub fn to_forest(&self, absent: Option<usize>) -> Result<SpanningForest> {
        let n = self.in_tree.len();
        if let Some(v) = (0..n).find(|&v| !self.in_tree[v] && Some(v) != absent) {
            return Err(Error::contract(format!("vertex {v} was never attached")));
        }
        let absent32 = absent.map_or(NONE, |a| a as u32);
        let mut parent = self.parent.clone();
        let mut parent_edge = self.parent_edge.clone();
        for v in 0..n {
            if parent[v] == absent32 || Some(v) == absent {
                parent[v] = NONE;
                parent_edge[v] = NONE;
            }
        }
        Ok(SpanningForest::from_raw(parent, parent_edge, absent))
    }

    /// One wired spanning forest of a topology with a wired vertex: Wilson
    /// rooted at the wired vertex, then the wired vertex is deleted.
    pub fn sample_wsf<T: Topology + ?Sized, R: Rng + ?Sized>(
        &mut self,
        g: &T,
        rng: &mut R,
    ) -> Result<SpanningForest> {
        let w = g
            .wired_vertex()
            .ok_or_else(|| Error::domain("wired spanning forest needs a wired vertex"))?;
        self.reset(&[w]);
        for v in 0..g.vertex_count() {
            self.attach(g, v, rng);
        }
        self.to_forest(Some(w))
    }
}

/// Wilson's algorithm rooted at a vertex set. Every vertex of `order` is
/// attached in turn; `order` must cover all non-root vertices. Returns one
/// tree per root.
pub fn wilson_forest<R: Rng + ?Sized>(
    g: &Graph,
    roots: &[usize],
    order: &[usize],
    rng: &mut R,
) -> Result<SpanningForest> {
    let n = g.vertex_count();
    if roots.is_empty() {
        return Err(Error::contract(
            "Wilson's algorithm needs at least one root",
        ));
    }
    if let Some(&v) = roots.iter().chain(order).find(|&&v| v >= n) {
        return Err(Error::contract(format!("vertex {v} out of range 0..{n}")));
    }
    let reach = g.reachable_from(roots, |_| true);
    if let Some(v) = reach.iter().position(|&r| !r) {
        return Err(Error::domain(format!(
            "graph is disconnected: vertex {v} cannot reach a root"
        )));
    }
    let mut sampler = WilsonSampler::new(n);
    sampler.reset(roots);
    for &v in order {
        sampler.attach(g, v, rng);
    }
    sampler.to_forest(None)
}

/// Uniform spanning tree of a connected graph, rooted at `root`, attaching
/// vertices in `order`. The law does not depend on `order`.
pub fn wilson_ust<R: Rng + ?Sized>(
    g: &Graph,
    root: usize,
    order: &[usize],
    rng: &mut R,
) -> Result<SpanningForest> {
    wilson_forest(g, &[root], order, rng)
}

/// Wired spanning forest of a lattice box: the uniform spanning tree of the
/// wired graph with the wired vertex removed. Each tree is rooted at a
/// former neighbor of the wired vertex.
pub fn wsf_wired_box<R: Rng + ?Sized>(
    spec: LatticeBoxSpec,
    budget: &Budget,
    rng: &mut R,
) -> Result<(LatticeBox, SpanningForest)> {
    if spec.boundary != crate::graph::Boundary::Wired {
        return Err(Error::domain("wsf_wired_box needs a wired boundary"));
    }
    let lb = LatticeBox::new(spec, budget)?;
    let mut sampler = WilsonSampler::new(lb.vertex_count());
    let forest = sampler.sample_wsf(&lb, rng)?;
    Ok((lb, forest))
}

/// Partition of the vertices by forest component, restricted to a subset.
pub fn partition_of(forest: &SpanningForest) -> &ComponentMap {
    forest.components()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{induced_component_graph, named};
    use crate::rng::RngStream;
    use crate::stats::chi_square_gof;
    use std::collections::HashMap;

    fn tree_law(g: &Graph, order: &[usize], samples: usize, seed: u64) -> HashMap<Vec<usize>, u64> {
        let mut rng = RngStream::new(seed, 0).rng();
        let mut counts = HashMap::new();
        for _ in 0..samples {
            let f = wilson_ust(g, 0, order, &mut rng).unwrap();
            *counts.entry(f.edge_ids()).or_insert(0) += 1;
        }
        counts
    }

    #[test]
    fn tree_input_returns_itself() {
        let g = named::path(5);
        let mut rng = RngStream::new(1, 0).rng();
        let f = wilson_ust(&g, 2, &[0, 1, 2, 3, 4], &mut rng).unwrap();
        assert_eq!(f.edge_ids(), vec![0, 1, 2, 3]);
        assert_eq!(f.roots(), &[2]);
    }

    #[test]
    fn four_cycle_trees_are_uniform() {
        let g = named::cycle(4);
        let trees = enumerate_spanning_trees(&g, &EnumerationLimits::default()).unwrap();
        assert_eq!(trees.len(), 4);
        let counts = tree_law(&g, &[0, 1, 2, 3], 40_000, 3);
        let observed: Vec<u64> = trees.iter().map(|t| counts[t]).collect();
        assert_eq!(observed.iter().sum::<u64>(), 40_000);
        let test = chi_square_gof(&observed, &[0.25; 4]);
        assert!(test.p_value > 1e-3, "{test:?}");
    }

    #[test]
    fn disconnected_graph_is_a_domain_error() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)], None).unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        assert!(matches!(
            wilson_ust(&g, 0, &[0, 1, 2, 3], &mut rng),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn incomplete_order_is_rejected() {
        let g = named::cycle(4);
        let mut rng = RngStream::new(1, 0).rng();
        assert!(wilson_ust(&g, 0, &[1, 2], &mut rng).is_err());
    }

    #[test]
    fn wired_box_forest_structure() {
        let spec = LatticeBoxSpec::wired(3, 2);
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..20 {
            let (lb, f) = wsf_wired_box(spec, &Budget::default(), &mut rng).unwrap();
            assert_eq!(f.absent(), lb.wired());
            // acyclic: a forest on n vertices with c components has n - c edges
            assert_eq!(f.edge_count(), lb.box_size() - f.components().count());
            // every tree is rooted at exactly one former neighbor of the wired vertex
            assert_eq!(f.roots().len(), f.components().count());
            for &r in f.roots() {
                assert!(lb.is_boundary(r));
            }
            let k = induced_component_graph(&lb, &f).unwrap();
            for e in 0..lb.edge_id_bound() {
                if f.contains_edge(e) {
                    assert!(k.contains_edge(e));
                }
            }
        }
    }

    #[test]
    fn one_dimensional_wired_box_law() {
        // wired 3-path = 4-cycle; the forest drops one of its 4 edges uniformly,
        // and dropping a wired edge leaves the whole path as one tree
        let spec = LatticeBoxSpec::wired(1, 1);
        let mut rng = RngStream::new(9, 0).rng();
        let mut whole = 0u64;
        let n = 20_000;
        for _ in 0..n {
            let (_, f) = wsf_wired_box(spec, &Budget::default(), &mut rng).unwrap();
            if f.components().count() == 1 {
                whole += 1;
            }
        }
        let test = chi_square_gof(&[whole, n - whole], &[0.5, 0.5]);
        assert!(test.p_value > 1e-3, "{test:?}");
    }
}
