//! Multigraphs, lattice boxes and induced-component graphs.
//!
//! Every sampler and solver in the crate is written against the
//! [`Topology`] trait, which exposes a graph through per-vertex incidence
//! slots. [`Graph`] is the explicit, array-backed implementation;
//! [`LatticeBox`] computes the incidence of a box in `Z^d` on the fly so that
//! boxes with millions of vertices never store an adjacency list.

mod components;
mod edgelist;
mod induced;
mod lattice;

pub use components::{components, ComponentMap, UnionFind};
pub use edgelist::{parse_edge_list, read_edge_list, write_edge_list};
pub use induced::{induced_component_graph, induced_mask, InducedComponentGraph};
pub use lattice::{
    build_lattice_box, counterexample_graph, Boundary, CounterexampleGraph, LatticeBox,
    LatticeBoxSpec,
};

use crate::error::{Error, Result};

/// Default ceiling on the number of vertices a builder may allocate.
pub const DEFAULT_VERTEX_BUDGET: u64 = 1 << 27;

/// Resource limits shared by graph builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub vertices: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            vertices: DEFAULT_VERTEX_BUDGET,
        }
    }
}

impl Budget {
    pub fn check_vertices(&self, what: &str, requested: u128) -> Result<()> {
        if requested > self.vertices as u128 {
            return Err(Error::resource(what, requested, self.vertices as u128));
        }
        Ok(())
    }
}

/// Read-only view of an undirected, locally finite multigraph.
///
/// Incident edges of `v` are addressed by a slot `0..degree(v)`. A parallel
/// edge occupies its own slot, so choosing a slot uniformly is exactly one
/// step of simple random walk with multi-edges counted with multiplicity.
/// Edge ids are `< edge_id_bound()`; implementations may leave gaps, in which
/// case [`Topology::endpoints`] returns `None` for the missing ids.
pub trait Topology: Sync {
    fn vertex_count(&self) -> usize;

    fn edge_id_bound(&self) -> usize;

    fn degree(&self, v: usize) -> usize;

    /// `(neighbor, edge id)` of the `slot`-th edge incident to `v`.
    fn incident(&self, v: usize, slot: usize) -> (usize, usize);

    /// Neighbor reached through `slot`; hot path for random walks.
    #[inline]
    fn step(&self, v: usize, slot: usize) -> usize {
        self.incident(v, slot).0
    }

    fn endpoints(&self, e: usize) -> Option<(usize, usize)>;

    fn wired_vertex(&self) -> Option<usize>;

    /// Number of existing edges.
    fn edge_count(&self) -> usize {
        (0..self.edge_id_bound())
            .filter(|&e| self.endpoints(e).is_some())
            .count()
    }
}

/// Immutable multigraph with CSR incidence storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    incidence: Vec<(u32, u32)>,
    edges: Vec<(u32, u32)>,
    wired: Option<usize>,
}

impl Graph {
    /// Builds a graph on `n` vertices; edge `i` of the list gets id `i`.
    /// Parallel edges are kept, self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], wired: Option<usize>) -> Result<Self> {
        if n > u32::MAX as usize || edges.len() > u32::MAX as usize {
            return Err(Error::resource(
                "graph size",
                n.max(edges.len()) as u128,
                u32::MAX as u128,
            ));
        }
        if let Some(w) = wired {
            if w >= n {
                return Err(Error::contract(format!(
                    "wired vertex {w} out of range for {n} vertices"
                )));
            }
        }
        let mut degree = vec![0usize; n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::contract(format!(
                    "edge {i} = ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::contract(format!("edge {i} is a self-loop at {u}")));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut incidence = vec![(0u32, 0u32); offsets[n]];
        for (i, &(u, v)) in edges.iter().enumerate() {
            incidence[fill[u]] = (v as u32, i as u32);
            fill[u] += 1;
            incidence[fill[v]] = (u as u32, i as u32);
            fill[v] += 1;
        }
        Ok(Self {
            offsets,
            incidence,
            edges: edges.iter().map(|&(u, v)| (u as u32, v as u32)).collect(),
            wired,
        })
    }

    /// Materializes any topology; edge ids are renumbered densely in
    /// increasing order of the source ids.
    pub fn from_topology<T: Topology + ?Sized>(t: &T) -> Result<(Self, Vec<usize>)> {
        let mut edges = Vec::new();
        let mut source_ids = Vec::new();
        for e in 0..t.edge_id_bound() {
            if let Some(ends) = t.endpoints(e) {
                edges.push(ends);
                source_ids.push(e);
            }
        }
        let g = Graph::from_edges(t.vertex_count(), &edges, t.wired_vertex())?;
        Ok((g, source_ids))
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        let (u, v) = self.edges[e];
        (u as usize, v as usize)
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(u, v)| (u as usize, v as usize))
    }

    /// `(neighbor, edge id)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.incidence[self.offsets[v]..self.offsets[v + 1]]
            .iter()
            .map(|&(u, e)| (u as usize, e as usize))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn wired_vertex(&self) -> Option<usize> {
        self.wired
    }

    /// Same graph with a different distinguished wired vertex.
    pub fn with_wired(mut self, wired: Option<usize>) -> Result<Self> {
        if let Some(w) = wired {
            if w >= self.vertex_count() {
                return Err(Error::contract(format!("wired vertex {w} out of range")));
            }
        }
        self.wired = wired;
        Ok(self)
    }

    /// Spanning subgraph keeping the edges selected by `mask`. Returns the
    /// subgraph and, for each of its edges, the id in `self`.
    pub fn edge_subgraph(&self, mask: &[bool]) -> (Graph, Vec<usize>) {
        let kept: Vec<usize> = (0..self.edge_count()).filter(|&e| mask[e]).collect();
        let edges: Vec<(usize, usize)> = kept.iter().map(|&e| self.edge(e)).collect();
        let g = Graph::from_edges(self.vertex_count(), &edges, self.wired)
            .expect("subgraph of a valid graph is valid");
        (g, kept)
    }

    /// Subgraph induced by `vertices` (in the given order, which becomes the
    /// new numbering). Returns the subgraph and, for each of its edges, the
    /// id in `self`. The wired vertex is kept only if it is listed.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> (Graph, Vec<usize>) {
        let mut local = vec![u32::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i as u32;
        }
        let mut edges = Vec::new();
        let mut source = Vec::new();
        for (e, (u, v)) in self.edges().enumerate() {
            if local[u] != u32::MAX && local[v] != u32::MAX {
                edges.push((local[u] as usize, local[v] as usize));
                source.push(e);
            }
        }
        let wired = self
            .wired
            .and_then(|w| (local[w] != u32::MAX).then_some(local[w] as usize));
        let g = Graph::from_edges(vertices.len(), &edges, wired)
            .expect("induced subgraph of a valid graph is valid");
        (g, source)
    }

    /// Vertices reachable from `start` (breadth-first order).
    pub fn reachable_from(
        &self,
        start: &[usize],
        edge_allowed: impl Fn(usize) -> bool,
    ) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue: std::collections::VecDeque<usize> = start.iter().copied().collect();
        for &s in start {
            seen[s] = true;
        }
        while let Some(u) = queue.pop_front() {
            for (w, e) in self.neighbors(u) {
                if !seen[w] && edge_allowed(e) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || self.reachable_from(&[0], |_| true).iter().all(|&s| s)
    }
}

impl Topology for Graph {
    fn vertex_count(&self) -> usize {
        Graph::vertex_count(self)
    }

    fn edge_id_bound(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    fn degree(&self, v: usize) -> usize {
        Graph::degree(self, v)
    }

    #[inline]
    fn incident(&self, v: usize, slot: usize) -> (usize, usize) {
        let (u, e) = self.incidence[self.offsets[v] + slot];
        (u as usize, e as usize)
    }

    fn endpoints(&self, e: usize) -> Option<(usize, usize)> {
        self.edges.get(e).map(|&(u, v)| (u as usize, v as usize))
    }

    fn wired_vertex(&self) -> Option<usize> {
        self.wired
    }

    fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// A few small graphs used by tests, examples and the CLI.
pub mod named {
    use super::Graph;

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges, None).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges, None).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges, None).unwrap()
    }

    /// The 3-cube `Q_3`: 8 vertices, 12 edges, 384 spanning trees.
    pub fn cube() -> Graph {
        let mut edges = Vec::new();
        for u in 0..8usize {
            for bit in 0..3 {
                let v = u ^ (1 << bit);
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(8, &edges, None).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handshake_and_symmetry() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 1), (1, 2)], None).unwrap();
        let total: usize = (0..3).map(|v| g.degree(v)).sum();
        assert_eq!(total, 2 * g.edge_count());
        for v in 0..3 {
            for (u, e) in g.neighbors(v) {
                assert!(g.neighbors(u).any(|(w, f)| w == v && f == e));
            }
        }
        assert_eq!(g.degree(1), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Graph::from_edges(2, &[(0, 0)], None).is_err());
        assert!(Graph::from_edges(2, &[(0, 2)], None).is_err());
        assert!(Graph::from_edges(2, &[(0, 1)], Some(5)).is_err());
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        let g = named::cycle(4);
        let (h, src) = g.induced_subgraph(&[0, 1, 2]);
        assert_eq!(h.edge_count(), 2);
        assert_eq!(src, vec![0, 1]);
    }

    #[test]
    fn budget_is_enforced() {
        let b = Budget { vertices: 10 };
        assert!(b.check_vertices("x", 10).is_ok());
        assert!(b.check_vertices("x", 11).unwrap_err().is_resource());
    }
}
