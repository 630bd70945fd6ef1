//! Exact spanning-tree oracles: matrix-tree counting and brute-force listing.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};

/// Size caps for the exact oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Largest edge count accepted by [`enumerate_spanning_trees`].
    pub max_edges: usize,
    /// Largest number of trees [`enumerate_spanning_trees`] will materialize.
    pub max_trees: u64,
    /// Largest vertex count accepted by [`spanning_tree_count`].
    pub max_vertices: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_edges: 20,
            max_trees: 5_000_000,
            max_vertices: 400,
        }
    }
}

/// Number of spanning trees, as the determinant of the Laplacian with the
/// last row and column removed. Integer Bareiss elimination keeps every
/// intermediate exact. Parallel edges count with multiplicity; a
/// disconnected graph has no spanning tree.
pub fn spanning_tree_count(g: &Graph) -> Result<BigInt> {
    spanning_tree_count_with(g, &EnumerationLimits::default())
}

pub fn spanning_tree_count_with(g: &Graph, limits: &EnumerationLimits) -> Result<BigInt> {
    let n = g.vertex_count();
    if n > limits.max_vertices {
        return Err(Error::resource(
            "exact spanning tree count (vertices)",
            n as u128,
            limits.max_vertices as u128,
        ));
    }
    if n <= 1 {
        return Ok(BigInt::from(1));
    }
    let m = n - 1;
    let mut a = vec![vec![BigInt::zero(); m]; m];
    for (u, v) in g.edges() {
        if u < m {
            a[u][u] += 1;
        }
        if v < m {
            a[v][v] += 1;
        }
        if u < m && v < m {
            a[u][v] -= 1;
            a[v][u] -= 1;
        }
    }
    Ok(bareiss_determinant(a))
}

fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let m = a.len();
    let mut sign = 1i32;
    let mut prev = BigInt::from(1);
    for k in 0..m {
        if a[k][k].is_zero() {
            match (k + 1..m).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..m {
            for j in k + 1..m {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[m - 1][m - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// All spanning trees as sorted edge-id lists, in lexicographic order.
pub fn enumerate_spanning_trees(g: &Graph, limits: &EnumerationLimits) -> Result<Vec<Vec<usize>>> {
    let m = g.edge_count();
    if m > limits.max_edges {
        return Err(Error::resource(
            "spanning tree enumeration (edges)",
            m as u128,
            limits.max_edges as u128,
        ));
    }
    let count = spanning_tree_count_with(g, limits)?;
    let count = count.to_u64().unwrap_or(u64::MAX);
    if count > limits.max_trees {
        return Err(Error::resource(
            "spanning tree enumeration (trees)",
            count as u128,
            limits.max_trees as u128,
        ));
    }
    let n = g.vertex_count();
    let mut out = Vec::with_capacity(count as usize);
    if n <= 1 {
        out.push(Vec::new());
        return Ok(out);
    }
    if count == 0 {
        return Ok(out);
    }
    let mut search = Search {
        g,
        n,
        excluded: vec![false; m],
        chosen: Vec::with_capacity(n - 1),
        out: &mut out,
    };
    search.run(0);
    debug_assert_eq!(search.out.len() as u64, count);
    Ok(out)
}

struct Search<'a> {
    g: &'a Graph,
    n: usize,
    excluded: Vec<bool>,
    chosen: Vec<usize>,
    out: &'a mut Vec<Vec<usize>>,
}

impl Search<'_> {
    fn acyclic_with(&self, e: usize) -> bool {
        let mut uf = UnionFind::new(self.n);
        for &c in &self.chosen {
            let (u, v) = self.g.edge(c);
            uf.union(u, v);
        }
        let (u, v) = self.g.edge(e);
        !uf.same(u, v)
    }

    fn connected_without_excluded(&self) -> bool {
        let excluded = &self.excluded;
        self.g
            .reachable_from(&[0], |e| !excluded[e])
            .iter()
            .all(|&s| s)
    }

    // Include-first depth-first search emits trees in lexicographic order.
    fn run(&mut self, e: usize) {
        if self.chosen.len() == self.n - 1 {
            self.out.push(self.chosen.clone());
            return;
        }
        let m = self.g.edge_count();
        if e == m || m - e < self.n - 1 - self.chosen.len() {
            return;
        }
        if self.acyclic_with(e) {
            self.chosen.push(e);
            self.run(e + 1);
            self.chosen.pop();
        }
        self.excluded[e] = true;
        if self.connected_without_excluded() {
            self.run(e + 1);
        }
        self.excluded[e] = false;
    }
}
