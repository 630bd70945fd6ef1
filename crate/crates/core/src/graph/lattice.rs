use serde::{Deserialize, Serialize};

use super::{Budget, Graph, Topology};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Every edge leaving the box ends at one extra "wired" vertex.
    Wired,
    /// Only edges between box vertices are kept.
    Free,
}

/// The box `{-r, ..., r}^d` in `Z^d` with a boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBoxSpec {
    pub dim: usize,
    pub radius: usize,
    pub boundary: Boundary,
}

impl LatticeBoxSpec {
    pub fn wired(dim: usize, radius: usize) -> Self {
        Self {
            dim,
            radius,
            boundary: Boundary::Wired,
        }
    }

    pub fn free(dim: usize, radius: usize) -> Self {
        Self {
            dim,
            radius,
            boundary: Boundary::Free,
        }
    }

    /// `(2r+1)^d`, or `None` on overflow.
    pub fn box_vertices(&self) -> Option<u128> {
        let side = 2 * self.radius as u128 + 1;
        let mut n: u128 = 1;
        for _ in 0..self.dim {
            n = n.checked_mul(side)?;
        }
        Some(n)
    }
}

/// Implicit box of `Z^d`.
///
/// Vertex ids are the mixed-radix encoding of `x + r` (coordinate 0 is the
/// least significant digit). With a wired boundary the wired vertex has id
/// `(2r+1)^d`. Edge ids:
///
/// * `v*d + i` is the edge from `v` in direction `+e_i` (to `v + e_i`, or to
///   the wired vertex when `x_i = r`);
/// * `n*d + i*F + f` is the edge from a vertex with `x_i = -r` in direction
///   `-e_i` to the wired vertex, where `F = (2r+1)^(d-1)` and `f` encodes the
///   remaining coordinates.
///
/// With a wired boundary every id below `edge_id_bound()` exists; with a free
/// boundary the `+e_i` ids of the `x_i = r` face are absent.
#[derive(Debug, Clone)]
pub struct LatticeBox {
    spec: LatticeBoxSpec,
    side: usize,
    n: usize,
    face: usize,
    strides: Vec<usize>,
}

impl LatticeBox {
    pub fn new(spec: LatticeBoxSpec, budget: &Budget) -> Result<Self> {
        if spec.dim == 0 || spec.radius == 0 {
            return Err(Error::contract(format!(
                "lattice box needs dim >= 1 and radius >= 1, got d={} r={}",
                spec.dim, spec.radius
            )));
        }
        let extra = u128::from(spec.boundary == Boundary::Wired);
        let total = spec.box_vertices().map(|n| n + extra).unwrap_or(u128::MAX);
        budget.check_vertices(
            &format!("lattice box d={} r={}", spec.dim, spec.radius),
            total,
        )?;
        let edge_total = total.saturating_mul(spec.dim as u128 + 1);
        if total > u32::MAX as u128 || edge_total > u32::MAX as u128 {
            return Err(Error::resource(
                "lattice box ids",
                edge_total,
                u32::MAX as u128,
            ));
        }
        let side = 2 * spec.radius + 1;
        let mut strides = Vec::with_capacity(spec.dim + 1);
        let mut s = 1usize;
        for _ in 0..=spec.dim {
            strides.push(s);
            s = s.saturating_mul(side);
        }
        let n = strides[spec.dim];
        Ok(Self {
            spec,
            side,
            n,
            face: n / side,
            strides,
        })
    }

    pub fn spec(&self) -> LatticeBoxSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn radius(&self) -> usize {
        self.spec.radius
    }

    /// Number of box vertices (the wired vertex excluded).
    pub fn box_size(&self) -> usize {
        self.n
    }

    pub fn is_wired(&self) -> bool {
        self.spec.boundary == Boundary::Wired
    }

    /// Id of the wired vertex, if the boundary is wired.
    pub fn wired(&self) -> Option<usize> {
        self.is_wired().then_some(self.n)
    }

    pub fn origin(&self) -> usize {
        self.n / 2
    }

    /// Id of the lattice point `x`, or `None` outside the box.
    pub fn vertex_id(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.spec.dim {
            return None;
        }
        let r = self.spec.radius as i64;
        let mut id = 0usize;
        for (i, &xi) in x.iter().enumerate() {
            if xi < -r || xi > r {
                return None;
            }
            id += (xi + r) as usize * self.strides[i];
        }
        Some(id)
    }

    #[inline]
    pub fn coord(&self, v: usize, i: usize) -> i64 {
        ((v / self.strides[i]) % self.side) as i64 - self.spec.radius as i64
    }

    pub fn coords(&self, v: usize) -> Vec<i64> {
        (0..self.spec.dim).map(|i| self.coord(v, i)).collect()
    }

    /// True if `v` is a box vertex with some coordinate equal to `±r`.
    pub fn is_boundary(&self, v: usize) -> bool {
        let r = self.spec.radius as i64;
        v < self.n && (0..self.spec.dim).any(|i| self.coord(v, i).abs() == r)
    }

    /// Graph distance from the origin (L1 norm) for box vertices.
    pub fn l1_norm(&self, v: usize) -> usize {
        (0..self.spec.dim)
            .map(|i| self.coord(v, i).unsigned_abs() as usize)
            .sum()
    }

    #[inline]
    fn face_index(&self, v: usize, i: usize) -> usize {
        let s = self.strides[i];
        v % s + (v / (s * self.side)) * s
    }

    #[inline]
    fn vertex_on_face(&self, f: usize, i: usize, digit: usize) -> usize {
        let s = self.strides[i];
        f % s + digit * s + (f / s) * s * self.side
    }

    /// Neighbor and edge id in direction `dir` (`2i` = `+e_i`, `2i+1` = `-e_i`)
    /// for a box vertex; `None` if that edge is absent (free boundary).
    #[inline]
    fn box_incident(&self, v: usize, dir: usize) -> Option<(usize, usize)> {
        let d = self.spec.dim;
        let i = dir >> 1;
        let digit = (v / self.strides[i]) % self.side;
        if dir & 1 == 0 {
            if digit + 1 == self.side {
                self.is_wired().then_some((self.n, v * d + i))
            } else {
                Some((v + self.strides[i], v * d + i))
            }
        } else if digit == 0 {
            self.is_wired()
                .then(|| (self.n, self.n * d + i * self.face + self.face_index(v, i)))
        } else {
            let u = v - self.strides[i];
            Some((u, u * d + i))
        }
    }

    fn wired_incident(&self, slot: usize) -> (usize, usize) {
        let d = self.spec.dim;
        let i = slot / (2 * self.face);
        let rem = slot % (2 * self.face);
        let f = rem % self.face;
        if rem < self.face {
            let v = self.vertex_on_face(f, i, self.side - 1);
            (v, v * d + i)
        } else {
            let v = self.vertex_on_face(f, i, 0);
            (v, self.n * d + i * self.face + f)
        }
    }

    /// Materializes the box as an explicit [`Graph`]. For a wired box the
    /// edge ids coincide with the implicit ones.
    pub fn to_graph(&self) -> Result<Graph> {
        Graph::from_topology(self).map(|(g, _)| g)
    }
}

impl Topology for LatticeBox {
    fn vertex_count(&self) -> usize {
        self.n + usize::from(self.is_wired())
    }

    fn edge_id_bound(&self) -> usize {
        let d = self.spec.dim;
        if self.is_wired() {
            self.n * d + d * self.face
        } else {
            self.n * d
        }
    }

    fn degree(&self, v: usize) -> usize {
        let d = self.spec.dim;
        if v == self.n {
            return 2 * d * self.face;
        }
        if self.is_wired() {
            return 2 * d;
        }
        (0..2 * d)
            .filter(|&dir| self.box_incident(v, dir).is_some())
            .count()
    }

    #[inline]
    fn incident(&self, v: usize, slot: usize) -> (usize, usize) {
        if v == self.n {
            return self.wired_incident(slot);
        }
        if self.is_wired() {
            return self
                .box_incident(v, slot)
                .expect("wired box has all 2d edges");
        }
        (0..2 * self.spec.dim)
            .filter_map(|dir| self.box_incident(v, dir))
            .nth(slot)
            .expect("slot below degree")
    }

    #[inline]
    fn step(&self, v: usize, slot: usize) -> usize {
        if self.is_wired() && v < self.n {
            let i = slot >> 1;
            let digit = (v / self.strides[i]) % self.side;
            return if slot & 1 == 0 {
                if digit + 1 == self.side {
                    self.n
                } else {
                    v + self.strides[i]
                }
            } else if digit == 0 {
                self.n
            } else {
                v - self.strides[i]
            };
        }
        self.incident(v, slot).0
    }

    fn endpoints(&self, e: usize) -> Option<(usize, usize)> {
        let d = self.spec.dim;
        if e < self.n * d {
            let (v, i) = (e / d, e % d);
            return self.box_incident(v, 2 * i).map(|(u, _)| (v, u));
        }
        if !self.is_wired() || e >= self.edge_id_bound() {
            return None;
        }
        let rest = e - self.n * d;
        let (i, f) = (rest / self.face, rest % self.face);
        Some((self.vertex_on_face(f, i, 0), self.n))
    }

    fn wired_vertex(&self) -> Option<usize> {
        self.wired()
    }

    fn edge_count(&self) -> usize {
        let d = self.spec.dim;
        if self.is_wired() {
            self.edge_id_bound()
        } else {
            d * (self.n - self.face)
        }
    }
}

/// Explicit graph of the box; see [`LatticeBox`] for the id conventions.
pub fn build_lattice_box(spec: LatticeBoxSpec, budget: &Budget) -> Result<Graph> {
    LatticeBox::new(spec, budget)?.to_graph()
}

/// Two wired copies of a box in `Z^5`, joined by one bridge edge between
/// their origins. Each copy keeps its own wired vertex.
#[derive(Debug, Clone)]
pub struct CounterexampleGraph {
    pub graph: Graph,
    /// Box geometry shared by both copies; copy `c` occupies ids
    /// `c*offset .. (c+1)*offset`.
    pub copy: LatticeBox,
    pub offset: usize,
    pub wired: [usize; 2],
    pub origins: [usize; 2],
    pub bridge: usize,
}

impl CounterexampleGraph {
    /// Id in the joined graph of box vertex `v` of copy `c`.
    pub fn lift(&self, c: usize, v: usize) -> usize {
        c * self.offset + v
    }
}

pub fn counterexample_graph(radius: usize, budget: &Budget) -> Result<CounterexampleGraph> {
    let spec = LatticeBoxSpec::wired(5, radius);
    let one = spec.box_vertices().unwrap_or(u128::MAX).saturating_add(1);
    budget.check_vertices("counterexample graph", one.saturating_mul(2))?;
    let copy = LatticeBox::new(spec, budget)?;
    let offset = copy.vertex_count();
    let mut edges = Vec::with_capacity(2 * copy.edge_id_bound() + 1);
    for c in 0..2 {
        for e in 0..copy.edge_id_bound() {
            let (u, v) = copy.endpoints(e).expect("wired box ids are dense");
            edges.push((c * offset + u, c * offset + v));
        }
    }
    let origins = [copy.origin(), offset + copy.origin()];
    edges.push((origins[0], origins[1]));
    let bridge = edges.len() - 1;
    let graph = Graph::from_edges(2 * offset, &edges, None)?;
    let wired = [copy.box_size(), offset + copy.box_size()];
    Ok(CounterexampleGraph {
        graph,
        copy,
        offset,
        wired,
        origins,
        bridge,
    })
}
