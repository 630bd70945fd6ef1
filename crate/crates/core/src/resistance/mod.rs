//! Effective resistance with unit conductances, and the cut-set and flow
//! bounds that sandwich it.

mod solver;

pub use solver::SolverOptions;

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Budget, Graph, LatticeBox, LatticeBoxSpec, Topology};
use solver::{ReducedLaplacian, SpdSolver};

/// Dirichlet energy `Σ_{edges} (f(x) - f(y))^2`, parallel edges counted
/// separately.
pub fn energy<T: Topology + ?Sized>(g: &T, f: &[f64]) -> f64 {
    (0..g.edge_id_bound())
        .filter_map(|e| g.endpoints(e))
        .map(|(u, v)| (f[u] - f[v]).powi(2))
        .sum()
}

/// Harmonic potential, 1 on `a` and 0 on `b`.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub values: Vec<f64>,
    pub boundary_a: Vec<usize>,
    pub boundary_b: Vec<usize>,
    /// `1 / energy`, or infinity when no component meets both sets.
    pub resistance: f64,
}

const FIXED: u32 = u32::MAX;

fn check_sets(n: usize, a: &[usize], b: &[usize]) -> Result<(Vec<bool>, Vec<bool>)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("both vertex sets must be nonempty"));
    }
    let mut in_a = vec![false; n];
    let mut in_b = vec![false; n];
    for &v in a {
        if v >= n {
            return Err(Error::contract(format!("vertex {v} out of range 0..{n}")));
        }
        in_a[v] = true;
    }
    for &v in b {
        if v >= n {
            return Err(Error::contract(format!("vertex {v} out of range 0..{n}")));
        }
        if in_a[v] {
            return Err(Error::domain(format!("vertex {v} lies in both sets")));
        }
        in_b[v] = true;
    }
    Ok((in_a, in_b))
}

/// Component labels restricted to components meeting both `a` and `b`.
fn relevant_vertices(g: &Graph, a: &[usize], in_b: &[bool]) -> Vec<bool> {
    let n = g.vertex_count();
    let mut label = vec![u32::MAX; n];
    let mut relevant = vec![false; n];
    let mut next = 0u32;
    for &s in a {
        if label[s] != u32::MAX {
            continue;
        }
        let mut members = vec![s];
        let mut queue = VecDeque::from([s]);
        label[s] = next;
        let mut meets_b = in_b[s];
        while let Some(u) = queue.pop_front() {
            for (w, _) in g.neighbors(u) {
                if label[w] == u32::MAX {
                    label[w] = next;
                    meets_b |= in_b[w];
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        if meets_b {
            for v in members {
                relevant[v] = true;
            }
        }
        next += 1;
    }
    relevant
}

/// Solves the Dirichlet problem and returns the potential.
pub fn potential(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    opts: &SolverOptions,
) -> Result<PotentialField> {
    let n = g.vertex_count();
    let (in_a, in_b) = check_sets(n, a, b)?;
    let relevant = relevant_vertices(g, a, &in_b);
    let mut values: Vec<f64> = (0..n).map(|v| if in_a[v] { 1.0 } else { 0.0 }).collect();
    if !b.iter().any(|&v| relevant[v]) {
        return Ok(PotentialField {
            values,
            boundary_a: a.to_vec(),
            boundary_b: b.to_vec(),
            resistance: f64::INFINITY,
        });
    }
    let mut local = vec![FIXED; n];
    let mut free = Vec::new();
    for v in 0..n {
        if relevant[v] && !in_a[v] && !in_b[v] {
            local[v] = free.len() as u32;
            free.push(v);
        }
    }
    let mut offsets = vec![0usize];
    let mut cols = Vec::new();
    let mut diag = Vec::with_capacity(free.len());
    let mut rhs = vec![0.0; free.len()];
    for (i, &v) in free.iter().enumerate() {
        diag.push(g.degree(v) as f64);
        for (w, _) in g.neighbors(v) {
            if local[w] != FIXED {
                cols.push(local[w]);
            } else if in_a[w] {
                rhs[i] += 1.0;
            }
        }
        offsets.push(cols.len());
    }
    let lap = ReducedLaplacian {
        diag,
        offsets,
        cols,
    };
    let x = SpdSolver::new(lap, *opts)?.solve(&rhs)?;
    for (i, &v) in free.iter().enumerate() {
        values[v] = x[i];
    }
    let e = energy(g, &values);
    Ok(PotentialField {
        values,
        boundary_a: a.to_vec(),
        boundary_b: b.to_vec(),
        resistance: 1.0 / e,
    })
}

/// `R_eff(A, B)`: infinity when no component contains both sets.
pub fn effective_resistance(g: &Graph, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(potential(g, a, b, &SolverOptions::default())?.resistance)
}

/// Many resistances from one vertex, reusing one factorization of the
/// Laplacian grounded at that vertex: `R(o, x) = (L_o^{-1})_{xx}`.
pub struct GroundedResistance {
    ground: usize,
    local: Vec<u32>,
    solver: Option<SpdSolver>,
}

impl GroundedResistance {
    pub fn new(g: &Graph, ground: usize, opts: &SolverOptions) -> Result<Self> {
        let n = g.vertex_count();
        if ground >= n {
            return Err(Error::contract(format!(
                "vertex {ground} out of range 0..{n}"
            )));
        }
        let reach = g.reachable_from(&[ground], |_| true);
        let mut local = vec![FIXED; n];
        let mut free = Vec::new();
        for v in 0..n {
            if reach[v] && v != ground {
                local[v] = free.len() as u32;
                free.push(v);
            }
        }
        if free.is_empty() {
            return Ok(Self {
                ground,
                local,
                solver: None,
            });
        }
        let mut offsets = vec![0usize];
        let mut cols = Vec::new();
        let mut diag = Vec::with_capacity(free.len());
        for &v in &free {
            diag.push(g.degree(v) as f64);
            for (w, _) in g.neighbors(v) {
                if local[w] != FIXED {
                    cols.push(local[w]);
                }
            }
            offsets.push(cols.len());
        }
        let lap = ReducedLaplacian {
            diag,
            offsets,
            cols,
        };
        Ok(Self {
            ground,
            local,
            solver: Some(SpdSolver::new(lap, *opts)?),
        })
    }

    pub fn resistance_to(&self, x: usize) -> Result<f64> {
        if x == self.ground {
            return Err(Error::domain("resistance from a vertex to itself"));
        }
        let i = self.local[x];
        if i == FIXED {
            return Ok(f64::INFINITY);
        }
        let solver = self.solver.as_ref().expect("nonempty component");
        let mut rhs = vec![0.0; solver.lap.len()];
        rhs[i as usize] = 1.0;
        Ok(solver.solve(&rhs)?[i as usize])
    }
}

/// Resistance between two lattice points in wired boxes of the given radii
/// (both points must lie in every box). Returns `(radius, resistance)`.
pub fn wired_effective_resistance(
    dim: usize,
    radii: &[usize],
    x: &[i64],
    y: &[i64],
    budget: &Budget,
) -> Result<Vec<(usize, f64)>> {
    radii
        .iter()
        .map(|&r| {
            let lb = LatticeBox::new(LatticeBoxSpec::wired(dim, r), budget)?;
            let (xi, yi) = match (lb.vertex_id(x), lb.vertex_id(y)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::domain(format!(
                        "points {x:?} and {y:?} must lie in the box of radius {r}"
                    )))
                }
            };
            let g = lb.to_graph()?;
            Ok((r, effective_resistance(&g, &[xi], &[yi])?))
        })
        .collect()
}

/// Ordered list of edge sets with per-edge multiplicity
/// `j(e) = #{k : e ∈ C_k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSetFamily {
    cuts: Vec<Vec<usize>>,
    multiplicity: rustc_hash::FxHashMap<usize, usize>,
}

impl CutSetFamily {
    pub fn new(cuts: Vec<Vec<usize>>) -> Self {
        let mut multiplicity = rustc_hash::FxHashMap::default();
        for cut in &cuts {
            for &e in cut {
                *multiplicity.entry(e).or_insert(0) += 1;
            }
        }
        Self { cuts, multiplicity }
    }

    pub fn cuts(&self) -> &[Vec<usize>] {
        &self.cuts
    }

    pub fn multiplicity(&self, e: usize) -> usize {
        self.multiplicity.get(&e).copied().unwrap_or(0)
    }

    /// Every cut must separate every vertex of `a` from every vertex of `b`.
    pub fn validate(&self, g: &Graph, a: &[usize], b: &[usize]) -> Result<()> {
        let n = g.vertex_count();
        let (_, in_b) = check_sets(n, a, b)?;
        for (k, cut) in self.cuts.iter().enumerate() {
            let mut removed = vec![false; g.edge_count()];
            for &e in cut {
                if e >= g.edge_count() {
                    return Err(Error::domain(format!("cut {k} names unknown edge {e}")));
                }
                removed[e] = true;
            }
            let reach = g.reachable_from(a, |e| !removed[e]);
            if let Some(v) = (0..n).find(|&v| reach[v] && in_b[v]) {
                return Err(Error::domain(format!(
                    "cut {k} does not separate the sets: vertex {v} is still reachable"
                )));
            }
        }
        Ok(())
    }
}

/// `Σ_k (Σ_{e ∈ C_k} j(e) c(e))^{-1}` with unit conductances, after
/// validating every cut.
pub fn nash_williams_lower_bound(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    family: &CutSetFamily,
) -> Result<f64> {
    family.validate(g, a, b)?;
    Ok(family
        .cuts
        .iter()
        .map(|cut| {
            let w: usize = cut.iter().map(|&e| family.multiplicity(e)).sum();
            1.0 / w as f64
        })
        .sum())
}

/// Signed flow per edge, oriented from the first to the second endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitFlow {
    pub flow: Vec<f64>,
}

impl UnitFlow {
    /// Net outflow at every vertex.
    pub fn divergence(&self, g: &Graph) -> Vec<f64> {
        let mut div = vec![0.0; g.vertex_count()];
        for (e, (u, v)) in g.edges().enumerate() {
            div[u] += self.flow[e];
            div[v] -= self.flow[e];
        }
        div
    }

    /// Largest violation of: zero divergence off `a ∪ b`, total +1 on `a`,
    /// total -1 on `b`.
    pub fn conservation_error(&self, g: &Graph, a: &[usize], b: &[usize]) -> f64 {
        let div = self.divergence(g);
        let mut fixed = vec![false; g.vertex_count()];
        for &v in a.iter().chain(b) {
            fixed[v] = true;
        }
        let interior = (0..g.vertex_count())
            .filter(|&v| !fixed[v])
            .map(|v| div[v].abs())
            .fold(0.0, f64::max);
        let out_a: f64 = a.iter().map(|&v| div[v]).sum();
        let out_b: f64 = b.iter().map(|&v| div[v]).sum();
        interior.max((out_a - 1.0).abs()).max((out_b + 1.0).abs())
    }

    /// Unit current flow from the harmonic potential.
    pub fn current(g: &Graph, field: &PotentialField) -> Self {
        let r = field.resistance;
        let flow = g
            .edges()
            .map(|(u, v)| (field.values[u] - field.values[v]) * r)
            .collect();
        Self { flow }
    }
}

/// Default tolerance on flow conservation.
pub const FLOW_TOLERANCE: f64 = 1e-9;

/// Thomson's principle: the energy `Σ_e flow(e)^2` of any unit flow bounds
/// the resistance from above.
pub fn thomson_upper_bound(g: &Graph, a: &[usize], b: &[usize], flow: &UnitFlow) -> Result<f64> {
    check_sets(g.vertex_count(), a, b)?;
    if flow.flow.len() != g.edge_count() {
        return Err(Error::contract("flow must have one value per edge"));
    }
    let err = flow.conservation_error(g, a, b);
    if err > FLOW_TOLERANCE {
        return Err(Error::domain(format!(
            "flow is not a unit flow: max conservation violation {err:e}"
        )));
    }
    Ok(flow.flow.iter().map(|f| f * f).sum())
}

/// `max_probes R^H(u,v) - R^{H'}(u,v)`; vertex ids are shared between the
/// two graphs.
pub fn local_modification_gap(h: &Graph, h2: &Graph, probes: &[(usize, usize)]) -> Result<f64> {
    let mut gap = f64::NEG_INFINITY;
    for &(u, v) in probes {
        let n = h.vertex_count().min(h2.vertex_count());
        if u >= n || v >= n {
            return Err(Error::domain(format!(
                "probe ({u}, {v}) is not in both graphs"
            )));
        }
        let r1 = effective_resistance(h, &[u], &[v])?;
        let r2 = effective_resistance(h2, &[u], &[v])?;
        gap = gap.max(r1 - r2);
    }
    Ok(gap)
}
