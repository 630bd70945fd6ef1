//! Resistance along rays, recurrence diagnostics and the `n/m` envelope.

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::{bush_joins, cut_sets_and_j, cut_sets_from, ray_decompose, RayDecomposition};
use crate::error::{Error, Result};
use crate::graph::{Budget, Graph, LatticeBoxSpec, Topology};
use crate::resistance::{effective_resistance, GroundedResistance, SolverOptions};
use crate::rng::RngStream;
use crate::wilson::{wsf_wired_box, SpanningForest};

/// Subgraph of a host graph induced by one vertex set, with id maps.
#[derive(Debug, Clone)]
pub struct ComponentGraph {
    pub graph: Graph,
    /// Host id of each local vertex.
    pub vertices: Vec<usize>,
    pub local: FxHashMap<usize, usize>,
}

pub fn component_graph<T: Topology + ?Sized>(
    g: &T,
    vertices: impl IntoIterator<Item = usize>,
) -> ComponentGraph {
    let mut vertices: Vec<usize> = vertices.into_iter().collect();
    vertices.sort_unstable();
    let local: FxHashMap<usize, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges = Vec::new();
    for (i, &u) in vertices.iter().enumerate() {
        for slot in 0..g.degree(u) {
            let (w, _) = g.incident(u, slot);
            if let Some(&k) = local.get(&w) {
                if i < k {
                    edges.push((i, k));
                }
            }
        }
    }
    let graph = Graph::from_edges(vertices.len(), &edges, None).expect("local ids are in range");
    ComponentGraph {
        graph,
        vertices,
        local,
    }
}

/// Number of host edges with one endpoint in the component of `u` and the
/// other in the component of `v`; zero when they share a component.
pub fn inter_component_joins<T: Topology + ?Sized>(
    g: &T,
    forest: &SpanningForest,
    u: usize,
    v: usize,
) -> Result<usize> {
    let comp = forest.components();
    let (cu, cv) = match (comp.label(u), comp.label(v)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::contract("both vertices must belong to the forest")),
    };
    if cu == cv {
        return Ok(0);
    }
    let mut count = 0;
    for x in comp.members(cu) {
        for slot in 0..g.degree(x) {
            let (y, _) = g.incident(x, slot);
            if comp.label(y) == Some(cv) {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    /// `R(v, Ray(n))` inside the induced graph on the tree's vertices.
    pub resistance: f64,
    /// `Σ_{k<n} J_k^{-1}`.
    pub lower_bound: f64,
}

/// Resistance from `Ray(0)` to `Ray(n)` for `n = 1..=n_max` within the graph
/// induced on the tree, next to the cut-set lower bound.
pub fn resistance_growth_profile<T: Topology + ?Sized>(
    g: &T,
    d: &RayDecomposition,
    n_max: usize,
) -> Result<Vec<GrowthRow>> {
    if n_max > d.truncation {
        return Err(Error::contract(format!(
            "n_max = {n_max} beyond the ray truncation {}",
            d.truncation
        )));
    }
    let cg = component_graph(g, d.tree_vertices());
    let ground = cg.local[&d.ray_vertex(0)];
    let grounded = GroundedResistance::new(&cg.graph, ground, &SolverOptions::default())?;
    let cuts = cut_sets_and_j(g, d);
    let lower = cuts.lower_bounds();
    (1..=n_max)
        .map(|n| {
            Ok(GrowthRow {
                n,
                resistance: grounded.resistance_to(cg.local[&d.ray_vertex(n)])?,
                lower_bound: lower[n],
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceOptions {
    pub budget: Budget,
    pub ray_drop: f64,
}

impl Default for RecurrenceOptions {
    fn default() -> Self {
        Self {
            budget: Budget::default(),
            ray_drop: super::DEFAULT_RAY_DROP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceRow {
    pub radius: usize,
    /// Resistance from the origin to the boundary layer of the box within
    /// the graph induced on the origin's tree.
    pub resistance: f64,
    pub component_size: usize,
    pub boundary_vertices: usize,
    pub ray_length: usize,
    /// `Σ_{k<n} (#C_k)^{-1}` along the origin's ray, `n = 0..`.
    pub inverse_cut_sums: Vec<f64>,
}

/// One wired-box forest per radius (independent substreams); reports how
/// hard it is to escape from the origin inside its own component.
pub fn recurrence_diagnostic(
    dim: usize,
    radii: &[usize],
    opts: &RecurrenceOptions,
    stream: &RngStream,
) -> Result<Vec<RecurrenceRow>> {
    if radii.windows(2).any(|w| w[0] >= w[1]) || radii.first() == Some(&0) {
        return Err(Error::domain("radii must be positive and increasing"));
    }
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut rng = stream.substream(i as u64).rng();
            let (lb, forest) =
                wsf_wired_box(LatticeBoxSpec::wired(dim, r), &opts.budget, &mut rng)?;
            let o = lb.origin();
            let d = super::ray_decompose_with(&forest, o, opts.ray_drop)?;
            let cg = component_graph(&lb, d.tree_vertices());
            let targets: Vec<usize> = cg
                .vertices
                .iter()
                .enumerate()
                .filter(|&(_, &v)| lb.is_boundary(v))
                .map(|(k, _)| k)
                .collect();
            let resistance = effective_resistance(&cg.graph, &[cg.local[&o]], &targets)?;
            let cuts = cut_sets_from(bush_joins(&lb, &d), d.truncation);
            Ok(RecurrenceRow {
                radius: r,
                resistance,
                component_size: cg.vertices.len(),
                boundary_vertices: targets.len(),
                ray_length: d.ray_len() - 1,
                inverse_cut_sums: cuts.inverse_size_sums(),
            })
        })
        .collect()
}

/// Mean of `Σ_{j≤n}Σ_{l≥m} N_{j,l}` over replicas at one `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub n: usize,
    pub m: usize,
    pub mean: f64,
    pub std_err: f64,
}

/// Least-squares fit of `mean ≈ C n/m` over the points with `n < m`, and
/// the weighted trend of the relative residual `1 - mean / (C n/m)`
/// against `ln m`. A negative trend means the data decay slower than
/// `1/m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub constant: f64,
    pub points: Vec<EnvelopePoint>,
    pub relative_residuals: Vec<f64>,
    pub residual_slope: f64,
    pub slope_std_err: f64,
}

impl EnvelopeFit {
    /// Trend not significantly negative at the given z-score.
    pub fn trend_nonnegative(&self, z: f64) -> bool {
        self.residual_slope >= -z * self.slope_std_err
    }
}

pub fn fit_envelope(points: &[EnvelopePoint]) -> Result<EnvelopeFit> {
    let pts: Vec<EnvelopePoint> = points
        .iter()
        .copied()
        .filter(|p| p.n < p.m && p.n > 0)
        .collect();
    if pts.len() < 2 {
        return Err(Error::domain(
            "need at least two (n, m) points with 0 < n < m",
        ));
    }
    let x = |p: &EnvelopePoint| p.n as f64 / p.m as f64;
    let sxx: f64 = pts.iter().map(|p| x(p).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| x(p) * p.mean).sum();
    let constant = sxy / sxx;
    if constant <= 0.0 {
        return Ok(EnvelopeFit {
            constant,
            relative_residuals: vec![0.0; pts.len()],
            points: pts,
            residual_slope: 0.0,
            slope_std_err: 0.0,
        });
    }
    let relative_residuals: Vec<f64> = pts
        .iter()
        .map(|p| 1.0 - p.mean / (constant * x(p)))
        .collect();
    let sigma: Vec<f64> = pts.iter().map(|p| p.std_err / (constant * x(p))).collect();
    let floor = sigma
        .iter()
        .copied()
        .filter(|&s| s > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 1.0 };
    let w: Vec<f64> = sigma.iter().map(|&s| 1.0 / s.max(floor).powi(2)).collect();
    let lx: Vec<f64> = pts.iter().map(|p| (p.m as f64).ln()).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&lx).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w
        .iter()
        .zip(&relative_residuals)
        .map(|(w, y)| w * y)
        .sum::<f64>()
        / sw;
    let sxx_w: f64 = w.iter().zip(&lx).map(|(w, x)| w * (x - mx).powi(2)).sum();
    let (slope, se) = if sxx_w > 0.0 {
        let sxy_w: f64 = w
            .iter()
            .zip(lx.iter().zip(&relative_residuals))
            .map(|(w, (x, y))| w * (x - mx) * (y - my))
            .sum();
        (sxy_w / sxx_w, (1.0 / sxx_w).sqrt())
    } else {
        (0.0, f64::INFINITY)
    };
    Ok(EnvelopeFit {
        constant,
        points: pts,
        relative_residuals,
        residual_slope: slope,
        slope_std_err: se,
    })
}

/// Resistance growth summary of one sample: the ray of the origin and its
/// profile up to the truncation index.
pub fn origin_profile<T: Topology + ?Sized>(
    g: &T,
    forest: &SpanningForest,
    v: usize,
) -> Result<(RayDecomposition, Vec<GrowthRow>)> {
    let d = ray_decompose(forest, v)?;
    let rows = resistance_growth_profile(g, &d, d.truncation)?;
    Ok((d, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ray_decompose_with;
    use crate::graph::named;

    #[test]
    fn path_component_grows_linearly() {
        let g = named::path(8);
        let parents: Vec<_> = (0..8).map(|v| (v + 1 < 8).then_some((v + 1, v))).collect();
        let f = SpanningForest::from_parents(&g, &parents, None).unwrap();
        let d = ray_decompose_with(&f, 0, 0.0).unwrap();
        let rows = resistance_growth_profile(&g, &d, 7).unwrap();
        for r in rows {
            assert!((r.resistance - r.n as f64).abs() < 1e-9);
            assert!((r.lower_bound - r.n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn chords_lower_the_resistance_but_not_below_the_bound() {
        // ray 0..5 with chords (0,2) and (1,4)
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (1, 4)];
        let g = Graph::from_edges(6, &edges, None).unwrap();
        let parents: Vec<_> = (0..6).map(|v| (v + 1 < 6).then_some((v + 1, v))).collect();
        let f = SpanningForest::from_parents(&g, &parents, None).unwrap();
        let d = ray_decompose_with(&f, 0, 0.0).unwrap();
        for r in resistance_growth_profile(&g, &d, 5).unwrap() {
            assert!(r.lower_bound <= r.resistance + 1e-12);
            assert!(r.resistance <= r.n as f64 + 1e-12);
        }
    }

    #[test]
    fn inter_component_counts() {
        // 2x2 grid split into its two rows
        let g = Graph::from_edges(4, &[(0, 1), (2, 3), (0, 2), (1, 3)], None).unwrap();
        let f = SpanningForest::from_edge_set(&g, &[0, 1], None).unwrap();
        assert_eq!(inter_component_joins(&g, &f, 0, 2).unwrap(), 2);
        assert_eq!(inter_component_joins(&g, &f, 0, 1).unwrap(), 0);
        // 2x3 strip, rows as components: three rungs
        let g = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)],
            None,
        )
        .unwrap();
        let f = SpanningForest::from_edge_set(&g, &[0, 1, 2, 3], None).unwrap();
        assert_eq!(inter_component_joins(&g, &f, 2, 3).unwrap(), 3);
    }

    #[test]
    fn recurrence_on_the_line() {
        let stream = RngStream::new(5, 0);
        let rows = recurrence_diagnostic(1, &[1, 2, 4, 8], &RecurrenceOptions::default(), &stream)
            .unwrap();
        for row in &rows {
            let r = row.radius as f64;
            // one boundary point: series path of length r; both: two in parallel
            let expect = if row.boundary_vertices == 1 {
                r
            } else {
                r / 2.0
            };
            assert!((row.resistance - expect).abs() < 1e-9, "{row:?}");
            assert!(row.inverse_cut_sums.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn recurrence_rows_in_five_dimensions() {
        let stream = RngStream::new(9, 1);
        let rows =
            recurrence_diagnostic(5, &[1, 2, 3], &RecurrenceOptions::default(), &stream).unwrap();
        for row in rows {
            assert!(row.resistance > 0.0 && row.resistance <= row.radius as f64 + 1e-9);
            assert!(row.boundary_vertices >= 1);
        }
    }

    #[test]
    fn envelope_fit_shapes() {
        let exact: Vec<EnvelopePoint> = [(1, 2), (1, 4), (2, 4), (1, 8), (2, 8), (4, 8)]
            .iter()
            .map(|&(n, m)| EnvelopePoint {
                n,
                m,
                mean: 3.0 * n as f64 / m as f64,
                std_err: 0.01,
            })
            .collect();
        let fit = fit_envelope(&exact).unwrap();
        assert!((fit.constant - 3.0).abs() < 1e-12);
        assert!(fit.residual_slope.abs() < 1e-9);
        // decay like n/sqrt(m): residuals fall with m
        let slow: Vec<EnvelopePoint> = exact
            .iter()
            .map(|p| EnvelopePoint {
                mean: p.n as f64 / (p.m as f64).sqrt(),
                ..*p
            })
            .collect();
        let fit = fit_envelope(&slow).unwrap();
        assert!(!fit.trend_nonnegative(3.29));
        // decay like n/m^2: residuals rise with m
        let fast: Vec<EnvelopePoint> = exact
            .iter()
            .map(|p| EnvelopePoint {
                mean: p.n as f64 / (p.m as f64).powi(2),
                ..*p
            })
            .collect();
        assert!(fit_envelope(&fast).unwrap().trend_nonnegative(3.29));
    }
}
