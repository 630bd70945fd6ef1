//! Random walks, loop erasure, cut times, and the walk-derived estimators.

mod cuttime;
mod heat;
mod kac;
mod lattice;
mod reversal;

pub use cuttime::{cut_time_batch, sample_cut_times, CutTimeBatch, CutTimeSample};
pub use heat::{
    heat_kernel, heat_kernel_table, z_value, z_values, HeatKernelOptions, HeatKernelValue,
    ZEstimate, ZValues,
};
pub use kac::{kac_check, KacReport, MarkovChain};
pub use lattice::{
    lattice_walk, two_sided_lerw, two_sided_lerw_attempt, LatticeCoder, LatticePath,
    TwoSidedLerwConfig, TwoSidedLerwSample,
};
pub use reversal::lerw_law;

use std::hash::Hash;

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::Topology;

/// Vertex sequence of a walk. `origin_offset` is the index of time zero
/// for two-sided paths (0 for ordinary paths).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Path {
    pub vertices: Vec<usize>,
    pub origin_offset: usize,
}

impl Path {
    pub fn new(vertices: Vec<usize>) -> Self {
        Self {
            vertices,
            origin_offset: 0,
        }
    }

    /// Number of steps, i.e. one less than the number of vertices.
    pub fn length(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn first(&self) -> Option<usize> {
        self.vertices.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.vertices.last().copied()
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = rustc_hash::FxHashSet::default();
        self.vertices.iter().all(|v| seen.insert(*v))
    }

    pub fn reversed(&self) -> Path {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Path {
            origin_offset: self.length() - self.origin_offset.min(self.length()),
            vertices,
        }
    }

    /// Whether consecutive vertices are adjacent in `g`.
    pub fn is_walk_in<T: Topology + ?Sized>(&self, g: &T) -> bool {
        self.vertices.windows(2).all(|w| {
            w[0] < g.vertex_count() && (0..g.degree(w[0])).any(|s| g.step(w[0], s) == w[1])
        })
    }
}

/// Marking of a loop: a time in `0..=|γ|` or a step in `0..|γ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Time(usize),
    Step(usize),
}

/// A rooted loop with a marked time or step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedLoop {
    path: Path,
    mark: Mark,
}

impl MarkedLoop {
    pub fn new(path: Path, mark: Mark) -> Result<Self> {
        if path.vertices.is_empty() || path.first() != path.last() {
            return Err(Error::contract("a loop must start and end at its root"));
        }
        let ok = match mark {
            Mark::Time(i) => i <= path.length(),
            Mark::Step(i) => i < path.length(),
        };
        if !ok {
            return Err(Error::contract(format!(
                "mark {mark:?} out of range for a loop of length {}",
                path.length()
            )));
        }
        Ok(Self { path, mark })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn mark(&self) -> Mark {
        self.mark
    }

    pub fn root(&self) -> usize {
        self.path.vertices[0]
    }

    /// Loop-measure weight `(2d)^-|γ|` on the lattice `Z^d`.
    pub fn weight(&self, dim: usize) -> f64 {
        (2.0 * dim as f64).powi(-(self.path.length() as i32))
    }
}

/// When a walk stops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopRule {
    /// First visit to any vertex of the set (time 0 included).
    HitSet(Vec<usize>),
    FixedSteps(usize),
    /// First visit to the wired vertex of the topology.
    HitWired,
}

/// Step cap for walks that stop at a hitting time.
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

/// Simple random walk from `start`; each step picks an incident edge
/// uniformly, parallel edges counted separately.
pub fn run_srw<T: Topology + ?Sized, R: Rng + ?Sized>(
    g: &T,
    start: usize,
    stop: &StopRule,
    max_steps: usize,
    rng: &mut R,
) -> Result<Path> {
    let n = g.vertex_count();
    if start >= n {
        return Err(Error::contract(format!(
            "start {start} out of range 0..{n}"
        )));
    }
    let target: Vec<bool> = match stop {
        StopRule::FixedSteps(t) => {
            if *t > max_steps {
                return Err(Error::resource("walk steps", *t as u128, max_steps as u128));
            }
            let mut vertices = Vec::with_capacity(t + 1);
            let mut x = start;
            vertices.push(x);
            for _ in 0..*t {
                let d = g.degree(x);
                if d == 0 {
                    return Err(Error::domain(format!("walk stuck at isolated vertex {x}")));
                }
                x = g.step(x, rng.random_range(0..d));
                vertices.push(x);
            }
            return Ok(Path::new(vertices));
        }
        StopRule::HitSet(set) => {
            let mut mask = vec![false; n];
            for &v in set {
                if v >= n {
                    return Err(Error::contract(format!("target vertex {v} out of range")));
                }
                mask[v] = true;
            }
            mask
        }
        StopRule::HitWired => {
            let w = g
                .wired_vertex()
                .ok_or_else(|| Error::domain("HitWired on a graph without a wired vertex"))?;
            let mut mask = vec![false; n];
            mask[w] = true;
            mask
        }
    };
    let mut vertices = vec![start];
    let mut x = start;
    while !target[x] {
        if vertices.len() > max_steps {
            return Err(Error::resource(
                "walk steps",
                vertices.len() as u128,
                max_steps as u128,
            ));
        }
        let d = g.degree(x);
        if d == 0 {
            return Err(Error::domain(format!("walk stuck at isolated vertex {x}")));
        }
        x = g.step(x, rng.random_range(0..d));
        vertices.push(x);
    }
    Ok(Path::new(vertices))
}

/// Chronological loop erasure of any finite sequence.
pub fn loop_erase_seq<V: Copy + Eq + Hash>(seq: &[V]) -> Vec<V> {
    let mut out: Vec<V> = Vec::new();
    let mut position: FxHashMap<V, usize> = FxHashMap::default();
    for &v in seq {
        if let Some(&p) = position.get(&v) {
            for u in out.drain(p + 1..) {
                position.remove(&u);
            }
        } else {
            position.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

/// Loop erasure: a simple path from the first to the last vertex of `p`.
pub fn loop_erase(p: &Path) -> Path {
    Path::new(loop_erase_seq(&p.vertices))
}

/// Indices `t` with `{v_i : i < t}` disjoint from `{v_i : i > t}`, relative
/// to the given finite window.
pub fn cut_times(p: &Path) -> Vec<usize> {
    cut_times_seq(&p.vertices)
}

pub fn cut_times_seq<V: Copy + Eq + Hash>(seq: &[V]) -> Vec<usize> {
    let mut last: FxHashMap<V, usize> = FxHashMap::default();
    for (i, &v) in seq.iter().enumerate() {
        last.insert(v, i);
    }
    let mut out = Vec::new();
    let mut reach = 0usize;
    for (t, &v) in seq.iter().enumerate() {
        if reach <= t {
            out.push(t);
        }
        reach = reach.max(last[&v]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{named, Budget, LatticeBox, LatticeBoxSpec};
    use crate::rng::RngStream;
    use proptest::prelude::*;

    /// Erasure by the inductive rule: next vertex follows the last visit to
    /// the current one.
    fn inductive_erasure(p: &[usize]) -> Vec<usize> {
        let mut out = vec![p[0]];
        loop {
            let u = *out.last().unwrap();
            let k = p.iter().rposition(|&v| v == u).unwrap();
            if k + 1 == p.len() {
                return out;
            }
            out.push(p[k + 1]);
        }
    }

    fn brute_cut_times(p: &[usize]) -> Vec<usize> {
        (0..p.len())
            .filter(|&t| p[..t].iter().all(|v| !p[t + 1..].contains(v)))
            .collect()
    }

    #[test]
    fn loop_erasure_examples() {
        assert_eq!(loop_erase_seq(&['a', 'b', 'a', 'c']), vec!['a', 'c']);
        assert_eq!(loop_erase_seq(&[0, 1, 2, 1, 0, 3]), vec![0, 3]);
        assert_eq!(loop_erase_seq(&[4, 5, 6]), vec![4, 5, 6]);
        assert_eq!(loop_erase_seq(&[7]), vec![7]);
    }

    #[test]
    fn cut_time_examples() {
        assert_eq!(cut_times_seq(&[0, 1, 2, 3]), vec![0, 1, 2, 3]);
        assert!(!cut_times_seq(&[0, 1, 0]).contains(&1));
        let c = cut_times_seq(&[0, 1, 2, 1, 3]);
        assert!(c.contains(&0));
        assert!(!c.contains(&2));
        assert_eq!(c, brute_cut_times(&[0, 1, 2, 1, 3]));
    }

    #[test]
    fn start_in_target_gives_empty_walk() {
        let g = named::cycle(5);
        let mut rng = RngStream::new(1, 0).rng();
        let p = run_srw(&g, 2, &StopRule::HitSet(vec![2, 4]), 100, &mut rng).unwrap();
        assert_eq!(p.length(), 0);
    }

    #[test]
    fn wired_walk_is_absorbed() {
        let lb = LatticeBox::new(LatticeBoxSpec::wired(1, 1), &Budget::default()).unwrap();
        let mut rng = RngStream::new(2, 0).rng();
        for _ in 0..100 {
            let p = run_srw(&lb, lb.origin(), &StopRule::HitWired, 1000, &mut rng).unwrap();
            assert_eq!(p.last(), lb.wired());
            assert!(p.is_walk_in(&lb));
        }
    }

    #[test]
    fn two_steps_on_a_line_return_half_the_time() {
        let g = named::path(101);
        let mut rng = RngStream::new(3, 0).rng();
        let n = 40_000;
        let back = (0..n)
            .filter(|_| {
                let p = run_srw(&g, 50, &StopRule::FixedSteps(2), 10, &mut rng).unwrap();
                p.last() == Some(50)
            })
            .count() as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((back / n as f64 - 0.5).abs() < 4.0 * se);
    }

    #[test]
    fn step_caps_are_resource_errors() {
        let g = Graph2::disconnected();
        let mut rng = RngStream::new(4, 0).rng();
        let err = run_srw(&g, 0, &StopRule::HitSet(vec![3]), 1000, &mut rng).unwrap_err();
        assert!(err.is_resource());
        let err = run_srw(&g, 0, &StopRule::FixedSteps(2000), 1000, &mut rng).unwrap_err();
        assert!(err.is_resource());
    }

    struct Graph2;
    impl Graph2 {
        fn disconnected() -> crate::graph::Graph {
            crate::graph::Graph::from_edges(4, &[(0, 1), (2, 3)], None).unwrap()
        }
    }

    #[test]
    fn marked_loops() {
        let l = MarkedLoop::new(Path::new(vec![0, 1, 0]), Mark::Step(1)).unwrap();
        assert_eq!(l.weight(2), 1.0 / 16.0);
        assert!(MarkedLoop::new(Path::new(vec![0, 1, 0]), Mark::Step(2)).is_err());
        assert!(MarkedLoop::new(Path::new(vec![0, 1, 0]), Mark::Time(2)).is_ok());
        assert!(MarkedLoop::new(Path::new(vec![0, 1]), Mark::Time(0)).is_err());
    }

    proptest! {
        #[test]
        fn erasure_laws(p in proptest::collection::vec(0usize..6, 1..60)) {
            let le = loop_erase_seq(&p);
            prop_assert_eq!(&le, &inductive_erasure(&p));
            prop_assert_eq!(loop_erase_seq(&le), le.clone());
            prop_assert!(Path::new(le.clone()).is_simple());
            prop_assert_eq!(le[0], p[0]);
            prop_assert_eq!(le.last(), p.last());
            // subsequence
            let mut it = p.iter();
            prop_assert!(le.iter().all(|v| it.any(|w| w == v)));
            // the part before the first revisit is already loop-free
            let mut seen = std::collections::HashSet::new();
            let first_repeat = p.iter().position(|v| !seen.insert(*v)).unwrap_or(p.len());
            prop_assert_eq!(loop_erase_seq(&p[..first_repeat]), p[..first_repeat].to_vec());
        }

        #[test]
        fn cut_times_match_definition(p in proptest::collection::vec(0usize..8, 1..40)) {
            prop_assert_eq!(cut_times_seq(&p), brute_cut_times(&p));
            let le = loop_erase_seq(&p);
            prop_assert_eq!(cut_times_seq(&le), (0..le.len()).collect::<Vec<_>>());
        }
    }
}
