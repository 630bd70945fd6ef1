//! Two-sided wired spanning forests in a wired box.
//!
//! A two-sided loop-erased walk through the origin (the trunk) is used as
//! the first branch; the rest of the forest is ordinary Wilson rooted at the
//! trunk and the wired vertex. The trunk is contracted virtually: its
//! vertices simply start out in the tree.

use rand::Rng;
use rustc_hash::FxHashSet;

use super::{SpanningForest, WilsonSampler};
use crate::error::{Error, Result};
use crate::graph::{LatticeBox, Topology};
use crate::walk::{
    loop_erase, run_srw, two_sided_lerw, Path, StopRule, TwoSidedLerwConfig, DEFAULT_MAX_STEPS,
};

/// Where the trunk comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrunkSource {
    /// Two-sided walk on the unbounded lattice with the given horizon,
    /// clipped to the box.
    Lattice { horizon: usize },
    /// Two-sided walk inside the box, both walks killed at the wired vertex.
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoSidedConfig {
    pub trunk: TrunkSource,
    pub attempt_cap: u64,
}

impl Default for TwoSidedConfig {
    fn default() -> Self {
        Self {
            trunk: TrunkSource::Box,
            attempt_cap: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoSidedWsfSample {
    pub forest: SpanningForest,
    /// Trunk as box vertex ids; `origin_offset` indexes the box origin.
    pub trunk: Path,
    /// `(o, v, edge id)` for samples from the coupled construction.
    pub origin_edge: Option<(usize, usize, usize)>,
    /// The lattice trunk left the box and was cut at the first exit.
    pub clipped: bool,
    pub attempts: u64,
}

fn check_dim(lb: &LatticeBox) -> Result<usize> {
    if !lb.is_wired() {
        return Err(Error::domain("two-sided forests need a wired box"));
    }
    if lb.dim() < 5 {
        return Err(Error::domain(format!(
            "two-sided forests need d >= 5 (got d = {})",
            lb.dim()
        )));
    }
    Ok(lb.wired().expect("wired box"))
}

/// Contiguous in-box stretch of a lattice path around its origin index.
fn clip_to_box(lb: &LatticeBox, path: &crate::walk::LatticePath) -> (Path, bool) {
    let inside = |i: usize| lb.vertex_id(path.point(i));
    let o = path.origin_offset;
    let mut lo = o;
    while lo > 0 && inside(lo - 1).is_some() {
        lo -= 1;
    }
    let mut hi = o;
    while hi + 1 < path.point_count() && inside(hi + 1).is_some() {
        hi += 1;
    }
    let clipped = lo > 0 || hi + 1 < path.point_count();
    let vertices = (lo..=hi).map(|i| inside(i).expect("in box")).collect();
    (
        Path {
            vertices,
            origin_offset: o - lo,
        },
        clipped,
    )
}

/// Two-sided walk inside the box: returns the trunk when the erasure of
/// the first walk avoids the second walk (before absorption).
fn box_trunk<R: Rng + ?Sized>(lb: &LatticeBox, w: usize, rng: &mut R) -> Result<Option<Path>> {
    let o = lb.origin();
    let s1 = run_srw(lb, o, &StopRule::HitWired, DEFAULT_MAX_STEPS, rng)?;
    let mut le1 = loop_erase(&s1).vertices;
    le1.pop();
    let forbidden: FxHashSet<usize> = le1.iter().copied().collect();
    let mut s2 = vec![o];
    let mut x = o;
    loop {
        x = lb.step(x, rng.random_range(0..lb.degree(x)));
        if x == w {
            break;
        }
        if forbidden.contains(&x) {
            return Ok(None);
        }
        s2.push(x);
    }
    let mut vertices = loop_erase(&Path::new(s2)).vertices;
    let origin_offset = vertices.len() - 1;
    vertices.reverse();
    vertices.extend_from_slice(&le1[1..]);
    Ok(Some(Path {
        vertices,
        origin_offset,
    }))
}

/// Samples the trunk, then runs Wilson rooted at the trunk and the wired
/// vertex. The trunk's tree is rooted at the origin.
pub fn two_sided_wsf<R: Rng + ?Sized>(
    lb: &LatticeBox,
    config: &TwoSidedConfig,
    sampler: &mut WilsonSampler,
    rng: &mut R,
) -> Result<TwoSidedWsfSample> {
    let w = check_dim(lb)?;
    let (trunk, clipped, attempts) = match config.trunk {
        TrunkSource::Lattice { horizon } => {
            if horizon < lb.radius() {
                return Err(Error::contract(format!(
                    "horizon {horizon} is shorter than the box radius {}",
                    lb.radius()
                )));
            }
            let cfg = TwoSidedLerwConfig {
                horizon,
                attempt_cap: config.attempt_cap,
            };
            let s = two_sided_lerw(lb.dim(), &cfg, rng)?;
            let (trunk, clipped) = clip_to_box(lb, &s.path);
            (trunk, clipped, s.attempts)
        }
        TrunkSource::Box => {
            let mut found = None;
            for attempt in 1..=config.attempt_cap {
                if let Some(t) = box_trunk(lb, w, rng)? {
                    found = Some((t, false, attempt));
                    break;
                }
            }
            found.ok_or_else(|| Error::Statistical {
                attempts: config.attempt_cap,
                reason: "no accepted two-sided walk in the box".into(),
            })?
        }
    };
    let o = lb.origin();
    sampler.reset(&[o, w]);
    let k = trunk.origin_offset;
    let forward: Vec<usize> = trunk.vertices[k..].to_vec();
    let backward: Vec<usize> = trunk.vertices[..=k].iter().rev().copied().collect();
    sampler.graft_path(lb, &forward)?;
    sampler.graft_path(lb, &backward)?;
    for v in 0..lb.vertex_count() {
        sampler.attach(lb, v, rng);
    }
    Ok(TwoSidedWsfSample {
        forest: sampler.to_forest(Some(w))?,
        trunk,
        origin_edge: None,
        clipped,
        attempts,
    })
}

/// The coupled construction: Wilson's first branch from `o`, one step of an
/// independent walk to a neighbor `v` off that branch, then the branch from
/// `v`, accepted when it reaches the wired vertex without touching the
/// first branch. The rest is ordinary Wilson; finally the edge `(o, v)` is
/// added.
pub fn coupled_two_sided_wsf<R: Rng + ?Sized>(
    lb: &LatticeBox,
    attempt_cap: u64,
    sampler: &mut WilsonSampler,
    rng: &mut R,
) -> Result<TwoSidedWsfSample> {
    let w = check_dim(lb)?;
    let o = lb.origin();
    for attempt in 1..=attempt_cap {
        sampler.reset(&[w]);
        sampler.attach(lb, o, rng);
        let slot = rng.random_range(0..lb.degree(o));
        let (v, e) = lb.incident(o, slot);
        if sampler.in_tree(v) {
            continue;
        }
        let first: FxHashSet<usize> = sampler.tree_vertices().collect();
        sampler.attach(lb, v, rng);
        let mut branch = vec![v];
        let mut x = v;
        let mut hit_first = false;
        while let Some((p, _)) = sampler.parent(x) {
            if p == w {
                break;
            }
            if first.contains(&p) {
                hit_first = true;
                break;
            }
            branch.push(p);
            x = p;
        }
        if hit_first {
            continue;
        }
        for u in 0..lb.vertex_count() {
            sampler.attach(lb, u, rng);
        }
        let mut forest_parent: Vec<Option<(usize, usize)>> = (0..lb.vertex_count())
            .map(|u| sampler.parent(u).filter(|&(p, _)| p != w))
            .collect();
        forest_parent[w] = None;
        // re-root v's tree at v, then hang it below o
        for pair in branch.windows(2).rev() {
            let (child, up) = (pair[0], pair[1]);
            let edge = forest_parent[child].expect("branch edge").1;
            forest_parent[up] = Some((child, edge));
        }
        forest_parent[v] = Some((o, e));
        let forest = SpanningForest::from_parents(lb, &forest_parent, Some(w))?;
        let mut vertices = branch.clone();
        vertices.reverse();
        let origin_offset = vertices.len();
        let mut up = forest.path_to_root(o);
        vertices.append(&mut up);
        return Ok(TwoSidedWsfSample {
            forest,
            trunk: Path {
                vertices,
                origin_offset,
            },
            origin_edge: Some((o, v, e)),
            clipped: false,
            attempts: attempt,
        });
    }
    Err(Error::Statistical {
        attempts: attempt_cap,
        reason: "coupling event never occurred".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Budget, LatticeBoxSpec};
    use crate::rng::RngStream;
    use crate::stats::chi_square_two_sample;

    fn check_sample(lb: &LatticeBox, s: &TwoSidedWsfSample) {
        let labels = s.forest.components();
        let t0 = labels.label(s.trunk.vertices[0]);
        assert!(s.trunk.vertices.iter().all(|&v| labels.label(v) == t0));
        assert!(s.trunk.is_simple());
        assert!(s.trunk.is_walk_in(lb));
        assert_eq!(s.trunk.vertices[s.trunk.origin_offset], lb.origin());
        assert_eq!(s.forest.edge_count(), lb.box_size() - labels.count());
    }

    #[test]
    fn structure_of_both_samplers() {
        let lb = LatticeBox::new(LatticeBoxSpec::wired(5, 2), &Budget::default()).unwrap();
        let mut sampler = WilsonSampler::new(lb.vertex_count());
        let mut rng = RngStream::new(1, 0).rng();
        for trunk in [TrunkSource::Box, TrunkSource::Lattice { horizon: 500 }] {
            let cfg = TwoSidedConfig {
                trunk,
                attempt_cap: 1000,
            };
            for _ in 0..10 {
                let s = two_sided_wsf(&lb, &cfg, &mut sampler, &mut rng).unwrap();
                check_sample(&lb, &s);
                if let TrunkSource::Lattice { .. } = trunk {
                    assert!(s.clipped);
                }
            }
        }
        for _ in 0..10 {
            let s = coupled_two_sided_wsf(&lb, 1000, &mut sampler, &mut rng).unwrap();
            check_sample(&lb, &s);
            let (o, v, e) = s.origin_edge.unwrap();
            assert_eq!(s.forest.parent(v), Some(o));
            assert_eq!(s.forest.parent_edge(v), Some(e));
        }
    }

    #[test]
    fn low_dimension_rejected() {
        let lb = LatticeBox::new(LatticeBoxSpec::wired(3, 2), &Budget::default()).unwrap();
        let mut sampler = WilsonSampler::new(lb.vertex_count());
        let mut rng = RngStream::new(1, 0).rng();
        assert!(two_sided_wsf(&lb, &TwoSidedConfig::default(), &mut sampler, &mut rng).is_err());
    }

    /// Statistic of the origin's component near the origin: the number of
    /// forest edges at `o` and the number of neighbors in its component.
    fn local_cell(lb: &LatticeBox, f: &SpanningForest) -> usize {
        let o = lb.origin();
        let mut deg = 0;
        let mut same = 0;
        for s in 0..lb.degree(o) {
            let (u, e) = lb.incident(o, s);
            if f.parent_edge(u) == Some(e) || f.parent_edge(o) == Some(e) {
                deg += 1;
            }
            if f.components().same(o, u) {
                same += 1;
            }
        }
        deg * 16 + same
    }

    #[test]
    fn coupling_matches_box_trunk_law() {
        let lb = LatticeBox::new(LatticeBoxSpec::wired(5, 2), &Budget::default()).unwrap();
        let mut sampler = WilsonSampler::new(lb.vertex_count());
        let mut rng = RngStream::new(7, 0).rng();
        let n = 6000;
        let mut a = vec![0u64; 16 * 16];
        let mut b = vec![0u64; 16 * 16];
        let cfg = TwoSidedConfig::default();
        for _ in 0..n {
            let s = two_sided_wsf(&lb, &cfg, &mut sampler, &mut rng).unwrap();
            a[local_cell(&lb, &s.forest)] += 1;
            let s = coupled_two_sided_wsf(&lb, 1000, &mut sampler, &mut rng).unwrap();
            b[local_cell(&lb, &s.forest)] += 1;
        }
        let test = chi_square_two_sample(&a, &b);
        assert!(test.p_value > 1e-3, "{test:?}");
    }
}
