use std::collections::HashMap;

use forestlab_core::analysis::{
    bush_joins, cut_sets_and_j, join_counts, ray_decompose, resistance_growth_profile, tail_sum,
    two_sided_cut_check,
};
use forestlab_core::graph::{Budget, LatticeBoxSpec};
use forestlab_core::graph::{LatticeBox, Topology};
use forestlab_core::resistance::effective_resistance;
use forestlab_core::wilson::{coupled_two_sided_wsf, wsf_wired_box, WilsonSampler};
use forestlab_core::RngStream;

#[test]
fn cut_sets_follow_their_definition() {
    let spec = LatticeBoxSpec::wired(5, 3);
    let mut rng = RngStream::new(1, 0).rng();
    let mut nontrivial = 0;
    for _ in 0..15 {
        let (lb, f) = wsf_wired_box(spec, &Budget::default(), &mut rng).unwrap();
        let g = lb.to_graph().unwrap();
        let o = lb.origin();
        let d = ray_decompose(&f, o).unwrap();
        let ray = f.path_to_root(o);
        let pos: HashMap<usize, usize> = ray.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let tree: Vec<usize> = f.components().members(f.components().label(o).unwrap());
        let mut bush = HashMap::new();
        for &u in &tree {
            let first = f
                .path_to_root(u)
                .into_iter()
                .find(|x| pos.contains_key(x))
                .unwrap();
            bush.insert(u, pos[&first]);
            assert_eq!(d.bush_index(u), Some(pos[&first]));
        }
        let spans: Vec<(usize, usize, usize)> = (0..g.edge_count())
            .filter_map(|e| {
                let (u, v) = g.edge(e);
                let (a, b) = (*bush.get(&u)?, *bush.get(&v)?);
                (a != b).then(|| (a.min(b), a.max(b), e))
            })
            .collect();
        assert_eq!(bush_joins(&lb, &d).len(), spans.len());
        let cuts = cut_sets_and_j(&lb, &d);
        assert_eq!(cuts.len(), d.truncation);
        for k in 0..cuts.len() {
            let mut expect: Vec<usize> = spans
                .iter()
                .filter(|s| s.0 <= k && k < s.1)
                .map(|s| s.2)
                .collect();
            expect.sort();
            assert_eq!(cuts.cut_set(k), expect);
            // every join edge lies in exactly `high - low` cut sets of the full ray
            let j: u64 = spans
                .iter()
                .filter(|s| s.0 <= k && k < s.1)
                .map(|s| (0..ray.len()).filter(|&q| s.0 <= q && q < s.1).count() as u64)
                .sum();
            assert_eq!(cuts.weights[k], j);
        }
        for n in 0..=d.truncation {
            let counts = join_counts(&lb, &d, n).unwrap();
            for m in 1..4 {
                let direct = spans.iter().filter(|s| s.0 <= n && s.1 >= n + m).count() as u64;
                assert_eq!(counts.tail_sum(m), direct);
                assert_eq!(tail_sum(&bush_joins(&lb, &d), n, m), direct);
            }
        }
        // R(o, Ray(n)) within the tree's induced graph, solved from scratch
        let (h, _) = g.induced_subgraph(&tree);
        let local = |v: usize| tree.iter().position(|&x| x == v).unwrap();
        let rows = resistance_growth_profile(&lb, &d, d.truncation).unwrap();
        for row in rows {
            let r = effective_resistance(&h, &[local(o)], &[local(ray[row.n])]).unwrap();
            assert!((r - row.resistance).abs() <= 1e-9 * r);
            assert!(row.lower_bound <= r + 1e-9);
            assert!(r <= row.n as f64 + 1e-9);
            nontrivial += 1;
        }
    }
    assert!(nontrivial > 0);
}

#[test]
fn one_sided_cut_sets_sit_inside_two_sided_ones() {
    let lb = LatticeBox::new(LatticeBoxSpec::wired(5, 2), &Budget::default()).unwrap();
    let mut sampler = WilsonSampler::new(lb.vertex_count());
    let mut rng = RngStream::new(2, 0).rng();
    let mut checked = 0;
    for _ in 0..30 {
        let s = coupled_two_sided_wsf(&lb, 10_000, &mut sampler, &mut rng).unwrap();
        let report = two_sided_cut_check(&lb, &s).unwrap();
        assert!(report.violations.is_empty(), "{report:?}");
        checked += report.checked;
    }
    assert!(checked > 0);
}
