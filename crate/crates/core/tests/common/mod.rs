//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use forestlab_core::graph::Graph;
use forestlab_core::resistance::UnitFlow;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// Two-terminal network built by series and parallel composition, with
/// its resistance computed by the composition rules alone.
pub struct SpNetwork {
    pub graph: Graph,
    pub s: usize,
    pub t: usize,
    pub resistance: f64,
}

pub fn random_series_parallel<R: Rng>(edges: usize, rng: &mut R) -> SpNetwork {
    let mut list = Vec::new();
    let mut n = 2;
    let resistance = compose(0, 1, edges.max(1), &mut n, &mut list, rng);
    SpNetwork {
        graph: Graph::from_edges(n, &list, None).unwrap(),
        s: 0,
        t: 1,
        resistance,
    }
}

fn compose<R: Rng>(
    s: usize,
    t: usize,
    m: usize,
    n: &mut usize,
    list: &mut Vec<(usize, usize)>,
    rng: &mut R,
) -> f64 {
    if m == 1 {
        list.push((s, t));
        return 1.0;
    }
    let k = rng.random_range(1..m);
    if rng.random_bool(0.5) {
        let v = *n;
        *n += 1;
        compose(s, v, k, n, list, rng) + compose(v, t, m - k, n, list, rng)
    } else {
        let a = compose(s, t, k, n, list, rng);
        let b = compose(s, t, m - k, n, list, rng);
        a * b / (a + b)
    }
}

/// Random attachment tree plus `extra` uniformly placed edges (parallel
/// edges allowed, loops not).
pub fn random_connected_graph<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((order[i], order[j]));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let mut v = rng.random_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        edges.push((u, v));
    }
    Graph::from_edges(n, &edges, None).unwrap()
}

/// Edge boundary of a random connected vertex set grown from `a` that
/// avoids `b`.
pub fn random_cut<R: Rng>(g: &Graph, a: usize, b: usize, rng: &mut R) -> Vec<usize> {
    let n = g.vertex_count();
    let mut inside = vec![false; n];
    inside[a] = true;
    let target = rng.random_range(1..n);
    for _ in 1..target {
        let frontier: Vec<usize> = (0..n)
            .filter(|&v| !inside[v] && v != b && g.neighbors(v).any(|(w, _)| inside[w]))
            .collect();
        if frontier.is_empty() {
            break;
        }
        inside[*frontier.choose(rng).unwrap()] = true;
    }
    (0..g.edge_count())
        .filter(|&e| {
            let (u, v) = g.edge(e);
            inside[u] != inside[v]
        })
        .collect()
}

/// Unit flow from `a` to `b`: a convex combination of random simple paths
/// plus random circulations around cycles closed by non-tree edges.
pub fn random_unit_flow<R: Rng>(g: &Graph, a: usize, b: usize, rng: &mut R) -> UnitFlow {
    let mut flow = vec![0.0; g.edge_count()];
    let paths = rng.random_range(1..4);
    let weights: Vec<f64> = (0..paths).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let path = random_path(g, a, b, rng);
        push_along(g, &path, w / total, &mut flow);
    }
    for _ in 0..rng.random_range(0..3) {
        let e = rng.random_range(0..g.edge_count());
        let (u, v) = g.edge(e);
        // u -> v along e, then back from v to u along some path
        let back = random_path(g, v, u, rng);
        let amount = rng.random_range(-0.5..0.5);
        flow[e] += amount;
        push_along(g, &back, amount, &mut flow);
    }
    UnitFlow { flow }
}

fn push_along(g: &Graph, path: &[(usize, usize)], amount: f64, flow: &mut [f64]) {
    for &(from, e) in path {
        let (u, _) = g.edge(e);
        flow[e] += if u == from { amount } else { -amount };
    }
}

/// Random simple path as `(tail vertex, edge)` steps, via a randomized
/// depth-first search.
fn random_path<R: Rng>(g: &Graph, a: usize, b: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut stack: Vec<(usize, Vec<(usize, usize)>)> = vec![(a, g.neighbors(a).collect())];
    let mut steps: Vec<(usize, usize)> = Vec::new();
    seen[a] = true;
    stack[0].1.shuffle(rng);
    while let Some((v, options)) = stack.last_mut() {
        if *v == b {
            return steps;
        }
        let v = *v;
        match options.pop() {
            Some((w, e)) if !seen[w] => {
                seen[w] = true;
                steps.push((v, e));
                let mut next: Vec<(usize, usize)> = g.neighbors(w).collect();
                next.shuffle(rng);
                stack.push((w, next));
            }
            Some(_) => {}
            None => {
                stack.pop();
                steps.pop();
            }
        }
    }
    panic!("no path from {a} to {b}");
}

/// Spanning trees by checking every `(n-1)`-subset of edges for acyclicity.
pub fn brute_force_trees(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let m = g.edge_count();
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(
        g: &Graph,
        n: usize,
        m: usize,
        next: usize,
        pick: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pick.len() == n - 1 {
            let mut root: Vec<usize> = (0..n).collect();
            fn find(r: &mut [usize], mut x: usize) -> usize {
                while r[x] != x {
                    x = r[x];
                }
                x
            }
            for &e in pick.iter() {
                let (u, v) = g.edge(e);
                let (a, b) = (find(&mut root, u), find(&mut root, v));
                if a == b {
                    return;
                }
                root[a] = b;
            }
            out.push(pick.clone());
            return;
        }
        for e in next..m {
            if m - e < n - 1 - pick.len() {
                break;
            }
            pick.push(e);
            rec(g, n, m, e + 1, pick, out);
            pick.pop();
        }
    }
    if n > 0 {
        rec(g, n, m, 0, &mut pick, &mut out);
    }
    out
}
