//! Exact law of loop-erased random walk on a small finite graph.
//!
//! The running loop erasure of a walk is itself a Markov chain whose states
//! are simple paths from the start; stopping at the target makes it an
//! absorbing chain, solved here with one dense linear system.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;

const MAX_STATES: usize = 20_000;

/// Law of `LE[walk from a stopped on first hitting b]`, as
/// `(path, probability)` pairs in lexicographic order of the path.
pub fn lerw_law(g: &Graph, a: usize, b: usize) -> Result<Vec<(Vec<usize>, f64)>> {
    let n = g.vertex_count();
    if a >= n || b >= n {
        return Err(Error::contract("endpoints out of range"));
    }
    if a == b {
        return Ok(vec![(vec![a], 1.0)]);
    }
    if !g.reachable_from(&[a], |_| true)[b] {
        return Err(Error::domain(format!("{b} is unreachable from {a}")));
    }
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut states: Vec<Vec<usize>> = vec![vec![a]];
    index.insert(vec![a], 0);
    // transient transitions and absorption weights per state
    let mut trans: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut absorb: Vec<Vec<(Vec<usize>, f64)>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let path = states[i].clone();
        let x = *path.last().unwrap();
        let w = 1.0 / g.degree(x) as f64;
        let mut tr = Vec::new();
        let mut ab = Vec::new();
        for (y, _) in g.neighbors(x) {
            if y == b {
                let mut done = path.clone();
                done.push(b);
                ab.push((done, w));
                continue;
            }
            let next = match path.iter().position(|&v| v == y) {
                Some(p) => path[..=p].to_vec(),
                None => {
                    let mut p = path.clone();
                    p.push(y);
                    p
                }
            };
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if states.len() >= MAX_STATES {
                        return Err(Error::resource(
                            "loop-erased walk states",
                            states.len() as u128 + 1,
                            MAX_STATES as u128,
                        ));
                    }
                    index.insert(next.clone(), states.len());
                    states.push(next);
                    states.len() - 1
                }
            };
            tr.push((j, w));
        }
        trans.push(tr);
        absorb.push(ab);
        i += 1;
    }
    // expected visits y solve (I - Q)^T y = e_start
    let m = states.len();
    let mut mat = DMatrix::<f64>::identity(m, m);
    for (i, tr) in trans.iter().enumerate() {
        for &(j, w) in tr {
            mat[(j, i)] -= w;
        }
    }
    let mut rhs = DVector::<f64>::zeros(m);
    rhs[0] = 1.0;
    let visits = mat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::domain("absorbing system is singular"))?;
    let mut law: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (i, ab) in absorb.into_iter().enumerate() {
        for (path, w) in ab {
            *law.entry(path).or_insert(0.0) += visits[i] * w;
        }
    }
    Ok(law.into_iter().collect())
}
