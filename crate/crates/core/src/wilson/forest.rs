use std::collections::VecDeque;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{ComponentMap, Topology};

const NONE: u32 = u32::MAX;

/// Rooted spanning forest stored as parent pointers.
///
/// `absent` is a vertex of the host graph that the forest leaves out (the
/// deleted wired vertex); it has no parent, is not a root and carries no
/// component label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningForest {
    parent: Vec<u32>,
    parent_edge: Vec<u32>,
    roots: Vec<usize>,
    absent: Option<usize>,
    components: ComponentMap,
}

impl SpanningForest {
    /// Trusted constructor for acyclic pointer arrays produced by samplers.
    pub(crate) fn from_raw(parent: Vec<u32>, parent_edge: Vec<u32>, absent: Option<usize>) -> Self {
        let n = parent.len();
        let roots = (0..n)
            .filter(|&v| parent[v] == NONE && Some(v) != absent)
            .collect();
        let components = ComponentMap::from_parent_fn(
            n,
            |v| (parent[v] != NONE).then_some(parent[v] as usize),
            absent,
        );
        Self {
            parent,
            parent_edge,
            roots,
            absent,
            components,
        }
    }

    /// Validated constructor: `parent[v] = Some((p, e))` where `e` must join
    /// `v` and `p` in `g`. Fails on cycles or foreign edges.
    pub fn from_parents<T: Topology + ?Sized>(
        g: &T,
        parent: &[Option<(usize, usize)>],
        absent: Option<usize>,
    ) -> Result<Self> {
        let n = g.vertex_count();
        if parent.len() != n {
            return Err(Error::contract(format!(
                "parent table has {} entries for {n} vertices",
                parent.len()
            )));
        }
        let mut p = vec![NONE; n];
        let mut pe = vec![NONE; n];
        for (v, entry) in parent.iter().enumerate() {
            if let Some((u, e)) = *entry {
                if Some(v) == absent || Some(u) == absent {
                    return Err(Error::contract(format!(
                        "vertex {v} links to the absent vertex"
                    )));
                }
                match g.endpoints(e) {
                    Some((a, b)) if (a, b) == (u, v) || (a, b) == (v, u) => {}
                    _ => {
                        return Err(Error::contract(format!(
                            "edge {e} does not join {v} and its parent {u}"
                        )))
                    }
                }
                p[v] = u as u32;
                pe[v] = e as u32;
            }
        }
        // 0 = unvisited, 1 = on the current trail, 2 = known to reach a root
        let mut state = vec![0u8; n];
        let mut trail = Vec::new();
        for v in 0..n {
            let mut x = v;
            loop {
                match state[x] {
                    1 => {
                        return Err(Error::contract(format!(
                            "parent pointers cycle through {x}"
                        )))
                    }
                    2 => break,
                    _ => {}
                }
                state[x] = 1;
                trail.push(x);
                if p[x] == NONE {
                    break;
                }
                x = p[x] as usize;
            }
            for y in trail.drain(..) {
                state[y] = 2;
            }
        }
        Ok(Self::from_raw(p, pe, absent))
    }

    /// Forest with the given edge set, each tree rooted at its smallest
    /// vertex. Fails if the edges contain a cycle or touch `absent`.
    pub fn from_edge_set<T: Topology + ?Sized>(
        g: &T,
        edges: &[usize],
        absent: Option<usize>,
    ) -> Result<Self> {
        let n = g.vertex_count();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for &e in edges {
            let (u, v) = g
                .endpoints(e)
                .ok_or_else(|| Error::contract(format!("edge {e} is not in the graph")))?;
            if Some(u) == absent || Some(v) == absent {
                return Err(Error::contract(format!(
                    "edge {e} touches the absent vertex"
                )));
            }
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        let mut parent = vec![NONE; n];
        let mut parent_edge = vec![NONE; n];
        let mut seen = vec![false; n];
        let mut tree_edges = 0usize;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if seen[s] || Some(s) == absent {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(w, e) in &adj[u] {
                    if e == parent_edge[u] as usize && parent[u] as usize == w {
                        continue;
                    }
                    if seen[w] {
                        return Err(Error::contract(format!(
                            "edge set contains a cycle through edge {e}"
                        )));
                    }
                    seen[w] = true;
                    parent[w] = u as u32;
                    parent_edge[w] = e as u32;
                    tree_edges += 1;
                    queue.push_back(w);
                }
            }
        }
        debug_assert_eq!(tree_edges, edges.len());
        Ok(Self::from_raw(parent, parent_edge, absent))
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn absent(&self) -> Option<usize> {
        self.absent
    }

    /// Roots in increasing vertex order, one per tree.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn components(&self) -> &ComponentMap {
        &self.components
    }

    #[inline]
    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parent[v];
        (p != NONE).then_some(p as usize)
    }

    #[inline]
    pub fn parent_edge(&self, v: usize) -> Option<usize> {
        let e = self.parent_edge[v];
        (e != NONE).then_some(e as usize)
    }

    pub fn is_root(&self, v: usize) -> bool {
        self.parent[v] == NONE && Some(v) != self.absent
    }

    pub fn edge_count(&self) -> usize {
        self.parent_edge.iter().filter(|&&e| e != NONE).count()
    }

    /// Edge ids of the forest, sorted.
    pub fn edge_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .parent_edge
            .iter()
            .filter(|&&e| e != NONE)
            .map(|&e| e as usize)
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn edge_mask(&self, edge_id_bound: usize) -> Vec<bool> {
        let mut mask = vec![false; edge_id_bound];
        for &e in &self.parent_edge {
            if e != NONE {
                mask[e as usize] = true;
            }
        }
        mask
    }

    /// Linear scan; use [`SpanningForest::edge_mask`] for repeated queries.
    pub fn contains_edge(&self, e: usize) -> bool {
        self.parent_edge.contains(&(e as u32))
    }

    /// Vertices from `v` up to and including its root.
    pub fn path_to_root(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut x = v;
        while let Some(p) = self.parent(x) {
            path.push(p);
            x = p;
        }
        path
    }

    pub fn root_of(&self, v: usize) -> usize {
        let mut x = v;
        while let Some(p) = self.parent(x) {
            x = p;
        }
        x
    }

    /// Children lists in CSR form: `(offsets, children)`.
    pub fn children(&self) -> (Vec<usize>, Vec<u32>) {
        let n = self.vertex_count();
        let mut offsets = vec![0usize; n + 1];
        for &p in &self.parent {
            if p != NONE {
                offsets[p as usize + 1] += 1;
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut children = vec![0u32; offsets[n]];
        for (v, &p) in self.parent.iter().enumerate() {
            if p != NONE {
                children[fill[p as usize]] = v as u32;
                fill[p as usize] += 1;
            }
        }
        (offsets, children)
    }
}

/// Writes `v parent edge` lines, roots first (as `v -1 -1`), then the other
/// vertices in increasing order. A leading comment records the vertex count
/// and the absent vertex.
pub fn write_forest<W: Write>(forest: &SpanningForest, mut out: W) -> std::io::Result<()> {
    match forest.absent {
        Some(a) => writeln!(out, "# vertices {} absent {a}", forest.vertex_count())?,
        None => writeln!(out, "# vertices {}", forest.vertex_count())?,
    }
    for &r in &forest.roots {
        writeln!(out, "{r} -1 -1")?;
    }
    for v in 0..forest.vertex_count() {
        if let (Some(p), Some(e)) = (forest.parent(v), forest.parent_edge(v)) {
            writeln!(out, "{v} {p} {e}")?;
        }
    }
    Ok(())
}

/// Reads the format of [`write_forest`] against a host graph.
pub fn parse_forest<T: Topology + ?Sized, R: BufRead>(g: &T, reader: R) -> Result<SpanningForest> {
    let n = g.vertex_count();
    let mut parent = vec![None; n];
    let mut absent = None;
    let mut listed = vec![false; n];
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let text = line.trim();
        if let Some(comment) = text.strip_prefix('#') {
            let words: Vec<&str> = comment.split_whitespace().collect();
            if let Some(pos) = words.iter().position(|&w| w == "absent") {
                let a = words
                    .get(pos + 1)
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or(Error::Parse {
                        line: lineno,
                        msg: "absent marker without a vertex id".into(),
                    })?;
                absent = Some(a);
            }
            continue;
        }
        if text.is_empty() {
            continue;
        }
        let fields: Vec<i64> = text
            .split_whitespace()
            .map(|w| w.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|err| Error::Parse {
                line: lineno,
                msg: err.to_string(),
            })?;
        let [v, p, e] = fields[..] else {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        };
        if v < 0 || v as usize >= n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("vertex {v} out of range"),
            });
        }
        let v = v as usize;
        if listed[v] {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("vertex {v} listed twice"),
            });
        }
        listed[v] = true;
        if p >= 0 {
            if e < 0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "parent without an edge id".into(),
                });
            }
            parent[v] = Some((p as usize, e as usize));
        }
    }
    SpanningForest::from_parents(g, &parent, absent)
}
