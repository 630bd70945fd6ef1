use super::Topology;

/// Marker label for vertices outside the subgraph (e.g. a deleted wired vertex).
const UNLABELED: u32 = u32::MAX;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Component labels of a subgraph.
///
/// Labels are dense, `0..count`, and numbered in increasing order of the
/// smallest vertex id in each component, so two maps describing the same
/// partition are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMap {
    labels: Vec<u32>,
    count: usize,
}

impl ComponentMap {
    /// Canonicalizes representative keys (`None` = vertex absent). Keys must
    /// be vertex ids, i.e. `< keys.len()`.
    pub fn from_keys(keys: impl IntoIterator<Item = Option<usize>>) -> Self {
        let keys: Vec<Option<usize>> = keys.into_iter().collect();
        let mut relabel = vec![UNLABELED; keys.len()];
        let mut count = 0u32;
        let labels = keys
            .iter()
            .map(|k| match *k {
                None => UNLABELED,
                Some(k) => {
                    if relabel[k] == UNLABELED {
                        relabel[k] = count;
                        count += 1;
                    }
                    relabel[k]
                }
            })
            .collect();
        Self {
            labels,
            count: count as usize,
        }
    }

    pub fn from_union_find(uf: &mut UnionFind, absent: Option<usize>) -> Self {
        let n = uf.parent.len();
        Self::from_keys((0..n).map(|v| (Some(v) != absent).then(|| uf.find(v))))
    }

    /// Labels from parent pointers (`None` for roots). `absent` marks a
    /// vertex that belongs to no component. The pointers must be acyclic.
    pub fn from_parents(parent: &[Option<usize>], absent: Option<usize>) -> Self {
        Self::from_parent_fn(parent.len(), |v| parent[v], absent)
    }

    pub fn from_parent_fn(
        n: usize,
        parent: impl Fn(usize) -> Option<usize>,
        absent: Option<usize>,
    ) -> Self {
        let mut root = vec![UNLABELED; n];
        let mut stack = Vec::new();
        for v in 0..n {
            if Some(v) == absent || root[v] != UNLABELED {
                continue;
            }
            let mut x = v;
            while root[x] == UNLABELED {
                match parent(x) {
                    Some(p) => {
                        stack.push(x);
                        x = p;
                    }
                    None => root[x] = x as u32,
                }
            }
            let r = root[x];
            for y in stack.drain(..) {
                root[y] = r;
            }
        }
        Self::from_keys((0..n).map(|v| (Some(v) != absent).then(|| root[v] as usize)))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn label(&self, v: usize) -> Option<usize> {
        let l = self.labels[v];
        (l != UNLABELED).then_some(l as usize)
    }

    #[inline]
    pub fn same(&self, u: usize, v: usize) -> bool {
        let (a, b) = (self.labels[u], self.labels[v]);
        a != UNLABELED && a == b
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.count];
        for &l in &self.labels {
            if l != UNLABELED {
                s[l as usize] += 1;
            }
        }
        s
    }

    /// Vertices with label `label`, increasing.
    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&v| self.labels[v] == label as u32)
            .collect()
    }

    /// All components as sorted vertex lists, indexed by label.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.count];
        for (v, &l) in self.labels.iter().enumerate() {
            if l != UNLABELED {
                g[l as usize].push(v);
            }
        }
        g
    }
}

/// Connected components of the spanning subgraph selected by `mask`
/// (indexed by edge id). Every vertex gets a label.
pub fn components<T: Topology + ?Sized>(g: &T, mask: &[bool]) -> ComponentMap {
    let mut uf = UnionFind::new(g.vertex_count());
    for (e, &on) in mask.iter().enumerate().take(g.edge_id_bound()) {
        if on {
            if let Some((u, v)) = g.endpoints(e) {
                uf.union(u, v);
            }
        }
    }
    ComponentMap::from_union_find(&mut uf, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    #[test]
    fn empty_and_full_masks() {
        let g = named::cycle(5);
        assert_eq!(components(&g, &[false; 5]).count(), 5);
        assert_eq!(components(&g, &[true; 5]).count(), 1);
    }

    #[test]
    fn four_cycle_opposite_edges() {
        let g = named::cycle(4);
        let c = components(&g, &[true, false, true, false]);
        assert_eq!(c.count(), 2);
        assert_eq!(c.sizes(), vec![2, 2]);
        assert!(c.same(0, 1) && c.same(2, 3) && !c.same(1, 2));
        assert_eq!(c.label(0), Some(0));
    }

    #[test]
    fn parents_and_union_find_agree() {
        let parent = vec![None, Some(0), Some(1), None, Some(3), Some(0)];
        let a = ComponentMap::from_parents(&parent, None);
        let mut uf = UnionFind::new(6);
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                uf.union(v, *p);
            }
        }
        assert_eq!(a, ComponentMap::from_union_find(&mut uf, None));
        assert_eq!(a.groups(), vec![vec![0, 1, 2, 5], vec![3, 4]]);
    }

    #[test]
    fn absent_vertex_is_unlabeled() {
        let parent = vec![Some(2), Some(2), None];
        let c = ComponentMap::from_parents(&parent, Some(2));
        assert_eq!(c.label(2), None);
        assert!(!c.same(2, 2));
    }
}
