use super::{ComponentMap, Topology};
use crate::error::{Error, Result};
use crate::wilson::SpanningForest;

/// The largest subgraph of `base` with the same vertex set and the same
/// components as a given forest: an edge is kept iff both endpoints lie in
/// one forest component.
#[derive(Debug, Clone)]
pub struct InducedComponentGraph<'g, T: Topology + ?Sized> {
    pub base: &'g T,
    pub edge_mask: Vec<bool>,
    pub components: ComponentMap,
}

impl<T: Topology + ?Sized> InducedComponentGraph<'_, T> {
    pub fn edge_count(&self) -> usize {
        self.edge_mask.iter().filter(|&&b| b).count()
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edge_mask.get(e).copied().unwrap_or(false)
    }
}

/// Mask of the edges of `g` whose endpoints share a label in `partition`.
pub fn induced_mask<T: Topology + ?Sized>(g: &T, partition: &ComponentMap) -> Vec<bool> {
    (0..g.edge_id_bound())
        .map(|e| g.endpoints(e).is_some_and(|(u, v)| partition.same(u, v)))
        .collect()
}

pub fn induced_component_graph<'g, T: Topology + ?Sized>(
    g: &'g T,
    forest: &SpanningForest,
) -> Result<InducedComponentGraph<'g, T>> {
    if forest.vertex_count() != g.vertex_count() {
        return Err(Error::contract(format!(
            "forest spans {} vertices, graph has {}",
            forest.vertex_count(),
            g.vertex_count()
        )));
    }
    if let Some(a) = forest.absent() {
        if Some(a) != g.wired_vertex() {
            return Err(Error::contract(format!(
                "forest omits vertex {a}, which is not the wired vertex of the graph"
            )));
        }
    }
    let components = forest.components().clone();
    Ok(InducedComponentGraph {
        base: g,
        edge_mask: induced_mask(g, &components),
        components,
    })
}
