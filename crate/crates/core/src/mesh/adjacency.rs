use super::Mesh;

/// Edge-to-element and node-to-element incidence.
///
/// `edge2elem[e]` lists `(element, local edge position)`; `node2elem[n]` lists
/// the elements having `n` as a vertex (mid slots are not counted). Both are
/// indexed by slot, so free slots have empty lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyIndex {
    pub edge2elem: Vec<Vec<(usize, usize)>>,
    pub node2elem: Vec<Vec<usize>>,
}

impl AdjacencyIndex {
    pub fn total_edge_incidences(&self) -> usize {
        self.edge2elem.iter().map(Vec::len).sum()
    }
}

pub fn build_adjacency(mesh: &Mesh) -> AdjacencyIndex {
    let mut edge2elem = vec![Vec::new(); mesh.edge_capacity()];
    let mut node2elem = vec![Vec::new(); mesh.node_capacity()];
    for el in mesh.element_ids() {
        let e = mesh.element(el);
        for k in 0..4 {
            edge2elem[e.edges[k]].push((el, k));
            node2elem[e.vertices[k]].push(el);
        }
    }
    AdjacencyIndex {
        edge2elem,
        node2elem,
    }
}
