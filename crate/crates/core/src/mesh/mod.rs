//! Flag-encoded quadrilateral meshes.
//!
//! A mesh is five arrays: node coordinates, node flags, edge endpoints, edge
//! flags and the 12-column element table (four vertices, four mid-node slots,
//! four edges). The refinement history is not stored anywhere else; it is
//! recoverable from the flags and from the vertex ordering of children, which
//! is what lets [`crate::adapt`] refine and coarsen without a tree.
//!
//! Indices are 0-based in memory and 1-based in QMESH files. Deleted entities
//! leave free slots that later insertions reuse; files are always written
//! compacted.

mod adjacency;
mod build;
mod geometry;
mod io;
mod validate;

use std::collections::HashMap;

use thiserror::Error;

pub use adjacency::{build_adjacency, AdjacencyIndex};
pub use build::{from_quads, grid_coords, grid_quads, rectangle};
pub use geometry::{geom_coeffs, GeomCoeffs};
pub use io::{load_mesh, read_mesh_file, save_mesh, write_mesh_file};
pub use validate::{validate, ElementQuality, MeshQualityReport};

/// Node classification stored in `node_flag`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeFlag {
    /// `0` in files.
    Regular,
    /// `-1`: the center node created by quadrisection of an element.
    Newest,
    /// `-2`: lies on the domain boundary.
    Boundary,
}

impl NodeFlag {
    pub fn code(self) -> i64 {
        match self {
            NodeFlag::Regular => 0,
            NodeFlag::Newest => -1,
            NodeFlag::Boundary => -2,
        }
    }

    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(NodeFlag::Regular),
            -1 => Some(NodeFlag::Newest),
            -2 => Some(NodeFlag::Boundary),
            _ => None,
        }
    }
}

/// Edge classification stored in `edge_flag`.
///
/// In files a child edge carries `2p-1` or `2p` (with `p` the 1-based parent
/// index); the parity says whether the edge has the smaller or the larger
/// index of the two siblings. In memory only the parent is kept and the
/// parity is recomputed from the sibling indices when a file is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeFlag {
    Boundary,
    Regular,
    /// Half of the live parent edge with the given index.
    Child(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    pub flag: NodeFlag,
}

impl Node {
    pub fn new(x: f64, y: f64, flag: NodeFlag) -> Self {
        Node { x, y, flag }
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub ends: [usize; 2],
    pub flag: EdgeFlag,
}

impl Edge {
    pub fn new(a: usize, b: usize, flag: EdgeFlag) -> Self {
        Edge { ends: [a, b], flag }
    }

    pub fn has_end(&self, n: usize) -> bool {
        self.ends[0] == n || self.ends[1] == n
    }

    pub fn other_end(&self, n: usize) -> usize {
        if self.ends[0] == n {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }
}

/// One row of the element table.
///
/// Local edge `k` joins `vertices[k]` and `vertices[(k + 1) % 4]`; `mids[k]`
/// is the hanging node on that edge, if any. Vertices run counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    pub vertices: [usize; 4],
    pub mids: [Option<usize>; 4],
    pub edges: [usize; 4],
}

impl Element {
    pub fn new(vertices: [usize; 4], edges: [usize; 4]) -> Self {
        Element {
            vertices,
            mids: [None; 4],
            edges,
        }
    }

    pub fn hanging_count(&self) -> usize {
        self.mids.iter().filter(|m| m.is_some()).count()
    }

    pub fn local_edge(&self, edge: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == edge)
    }

    pub fn local_vertex(&self, node: usize) -> Option<usize> {
        self.vertices.iter().position(|&v| v == node)
    }
}

/// Errors from loading, validating or writing meshes. Indices in messages are
/// 1-based, matching the file format.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: index out of range: {what} {index} (only {count} defined)")]
    IndexOutOfRange {
        line: usize,
        what: &'static str,
        index: i64,
        count: usize,
    },
    #[error("line {line}: duplicate edge between nodes {a} and {b}")]
    DuplicateEdge { line: usize, a: usize, b: usize },
    #[error("line {line}: element {elem} has a nonpositive Jacobian")]
    NonpositiveJacobian { line: usize, elem: usize },
    #[error("mesh has no elements")]
    Empty,
    #[error("{msg}")]
    Invariant {
        entity: Entity,
        index: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Node,
    Edge,
    Element,
}

pub(crate) fn violation(entity: Entity, index: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Invariant {
        entity,
        index,
        msg: msg.into(),
    }
}

/// Incidence of one edge: up to two `(element, local edge position)` pairs.
pub(crate) type EdgeIncidence = [Option<(usize, u8)>; 2];

/// Flag-encoded 1-irregular quadrilateral mesh.
///
/// Besides the five arrays the mesh keeps two derived indices up to date on
/// every mutation: edge-to-element incidence and an endpoint lookup for
/// edges. Both are O(1) per touched entity.
#[derive(Debug, Clone, Default)]
pub struct Mesh {
    nodes: Vec<Option<Node>>,
    edges: Vec<Option<Edge>>,
    elems: Vec<Option<Element>>,
    free_nodes: Vec<usize>,
    free_edges: Vec<usize>,
    free_elems: Vec<usize>,
    incidence: Vec<EdgeIncidence>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a mesh from dense arrays (no free slots). No validation is
    /// performed; call [`validate`] afterwards.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>, elems: Vec<Element>) -> Self {
        let mut mesh = Mesh::new();
        for n in nodes {
            mesh.add_node(n);
        }
        for e in edges {
            mesh.add_edge(e);
        }
        for el in elems {
            mesh.add_element(el);
        }
        mesh
    }

    /// Number of live nodes.
    pub fn num_nodes(&self) -> usize {
        self.nodes.len() - self.free_nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len() - self.free_edges.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elems.len() - self.free_elems.len()
    }

    /// Slot capacity of the node array (live and free).
    pub fn node_capacity(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_capacity(&self) -> usize {
        self.edges.len()
    }

    pub fn element_capacity(&self) -> usize {
        self.elems.len()
    }

    pub fn node(&self, i: usize) -> &Node {
        self.nodes[i].as_ref().expect("dead node slot")
    }

    pub fn edge(&self, i: usize) -> &Edge {
        self.edges[i].as_ref().expect("dead edge slot")
    }

    pub fn element(&self, i: usize) -> &Element {
        self.elems[i].as_ref().expect("dead element slot")
    }

    pub fn try_node(&self, i: usize) -> Option<&Node> {
        self.nodes.get(i).and_then(|n| n.as_ref())
    }

    pub fn try_edge(&self, i: usize) -> Option<&Edge> {
        self.edges.get(i).and_then(|e| e.as_ref())
    }

    pub fn try_element(&self, i: usize) -> Option<&Element> {
        self.elems.get(i).and_then(|e| e.as_ref())
    }

    pub fn is_live_element(&self, i: usize) -> bool {
        self.try_element(i).is_some()
    }

    /// Live node indices in ascending order.
    pub fn node_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_ref().map(|_| i))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|_| i))
    }

    pub fn element_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.elems
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|_| i))
    }

    pub fn coords(&self, n: usize) -> [f64; 2] {
        self.node(n).coords()
    }

    pub fn vertex_coords(&self, elem: usize) -> [[f64; 2]; 4] {
        self.element(elem).vertices.map(|v| self.coords(v))
    }

    /// Elements incident to an edge, with the edge's local position in each.
    pub fn edge_elements(&self, edge: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incidence[edge]
            .iter()
            .flatten()
            .map(|&(el, k)| (el, k as usize))
    }

    pub fn edge_element_count(&self, edge: usize) -> usize {
        self.incidence[edge].iter().flatten().count()
    }

    /// The element across `edge` from `elem`, if any.
    pub fn neighbor_across(&self, elem: usize, edge: usize) -> Option<usize> {
        self.edge_elements(edge)
            .map(|(el, _)| el)
            .find(|&el| el != elem)
    }

    /// Edge joining two nodes.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    /// The two halves of a live parent edge, as `(half at ends[0], half at ends[1])`.
    pub fn children_of(&self, parent: usize, mid: usize) -> Option<(usize, usize)> {
        let [a, b] = self.edge(parent).ends;
        Some((self.find_edge(a, mid)?, self.find_edge(mid, b)?))
    }

    /// Index of the other child sharing `child`'s parent.
    pub fn sibling_of(&self, child: usize) -> Option<usize> {
        let EdgeFlag::Child(p) = self.edge(child).flag else {
            return None;
        };
        let pe = self.try_edge(p)?;
        let c = self.edge(child);
        // The shared endpoint of the two halves is the one not on the parent.
        let mid = if pe.has_end(c.ends[0]) {
            c.ends[1]
        } else {
            c.ends[0]
        };
        let outer = c.other_end(mid);
        let other_outer = pe.other_end(outer);
        self.find_edge(mid, other_outer).filter(|&s| s != child)
    }

    // ---- mutation primitives; every one keeps the derived indices in sync ----

    pub(crate) fn add_node(&mut self, node: Node) -> usize {
        if let Some(i) = self.free_nodes.pop() {
            self.nodes[i] = Some(node);
            i
        } else {
            self.nodes.push(Some(node));
            self.nodes.len() - 1
        }
    }

    pub(crate) fn remove_node(&mut self, i: usize) {
        debug_assert!(self.nodes[i].is_some());
        self.nodes[i] = None;
        self.free_nodes.push(i);
    }

    #[cfg(test)]
    pub(crate) fn set_node_flag(&mut self, i: usize, flag: NodeFlag) {
        self.nodes[i].as_mut().expect("dead node slot").flag = flag;
    }

    pub(crate) fn add_edge(&mut self, edge: Edge) -> usize {
        let i = if let Some(i) = self.free_edges.pop() {
            self.edges[i] = Some(edge);
            self.incidence[i] = [None, None];
            i
        } else {
            self.edges.push(Some(edge));
            self.incidence.push([None, None]);
            self.edges.len() - 1
        };
        self.edge_lookup.insert(key(edge.ends[0], edge.ends[1]), i);
        i
    }

    pub(crate) fn remove_edge(&mut self, i: usize) {
        let e = self.edges[i].take().expect("dead edge slot");
        let k = key(e.ends[0], e.ends[1]);
        if self.edge_lookup.get(&k) == Some(&i) {
            self.edge_lookup.remove(&k);
        }
        self.incidence[i] = [None, None];
        self.free_edges.push(i);
    }

    pub(crate) fn set_edge_flag(&mut self, i: usize, flag: EdgeFlag) {
        self.edges[i].as_mut().expect("dead edge slot").flag = flag;
    }

    pub(crate) fn set_edge_ends(&mut self, i: usize, a: usize, b: usize) {
        let e = self.edges[i].as_mut().expect("dead edge slot");
        let old = key(e.ends[0], e.ends[1]);
        e.ends = [a, b];
        if self.edge_lookup.get(&old) == Some(&i) {
            self.edge_lookup.remove(&old);
        }
        self.edge_lookup.insert(key(a, b), i);
    }

    fn attach(&mut self, elem: usize, el: &Element) {
        for (k, &e) in el.edges.iter().enumerate() {
            if let Some(inc) = self.incidence.get_mut(e) {
                if let Some(slot) = inc.iter_mut().find(|s| s.is_none()) {
                    *slot = Some((elem, k as u8));
                }
                // A third incidence is silently dropped here and reported by
                // `validate` through the per-edge element counts.
            }
        }
    }

    fn detach(&mut self, elem: usize, el: &Element) {
        for &e in &el.edges {
            if let Some(inc) = self.incidence.get_mut(e) {
                for s in inc.iter_mut() {
                    if matches!(s, Some((x, _)) if *x == elem) {
                        *s = None;
                    }
                }
                if inc[0].is_none() {
                    inc.swap(0, 1);
                }
            }
        }
    }

    pub(crate) fn add_element(&mut self, el: Element) -> usize {
        let i = if let Some(i) = self.free_elems.pop() {
            self.elems[i] = Some(el);
            i
        } else {
            self.elems.push(Some(el));
            self.elems.len() - 1
        };
        self.attach(i, &el);
        i
    }

    pub(crate) fn replace_element(&mut self, i: usize, el: Element) {
        let old = self.elems[i].expect("dead element slot");
        self.detach(i, &old);
        self.elems[i] = Some(el);
        self.attach(i, &el);
    }

    pub(crate) fn remove_element(&mut self, i: usize) {
        let old = self.elems[i].take().expect("dead element slot");
        self.detach(i, &old);
        self.free_elems.push(i);
    }

    pub(crate) fn set_mid(&mut self, elem: usize, k: usize, mid: Option<usize>) {
        self.elems[elem].as_mut().expect("dead element slot").mids[k] = mid;
    }

    /// Rebuilds the mesh with live entities renumbered densely, preserving
    /// relative order. Returns the mesh and the old-to-new node map.
    pub fn compacted(&self) -> (Mesh, Vec<Option<usize>>) {
        let (node_map, _) = dense_map(&self.nodes);
        let (edge_map, _) = dense_map(&self.edges);
        let nodes = self.nodes.iter().flatten().copied().collect();
        let edges = self
            .edges
            .iter()
            .flatten()
            .map(|e| Edge {
                ends: e.ends.map(|n| node_map[n].expect("edge references dead node")),
                flag: match e.flag {
                    EdgeFlag::Child(p) => EdgeFlag::Child(edge_map[p].unwrap_or(usize::MAX)),
                    f => f,
                },
            })
            .collect();
        let elems = self
            .elems
            .iter()
            .flatten()
            .map(|el| Element {
                vertices: el.vertices.map(|n| node_map[n].expect("dead vertex")),
                mids: el.mids.map(|m| m.map(|n| node_map[n].expect("dead mid node"))),
                edges: el.edges.map(|e| edge_map[e].expect("dead edge")),
            })
            .collect();
        (Mesh::from_parts(nodes, edges, elems), node_map)
    }

    /// Signed area of an element (exact for bilinear maps).
    pub fn element_area(&self, elem: usize) -> f64 {
        let v = self.vertex_coords(elem);
        let mut a = 0.0;
        for i in 0..4 {
            let j = (i + 1) % 4;
            a += v[i][0] * v[j][1] - v[j][0] * v[i][1];
        }
        0.5 * a
    }

    /// Canonical, index-free description of the mesh, for comparing meshes
    /// that differ only by numbering.
    pub fn canonical_form(&self) -> CanonicalMesh {
        let c = |n: usize| {
            let p = self.coords(n);
            (p[0].to_bits(), p[1].to_bits())
        };
        let mut nodes: Vec<_> = self
            .node_ids()
            .map(|n| (c(n), self.node(n).flag.code()))
            .collect();
        nodes.sort_unstable();
        let mut edges: Vec<_> = self
            .edge_ids()
            .map(|e| {
                let ed = self.edge(e);
                let mut ends = [c(ed.ends[0]), c(ed.ends[1])];
                ends.sort_unstable();
                let flag = match ed.flag {
                    EdgeFlag::Boundary => CanonicalEdgeFlag::Boundary,
                    EdgeFlag::Regular => CanonicalEdgeFlag::Regular,
                    EdgeFlag::Child(p) => {
                        let pe = self.edge(p);
                        let mut pends = [c(pe.ends[0]), c(pe.ends[1])];
                        pends.sort_unstable();
                        CanonicalEdgeFlag::Child(pends)
                    }
                };
                (ends, flag)
            })
            .collect();
        edges.sort_unstable();
        let mut elems: Vec<_> = self
            .element_ids()
            .map(|el| {
                let e = self.element(el);
                (e.vertices.map(c), e.mids.map(|m| m.map(c)))
            })
            .collect();
        elems.sort_unstable();
        CanonicalMesh {
            nodes,
            edges,
            elems,
        }
    }
}

fn dense_map<T>(slots: &[Option<T>]) -> (Vec<Option<usize>>, usize) {
    let mut next = 0;
    let map = slots
        .iter()
        .map(|s| {
            s.as_ref().map(|_| {
                next += 1;
                next - 1
            })
        })
        .collect();
    (map, next)
}

type CoordKey = (u64, u64);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CanonicalEdgeFlag {
    Boundary,
    Regular,
    Child([CoordKey; 2]),
}

/// Mesh described by coordinates only; equal iff two meshes are identical up
/// to renumbering (element vertex order is kept, since it carries history).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalMesh {
    pub nodes: Vec<(CoordKey, i64)>,
    pub edges: Vec<([CoordKey; 2], CanonicalEdgeFlag)>,
    pub elems: Vec<([CoordKey; 4], [Option<CoordKey>; 4])>,
}

/// Small reference meshes.
pub mod fixtures {
    use super::*;

    /// The L-shaped domain `[0,1]×[-1,1] ∪ [-1,0]×[0,1]` after one
    /// quadrisection of the quad on `[0,1]²`: 13 nodes, 20 edges and
    /// 6 elements, two of which carry a hanging node.
    pub const LSHAPE_QMESH: &str = "QMESH 1
NODES 13
0 -1 -2
1 -1 -2
1 0 -2
1 1 -2
0 1 -2
-1 1 -2
-1 0 -2
0 0 -2
0.5 0 0
0 0.5 0
1 0.5 -2
0.5 1 -2
0.5 0.5 -1
EDGES 20
1 8 -2
1 2 -2
2 3 -2
3 11 -2
5 12 -2
6 5 -2
7 6 -2
7 8 -2
8 3 0
8 5 0
8 9 17
8 10 19
9 3 18
10 5 20
11 4 -2
12 4 -2
9 13 0
13 11 0
13 12 0
10 13 0
ELEMS 6
1 2 3 8 0 0 9 0 2 3 9 1
8 9 13 10 0 0 0 0 11 17 20 12
7 8 5 6 0 10 0 0 8 10 6 7
9 3 11 13 0 0 0 0 13 4 18 17
13 11 4 12 0 0 0 0 18 15 16 19
10 13 12 5 0 0 0 0 20 19 5 14
";

    /// [`LSHAPE_QMESH`] parsed.
    pub fn lshape() -> Mesh {
        load_mesh(LSHAPE_QMESH.as_bytes()).expect("fixture loads")
    }

    /// One element on `[0,1]²`.
    pub fn unit_square() -> Mesh {
        Mesh::from_parts(
            vec![
                Node::new(0.0, 0.0, NodeFlag::Boundary),
                Node::new(1.0, 0.0, NodeFlag::Boundary),
                Node::new(1.0, 1.0, NodeFlag::Boundary),
                Node::new(0.0, 1.0, NodeFlag::Boundary),
            ],
            vec![
                Edge::new(0, 1, EdgeFlag::Boundary),
                Edge::new(1, 2, EdgeFlag::Boundary),
                Edge::new(2, 3, EdgeFlag::Boundary),
                Edge::new(3, 0, EdgeFlag::Boundary),
            ],
            vec![Element::new([0, 1, 2, 3], [0, 1, 2, 3])],
        )
    }
}
