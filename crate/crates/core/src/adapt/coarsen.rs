use std::collections::{BTreeMap, HashMap, HashSet};

use super::{AdaptError, MarkSet};
use crate::mesh::{validate, Edge, EdgeFlag, Element, Mesh, NodeFlag};

/// How one side of a restored parent is rebuilt from its two halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoarsenEdgeType {
    /// The neighbors across both halves stay: the halves become children of a
    /// new parent edge and the midpoint becomes a hanging node of the parent.
    One = 1,
    /// The halves are children of a live parent owned by a coarser neighbor:
    /// the parent edge is reused and the neighbor loses its hanging node.
    Two = 2,
    /// Boundary side, or both neighbors are coarsened too: the halves merge
    /// and the midpoint disappears.
    Three = 3,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoarsenSummary {
    /// Good nodes whose patches were merged, ascending.
    pub good_nodes: Vec<usize>,
    /// Slot of each restored parent (the slot of its first child).
    pub restored: Vec<usize>,
    /// Side classification of each restored parent, in local edge order.
    pub sides: Vec<[CoarsenEdgeType; 4]>,
    pub removed_nodes: usize,
}

/// The four elements around a newest node, ordered as the children of the
/// element they came from, if the node is good.
///
/// A good node has exactly four incident elements, none with a hanging node,
/// all meeting across regular edges; the node sits at local position
/// `i + 2 (mod 4)` of child `i`, and the four recovered parent corners are
/// not all newest nodes themselves.
pub fn good_patch(mesh: &Mesh, node: usize, start: usize) -> Option<[usize; 4]> {
    if mesh.try_node(node)?.flag != NodeFlag::Newest {
        return None;
    }
    let mut kids = [usize::MAX; 4];
    let mut cur = start;
    let pos = mesh.try_element(start)?.local_vertex(node)?;
    for step in 0..4 {
        let el = mesh.element(cur);
        if el.hanging_count() != 0 {
            return None;
        }
        let p = el.local_vertex(node)?;
        if p != (pos + 4 - step) % 4 {
            return None;
        }
        let k = (p + 2) % 4;
        if kids[k] != usize::MAX {
            return None;
        }
        kids[k] = cur;
        let e = el.edges[p];
        if mesh.edge(e).flag != EdgeFlag::Regular {
            return None;
        }
        cur = mesh.neighbor_across(cur, e)?;
    }
    if cur != start {
        return None;
    }
    if (0..4).all(|k| mesh.node(mesh.element(kids[k]).vertices[k]).flag == NodeFlag::Newest) {
        return None;
    }
    Some(kids)
}

/// All good nodes of the mesh, ascending.
pub fn find_good_nodes(mesh: &Mesh) -> Vec<usize> {
    let mut start: BTreeMap<usize, usize> = BTreeMap::new();
    for el in mesh.element_ids() {
        for &v in &mesh.element(el).vertices {
            if mesh.node(v).flag == NodeFlag::Newest {
                start.entry(v).or_insert(el);
            }
        }
    }
    start
        .into_iter()
        .filter(|&(n, el)| good_patch(mesh, n, el).is_some())
        .map(|(n, _)| n)
        .collect()
}

struct Patch {
    node: usize,
    kids: [usize; 4],
}

impl Patch {
    fn corner(&self, mesh: &Mesh, k: usize) -> usize {
        mesh.element(self.kids[k]).vertices[k]
    }
    fn mid(&self, mesh: &Mesh, k: usize) -> usize {
        mesh.element(self.kids[k]).vertices[(k + 1) % 4]
    }
    fn halves(&self, mesh: &Mesh, k: usize) -> (usize, usize) {
        (mesh.element(self.kids[k]).edges[k], mesh.element(self.kids[(k + 1) % 4]).edges[k])
    }
    fn spoke(&self, mesh: &Mesh, k: usize) -> usize {
        mesh.element(self.kids[k]).edges[(k + 1) % 4]
    }
}

/// Side types of a patch given the owner map of all selected patches, or
/// `None` if the patch cannot be merged consistently.
fn classify_sides(mesh: &Mesh, p: &Patch, owner: &HashMap<usize, usize>) -> Option<[CoarsenEdgeType; 4]> {
    let mut out = [CoarsenEdgeType::One; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        let (h1, h2) = p.halves(mesh, k);
        *slot = match mesh.edge(h1).flag {
            EdgeFlag::Boundary => CoarsenEdgeType::Three,
            EdgeFlag::Child(_) => CoarsenEdgeType::Two,
            EdgeFlag::Regular => {
                let n1 = mesh.neighbor_across(p.kids[k], h1)?;
                let n2 = mesh.neighbor_across(p.kids[(k + 1) % 4], h2)?;
                match (owner.get(&n1), owner.get(&n2)) {
                    (None, None) => CoarsenEdgeType::One,
                    (Some(a), Some(b)) if a == b => CoarsenEdgeType::Three,
                    _ => return None,
                }
            }
        };
        let f2 = mesh.edge(h2).flag;
        let consistent = match *slot {
            CoarsenEdgeType::Three if mesh.edge(h1).flag == EdgeFlag::Boundary => f2 == EdgeFlag::Boundary,
            CoarsenEdgeType::Two => f2 == mesh.edge(h1).flag,
            _ => f2 == EdgeFlag::Regular,
        };
        if !consistent {
            return None;
        }
    }
    if out.iter().all(|&t| t == CoarsenEdgeType::One) {
        return None;
    }
    Some(out)
}

/// Merges every good patch whose four elements are all in `marks`, then
/// validates the mesh.
pub fn coarsen(mesh: &mut Mesh, marks: &MarkSet) -> Result<CoarsenSummary, AdaptError> {
    let s = coarsen_unchecked(mesh, marks)?;
    validate(mesh)?;
    Ok(s)
}

/// Coarsening without the whole-mesh post check.
pub fn coarsen_unchecked(mesh: &mut Mesh, marks: &MarkSet) -> Result<CoarsenSummary, AdaptError> {
    let mut seen = HashSet::new();
    let mut patches: Vec<Patch> = Vec::new();
    for k in marks.iter() {
        let el = *mesh.try_element(k).ok_or(AdaptError::DeadElement(k))?;
        for &v in &el.vertices {
            if mesh.node(v).flag == NodeFlag::Newest && seen.insert(v) {
                if let Some(kids) = good_patch(mesh, v, k) {
                    if kids.iter().all(|&c| marks.contains(c)) {
                        patches.push(Patch { node: v, kids });
                    }
                }
            }
        }
    }
    patches.sort_unstable_by_key(|p| p.node);

    // Drop patches until every remaining one classifies consistently; a
    // dropped patch can turn a neighbor's merge side into a hanging side.
    let sides: Vec<[CoarsenEdgeType; 4]>;
    loop {
        let owner: HashMap<usize, usize> = patches
            .iter()
            .flat_map(|p| p.kids.iter().map(move |&c| (c, p.node)))
            .collect();
        let classes: Vec<_> = patches.iter().map(|p| classify_sides(mesh, p, &owner)).collect();
        if classes.iter().all(Option::is_some) {
            sides = classes.into_iter().flatten().collect();
            break;
        }
        patches = patches
            .into_iter()
            .zip(classes)
            .filter_map(|(p, c)| c.map(|_| p))
            .collect();
    }

    struct Plan {
        parent: Element,
        new_children: Vec<(usize, usize)>,
        clear_mid: Vec<(usize, usize)>,
        merge: Vec<(usize, usize, [usize; 2])>,
        drop_edges: Vec<usize>,
        drop_nodes: Vec<usize>,
    }

    let mut plans = Vec::with_capacity(patches.len());
    for (p, ty) in patches.iter().zip(&sides) {
        let corners: [usize; 4] = std::array::from_fn(|k| p.corner(mesh, k));
        let mut plan = Plan {
            parent: Element::new(corners, [0; 4]),
            new_children: Vec::new(),
            clear_mid: Vec::new(),
            merge: Vec::new(),
            drop_edges: (0..4).map(|k| p.spoke(mesh, k)).collect(),
            drop_nodes: vec![p.node],
        };
        for k in 0..4 {
            let (h1, h2) = p.halves(mesh, k);
            let m = p.mid(mesh, k);
            match ty[k] {
                CoarsenEdgeType::One => {
                    let e = mesh.add_edge(Edge::new(corners[k], corners[(k + 1) % 4], EdgeFlag::Regular));
                    plan.parent.edges[k] = e;
                    plan.parent.mids[k] = Some(m);
                    plan.new_children.push((h1, e));
                    plan.new_children.push((h2, e));
                }
                CoarsenEdgeType::Two => {
                    let EdgeFlag::Child(parent) = mesh.edge(h1).flag else { unreachable!() };
                    let (nb, j) = mesh
                        .edge_elements(parent)
                        .next()
                        .ok_or(AdaptError::Unclassifiable {
                            edge: parent,
                            reason: "parent edge without an element".into(),
                        })?;
                    plan.parent.edges[k] = parent;
                    plan.clear_mid.push((nb, j));
                    plan.drop_edges.extend([h1, h2]);
                    plan.drop_nodes.push(m);
                }
                CoarsenEdgeType::Three => {
                    let (keep, gone) = (h1.min(h2), h1.max(h2));
                    let ke = mesh.edge(keep).ends;
                    let outer = mesh.edge(gone).other_end(m);
                    let ends = if ke[0] == m { [outer, ke[1]] } else { [ke[0], outer] };
                    plan.parent.edges[k] = keep;
                    plan.merge.push((keep, gone, ends));
                    plan.drop_nodes.push(m);
                }
            }
        }
        plans.push(plan);
    }

    let mut summary = CoarsenSummary::default();
    for (p, plan) in patches.iter().zip(&plans) {
        for &c in &p.kids[1..] {
            mesh.remove_element(c);
        }
        mesh.replace_element(p.kids[0], plan.parent);
    }
    let mut dead_edges = HashSet::new();
    let mut dead_nodes = HashSet::new();
    for plan in &plans {
        for &(h, e) in &plan.new_children {
            mesh.set_edge_flag(h, EdgeFlag::Child(e));
        }
        for &(nb, j) in &plan.clear_mid {
            mesh.set_mid(nb, j, None);
        }
        for &(keep, gone, ends) in &plan.merge {
            if dead_edges.insert(gone) {
                mesh.remove_edge(gone);
                mesh.set_edge_ends(keep, ends[0], ends[1]);
            }
        }
        for &e in &plan.drop_edges {
            if dead_edges.insert(e) {
                mesh.remove_edge(e);
            }
        }
        for &n in &plan.drop_nodes {
            if dead_nodes.insert(n) {
                mesh.remove_node(n);
            }
        }
    }
    summary.good_nodes = patches.iter().map(|p| p.node).collect();
    summary.restored = patches.iter().map(|p| p.kids[0]).collect();
    summary.sides = sides;
    summary.removed_nodes = dead_nodes.len();
    Ok(summary)
}
