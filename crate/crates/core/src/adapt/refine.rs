use std::collections::{BTreeMap, HashMap};

use super::{post_mark, AdaptError, MarkSet, RefineEdgeClass, RefineEdgeType};
use crate::mesh::{validate, Edge, EdgeFlag, Element, Mesh, Node, NodeFlag};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefineSummary {
    /// The closed mark set that was actually refined.
    pub marked: MarkSet,
    /// For every refined element (ascending), its children. Child `i` holds
    /// the parent's vertex `i`; child 0 reuses the parent's slot.
    pub children: Vec<[usize; 4]>,
    pub new_nodes: Vec<usize>,
}

/// Classifies every edge of the marked elements. `marks` should already be
/// closed under [`post_mark`].
pub fn classify_refine_edges(mesh: &Mesh, marks: &MarkSet) -> Result<RefineEdgeClass, AdaptError> {
    let mut out = BTreeMap::new();
    for k in marks.iter() {
        let el = mesh.try_element(k).ok_or(AdaptError::DeadElement(k))?;
        for j in 0..4 {
            let e = el.edges[j];
            let t = if el.mids[j].is_some() {
                RefineEdgeType::Five
            } else {
                match mesh.edge(e).flag {
                    EdgeFlag::Boundary => RefineEdgeType::Two,
                    EdgeFlag::Regular => match mesh.neighbor_across(k, e) {
                        Some(n) if marks.contains(n) => RefineEdgeType::Two,
                        Some(_) => RefineEdgeType::One,
                        None => {
                            return Err(AdaptError::Unclassifiable {
                                edge: e,
                                reason: "regular edge with a single element and no hanging node".into(),
                            })
                        }
                    },
                    EdgeFlag::Child(_) => match mesh.sibling_of(e) {
                        Some(s) if e < s => RefineEdgeType::Three,
                        Some(_) => RefineEdgeType::Four,
                        None => {
                            return Err(AdaptError::Unclassifiable {
                                edge: e,
                                reason: "child edge without a sibling".into(),
                            })
                        }
                    },
                }
            };
            out.insert(e, t);
        }
    }
    Ok(RefineEdgeClass(out))
}

/// Refines the closure of `marks` and validates the result.
pub fn refine(mesh: &mut Mesh, marks: &MarkSet) -> Result<RefineSummary, AdaptError> {
    let s = refine_unchecked(mesh, marks)?;
    validate(mesh)?;
    Ok(s)
}

/// Refinement without the whole-mesh post check; work is proportional to the
/// number of refined elements.
pub fn refine_unchecked(mesh: &mut Mesh, marks: &MarkSet) -> Result<RefineSummary, AdaptError> {
    for k in marks.iter() {
        if !mesh.is_live_element(k) {
            return Err(AdaptError::DeadElement(k));
        }
    }
    let marked = post_mark(mesh, marks);
    let class = classify_refine_edges(mesh, &marked)?;

    // Original endpoints of every split edge, and the halves once split,
    // stored as (half at ends[0], half at ends[1]).
    let mut ends: HashMap<usize, [usize; 2]> = HashMap::new();
    let mut halves: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut mid_of: HashMap<usize, usize> = HashMap::new();
    let mut new_nodes = Vec::new();

    let by_type = |t| class.edges_of(t).collect::<Vec<_>>();
    let (t1, t2, t3, t4, t5) = (
        by_type(RefineEdgeType::One),
        by_type(RefineEdgeType::Two),
        by_type(RefineEdgeType::Three),
        by_type(RefineEdgeType::Four),
        by_type(RefineEdgeType::Five),
    );

    for &e in t1.iter().chain(&t2).chain(&t3).chain(&t4) {
        let ed = *mesh.edge(e);
        let (p, q) = (mesh.coords(ed.ends[0]), mesh.coords(ed.ends[1]));
        let flag = if ed.flag == EdgeFlag::Boundary {
            NodeFlag::Boundary
        } else {
            NodeFlag::Regular
        };
        let m = mesh.add_node(Node::new(0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), flag));
        new_nodes.push(m);
        mid_of.insert(e, m);
        ends.insert(e, ed.ends);
    }

    // Kept parents: first halves for all, then second halves.
    let kept: Vec<usize> = t1.iter().chain(&t3).chain(&t4).copied().collect();
    let mut first = Vec::with_capacity(kept.len());
    for &e in &kept {
        first.push(mesh.add_edge(Edge::new(ends[&e][0], mid_of[&e], EdgeFlag::Child(e))));
    }
    for (i, &e) in kept.iter().enumerate() {
        let second = mesh.add_edge(Edge::new(mid_of[&e], ends[&e][1], EdgeFlag::Child(e)));
        halves.insert(e, (first[i], second));
    }
    for &e in t3.iter().chain(&t4) {
        mesh.set_edge_flag(e, EdgeFlag::Regular);
    }
    // Type 2 edges split in place.
    for &e in &t2 {
        let [a, b] = ends[&e];
        let m = mid_of[&e];
        let flag = mesh.edge(e).flag;
        mesh.set_edge_ends(e, a, m);
        let second = mesh.add_edge(Edge::new(m, b, flag));
        halves.insert(e, (e, second));
    }
    // Parents retire; their children become ordinary edges.
    for &p in &t5 {
        let (owner, j) = mesh.edge_elements(p).next().expect("parent edge has its coarse element");
        let m = mesh.element(owner).mids[j].expect("type 5 edge carries a hanging node");
        let (h0, h1) = mesh.children_of(p, m).ok_or_else(|| AdaptError::Unclassifiable {
            edge: p,
            reason: "parent edge without both children".into(),
        })?;
        for h in [h0, h1] {
            mesh.set_edge_flag(h, EdgeFlag::Regular);
        }
        ends.insert(p, mesh.edge(p).ends);
        halves.insert(p, (h0, h1));
        mid_of.insert(p, m);
    }

    let half_at = |e: usize, v: usize| {
        let (h0, h1) = halves[&e];
        if ends[&e][0] == v {
            h0
        } else {
            h1
        }
    };

    let mut centers = Vec::with_capacity(marked.len());
    for k in marked.iter() {
        let g = crate::mesh::GeomCoeffs::from_vertices(&mesh.vertex_coords(k));
        let [x, y] = g.map(0.0, 0.0);
        let c = mesh.add_node(Node::new(x, y, NodeFlag::Newest));
        new_nodes.push(c);
        centers.push(c);
    }

    let mut children = Vec::with_capacity(marked.len());
    for (idx, k) in marked.iter().enumerate() {
        let el = *mesh.element(k);
        let c = centers[idx];
        let v = el.vertices;
        let m: [usize; 4] = std::array::from_fn(|j| mid_of[&el.edges[j]]);
        let spoke = [
            mesh.add_edge(Edge::new(m[0], c, EdgeFlag::Regular)),
            mesh.add_edge(Edge::new(c, m[1], EdgeFlag::Regular)),
            mesh.add_edge(Edge::new(c, m[2], EdgeFlag::Regular)),
            mesh.add_edge(Edge::new(m[3], c, EdgeFlag::Regular)),
        ];
        let mut kids = [k; 4];
        for i in 0..4 {
            let p = (i + 3) % 4;
            let nat_v = [v[i], m[i], c, m[p]];
            let nat_e = [half_at(el.edges[i], v[i]), spoke[i], spoke[p], half_at(el.edges[p], v[i])];
            let mut child = Element::new([0; 4], [0; 4]);
            for j in 0..4 {
                let pos = (i + j) % 4;
                child.vertices[pos] = nat_v[j];
                child.edges[pos] = nat_e[j];
                // A half that was itself split this round is a parent now.
                if j == 0 || j == 3 {
                    let h = nat_e[j];
                    if matches!(class.get(h), Some(RefineEdgeType::Three | RefineEdgeType::Four)) {
                        child.mids[pos] = Some(mid_of[&h]);
                    }
                }
            }
            if i == 0 {
                mesh.replace_element(k, child);
            } else {
                kids[i] = mesh.add_element(child);
            }
        }
        children.push(kids);
    }

    for &e in &t1 {
        let (n, j) = mesh
            .edge_elements(e)
            .next()
            .expect("type 1 edge keeps its unmarked neighbor");
        mesh.set_mid(n, j, Some(mid_of[&e]));
    }
    for &p in &t5 {
        mesh.remove_edge(p);
    }

    Ok(RefineSummary {
        marked,
        children,
        new_nodes,
    })
}
