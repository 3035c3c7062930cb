use super::geometry::GeomCoeffs;
use super::{violation, EdgeFlag, Entity, Mesh, MeshError, NodeFlag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementQuality {
    pub elem: usize,
    pub h: f64,
    pub rho: f64,
    pub h_over_rho: f64,
    pub d_over_h: f64,
}

/// Shape-regularity figures for every element. No threshold is enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshQualityReport {
    pub elements: Vec<ElementQuality>,
    pub max_h: f64,
    pub max_h_over_rho: f64,
    pub max_d_over_h: f64,
}

/// Checks every structural invariant of the flag encoding and returns the
/// quality report, or the first violation found.
pub fn validate(mesh: &Mesh) -> Result<MeshQualityReport, MeshError> {
    if mesh.num_elements() == 0 {
        return Err(MeshError::Empty);
    }
    let ne = mesh.edge_capacity();
    let nn = mesh.node_capacity();

    // Per-parent child lists and per-edge element counts, recomputed from the
    // arrays rather than trusted from the incidence index.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for e in mesh.edge_ids() {
        let ed = mesh.edge(e);
        for &n in &ed.ends {
            if mesh.try_node(n).is_none() {
                return Err(violation(Entity::Edge, e, format!("edge {} references missing node {}", e + 1, n + 1)));
            }
        }
        if let EdgeFlag::Child(p) = ed.flag {
            if mesh.try_edge(p).is_none() {
                return Err(violation(Entity::Edge, e, format!("edge {} has dead parent edge {}", e + 1, p + 1)));
            }
            children[p].push(e);
        }
    }
    let mut edge_count = vec![0usize; ne];
    let mut node_used = vec![false; nn];

    for el in mesh.element_ids() {
        let e = mesh.element(el);
        let tag = el + 1;
        for &n in e.vertices.iter().chain(e.mids.iter().flatten()) {
            if mesh.try_node(n).is_none() {
                return Err(violation(Entity::Element, el, format!("element {tag} references missing node {}", n + 1)));
            }
            node_used[n] = true;
        }
        for &ed in &e.edges {
            if mesh.try_edge(ed).is_none() {
                return Err(violation(Entity::Element, el, format!("element {tag} references missing edge {}", ed + 1)));
            }
            edge_count[ed] += 1;
        }
        let g = GeomCoeffs::from_vertices(&mesh.vertex_coords(el));
        if g.min_jacobian() <= 0.0 {
            return Err(violation(Entity::Element, el, format!("element {tag} has a nonpositive Jacobian")));
        }
        if e.hanging_count() > 3 {
            return Err(violation(Entity::Element, el, format!("element {tag} has four hanging nodes")));
        }
        for k in 0..4 {
            let (a, b) = (e.vertices[k], e.vertices[(k + 1) % 4]);
            let edge = mesh.edge(e.edges[k]);
            if !(edge.has_end(a) && edge.has_end(b)) {
                return Err(violation(
                    Entity::Element,
                    el,
                    format!("element {tag} local edge {} is edge {} which does not join nodes {} and {}", k + 1, e.edges[k] + 1, a + 1, b + 1),
                ));
            }
            let kids = &children[e.edges[k]];
            match e.mids[k] {
                None if !kids.is_empty() => {
                    return Err(violation(Entity::Edge, e.edges[k], format!("parent edge {} has orphan children", e.edges[k] + 1)));
                }
                None => {}
                Some(m) => {
                    let ok = kids.len() == 2 && {
                        let c0 = mesh.edge(kids[0]);
                        let c1 = mesh.edge(kids[1]);
                        c0.has_end(m) && c1.has_end(m) && {
                            let o0 = c0.other_end(m);
                            let o1 = c1.other_end(m);
                            (o0 == a && o1 == b) || (o0 == b && o1 == a)
                        }
                    };
                    if !ok {
                        return Err(violation(
                            Entity::Element,
                            el,
                            format!("element {tag} mid node {} does not split edge {} into two child edges", m + 1, e.edges[k] + 1),
                        ));
                    }
                    let (pa, pb, pm) = (mesh.coords(a), mesh.coords(b), mesh.coords(m));
                    let tol = 1e-10 * g.h.max(f64::MIN_POSITIVE);
                    if ((pa[0] + pb[0]) * 0.5 - pm[0]).abs() > tol || ((pa[1] + pb[1]) * 0.5 - pm[1]).abs() > tol {
                        return Err(violation(Entity::Node, m, format!("hanging node {} is not the midpoint of edge {}", m + 1, e.edges[k] + 1)));
                    }
                }
            }
        }
    }

    for e in mesh.edge_ids() {
        let ed = mesh.edge(e);
        let is_parent = !children[e].is_empty();
        if is_parent {
            if children[e].len() != 2 {
                return Err(violation(Entity::Edge, e, format!("parent edge {} has {} children", e + 1, children[e].len())));
            }
            if ed.flag != EdgeFlag::Regular {
                return Err(violation(
                    Entity::Edge,
                    e,
                    format!("parent edge {} is not a regular interior edge (mesh is not 1-irregular)", e + 1),
                ));
            }
            if edge_count[e] != 1 {
                return Err(violation(Entity::Edge, e, format!("parent edge {} belongs to {} elements, expected 1", e + 1, edge_count[e])));
            }
        }
        let expected = match ed.flag {
            EdgeFlag::Boundary | EdgeFlag::Child(_) => 1,
            EdgeFlag::Regular if is_parent => 1,
            EdgeFlag::Regular => 2,
        };
        if edge_count[e] != expected {
            return Err(violation(
                Entity::Edge,
                e,
                format!("edge {} belongs to {} elements, expected {expected}", e + 1, edge_count[e]),
            ));
        }
        if ed.flag == EdgeFlag::Boundary {
            for &n in &ed.ends {
                if mesh.node(n).flag != NodeFlag::Boundary {
                    return Err(violation(Entity::Node, n, format!("node {} lies on boundary edge {} but is not flagged -2", n + 1, e + 1)));
                }
            }
        }
        if mesh.find_edge(ed.ends[0], ed.ends[1]) != Some(e) {
            return Err(violation(Entity::Edge, e, format!("edge {} duplicates another edge", e + 1)));
        }
    }

    for n in mesh.node_ids() {
        if !node_used[n] {
            return Err(violation(Entity::Node, n, format!("node {} belongs to no element", n + 1)));
        }
    }

    let mut elements = Vec::with_capacity(mesh.num_elements());
    for el in mesh.element_ids() {
        let g = GeomCoeffs::from_vertices(&mesh.vertex_coords(el));
        elements.push(ElementQuality {
            elem: el,
            h: g.h,
            rho: g.rho,
            h_over_rho: g.h / g.rho,
            d_over_h: g.d / g.h,
        });
    }
    let max = |f: fn(&ElementQuality) -> f64| elements.iter().map(f).fold(0.0, f64::max);
    Ok(MeshQualityReport {
        max_h: max(|q| q.h),
        max_h_over_rho: max(|q| q.h_over_rho),
        max_d_over_h: max(|q| q.d_over_h),
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fixture_is_valid() {
        let m = lshape();
        let r = validate(&m).unwrap();
        assert_eq!(r.elements.len(), 6);
        // E1 holds node 9 in m7; e11 / e13 are the halves of e9.
        assert_eq!(m.element(0).mids[2], Some(8));
        assert_eq!(m.edge(10).flag, EdgeFlag::Child(8));
        assert_eq!(m.edge(12).flag, EdgeFlag::Child(8));
        assert_eq!(io::edge_flag_code(&m, 10), 17);
        assert_eq!(io::edge_flag_code(&m, 12), 18);
    }

    #[test]
    fn orphan_children_detected() {
        let mut m = lshape();
        m.set_mid(0, 2, None);
        let err = validate(&m).unwrap_err();
        assert!(matches!(err, MeshError::Invariant { entity: Entity::Edge, index: 8, .. }));
        assert_eq!(err.to_string(), "parent edge 9 has orphan children");
    }

    #[test]
    fn unit_square_quality() {
        let r = validate(&unit_square()).unwrap();
        let q = r.elements[0];
        assert_eq!(q.d_over_h, 0.0);
        assert_relative_eq!(q.h, 2f64.sqrt(), max_relative = 1e-15);
        // Inscribed diameter of the right isosceles corner triangle is 2/(2+√2).
        assert_relative_eq!(q.h_over_rho, 1.0 + 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn four_hanging_nodes_rejected() {
        let mut m = lshape();
        m.set_mid(1, 0, Some(0));
        m.set_mid(1, 1, Some(1));
        m.set_mid(1, 2, Some(2));
        m.set_mid(1, 3, Some(3));
        assert!(validate(&m).unwrap_err().to_string().contains("four hanging nodes"));
    }

    #[test]
    fn newest_node_on_boundary_rejected() {
        let mut m = unit_square();
        m.set_node_flag(0, NodeFlag::Newest);
        assert!(validate(&m).is_err());
    }
}
