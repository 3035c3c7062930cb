use std::collections::HashSet;

use crate::mesh::{EdgeFlag, Mesh};

/// Sorted, deduplicated element indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkSet(Vec<usize>);

impl MarkSet {
    pub fn new(elems: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = elems.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        MarkSet(v)
    }

    pub fn all(mesh: &Mesh) -> Self {
        MarkSet(mesh.element_ids().collect())
    }

    pub fn contains(&self, elem: usize) -> bool {
        self.0.binary_search(&elem).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl FromIterator<usize> for MarkSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        MarkSet::new(iter)
    }
}

/// Hanging nodes `elem` would carry after its marked neighbors are refined.
fn prospective_hanging(mesh: &Mesh, elem: usize, marked: &HashSet<usize>) -> usize {
    let e = mesh.element(elem);
    (0..4)
        .filter(|&k| {
            e.mids[k].is_some()
                || (mesh.edge(e.edges[k]).flag == EdgeFlag::Regular
                    && mesh
                        .neighbor_across(elem, e.edges[k])
                        .is_some_and(|n| marked.contains(&n)))
        })
        .count()
}

/// Closes a mark set so that refining it keeps the mesh 1-irregular.
///
/// A marked element owning a child edge pulls in the coarse element that owns
/// the parent edge. An unmarked element that would end up with four hanging
/// nodes is marked as well, since the element catalog stops at seven nodes.
pub fn post_mark(mesh: &Mesh, marks: &MarkSet) -> MarkSet {
    let mut marked: HashSet<usize> = marks.iter().collect();
    let mut queue: Vec<usize> = marks.iter().collect();
    while let Some(k) = queue.pop() {
        let el = *mesh.element(k);
        for j in 0..4 {
            let edge = el.edges[j];
            match mesh.edge(edge).flag {
                EdgeFlag::Child(p) => {
                    if let Some((coarse, _)) = mesh.edge_elements(p).next() {
                        if marked.insert(coarse) {
                            queue.push(coarse);
                        }
                    }
                }
                EdgeFlag::Regular if el.mids[j].is_none() => {
                    if let Some(n) = mesh.neighbor_across(k, edge) {
                        if !marked.contains(&n) && prospective_hanging(mesh, n, &marked) == 4 {
                            marked.insert(n);
                            queue.push(n);
                        }
                    }
                }
                _ => {}
            }
        }
    }
    MarkSet::new(marked)
}
