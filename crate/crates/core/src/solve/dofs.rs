use super::{ProblemSpec, SolveError};
use crate::mesh::{Mesh, NodeFlag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dof {
    Free(usize),
    Fixed(f64),
}

/// Node × component to equation index or prescribed value. Equations are
/// numbered in (node, component) lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub components: usize,
    entries: Vec<Option<[Dof; 2]>>,
    num_equations: usize,
}

impl DofMap {
    pub fn get(&self, node: usize, component: usize) -> Dof {
        self.entries[node].expect("live node")[component]
    }

    pub fn num_equations(&self) -> usize {
        self.num_equations
    }

    /// Nodes with at least one free component, in equation order.
    pub fn free_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().enumerate().filter_map(|(i, e)| {
            e.filter(|d| d.iter().any(|x| matches!(x, Dof::Free(_))))
                .map(|_| i)
        })
    }
}

pub fn build_dof_map(mesh: &Mesh, spec: &ProblemSpec) -> Result<DofMap, SolveError> {
    let nc = spec.components;
    let mut entries = vec![None; mesh.node_capacity()];
    let mut next = 0;
    for n in mesh.node_ids() {
        let node = mesh.node(n);
        let p = node.coords();
        let mut d = [Dof::Fixed(0.0); 2];
        for (c, dc) in d.iter_mut().enumerate().take(nc) {
            let rule = (node.flag == NodeFlag::Boundary)
                .then(|| spec.dirichlet.iter().find(|r| r.components[c] && (r.on)(p)))
                .flatten();
            *dc = match rule {
                Some(r) => Dof::Fixed((r.value)(p)[c]),
                None => {
                    next += 1;
                    Dof::Free(next - 1)
                }
            };
        }
        entries[n] = Some(d);
    }
    if next == 0 {
        return Err(SolveError::NoEquations);
    }
    Ok(DofMap {
        components: nc,
        entries,
        num_equations: next,
    })
}
