use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{Dof, DofMap, ElementSolution, ProblemSpec, Solution, SolveError, SparseSystem};
use crate::elements::{
    local_loads, local_matrices, local_mixed, mixed_stress, scalar_local_stiffness, ElementLayout, MixedMatrices,
    Traction,
};
use crate::mesh::{EdgeFlag, Mesh};

/// Element matrices kept after assembly for stress recovery and residuals.
#[derive(Debug, Clone)]
pub struct ElementCache {
    pub layout: ElementLayout,
    pub k: DMatrix<f64>,
    pub f: Vec<f64>,
    /// `H⁻¹ G`, condensed vector elements only.
    pub hinv_g: Option<DMatrix<f64>>,
    /// Pressure split and the pressure's equation index, mixed elements
    /// only; `k` is then the λ-free part.
    pub mixed: Option<(MixedMatrices, usize)>,
}

impl ElementCache {
    /// Global DOF of each local row.
    pub fn dofs(&self, map: &DofMap) -> Vec<Dof> {
        let nc = map.components;
        self.layout
            .nodes
            .iter()
            .flat_map(|&n| (0..nc).map(move |c| map.get(n, c)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Assembly {
    pub system: SparseSystem,
    /// One entry per live element, in increasing element id.
    pub cache: Vec<ElementCache>,
    pub components: usize,
    /// Displacement equations; pressure equations follow them.
    pub num_displacement: usize,
    pub num_pressures: usize,
    /// Pressures are solved for as `p / pressure_scale` to balance the
    /// saddle-point blocks.
    pub pressure_scale: f64,
}

impl Assembly {
    pub fn is_mixed(&self) -> bool {
        self.num_pressures > 0
    }
}

fn element_cache(mesh: &Mesh, spec: &ProblemSpec, mixed: bool, elem: usize) -> Result<ElementCache, SolveError> {
    let err = |source| SolveError::Element { elem, source };
    let layout = ElementLayout::new(mesh, elem, spec.q4).map_err(err)?;
    let el = mesh.element(elem);
    let mut tractions = Vec::new();
    for (k, &e) in el.edges.iter().enumerate() {
        if mesh.edge(e).flag != EdgeFlag::Boundary {
            continue;
        }
        let [a, b] = mesh.edge(e).ends.map(|n| mesh.coords(n));
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        if let Some(rule) = spec.neumann.iter().find(|r| (r.on)(mid)) {
            tractions.push(Traction {
                edge: k,
                g: &*rule.traction,
            });
        }
    }
    let body = spec.body.as_deref().map(|b| b as &(dyn Fn([f64; 2]) -> [f64; 2] + Sync));
    let f2 = local_loads(&layout, body, &tractions, spec.edge_points);
    if spec.components == 1 {
        let k = scalar_local_stiffness(&layout).map_err(err)?;
        let f = f2.iter().step_by(2).copied().collect();
        Ok(ElementCache {
            layout,
            k,
            f,
            hinv_g: None,
            mixed: None,
        })
    } else if let Some(mm) = if mixed {
        local_mixed(&layout, &spec.material).map_err(err)?
    } else {
        None
    } {
        Ok(ElementCache {
            layout,
            k: mm.k.clone(),
            f: f2,
            hinv_g: None,
            mixed: Some((mm, 0)),
        })
    } else {
        let lm = local_matrices(&layout, &spec.material).map_err(err)?;
        Ok(ElementCache {
            layout,
            k: lm.k,
            f: f2,
            hinv_g: Some(lm.hinv_g),
            mixed: None,
        })
    }
}

/// Global stiffness and load on the free DOFs. Element matrices are built in
/// parallel; the scatter is sequential in element order so the result does
/// not depend on scheduling.
///
/// With the mixed formulation each element whose stress modes allow it adds
/// one pressure equation after the displacement equations; the system is
/// then symmetric but indefinite.
pub fn assemble(mesh: &Mesh, spec: &ProblemSpec, dofs: &DofMap) -> Result<Assembly, SolveError> {
    let mixed = spec.uses_mixed();
    let ids: Vec<usize> = mesh.element_ids().collect();
    let mut cache: Vec<ElementCache> = ids
        .par_iter()
        .map(|&e| element_cache(mesh, spec, mixed, e))
        .collect::<Result<_, _>>()?;
    let n = dofs.num_equations();
    let mut np = 0;
    for c in cache.iter_mut() {
        if let Some((_, eq)) = c.mixed.as_mut() {
            *eq = n + np;
            np += 1;
        }
    }
    let scale = spec.material.mu();
    let mut rhs = vec![0.0; n + np];
    let mut entries = Vec::new();
    for c in &cache {
        let d = c.dofs(dofs);
        if let Some((mm, eq)) = &c.mixed {
            for (j, dj) in d.iter().enumerate() {
                match *dj {
                    Dof::Free(gj) => entries.push((*eq, gj, scale * mm.b[j])),
                    Dof::Fixed(v) => rhs[*eq] -= scale * mm.b[j] * v,
                }
            }
            entries.push((*eq, *eq, -scale * scale * mm.d));
        }
        for (i, di) in d.iter().enumerate() {
            let Dof::Free(gi) = *di else { continue };
            rhs[gi] += c.f[i];
            for (j, dj) in d.iter().enumerate() {
                match *dj {
                    Dof::Free(gj) if gi >= gj => entries.push((gi, gj, c.k[(i, j)])),
                    Dof::Free(_) => {}
                    Dof::Fixed(v) => rhs[gi] -= c.k[(i, j)] * v,
                }
            }
        }
    }
    Ok(Assembly {
        system: SparseSystem::from_entries(n + np, entries, rhs),
        cache,
        components: spec.components,
        num_displacement: n,
        num_pressures: np,
        pressure_scale: scale,
    })
}

impl Assembly {
    /// Nodal values and element stress parameters from the solved free DOFs.
    pub fn solution(&self, dofs: &DofMap, x: &[f64]) -> Solution {
        let nc = self.components;
        let cap = self
            .cache
            .iter()
            .flat_map(|c| c.layout.nodes.iter())
            .max()
            .map_or(0, |&m| m + 1);
        let value = |d: Dof| match d {
            Dof::Free(g) => x[g],
            Dof::Fixed(v) => v,
        };
        let mut nodal = vec![[0.0; 2]; cap];
        let elements = self
            .cache
            .iter()
            .map(|c| {
                let u: Vec<f64> = c.dofs(dofs).into_iter().map(value).collect();
                for (a, &n) in c.layout.nodes.iter().enumerate() {
                    for k in 0..nc {
                        nodal[n][k] = u[nc * a + k];
                    }
                }
                let beta = match (&c.hinv_g, &c.mixed) {
                    (Some(hg), _) => (hg * nalgebra::DVector::from_column_slice(&u)).as_slice().to_vec(),
                    (None, Some((mm, eq))) => mixed_stress(mm, &u, self.pressure_scale * x[*eq]),
                    _ => Vec::new(),
                };
                ElementSolution {
                    layout: c.layout.clone(),
                    u,
                    beta,
                }
            })
            .collect();
        Solution {
            components: nc,
            nodal,
            elements,
            num_equations: dofs.num_equations() + self.num_pressures,
        }
    }
}
