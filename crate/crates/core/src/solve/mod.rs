//! Degrees of freedom, global assembly, the sparse SPD solve, and
//! post-processing of the discrete solution.
//!
//! Vector problems use the hybrid stress elements: each element contributes
//! its condensed stiffness `Gᵀ H⁻¹ G` and the stress parameters are recovered
//! afterwards. For nearly incompressible materials one constant pressure per
//! element is kept as an unknown instead, which keeps the large Lamé
//! parameter out of the assembled matrix. Scalar problems (`components == 1`) use the same transition
//! basis with the plain `∫ ∇u · ∇v` stiffness.

mod assemble;
mod dofs;
mod post;
mod sparse;

use std::sync::Arc;

use thiserror::Error;

use crate::elements::{ElementError, ElementLayout, Material, Q4Kind};
use crate::mesh::MeshError;

pub use assemble::{assemble, Assembly, ElementCache};
pub use dofs::{build_dof_map, Dof, DofMap};
pub use post::{error_norms, gauss_stresses, mean_stress, nodal_residual, ErrorNorms};
pub use sparse::{solve_spd, solve_symmetric, SparseSystem};

pub type Point = [f64; 2];
pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type GradientField = Arc<dyn Fn(Point) -> [[f64; 2]; 2] + Send + Sync>;
pub type StressField = Arc<dyn Fn(Point) -> [f64; 3] + Send + Sync>;
pub type Predicate = Arc<dyn Fn(Point) -> bool + Send + Sync>;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no free degrees of freedom")]
    NoEquations,
    #[error("element {elem}: {source}")]
    Element {
        elem: usize,
        #[source]
        source: ElementError,
    },
    #[error("matrix is not positive definite (pivot {index}, diagonal entry {diagonal:e})")]
    NotSpd { index: usize, diagonal: f64 },
    #[error("solve residual {residual:e} exceeds bound {bound:e}")]
    Residual { residual: f64, bound: f64 },
    #[error("sparse backend: {0}")]
    Backend(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Prescribed values on boundary nodes where `on` holds. Only the components
/// set in `components` are fixed.
#[derive(Clone)]
pub struct DirichletRule {
    pub on: Predicate,
    pub components: [bool; 2],
    pub value: VectorField,
}

/// Traction on boundary edges whose midpoint satisfies `on`.
#[derive(Clone)]
pub struct NeumannRule {
    pub on: Predicate,
    pub traction: VectorField,
}

/// Known exact fields, for error reporting. For scalar problems only the
/// first component and the first gradient row are used.
#[derive(Clone, Default)]
pub struct ExactSolution {
    pub u: Option<VectorField>,
    /// `grad[i][j] = ∂uᵢ/∂xⱼ`.
    pub grad: Option<GradientField>,
    pub stress: Option<StressField>,
}

/// How vector problems treat the hydrostatic stress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// Mixed when `λ / μ > 1e3`, condensed otherwise.
    #[default]
    Auto,
    /// Every element condensed to `Gᵀ H⁻¹ G`; the system is SPD.
    Condensed,
    /// Element pressures kept as unknowns; the system is indefinite.
    Mixed,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub material: Material,
    /// 1 for a scalar (Poisson) problem, 2 for plane elasticity.
    pub components: usize,
    pub body: Option<VectorField>,
    /// Applied to boundary-flagged nodes; the first matching rule wins per
    /// component.
    pub dirichlet: Vec<DirichletRule>,
    /// Applied to boundary edges; the first matching rule wins. Boundary
    /// edges with no rule are traction free.
    pub neumann: Vec<NeumannRule>,
    pub exact: ExactSolution,
    pub q4: Q4Kind,
    /// Gauss points per edge for traction integrals.
    pub edge_points: usize,
    pub formulation: Formulation,
}

impl ProblemSpec {
    pub fn new(material: Material, components: usize) -> Self {
        assert!(components == 1 || components == 2, "components must be 1 or 2");
        ProblemSpec {
            material,
            components,
            body: None,
            dirichlet: Vec::new(),
            neumann: Vec::new(),
            exact: ExactSolution::default(),
            q4: Q4Kind::Ps,
            edge_points: 3,
            formulation: Formulation::Auto,
        }
    }

    /// Whether assembly keeps element pressures as unknowns.
    pub fn uses_mixed(&self) -> bool {
        if self.components != 2 {
            return false;
        }
        match self.formulation {
            Formulation::Auto => self.material.lambda() > 1e3 * self.material.mu(),
            Formulation::Condensed => false,
            Formulation::Mixed => true,
        }
    }
}

/// Per-element part of a solution.
#[derive(Debug, Clone)]
pub struct ElementSolution {
    pub layout: ElementLayout,
    /// Local displacements, interleaved per node for vector problems.
    pub u: Vec<f64>,
    /// Stress parameters; empty for scalar problems.
    pub beta: Vec<f64>,
}

impl ElementSolution {
    /// Stress at a reference point of the layout's frame.
    pub fn stress(&self, xi: f64, eta: f64) -> [f64; 3] {
        crate::elements::eval_stress(self.layout.kind.tag, &self.layout.geom, &self.beta, xi, eta)
    }

    /// Displacement gradient `∂uᵢ/∂xⱼ` at a reference point.
    pub fn gradient(&self, xi: f64, eta: f64, components: usize) -> [[f64; 2]; 2] {
        let pg = self.layout.geom.eval(xi, eta).expect("element passed assembly");
        let (_, d) = self.layout.shape(xi, eta);
        let mut g = [[0.0; 2]; 2];
        for (a, da) in d.iter().enumerate() {
            let gx = pg.grad(*da);
            for c in 0..components {
                let ua = self.u[components * a + c];
                g[c][0] += ua * gx[0];
                g[c][1] += ua * gx[1];
            }
        }
        g
    }

    /// Displacement at a reference point.
    pub fn value(&self, xi: f64, eta: f64, components: usize) -> [f64; 2] {
        let (n, _) = self.layout.shape(xi, eta);
        let mut v = [0.0; 2];
        for (a, na) in n.iter().enumerate() {
            for (c, vc) in v.iter_mut().enumerate().take(components) {
                *vc += na * self.u[components * a + c];
            }
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub components: usize,
    /// Nodal values indexed by node id (dead slots hold zeros).
    pub nodal: Vec<[f64; 2]>,
    /// One entry per live element, in increasing element id.
    pub elements: Vec<ElementSolution>,
    /// Displacement plus pressure equations.
    pub num_equations: usize,
}

impl Solution {
    pub fn element(&self, elem: usize) -> Option<&ElementSolution> {
        self.elements
            .binary_search_by_key(&elem, |e| e.layout.elem)
            .ok()
            .map(|i| &self.elements[i])
    }
}

/// Builds the DOF map, assembles, solves, and recovers element stresses.
pub fn solve_problem(mesh: &crate::mesh::Mesh, spec: &ProblemSpec) -> Result<Solution, SolveError> {
    let dofs = build_dof_map(mesh, spec)?;
    let asm = assemble(mesh, spec, &dofs)?;
    let x = if asm.is_mixed() {
        solve_symmetric(&asm.system)?
    } else {
        solve_spd(&asm.system)?
    };
    Ok(asm.solution(&dofs, &x))
}
