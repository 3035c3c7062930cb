//! Transition quadrilaterals with 4 to 7 nodes and their hybrid stress modes.
//!
//! Local node order is the four vertices followed by the mid nodes that are
//! present, in slot order. Mid slot `k` sits on local edge `k`, which joins
//! vertices `k` and `k + 1`; in reference coordinates the slots are the edges
//! `η = -1`, `ξ = 1`, `η = 1` and `ξ = -1`.

mod local;
mod modes;
mod shape;

use thiserror::Error;

use crate::mesh::{GeomCoeffs, Mesh};

pub use local::{
    local_loads, local_matrices, local_mixed, mixed_stress, recover_stress, scalar_local_load, scalar_local_stiffness, stiffness_rank,
    LocalMatrices, MixedMatrices, Traction,
};
pub use modes::{eval_stress, stress_modes, StressModes, MAX_MODES};
pub use shape::{edge_point, shape_functions, Shape};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("element {0} has a nonpositive Jacobian")]
    NonpositiveJacobian(usize),
    #[error("element {0}: flexibility matrix is not positive definite")]
    FlexibilityNotSpd(usize),
}

/// Plane model used to derive the Lamé parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlaneMode {
    #[default]
    Strain,
    Stress,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub e: f64,
    pub nu: f64,
    pub mode: PlaneMode,
}

impl Material {
    pub fn plane_strain(e: f64, nu: f64) -> Self {
        Material {
            e,
            nu,
            mode: PlaneMode::Strain,
        }
    }

    pub fn plane_stress(e: f64, nu: f64) -> Self {
        Material {
            e,
            nu,
            mode: PlaneMode::Stress,
        }
    }

    pub fn mu(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    pub fn lambda(&self) -> f64 {
        match self.mode {
            PlaneMode::Strain => self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu)),
            PlaneMode::Stress => self.e * self.nu / ((1.0 + self.nu) * (1.0 - self.nu)),
        }
    }

    /// Compliance in Voigt form: stress `(τ11, τ22, τ12)` to strain
    /// `(ε11, ε22, 2ε12)`.
    pub fn compliance(&self) -> [[f64; 3]; 3] {
        let mu = self.mu();
        let lam = self.lambda();
        let c = lam / (2.0 * (mu + lam));
        let s = 1.0 / (2.0 * mu);
        [[s * (1.0 - c), -s * c, 0.0], [-s * c, s * (1.0 - c), 0.0], [0.0, 0.0, 2.0 * s]]
    }

    /// Stress from Voigt strain `(ε11, ε22, 2ε12)`.
    pub fn stress(&self, eps: [f64; 3]) -> [f64; 3] {
        let mu = self.mu();
        let lam = self.lambda();
        let tr = eps[0] + eps[1];
        [2.0 * mu * eps[0] + lam * tr, 2.0 * mu * eps[1] + lam * tr, mu * eps[2]]
    }
}

/// Stress mode used on elements without hanging nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Q4Kind {
    #[default]
    Ps,
    Ecq4,
}

impl std::str::FromStr for Q4Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ps" => Ok(Q4Kind::Ps),
            "ecq4" => Ok(Q4Kind::Ecq4),
            _ => Err(format!("unknown 4-node stress mode '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KindTag {
    Q4Ps,
    Q4Ecq4,
    T5,
    T6Opposite,
    T6Adjacent,
    T7,
}

impl KindTag {
    pub fn num_modes(self) -> usize {
        match self {
            KindTag::Q4Ps | KindTag::Q4Ecq4 => 5,
            KindTag::T5 => 7,
            KindTag::T6Opposite | KindTag::T6Adjacent => 9,
            KindTag::T7 => 11,
        }
    }
}

/// Element kind with the mid-node mask and rotation that bring it to the
/// canonical configuration of its stress mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementKind {
    pub tag: KindTag,
    /// Mid slots present, in the rotated frame.
    pub mask: [bool; 4],
    /// Rotated vertex `j` is original vertex `(j + rotation) % 4`.
    pub rotation: usize,
}

impl ElementKind {
    /// Kind for a mid-slot mask given in the element's own vertex order.
    pub fn classify(mask: [bool; 4], q4: Q4Kind) -> Self {
        let count = mask.iter().filter(|&&b| b).count();
        let (tag, canon): (KindTag, Option<[bool; 4]>) = match count {
            0 => (
                match q4 {
                    Q4Kind::Ps => KindTag::Q4Ps,
                    Q4Kind::Ecq4 => KindTag::Q4Ecq4,
                },
                None,
            ),
            1 => (KindTag::T5, None),
            2 if mask[0] == mask[2] => (KindTag::T6Opposite, Some([true, false, true, false])),
            2 => (KindTag::T6Adjacent, Some([false, true, true, false])),
            3 => (KindTag::T7, Some([false, true, true, true])),
            _ => panic!("element with four hanging nodes"),
        };
        let rotation = match canon {
            None => 0,
            Some(c) => (0..4)
                .find(|&r| (0..4).all(|j| mask[(j + r) % 4] == c[j]))
                .expect("every mask of this size rotates to the canonical one"),
        };
        ElementKind {
            tag,
            mask: std::array::from_fn(|j| mask[(j + rotation) % 4]),
            rotation,
        }
    }

    pub fn num_modes(&self) -> usize {
        self.tag.num_modes()
    }

    pub fn num_nodes(&self) -> usize {
        4 + self.mask.iter().filter(|&&b| b).count()
    }
}

/// Element nodes in the rotated local order used by all element routines.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementLayout {
    pub elem: usize,
    pub kind: ElementKind,
    /// Global node indices: four rotated vertices, then present mids.
    pub nodes: Vec<usize>,
    /// Local index in `nodes` of mid slot `k`, if present.
    pub slot_node: [Option<usize>; 4],
    pub geom: GeomCoeffs,
}

impl ElementLayout {
    pub fn new(mesh: &Mesh, elem: usize, q4: Q4Kind) -> Result<Self, ElementError> {
        let el = mesh.element(elem);
        let kind = ElementKind::classify(el.mids.map(|m| m.is_some()), q4);
        let r = kind.rotation;
        let mut nodes: Vec<usize> = (0..4).map(|j| el.vertices[(j + r) % 4]).collect();
        let mut slot_node = [None; 4];
        for (j, slot) in slot_node.iter_mut().enumerate() {
            if let Some(m) = el.mids[(j + r) % 4] {
                *slot = Some(nodes.len());
                nodes.push(m);
            }
        }
        let v: [[f64; 2]; 4] = std::array::from_fn(|j| mesh.coords(nodes[j]));
        let geom = GeomCoeffs::from_vertices(&v);
        if geom.min_jacobian() <= 0.0 {
            return Err(ElementError::NonpositiveJacobian(elem));
        }
        Ok(ElementLayout {
            elem,
            kind,
            nodes,
            slot_node,
            geom,
        })
    }

    /// Layout of a free-standing element with the given vertices and mid
    /// slots (in its own vertex order); mid nodes sit at edge midpoints.
    /// Node ids are `0..4` for the vertices and `4 + k` for mid slot `k`.
    pub fn standalone(v: [[f64; 2]; 4], mids: [bool; 4], q4: Q4Kind) -> Result<Self, ElementError> {
        let mut nodes: Vec<usize> = (0..4).collect();
        let kind = ElementKind::classify(mids, q4);
        let r = kind.rotation;
        let rv: [[f64; 2]; 4] = std::array::from_fn(|j| v[(j + r) % 4]);
        nodes.rotate_left(r);
        let mut slot_node = [None; 4];
        for (j, slot) in slot_node.iter_mut().enumerate() {
            if kind.mask[j] {
                *slot = Some(nodes.len());
                nodes.push(4 + (j + r) % 4);
            }
        }
        let geom = GeomCoeffs::from_vertices(&rv);
        if geom.min_jacobian() <= 0.0 {
            return Err(ElementError::NonpositiveJacobian(0));
        }
        Ok(ElementLayout {
            elem: 0,
            kind,
            nodes: nodes,
            slot_node,
            geom,
        })
    }

    /// Physical coordinates of each local node.
    pub fn node_coords(&self) -> Vec<[f64; 2]> {
        let g = &self.geom;
        let mut c: Vec<[f64; 2]> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
            .iter()
            .map(|&(x, e)| g.map(x, e))
            .collect();
        for k in 0..4 {
            if self.slot_node[k].is_some() {
                let (x, e) = edge_point(k, 0.0);
                c.push(g.map(x, e));
            }
        }
        c
    }

    /// Rotated local edge `k` corresponds to this original local edge.
    pub fn original_edge(&self, k: usize) -> usize {
        (k + self.kind.rotation) % 4
    }

    /// Shape function values and reference gradients for the layout's
    /// nodes, in local order.
    pub fn shape(&self, xi: f64, eta: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let s = shape_functions(self.kind.mask, xi, eta);
        let mut n = Vec::with_capacity(self.nodes.len());
        let mut d = Vec::with_capacity(self.nodes.len());
        for i in 0..4 {
            n.push(s.n[i]);
            d.push(s.dn[i]);
        }
        for k in 0..4 {
            if self.slot_node[k].is_some() {
                n.push(s.n[4 + k]);
                d.push(s.dn[4 + k]);
            }
        }
        (n, d)
    }
}

#[cfg(test)]
mod tests;
