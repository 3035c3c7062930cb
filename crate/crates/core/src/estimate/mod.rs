//! Element error indicators and minimal-cardinality bulk marking.
//!
//! Elasticity uses a metric built from the singular values of the stress
//! gradient; the scalar path uses gradient recovery by nodal averaging.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::adapt::MarkSet;
use crate::elements::{edge_point, ElementLayout};
use crate::quadrature::GaussRule;
use crate::solve::{ElementSolution, Solution};

/// Floor added to the averaged singular values.
pub const METRIC_FLOOR: f64 = 1e-8;
/// Default coarsening fraction `θ_c`.
pub const COARSEN_THETA: f64 = 0.05;

fn rule3() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| GaussRule::square(3))
}

/// One `η_K ≥ 0` per live element.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndicatorField {
    /// Element ids, ascending.
    pub elems: Vec<usize>,
    pub eta: Vec<f64>,
}

impl IndicatorField {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// `Σ η_K²`, summed in element order.
    pub fn total_squared(&self) -> f64 {
        self.eta.iter().map(|e| e * e).sum()
    }

    /// `η_N = (Σ η_K²)^{1/2}`.
    pub fn global(&self) -> f64 {
        self.total_squared().sqrt()
    }

    pub fn get(&self, elem: usize) -> Option<f64> {
        self.elems.binary_search(&elem).ok().map(|i| self.eta[i])
    }

    /// `elem,eta` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("elem,eta\n");
        for (e, v) in self.elems.iter().zip(&self.eta) {
            let _ = writeln!(s, "{e},{v:e}");
        }
        s
    }
}

fn field(sol: &Solution, f: impl Fn(&ElementSolution) -> f64 + Sync + Send) -> IndicatorField {
    IndicatorField {
        elems: sol.elements.iter().map(|e| e.layout.elem).collect(),
        eta: sol.elements.par_iter().map(f).collect(),
    }
}

/// Singular values of a 3×2 matrix, largest first.
fn singular_values(d: [[f64; 2]; 3]) -> [f64; 2] {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for r in d {
        a += r[0] * r[0];
        b += r[0] * r[1];
        c += r[1] * r[1];
    }
    let m = 0.5 * (a + c);
    let q = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    [(m + q).max(0.0).sqrt(), (m - q).max(0.0).sqrt()]
}

/// Physical stress gradient `∂(σ11, σ22, σ12)/∂(x, y)` at a reference point.
pub fn stress_gradient(el: &ElementSolution, xi: f64, eta: f64) -> [[f64; 2]; 3] {
    // Stress modes are at most quadratic, so central differences are exact
    // up to rounding.
    const H: f64 = 1e-3;
    let pg = el.layout.geom.eval(xi, eta).expect("element passed assembly");
    let (sxp, sxm) = (el.stress(xi + H, eta), el.stress(xi - H, eta));
    let (sep, sem) = (el.stress(xi, eta + H), el.stress(xi, eta - H));
    std::array::from_fn(|r| pg.grad([(sxp[r] - sxm[r]) / (2.0 * H), (sep[r] - sem[r]) / (2.0 * H)]))
}

/// Metric of one element: the area-weighted Gauss average of
/// `diag(s₁, s₂)` plus `1e-8 · I`.
pub fn element_metric(el: &ElementSolution) -> [[f64; 2]; 2] {
    let mut s = [0.0; 2];
    let mut area = 0.0;
    for ([xi, eta], w) in rule3().iter() {
        let wj = w * el.layout.geom.jacobian(xi, eta);
        let sv = singular_values(stress_gradient(el, xi, eta));
        s[0] += wj * sv[0];
        s[1] += wj * sv[1];
        area += wj;
    }
    [[s[0] / area + METRIC_FLOOR, 0.0], [0.0, s[1] / area + METRIC_FLOOR]]
}

/// `η_K = √(det M_K) · |K|` with `M_K` from [`element_metric`].
pub fn metric_indicator(sol: &Solution) -> IndicatorField {
    field(sol, |el| {
        let m = element_metric(el);
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]).sqrt() * el.layout.geom.area()
    })
}

/// Reference coordinates of each local node of a layout.
fn node_refs(layout: &ElementLayout) -> Vec<(f64, f64)> {
    let mut r = vec![(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    for k in 0..4 {
        if layout.slot_node[k].is_some() {
            r.push(edge_point(k, 0.0));
        }
    }
    r
}

/// Gradient recovery indicator `η_K = ‖G_h − ∇u_h‖_{L²(K)}`.
///
/// Each element evaluates its own gradient at its nodes; `G_h` at a node is
/// the area-weighted average over the elements containing it, and on each
/// element `G_h` is interpolated with that element's shape functions. All
/// solution components are included.
pub fn recovery_indicator(sol: &Solution) -> IndicatorField {
    let nc = sol.components;
    let mut acc = vec![([[0.0; 2]; 2], 0.0); sol.nodal.len()];
    for el in &sol.elements {
        let area = el.layout.geom.area();
        for (&n, (xi, eta)) in el.layout.nodes.iter().zip(node_refs(&el.layout)) {
            let g = el.gradient(xi, eta, nc);
            for c in 0..nc {
                for j in 0..2 {
                    acc[n].0[c][j] += area * g[c][j];
                }
            }
            acc[n].1 += area;
        }
    }
    let recovered: Vec<[[f64; 2]; 2]> = acc
        .iter()
        .map(|(g, a)| if *a > 0.0 { g.map(|r| r.map(|v| v / a)) } else { *g })
        .collect();
    field(sol, |el| {
        let mut e2 = 0.0;
        for ([xi, eta], w) in rule3().iter() {
            let wj = w * el.layout.geom.jacobian(xi, eta);
            let (n, _) = el.layout.shape(xi, eta);
            let gh = el.gradient(xi, eta, nc);
            for c in 0..nc {
                for j in 0..2 {
                    let g: f64 = el.layout.nodes.iter().zip(&n).map(|(&a, na)| na * recovered[a][c][j]).sum();
                    e2 += wj * (g - gh[c][j]).powi(2);
                }
            }
        }
        e2.sqrt()
    })
}

/// Smallest set with `Σ_marked η_K² > θ η_N²`: elements sorted by
/// decreasing `η_K` (ties to the lower id) and the shortest such prefix
/// taken. All-zero indicators give an empty set.
pub fn dorfler_mark(ind: &IndicatorField, theta: f64) -> MarkSet {
    let total = ind.total_squared();
    if total <= 0.0 {
        return MarkSet::default();
    }
    let mut order: Vec<usize> = (0..ind.len()).collect();
    order.sort_by(|&a, &b| ind.eta[b].total_cmp(&ind.eta[a]).then(ind.elems[a].cmp(&ind.elems[b])));
    let mut sum = 0.0;
    let mut out = Vec::new();
    for i in order {
        out.push(ind.elems[i]);
        sum += ind.eta[i] * ind.eta[i];
        if sum > theta * total {
            break;
        }
    }
    MarkSet::new(out)
}

/// Elements with `η_K < (θ_c η_N² / N)^{1/2}`, offered for coarsening.
pub fn coarsen_marks(ind: &IndicatorField, theta_c: f64) -> MarkSet {
    if ind.is_empty() {
        return MarkSet::default();
    }
    let bound = (theta_c * ind.total_squared() / ind.len() as f64).sqrt();
    MarkSet::new(ind.elems.iter().zip(&ind.eta).filter(|(_, &e)| e < bound).map(|(&k, _)| k))
}

#[cfg(test)]
mod tests;
