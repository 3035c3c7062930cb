use std::sync::OnceLock;

use rayon::prelude::*;

use super::{Assembly, ElementSolution, ExactSolution, Solution};
use crate::quadrature::GaussRule;

fn rule(n: usize) -> &'static GaussRule {
    static R3: OnceLock<GaussRule> = OnceLock::new();
    static R5: OnceLock<GaussRule> = OnceLock::new();
    match n {
        3 => R3.get_or_init(|| GaussRule::square(3)),
        5 => R5.get_or_init(|| GaussRule::square(5)),
        _ => unreachable!(),
    }
}

/// Relative and absolute errors; a field is `None` when the exact data for
/// it is missing.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorNorms {
    /// Broken `H¹` seminorm of `u − u_h` over `|u|₁`.
    pub displacement: Option<f64>,
    /// `‖σ − σ_h‖₀ / ‖σ‖₀`.
    pub stress: Option<f64>,
    pub displacement_abs: Option<f64>,
    pub stress_abs: Option<f64>,
}

fn voigt_sq(s: [f64; 3]) -> f64 {
    s[0] * s[0] + s[1] * s[1] + 2.0 * s[2] * s[2]
}

/// Errors by 5×5 Gauss quadrature on every element.
pub fn error_norms(sol: &Solution, exact: &ExactSolution) -> ErrorNorms {
    let nc = sol.components;
    let vector = nc == 2;
    let per: Vec<[f64; 4]> = sol
        .elements
        .par_iter()
        .map(|el| {
            let mut acc = [0.0; 4];
            for ([xi, eta], w) in rule(5).iter() {
                let Some(pg) = el.layout.geom.eval(xi, eta) else { continue };
                let wj = w * pg.det;
                if let Some(grad) = &exact.grad {
                    let g = grad(pg.x);
                    let gh = el.gradient(xi, eta, nc);
                    for c in 0..nc {
                        for j in 0..2 {
                            acc[0] += wj * (g[c][j] - gh[c][j]).powi(2);
                            acc[1] += wj * g[c][j].powi(2);
                        }
                    }
                }
                if let (Some(stress), true) = (&exact.stress, vector) {
                    let s = stress(pg.x);
                    let sh = el.stress(xi, eta);
                    acc[2] += wj * voigt_sq([s[0] - sh[0], s[1] - sh[1], s[2] - sh[2]]);
                    acc[3] += wj * voigt_sq(s);
                }
            }
            acc
        })
        .collect();
    let mut t = [0.0; 4];
    for a in &per {
        for i in 0..4 {
            t[i] += a[i];
        }
    }
    let rel = |e: f64, r: f64| if r > 0.0 { e.sqrt() / r.sqrt() } else { e.sqrt() };
    let has_u = exact.grad.is_some();
    let has_s = exact.stress.is_some() && vector;
    ErrorNorms {
        displacement: has_u.then(|| rel(t[0], t[1])),
        stress: has_s.then(|| rel(t[2], t[3])),
        displacement_abs: has_u.then(|| t[0].sqrt()),
        stress_abs: has_s.then(|| t[2].sqrt()),
    }
}

/// Physical point and stress at each 3×3 Gauss point of every element.
pub fn gauss_stresses(sol: &Solution) -> Vec<Vec<([f64; 2], [f64; 3])>> {
    sol.elements
        .iter()
        .map(|el| {
            rule(3)
                .iter()
                .map(|([xi, eta], _)| (el.layout.geom.map(xi, eta), el.stress(xi, eta)))
                .collect()
        })
        .collect()
}

/// Area average of the element stress.
pub fn mean_stress(el: &ElementSolution) -> [f64; 3] {
    let mut s = [0.0; 3];
    let mut area = 0.0;
    for ([xi, eta], w) in rule(3).iter() {
        let wj = w * el.layout.geom.jacobian(xi, eta);
        let v = el.stress(xi, eta);
        for r in 0..3 {
            s[r] += wj * v[r];
        }
        area += wj;
    }
    s.map(|v| v / area)
}

/// Assembled `K u − F` per node, over all DOFs. At free DOFs this is the
/// discrete residual; at fixed DOFs it is the reaction.
pub fn nodal_residual(asm: &Assembly, sol: &Solution) -> Vec<[f64; 2]> {
    let nc = asm.components;
    let mut r = vec![[0.0; 2]; sol.nodal.len()];
    for (c, el) in asm.cache.iter().zip(&sol.elements) {
        // Pressure is the hydrostatic parameter `(β0 + β1) / 2`.
        let bp = c.mixed.as_ref().map(|(mm, _)| (mm, 0.5 * (el.beta[0] + el.beta[1])));
        for (a, &n) in c.layout.nodes.iter().enumerate() {
            for k in 0..nc {
                let i = nc * a + k;
                let mut ku: f64 = (0..el.u.len()).map(|j| c.k[(i, j)] * el.u[j]).sum();
                if let Some((mm, p)) = bp {
                    ku += mm.b[i] * p;
                }
                r[n][k] += ku - c.f[i];
            }
        }
    }
    r
}
