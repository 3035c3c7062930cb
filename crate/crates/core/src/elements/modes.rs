use super::KindTag;
use crate::mesh::GeomCoeffs;

pub const MAX_MODES: usize = 11;

/// Columns of the stress-mode matrix `P(ξ, η)` at one point, Voigt order
/// `(τ11, τ22, τ12)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressModes {
    pub cols: [[f64; 3]; MAX_MODES],
    pub n: usize,
}

impl StressModes {
    pub fn columns(&self) -> &[[f64; 3]] {
        &self.cols[..self.n]
    }

    pub fn apply(&self, beta: &[f64]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for (c, b) in self.columns().iter().zip(beta) {
            for r in 0..3 {
                s[r] += c[r] * b;
            }
        }
        s
    }
}

/// Stress modes of the given kind. `g` must already be in the canonical
/// (rotated) vertex order of the element.
pub fn stress_modes(tag: KindTag, g: &GeomCoeffs, xi: f64, eta: f64) -> StressModes {
    let GeomCoeffs {
        a1,
        a2,
        a12,
        b1,
        b2,
        b12,
        j0,
        ..
    } = *g;
    let mut cols = [[0.0; 3]; MAX_MODES];
    cols[0] = [1.0, 0.0, 0.0];
    cols[1] = [0.0, 1.0, 0.0];
    cols[2] = [0.0, 0.0, 1.0];
    let (x, e) = (xi, eta);
    let n = tag.num_modes();
    match tag {
        KindTag::Q4Ps => {
            cols[3] = [e, b1 * b1 / (a1 * a1) * e, b1 / a1 * e];
            cols[4] = [a2 * a2 / (b2 * b2) * x, x, a2 / b2 * x];
        }
        KindTag::Q4Ecq4 => {
            cols[0] = [1.0 - b12 / b2 * x, b1 * b12 / (a1 * a1) * e, b12 / a1 * e];
            cols[1] = [a12 * a2 / (b2 * b2) * x, 1.0 - a12 / a1 * e, a12 / b2 * x];
            cols[2] = [
                (a12 * b2 - a2 * b12) / (b2 * b2) * x,
                (a1 * b12 - a12 * b1) / (a1 * a1) * e,
                1.0 - b12 / b2 * x - a12 / a1 * e,
            ];
            cols[3] = [e, b1 * b1 / (a1 * a1) * e, b1 / a1 * e];
            cols[4] = [a2 * a2 / (b2 * b2) * x, x, a2 / b2 * x];
        }
        _ => {
            cols[3] = [e, 0.0, (b1 * b1 * x + b1 * b2 * e) / j0];
            cols[4] = [0.0, x, (a1 * a2 * x + a2 * a2 * e) / j0];
            cols[5] = [x, 0.0, -(b1 * b2 * x + b2 * b2 * e) / j0];
            cols[6] = [0.0, e, -(a1 * a1 * x + a1 * a2 * e) / j0];
            let (xx, ee, xe) = (x * x, e * e, x * e);
            let opp = [
                2.0 * a2 * a2 * xe - 2.0 * a1 * a2 * xx,
                2.0 * b2 * b2 * xe - 2.0 * b1 * b2 * xx,
                2.0 * a2 * b2 * xe - (a1 * b2 + a2 * b1) * xx,
            ];
            let xi_sq = [a2 * a2 * xx, b2 * b2 * xx, a2 * b2 * xx];
            let eta_sq = [a1 * a1 * ee, b1 * b1 * ee, a1 * b1 * ee];
            match tag {
                KindTag::T6Opposite => {
                    cols[7] = opp;
                    cols[8] = xi_sq;
                }
                KindTag::T6Adjacent => {
                    cols[7] = eta_sq;
                    cols[8] = xi_sq;
                }
                KindTag::T7 => {
                    cols[7] = eta_sq;
                    cols[8] = xi_sq;
                    cols[9] = [
                        2.0 * a1 * a1 * xe - 2.0 * a1 * a2 * ee,
                        2.0 * b1 * b1 * xe - 2.0 * b1 * b2 * ee,
                        2.0 * a1 * b1 * xe - (a1 * b2 + a2 * b1) * ee,
                    ];
                    cols[10] = opp;
                }
                _ => {}
            }
        }
    }
    StressModes { cols, n }
}

/// Stress `P(ξ, η) β` at one reference point.
pub fn eval_stress(tag: KindTag, g: &GeomCoeffs, beta: &[f64], xi: f64, eta: f64) -> [f64; 3] {
    stress_modes(tag, g, xi, eta).apply(beta)
}
