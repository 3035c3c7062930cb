use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{stress_modes, ElementError, ElementLayout, Material};
use crate::quadrature::{gauss_1d, GaussRule};

fn rule3() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| GaussRule::square(3))
}

/// Flexibility `H`, leverage `G`, condensed stiffness `K = Gᵀ H⁻¹ G`, and
/// `H⁻¹ G` for stress recovery.
#[derive(Debug, Clone)]
pub struct LocalMatrices {
    pub h: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub hinv_g: DMatrix<f64>,
}

/// Cholesky factor of `D H D` with `D = diag(H)^{-1/2}`, rejecting pivots
/// below `1e-13 · max pivot`. The scaling makes the test independent of
/// element size: higher stress modes carry powers of the element's
/// half-widths.
struct SpdFactor {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    d: DVector<f64>,
}

impl SpdFactor {
    fn new(h: &DMatrix<f64>) -> Option<Self> {
        let n = h.nrows();
        if (0..n).any(|i| !(h[(i, i)] > 0.0)) {
            return None;
        }
        let d = DVector::from_fn(n, |i, _| 1.0 / h[(i, i)].sqrt());
        let hs = DMatrix::from_fn(n, n, |i, j| d[i] * h[(i, j)] * d[j]);
        let chol = hs.cholesky()?;
        let l = chol.l_dirty();
        let pivots: Vec<f64> = (0..n).map(|i| l[(i, i)] * l[(i, i)]).collect();
        let max = pivots.iter().cloned().fold(0.0, f64::max);
        if pivots.iter().any(|&p| p < 1e-13 * max) {
            return None;
        }
        Some(SpdFactor { chol, d })
    }

    /// `H⁻¹ B`.
    fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        for (i, mut row) in x.row_iter_mut().enumerate() {
            row *= self.d[i];
        }
        self.chol.solve_mut(&mut x);
        for (i, mut row) in x.row_iter_mut().enumerate() {
            row *= self.d[i];
        }
        x
    }

    fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.component_mul(&self.d);
        self.chol.solve_mut(&mut x);
        x.component_mul(&self.d)
    }
}

pub fn local_matrices(layout: &ElementLayout, mat: &Material) -> Result<LocalMatrices, ElementError> {
    let tag = layout.kind.tag;
    let nb = tag.num_modes();
    let nn = layout.nodes.len();
    let s = mat.compliance();
    let mut h = DMatrix::<f64>::zeros(nb, nb);
    let mut g = DMatrix::<f64>::zeros(nb, 2 * nn);
    for ([xi, eta], w) in rule3().iter() {
        let pg = layout
            .geom
            .eval(xi, eta)
            .ok_or(ElementError::NonpositiveJacobian(layout.elem))?;
        let wj = w * pg.det;
        let p = stress_modes(tag, &layout.geom, xi, eta);
        let cols = p.columns();
        // S P, column by column.
        let sp: Vec<[f64; 3]> = cols
            .iter()
            .map(|c| std::array::from_fn(|r| s[r][0] * c[0] + s[r][1] * c[1] + s[r][2] * c[2]))
            .collect();
        for i in 0..nb {
            for j in i..nb {
                let v = cols[i][0] * sp[j][0] + cols[i][1] * sp[j][1] + cols[i][2] * sp[j][2];
                h[(i, j)] += wj * v;
            }
        }
        let (_, dref) = layout.shape(xi, eta);
        for (a, d) in dref.iter().enumerate() {
            let [dx, dy] = pg.grad(*d);
            for (i, c) in cols.iter().enumerate() {
                // B columns: u → (dx, 0, dy), v → (0, dy, dx).
                g[(i, 2 * a)] += wj * (c[0] * dx + c[2] * dy);
                g[(i, 2 * a + 1)] += wj * (c[1] * dy + c[2] * dx);
            }
        }
    }
    for i in 0..nb {
        for j in 0..i {
            h[(i, j)] = h[(j, i)];
        }
    }
    let chol = SpdFactor::new(&h).ok_or(ElementError::FlexibilityNotSpd(layout.elem))?;
    let hinv_g = chol.solve(&g);
    let mut k = g.transpose() * &hinv_g;
    let kt = k.transpose();
    k = (k + kt) * 0.5;
    Ok(LocalMatrices { h, g, k, hinv_g })
}

/// Hybrid element split into a λ-free part and one constant pressure mode,
/// for nearly incompressible materials.
///
/// The stress basis is rotated so that mode 0 is the hydrostatic constant
/// `(1, 1, 0)` with parameter `p` and mode 1 is `(1, -1, 0)`; the remaining
/// parameters `r` are condensed out. The element then contributes
/// `K u + bᵀ p` to the force balance and `b u − d p = 0` as its pressure
/// equation. Eliminating `p` gives back `Gᵀ H⁻¹ G`.
#[derive(Debug, Clone)]
pub struct MixedMatrices {
    pub k: DMatrix<f64>,
    pub b: DVector<f64>,
    pub d: f64,
    /// `H_rr⁻¹ G_r`.
    pub hinv_g: DMatrix<f64>,
    /// `(κ/2) H_rr⁻¹ Q_r0`, with `κ = 1 / (2(μ + λ))`.
    pub hinv_q: DVector<f64>,
}

/// Mixed split of the element, or `None` when its first two stress modes
/// are not the constants `(1, 0, 0)` and `(0, 1, 0)` (ECQ4 on a
/// non-parallelogram).
pub fn local_mixed(layout: &ElementLayout, mat: &Material) -> Result<Option<MixedMatrices>, ElementError> {
    let tag = layout.kind.tag;
    let g0 = &layout.geom;
    let scale = g0.a1.abs() + g0.a2.abs() + g0.b1.abs() + g0.b2.abs();
    if tag == super::KindTag::Q4Ecq4 && g0.a12.abs() + g0.b12.abs() > 1e-12 * scale {
        return Ok(None);
    }
    let nb = tag.num_modes();
    let nn = layout.nodes.len();
    let (mu, lam) = (mat.mu(), mat.lambda());
    let kappa = 1.0 / (2.0 * (mu + lam));
    let s = 1.0 / (2.0 * mu);
    let mut hd = DMatrix::<f64>::zeros(nb, nb);
    let mut q = DMatrix::<f64>::zeros(nb, nb);
    let mut g = DMatrix::<f64>::zeros(nb, 2 * nn);
    for ([xi, eta], w) in rule3().iter() {
        let pg = layout
            .geom
            .eval(xi, eta)
            .ok_or(ElementError::NonpositiveJacobian(layout.elem))?;
        let wj = w * pg.det;
        let p = stress_modes(tag, &layout.geom, xi, eta);
        let mut cols = p.columns().to_vec();
        cols[0] = [1.0, 1.0, 0.0];
        cols[1] = [1.0, -1.0, 0.0];
        // Deviatoric compliance: s [[½, -½, 0], [-½, ½, 0], [0, 0, 2]].
        let sd: Vec<[f64; 3]> = cols
            .iter()
            .map(|c| [0.5 * s * (c[0] - c[1]), 0.5 * s * (c[1] - c[0]), 2.0 * s * c[2]])
            .collect();
        let tr: Vec<f64> = cols.iter().map(|c| c[0] + c[1]).collect();
        for i in 0..nb {
            for j in i..nb {
                hd[(i, j)] += wj * (cols[i][0] * sd[j][0] + cols[i][1] * sd[j][1] + cols[i][2] * sd[j][2]);
                q[(i, j)] += wj * tr[i] * tr[j];
            }
        }
        let (_, dref) = layout.shape(xi, eta);
        for (a, d) in dref.iter().enumerate() {
            let [dx, dy] = pg.grad(*d);
            for (i, c) in cols.iter().enumerate() {
                g[(i, 2 * a)] += wj * (c[0] * dx + c[2] * dy);
                g[(i, 2 * a + 1)] += wj * (c[1] * dy + c[2] * dx);
            }
        }
    }
    for i in 0..nb {
        for j in 0..i {
            hd[(i, j)] = hd[(j, i)];
            q[(i, j)] = q[(j, i)];
        }
    }
    let nr = nb - 1;
    let hrr = DMatrix::from_fn(nr, nr, |i, j| hd[(i + 1, j + 1)] + 0.5 * kappa * q[(i + 1, j + 1)]);
    let qr0 = DVector::from_fn(nr, |i, _| q[(i + 1, 0)]);
    let gr = g.rows(1, nr).into_owned();
    let chol = SpdFactor::new(&hrr).ok_or(ElementError::FlexibilityNotSpd(layout.elem))?;
    let hinv_g = chol.solve(&gr);
    let hinv_q = chol.solve_vec(&qr0) * (0.5 * kappa);
    let mut k = gr.transpose() * &hinv_g;
    let kt = k.transpose();
    k = (k + kt) * 0.5;
    let b = g.row(0).transpose() - hinv_g.transpose() * (&qr0 * (0.5 * kappa));
    let d = 0.5 * kappa * (q[(0, 0)] - qr0.dot(&hinv_q));
    Ok(Some(MixedMatrices { k, b, d, hinv_g, hinv_q }))
}

/// Stress parameters in the element's usual basis from displacements `u`
/// and pressure `p`.
pub fn mixed_stress(mm: &MixedMatrices, u: &[f64], p: f64) -> Vec<f64> {
    let r = &mm.hinv_g * DVector::from_column_slice(u) - &mm.hinv_q * p;
    let mut beta = Vec::with_capacity(r.len() + 1);
    beta.push(p + r[0]);
    beta.push(p - r[0]);
    beta.extend(r.iter().skip(1));
    beta
}

/// Stress parameters `β = H⁻¹ G u` for element displacements `u`
/// (interleaved `u, v` per local node).
pub fn recover_stress(lm: &LocalMatrices, u: &[f64]) -> Vec<f64> {
    (&lm.hinv_g * DVector::from_column_slice(u)).as_slice().to_vec()
}

/// Number of eigenvalues of a symmetric matrix above `1e-10 · max |λ|`.
pub fn stiffness_rank(k: &DMatrix<f64>) -> usize {
    let ev = SymmetricEigen::new(k.clone()).eigenvalues;
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ev.iter().filter(|v| v.abs() > 1e-10 * max).count()
}

/// Traction `g(x, y)` on one local edge (in the element's own vertex order).
pub struct Traction<'a> {
    pub edge: usize,
    pub g: &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync),
}

/// Consistent load vector from a body force and edge tractions;
/// `edge_points` is the Gauss rule used along edges.
pub fn local_loads(
    layout: &ElementLayout,
    body: Option<&(dyn Fn([f64; 2]) -> [f64; 2] + Sync)>,
    tractions: &[Traction<'_>],
    edge_points: usize,
) -> Vec<f64> {
    let nn = layout.nodes.len();
    let mut f = vec![0.0; 2 * nn];
    if let Some(body) = body {
        for ([xi, eta], w) in rule3().iter() {
            let x = layout.geom.map(xi, eta);
            let wj = w * layout.geom.jacobian(xi, eta);
            let b = body(x);
            let (n, _) = layout.shape(xi, eta);
            for a in 0..nn {
                f[2 * a] += wj * n[a] * b[0];
                f[2 * a + 1] += wj * n[a] * b[1];
            }
        }
    }
    let (tp, tw) = gauss_1d(edge_points);
    for t in tractions {
        let k = (t.edge + 4 - layout.kind.rotation) % 4;
        for (&s, &w) in tp.iter().zip(tw) {
            let (xi, eta) = super::edge_point(k, s);
            let df = layout.geom.jacobian_matrix(xi, eta);
            // d(ξ, η)/ds along edge k.
            let dir = match k {
                0 => [1.0, 0.0],
                1 => [0.0, 1.0],
                2 => [-1.0, 0.0],
                _ => [0.0, -1.0],
            };
            let tx = df[0][0] * dir[0] + df[0][1] * dir[1];
            let ty = df[1][0] * dir[0] + df[1][1] * dir[1];
            let ds = tx.hypot(ty);
            let gv = (t.g)(layout.geom.map(xi, eta));
            let (n, _) = layout.shape(xi, eta);
            for a in 0..nn {
                f[2 * a] += w * ds * n[a] * gv[0];
                f[2 * a + 1] += w * ds * n[a] * gv[1];
            }
        }
    }
    f
}

/// `∫ ∇Nᵢ · ∇Nⱼ dx` with the transition basis.
pub fn scalar_local_stiffness(layout: &ElementLayout) -> Result<DMatrix<f64>, ElementError> {
    let nn = layout.nodes.len();
    let mut a = DMatrix::<f64>::zeros(nn, nn);
    for ([xi, eta], w) in rule3().iter() {
        let pg = layout
            .geom
            .eval(xi, eta)
            .ok_or(ElementError::NonpositiveJacobian(layout.elem))?;
        let (_, dref) = layout.shape(xi, eta);
        let grads: Vec<[f64; 2]> = dref.iter().map(|d| pg.grad(*d)).collect();
        for i in 0..nn {
            for j in 0..nn {
                a[(i, j)] += w * pg.det * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
            }
        }
    }
    Ok(a)
}

/// `∫ f Nᵢ dx`.
pub fn scalar_local_load(layout: &ElementLayout, f: &(dyn Fn([f64; 2]) -> f64 + Sync)) -> Vec<f64> {
    let nn = layout.nodes.len();
    let mut out = vec![0.0; nn];
    for ([xi, eta], w) in rule3().iter() {
        let wj = w * layout.geom.jacobian(xi, eta);
        let fv = f(layout.geom.map(xi, eta));
        let (n, _) = layout.shape(xi, eta);
        for a in 0..nn {
            out[a] += wj * n[a] * fv;
        }
    }
    out
}
