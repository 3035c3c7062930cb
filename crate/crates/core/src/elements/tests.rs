use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::adapt::{refine, MarkSet};
use crate::mesh::{rectangle, Mesh};
use crate::quadrature::{gauss_1d, GaussRule};

const UNIT: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

const MASKS: [[bool; 4]; 6] = [
    [false; 4],
    [false, true, false, false],
    [true, false, true, false],
    [false, true, false, true],
    [false, false, true, true],
    [true, true, false, true],
];

fn random_quad(rng: &mut ChaCha8Rng) -> [[f64; 2]; 4] {
    let s = rng.gen_range(0.1..3.0);
    let base = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
    let (cx, cy) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
    std::array::from_fn(|i| {
        [
            cx + s * (base[i][0] + rng.gen_range(-0.35..0.35)),
            cy + s * (base[i][1] + rng.gen_range(-0.35..0.35)),
        ]
    })
}

#[test]
fn shape_vertex_and_mid_values() {
    let s = shape_functions([false; 4], -1.0, -1.0);
    assert_eq!(&s.n[..4], &[1.0, 0.0, 0.0, 0.0]);
    // Slot 1 is the ξ = 1 edge.
    let s = shape_functions([false, true, false, false], 1.0, 0.0);
    assert_relative_eq!(s.n[5], 0.75);
    assert_relative_eq!(s.n[1], 0.125);
    assert_relative_eq!(s.n[2], 0.125);
    assert_relative_eq!(s.n.iter().sum::<f64>(), 1.0);
}

#[test]
fn partition_of_unity_and_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let mask: [bool; 4] = std::array::from_fn(|_| rng.gen_bool(0.5));
        let (x, e) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let s = shape_functions(mask, x, e);
        assert!((s.n.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let gs: [f64; 2] = [s.dn.iter().map(|d| d[0]).sum(), s.dn.iter().map(|d| d[1]).sum()];
        assert!(gs[0].abs() < 1e-14 && gs[1].abs() < 1e-14);
        let h = 1e-6;
        let sx = shape_functions(mask, x + h, e);
        let sy = shape_functions(mask, x, e + h);
        let sx0 = shape_functions(mask, x - h, e);
        let sy0 = shape_functions(mask, x, e - h);
        for i in 0..8 {
            assert!(((sx.n[i] - sx0.n[i]) / (2.0 * h) - s.dn[i][0]).abs() < 1e-8);
            assert!(((sy.n[i] - sy0.n[i]) / (2.0 * h) - s.dn[i][1]).abs() < 1e-8);
        }
        for k in 0..4 {
            if !mask[k] {
                assert_eq!(s.n[4 + k], 0.0);
            }
        }
    }
}

#[test]
fn compliance_examples() {
    let m = Material::plane_strain(1.0, 0.0);
    let s = m.compliance();
    assert_eq!(s, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
    let m = Material::plane_strain(1500.0, 0.3);
    let s = m.compliance();
    assert_relative_eq!(s[2][2], 1.0 / m.mu(), max_relative = 1e-14);
    // Compliance inverts the constitutive law.
    let eps = [0.3, -0.2, 0.7];
    let sig = m.stress(eps);
    for r in 0..3 {
        let back: f64 = (0..3).map(|c| s[r][c] * sig[c]).sum();
        assert_relative_eq!(back, eps[r], max_relative = 1e-12);
    }
    // Nearly incompressible: the hydrostatic eigenvalue stays finite.
    let m = Material::plane_strain(1500.0, 0.49999999999);
    let s = m.compliance();
    let hyd = s[0][0] + s[0][1];
    assert!(hyd > 0.0 && hyd < 1e-9);
}

#[test]
fn unit_square_ps_flexibility() {
    let l = ElementLayout::standalone(UNIT, [false; 4], Q4Kind::Ps).unwrap();
    let lm = local_matrices(&l, &Material::plane_strain(1.0, 0.0)).unwrap();
    let expect = [1.0, 1.0, 2.0, 1.0 / 3.0, 1.0 / 3.0];
    for i in 0..5 {
        for j in 0..5 {
            let e = if i == j { expect[i] } else { 0.0 };
            assert!((lm.h[(i, j)] - e).abs() < 1e-14, "H[{i},{j}] = {}", lm.h[(i, j)]);
        }
    }
}

#[test]
fn unit_square_uniaxial_strain() {
    let m = Material::plane_strain(1.0, 0.3);
    let l = ElementLayout::standalone(UNIT, [false; 4], Q4Kind::Ps).unwrap();
    let lm = local_matrices(&l, &m).unwrap();
    let u: Vec<f64> = UNIT.iter().flat_map(|p| [p[0], 0.0]).collect();
    let beta = recover_stress(&lm, &u);
    assert_relative_eq!(beta[0], m.lambda() + 2.0 * m.mu(), max_relative = 1e-12);
    assert_relative_eq!(beta[1], m.lambda(), max_relative = 1e-12);
    for b in &beta[2..] {
        assert!(b.abs() < 1e-12);
    }
}

fn nodal_field(l: &ElementLayout, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    l.node_coords().into_iter().flat_map(|p| f(p)).collect()
}

/// Rank, rigid modes, H positivity and the constant-stress patch state on
/// random geometries of every kind.
#[test]
fn random_element_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mat = Material::plane_strain(1500.0, 0.3);
    for mask in MASKS {
        for q4 in [Q4Kind::Ps, Q4Kind::Ecq4] {
            if q4 == Q4Kind::Ecq4 && mask != [false; 4] {
                continue;
            }
            for _ in 0..1000 {
                let v = random_quad(&mut rng);
                let l = ElementLayout::standalone(v, mask, q4).unwrap();
                let lm = local_matrices(&l, &mat).unwrap();
                let n = l.nodes.len();
                assert_eq!(stiffness_rank(&lm.k), 2 * n - 3, "{:?}", l.kind);
                let norm = lm.k.amax();
                for rigid in [
                    nodal_field(&l, |_| [1.0, 0.0]),
                    nodal_field(&l, |_| [0.0, 1.0]),
                    nodal_field(&l, |p| [-p[1], p[0]]),
                ] {
                    let r = &lm.k * nalgebra::DVector::from_vec(rigid);
                    assert!(r.amax() < 1e-10 * norm);
                }
                let eps = [1e-3, -2e-3, 5e-4];
                let u = nodal_field(&l, |p| [eps[0] * p[0] + 0.5 * eps[2] * p[1], eps[1] * p[1] + 0.5 * eps[2] * p[0]]);
                let beta = recover_stress(&lm, &u);
                let sig = mat.stress(eps);
                // The ECQ4 modes contain constants only on parallelograms.
                if q4 == Q4Kind::Ecq4 && mask == [false; 4] && l.geom.d > 1e-12 * l.geom.h {
                    continue;
                }
                for ([x, e], _) in GaussRule::square(3).iter() {
                    let s = eval_stress(l.kind.tag, &l.geom, &beta, x, e);
                    for r in 0..3 {
                        assert!((s[r] - sig[r]).abs() < 1e-10 * sig[0].abs().max(1.0), "{:?}", l.kind);
                    }
                }
            }
        }
    }
}

#[test]
fn kinds_rotate_to_canonical_masks() {
    let k = ElementKind::classify([false, true, false, true], Q4Kind::Ps);
    assert_eq!((k.tag, k.mask, k.rotation), (KindTag::T6Opposite, [true, false, true, false], 1));
    let k = ElementKind::classify([true, true, false, false], Q4Kind::Ps);
    assert_eq!((k.tag, k.mask), (KindTag::T6Adjacent, [false, true, true, false]));
    let k = ElementKind::classify([true, true, true, false], Q4Kind::Ps);
    assert_eq!((k.tag, k.mask), (KindTag::T7, [false, true, true, true]));
    assert_eq!(k.num_modes(), 11);
    assert_eq!(k.num_nodes(), 7);
}

/// Row-wise modified divergence of one column, by central differences
/// (exact for the quadratic modes up to rounding).
fn modified_divergence(tag: KindTag, g: &GeomCoeffs, col: usize, x: f64, e: f64) -> [f64; 2] {
    let h = 1e-3;
    let p = |x: f64, e: f64| stress_modes(tag, g, x, e).cols[col];
    let dx: [f64; 3] = std::array::from_fn(|r| (p(x + h, e)[r] - p(x - h, e)[r]) / (2.0 * h));
    let de: [f64; 3] = std::array::from_fn(|r| (p(x, e + h)[r] - p(x, e - h)[r]) / (2.0 * h));
    let (a1, a2, b1, b2) = (g.a1, g.a2, g.b1, g.b2);
    [
        b2 * dx[0] - b1 * de[0] + a1 * de[2] - a2 * dx[2],
        b2 * dx[2] - b1 * de[2] + a1 * de[1] - a2 * dx[1],
    ]
}

#[test]
fn transition_modes_satisfy_modified_equilibrium() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for tag in [KindTag::T5, KindTag::T6Opposite, KindTag::T6Adjacent, KindTag::T7] {
        for _ in 0..50 {
            let g = GeomCoeffs::from_vertices(&random_quad(&mut rng));
            let scale = g.h * g.h;
            for i in 0..5 {
                for j in 0..5 {
                    let (x, e) = (-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64);
                    for c in 0..tag.num_modes() {
                        let d = modified_divergence(tag, &g, c, x, e);
                        assert!(d[0].abs() < 1e-9 * scale && d[1].abs() < 1e-9 * scale, "{tag:?} col {c}: {d:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn identity_block_at_center() {
    let g = GeomCoeffs::from_vertices(&random_quad(&mut ChaCha8Rng::seed_from_u64(4)));
    for tag in [KindTag::Q4Ps, KindTag::Q4Ecq4, KindTag::T5, KindTag::T6Opposite, KindTag::T6Adjacent, KindTag::T7] {
        let p = stress_modes(tag, &g, 0.0, 0.0);
        for c in 0..3 {
            for r in 0..3 {
                assert_eq!(p.cols[c][r], if r == c { 1.0 } else { 0.0 });
            }
        }
        for c in 3..p.n {
            assert_eq!(p.cols[c], [0.0; 3]);
        }
    }
}

#[test]
fn rectangle_t5_modes() {
    let g = GeomCoeffs::from_vertices(&[[0.0, 0.0], [4.0, 0.0], [4.0, 2.0], [0.0, 2.0]]);
    let p = stress_modes(KindTag::T5, &g, 0.3, -0.7);
    assert_eq!(p.cols[3], [-0.7, 0.0, 0.0]);
    assert_eq!(p.cols[5][0], 0.3);
    assert_relative_eq!(p.cols[5][2], -(g.b2 / g.a1) * -0.7, max_relative = 1e-14);
}

#[test]
fn t5_bubble_orthogonality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let g = GeomCoeffs::from_vertices(&random_quad(&mut rng));
        for comp in 0..2 {
            for c in 0..7 {
                let mut acc = 0.0;
                for ([x, e], w) in GaussRule::square(3).iter() {
                    let t = stress_modes(KindTag::T5, &g, x, e).cols[c];
                    // Modified derivatives times J of φ = 1 − (ξ² + η²)/2.
                    let (px, pe) = (-x, -e);
                    let jdx = g.b2 * px - g.b1 * pe;
                    let jdy = g.a1 * pe - g.a2 * px;
                    // J cancels against dx = J dξ dη.
                    acc += w * if comp == 0 { t[0] * jdx + t[2] * jdy } else { t[1] * jdy + t[2] * jdx };
                }
                assert!(acc.abs() < 1e-12 * g.h.powi(2).max(1.0), "col {c}: {acc}");
            }
        }
    }
}

/// Only the mean-dilatation mode stiffens with λ; every other eigenvalue of
/// `K` stays bounded as ν → ½.
#[test]
fn single_volumetric_mode_as_nu_approaches_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for mask in MASKS {
        let l = ElementLayout::standalone(random_quad(&mut rng), mask, Q4Kind::Ps).unwrap();
        let spectra: Vec<Vec<f64>> = [0.49, 0.4999, 0.49999999999]
            .iter()
            .map(|&nu| {
                let k = local_matrices(&l, &Material::plane_strain(1500.0, nu)).unwrap().k;
                let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
                ev.sort_by(|a, b| b.total_cmp(a));
                ev
            })
            .collect();
        assert!(spectra[2][0] > 1e8 * spectra[0][0], "{mask:?}");
        for i in 1..spectra[0].len() {
            assert!(spectra[2][i] < 3.0 * spectra[0][1], "{mask:?}: eigenvalue {i}");
        }
    }
}

#[test]
fn scalar_stiffness() {
    let l = ElementLayout::standalone(UNIT, [false; 4], Q4Kind::Ps).unwrap();
    let a = scalar_local_stiffness(&l).unwrap();
    for i in 0..4 {
        assert_relative_eq!(a[(i, i)], 2.0 / 3.0, max_relative = 1e-14);
    }
    assert_relative_eq!(a[(0, 1)], -1.0 / 6.0, max_relative = 1e-13);
    assert_relative_eq!(a[(0, 2)], -1.0 / 3.0, max_relative = 1e-13);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for mask in MASKS {
        let l = ElementLayout::standalone(random_quad(&mut rng), mask, Q4Kind::Ps).unwrap();
        let a = scalar_local_stiffness(&l).unwrap();
        let n = a.nrows();
        let ones = nalgebra::DVector::from_element(n, 1.0);
        assert!((&a * ones).amax() < 1e-12 * a.amax());
        assert_eq!(stiffness_rank(&a), n - 1);
    }
    let f = scalar_local_load(&l, &|_| 1.0);
    assert_relative_eq!(f.iter().sum::<f64>(), 4.0 * l.geom.j0, max_relative = 1e-13);
}

#[test]
fn edge_traction_loads() {
    let v = [[0.0, 0.0], [3.0, 0.0], [3.0, 2.0], [0.0, 2.0]];
    let l = ElementLayout::standalone(v, [false; 4], Q4Kind::Ps).unwrap();
    let unit = |_p: [f64; 2]| [1.0, 0.0];
    let f = local_loads(&l, None, &[Traction { edge: 1, g: &unit }], 3);
    assert_relative_eq!(f[2], 1.0);
    assert_relative_eq!(f[4], 1.0);
    assert_eq!(f.iter().filter(|x| x.abs() > 0.0).count(), 2);
    assert!(local_loads(&l, None, &[], 3).iter().all(|&x| x == 0.0));
    // Bending traction at x = 10 of a beam: zero force, moment −2E∫y² ds.
    let e = 1500.0;
    let v = [[9.0, -1.0], [10.0, -1.0], [10.0, 1.0], [9.0, 1.0]];
    let l = ElementLayout::standalone(v, [false; 4], Q4Kind::Ps).unwrap();
    let bend = move |p: [f64; 2]| [-2.0 * e * p[1], 0.0];
    let f = local_loads(&l, None, &[Traction { edge: 1, g: &bend }], 3);
    let coords = l.node_coords();
    let force: f64 = (0..4).map(|a| f[2 * a]).sum();
    let moment: f64 = (0..4).map(|a| coords[a][1] * f[2 * a]).sum();
    assert!(force.abs() < 1e-10);
    assert_relative_eq!(moment, -2.0 * e * 2.0 / 3.0, max_relative = 1e-12);
}

/// Trace of the shape function of global node `node` of element `elem` at
/// a point on its boundary edge `edge` (zero if the node is absent).
fn trace(mesh: &Mesh, elem: usize, node: usize, p: [f64; 2]) -> f64 {
    let l = ElementLayout::new(mesh, elem, Q4Kind::Ps).unwrap();
    let Some(a) = l.nodes.iter().position(|&n| n == node) else {
        return 0.0;
    };
    let c = l.node_coords();
    for k in 0..4 {
        let (s, t) = (c[k], c[(k + 1) % 4]);
        let d = [t[0] - s[0], t[1] - s[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let r = ((p[0] - s[0]) * d[0] + (p[1] - s[1]) * d[1]) / len2;
        let q = [s[0] + r * d[0], s[1] + r * d[1]];
        if (q[0] - p[0]).hypot(q[1] - p[1]) < 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&r) {
            let (x, e) = edge_point(k, 2.0 * r - 1.0);
            return l.shape(x, e).0[a];
        }
    }
    panic!("point not on element boundary");
}

#[test]
fn mean_continuity_across_hanging_edges() {
    let mut m = rectangle(2, 2, [0.0, 2.0], [0.0, 1.5]);
    refine(&mut m, &MarkSet::new([0])).unwrap();
    refine(&mut m, &MarkSet::new([3])).unwrap();
    let (p5, w5) = gauss_1d(5);
    let mut checked = 0;
    for coarse in m.element_ids() {
        let el = *m.element(coarse);
        for k in 0..4 {
            let Some(mid) = el.mids[k] else { continue };
            let (a, b) = (el.vertices[k], el.vertices[(k + 1) % 4]);
            let fine: Vec<usize> = [m.find_edge(a, mid).unwrap(), m.find_edge(mid, b).unwrap()]
                .iter()
                .map(|&h| m.edge_elements(h).next().unwrap().0)
                .collect();
            for node in [a, b, mid] {
                let mut jump = 0.0;
                for (half, (s, t)) in [(a, mid), (mid, b)].iter().enumerate() {
                    let (ps, pt) = (m.coords(*s), m.coords(*t));
                    let len = (pt[0] - ps[0]).hypot(pt[1] - ps[1]);
                    for (&x, &w) in p5.iter().zip(w5) {
                        let r = 0.5 * (x + 1.0);
                        let q = [ps[0] + r * (pt[0] - ps[0]), ps[1] + r * (pt[1] - ps[1])];
                        jump += 0.5 * len * w * (trace(&m, coarse, node, q) - trace(&m, fine[half], node, q));
                    }
                }
                assert!(jump.abs() < 1e-12, "element {coarse} slot {k} node {node}: {jump}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 6);
}


#[test]
fn ecq4_matches_ps_on_parallelograms() {
    let v = [[0.0, 0.0], [2.0, 0.5], [2.7, 2.0], [0.7, 1.5]];
    let mat = Material::plane_strain(1500.0, 0.3);
    let ps = local_matrices(&ElementLayout::standalone(v, [false; 4], Q4Kind::Ps).unwrap(), &mat).unwrap();
    let ec = local_matrices(&ElementLayout::standalone(v, [false; 4], Q4Kind::Ecq4).unwrap(), &mat).unwrap();
    assert!((&ps.k - &ec.k).amax() < 1e-10 * ps.k.amax());
}
