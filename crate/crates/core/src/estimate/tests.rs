use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::adapt::refine;
use crate::elements::Q4Kind;
use crate::mesh::{rectangle, Mesh};
use crate::problems::{beam2, beam_mesh, crack, crack_mesh, MeshVariant};
use crate::solve::solve_problem;

const UNIT: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

fn one_element(beta: [f64; 5]) -> Solution {
    let layout = ElementLayout::standalone(UNIT, [false; 4], Q4Kind::Ps).unwrap();
    Solution {
        components: 2,
        nodal: vec![[0.0; 2]; 4],
        elements: vec![ElementSolution {
            layout,
            u: vec![0.0; 8],
            beta: beta.to_vec(),
        }],
        num_equations: 0,
    }
}

/// Scalar solution interpolating `f` at the nodes of `mesh`.
fn interpolated(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Solution {
    let elements = mesh
        .element_ids()
        .map(|e| {
            let layout = ElementLayout::new(mesh, e, Q4Kind::Ps).unwrap();
            let u = layout.nodes.iter().map(|&n| f(mesh.coords(n))).collect();
            ElementSolution {
                layout,
                u,
                beta: Vec::new(),
            }
        })
        .collect();
    Solution {
        components: 1,
        nodal: mesh.node_ids().map(|n| [f(mesh.coords(n)), 0.0]).collect(),
        elements,
        num_equations: 0,
    }
}

fn field_of(eta2: &[f64]) -> IndicatorField {
    IndicatorField {
        elems: (0..eta2.len()).collect(),
        eta: eta2.iter().map(|v| v.sqrt()).collect(),
    }
}

#[test]
fn constant_stress_hits_the_floor() {
    let ind = metric_indicator(&one_element([3.0, -1.0, 2.0, 0.0, 0.0]));
    assert!((ind.eta[0] - 1e-8).abs() < 1e-20, "{}", ind.eta[0]);
}

#[test]
fn rank_one_stress_gradient() {
    // σ = (y, 0, 0) on the unit square: y = (1 + η) / 2.
    let sol = one_element([0.5, 0.0, 0.0, 0.5, 0.0]);
    let d = stress_gradient(&sol.elements[0], 0.3, -0.2);
    assert!((d[0][1] - 1.0).abs() < 1e-9 && d[0][0].abs() < 1e-9);
    let ind = metric_indicator(&sol);
    let expect = ((1.0 + 1e-8) * 1e-8f64).sqrt();
    assert!((ind.eta[0] - expect).abs() < 1e-9 * expect, "{}", ind.eta[0]);
}

#[test]
fn full_rank_stress_gradient() {
    // σ = (x, y, 0).
    let ind = metric_indicator(&one_element([0.5, 0.5, 0.0, 0.5, 0.5]));
    assert!((ind.eta[0] - (1.0 + 1e-8)).abs() < 1e-9, "{}", ind.eta[0]);
}

#[test]
fn recovery_vanishes_for_linear_fields() {
    let lin = |p: [f64; 2]| 0.3 + 2.0 * p[0] - 1.5 * p[1];
    let mut m = rectangle(3, 3, [0.0, 1.0], [0.0, 1.0]);
    let ind = recovery_indicator(&interpolated(&m, lin));
    assert!(ind.eta.iter().all(|&e| e < 1e-12), "{:?}", ind.eta);
    // Also across hanging nodes.
    refine(&mut m, &MarkSet::new([4])).unwrap();
    let ind = recovery_indicator(&interpolated(&m, lin));
    assert!(ind.eta.iter().all(|&e| e < 1e-12), "{:?}", ind.eta);
}

#[test]
fn recovery_is_symmetric_for_x_squared() {
    let m = rectangle(2, 2, [0.0, 1.0], [0.0, 1.0]);
    let ind = recovery_indicator(&interpolated(&m, |p| p[0] * p[0]));
    assert!(ind.eta[0] > 1e-3);
    for e in &ind.eta {
        assert!((e - ind.eta[0]).abs() < 1e-12 * ind.eta[0], "{:?}", ind.eta);
    }
}

#[test]
fn recovery_vanishes_on_a_single_element() {
    let m = rectangle(1, 1, [0.0, 2.0], [0.0, 1.0]);
    let ind = recovery_indicator(&interpolated(&m, |p| 1.0 + p[0] * p[1] - 3.0 * p[1]));
    assert!(ind.eta[0] < 1e-12);
}

#[test]
fn dorfler_examples() {
    assert_eq!(dorfler_mark(&field_of(&[4.0, 3.0, 2.0, 1.0]), 0.5).as_slice(), &[0, 1]);
    assert_eq!(dorfler_mark(&field_of(&[1.0, 1.0, 1.0, 1.0]), 0.5).as_slice(), &[0, 1, 2]);
    assert_eq!(dorfler_mark(&field_of(&[2.0]), 0.5).as_slice(), &[0]);
    assert!(dorfler_mark(&field_of(&[0.0, 0.0]), 0.5).is_empty());
    assert!(dorfler_mark(&IndicatorField::default(), 0.5).is_empty());
    // Order follows the indicator, not the element id.
    assert_eq!(dorfler_mark(&field_of(&[1.0, 9.0, 1.0]), 0.5).as_slice(), &[1]);
}

/// Minimal cardinality over all subsets, and the best sum at that size.
fn brute_force(eta2: &[f64], theta: f64) -> (usize, f64) {
    let total: f64 = eta2.iter().sum();
    let n = eta2.len();
    let mut best = (usize::MAX, 0.0);
    for mask in 0u32..(1 << n) {
        let card = mask.count_ones() as usize;
        if card > best.0 {
            continue;
        }
        let mut vals: Vec<f64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| eta2[i]).collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        let s: f64 = vals.iter().sum();
        if s > theta * total && (card < best.0 || s > best.1) {
            best = (card, s);
        }
    }
    best
}

#[test]
fn dorfler_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..10_000 {
        let n = rng.gen_range(1..=12);
        // Small integers make ties common and sums exact.
        let eta: Vec<f64> = if trial % 2 == 0 {
            (0..n).map(|_| rng.gen_range(0..6) as f64).collect()
        } else {
            (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
        };
        let theta = [0.5, 0.3, 0.8][trial % 3];
        let eta2: Vec<f64> = eta.iter().map(|e| e * e).collect();
        let ind = IndicatorField {
            elems: (0..n).collect(),
            eta,
        };
        let marks = dorfler_mark(&ind, theta);
        let total: f64 = eta2.iter().sum();
        if total == 0.0 {
            assert!(marks.is_empty());
            continue;
        }
        let (card, sum) = brute_force(&eta2, theta);
        assert_eq!(marks.len(), card, "{eta2:?}");
        let got: f64 = marks.iter().map(|i| ind.eta[i] * ind.eta[i]).sum();
        assert!(got > theta * ind.total_squared());
        assert!((got - sum).abs() <= 1e-12 * total, "{eta2:?}");
    }
}

#[test]
fn marking_is_scale_invariant() {
    let m = beam_mesh(10, 2, MeshVariant::Irregular);
    let sol = solve_problem(&m, &beam2(1500.0, 0.3, Q4Kind::Ps)).unwrap();
    let base = dorfler_mark(&metric_indicator(&sol), 0.5);
    for c in [1.0, 10.0, 1e3] {
        let mut s = sol.clone();
        for el in s.elements.iter_mut() {
            el.beta.iter_mut().for_each(|b| *b *= c);
        }
        assert_eq!(dorfler_mark(&metric_indicator(&s), 0.5), base);
    }
}

#[test]
fn crack_indicator_decreases_under_refinement() {
    let mut m = crack_mesh();
    let spec = crack(1.0, 0.3, Q4Kind::Ps);
    let mut last = f64::INFINITY;
    for _ in 0..4 {
        let ind = metric_indicator(&solve_problem(&m, &spec).unwrap());
        assert!(ind.global() <= last, "{} > {last}", ind.global());
        last = ind.global();
        refine(&mut m, &dorfler_mark(&ind, 0.5)).unwrap();
    }
}

#[test]
fn coarsen_marks_pick_small_indicators() {
    let ind = field_of(&[1.0, 100.0, 0.001, 0.0]);
    // Bound² = 0.05 · 101.001 / 4 ≈ 1.26.
    assert_eq!(coarsen_marks(&ind, COARSEN_THETA).as_slice(), &[0, 2, 3]);
    assert!(ind.to_csv().starts_with("elem,eta\n0,1e0\n"));
}
