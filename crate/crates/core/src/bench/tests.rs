use super::*;
use crate::elements::{KindTag, ElementLayout, Q4Kind};
use crate::mesh::fixtures;
use crate::problems::{beam1, beam2, beam_mesh, crack, crack_mesh, MeshVariant, ProblemName};
use crate::solve::{error_norms, solve_problem};

#[test]
fn zero_iterations_is_a_plain_solve() {
    let m = beam_mesh(10, 2, MeshVariant::Regular);
    let spec = beam1(1500.0, 0.3, Q4Kind::Ps);
    let opts = AfemOptions {
        stop: StopRule {
            max_iterations: Some(0),
            ..StopRule::default()
        },
        ..AfemOptions::default()
    };
    let r = afem_loop(m.clone(), &spec, &opts).unwrap();
    assert_eq!(r.trace.rows.len(), 1);
    let e = error_norms(&solve_problem(&m, &spec).unwrap(), &spec.exact);
    assert_eq!(r.trace.rows[0].displacement_error, e.displacement);
    assert_eq!(r.trace.rows[0].stress_error, e.stress);
    assert!(r.trace.to_csv().starts_with("iteration,elements,dofs,eta,"));
}

#[test]
fn uniform_refinement_errors_decrease() {
    let spec = beam2(1500.0, 0.3, Q4Kind::Ps);
    let opts = AfemOptions {
        stop: StopRule {
            max_iterations: Some(2),
            ..StopRule::default()
        },
        marking: Marking::All,
        ..AfemOptions::default()
    };
    let r = afem_loop(beam_mesh(10, 2, MeshVariant::Regular), &spec, &opts).unwrap();
    for w in r.trace.rows.windows(2) {
        assert!(w[1].dofs > w[0].dofs);
        assert!(w[1].displacement_error < w[0].displacement_error);
        assert!(w[1].stress_error < w[0].stress_error);
    }
}

#[test]
fn crack_refinement_concentrates_at_the_tip() {
    let spec = crack(1.0, 0.3, Q4Kind::Ps);
    let opts = AfemOptions {
        stop: StopRule {
            max_iterations: Some(12),
            ..StopRule::default()
        },
        ..AfemOptions::default()
    };
    let r = afem_loop(crack_mesh(), &spec, &opts).unwrap();
    for w in r.trace.rows.windows(2) {
        assert!(w[1].dofs >= w[0].dofs);
    }
    let m = &r.mesh;
    let (mut smallest, mut tip) = (f64::INFINITY, f64::INFINITY);
    for e in m.element_ids() {
        let g = ElementLayout::new(m, e, Q4Kind::Ps).unwrap().geom;
        smallest = smallest.min(g.area());
        if m.element(e).vertices.iter().any(|&v| m.coords(v) == [0.0, 0.0]) {
            tip = tip.min(g.area());
        }
    }
    // The deepest elements touch the tip.
    assert_eq!(tip, smallest);
    assert!(tip < 0.25 * 0.25 / 4f64.powi(8), "{tip}");
}

#[test]
fn slope_of_a_power_law() {
    let pts: Vec<(f64, f64)> = [1.0, 10.0, 100.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(-0.5))).collect();
    assert!((loglog_slope(&pts) + 0.5).abs() < 1e-12);
}

#[test]
fn beam1_table_matches_reference_column() {
    let t = run_table(&TableOptions {
        nus: vec![0.49999999999],
        ..TableOptions::default()
    })
    .unwrap();
    for (v, r) in t.displacement[0].iter().zip([0.0498, 0.0249, 0.0124, 0.0062]) {
        assert!((v / r - 1.0).abs() < 0.1, "{v} vs {r}");
    }
    assert!(t.stress[0].iter().all(|&s| s < 1e-9));
    for q in ErrorTable::ratios(&t.displacement[0]) {
        assert!((1.9..2.1).contains(&q), "{q}");
    }
    let csv = t.displacement_csv();
    assert!(csv.starts_with("nu,10x2,20x4,40x8,80x16\n0.49999999999,"), "{csv}");
}

#[test]
fn transition_table_mesh_has_five_node_elements() {
    let m = table_mesh(10, 2, MeshVariant::Regular, true);
    let t5 = m
        .element_ids()
        .filter(|&e| ElementLayout::new(&m, e, Q4Kind::Ps).unwrap().kind.tag == KindTag::T5)
        .count();
    assert_eq!(t5, 4);
    let t = run_table(&TableOptions {
        problem: ProblemName::Beam2,
        transition: true,
        nus: vec![0.49, 0.49999999999],
        sizes: table_sizes((10, 2), 2),
        ..TableOptions::default()
    })
    .unwrap();
    for row in [&t.displacement, &t.stress] {
        assert!((row[0][0] / row[1][0] - 1.0).abs() < 0.05);
        assert!((1.8..2.2).contains(&(row[1][0] / row[1][1])));
    }
}

#[test]
fn circle_single_level_and_collapse() {
    let (_, steps) = circle_tracking(1, 4).unwrap();
    let (m, _) = circle_tracking(1, 1).unwrap();
    assert!(m.element_ids().all(|e| level(&m, e) <= 1));
    assert!(steps[0].elements > 64);
    // Step 2 of 4 has radius 0: the band coarsens away.
    assert_eq!(steps[2].radius, 0.0);
    assert!(steps[2].elements <= 128);
    let (_, steps) = circle_tracking(4, 10).unwrap();
    assert!(steps[5].elements <= 128);
    assert!(steps[0].touched > 0 && steps[0].elements > steps[5].elements);
}

#[test]
fn circle_test_geometry() {
    let m = crate::problems::circle_mesh();
    // The element [0, 0.25]² meets r = 0.2 and r = 0.3 but not r = 0.4.
    let e = m
        .element_ids()
        .find(|&e| m.vertex_coords(e)[0] == [0.0, 0.0])
        .unwrap();
    assert!(meets_circle(&m, e, 0.2) && meets_circle(&m, e, 0.3));
    assert!(!meets_circle(&m, e, 0.4) && !meets_circle(&m, e, 0.0));
    assert_eq!(level(&m, e), 0);
}

#[test]
fn vtk_exports() {
    let m = fixtures::lshape();
    let s = export_vtk(&m, None, None);
    assert!(s.contains("POINTS 13 double") && s.contains("CELLS 6 30"));
    assert!(!s.contains("POINT_DATA") && !s.contains("CELL_DATA"));

    let m = beam_mesh(10, 2, MeshVariant::Regular);
    let sol = solve_problem(&m, &beam1(1500.0, 0.3, Q4Kind::Ps)).unwrap();
    let ind = estimate(&sol);
    let s = export_vtk(&m, Some(&sol), Some(&ind));
    let lines: Vec<&str> = s.lines().collect();
    let at = lines.iter().position(|l| l.starts_with("SCALARS sigma_xx")).unwrap();
    let values = lines[at + 2..].iter().take_while(|l| !l.starts_with("SCALARS")).count();
    assert_eq!(values, 20);
    assert!(s.contains("VECTORS displacement double") && s.contains("SCALARS eta double 1"));
}
