use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::fixtures::*;
use crate::mesh::{rectangle, save_mesh, validate, EdgeFlag, Mesh, NodeFlag};

const LSHAPE_BASE: &str = "QMESH 1
NODES 8
0 -1 -2
1 -1 -2
1 0 -2
1 1 -2
0 1 -2
-1 1 -2
-1 0 -2
0 0 -2
EDGES 10
1 8 -2
1 2 -2
2 3 -2
3 4 -2
5 4 -2
6 5 -2
7 6 -2
7 8 -2
8 3 0
8 5 0
ELEMS 3
1 2 3 8 0 0 0 0 2 3 9 1
8 3 4 5 0 0 0 0 9 4 5 10
7 8 5 6 0 0 0 0 8 10 6 7
";

fn text(m: &Mesh) -> String {
    let mut buf = Vec::new();
    save_mesh(m, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn classes(m: &Mesh, marks: &[usize]) -> RefineEdgeClass {
    let closed = post_mark(m, &MarkSet::new(marks.iter().copied()));
    classify_refine_edges(m, &closed).unwrap()
}

#[test]
fn post_mark_pulls_in_coarse_neighbors() {
    let m = lshape();
    assert_eq!(post_mark(&m, &MarkSet::new([1])).as_slice(), &[0, 1, 2]);
    assert_eq!(post_mark(&m, &MarkSet::new([5])).as_slice(), &[2, 5]);
    assert_eq!(post_mark(&m, &MarkSet::new([0])).as_slice(), &[0]);
}

#[test]
fn post_mark_avoids_four_hanging_nodes() {
    let m = rectangle(3, 3, [0.0, 3.0], [0.0, 3.0]);
    // Element 4 is the center; marking its four edge neighbors would leave
    // it with four hanging nodes.
    let closed = post_mark(&m, &MarkSet::new([1, 3, 5, 7]));
    assert!(closed.contains(4));
    let closed = post_mark(&m, &MarkSet::new([1, 3, 5]));
    assert!(!closed.contains(4));
}

#[test]
fn worked_classifications() {
    let m = lshape();
    let c = classes(&m, &[5]);
    assert_eq!(c.get(18), Some(RefineEdgeType::One));
    assert_eq!(c.get(13), Some(RefineEdgeType::Four));
    let c = classes(&m, &[2]);
    assert_eq!(c.get(6), Some(RefineEdgeType::Two));
    assert_eq!(c.get(9), Some(RefineEdgeType::Five));
    let c = classes(&m, &[1]);
    assert_eq!(c.get(11), Some(RefineEdgeType::Three));
    assert!(c.to_csv().starts_with("edge,type\n"));
    assert!(c.to_csv().contains("\n12,3\n"));
}

#[test]
fn coarsen_fixture_gives_base_and_refine_restores_it() {
    let mut m = lshape();
    assert_eq!(find_good_nodes(&m), vec![12]);
    let s = coarsen(&mut m, &MarkSet::new([1, 3, 4, 5])).unwrap();
    assert_eq!(s.good_nodes, vec![12]);
    assert_eq!(s.removed_nodes, 5);
    assert_eq!(m.num_elements(), 3);
    assert_eq!(text(&m), LSHAPE_BASE);

    let mut base = load_mesh(LSHAPE_BASE.as_bytes()).unwrap();
    let r = refine(&mut base, &MarkSet::new([1])).unwrap();
    assert_eq!(r.marked.as_slice(), &[1]);
    assert_eq!(r.children, vec![[1, 3, 4, 5]]);
    assert_eq!(text(&base), LSHAPE_QMESH);
}

#[test]
fn refine_all_of_fixture() {
    let mut m = lshape();
    let all = MarkSet::all(&m);
    refine(&mut m, &all).unwrap();
    assert_eq!(m.num_elements(), 24);
    assert_eq!(m.num_nodes(), 37);
    assert_eq!(m.node(8).flag, NodeFlag::Regular);
    assert_eq!(m.node(9).flag, NodeFlag::Regular);
    // The halves of e9 and e10 were split again, so E1 and E3's children
    // still carry hanging nodes.
    let hanging: usize = m.element_ids().map(|e| m.element(e).hanging_count()).sum();
    assert_eq!(hanging, 4);
}

#[test]
fn refine_unit_square() {
    let mut m = unit_square();
    let r = refine(&mut m, &MarkSet::new([0])).unwrap();
    assert_eq!((m.num_elements(), m.num_nodes(), m.num_edges()), (4, 9, 12));
    for (i, &c) in r.children[0].iter().enumerate() {
        let el = m.element(c);
        assert_eq!(el.vertices[i], i);
        assert_eq!(m.node(el.vertices[(i + 2) % 4]).flag, NodeFlag::Newest);
    }
    assert!(m.edge_ids().all(|e| m.edge(e).flag != EdgeFlag::Regular || m.edge_element_count(e) == 2));
}

#[test]
fn good_node_blocked_by_hanging_nodes() {
    let mut m = lshape();
    refine(&mut m, &MarkSet::new([1])).unwrap();
    assert!(!find_good_nodes(&m).contains(&12));
}

#[test]
fn unmarked_patch_is_untouched() {
    let mut m = lshape();
    let before = text(&m);
    let s = coarsen(&mut m, &MarkSet::new([1, 3, 4])).unwrap();
    assert!(s.good_nodes.is_empty());
    assert_eq!(text(&m), before);
    assert!(coarsen(&mut m, &MarkSet::new([0])).unwrap().restored.is_empty());
}

#[test]
fn dead_mark_is_an_error() {
    let mut m = unit_square();
    assert!(matches!(refine(&mut m, &MarkSet::new([7])), Err(AdaptError::DeadElement(7))));
}

/// Coarsens the children of one refinement until nothing changes.
fn undo(m: &mut Mesh, r: &RefineSummary) {
    let kids = MarkSet::new(r.children.iter().flatten().copied());
    loop {
        let live = MarkSet::new(kids.iter().filter(|&e| m.is_live_element(e)));
        if coarsen(m, &live).unwrap().restored.is_empty() {
            break;
        }
    }
}

#[test]
fn refine_then_coarsen_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let mut m = if trial % 2 == 0 {
            rectangle(4, 3, [0.0, 4.0], [0.0, 3.0])
        } else {
            lshape()
        };
        // Random history first, so the starting mesh is irregular.
        for _ in 0..rng.gen_range(0..4) {
            let ids: Vec<usize> = m.element_ids().collect();
            let pick = MarkSet::new((0..rng.gen_range(1..4)).map(|_| ids[rng.gen_range(0..ids.len())]));
            refine(&mut m, &pick).unwrap();
        }
        let before = m.canonical_form();
        let ids: Vec<usize> = m.element_ids().collect();
        let pick = MarkSet::new((0..rng.gen_range(1..6)).map(|_| ids[rng.gen_range(0..ids.len())]));
        let r = refine(&mut m, &pick).unwrap();
        undo(&mut m, &r);
        validate(&m).unwrap();
        assert_eq!(m.canonical_form(), before, "trial {trial}");
    }
}

use crate::mesh::load_mesh;
