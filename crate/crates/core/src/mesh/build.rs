use std::collections::HashMap;

use super::{Edge, EdgeFlag, Element, Mesh, MeshError, Node, NodeFlag};

/// Builds a conforming mesh from corner coordinates and counter-clockwise
/// quadrilaterals. Edges are numbered in order of first appearance; edges
/// used once become boundary edges and their endpoints boundary nodes.
pub fn from_quads(coords: &[[f64; 2]], quads: &[[usize; 4]]) -> Result<Mesh, MeshError> {
    let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut uses: Vec<usize> = Vec::new();
    let mut elems = Vec::with_capacity(quads.len());
    for (i, q) in quads.iter().enumerate() {
        let mut ids = [0; 4];
        for k in 0..4 {
            let (a, b) = (q[k], q[(k + 1) % 4]);
            if a >= coords.len() || b >= coords.len() {
                return Err(MeshError::IndexOutOfRange {
                    line: i + 1,
                    what: "node",
                    index: (a.max(b) + 1) as i64,
                    count: coords.len(),
                });
            }
            let key = (a.min(b), a.max(b));
            ids[k] = *edge_of.entry(key).or_insert_with(|| {
                edges.push([a, b]);
                uses.push(0);
                edges.len() - 1
            });
            uses[ids[k]] += 1;
        }
        elems.push(Element::new(*q, ids));
    }
    let mut flags = vec![NodeFlag::Regular; coords.len()];
    let edges: Vec<Edge> = edges
        .iter()
        .zip(&uses)
        .map(|(&[a, b], &u)| {
            let flag = if u == 1 {
                flags[a] = NodeFlag::Boundary;
                flags[b] = NodeFlag::Boundary;
                EdgeFlag::Boundary
            } else {
                EdgeFlag::Regular
            };
            Edge::new(a, b, flag)
        })
        .collect();
    let nodes = coords
        .iter()
        .zip(flags)
        .map(|(p, f)| Node::new(p[0], p[1], f))
        .collect();
    Ok(Mesh::from_parts(nodes, edges, elems))
}

/// Tensor-product grid of `nx × ny` elements on `[x0, x1] × [y0, y1]`,
/// nodes numbered row by row from the lower left.
pub fn rectangle(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Mesh {
    let coords = grid_coords(nx, ny, x, y);
    let quads = grid_quads(nx, ny);
    from_quads(&coords, &quads).expect("grid indices are in range")
}

pub fn grid_coords(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Vec<[f64; 2]> {
    let mut c = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            c.push([
                x[0] + (x[1] - x[0]) * i as f64 / nx as f64,
                y[0] + (y[1] - y[0]) * j as f64 / ny as f64,
            ]);
        }
    }
    c
}

pub fn grid_quads(nx: usize, ny: usize) -> Vec<[usize; 4]> {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut q = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            q.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    q
}
