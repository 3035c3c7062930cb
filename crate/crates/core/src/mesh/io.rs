//! QMESH text format.
//!
//! ```text
//! QMESH 1
//! NODES N
//! x y flag                      (N lines)
//! EDGES NE
//! n1 n2 flag                    (NE lines)
//! ELEMS NT
//! v1 v2 v3 v4 m5 m6 m7 m8 e1 e2 e3 e4   (NT lines)
//! ```
//!
//! All indices are 1-based; `0` in a mid-node column means "absent". Edge
//! flags are `-2` (boundary), `0` (regular) or `2p-1` / `2p` for the smaller
//! / larger half of parent edge `p`.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{validate, Edge, EdgeFlag, Element, Mesh, MeshError, Node, NodeFlag};
use super::geometry::GeomCoeffs;

struct Lines<R> {
    inner: std::io::Lines<BufReader<R>>,
    line: usize,
}

impl<R: Read> Lines<R> {
    /// Next non-blank line, split into whitespace tokens.
    fn next_tokens(&mut self) -> Result<Option<Vec<String>>, MeshError> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let t: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
            if !t.is_empty() {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    fn expect_tokens(&mut self, what: &str) -> Result<Vec<String>, MeshError> {
        self.next_tokens()?.ok_or_else(|| MeshError::Malformed {
            line: self.line + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn malformed(&self, msg: impl Into<String>) -> MeshError {
        MeshError::Malformed {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn section(&mut self, name: &str) -> Result<usize, MeshError> {
        let t = self.expect_tokens(name)?;
        if t.len() != 2 || t[0] != name {
            return Err(self.malformed(format!("expected `{name} <count>`, found `{}`", t.join(" "))));
        }
        t[1]
            .parse()
            .map_err(|_| self.malformed(format!("bad {name} count `{}`", t[1])))
    }

    fn row<T: std::str::FromStr>(&mut self, what: &str, width: usize) -> Result<Vec<T>, MeshError> {
        let t = self.expect_tokens(what)?;
        if t.len() != width {
            return Err(self.malformed(format!("{what} row needs {width} columns, found {}", t.len())));
        }
        t.iter()
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| self.malformed(format!("cannot parse `{s}` in {what} row")))
            })
            .collect()
    }
}

fn index(line: usize, what: &'static str, raw: i64, count: usize, allow_zero: bool) -> Result<Option<usize>, MeshError> {
    if allow_zero && raw == 0 {
        return Ok(None);
    }
    if raw < 1 || raw as usize > count {
        return Err(MeshError::IndexOutOfRange {
            line,
            what,
            index: raw,
            count,
        });
    }
    Ok(Some(raw as usize - 1))
}

/// Reads a QMESH stream and validates the result.
pub fn load_mesh<R: Read>(source: R) -> Result<Mesh, MeshError> {
    let mut lines = Lines {
        inner: BufReader::new(source).lines(),
        line: 0,
    };
    let header = lines.expect_tokens("header")?;
    if header != ["QMESH", "1"] {
        return Err(lines.malformed(format!("expected header `QMESH 1`, found `{}`", header.join(" "))));
    }

    let n_nodes = lines.section("NODES")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let r: Vec<f64> = lines.row("node", 3)?;
        if !(r[0].is_finite() && r[1].is_finite()) {
            return Err(lines.malformed("node coordinates must be finite"));
        }
        let flag = (r[2].fract() == 0.0)
            .then(|| NodeFlag::from_code(r[2] as i64))
            .flatten()
            .ok_or_else(|| lines.malformed(format!("invalid node flag {}", r[2])))?;
        nodes.push(Node::new(r[0], r[1], flag));
    }

    let n_edges = lines.section("EDGES")?;
    let mut raw_edges = Vec::with_capacity(n_edges);
    let mut edge_lines = Vec::with_capacity(n_edges);
    let mut seen = HashMap::new();
    for _ in 0..n_edges {
        let r: Vec<i64> = lines.row("edge", 3)?;
        let line = lines.line;
        let a = index(line, "node", r[0], n_nodes, false)?.unwrap();
        let b = index(line, "node", r[1], n_nodes, false)?.unwrap();
        if a == b {
            return Err(lines.malformed("edge joins a node to itself"));
        }
        let k = (a.min(b), a.max(b));
        if seen.insert(k, raw_edges.len()).is_some() {
            return Err(MeshError::DuplicateEdge {
                line,
                a: a + 1,
                b: b + 1,
            });
        }
        raw_edges.push((a, b, r[2]));
        edge_lines.push(line);
    }
    let mut edges = Vec::with_capacity(n_edges);
    for (i, &(a, b, code)) in raw_edges.iter().enumerate() {
        let line = edge_lines[i];
        let flag = match code {
            -2 => EdgeFlag::Boundary,
            0 => EdgeFlag::Regular,
            c if c > 0 => {
                let p = index(line, "parent edge", (c + 1) / 2, n_edges, false)?.unwrap();
                EdgeFlag::Child(p)
            }
            c => {
                return Err(MeshError::Malformed {
                    line,
                    msg: format!("invalid edge flag {c}"),
                })
            }
        };
        edges.push(Edge::new(a, b, flag));
    }

    let n_elems = lines.section("ELEMS")?;
    let mut elems = Vec::with_capacity(n_elems);
    for _ in 0..n_elems {
        let r: Vec<i64> = lines.row("element", 12)?;
        let line = lines.line;
        let mut v = [0; 4];
        let mut mids = [None; 4];
        let mut e = [0; 4];
        for k in 0..4 {
            v[k] = index(line, "node", r[k], n_nodes, false)?.unwrap();
            mids[k] = index(line, "node", r[4 + k], n_nodes, true)?;
            e[k] = index(line, "edge", r[8 + k], n_edges, false)?.unwrap();
        }
        let coords = v.map(|n| nodes[n].coords());
        if GeomCoeffs::from_vertices(&coords).min_jacobian() <= 0.0 {
            return Err(MeshError::NonpositiveJacobian {
                line,
                elem: elems.len() + 1,
            });
        }
        elems.push(Element {
            vertices: v,
            mids,
            edges: e,
        });
    }
    if lines.next_tokens()?.is_some() {
        return Err(lines.malformed("trailing content after ELEMS section"));
    }

    let mesh = Mesh::from_parts(nodes, edges, elems);

    // Sibling parity must agree with the index order of the two halves.
    for e in mesh.edge_ids() {
        if let EdgeFlag::Child(_) = mesh.edge(e).flag {
            if let Some(s) = mesh.sibling_of(e) {
                let odd = raw_edges[e].2 % 2 == 1;
                if odd != (e < s) {
                    return Err(MeshError::Malformed {
                        line: edge_lines[e],
                        msg: format!(
                            "edge {} flag {} has the wrong parity for sibling edge {}",
                            e + 1,
                            raw_edges[e].2,
                            s + 1
                        ),
                    });
                }
            }
        }
    }

    validate(&mesh)?;
    Ok(mesh)
}

/// File code of an edge flag in a compacted mesh.
pub(crate) fn edge_flag_code(mesh: &Mesh, e: usize) -> i64 {
    match mesh.edge(e).flag {
        EdgeFlag::Boundary => -2,
        EdgeFlag::Regular => 0,
        EdgeFlag::Child(p) => {
            let p1 = p as i64 + 1;
            let smaller = mesh.sibling_of(e).map_or(true, |s| e < s);
            if smaller {
                2 * p1 - 1
            } else {
                2 * p1
            }
        }
    }
}

/// Writes `mesh` in QMESH form, compacting away free slots.
pub fn save_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<(), MeshError> {
    if mesh.num_elements() == 0 {
        return Err(MeshError::Empty);
    }
    validate(mesh)?;
    let (m, _) = mesh.compacted();
    writeln!(out, "QMESH 1")?;
    writeln!(out, "NODES {}", m.num_nodes())?;
    for n in m.node_ids() {
        let nd = m.node(n);
        writeln!(out, "{} {} {}", nd.x, nd.y, nd.flag.code())?;
    }
    writeln!(out, "EDGES {}", m.num_edges())?;
    for e in m.edge_ids() {
        let ed = m.edge(e);
        writeln!(out, "{} {} {}", ed.ends[0] + 1, ed.ends[1] + 1, edge_flag_code(&m, e))?;
    }
    writeln!(out, "ELEMS {}", m.num_elements())?;
    for el in m.element_ids() {
        let e = m.element(el);
        let mids = e.mids.map(|x| x.map_or(0, |n| n + 1));
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {} {} {}",
            e.vertices[0] + 1,
            e.vertices[1] + 1,
            e.vertices[2] + 1,
            e.vertices[3] + 1,
            mids[0],
            mids[1],
            mids[2],
            mids[3],
            e.edges[0] + 1,
            e.edges[1] + 1,
            e.edges[2] + 1,
            e.edges[3] + 1
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_mesh_file(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    load_mesh(std::fs::File::open(path)?)
}

pub fn write_mesh_file(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let f = std::fs::File::create(path)?;
    save_mesh(mesh, std::io::BufWriter::new(f))
}
