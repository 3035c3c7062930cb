use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::estimate::IndicatorField;
use crate::mesh::Mesh;
use crate::solve::{mean_stress, Solution};

/// Legacy ASCII VTK unstructured grid. Every live node is a point (mid
/// nodes included); cells are quads on the element corners. Point data holds
/// the displacement (or scalar `u`); cell data holds the mean stress and
/// the indicators when given. A mesh-only export has no data sections.
pub fn export_vtk(mesh: &Mesh, sol: Option<&Solution>, ind: Option<&IndicatorField>) -> String {
    let mut index = vec![usize::MAX; mesh.node_capacity()];
    let ids: Vec<usize> = mesh.node_ids().collect();
    for (i, &n) in ids.iter().enumerate() {
        index[n] = i;
    }
    let elems: Vec<usize> = mesh.element_ids().collect();
    let mut s = String::from("# vtk DataFile Version 3.0\nquadfem\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", ids.len());
    for &n in &ids {
        let [x, y] = mesh.coords(n);
        let _ = writeln!(s, "{x} {y} 0");
    }
    let _ = writeln!(s, "CELLS {} {}", elems.len(), 5 * elems.len());
    for &e in &elems {
        let v = mesh.element(e).vertices.map(|n| index[n]);
        let _ = writeln!(s, "4 {} {} {} {}", v[0], v[1], v[2], v[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", elems.len());
    for _ in &elems {
        s.push_str("9\n");
    }
    if let Some(sol) = sol {
        let _ = writeln!(s, "POINT_DATA {}", ids.len());
        if sol.components == 2 {
            s.push_str("VECTORS displacement double\n");
            for &n in &ids {
                let _ = writeln!(s, "{} {} 0", sol.nodal[n][0], sol.nodal[n][1]);
            }
        } else {
            s.push_str("SCALARS u double 1\nLOOKUP_TABLE default\n");
            for &n in &ids {
                let _ = writeln!(s, "{}", sol.nodal[n][0]);
            }
        }
    }
    let stress = sol.filter(|s| s.components == 2);
    if stress.is_some() || ind.is_some() {
        let _ = writeln!(s, "CELL_DATA {}", elems.len());
    }
    if let Some(sol) = stress {
        let means: Vec<[f64; 3]> = elems
            .iter()
            .map(|&e| sol.element(e).map_or([f64::NAN; 3], mean_stress))
            .collect();
        for (k, name) in ["sigma_xx", "sigma_yy", "sigma_xy"].iter().enumerate() {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for m in &means {
                let _ = writeln!(s, "{}", m[k]);
            }
        }
    }
    if let Some(ind) = ind {
        s.push_str("SCALARS eta double 1\nLOOKUP_TABLE default\n");
        for &e in &elems {
            let _ = writeln!(s, "{}", ind.get(e).unwrap_or(f64::NAN));
        }
    }
    s
}

pub fn write_vtk(
    path: impl AsRef<Path>,
    mesh: &Mesh,
    sol: Option<&Solution>,
    ind: Option<&IndicatorField>,
) -> io::Result<()> {
    std::fs::write(path, export_vtk(mesh, sol, ind))
}
