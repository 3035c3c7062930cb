use std::time::Instant;

use crate::adapt::{coarsen_unchecked, refine_unchecked, AdaptError, MarkSet};
use crate::mesh::{validate, Mesh};
use crate::problems::circle_mesh;

/// Cell area of the 8×8 background mesh on `[-1,1]²`.
const BACKGROUND_AREA: f64 = 1.0 / 16.0;

/// Refinement level of an element of the circle mesh, from its area.
pub fn level(mesh: &Mesh, elem: usize) -> usize {
    let v = mesh.vertex_coords(elem);
    let mut a = 0.0;
    for i in 0..4 {
        let (p, q) = (v[i], v[(i + 1) % 4]);
        a += p[0] * q[1] - q[0] * p[1];
    }
    (0.5 * (BACKGROUND_AREA / (0.5 * a.abs())).log2()).round().max(0.0) as usize
}

/// Whether the straight-sided element meets the circle `|x| = r`. A
/// vanishing radius has no interface.
pub fn meets_circle(mesh: &Mesh, elem: usize, r: f64) -> bool {
    if r <= 1e-12 {
        return false;
    }
    let v = mesh.vertex_coords(elem);
    let far = v.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    if far < r {
        return false;
    }
    let inside = (0..4).all(|i| {
        let (p, q) = (v[i], v[(i + 1) % 4]);
        (q[0] - p[0]) * (-p[1]) - (q[1] - p[1]) * (-p[0]) >= 0.0
    });
    let near = if inside {
        0.0
    } else {
        (0..4)
            .map(|i| {
                let (p, q) = (v[i], v[(i + 1) % 4]);
                let d = [q[0] - p[0], q[1] - p[1]];
                let t = (-(p[0] * d[0] + p[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
                (p[0] + t * d[0]).hypot(p[1] + t * d[1])
            })
            .fold(f64::INFINITY, f64::min)
    };
    near <= r
}

/// One tracking step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CircleStep {
    pub step: usize,
    pub radius: f64,
    pub elements: usize,
    /// Elements refined (closure included) plus elements merged.
    pub touched: usize,
    /// Wall time of the refine and coarsen kernels only.
    pub seconds: f64,
}

/// Tracks the circle `|x| = |0.5 − t|`, `t = k / steps`, `k = 0..steps`,
/// on the 8×8 mesh of `[-1,1]²`. Each step refines elements meeting the
/// circle until they reach `max_level`, then coarsens patches away from
/// it until nothing merges. The mesh is validated after every step.
pub fn circle_tracking(max_level: usize, steps: usize) -> Result<(Mesh, Vec<CircleStep>), AdaptError> {
    let mut mesh = circle_mesh();
    let mut out = Vec::with_capacity(steps + 1);
    // Elements meeting the interface; only these and their new children can
    // need refinement.
    for k in 0..=steps {
        let r = (0.5 - k as f64 / steps as f64).abs();
        let mut touched = 0;
        let mut seconds = 0.0;
        loop {
            let marks: MarkSet = mesh
                .element_ids()
                .filter(|&e| level(&mesh, e) < max_level && meets_circle(&mesh, e, r))
                .collect();
            if marks.is_empty() {
                break;
            }
            let t = Instant::now();
            let s = refine_unchecked(&mut mesh, &marks)?;
            seconds += t.elapsed().as_secs_f64();
            touched += s.marked.len();
        }
        loop {
            let marks: MarkSet = mesh.element_ids().filter(|&e| !meets_circle(&mesh, e, r)).collect();
            let t = Instant::now();
            let s = coarsen_unchecked(&mut mesh, &marks)?;
            seconds += t.elapsed().as_secs_f64();
            if s.good_nodes.is_empty() {
                break;
            }
            touched += 4 * s.good_nodes.len();
        }
        validate(&mesh)?;
        out.push(CircleStep {
            step: k,
            radius: r,
            elements: mesh.num_elements(),
            touched,
            seconds,
        });
    }
    Ok((mesh, out))
}
