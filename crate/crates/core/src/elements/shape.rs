/// Shape functions of a transition element at one reference point.
///
/// Entries `0..4` are the vertices, `4 + k` the mid node in slot `k`
/// (zero when the slot is empty).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub n: [f64; 8],
    pub dn: [[f64; 2]; 8],
}

/// Bubble on slot `k` (`3/8 (1 ∓ ·)(1 − ·²)`) and its gradient.
fn bubble(k: usize, xi: f64, eta: f64) -> (f64, [f64; 2]) {
    const C: f64 = 0.375;
    match k {
        0 => (C * (1.0 - eta) * (1.0 - xi * xi), [-2.0 * C * xi * (1.0 - eta), -C * (1.0 - xi * xi)]),
        1 => (C * (1.0 + xi) * (1.0 - eta * eta), [C * (1.0 - eta * eta), -2.0 * C * eta * (1.0 + xi)]),
        2 => (C * (1.0 + eta) * (1.0 - xi * xi), [-2.0 * C * xi * (1.0 + eta), C * (1.0 - xi * xi)]),
        3 => (C * (1.0 - xi) * (1.0 - eta * eta), [-C * (1.0 - eta * eta), -2.0 * C * eta * (1.0 - xi)]),
        _ => unreachable!(),
    }
}

pub fn shape_functions(mask: [bool; 4], xi: f64, eta: f64) -> Shape {
    const SX: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
    const SE: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];
    let mut n = [0.0; 8];
    let mut dn = [[0.0; 2]; 8];
    for k in 0..4 {
        if mask[k] {
            let (b, g) = bubble(k, xi, eta);
            n[4 + k] = b;
            dn[4 + k] = g;
        }
    }
    for i in 0..4 {
        let (sx, se) = (SX[i], SE[i]);
        n[i] = 0.25 * (1.0 + sx * xi) * (1.0 + se * eta);
        dn[i] = [0.25 * sx * (1.0 + se * eta), 0.25 * se * (1.0 + sx * xi)];
        // Vertex i touches slots i and i - 1.
        for k in [i, (i + 3) % 4] {
            n[i] -= 0.5 * n[4 + k];
            dn[i][0] -= 0.5 * dn[4 + k][0];
            dn[i][1] -= 0.5 * dn[4 + k][1];
        }
    }
    Shape { n, dn }
}

/// Reference point at parameter `t ∈ [-1, 1]` along local edge `k`, running
/// from vertex `k` to vertex `k + 1`.
pub fn edge_point(k: usize, t: f64) -> (f64, f64) {
    match k {
        0 => (t, -1.0),
        1 => (1.0, t),
        2 => (-t, 1.0),
        3 => (-1.0, -t),
        _ => unreachable!(),
    }
}
