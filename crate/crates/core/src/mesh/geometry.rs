use super::{Mesh, MeshError};

/// Coefficients of the bilinear map from the reference square `[-1,1]^2`.
///
/// `x = x0 + a1 ξ + a2 η + a12 ξη` and `y = y0 + b1 ξ + b2 η + b12 ξη`, so the
/// Jacobian determinant is `j0 + j1 ξ + j2 η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomCoeffs {
    pub x0: f64,
    pub y0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a12: f64,
    pub b1: f64,
    pub b2: f64,
    pub b12: f64,
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    /// Diameter (longest vertex-to-vertex distance).
    pub h: f64,
    /// Smallest inscribed-circle diameter over the four corner triangles.
    pub rho: f64,
    /// Distance between the midpoints of the two diagonals.
    pub d: f64,
}

const XI: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 4] = [-1.0, -1.0, 1.0, 1.0];

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

impl GeomCoeffs {
    pub fn from_vertices(v: &[[f64; 2]; 4]) -> Self {
        let mut c = [[0.0; 2]; 4];
        for i in 0..4 {
            let rows = [1.0, XI[i], ETA[i], XI[i] * ETA[i]];
            for (r, w) in rows.iter().enumerate() {
                c[r][0] += 0.25 * w * v[i][0];
                c[r][1] += 0.25 * w * v[i][1];
            }
        }
        let [[x0, y0], [a1, b1], [a2, b2], [a12, b12]] = c;

        let mut h: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                h = h.max(dist(v[i], v[j]));
            }
        }
        let rho = (0..4)
            .map(|i| {
                let p = v[(i + 3) % 4];
                let q = v[i];
                let r = v[(i + 1) % 4];
                let area = 0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])).abs();
                let perimeter = dist(p, q) + dist(q, r) + dist(r, p);
                // inscribed diameter = 4 * area / perimeter
                if perimeter > 0.0 {
                    4.0 * area / perimeter
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min);

        GeomCoeffs {
            x0,
            y0,
            a1,
            a2,
            a12,
            b1,
            b2,
            b12,
            j0: a1 * b2 - a2 * b1,
            j1: a1 * b12 - a12 * b1,
            j2: a12 * b2 - a2 * b12,
            h,
            rho,
            d: 2.0 * a12.hypot(b12),
        }
    }

    pub fn map(&self, xi: f64, eta: f64) -> [f64; 2] {
        [
            self.x0 + self.a1 * xi + self.a2 * eta + self.a12 * xi * eta,
            self.y0 + self.b1 * xi + self.b2 * eta + self.b12 * xi * eta,
        ]
    }

    /// `DF = [[∂x/∂ξ, ∂x/∂η], [∂y/∂ξ, ∂y/∂η]]`.
    pub fn jacobian_matrix(&self, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        [
            [self.a1 + self.a12 * eta, self.a2 + self.a12 * xi],
            [self.b1 + self.b12 * eta, self.b2 + self.b12 * xi],
        ]
    }

    pub fn jacobian(&self, xi: f64, eta: f64) -> f64 {
        self.j0 + self.j1 * xi + self.j2 * eta
    }

    /// Smallest Jacobian over the reference square. `J` is affine in `(ξ, η)`
    /// so the minimum sits at a corner.
    pub fn min_jacobian(&self) -> f64 {
        (0..4)
            .map(|i| self.jacobian(XI[i], ETA[i]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Map, Jacobian matrix, its determinant and its inverse at one point;
    /// `None` where the Jacobian is not positive.
    pub fn eval(&self, xi: f64, eta: f64) -> Option<PointGeometry> {
        let df = self.jacobian_matrix(xi, eta);
        let det = df[0][0] * df[1][1] - df[0][1] * df[1][0];
        if !(det > 0.0) {
            return None;
        }
        let inv = [
            [df[1][1] / det, -df[0][1] / det],
            [-df[1][0] / det, df[0][0] / det],
        ];
        Some(PointGeometry {
            x: self.map(xi, eta),
            df,
            det,
            inv,
        })
    }

    pub fn area(&self) -> f64 {
        4.0 * self.j0
    }
}

/// Geometry of the bilinear map at one reference point.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    pub x: [f64; 2],
    pub df: [[f64; 2]; 2],
    pub det: f64,
    /// `DF^{-1}`; physical gradients are `∇_x N = DF^{-T} ∇_ξ N`.
    pub inv: [[f64; 2]; 2],
}

impl PointGeometry {
    /// Physical gradient from a reference gradient.
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }
}

/// Geometry coefficients of one element of `mesh`.
pub fn geom_coeffs(mesh: &Mesh, elem: usize) -> Result<GeomCoeffs, MeshError> {
    let g = GeomCoeffs::from_vertices(&mesh.vertex_coords(elem));
    if g.min_jacobian() <= 0.0 {
        return Err(MeshError::NonpositiveJacobian {
            line: 0,
            elem: elem + 1,
        });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_coefficients() {
        let g = geom_coeffs(&unit_square(), 0).unwrap();
        assert_eq!((g.a1, g.b2), (0.5, 0.5));
        assert_eq!((g.a2, g.a12, g.b1, g.b12), (0.0, 0.0, 0.0, 0.0));
        assert_eq!((g.j0, g.j1, g.j2), (0.25, 0.0, 0.0));
        assert_eq!(g.d, 0.0);
        let p = g.eval(0.0, 0.0).unwrap();
        assert_eq!(p.x, [0.5, 0.5]);
        assert_eq!(p.det, 0.25);
    }

    #[test]
    fn fixture_element_two() {
        // E2 = (8, 9, 13, 10): the square [0, 0.5]^2.
        let g = geom_coeffs(&lshape(), 1).unwrap();
        assert_eq!((g.a1, g.b2), (0.25, 0.25));
        assert_eq!((g.a2, g.a12, g.b1, g.b12), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn corners_interpolate() {
        let v = [[0.1, -0.2], [2.0, 0.3], [1.7, 1.9], [-0.4, 1.1]];
        let g = GeomCoeffs::from_vertices(&v);
        for i in 0..4 {
            let x = g.map(XI[i], ETA[i]);
            assert_relative_eq!(x[0], v[i][0], epsilon = 1e-14);
            assert_relative_eq!(x[1], v[i][1], epsilon = 1e-14);
        }
    }

    #[test]
    fn parallelogram_has_constant_jacobian_matrix() {
        let v = [[0.0, 0.0], [2.0, 0.5], [3.0, 2.5], [1.0, 2.0]];
        let g = GeomCoeffs::from_vertices(&v);
        assert_eq!((g.a12, g.b12, g.d), (0.0, 0.0, 0.0));
        assert_eq!(g.jacobian_matrix(-0.3, 0.8), g.jacobian_matrix(0.9, -1.0));
    }

    #[test]
    fn area_matches_quadrature_of_jacobian() {
        let v = [[0.1, -0.2], [2.0, 0.3], [1.7, 1.9], [-0.4, 1.1]];
        let g = GeomCoeffs::from_vertices(&v);
        let rule = crate::quadrature::GaussRule::square(3);
        let integral: f64 = rule.iter().map(|(p, w)| w * g.jacobian(p[0], p[1])).sum();
        let shoelace = {
            let mut a = 0.0;
            for i in 0..4 {
                let j = (i + 1) % 4;
                a += v[i][0] * v[j][1] - v[j][0] * v[i][1];
            }
            0.5 * a
        };
        assert_relative_eq!(integral, 4.0 * g.j0, max_relative = 1e-12);
        assert_relative_eq!(integral, shoelace, max_relative = 1e-12);
    }
}
