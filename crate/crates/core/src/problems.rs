//! Benchmark problems: initial meshes and problem data.
//!
//! | name | domain | data |
//! |------|--------|------|
//! | `lshape_poisson` | `[0,1]×[-1,1] ∪ [-1,0]×[0,1]` | `Δu = 0`, `u = r^{2/3} sin((2θ+π)/3)` on the boundary |
//! | `beam1` | `[0,10]×[-1,1]` | pure bending, linear stress |
//! | `beam2` | `[0,10]×[-1,1]` | body force, cubic stress |
//! | `crack` | `[-1,1]×[0,1]` | mode I tip field at the origin |
//! | `circle` | `[-1,1]²` | mesh only, for interface tracking |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::elements::{Material, Q4Kind};
use crate::mesh::{fixtures, from_quads, grid_coords, grid_quads, rectangle, Mesh};
use crate::solve::{DirichletRule, ExactSolution, NeumannRule, ProblemSpec};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemName {
    LshapePoisson,
    Beam1,
    Beam2,
    Crack,
    Circle,
}

impl FromStr for ProblemName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "lshape_poisson" | "lshape" => ProblemName::LshapePoisson,
            "beam1" => ProblemName::Beam1,
            "beam2" => ProblemName::Beam2,
            "crack" => ProblemName::Crack,
            "circle" => ProblemName::Circle,
            _ => return Err(format!("unknown problem '{s}'")),
        })
    }
}

impl fmt::Display for ProblemName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemName::LshapePoisson => "lshape_poisson",
            ProblemName::Beam1 => "beam1",
            ProblemName::Beam2 => "beam2",
            ProblemName::Crack => "crack",
            ProblemName::Circle => "circle",
        })
    }
}

/// Beam mesh family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeshVariant {
    /// Uniform rectangles.
    #[default]
    Regular,
    /// Interior vertical lines tilted alternately, giving trapezoids.
    Irregular,
}

impl FromStr for MeshVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "regular" => Ok(MeshVariant::Regular),
            "irregular" => Ok(MeshVariant::Irregular),
            _ => Err(format!("unknown mesh variant '{s}'")),
        }
    }
}

/// Tilt of the irregular beam mesh as a fraction of the cell width: the top
/// end of interior line `i` moves by `(-1)^i δ`, the bottom end by the
/// opposite amount.
pub const IRREGULAR_DELTA: f64 = 0.3;

/// `m × n` mesh of the beam `[0,10]×[-1,1]`.
pub fn beam_mesh(m: usize, n: usize, variant: MeshVariant) -> Mesh {
    assert!(m >= 1 && n >= 1, "mesh size must be at least 1x1");
    let (x, y) = ([0.0, 10.0], [-1.0, 1.0]);
    match variant {
        MeshVariant::Regular => rectangle(m, n, x, y),
        MeshVariant::Irregular => {
            let dx = 10.0 / m as f64;
            let mut c = grid_coords(m, n, x, y);
            for p in c.iter_mut() {
                let i = (p[0] / dx).round() as usize;
                if i > 0 && i < m {
                    let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                    p[0] += s * IRREGULAR_DELTA * dx * p[1];
                }
            }
            from_quads(&c, &grid_quads(m, n)).expect("tilted grid is valid")
        }
    }
}

/// The 8×4 mesh of the upper half panel `[-1,1]×[0,1]`.
pub fn crack_mesh() -> Mesh {
    rectangle(8, 4, [-1.0, 1.0], [0.0, 1.0])
}

/// The 8×8 mesh of `[-1,1]²`.
pub fn circle_mesh() -> Mesh {
    rectangle(8, 8, [-1.0, 1.0], [-1.0, 1.0])
}

/// Initial L-shape mesh: three squares with the one on `[0,1]²` quadrisected.
pub fn lshape_mesh() -> Mesh {
    fixtures::lshape()
}

fn on_boundary() -> crate::solve::Predicate {
    Arc::new(|_| true)
}

/// Pure bending of the cantilever; the exact stress is `(-2Ey, 0, 0)`.
pub fn beam1(e: f64, nu: f64, q4: Q4Kind) -> ProblemSpec {
    let u = move |p: [f64; 2]| {
        let [x, y] = p;
        [-2.0 * (1.0 - nu * nu) * x * y, (1.0 - nu * nu) * x * x + nu * (1.0 + nu) * (y * y - 1.0)]
    };
    let mut spec = ProblemSpec::new(Material::plane_strain(e, nu), 2);
    spec.q4 = q4;
    spec.dirichlet.push(DirichletRule {
        on: Arc::new(|p| p[0].abs() < TOL),
        components: [true, true],
        value: Arc::new(u),
    });
    spec.neumann.push(NeumannRule {
        on: Arc::new(|p| (p[0] - 10.0).abs() < TOL),
        traction: Arc::new(move |p| [-2.0 * e * p[1], 0.0]),
    });
    spec.exact = ExactSolution {
        u: Some(Arc::new(u)),
        grad: Some(Arc::new(move |p| {
            let [x, y] = p;
            let a = 1.0 - nu * nu;
            [[-2.0 * a * y, -2.0 * a * x], [2.0 * a * x, 2.0 * nu * (1.0 + nu) * y]]
        })),
        stress: Some(Arc::new(move |p| [-2.0 * e * p[1], 0.0, 0.0])),
    };
    spec
}

/// Cantilever with a quadratic body force; cubic exact stress.
pub fn beam2(e: f64, nu: f64, q4: Q4Kind) -> ProblemSpec {
    let d = 1.0 - nu * nu;
    let u = move |p: [f64; 2]| {
        let [x, y] = p;
        [
            (-x.powi(4) * (1.0 - nu) - 6.0 * x * x * y * y * nu - y.powi(4) * nu * nu / (1.0 - nu)) / e,
            (4.0 * x.powi(3) * y * nu + 4.0 * x * y.powi(3) * nu * nu / (1.0 - nu)) / e,
        ]
    };
    let mut spec = ProblemSpec::new(Material::plane_strain(e, nu), 2);
    spec.q4 = q4;
    spec.body = Some(Arc::new(move |p| {
        let [x, y] = p;
        [12.0 * (x * x * (1.0 - nu) + y * y * nu) / d, 0.0]
    }));
    spec.dirichlet.push(DirichletRule {
        on: Arc::new(|p| p[0].abs() < TOL),
        components: [true, true],
        value: Arc::new(u),
    });
    spec.neumann.push(NeumannRule {
        on: Arc::new(|p| (p[0] - 10.0).abs() < TOL),
        traction: Arc::new(move |p| [(-4000.0 * (1.0 - nu) - 120.0 * p[1] * p[1] * nu) / d, 0.0]),
    });
    spec.exact = ExactSolution {
        u: Some(Arc::new(u)),
        grad: Some(Arc::new(move |p| {
            let [x, y] = p;
            let r = nu * nu / (1.0 - nu);
            [
                [
                    (-4.0 * x.powi(3) * (1.0 - nu) - 12.0 * x * y * y * nu) / e,
                    (-12.0 * x * x * y * nu - 4.0 * y.powi(3) * r) / e,
                ],
                [
                    (12.0 * x * x * y * nu + 4.0 * y.powi(3) * r) / e,
                    (4.0 * x.powi(3) * nu + 12.0 * x * y * y * r) / e,
                ],
            ]
        })),
        stress: Some(Arc::new(move |p| {
            let [x, y] = p;
            [(-4.0 * x.powi(3) * (1.0 - nu) - 12.0 * x * y * y * nu) / d, 0.0, 0.0]
        })),
    };
    spec
}

/// Mode I tip stress with unit intensity, in Voigt order.
pub fn crack_stress(p: [f64; 2]) -> [f64; 3] {
    let r = p[0].hypot(p[1]);
    let t = p[1].atan2(p[0]);
    let (s, c) = (t / 2.0).sin_cos();
    let (s3, c3) = (1.5 * t).sin_cos();
    let k = r.powf(-0.5);
    [k * c * (1.0 - s * s3), k * c * (1.0 + s * s3), k * s * c * c3]
}

/// Upper half of the edge-cracked panel. The crack occupies `y = 0, x < 0`
/// (traction free); `y = 0, x ≥ 0` is the symmetry line (`u_y = 0`), `u_x`
/// is pinned at the tip, and the exact traction acts on the outer edges.
pub fn crack(e: f64, nu: f64, q4: Q4Kind) -> ProblemSpec {
    let mut spec = ProblemSpec::new(Material::plane_strain(e, nu), 2);
    spec.q4 = q4;
    spec.edge_points = 5;
    let zero: crate::solve::VectorField = Arc::new(|_| [0.0, 0.0]);
    spec.dirichlet.push(DirichletRule {
        on: Arc::new(|p| p[1].abs() < TOL && p[0] > -TOL),
        components: [false, true],
        value: zero.clone(),
    });
    spec.dirichlet.push(DirichletRule {
        on: Arc::new(|p| p[1].abs() < TOL && p[0].abs() < TOL),
        components: [true, false],
        value: zero,
    });
    spec.neumann.push(NeumannRule {
        on: Arc::new(|p| p[1] > TOL),
        traction: Arc::new(|p| {
            let s = crack_stress(p);
            let n = if (p[1] - 1.0).abs() < TOL {
                [0.0, 1.0]
            } else if p[0] > 0.0 {
                [1.0, 0.0]
            } else {
                [-1.0, 0.0]
            };
            [s[0] * n[0] + s[2] * n[1], s[2] * n[0] + s[1] * n[1]]
        }),
    });
    spec.exact.stress = Some(Arc::new(crack_stress));
    spec
}

/// `r^{2/3} sin((2θ+π)/3)` with `θ ∈ [-π/2, π]` on the L-shape.
pub fn lshape_exact(p: [f64; 2]) -> f64 {
    let r = p[0].hypot(p[1]);
    let t = p[1].atan2(p[0]);
    r.powf(2.0 / 3.0) * ((2.0 * t + PI) / 3.0).sin()
}

/// Laplace problem on the L-shape with the corner singular solution as
/// boundary data.
pub fn lshape_poisson() -> ProblemSpec {
    let mut spec = ProblemSpec::new(Material::plane_strain(1.0, 0.0), 1);
    spec.dirichlet.push(DirichletRule {
        on: on_boundary(),
        components: [true, false],
        value: Arc::new(|p| [lshape_exact(p), 0.0]),
    });
    spec.exact = ExactSolution {
        u: Some(Arc::new(|p| [lshape_exact(p), 0.0])),
        grad: Some(Arc::new(|p| {
            let r = p[0].hypot(p[1]);
            let t = p[1].atan2(p[0]);
            let d = (2.0 * t + PI) / 3.0 - t;
            let k = 2.0 / 3.0 * r.powf(-1.0 / 3.0);
            [[k * d.sin(), k * d.cos()], [0.0, 0.0]]
        })),
        stress: None,
    };
    spec
}

/// Initial mesh and problem data for a catalog entry. `circle` has no
/// problem data and yields `None`.
pub fn catalog(
    name: ProblemName,
    m: usize,
    n: usize,
    variant: MeshVariant,
    e: f64,
    nu: f64,
    q4: Q4Kind,
) -> (Mesh, Option<ProblemSpec>) {
    match name {
        ProblemName::LshapePoisson => (lshape_mesh(), Some(lshape_poisson())),
        ProblemName::Beam1 => (beam_mesh(m, n, variant), Some(beam1(e, nu, q4))),
        ProblemName::Beam2 => (beam_mesh(m, n, variant), Some(beam2(e, nu, q4))),
        ProblemName::Crack => (crack_mesh(), Some(crack(e, nu, q4))),
        ProblemName::Circle => (circle_mesh(), None),
    }
}
