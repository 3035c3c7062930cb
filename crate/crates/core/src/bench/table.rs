use std::fmt::Write as _;

use crate::adapt::{refine, MarkSet};
use crate::elements::Q4Kind;
use crate::mesh::Mesh;
use crate::problems::{beam1, beam2, beam_mesh, MeshVariant, ProblemName};
use crate::solve::{error_norms, solve_problem, SolveError};

/// Poisson ratios of the beam tables.
pub const TABLE_NUS: [f64; 5] = [0.49, 0.499, 0.4999, 0.49999, 0.49999999999];

/// Mesh sizes `m × n` starting at `base` and doubled `levels - 1` times.
pub fn table_sizes(base: (usize, usize), levels: usize) -> Vec<(usize, usize)> {
    (0..levels).map(|k| (base.0 << k, base.1 << k)).collect()
}

/// The beam mesh, optionally with its middle column of elements refined
/// once so that the neighboring columns become 5-node elements.
pub fn table_mesh(m: usize, n: usize, variant: MeshVariant, transition: bool) -> Mesh {
    let mut mesh = beam_mesh(m, n, variant);
    if transition {
        // Elements are numbered row by row.
        let col = m / 2;
        let marks = MarkSet::new((0..n).map(|j| j * m + col));
        refine(&mut mesh, &marks).expect("refining one column keeps the mesh valid");
    }
    mesh
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub problem: ProblemName,
    pub variant: MeshVariant,
    pub transition: bool,
    pub nus: Vec<f64>,
    pub sizes: Vec<(usize, usize)>,
    pub q4: Q4Kind,
    pub e: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            problem: ProblemName::Beam1,
            variant: MeshVariant::Regular,
            transition: false,
            nus: TABLE_NUS.to_vec(),
            sizes: table_sizes((10, 2), 4),
            q4: Q4Kind::Ps,
            e: 1500.0,
        }
    }
}

/// Relative errors, one row per Poisson ratio and one column per size.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub nus: Vec<f64>,
    pub sizes: Vec<(usize, usize)>,
    pub displacement: Vec<Vec<f64>>,
    pub stress: Vec<Vec<f64>>,
}

impl ErrorTable {
    fn csv(&self, rows: &[Vec<f64>]) -> String {
        let mut s = String::from("nu");
        for (m, n) in &self.sizes {
            let _ = write!(s, ",{m}x{n}");
        }
        s.push('\n');
        for (nu, row) in self.nus.iter().zip(rows) {
            let _ = write!(s, "{nu}");
            for v in row {
                let _ = write!(s, ",{v:.4e}");
            }
            s.push('\n');
        }
        s
    }

    pub fn displacement_csv(&self) -> String {
        self.csv(&self.displacement)
    }

    pub fn stress_csv(&self) -> String {
        self.csv(&self.stress)
    }

    /// Successive ratios `e(k) / e(k + 1)` along one row.
    pub fn ratios(row: &[f64]) -> Vec<f64> {
        row.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

/// Errors of `beam1` or `beam2` over the requested Poisson ratios and sizes.
pub fn run_table(opts: &TableOptions) -> Result<ErrorTable, SolveError> {
    let mut displacement = Vec::new();
    let mut stress = Vec::new();
    for &nu in &opts.nus {
        let spec = match opts.problem {
            ProblemName::Beam2 => beam2(opts.e, nu, opts.q4),
            _ => beam1(opts.e, nu, opts.q4),
        };
        let mut du = Vec::new();
        let mut ds = Vec::new();
        for &(m, n) in &opts.sizes {
            let mesh = table_mesh(m, n, opts.variant, opts.transition);
            let e = error_norms(&solve_problem(&mesh, &spec)?, &spec.exact);
            du.push(e.displacement.unwrap_or(f64::NAN));
            ds.push(e.stress.unwrap_or(f64::NAN));
        }
        displacement.push(du);
        stress.push(ds);
    }
    Ok(ErrorTable {
        nus: opts.nus.clone(),
        sizes: opts.sizes.clone(),
        displacement,
        stress,
    })
}
