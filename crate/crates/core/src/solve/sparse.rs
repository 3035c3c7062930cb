use faer::linalg::solvers::Solve;
use faer::sparse::linalg::{LltError, LuError};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::SolveError;

/// Symmetric system stored as its lower triangle in column-major order,
/// duplicates already summed.
#[derive(Debug, Clone, Default)]
pub struct SparseSystem {
    pub n: usize,
    /// `(row, col, value)` with `row >= col`, sorted by `(col, row)`.
    pub lower: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    /// Builds from unsorted lower-triangle entries, summing duplicates in a
    /// fixed order.
    pub fn from_entries(n: usize, mut entries: Vec<(usize, usize, f64)>, rhs: Vec<f64>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (c, r));
        let mut lower: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len() / 2);
        for (r, c, v) in entries {
            debug_assert!(r >= c);
            match lower.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => lower.push((r, c, v)),
            }
        }
        SparseSystem { n, lower, rhs }
    }

    pub fn nnz(&self) -> usize {
        self.lower.len()
    }

    /// `K x` using both triangles.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(r, c, v) in &self.lower {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// Frobenius norm of the full symmetric matrix.
    pub fn norm(&self) -> f64 {
        self.lower
            .iter()
            .map(|&(r, c, v)| if r == c { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(r, c, v) in &self.lower {
            if r == c {
                d[r] = v;
            }
        }
        d
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse Cholesky solve with a residual check
/// `‖Kx − F‖ ≤ 1e-10 (‖K‖‖x‖ + ‖F‖)`.
pub fn solve_spd(sys: &SparseSystem) -> Result<Vec<f64>, SolveError> {
    if sys.n == 0 {
        return Ok(Vec::new());
    }
    let trips: Vec<Triplet<usize, usize, f64>> = sys.lower.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let k = SparseColMat::<usize, f64>::try_new_from_triplets(sys.n, sys.n, &trips)
        .map_err(|e| SolveError::Backend(format!("{e:?}")))?;
    let llt = k.sp_cholesky(Side::Lower).map_err(|e| match e {
        LltError::Numeric(faer::linalg::solvers::LltError::NonPositivePivot { index }) => {
            let diag = sys.diagonal();
            let index = index.min(sys.n - 1);
            SolveError::NotSpd {
                index,
                diagonal: diag[index],
            }
        }
        other => SolveError::Backend(format!("{other:?}")),
    })?;
    let mut x = Mat::<f64>::from_fn(sys.n, 1, |i, _| sys.rhs[i]);
    llt.solve_in_place(x.as_mut());
    check(sys, (0..sys.n).map(|i| x[(i, 0)]).collect())
}

fn check(sys: &SparseSystem, x: Vec<f64>) -> Result<Vec<f64>, SolveError> {
    let kx = sys.matvec(&x);
    let res: Vec<f64> = kx.iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
    let residual = norm2(&res);
    let bound = 1e-10 * (sys.norm() * norm2(&x) + norm2(&sys.rhs));
    if !(residual <= bound) {
        return Err(SolveError::Residual { residual, bound });
    }
    Ok(x)
}

/// Sparse LU solve of a symmetric, possibly indefinite system, with the
/// same residual check as [`solve_spd`].
pub fn solve_symmetric(sys: &SparseSystem) -> Result<Vec<f64>, SolveError> {
    if sys.n == 0 {
        return Ok(Vec::new());
    }
    let mut trips: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(2 * sys.lower.len());
    for &(r, c, v) in &sys.lower {
        trips.push(Triplet::new(r, c, v));
        if r != c {
            trips.push(Triplet::new(c, r, v));
        }
    }
    let k = SparseColMat::<usize, f64>::try_new_from_triplets(sys.n, sys.n, &trips)
        .map_err(|e| SolveError::Backend(format!("{e:?}")))?;
    let lu = k.sp_lu().map_err(|e| match e {
        LuError::SymbolicSingular { index } => SolveError::Backend(format!("structurally singular at {index}")),
        other => SolveError::Backend(format!("{other:?}")),
    })?;
    let mut x = Mat::<f64>::from_fn(sys.n, 1, |i, _| sys.rhs[i]);
    lu.solve_in_place(x.as_mut());
    check(sys, (0..sys.n).map(|i| x[(i, 0)]).collect())
}
