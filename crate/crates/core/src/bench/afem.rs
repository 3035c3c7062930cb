use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::adapt::{refine, AdaptError, MarkSet};
use crate::estimate::{dorfler_mark, metric_indicator, recovery_indicator, IndicatorField};
use crate::mesh::Mesh;
use crate::solve::{error_norms, solve_problem, ProblemSpec, Solution, SolveError};

#[derive(Debug, Error)]
pub enum AfemError {
    #[error("iteration {iteration}: {source}")]
    Solve {
        iteration: usize,
        #[source]
        source: SolveError,
    },
    #[error("iteration {iteration}: {source}")]
    Refine {
        iteration: usize,
        #[source]
        source: AdaptError,
    },
}

/// When the loop stops. Every limit is checked after the solve and
/// estimate of an iteration, so the last row always has a solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StopRule {
    /// Stop once the number of equations reaches this.
    pub max_dofs: Option<usize>,
    /// Number of refinements performed before stopping.
    pub max_iterations: Option<usize>,
    /// Stop once the displacement (or scalar) error `|u − u_h|₁` drops
    /// below this. Needs the exact gradient.
    pub error_target: Option<f64>,
}

impl StopRule {
    fn done(&self, it: usize, dofs: usize, err: Option<f64>) -> bool {
        self.max_iterations.is_some_and(|m| it >= m)
            || self.max_dofs.is_some_and(|m| dofs >= m)
            || matches!((self.error_target, err), (Some(t), Some(e)) if e < t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Marking {
    /// Minimal-cardinality bulk marking.
    #[default]
    Dorfler,
    /// Every element, for uniform-refinement reference curves.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfemOptions {
    pub theta: f64,
    pub stop: StopRule,
    pub marking: Marking,
    /// Keep every iteration's indicators in [`AfemResult::history`].
    pub record_indicators: bool,
}

impl Default for AfemOptions {
    fn default() -> Self {
        AfemOptions {
            theta: 0.5,
            stop: StopRule {
                max_iterations: Some(10),
                ..StopRule::default()
            },
            marking: Marking::Dorfler,
            record_indicators: false,
        }
    }
}

/// One Solve → Estimate → Mark → Refine pass. Mark and refine timings are
/// zero on the final row.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AfemRow {
    pub iteration: usize,
    pub elements: usize,
    pub dofs: usize,
    pub eta: f64,
    /// Relative errors.
    pub displacement_error: Option<f64>,
    pub stress_error: Option<f64>,
    /// Absolute `|u − u_h|₁`.
    pub displacement_abs: Option<f64>,
    pub marked: usize,
    pub t_solve: f64,
    pub t_estimate: f64,
    pub t_mark: f64,
    pub t_refine: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AfemTrace {
    pub rows: Vec<AfemRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

impl AfemTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "iteration,elements,dofs,eta,displacement_error,stress_error,displacement_abs,marked,t_solve,t_estimate,t_mark,t_refine\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.6e},{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
                r.iteration,
                r.elements,
                r.dofs,
                r.eta,
                opt(r.displacement_error),
                opt(r.stress_error),
                opt(r.displacement_abs),
                r.marked,
                r.t_solve,
                r.t_estimate,
                r.t_mark,
                r.t_refine
            );
        }
        s
    }
}

/// Metric indicator for elasticity, gradient recovery for scalar problems.
pub fn estimate(sol: &Solution) -> IndicatorField {
    if sol.components == 1 {
        recovery_indicator(sol)
    } else {
        metric_indicator(sol)
    }
}

pub struct AfemResult {
    pub mesh: Mesh,
    pub trace: AfemTrace,
    pub solution: Solution,
    pub indicators: IndicatorField,
    /// Indicators of every iteration, when recorded.
    pub history: Vec<IndicatorField>,
}

/// Adaptive loop: Solve, Estimate, Mark, Refine, in that order, until the
/// stop rule fires. Every refined mesh is validated.
pub fn afem_loop(mut mesh: Mesh, spec: &ProblemSpec, opts: &AfemOptions) -> Result<AfemResult, AfemError> {
    let mut trace = AfemTrace::default();
    let mut history = Vec::new();
    for iteration in 0.. {
        let t = Instant::now();
        let sol = solve_problem(&mesh, spec).map_err(|source| AfemError::Solve { iteration, source })?;
        let t_solve = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let ind = estimate(&sol);
        let t_estimate = t.elapsed().as_secs_f64();
        let err = error_norms(&sol, &spec.exact);
        let mut row = AfemRow {
            iteration,
            elements: mesh.num_elements(),
            dofs: sol.num_equations,
            eta: ind.global(),
            displacement_error: err.displacement,
            stress_error: err.stress,
            displacement_abs: err.displacement_abs,
            t_solve,
            t_estimate,
            ..AfemRow::default()
        };
        if opts.stop.done(iteration, sol.num_equations, err.displacement_abs) {
            trace.rows.push(row);
            if opts.record_indicators {
                history.push(ind.clone());
            }
            return Ok(AfemResult {
                mesh,
                trace,
                solution: sol,
                indicators: ind,
                history,
            });
        }
        let t = Instant::now();
        let marks = match opts.marking {
            Marking::Dorfler => dorfler_mark(&ind, opts.theta),
            Marking::All => MarkSet::all(&mesh),
        };
        row.t_mark = t.elapsed().as_secs_f64();
        row.marked = marks.len();
        let t = Instant::now();
        refine(&mut mesh, &marks).map_err(|source| AfemError::Refine { iteration, source })?;
        row.t_refine = t.elapsed().as_secs_f64();
        trace.rows.push(row);
        if opts.record_indicators {
            history.push(ind);
        }
    }
    unreachable!()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
