use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use quadfem::adapt::{classify_refine_edges, coarsen, post_mark, refine, MarkSet};
use quadfem::bench::{
    afem_loop, circle_tracking, estimate, loglog_slope, run_table, table_sizes, write_vtk, AfemOptions, StopRule,
    TableOptions, TABLE_NUS,
};
use quadfem::elements::Q4Kind;
use quadfem::mesh::{fixtures, validate, write_mesh_file, Mesh};
use quadfem::problems::{catalog, MeshVariant, ProblemName};
use quadfem::solve::{error_norms, solve_problem, ProblemSpec};

/// Adaptive hybrid stress quadrilateral elements on 1-irregular meshes.
#[derive(Parser)]
#[command(name = "quadfem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// lshape_poisson, beam1, beam2, crack or circle.
    #[arg(long, global = true)]
    problem: Option<ProblemName>,
    /// Beam mesh size, e.g. 10x2.
    #[arg(long, global = true, value_parser = parse_size)]
    mesh_size: Option<(usize, usize)>,
    /// Beam mesh: regular or irregular
    #[arg(long, global = true, default_value = "regular")]
    variant: MeshVariant,
    /// Poisson ratio (0.3 by default; `table` runs its ν list unless given)
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Young's modulus (1500 for the beams, 1 for the crack by default).
    #[arg(long = "E", global = true)]
    e: Option<f64>,
    /// Stress modes of the 4-node element: ps or ecq4.
    #[arg(long, global = true, default_value = "ps")]
    q4: Q4Kind,
    /// Bulk marking fraction.
    #[arg(long, global = true, default_value_t = 0.5)]
    theta: f64,
    /// Stop the adaptive loop at this many equations.
    #[arg(long, global = true)]
    max_dof: Option<usize>,
    /// Refinement iterations for `afem`; maximum depth for `circle`.
    #[arg(long, global = true)]
    max_level: Option<usize>,
    /// Number of mesh sizes in a table, each twice the previous one.
    #[arg(long, global = true, default_value_t = 4)]
    levels: usize,
    /// Time steps of the circle tracking run.
    #[arg(long, global = true, default_value_t = 100)]
    steps: usize,
    /// Output directory for files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write legacy VTK files to the output directory.
    #[arg(long, global = true)]
    vtk: bool,
    /// Write CSV files to the output directory.
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once on the initial mesh and report errors.
    Solve,
    /// Run the adaptive loop.
    Afem,
    /// Error tables of the beam problems over Poisson ratios and sizes.
    Table,
    /// Track a shrinking and growing circle with refinement and coarsening.
    Circle,
    /// Refine and coarsen the L-shaped reference mesh, writing each stage.
    DemoRefine,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected MxN, got '{s}'"))?;
    let m: usize = m.parse().map_err(|_| format!("bad size '{s}'"))?;
    let n: usize = n.parse().map_err(|_| format!("bad size '{s}'"))?;
    if m == 0 || n == 0 {
        return Err(format!("mesh size must be positive, got '{s}'"));
    }
    Ok((m, n))
}

impl Cli {
    fn out_dir(&self) -> Result<Option<&Path>> {
        match &self.out {
            Some(d) => {
                fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
                Ok(Some(d.as_path()))
            }
            None if self.vtk || self.csv => bail!("--vtk and --csv need --out DIR"),
            None => Ok(None),
        }
    }

    fn problem(&self, default: ProblemName) -> (Mesh, Option<ProblemSpec>, ProblemName) {
        let name = self.problem.unwrap_or(default);
        let (m, n) = self.mesh_size.unwrap_or((10, 2));
        let e = self.e.unwrap_or(if name == ProblemName::Crack { 1.0 } else { 1500.0 });
        let nu = self.nu.unwrap_or(0.3);
        let (mesh, spec) = catalog(name, m, n, self.variant, e, nu, self.q4);
        (mesh, spec, name)
    }
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn fmt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.4e}"))
}

fn cmd_solve(cli: &Cli) -> Result<()> {
    let (mesh, spec, name) = cli.problem(ProblemName::Beam1);
    let Some(spec) = spec else { bail!("problem '{name}' has no equations to solve") };
    let out = cli.out_dir()?;
    let t = Instant::now();
    let sol = solve_problem(&mesh, &spec)?;
    let ind = estimate(&sol);
    let err = error_norms(&sol, &spec.exact);
    println!("problem {name}: {} elements, {} equations", mesh.num_elements(), sol.num_equations);
    println!("displacement error {}", fmt(err.displacement));
    println!("stress error {}", fmt(err.stress));
    println!("estimator {:.4e}", ind.global());
    println!("time {:.3}s", t.elapsed().as_secs_f64());
    if let Some(dir) = out {
        write_mesh_file(&mesh, dir.join("mesh.qmesh"))?;
        if cli.vtk {
            write_vtk(dir.join("solution.vtk"), &mesh, Some(&sol), Some(&ind))?;
        }
        if cli.csv {
            write(dir.join("eta.csv"), &ind.to_csv())?;
        }
    }
    Ok(())
}

fn cmd_afem(cli: &Cli) -> Result<()> {
    let (mesh, spec, name) = cli.problem(ProblemName::Crack);
    let Some(spec) = spec else { bail!("problem '{name}' has no equations to solve") };
    let out = cli.out_dir()?;
    let mut stop = StopRule {
        max_dofs: cli.max_dof,
        max_iterations: cli.max_level,
        error_target: None,
    };
    if stop.max_dofs.is_none() && stop.max_iterations.is_none() {
        stop.max_iterations = Some(10);
    }
    let opts = AfemOptions {
        theta: cli.theta,
        stop,
        record_indicators: cli.csv,
        ..AfemOptions::default()
    };
    let r = afem_loop(mesh, &spec, &opts)?;
    println!("iteration  elements      dofs        eta   u error   σ error   time");
    for row in &r.trace.rows {
        println!(
            "{:9} {:9} {:9} {:10.4e} {:>9} {:>9} {:6.3}s",
            row.iteration,
            row.elements,
            row.dofs,
            row.eta,
            fmt(row.displacement_error),
            fmt(row.stress_error),
            row.t_solve + row.t_estimate + row.t_mark + row.t_refine
        );
    }
    if let Some(dir) = out {
        write_mesh_file(&r.mesh, dir.join("final.qmesh"))?;
        if cli.csv {
            write(dir.join("afem.csv"), &r.trace.to_csv())?;
            for (k, ind) in r.history.iter().enumerate() {
                fs::write(dir.join(format!("eta_{k:03}.csv")), ind.to_csv())?;
            }
        }
        if cli.vtk {
            write_vtk(dir.join("final.vtk"), &r.mesh, Some(&r.solution), Some(&r.indicators))?;
        }
    }
    Ok(())
}

fn cmd_table(cli: &Cli) -> Result<()> {
    let problem = cli.problem.unwrap_or(ProblemName::Beam1);
    if !matches!(problem, ProblemName::Beam1 | ProblemName::Beam2) {
        bail!("tables exist for beam1 and beam2 only");
    }
    let out = cli.out_dir()?;
    for transition in [false, true] {
        let opts = TableOptions {
            problem,
            variant: cli.variant,
            transition,
            nus: cli.nu.map_or(TABLE_NUS.to_vec(), |nu| vec![nu]),
            sizes: table_sizes(cli.mesh_size.unwrap_or((10, 2)), cli.levels),
            q4: cli.q4,
            e: cli.e.unwrap_or(1500.0),
        };
        let t = run_table(&opts)?;
        let tag = format!(
            "{problem}_{}{}",
            match cli.variant {
                MeshVariant::Regular => "regular",
                MeshVariant::Irregular => "irregular",
            },
            if transition { "_transition" } else { "" }
        );
        println!("# {tag}: relative displacement error\n{}", t.displacement_csv());
        println!("# {tag}: relative stress error\n{}", t.stress_csv());
        if let (Some(dir), true) = (out, cli.csv) {
            write(dir.join(format!("{tag}_displacement.csv")), &t.displacement_csv())?;
            write(dir.join(format!("{tag}_stress.csv")), &t.stress_csv())?;
        }
    }
    Ok(())
}

fn cmd_circle(cli: &Cli) -> Result<()> {
    let out = cli.out_dir()?;
    let level = cli.max_level.unwrap_or(6);
    let (mesh, steps) = circle_tracking(level, cli.steps)?;
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .filter(|s| s.touched > 0 && s.seconds > 0.0)
        .map(|s| (s.touched as f64, s.seconds))
        .collect();
    let total: f64 = steps.iter().map(|s| s.seconds).sum();
    let max = steps.iter().map(|s| s.elements).max().unwrap_or(0);
    println!("{} steps at level {level}: max {max} elements, kernel time {total:.3}s", steps.len());
    if pts.len() >= 2 {
        println!("log-log slope of time against touched elements: {:.3}", loglog_slope(&pts));
    }
    if let Some(dir) = out {
        if cli.csv {
            let mut s = String::from("step,radius,elements,touched,seconds\n");
            for st in &steps {
                s += &format!("{},{},{},{},{:.6e}\n", st.step, st.radius, st.elements, st.touched, st.seconds);
            }
            write(dir.join("circle.csv"), &s)?;
        }
        if cli.vtk {
            write_vtk(dir.join("circle_final.vtk"), &mesh, None, None)?;
        }
        write_mesh_file(&mesh, dir.join("circle_final.qmesh"))?;
    }
    Ok(())
}

fn cmd_demo_refine(cli: &Cli) -> Result<()> {
    let out = cli.out_dir()?;
    let mut mesh = fixtures::lshape();
    validate(&mesh)?;
    let save = |m: &Mesh, name: &str| -> Result<()> {
        if let Some(dir) = out {
            write_mesh_file(m, dir.join(format!("{name}.qmesh")))?;
            if cli.vtk {
                write_vtk(dir.join(format!("{name}.vtk")), m, None, None)?;
            }
        }
        Ok(())
    };
    let report = |m: &Mesh, what: &str| {
        println!("{what}: {} nodes, {} edges, {} elements", m.num_nodes(), m.num_edges(), m.num_elements());
    };
    report(&mesh, "reference mesh");
    save(&mesh, "reference")?;

    let marks = MarkSet::new([1, 3, 4, 5]);
    let s = coarsen(&mut mesh, &marks)?;
    report(&mesh, "coarsened");
    println!("  good nodes {:?} (1-based)", s.good_nodes.iter().map(|n| n + 1).collect::<Vec<_>>());
    save(&mesh, "coarsened")?;

    let all = post_mark(&mesh, &MarkSet::all(&mesh));
    println!("edge classes for refining every element:\n{}", classify_refine_edges(&mesh, &all)?.to_csv());
    refine(&mut mesh, &all)?;
    report(&mesh, "refined");
    save(&mesh, "refined")?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve => cmd_solve(&cli),
        Command::Afem => cmd_afem(&cli),
        Command::Table => cmd_table(&cli),
        Command::Circle => cmd_circle(&cli),
        Command::DemoRefine => cmd_demo_refine(&cli),
    }
}
