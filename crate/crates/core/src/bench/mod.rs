//! Drivers for the numerical experiments: the adaptive loop, convergence
//! tables for the beam problems, moving-interface tracking, and exporters.

mod afem;
mod circle;
mod table;
mod vtk;

pub use afem::{afem_loop, estimate, loglog_slope, AfemError, AfemOptions, AfemResult, AfemRow, AfemTrace, Marking, StopRule};
pub use circle::{circle_tracking, level, meets_circle, CircleStep};
pub use table::{run_table, table_mesh, table_sizes, ErrorTable, TableOptions, TABLE_NUS};
pub use vtk::{export_vtk, write_vtk};

#[cfg(test)]
mod tests;
