//! Adaptive hybrid stress finite elements on 1-irregular quadrilateral meshes.

pub mod adapt;
pub mod bench;
pub mod elements;
pub mod estimate;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solve;
