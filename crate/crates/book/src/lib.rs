//! Runs every Rust block of the guide as a doctest.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/mesh.md")]
pub mod mesh {}

#[doc = include_str!("../../../book/src/adapt.md")]
pub mod adapt {}

#[doc = include_str!("../../../book/src/elements.md")]
pub mod elements {}

#[doc = include_str!("../../../book/src/solve.md")]
pub mod solve {}

#[doc = include_str!("../../../book/src/estimate.md")]
pub mod estimate {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
